# coding: utf-8
"""
@author: sdy
@email: sdy@epri.sgcc.com.cn
"""

import numpy as np

from core.coupling import CouplingForces, CouplingParams, coupled_step, world_critical_dt
from core.grid import Grid
from core.mpm import MaterialPoints, point_mass_threshold
from core.sdem import ContactLedger


class World:
    """
    Complete simulation state stepped by coupled_step.

    :param cfg: GridConfig.
    :param materials: list of constitutive.Material, index = material id.
    :param points: MaterialPoints.
    :param bodies: list of Spheropolygon.
    :param coupling: CouplingParams.
    :param gravity: 2-vector.
    """

    def __init__(self, cfg, materials=None, points=None, bodies=None,
                 coupling=None, gravity=(0., 0.)):
        self.grid = Grid(cfg)
        self.materials = list(materials or [])
        self.points = points if points is not None else MaterialPoints(np.zeros((0, 2)))
        self.bodies = []
        for b in bodies or []:
            self.add_body(b)
        self.coupling = coupling or CouplingParams(verlet_distance=cfg.spacing)
        self.gravity = np.asarray(gravity, dtype=np.float64).reshape(2)
        self.ledger = ContactLedger()
        self.verlet = None
        self.imps = None
        self.time = 0.
        self.step = 0
        self.config_version = 0
        self.stability_key = None
        self.contact_force = np.zeros((len(self.bodies), 2))
        self.contact_torque = np.zeros(len(self.bodies))
        self.coupling_forces = CouplingForces(len(self.points), len(self.bodies))
        self.grid.mass_threshold = point_mass_threshold(self.points)
        if len(self.points):
            self.points.refresh_stencil(cfg)

    def add_body(self, body):
        body.id = len(self.bodies)
        self.bodies.append(body)
        self.touch()
        return body

    def body(self, name):
        for b in self.bodies:
            if b.name == name:
                return b
        raise KeyError(name)

    def touch(self):
        """Mark the configuration changed so the step bound is re-evaluated."""
        self.config_version = getattr(self, 'config_version', 0) + 1

    def critical_dt(self):
        return world_critical_dt(self)

    def advance(self, dt, n_steps=1):
        for _ in range(n_steps):
            coupled_step(self, dt)

    def mpm_kinetic_energy(self):
        return self.points.kinetic_energy()

    def dem_kinetic_energy(self):
        return float(sum(b.kinetic_energy() for b in self.bodies if not b.fixed))

    def kinetic_energy(self):
        return self.mpm_kinetic_energy() + self.dem_kinetic_energy()

    def momentum(self):
        res = self.points.momentum() if len(self.points) else np.zeros(2)
        for b in self.bodies:
            if not b.fixed:
                res = res + b.mass * b.v
        return res
