# coding: utf-8
"""
@author: sdy
@email: sdy@epri.sgcc.com.cn

Named time-series channels computed from a World.
"""

import numpy as np

from core.constitutive import YIELD_NONE

# closing share of a run averaged for per-point forces
AVERAGE_SHARE = 0.2

base_channels = ['step', 'total_kinetic_energy', 'mpm_kinetic_energy',
                 'dem_kinetic_energy', 'mpm_potential_energy', 'dem_potential_energy',
                 'elastic_energy', 'mechanical_energy', 'vx2_mpm', 'vx2_dem',
                 'total_normal_coupling_force', 'total_tangential_coupling_force',
                 'n_contacts', 'yielded_fraction', 'mpm_center_x', 'mpm_center_y']


def potential_energy(mass, x, gravity):
    """
    -sum m g.x, zero at the origin.
    """
    if len(mass) == 0:
        return 0.
    return -float(np.sum(mass * (x @ gravity)))


def elastic_energy(points):
    if len(points) == 0:
        return 0.
    return 0.5 * float(np.sum(points.volume * np.einsum('nij,nij->n', points.stress[:, :2, :2],
                                                         points.strain)))


def mean_vx(mass, v):
    total = np.sum(mass)
    if total <= 0.:
        return 0.
    return float(np.sum(mass * v[:, 0]) / total)


def body_lowest(body):
    return float(np.min(body.world_vertices()[:, 1])) - body.radius


class Channels:
    """
    Fixed channel set of a run: base channels, tracked bodies, inclinations
    and the discharged mass below the outlet.

    :param world: World at t = 0.
    :param probe: dict. [probe] section.
    :param selected: list of str. Restrict to these channels, empty for all.
    """

    def __init__(self, world, probe=None, selected=None):
        probe = probe or {}
        self.track = list(probe.get('track', []))
        self.inclination = list(probe.get('inclination', []))
        self.discharge_y = probe.get('discharge_y')
        for name in self.track + self.inclination:
            world.body(name)
        self.angle0 = dict((b, world.body(b).angle) for b in self.inclination)
        self.mpm_pe0 = potential_energy(world.points.mass, world.points.x, world.gravity)
        mobile = [b for b in world.bodies if not b.fixed]
        self.dem_pe0 = potential_energy(np.array([b.mass for b in mobile]),
                                        np.array([b.center for b in mobile]).reshape(-1, 2),
                                        world.gravity)
        names = list(base_channels)
        for b in self.track:
            names += [b + '_x', b + '_y', b + '_vx', b + '_vy', b + '_omega',
                      b + '_contact_fx', b + '_contact_fy']
        for b in self.inclination:
            names += [b + '_inclination_deg', b + '_lowest']
        if self.discharge_y is not None:
            names.append('discharged_mass')
        if selected:
            unknown = [c for c in selected if c not in names]
            if unknown:
                raise ValueError('unknown output channels: %s' % ', '.join(unknown))
            names = [c for c in names if c in selected or c == 'step']
        self.names = names

    def all_values(self, world):
        pts = world.points
        mobile = [b for b in world.bodies if not b.fixed]
        bm = np.array([b.mass for b in mobile])
        bv = np.array([b.v for b in mobile]).reshape(-1, 2)
        mpm_ke = world.mpm_kinetic_energy() if len(pts) else 0.
        dem_ke = world.dem_kinetic_energy()
        mpm_pe = potential_energy(pts.mass, pts.x, world.gravity) - self.mpm_pe0
        dem_pe = potential_energy(bm, np.array([b.center for b in mobile]).reshape(-1, 2),
                                  world.gravity) - self.dem_pe0
        ee = elastic_energy(pts)
        cf = world.coupling_forces
        total_mass = float(np.sum(pts.mass))
        center = np.sum(pts.mass[:, None] * pts.x, axis=0) / total_mass if total_mass > 0. \
            else np.zeros(2)
        res = dict(
            step=world.step,
            total_kinetic_energy=mpm_ke + dem_ke,
            mpm_kinetic_energy=mpm_ke,
            dem_kinetic_energy=dem_ke,
            mpm_potential_energy=mpm_pe,
            dem_potential_energy=dem_pe,
            elastic_energy=ee,
            mechanical_energy=mpm_ke + dem_ke + mpm_pe + dem_pe + ee,
            vx2_mpm=mean_vx(pts.mass, pts.v) ** 2 if len(pts) else 0.,
            vx2_dem=mean_vx(bm, bv) ** 2 if len(mobile) else 0.,
            total_normal_coupling_force=cf.normal_sum,
            total_tangential_coupling_force=cf.tangential_sum,
            n_contacts=cf.n_contacts,
            yielded_fraction=float(np.mean(pts.yield_flag != YIELD_NONE)) if len(pts) else 0.,
            mpm_center_x=float(center[0]),
            mpm_center_y=float(center[1]),
        )
        for name in self.track:
            b = world.body(name)
            f = cf.body_force[b.id] + world.contact_force[b.id] \
                if len(world.contact_force) else cf.body_force[b.id]
            res.update({name + '_x': b.center[0], name + '_y': b.center[1],
                        name + '_vx': b.v[0], name + '_vy': b.v[1],
                        name + '_omega': b.omega,
                        name + '_contact_fx': f[0], name + '_contact_fy': f[1]})
        for name in self.inclination:
            b = world.body(name)
            res[name + '_inclination_deg'] = float(np.degrees(abs(b.angle - self.angle0[name])))
            res[name + '_lowest'] = body_lowest(b)
        if self.discharge_y is not None:
            res['discharged_mass'] = float(np.sum(pts.mass[pts.x[:, 1] < self.discharge_y]))
        return res

    def values(self, world):
        res = self.all_values(world)
        return dict((k, float(res[k]) if k not in ('step', 'n_contacts') else int(res[k]))
                    for k in self.names)


class ContactAverage:
    """
    Time average of the per-point coupling normal force over the closing
    part of a run.

    :param n_points: int.
    :param t_start: float. Steps ending after this time are averaged.
    """

    def __init__(self, n_points, t_start):
        self.t_start = float(t_start)
        self.impulse = np.zeros(n_points)
        self.duration = 0.

    def add(self, world, dt):
        if world.time <= self.t_start:
            return
        self.impulse += world.coupling_forces.point_normal * dt
        self.duration += dt

    def mean(self):
        if self.duration <= 0.:
            return np.zeros_like(self.impulse)
        return self.impulse / self.duration
