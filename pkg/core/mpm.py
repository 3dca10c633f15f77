# coding: utf-8
"""
@author: sdy
@email: sdy@epri.sgcc.com.cn

Material points and particle-grid transfers, update-stress-first ordering.
"""

from collections import namedtuple

import numpy as np

from core.grid import KernelKind, MASS_EPS, stencil_arrays

RateTensors = namedtuple('RateTensors', ['strain_rate', 'spin_rate'])


class TransferScheme:
    """
    Particle-grid velocity transfer.

    :param kind: str. 'pic', 'flip', 'hybrid' or 'apic'.
    :param alpha: float. PIC share of the hybrid blend.
    """
    PIC = 'pic'
    FLIP = 'flip'
    HYBRID = 'hybrid'
    APIC = 'apic'

    def __init__(self, kind=HYBRID, alpha=0.05):
        if kind not in (self.PIC, self.FLIP, self.HYBRID, self.APIC):
            raise ValueError("Unknown transfer scheme: %s" % kind)
        self.kind = kind
        if kind == self.PIC:
            alpha = 1.
        elif kind == self.FLIP:
            alpha = 0.
        self.alpha = float(alpha)

    @property
    def is_apic(self):
        return self.kind == self.APIC

    def check(self, kernel):
        errors = []
        if not 0. <= self.alpha <= 1.:
            errors.append(('hybrid-alpha', 'alpha %g outside [0, 1]' % self.alpha))
        if self.is_apic and kernel.name != KernelKind.BSPLINE:
            errors.append(('apic-kernel', 'APIC requires the B-spline kernel'))
        return errors

    def __repr__(self):
        if self.kind == self.HYBRID:
            return "TransferScheme(hybrid, alpha=%g)" % self.alpha
        return "TransferScheme(%s)" % self.kind


def apic_inertia(kernel, L):
    """
    Scalar D_p of the APIC inertia matrix D_p * I.
    """
    if kernel.name == KernelKind.BSPLINE:
        return L * L / 3.
    raise NotImplementedError("APIC inertia undefined for %s" % kernel)


class MaterialPoints:
    """
    Struct-of-arrays store of all material points.
    """

    def __init__(self, x, v=None, mass=None, volume=None, material=None):
        self.x = np.array(x, dtype=np.float64).reshape(-1, 2)
        n = len(self.x)
        self.v = np.zeros((n, 2)) if v is None else np.array(v, dtype=np.float64).reshape(n, 2)
        self.mass = np.ones(n) if mass is None else np.array(mass, dtype=np.float64).reshape(n)
        self.volume = np.ones(n) if volume is None \
            else np.array(volume, dtype=np.float64).reshape(n)
        self.material = np.zeros(n, dtype=int) if material is None \
            else np.array(material, dtype=int).reshape(n)
        self.stress = np.zeros((n, 3, 3))
        self.strain = np.zeros((n, 2, 2))
        self.B = np.zeros((n, 2, 2))
        self.yield_flag = np.zeros(n, dtype=int)
        self.f_cont = np.zeros((n, 2))
        self.stencil = None

    def __len__(self):
        return len(self.x)

    @classmethod
    def concat(cls, groups):
        groups = [g for g in groups if len(g)]
        if not groups:
            return cls(np.zeros((0, 2)))
        res = cls(np.vstack([g.x for g in groups]),
                  np.vstack([g.v for g in groups]),
                  np.concatenate([g.mass for g in groups]),
                  np.concatenate([g.volume for g in groups]),
                  np.concatenate([g.material for g in groups]))
        for name in ('stress', 'strain', 'B', 'yield_flag', 'f_cont'):
            setattr(res, name, np.concatenate([getattr(g, name) for g in groups]))
        return res

    def kinetic_energy(self):
        return 0.5 * np.sum(self.mass * np.sum(self.v * self.v, axis=1))

    def momentum(self):
        return np.sum(self.mass[:, None] * self.v, axis=0)

    def angular_momentum(self, apic=False):
        """
        :param apic: bool. Include the affine spin term m (B_yx - B_xy).
        """
        mv = self.mass[:, None] * self.v
        am = np.sum(self.x[:, 0] * mv[:, 1] - self.x[:, 1] * mv[:, 0])
        if apic:
            am += np.sum(self.mass * (self.B[:, 1, 0] - self.B[:, 0, 1]))
        return am

    def refresh_stencil(self, cfg):
        self.stencil = stencil_arrays(self.x, cfg)
        return self.stencil


def _stencil(points, grid):
    if points.stencil is None:
        points.refresh_stencil(grid.cfg)
    return points.stencil


def _apic_mask(points, schemes):
    if not schemes:
        return np.zeros(len(points), dtype=bool)
    apic_ids = [i for i, s in enumerate(schemes) if s.is_apic]
    return np.isin(points.material, apic_ids)


def p2g(points, grid, schemes):
    """
    Scatter mass and momentum to the grid.

    :param points: MaterialPoints.
    :param grid: Grid, cleared.
    :param schemes: list of TransferScheme indexed by material id.
    """
    if len(points) == 0:
        return
    idx, w, _ = _stencil(points, grid)
    mw = points.mass[:, None] * w
    grid.mass += grid.scatter_scalar(idx, mw)
    mom = mw[:, :, None] * points.v[:, None, :]
    apic = _apic_mask(points, schemes)
    if np.any(apic):
        dinv = 1. / apic_inertia(grid.cfg.kernel, grid.cfg.spacing)
        r = grid.positions[idx] - points.x[:, None, :]
        affine = np.einsum('nij,nkj->nki', points.B, r) * dinv
        mom = mom + np.where(apic[:, None, None], mw[:, :, None] * affine, 0.)
    grid.momentum += grid.scatter_vector(idx, mom)
    active = grid.active()
    grid.velocity[active] = grid.momentum[active] / grid.mass[active, None]
    grid.velocity_old[:] = grid.velocity


def compute_rates(points, grid):
    """
    Strain and spin rates from start-of-step nodal velocities.

    :return: RateTensors of arrays (N, 2, 2).
    """
    idx, _, grad = _stencil(points, grid)
    vel = grid.velocity[idx]
    lgrad = np.einsum('nki,nkj->nij', vel, grad)
    lt = np.swapaxes(lgrad, 1, 2)
    return RateTensors(0.5 * (lgrad + lt), 0.5 * (lgrad - lt))


def update_stress(points, grid, dt, materials):
    """
    Advance stress, strain and volume of every point.

    :param materials: list of constitutive.Material indexed by material id.
    """
    if len(points) == 0:
        return
    rates = compute_rates(points, grid)
    for mid, mat in enumerate(materials):
        sel = points.material == mid
        if not np.any(sel):
            continue
        stress, flags = mat.update(points.stress[sel], rates.strain_rate[sel],
                                   rates.spin_rate[sel], dt)
        points.stress[sel] = stress
        points.yield_flag[sel] = flags
    points.strain += rates.strain_rate * dt
    points.volume *= 1. + np.trace(rates.strain_rate, axis1=1, axis2=2) * dt


def nodal_forces(points, grid, gravity):
    """
    Internal force from point stresses and body force from gravity.
    """
    if len(points) == 0:
        return
    idx, w, grad = _stencil(points, grid)
    sig = points.stress[:, :2, :2] * points.volume[:, None, None]
    fint = -np.einsum('nij,nkj->nki', sig, grad)
    grid.f_int += grid.scatter_vector(idx, fint)
    b = np.asarray(gravity, dtype=np.float64).reshape(2)
    fext = (points.mass[:, None] * w)[:, :, None] * b[None, None, :]
    grid.f_ext += grid.scatter_vector(idx, fext)


def grid_update(grid, dt):
    active = grid.active()
    grid.momentum[active] += grid.total_force()[active] * dt
    grid.velocity[active] = grid.momentum[active] / grid.mass[active, None]


def g2p(points, grid, schemes, dt):
    """
    Gather velocities, advect points and refresh their stencil.
    Points are left untouched when an advected position leaves the grid.
    """
    if len(points) == 0:
        return
    idx, w, _ = _stencil(points, grid)
    vnew = grid.velocity[idx]
    v_pic = np.einsum('nk,nki->ni', w, vnew)
    dv = np.einsum('nk,nki->ni', w, vnew - grid.velocity_old[idx])
    v_flip = points.v + dv
    alpha = np.ones(len(points))
    for mid, s in enumerate(schemes):
        alpha[points.material == mid] = s.alpha
    apic = _apic_mask(points, schemes)
    alpha[apic] = 1.
    v = alpha[:, None] * v_pic + (1. - alpha[:, None]) * v_flip
    x = points.x + v * dt
    # raises PointOutOfDomain before any state is written
    stencil = stencil_arrays(x, grid.cfg)
    if np.any(apic):
        r = grid.positions[idx] - points.x[:, None, :]
        b = np.einsum('nk,nki,nkj->nij', w, vnew, r)
        points.B[apic] = b[apic]
    points.v = v
    points.x = x
    points.stencil = stencil


def point_mass_threshold(points):
    if len(points) == 0:
        return 0.
    return MASS_EPS * float(np.max(points.mass))
