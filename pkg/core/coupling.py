# coding: utf-8
"""
@author: sdy
@email: sdy@epri.sgcc.com.cn

Contact coupling between material points and spheropolygons, the stable
time step and the coupled step.
"""

from collections import namedtuple

import numpy as np

from core.errors import NoMobileObjects, StabilityViolation
from core.misc import cross2, perp
from core.mpm import g2p, grid_update, nodal_forces, p2g, update_stress
from core.sdem import body_forces, body_surface_distance, integrate_rigid, \
    spring_forces, update_verlet

IMP = namedtuple('IMP', ['point', 'radius', 'bodies'])

KAPPA1 = 0.8
KAPPA2 = 0.1


class CouplingParams:
    """
    :param verlet_distance: float. V_d.
    :param contact_radius: float. r_p, None for spacing / 3.
    :param kappa1: float. Continuum safety factor.
    :param kappa2: float. Rigid-body safety factor.
    :param material: ContactMaterial for point-body contact, None for the body's.
    :param dt: float or 'auto'.
    """

    def __init__(self, verlet_distance, contact_radius=None, kappa1=KAPPA1,
                 kappa2=KAPPA2, material=None, dt='auto'):
        self.verlet_distance = float(verlet_distance)
        self.contact_radius = contact_radius
        self.kappa1 = float(kappa1)
        self.kappa2 = float(kappa2)
        self.material = material
        self.dt = dt

    def radius(self, spacing):
        return spacing / 3. if self.contact_radius is None else float(self.contact_radius)


def contact_radius_bounds(spacing, points_per_cell):
    return spacing * np.sqrt(1. / points_per_cell), spacing


def check_contact_radius(r_p, spacing, points_per_cell):
    lo, hi = contact_radius_bounds(spacing, points_per_cell)
    if lo < r_p < hi:
        return []
    return [('contact-radius', 'r_p = %g outside (%g, %g) for spacing %g and %g points '
             'per cell' % (r_p, lo, hi, spacing, points_per_cell))]


class CouplingForces:
    """
    Point-side and body-side coupling forces of one step.
    """

    def __init__(self, n_points, n_bodies):
        self.point_force = np.zeros((n_points, 2))
        self.point_normal = np.zeros(n_points)
        self.body_force = np.zeros((n_bodies, 2))
        self.body_torque = np.zeros(n_bodies)
        self.normal_sum = 0.
        self.tangential = np.zeros(2)
        self.contact_points = np.zeros((0, 2))
        self.n_contacts = 0

    @property
    def tangential_sum(self):
        return float(np.linalg.norm(self.tangential))

    def residual(self):
        total = np.sum(self.point_force, axis=0) + np.sum(self.body_force, axis=0)
        scale = max(float(np.sum(np.abs(self.point_force))), 1e-300)
        return float(np.linalg.norm(total)) / scale


class ImpList:
    """
    Candidate (point, body) pairs within the Verlet distance of a body surface.
    """

    def __init__(self, distance, radius):
        self.distance = float(distance)
        self.radius = float(radius)
        self.point = np.zeros(0, dtype=int)
        self.body = np.zeros(0, dtype=int)
        self.ref_x = None
        self.ref_center = None
        self.ref_angle = None
        self.n_builds = 0

    def __len__(self):
        return len(self.point)

    def build(self, x, bodies):
        pts, bids = [], []
        self.point = np.zeros(0, dtype=int)
        self.body = np.zeros(0, dtype=int)
        for b in bodies:
            cand = np.nonzero(np.linalg.norm(x - b.center, axis=1)
                              < self.distance + b.bounding_radius)[0]
            if len(cand) == 0:
                continue
            dist = body_surface_distance(b, x[cand])[0] - b.radius
            near = cand[dist < self.distance]
            pts.append(near)
            bids.append(np.full(len(near), b.id))
        if pts:
            self.point = np.concatenate(pts)
            self.body = np.concatenate(bids)
        order = np.lexsort((self.body, self.point))
        self.point, self.body = self.point[order], self.body[order]
        self.ref_x = x.copy()
        self.ref_center = np.array([b.center for b in bodies]).reshape(-1, 2)
        self.ref_angle = np.array([b.angle for b in bodies])
        self.n_builds += 1

    def displacement(self, x, bodies):
        if self.ref_x is None or len(self.ref_x) != len(x) \
                or len(self.ref_center) != len(bodies):
            return np.inf
        dp = float(np.max(np.linalg.norm(x - self.ref_x, axis=1))) if len(x) else 0.
        db = 0.
        for b, c, a in zip(bodies, self.ref_center, self.ref_angle):
            db = max(db, float(np.linalg.norm(b.center - c)) + b.bounding_radius * abs(b.angle - a))
        return dp + db

    def to_list(self):
        res = {}
        for p, b in zip(self.point, self.body):
            res.setdefault(int(p), []).append(int(b))
        return [IMP(p, self.radius, bs) for p, bs in sorted(res.items())]


def identify_imps(x, bodies, distance, radius):
    imps = ImpList(distance, radius)
    imps.build(np.asarray(x, dtype=np.float64).reshape(-1, 2), bodies)
    return imps


def update_imps(imps, x, bodies, distance, radius):
    """
    Reuse the list until the accumulated motion may have exhausted the skin.
    """
    if imps is None or imps.distance != distance or imps.radius != radius:
        return identify_imps(x, bodies, distance, radius)
    if imps.displacement(x, bodies) > distance - radius:
        imps.build(x, bodies)
    return imps


def imp_contacts(x, body, radius):
    """
    Overlap of point disks with a body against the nearest feature.

    :return: (overlap, normal toward the point, contact point, edge id), overlap
        clamped at zero.
    """
    dist, closest, edge, _, inside = body_surface_distance(body, x)
    diff = x - closest
    dn = np.linalg.norm(diff, axis=1)
    signed = np.where(inside, -dn, dn)
    xi = np.maximum(body.radius + radius - signed, 0.)
    safe = np.where(dn > 0., dn, 1.)[:, None]
    n = np.where(inside[:, None], -diff / safe, diff / safe)
    if np.any(dn == 0.):
        e0, e1 = body.edges()
        e = e1[edge] - e0[edge]
        en = np.stack((e[:, 1], -e[:, 0]), axis=1)
        en_norm = np.linalg.norm(en, axis=1)
        en = np.where(en_norm[:, None] > 0., en / np.where(en_norm > 0., en_norm, 1.)[:, None],
                      np.array([0., 1.]))
        n = np.where((dn == 0.)[:, None], en, n)
    p = closest + (body.radius - 0.5 * xi)[:, None] * n
    return xi, n, p, edge


def imp_force(point_id, x, v, body, radius, ledger, material, dt, stamp=0):
    """
    Contact of one point disk with one body.

    :return: None or (force on the point, contact point).
    """
    xi, n, p, edge = imp_contacts(np.reshape(x, (1, 2)), body, radius)
    if xi[0] <= 0.:
        return None
    key = ('imp', int(point_id), body.id, int(edge[0]))
    v_rel = np.asarray(v) - body.surface_velocity(p[0])
    f, delta, fn = spring_forces(xi, n, v_rel[None, :], np.array([ledger.get(key)]),
                                 material, dt)
    ledger.put(key, float(delta[0]), stamp, float(fn[0]))
    return f[0], p[0]


def imp_forces(points, bodies, imps, ledger, params, dt, stamp=0):
    """
    All point-body coupling forces of a step, summed per point and per body.

    :return: CouplingForces.
    """
    res = CouplingForces(len(points), len(bodies))
    if imps is None or len(imps) == 0:
        return res
    cps = []
    for b in bodies:
        sel = imps.point[imps.body == b.id]
        if len(sel) == 0:
            continue
        xi, n, p, edge = imp_contacts(points.x[sel], b, imps.radius)
        hit = xi > 0.
        if not np.any(hit):
            continue
        sel, xi, n, p, edge = sel[hit], xi[hit], n[hit], p[hit], edge[hit]
        material = params.material or b.material
        keys = [('imp', int(i), b.id, int(e)) for i, e in zip(sel, edge)]
        delta = np.array([ledger.get(k) for k in keys])
        r = p - b.center
        v_rel = points.v[sel] - (b.v + b.omega * perp(r))
        f, delta, fn = spring_forces(xi, n, v_rel, delta, material, dt)
        for k, d_, f_ in zip(keys, delta, fn):
            ledger.put(k, float(d_), stamp, float(f_))
        np.add.at(res.point_force, sel, f)
        np.add.at(res.point_normal, sel, fn)
        accumulate_on_bodies(res, b.id, -f, p, b.center)
        res.normal_sum += float(np.sum(fn))
        res.tangential += np.sum(f - fn[:, None] * n, axis=0)
        res.n_contacts += len(sel)
        cps.append(p)
    if cps:
        res.contact_points = np.vstack(cps)
    return res


def accumulate_on_bodies(forces, body_id, f, p, center):
    # f acts on the body at the contact points p
    f = np.atleast_2d(f)
    p = np.atleast_2d(p)
    forces.body_force[body_id] += np.sum(f, axis=0)
    forces.body_torque[body_id] += float(np.sum(cross2(p - center, f)))


def scatter_coupling_to_grid(points, grid, point_force):
    if len(points) == 0:
        return
    idx, w, _ = points.stencil if points.stencil is not None \
        else points.refresh_stencil(grid.cfg)
    grid.f_cont += grid.scatter_vector(idx, w[:, :, None] * point_force[:, None, :])


def critical_dt(cfg, materials, bodies, kappa1=KAPPA1, kappa2=KAPPA2, kn=None):
    """
    Stable explicit step of the coupled system.

    :param cfg: GridConfig or None.
    :param materials: list of constitutive.Material in use.
    :param bodies: list of Spheropolygon.
    :param kn: float. Stiffest normal spring, None for the bodies' largest.
    :return: float.
    """
    cand = []
    if cfg is not None and materials:
        c_max = max(m.elastic.p_wave_speed(m.density) for m in materials)
        cand.append(kappa1 * cfg.spacing / c_max)
    mobile = [b for b in bodies if not b.fixed]
    if mobile:
        if kn is None:
            kn = max(b.material.kn for b in bodies)
        m_min = min(b.mass for b in mobile)
        cand.append(2. * np.pi * kappa2 * np.sqrt(m_min / kn))
    if not cand:
        raise NoMobileObjects("neither material points nor mobile bodies present")
    return min(cand)


def world_critical_dt(world):
    p = world.coupling
    kn = [b.material.kn for b in world.bodies]
    if p.material is not None:
        kn.append(p.material.kn)
    used = sorted(set(world.points.material.tolist()))
    mats = [world.materials[i] for i in used]
    return critical_dt(world.grid.cfg if mats else None, mats, world.bodies,
                       p.kappa1, p.kappa2, max(kn) if kn else None)


def check_stability(world, dt):
    # evaluated once per configuration
    key = (dt, world.config_version)
    if world.stability_key == key:
        return
    dt_min = world_critical_dt(world) if (len(world.points) or
                                          any(not b.fixed for b in world.bodies)) else np.inf
    if dt > dt_min * (1. + 1e-12):
        raise StabilityViolation(dt, dt_min)
    world.stability_key = key


def coupled_step(world, dt):
    """
    One step: (i) contact detection and contact forces, (ii) point-to-grid
    transfer and stress update, (iii) nodal forces, grid update and
    point update, (iv) rigid-body update.
    """
    check_stability(world, dt)
    stamp = world.step + 1
    bodies = world.bodies
    points = world.points
    p = world.coupling
    radius = p.radius(world.grid.cfg.spacing)

    # (i)
    if bodies:
        world.verlet = update_verlet(bodies, p.verlet_distance, world.verlet)
        forces, torques = body_forces(bodies, world.verlet.pairs(), world.ledger, dt, stamp)
    else:
        forces, torques = np.zeros((0, 2)), np.zeros(0)
    if bodies and len(points):
        world.imps = update_imps(world.imps, points.x, bodies, p.verlet_distance, radius)
    coupling = imp_forces(points, bodies, world.imps, world.ledger, p, dt, stamp)
    world.ledger.prune(stamp)
    points.f_cont = coupling.point_force

    # (ii)
    grid = world.grid
    grid.clear()
    schemes = [m.scheme for m in world.materials]
    p2g(points, grid, schemes)
    update_stress(points, grid, dt, world.materials)

    # (iii)
    nodal_forces(points, grid, world.gravity)
    scatter_coupling_to_grid(points, grid, coupling.point_force)
    grid_update(grid, dt)
    g2p(points, grid, schemes, dt)

    # (iv)
    integrate_rigid(bodies, forces + coupling.body_force, torques + coupling.body_torque,
                    world.gravity, dt)
    world.contact_force = forces
    world.contact_torque = torques
    world.coupling_forces = coupling
    world.time += dt
    world.step += 1


def coupling_resolution(world, dt):
    """
    omega dt of the stiffest point-body spring acting on the lightest point.
    """
    if len(world.points) == 0 or not world.bodies:
        return 0.
    kn = [b.material.kn for b in world.bodies]
    if world.coupling.material is not None:
        kn = [world.coupling.material.kn]
    return float(np.sqrt(max(kn) / np.min(world.points.mass)) * dt)
