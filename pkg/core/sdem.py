# coding: utf-8
"""
@author: sdy
@email: sdy@epri.sgcc.com.cn

Spheropolygon rigid bodies with vertex-edge contact.
"""

import networkx as nx
import numpy as np
from shapely.geometry import Polygon

from core.errors import DegenerateGeometry
from core.misc import cross2, perp, rotation

EPS = 1e-12


class ContactMaterial:
    """
    :param kn: float. Normal stiffness.
    :param kt: float. Tangential stiffness.
    :param mu: float. Friction coefficient.
    """

    def __init__(self, kn, kt, mu=0.):
        self.kn = float(kn)
        self.kt = float(kt)
        self.mu = float(mu)

    def check(self, name=''):
        if self.kn > 0. and self.kt > 0. and self.mu >= 0.:
            return []
        return [('contact-material', '%s: need kn > 0, kt > 0, mu >= 0 (got %g, %g, %g)'
                 % (name, self.kn, self.kt, self.mu))]

    @staticmethod
    def combine(m1, m2):
        if m1 is m2:
            return m1
        return ContactMaterial(min(m1.kn, m2.kn), min(m1.kt, m2.kt), min(m1.mu, m2.mu))

    def __repr__(self):
        return "ContactMaterial(kn=%g, kt=%g, mu=%g)" % (self.kn, self.kt, self.mu)


class Spheropolygon:
    """
    Rigid body: polygon swept by a disk of radius a.
    Local vertices are CCW and centred on the centre of mass.
    """

    def __init__(self, local_vertices, radius, mass, inertia, material,
                 center=(0., 0.), angle=0., fixed=False, name=None):
        self.local_vertices = np.array(local_vertices, dtype=np.float64).reshape(-1, 2)
        self.radius = float(radius)
        self.mass = float(mass)
        self.inertia = float(inertia)
        self.material = material
        self.center = np.array(center, dtype=np.float64)
        self.angle = float(angle)
        self.v = np.zeros(2)
        self.omega = 0.
        # v and omega hold half-step values once the first step has run
        self.staggered = False
        self.fixed = bool(fixed)
        self.name = name
        self.id = -1
        self.bounding_radius = float(np.max(np.linalg.norm(self.local_vertices, axis=1))) \
            + self.radius
        n = len(self.local_vertices)
        self.edge_index = np.stack((np.arange(n), (np.arange(n) + 1) % n), axis=1)

    @property
    def n_vertices(self):
        return len(self.local_vertices)

    def world_vertices(self):
        return self.local_vertices @ rotation(self.angle).T + self.center

    def edges(self, verts=None):
        # a disk has one degenerate edge
        verts = self.world_vertices() if verts is None else verts
        return verts[self.edge_index[:, 0]], verts[self.edge_index[:, 1]]

    def surface_velocity(self, p):
        r = np.asarray(p) - self.center
        return self.v + self.omega * perp(r)

    def kinetic_energy(self):
        return 0.5 * self.mass * float(self.v @ self.v) + 0.5 * self.inertia * self.omega ** 2

    def set_velocity(self, v, omega=0.):
        if self.fixed:
            return
        self.v = np.array(v, dtype=np.float64)
        self.omega = float(omega)
        self.staggered = False

    def contains(self, p):
        return body_surface_distance(self, np.reshape(p, (1, 2)))[0][0] <= self.radius

    def __repr__(self):
        return "Spheropolygon(%s, n=%d, a=%g, fixed=%s)" \
            % (self.name, self.n_vertices, self.radius, self.fixed)


def polygon_mass_properties(verts):
    """
    :return: (signed area, centroid, polar second moment about origin).
    """
    x0, y0 = verts[:, 0], verts[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
    cr = x0 * y1 - x1 * y0
    area = 0.5 * np.sum(cr)
    if abs(area) < EPS:
        return 0., np.mean(verts, axis=0), 0.
    cx = np.sum((x0 + x1) * cr) / (6. * area)
    cy = np.sum((y0 + y1) * cr) / (6. * area)
    ixx = np.sum(cr * (y0 * y0 + y0 * y1 + y1 * y1)) / 12.
    iyy = np.sum(cr * (x0 * x0 + x0 * x1 + x1 * x1)) / 12.
    return area, np.array([cx, cy]), ixx + iyy


def sphero_mass_properties(verts, a):
    """
    Area, centroid and polar moment about the origin of polygon + disk
    (exact for convex polygons, sphero layer split in edge strips and
    corner sectors).
    """
    if len(verts) == 1:
        area = np.pi * a * a
        c = verts[0].copy()
        return area, c, area * (a * a / 2. + c @ c)
    area, cen, j = polygon_mass_properties(verts)
    moment = area * cen
    if a <= 0.:
        return area, cen, j
    n = len(verts)
    e = np.roll(verts, -1, axis=0) - verts
    length = np.linalg.norm(e, axis=1)
    normal = np.stack((e[:, 1], -e[:, 0]), axis=1) / np.maximum(length, EPS)[:, None]
    for k in range(n):
        if length[k] < EPS:
            continue
        ar = length[k] * a
        c = 0.5 * (verts[k] + verts[(k + 1) % n]) + 0.5 * a * normal[k]
        area += ar
        moment = moment + ar * c
        j += ar * ((length[k] ** 2 + a * a) / 12. + c @ c)
    for k in range(n):
        n0, n1 = normal[k - 1], normal[k]
        theta = np.arctan2(cross2(n0, n1), n0 @ n1)
        if theta <= 0.:
            continue
        ar = 0.5 * theta * a * a
        half = 0.5 * theta
        bis = n0 + n1
        bis = bis / max(np.linalg.norm(bis), EPS)
        r = 2. * a * np.sin(half) / (3. * half)
        c = verts[k] + r * bis
        area += ar
        moment = moment + ar * c
        # about the apex, then shift to the origin through the centroid
        j_apex = theta * a ** 4 / 4.
        j += j_apex - ar * r * r + ar * (c @ c)
    return area, moment / area, j


def build_body(local_vertices, radius, density=None, mass=None, fixed=False,
               material=None, center=(0., 0.), angle=0., name=None):
    """
    Spheropolygon from a vertex list given in any frame.

    :param local_vertices: list of 2-vectors.
    :param radius: float. Sphero radius.
    :param density: float. Areal density.
    :param mass: float. Total mass, overrides density.
    :param center: 2-vector. World position of the centre of mass.
    :return: Spheropolygon.
    """
    verts = np.array(local_vertices, dtype=np.float64).reshape(-1, 2)
    if len(verts) == 0 or len(verts) == 2:
        raise DegenerateGeometry("%s: need 1 or >= 3 vertices, got %d" % (name, len(verts)))
    if radius < 0.:
        raise DegenerateGeometry("%s: negative sphero radius" % name)
    if len(verts) >= 3:
        poly = Polygon(verts)
        if not poly.is_valid or not poly.exterior.is_simple:
            raise DegenerateGeometry("%s: polygon is self-intersecting" % name)
        if poly.area < EPS and radius <= 0.:
            raise DegenerateGeometry("%s: zero area and zero radius" % name)
        if polygon_mass_properties(verts)[0] < 0.:
            verts = verts[::-1].copy()
    elif radius <= 0.:
        raise DegenerateGeometry("%s: single vertex needs a positive radius" % name)
    area, cen, j = sphero_mass_properties(verts, radius)
    if area <= 0.:
        raise DegenerateGeometry("%s: zero area" % name)
    if mass is None:
        if density is None:
            raise ValueError("%s: density or mass required" % name)
        mass = density * area
    rho = mass / area
    inertia = rho * (j - area * (cen @ cen))
    return Spheropolygon(verts - cen, radius, mass, inertia, material,
                         center=center, angle=angle, fixed=fixed, name=name)


def segment_projection(p, e0, e1):
    """
    Vectorized closest point of points p on segments e0-e1 (broadcasting).

    :return: (distance, closest point, segment parameter t in [0, 1]).
    """
    e = e1 - e0
    ll = np.sum(e * e, axis=-1)
    t = np.where(ll > EPS, np.sum((p - e0) * e, axis=-1) / np.where(ll > EPS, ll, 1.), 0.)
    t = np.clip(t, 0., 1.)
    closest = e0 + t[..., None] * e
    d = np.linalg.norm(p - closest, axis=-1)
    return d, closest, t


def point_edge_distance(p, edge):
    d, closest, _ = segment_projection(np.asarray(p, dtype=np.float64),
                                       np.asarray(edge[0], dtype=np.float64),
                                       np.asarray(edge[1], dtype=np.float64))
    return float(d), closest


def polygon_inside(p, verts):
    """Even-odd test of points p (N, 2) against a polygon."""
    if len(verts) < 3:
        return np.zeros(len(p), dtype=bool)
    x, y = p[:, 0:1], p[:, 1:2]
    x0, y0 = verts[:, 0][None, :], verts[:, 1][None, :]
    x1, y1 = np.roll(verts[:, 0], -1)[None, :], np.roll(verts[:, 1], -1)[None, :]
    crosses = (y0 > y) != (y1 > y)
    dy = np.where(y1 != y0, y1 - y0, 1.)
    xint = x0 + (y - y0) * (x1 - x0) / dy
    return np.sum(crosses & (x < xint), axis=1) % 2 == 1


def body_surface_distance(body, p):
    """
    Distance of points to the polygon core of a body (0 inside).

    :param p: np.array (N, 2).
    :return: (distance to core boundary, closest point, edge id, t, inside flag).
    """
    p = np.atleast_2d(p)
    e0, e1 = body.edges()
    d, closest, t = segment_projection(p[:, None, :], e0[None, :, :], e1[None, :, :])
    k = np.argmin(d, axis=1)
    rows = np.arange(len(p))
    inside = polygon_inside(p, body.world_vertices())
    dist = np.where(inside, 0., d[rows, k])
    return dist, closest[rows, k], k, t[rows, k], inside


class ContactLedger:
    """Tangential displacement history keyed by contact feature pairs."""

    def __init__(self):
        self.data = {}

    def __len__(self):
        return len(self.data)

    def __contains__(self, key):
        return key in self.data

    def get(self, key):
        item = self.data.get(key)
        return 0. if item is None else item[0]

    def put(self, key, delta_t, stamp, fn=0.):
        self.data[key] = (delta_t, stamp, fn)

    def prune(self, stamp):
        self.data = {k: v for k, v in self.data.items() if v[1] == stamp}

    def clamp_violations(self, materials, tol=1e-9):
        """
        :param materials: func key -> ContactMaterial.
        :return: list of keys breaking k_t |d_t| <= mu f_n.
        """
        res = []
        for key, (dt_, _, fn) in self.data.items():
            m = materials(key)
            if m.kt * abs(dt_) > m.mu * fn * (1. + tol) + tol:
                res.append(key)
        return res


def contact_geometry(x, a_i, e0, e1, a_j, fallback_normal=None):
    """
    :return: None or (overlap, normal toward the vertex, contact point,
        closest point, edge parameter).
    """
    d, y, t = segment_projection(np.asarray(x), np.asarray(e0), np.asarray(e1))
    zeta = a_i + a_j - float(d)
    if zeta <= 0.:
        return None
    if d > EPS:
        n = (x - y) / d
    elif fallback_normal is not None and np.any(fallback_normal):
        n = np.asarray(fallback_normal, dtype=np.float64)
    else:
        n = np.array([1., 0.])
    p = x - (a_i - 0.5 * zeta) * n
    return zeta, n, p, y, float(t)


def contact_force(zeta, n, v_rel, key, material, ledger, dt, stamp):
    """
    Elastic normal spring with Coulomb-clamped tangential spring.

    :param v_rel: 2-vector. Velocity of the vertex side minus edge side.
    :return: force on the vertex owner.
    """
    force, delta, fn = spring_forces(zeta, n, v_rel, ledger.get(key), material, dt)
    ledger.put(key, float(delta), stamp, float(fn))
    return force


def spring_forces(zeta, n, v_rel, delta, material, dt):
    """
    Batched contact law over arrays of contacts.

    :param zeta: overlap (M,).
    :param n: unit normals (M, 2).
    :param v_rel: relative velocities (M, 2).
    :param delta: tangential history before the step (M,).
    :return: (force (M, 2), new history (M,), normal force (M,)).
    """
    zeta = np.asarray(zeta, dtype=np.float64)
    n = np.asarray(n, dtype=np.float64)
    t = perp(n)
    fn = material.kn * zeta
    delta = delta + np.sum(np.asarray(v_rel) * t, axis=-1) * dt
    limit = material.mu * fn / material.kt
    delta = np.clip(delta, -limit, limit)
    force = np.expand_dims(fn, -1) * n - np.expand_dims(material.kt * delta, -1) * t
    return force, delta, fn


def vertex_edge_contact(x, a_i, edge, a_j, key, material, v_rel, ledger, dt, stamp=0):
    geo = contact_geometry(np.asarray(x, dtype=np.float64), a_i,
                           np.asarray(edge[0], dtype=np.float64),
                           np.asarray(edge[1], dtype=np.float64), a_j)
    if geo is None:
        return None
    zeta, n, p = geo[:3]
    return contact_force(zeta, n, np.asarray(v_rel, dtype=np.float64),
                         key, material, ledger, dt, stamp), p


def _edge_normals(e0, e1):
    e = e1 - e0
    ll = np.linalg.norm(e, axis=1)
    return np.stack((e[:, 1], -e[:, 0]), axis=1) / np.maximum(ll, EPS)[:, None]


def _side_contacts(bv, be, key_base, skip=None):
    """
    Vertices of body bv against the nearest edge of body be.

    :return: list of (vertex id, edge id, zeta, normal, point, vertex-vertex pair).
    """
    xv = bv.world_vertices()
    e0, e1 = be.edges()
    d, _, t = segment_projection(xv[:, None, :], e0[None, :, :], e1[None, :, :])
    reach = bv.radius + be.radius
    normals = _edge_normals(e0, e1)
    res = []
    for k in np.nonzero(np.min(d, axis=1) < reach)[0]:
        e = int(np.argmin(d[k]))
        geo = contact_geometry(xv[k], bv.radius, e0[e], e1[e], be.radius, normals[e])
        if geo is None:
            continue
        zeta, n, p, _, tt = geo
        vv = None
        if tt <= 0.:
            vv = (int(k), int(be.edge_index[e, 0]))
        elif tt >= 1.:
            vv = (int(k), int(be.edge_index[e, 1]))
        if skip is not None and vv is not None and (vv[1], vv[0]) in skip:
            continue
        res.append((int(k), e, zeta, n, p, vv))
    return res


def pair_force_torque(bi, bj, ledger, dt, stamp=0, material=None):
    """
    Contact force of body j on body i and torques about each centre.

    :return: (F_ij on i, tau_i, tau_j). The force on j is -F_ij.
    """
    material = material or ContactMaterial.combine(bi.material, bj.material)
    f_i = np.zeros(2)
    tau_i = 0.
    tau_j = 0.
    side_i = _side_contacts(bi, bj, None)
    vv_pairs = set(c[5] for c in side_i if c[5] is not None)
    side_j = _side_contacts(bj, bi, None, skip=vv_pairs)
    for owner, other, contacts, sign in ((bi, bj, side_i, 1.), (bj, bi, side_j, -1.)):
        for k, e, zeta, n, p, _ in contacts:
            key = ('bb', owner.id, k, other.id, e)
            v_rel = owner.surface_velocity(p) - other.surface_velocity(p)
            f = contact_force(zeta, n, v_rel, key, material, ledger, dt, stamp)
            f_on_i = sign * f
            f_i += f_on_i
            tau_i += cross2(p - bi.center, f_on_i)
            tau_j += cross2(p - bj.center, -f_on_i)
    return f_i, tau_i, tau_j


class VerletList:
    """
    Candidate body pairs kept in a networkx graph over body ids.
    """

    def __init__(self, distance):
        self.distance = float(distance)
        self.G = nx.Graph()
        self.ref_center = None
        self.ref_angle = None
        self.n_builds = 0

    def build(self, bodies):
        self.G = nx.Graph()
        self.G.add_nodes_from(b.id for b in bodies)
        if bodies:
            c = np.array([b.center for b in bodies])
            r = np.array([b.bounding_radius for b in bodies])
            fixed = np.array([b.fixed for b in bodies])
            gap = np.linalg.norm(c[:, None, :] - c[None, :, :], axis=2) - r[:, None] - r[None, :]
            ii, jj = np.nonzero(np.triu(gap < self.distance, k=1))
            for i, j in zip(ii, jj):
                if fixed[i] and fixed[j]:
                    continue
                self.G.add_edge(bodies[i].id, bodies[j].id)
            self.ref_center = c.copy()
            self.ref_angle = np.array([b.angle for b in bodies])
        self.n_builds += 1

    def max_displacement(self, bodies):
        if self.ref_center is None or len(self.ref_center) != len(bodies):
            return np.inf
        if not bodies:
            return 0.
        c = np.array([b.center for b in bodies])
        ang = np.array([b.angle for b in bodies])
        r = np.array([b.bounding_radius for b in bodies])
        disp = np.linalg.norm(c - self.ref_center, axis=1) + r * np.abs(ang - self.ref_angle)
        return float(np.max(disp))

    def pairs(self):
        return sorted(tuple(sorted(e)) for e in self.G.edges)

    def clusters(self, min_num=2):
        islands = sorted(nx.connected_components(self.G), key=len, reverse=True)
        return [sorted(s) for s in islands if len(s) >= min_num]


def update_verlet(bodies, distance, verlet=None):
    """
    Rebuild the list when the accumulated surface displacement exceeds
    half the Verlet distance.

    :return: VerletList.
    """
    if verlet is None or verlet.distance != distance:
        verlet = VerletList(distance)
        verlet.build(bodies)
    elif verlet.max_displacement(bodies) > 0.5 * distance:
        verlet.build(bodies)
    return verlet


def all_pairs(bodies):
    return [(bodies[i].id, bodies[j].id) for i in range(len(bodies))
            for j in range(i + 1, len(bodies))
            if not (bodies[i].fixed and bodies[j].fixed)]


def body_forces(bodies, pairs, ledger, dt, stamp=0):
    """:return: (forces (n, 2), torques (n,))."""
    forces = np.zeros((len(bodies), 2))
    torques = np.zeros(len(bodies))
    for i, j in pairs:
        f, ti, tj = pair_force_torque(bodies[i], bodies[j], ledger, dt, stamp)
        forces[i] += f
        forces[j] -= f
        torques[i] += ti
        torques[j] += tj
    return forces, torques


def integrate_rigid(bodies, forces, torques, gravity, dt):
    """
    Leapfrog update: velocities at half steps, poses at full steps.
    A body that has not stepped yet is started from v - a * dt / 2, so
    constant forces give the exact parabola at every full step.
    """
    g = np.asarray(gravity, dtype=np.float64).reshape(2)
    for b, f, tau in zip(bodies, forces, torques):
        if b.fixed:
            b.v = np.zeros(2)
            b.omega = 0.
            continue
        acc = f / b.mass + g
        alpha = tau / b.inertia
        if not b.staggered:
            b.v = b.v - 0.5 * acc * dt
            b.omega -= 0.5 * alpha * dt
            b.staggered = True
        b.v = b.v + acc * dt
        b.omega += alpha * dt
        b.center = b.center + b.v * dt
        b.angle += b.omega * dt
