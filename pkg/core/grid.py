# coding: utf-8
"""
@author: sdy
@email: sdy@epri.sgcc.com.cn

Background grid and interpolation kernels.
"""

import numpy as np

from core.errors import PointOutOfDomain

STENCIL = 4
MASS_EPS = 1e-12


class KernelKind:
    """
    Interpolation kernel selector.

    :param name: str. 'gimp' or 'bspline'.
    :param lp: float. GIMP half-width, None for L/2.
    """
    GIMP = 'gimp'
    BSPLINE = 'bspline'

    def __init__(self, name=GIMP, lp=None):
        if name not in (self.GIMP, self.BSPLINE):
            raise ValueError("Unknown kernel: %s" % name)
        self.name = name
        self.lp = lp

    @classmethod
    def gimp(cls, lp=None):
        return cls(cls.GIMP, lp)

    @classmethod
    def bspline(cls):
        return cls(cls.BSPLINE)

    def half_width(self, spacing):
        if self.name != self.GIMP:
            return None
        return spacing / 2. if self.lp is None else self.lp

    def support(self, spacing):
        if self.name == self.GIMP:
            return spacing + self.half_width(spacing)
        return 2. * spacing

    def __repr__(self):
        if self.name == self.GIMP:
            return "KernelKind(gimp, lp=%s)" % self.lp
        return "KernelKind(bspline)"


class GridConfig:
    """
    Uniform background grid.

    :param origin: 2-vector.
    :param spacing: float. Node interval L.
    :param node_counts: (nx, ny).
    :param kernel: KernelKind.
    """

    def __init__(self, origin, spacing, node_counts, kernel=None):
        self.origin = np.asarray(origin, dtype=np.float64).reshape(2)
        self.spacing = float(spacing)
        self.node_counts = (int(node_counts[0]), int(node_counts[1]))
        self.kernel = kernel or KernelKind.gimp()

    def check(self):
        """
        :return: list of (rule_id, message).
        """
        errors = []
        if not self.spacing > 0:
            errors.append(('grid-spacing', 'spacing must be positive, got %g'
                           % self.spacing))
        if min(self.node_counts) < STENCIL:
            errors.append(('grid-counts', 'node counts %s below %d'
                           % (self.node_counts, STENCIL)))
        lp = self.kernel.half_width(self.spacing)
        if lp is not None and not 0. < lp <= self.spacing:
            errors.append(('kernel-width', 'GIMP half-width %g outside (0, %g]'
                           % (lp, self.spacing)))
        return errors

    @property
    def n_nodes(self):
        return self.node_counts[0] * self.node_counts[1]

    @property
    def upper(self):
        return self.origin + self.spacing * (np.array(self.node_counts) - 1)

    def contains(self, x):
        x = np.atleast_2d(x)
        return np.all((x >= self.origin) & (x <= self.upper), axis=1)

    def node_index(self, i, j):
        return i * self.node_counts[1] + j

    def node_positions(self):
        ii, jj = np.meshgrid(np.arange(self.node_counts[0]),
                             np.arange(self.node_counts[1]), indexing='ij')
        pos = np.stack((ii.ravel(), jj.ravel()), axis=1) * self.spacing
        return pos + self.origin


def gimp_weight(dx, L, lp):
    """
    1D GIMP weight of a box particle of half-width lp on linear hat functions.

    :param dx: float or array. x_p - x_I.
    :param L: float. Grid spacing.
    :param lp: float. Half-width.
    :return: float or array.
    """
    dx = np.asarray(dx, dtype=np.float64)
    conds = [dx <= -L - lp,
             dx <= -L + lp,
             dx <= -lp,
             dx <= lp,
             dx <= L - lp,
             dx <= L + lp]
    vals = [0.,
            (L + lp + dx) ** 2 / (4. * L * lp),
            1. + dx / L,
            1. - (dx * dx + lp * lp) / (2. * L * lp),
            1. - dx / L,
            (L + lp - dx) ** 2 / (4. * L * lp)]
    res = np.select(conds, vals, default=0.)
    return res if res.ndim else float(res)


def gimp_weight_gradient(dx, L, lp):
    """
    Derivative of gimp_weight with respect to x_p.
    """
    dx = np.asarray(dx, dtype=np.float64)
    conds = [dx <= -L - lp,
             dx <= -L + lp,
             dx <= -lp,
             dx <= lp,
             dx <= L - lp,
             dx <= L + lp]
    vals = [0.,
            (L + lp + dx) / (2. * L * lp),
            1. / L,
            -dx / (L * lp),
            -1. / L,
            -(L + lp - dx) / (2. * L * lp)]
    res = np.select(conds, vals, default=0.)
    return res if res.ndim else float(res)


def bspline_weight(dx, L):
    """
    Two-branch spline of support 2L.
    """
    t = np.abs(np.asarray(dx, dtype=np.float64)) / L
    res = np.select([t < 1., t < 2.],
                    [0.5 * t ** 3 - t * t + 2. / 3., (2. - t) ** 3 / 6.],
                    default=0.)
    return res if res.ndim else float(res)


def bspline_weight_gradient(dx, L):
    dx = np.asarray(dx, dtype=np.float64)
    t = np.abs(dx) / L
    s = np.sign(dx) / L
    res = np.select([t < 1., t < 2.],
                    [s * (1.5 * t * t - 2. * t), -0.5 * s * (2. - t) ** 2],
                    default=0.)
    return res if res.ndim else float(res)


def kernel_1d(dx, cfg):
    L = cfg.spacing
    if cfg.kernel.name == KernelKind.GIMP:
        lp = cfg.kernel.half_width(L)
        return gimp_weight(dx, L, lp), gimp_weight_gradient(dx, L, lp)
    return bspline_weight(dx, L), bspline_weight_gradient(dx, L)


def stencil_arrays(x, cfg, strict=True):
    """
    Vectorized stencil over a 4x4 node window per point.

    :param x: np.array (N, 2).
    :param cfg: GridConfig.
    :param strict: bool. Raise when a weighted node is missing.
    :return: (idx (N, 16) int, w (N, 16), grad (N, 16, 2)).
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    n = x.shape[0]
    L = cfg.spacing
    xi = (x - cfg.origin) / L
    base = np.floor(xi).astype(np.int64) - 1
    offs = np.arange(STENCIL)
    # per-axis node indices (N, 2, 4)
    nodes = base[:, :, None] + offs[None, None, :]
    dx = x[:, :, None] - (cfg.origin[None, :, None] + nodes * L)
    w1, g1 = kernel_1d(dx, cfg)
    w1 = np.asarray(w1).reshape(n, 2, STENCIL)
    g1 = np.asarray(g1).reshape(n, 2, STENCIL)
    wx, wy = w1[:, 0, :, None], w1[:, 1, None, :]
    gx, gy = g1[:, 0, :, None], g1[:, 1, None, :]
    w = (wx * wy).reshape(n, -1)
    grad = np.stack(((gx * wy).reshape(n, -1), (wx * gy).reshape(n, -1)), axis=2)
    counts = np.array(cfg.node_counts)
    valid = (nodes >= 0) & (nodes < counts[None, :, None])
    ok = (valid[:, 0, :, None] & valid[:, 1, None, :]).reshape(n, -1)
    bad = np.any(~ok & (w != 0.), axis=1)
    if strict and np.any(bad):
        raise PointOutOfDomain(np.nonzero(bad)[0])
    ni = np.clip(nodes[:, 0, :], 0, counts[0] - 1)
    nj = np.clip(nodes[:, 1, :], 0, counts[1] - 1)
    idx = (ni[:, :, None] * counts[1] + nj[:, None, :]).reshape(n, -1)
    w = np.where(ok, w, 0.)
    grad = np.where(ok[:, :, None], grad, 0.)
    return idx, w, grad


def stencil_weights(point_pos, cfg):
    """
    Stencil of a single point.

    :param point_pos: 2-vector.
    :param cfg: GridConfig.
    :return: list of ((i, j), weight, gradient 2-vector).
    """
    idx, w, grad = stencil_arrays(np.reshape(point_pos, (1, 2)), cfg)
    res = []
    ny = cfg.node_counts[1]
    for k in range(idx.shape[1]):
        if w[0, k] == 0. and not np.any(grad[0, k]):
            continue
        res.append(((int(idx[0, k] // ny), int(idx[0, k] % ny)),
                    float(w[0, k]), grad[0, k].copy()))
    return res


class Grid:
    """
    Eulerian scratchpad holding nodal mass, momentum and force accumulators.
    """

    def __init__(self, cfg):
        self.cfg = cfg
        n = cfg.n_nodes
        self.mass = np.zeros(n)
        self.momentum = np.zeros((n, 2))
        self.f_int = np.zeros((n, 2))
        self.f_ext = np.zeros((n, 2))
        self.f_cont = np.zeros((n, 2))
        self.velocity = np.zeros((n, 2))
        self.velocity_old = np.zeros((n, 2))
        self.mass_threshold = 0.
        self.positions = cfg.node_positions()

    def clear(self):
        for arr in (self.mass, self.momentum, self.f_int, self.f_ext,
                    self.f_cont, self.velocity, self.velocity_old):
            arr.fill(0.)

    def active(self):
        return self.mass > self.mass_threshold

    def scatter_scalar(self, idx, values):
        return np.bincount(idx.ravel(), weights=values.ravel(),
                           minlength=self.cfg.n_nodes)

    def scatter_vector(self, idx, values):
        """
        :param idx: np.array (N, K).
        :param values: np.array (N, K, 2).
        :return: np.array (n_nodes, 2).
        """
        flat = idx.ravel()
        v = values.reshape(-1, 2)
        n = self.cfg.n_nodes
        return np.stack((np.bincount(flat, weights=v[:, 0], minlength=n),
                         np.bincount(flat, weights=v[:, 1], minlength=n)), axis=1)

    def total_force(self):
        return self.f_int + self.f_ext + self.f_cont


def clear_grid(grid):
    grid.clear()
