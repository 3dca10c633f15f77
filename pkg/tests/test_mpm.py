# coding: utf-8
"""
@author: sdy
@email: sdy@epri.sgcc.com.cn
"""

import numpy as np
import pytest

from core.constitutive import ElasticParams, Material
from core.errors import PointOutOfDomain
from core.grid import Grid, GridConfig, KernelKind, clear_grid
from core.mpm import MaterialPoints, TransferScheme, apic_inertia, compute_rates, g2p, \
    grid_update, nodal_forces, p2g, point_mass_threshold, update_stress


def block(cfg, n=6, seed=2, velocity=True):
    rng = np.random.RandomState(seed)
    L = cfg.spacing
    lo = cfg.origin + 3 * L
    xs = lo[0] + (np.arange(n) + 0.5) * L / 2.
    ys = lo[1] + (np.arange(n) + 0.5) * L / 2.
    gx, gy = np.meshgrid(xs, ys, indexing='ij')
    x = np.stack((gx.ravel(), gy.ravel()), axis=1)
    v = rng.randn(len(x), 2) if velocity else None
    pts = MaterialPoints(x, v, mass=rng.rand(len(x)) + 0.5, volume=np.full(len(x), L * L / 4.))
    pts.refresh_stencil(cfg)
    return pts


def make_grid(kernel):
    cfg = GridConfig((0., 0.), 0.5, (14, 14), kernel)
    grid = Grid(cfg)
    return cfg, grid


@pytest.mark.parametrize('kernel', [KernelKind.gimp(), KernelKind.bspline()])
def test_p2g_conserves_mass_and_momentum(kernel):
    cfg, grid = make_grid(kernel)
    pts = block(cfg)
    grid.mass_threshold = point_mass_threshold(pts)
    p2g(pts, grid, [TransferScheme('flip')])
    assert grid.mass.sum() == pytest.approx(pts.mass.sum(), rel=1e-12)
    np.testing.assert_allclose(grid.momentum.sum(axis=0), pts.momentum(), rtol=1e-12,
                               atol=1e-12)


def test_apic_transfer_keeps_angular_momentum():
    cfg, grid = make_grid(KernelKind.bspline())
    pts = block(cfg)
    pts.B = np.random.RandomState(4).randn(len(pts), 2, 2)
    grid.mass_threshold = point_mass_threshold(pts)
    p2g(pts, grid, [TransferScheme('apic')])
    x = grid.positions
    am_grid = np.sum(x[:, 0] * grid.momentum[:, 1] - x[:, 1] * grid.momentum[:, 0])
    assert am_grid == pytest.approx(pts.angular_momentum(apic=True), rel=1e-10)
    np.testing.assert_allclose(grid.momentum.sum(axis=0), pts.momentum(), atol=1e-10)


def test_apic_inertia():
    assert apic_inertia(KernelKind.bspline(), 0.3) == pytest.approx(0.03)
    with pytest.raises(NotImplementedError):
        apic_inertia(KernelKind.gimp(), 0.3)


def test_transfer_scheme_endpoints():
    assert TransferScheme('pic').alpha == 1.
    assert TransferScheme('flip', alpha=0.4).alpha == 0.
    assert [e[0] for e in TransferScheme('hybrid', 1.5).check(KernelKind.gimp())] \
        == ['hybrid-alpha']
    assert [e[0] for e in TransferScheme('apic').check(KernelKind.gimp())] == ['apic-kernel']
    with pytest.raises(ValueError):
        TransferScheme('mls')


@pytest.mark.parametrize('alpha,kind', [(1., 'pic'), (0., 'flip')])
def test_hybrid_endpoints_match_pic_and_flip(alpha, kind):
    res = []
    for scheme in (TransferScheme('hybrid', alpha), TransferScheme(kind)):
        cfg, grid = make_grid(KernelKind.gimp())
        pts = block(cfg)
        grid.mass_threshold = point_mass_threshold(pts)
        p2g(pts, grid, [scheme])
        nodal_forces(pts, grid, (0., -10.))
        grid_update(grid, 1e-3)
        g2p(pts, grid, [scheme], 1e-3)
        res.append(pts.v.copy())
    np.testing.assert_array_equal(res[0], res[1])


@pytest.mark.parametrize('kernel', [KernelKind.gimp(), KernelKind.bspline()])
def test_rates_of_linear_velocity_field(kernel):
    cfg, grid = make_grid(kernel)
    pts = block(cfg, velocity=False)
    a = np.array([[0.3, -1.2], [0.7, -0.1]])
    grid.velocity = grid.positions @ a.T + np.array([0.5, -2.])
    rates = compute_rates(pts, grid)
    np.testing.assert_allclose(rates.strain_rate, np.broadcast_to(0.5 * (a + a.T),
                                                                  rates.strain_rate.shape),
                               atol=1e-12)
    np.testing.assert_allclose(rates.spin_rate, np.broadcast_to(0.5 * (a - a.T),
                                                                rates.spin_rate.shape),
                               atol=1e-12)


def test_free_fall_step():
    cfg, grid = make_grid(KernelKind.gimp())
    pts = block(cfg, velocity=False)
    g, dt = np.array([0., -10.]), 1e-3
    schemes = [TransferScheme('pic')]
    mat = [Material('m', 1., ElasticParams(1e4, 5e3), None, schemes[0])]
    grid.mass_threshold = point_mass_threshold(pts)
    x0 = pts.x.copy()
    p2g(pts, grid, schemes)
    update_stress(pts, grid, dt, mat)
    nodal_forces(pts, grid, g)
    grid_update(grid, dt)
    g2p(pts, grid, schemes, dt)
    np.testing.assert_allclose(pts.v, np.broadcast_to(g * dt, pts.v.shape), atol=1e-12)
    np.testing.assert_allclose(pts.x, x0 + pts.v * dt, atol=1e-15)
    assert not np.any(pts.stress)


def test_update_stress_compression():
    cfg, grid = make_grid(KernelKind.bspline())
    pts = block(cfg, velocity=False)
    grid.velocity = -0.1 * (grid.positions - 2.)
    elastic = ElasticParams(1e4, 5e3)
    mat = [Material('m', 1., elastic, None, TransferScheme('pic'))]
    v0 = pts.volume.copy()
    update_stress(pts, grid, 1e-2, mat)
    expected = -(elastic.lame * 0.2 + 2. * elastic.G * 0.1) * 1e-2
    np.testing.assert_allclose(pts.stress[:, 0, 0], expected, rtol=1e-10)
    np.testing.assert_allclose(pts.volume, v0 * (1. - 0.2 * 1e-2), rtol=1e-12)
    np.testing.assert_allclose(pts.strain[:, 0, 0], -1e-3, rtol=1e-10)


def test_concat_keeps_state():
    a = MaterialPoints(np.zeros((2, 2)), material=[0, 0])
    b = MaterialPoints(np.ones((3, 2)), material=[1, 1, 1])
    b.yield_flag[:] = 1
    c = MaterialPoints.concat([a, MaterialPoints(np.zeros((0, 2))), b])
    assert len(c) == 5
    assert list(c.material) == [0, 0, 1, 1, 1]
    assert list(c.yield_flag) == [0, 0, 1, 1, 1]


@pytest.mark.parametrize('kernel', [KernelKind.gimp(), KernelKind.bspline()])
def test_pic_round_trip_never_adds_energy(kernel):
    for seed in range(5):
        cfg, grid = make_grid(kernel)
        pts = block(cfg, seed=seed)
        grid.mass_threshold = point_mass_threshold(pts)
        e0 = pts.kinetic_energy()
        p2g(pts, grid, [TransferScheme('pic')])
        grid_update(grid, 1e-3)
        g2p(pts, grid, [TransferScheme('pic')], 1e-3)
        assert pts.kinetic_energy() <= e0 * (1. + 1e-12)


@pytest.mark.parametrize('scheme,kernel', [('pic', KernelKind.gimp()),
                                           ('flip', KernelKind.gimp()),
                                           ('hybrid', KernelKind.gimp()),
                                           ('hybrid', KernelKind.bspline()),
                                           ('apic', KernelKind.bspline())])
def test_force_free_round_trip_keeps_momentum(scheme, kernel):
    cfg, grid = make_grid(kernel)
    pts = block(cfg, seed=7)
    if scheme == 'apic':
        pts.B = np.random.RandomState(8).randn(len(pts), 2, 2)
    schemes = [TransferScheme(scheme)]
    grid.mass_threshold = point_mass_threshold(pts)
    p0 = pts.momentum()
    p2g(pts, grid, schemes)
    grid_update(grid, 1e-3)
    g2p(pts, grid, schemes, 1e-3)
    np.testing.assert_allclose(pts.momentum(), p0, rtol=1e-12, atol=1e-10)


def test_clear_grid_is_idempotent():
    cfg, grid = make_grid(KernelKind.gimp())
    pts = block(cfg)
    grid.mass_threshold = point_mass_threshold(pts)
    p2g(pts, grid, [TransferScheme('flip')])
    nodal_forces(pts, grid, (0., -10.))
    clear_grid(grid)
    once = dict((k, getattr(grid, k).copy()) for k in
                ('mass', 'momentum', 'f_int', 'f_ext', 'f_cont', 'velocity', 'velocity_old'))
    clear_grid(grid)
    for k, v in once.items():
        assert not np.any(v)
        np.testing.assert_array_equal(getattr(grid, k), v)
    np.testing.assert_array_equal(grid.positions, Grid(cfg).positions)


def test_g2p_leaves_points_when_leaving_grid():
    cfg, grid = make_grid(KernelKind.gimp())
    pts = block(cfg)
    schemes = [TransferScheme('pic')]
    grid.mass_threshold = point_mass_threshold(pts)
    p2g(pts, grid, schemes)
    grid.velocity[:] = [-1.0e4, 0.]
    before = dict((k, getattr(pts, k).copy()) for k in ('x', 'v', 'B'))
    stencil = pts.stencil
    with pytest.raises(PointOutOfDomain):
        g2p(pts, grid, schemes, 1e-3)
    for k, v in before.items():
        np.testing.assert_array_equal(getattr(pts, k), v)
    assert pts.stencil is stencil
