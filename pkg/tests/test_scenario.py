# coding: utf-8
"""
@author: sdy
@email: sdy@epri.sgcc.com.cn
"""

import os

import numpy as np
import pytest

from core.errors import ParseError, RegionOutsideDomain, ValidationError
from core.grid import GridConfig, KernelKind
from data.scenario import SeedRegion, builtin_scenarios, load_builtin, load_scenario, \
    parse_scenario, parse_text, seed_points
from data.scenario_def import SCENARIO_PATH, base_files

BLOCK = """
[scenario]
name = small_block
gravity = 0, -10

[grid]
origin = -2, -2
size = 4, 4
spacing = 0.25
kernel = gimp

[material.m]
density = 2
bulk_modulus = 1e3
shear_modulus = 6e2
scheme = pic

[contact.c]
normal_stiffness = 1e4
tangential_stiffness = 1e3
friction = 0.3

[body.floor]
shape = rect
width = 3
height = 0.5
sphero_radius = 0.1
center = 0, -1.2
density = 1
fixed = true

[seed.block]
shape = rect
lower = -0.5, -0.8
upper = 0.5, 0.2
points_per_cell = 4
material = m

[coupling]
verlet_distance = 0.2
contact_radius = 0.15
dt = auto

[schedule]
t_end = 0.01
output_every = 5
"""


def parse(text):
    raw, lines = parse_text(text, 'test.ini')
    return parse_scenario(raw, 'test.ini', lines)


def test_small_block_loads():
    cfg = parse(BLOCK)
    assert cfg.name == 'small_block'
    assert cfg.grid.node_counts == (17, 17)
    c = np.sqrt((1e3 + 4. * 6e2 / 3.) / 2.)
    assert cfg.dt == pytest.approx(0.8 * 0.25 / c)
    world = cfg.build_world()
    assert len(world.points) == 64
    assert world.points.mass.sum() == pytest.approx(2.)
    assert world.bodies[0].fixed


def test_units_are_converted_once():
    text = BLOCK.replace('[grid]', '[units]\nmodulus = 100\nstiffness = 0.01\n'
                                   'velocity = 100\n\n[grid]')
    text = text.replace('material = m', 'material = m\nvelocity = 0.5, 0')
    cfg = parse(text)
    mat = cfg.materials()[0]
    assert mat.elastic.K == pytest.approx(1e5)
    assert cfg.contacts()['c'].kn == pytest.approx(100.)
    world = cfg.build_world()
    np.testing.assert_allclose(world.points.v[:, 0], 50.)


def test_contact_radius_violation():
    with pytest.raises(ValidationError) as e:
        parse(BLOCK.replace('contact_radius = 0.15', 'contact_radius = 0.5'))
    assert 'contact-radius' in e.value.rules


def test_time_step_violation():
    c = np.sqrt((1e3 + 4. * 6e2 / 3.) / 2.)
    dt = 10. * 0.8 * 0.25 / c
    with pytest.raises(ValidationError) as e:
        parse(BLOCK.replace('dt = auto', 'dt = %.6g' % dt))
    assert e.value.rules == ['critical-time-step']


def test_all_violations_are_collected():
    text = BLOCK.replace('contact_radius = 0.15', 'contact_radius = 0.5')
    text = text.replace('dt = auto', 'dt = 1.0')
    text = text.replace('t_end = 0.01', 't_end = -1')
    with pytest.raises(ValidationError) as e:
        parse(text)
    rules = set(e.value.rules)
    assert {'contact-radius', 'critical-time-step', 'schedule'} <= rules


def test_unknown_material_and_bad_moduli():
    text = BLOCK.replace('material = m', 'material = sand')
    text = text.replace('bulk_modulus = 1e3', 'bulk_modulus = -1e3')
    with pytest.raises(ValidationError) as e:
        parse(text)
    assert 'unknown-material' in e.value.rules
    assert 'elastic-moduli' in e.value.rules


def test_degenerate_body():
    text = BLOCK.replace('shape = rect\nwidth = 3', 'shape = polygon\n'
                         'vertices = 0, 0; 1, 1; 1, 0; 0, 1')
    with pytest.raises(ValidationError) as e:
        parse(text)
    assert e.value.rules == ['body-geometry']


def test_region_outside_domain():
    with pytest.raises(ValidationError) as e:
        parse(BLOCK.replace('upper = 0.5, 0.2', 'upper = 0.5, 1.9'))
    assert 'region-domain' in e.value.rules


def test_parse_errors_carry_line():
    with pytest.raises(ParseError) as e:
        parse(BLOCK.replace('spacing = 0.25', 'spacing = 0.25\ncolor = red'))
    assert e.value.line == 10
    with pytest.raises(ParseError) as e:
        parse(BLOCK.replace('density = 2\n', 'density = two\n'))
    assert e.value.line == 13
    with pytest.raises(ParseError):
        parse(BLOCK.replace('[schedule]\nt_end = 0.01', '[schedule]'))
    with pytest.raises(ParseError) as e:
        parse_text('[grid]\nspacing = 1\nnot a key value line\n')
    assert e.value.line == 3


def test_seed_points_mass():
    cfg = GridConfig((-2., -2.), 0.25, (17, 17), KernelKind.gimp())
    region = SeedRegion('sq', 'rect', 'm', lower=(0., 0.), upper=(1., 1.), points_per_cell=4)
    pts = seed_points(region, 2., cfg)
    assert len(pts) == 64
    assert pts.mass.sum() == pytest.approx(2., rel=5e-3)
    disk = SeedRegion('d', 'disk', 'm', center=(0., 0.), radius=1., points_per_cell=16)
    pts = seed_points(disk, 1., cfg)
    assert pts.mass.sum() == pytest.approx(np.pi, rel=2e-2)
    assert np.all(np.linalg.norm(pts.x, axis=1) <= 1.)


def test_seed_disk_mass_and_symmetry():
    cfg = GridConfig((-6., -5.), 0.3, (121, 34), KernelKind.gimp())
    disk = SeedRegion('disc', 'disk', 'disc', center=(0., 0.), radius=2., count=5000)
    pts = seed_points(disk, 2., cfg)
    assert abs(len(pts) - 5000) < 100
    assert pts.mass.sum() == pytest.approx(2. * np.pi * 4., rel=5e-3)
    np.testing.assert_allclose(pts.x.mean(axis=0), 0., atol=1e-12)
    np.testing.assert_allclose(pts.volume, pts.volume[0], rtol=1e-14)


def test_collision_disc_matches_target_mass():
    cfg = load_builtin('collision_soft')
    pts = cfg.points()
    target = [b for b in cfg.bodies() if b.name == 'target'][0]
    assert pts.mass.sum() == pytest.approx(target.mass, rel=5e-3)
    assert pts.x[:, 1].mean() == pytest.approx(target.center[1], abs=1e-12)


def test_collision_impact_is_slow_against_wave_speed():
    for name in ('collision_soft', 'collision_hard'):
        cfg = load_builtin(name)
        mat = cfg.materials()[0]
        v = float(np.max(np.abs(cfg.points().v[:, 0])))
        assert v == pytest.approx(2.)
        assert v / mat.elastic.p_wave_speed(mat.density) < 0.05
        target = [b for b in cfg.bodies() if b.name == 'target'][0]
        gap = target.center[0] - target.radius - np.max(cfg.points().x[:, 0])
        # contact starts within the first third of the run
        assert gap / v < cfg.schedule['t_end'] / 3.


def test_seed_points_lattice_and_empty():
    cfg = GridConfig((-5., -3.), 0.35, (30, 33), KernelKind.gimp())
    region = SeedRegion('block', 'rect', 'block', lower=(-2.23125, 0.55625),
                        upper=(2.23125, 5.01875), lattice=(51, 51))
    pts = seed_points(region, 2.5, cfg)
    assert len(pts) == 2601
    assert pts.mass.sum() == pytest.approx(2.5 * 4.4625 ** 2)
    empty = SeedRegion('e', 'rect', 'm', lower=(0., 0.), upper=(0., 1.), points_per_cell=4)
    assert len(seed_points(empty, 1., cfg)) == 0


def test_seed_points_outside():
    cfg = GridConfig((0., 0.), 0.5, (10, 10), KernelKind.bspline())
    region = SeedRegion('r', 'rect', 'm', lower=(0.2, 1.), upper=(2., 2.), points_per_cell=4)
    with pytest.raises(RegionOutsideDomain):
        seed_points(region, 1., cfg)


def test_shipped_configs_load():
    for name, f in base_files().items():
        cfg = load_scenario(os.path.join(SCENARIO_PATH, f))
        assert cfg.name == name
        assert cfg.dt == pytest.approx(2.0e-4)


def test_builtin_scenarios():
    scenarios = builtin_scenarios()
    assert len(scenarios) >= 6
    for name in ('collision_soft', 'collision_hard', 'drop_bounce_soft', 'normal_force_0',
                 'friction', 'silo_d2p5_n9', 'block_impact'):
        assert name in scenarios
    cfg = load_builtin('normal_force_3')
    assert cfg.grid.spacing == pytest.approx(0.5)
    assert cfg.name == 'normal_force_3'
    friction = load_builtin('friction')
    assert friction.contacts()['floor'].mu == pytest.approx(0.3)
    hard = load_builtin('collision_hard').materials()[0]
    soft = load_builtin('collision_soft').materials()[0]
    assert hard.elastic.K == pytest.approx(10. * soft.elastic.K)
    with pytest.raises(KeyError):
        load_builtin('no_such_scenario')


def test_silo_variants_set_neck_and_count():
    cfg = load_builtin('silo_d1p5_n8')
    assert cfg.probe['neck_diameter'] == pytest.approx(1.5)
    left, right = [b for b in cfg.bodies() if b.name.startswith('floor')]
    gap = (right.center[0] - 3. - right.radius) - (left.center[0] + 3. + left.radius)
    assert gap == pytest.approx(1.5)
    n8 = len(cfg.points())
    n10 = len(load_builtin('silo_d1p5_n10').points())
    assert abs(n8 - 8000) < 400 and abs(n10 - 10000) < 500


def test_tracked_body_must_exist():
    with pytest.raises(ValidationError) as e:
        parse(BLOCK + '\n[probe]\ntrack = lid\n')
    assert e.value.rules == ['unknown-body']
