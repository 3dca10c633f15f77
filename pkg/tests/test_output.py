# coding: utf-8
"""
@author: sdy
@email: sdy@epri.sgcc.com.cn
"""

import os

import numpy as np
import pytest

from ana.channels import Channels
from data.output import TimeSeriesWriter, load_contact_average, load_series, load_snapshot, \
    read_run_info, restore_snapshot, save_snapshot, snapshot_name
from data.scenario import parse_scenario, parse_text
from model.sim_runner import main, run

PUCK = """
[scenario]
name = puck
gravity = 0, 0

[grid]
origin = -2, -2
size = 4, 4
spacing = 0.25

[material.m]
density = 2
bulk_modulus = 1e3
shear_modulus = 6e2
scheme = hybrid

[contact.c]
normal_stiffness = 10
tangential_stiffness = 1
friction = 0.3

[body.puck]
shape = disk
sphero_radius = 0.2
center = 1.2, 0.5
velocity = -1, 0.5
angular_velocity = 2
density = 1

[seed.block]
shape = rect
lower = -0.5, -0.5
upper = 0.5, 0.5
points_per_cell = 4
material = m
velocity = 0.3, -0.2

[coupling]
verlet_distance = 0.2
contact_radius = 0.15

[schedule]
t_end = 0.05
output_every = 2
snapshot_every = 4

[probe]
track = puck
"""


def puck_config():
    raw, lines = parse_text(PUCK, 'puck.ini')
    return parse_scenario(raw, 'puck.ini', lines)


def test_snapshot_restart_continues_identically(tmp_path):
    cfg = puck_config()
    world = cfg.build_world()
    world.advance(cfg.dt, 5)
    f = save_snapshot(world, snapshot_name(str(tmp_path), world.step))
    assert os.path.basename(f) == 'snapshot_00000005.npz'
    world.advance(cfg.dt, 5)

    other = cfg.build_world()
    restore_snapshot(other, load_snapshot(f))
    assert other.step == 5
    assert other.bodies[0].staggered == world.bodies[0].staggered
    other.advance(cfg.dt, 5)
    assert other.step == world.step
    assert other.time == world.time
    np.testing.assert_allclose(other.points.x, world.points.x, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(other.points.v, world.points.v, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(other.points.stress, world.points.stress, rtol=1e-12,
                               atol=1e-12)
    np.testing.assert_allclose(other.bodies[0].center, world.bodies[0].center, rtol=1e-12)
    assert other.bodies[0].omega == pytest.approx(world.bodies[0].omega, rel=1e-12)


def test_snapshot_rejects_other_world(tmp_path):
    cfg = puck_config()
    world = cfg.build_world()
    f = save_snapshot(world, str(tmp_path / 'snap.npz'))
    data = load_snapshot(f)
    data['point_x'] = data['point_x'][:3]
    with pytest.raises(ValueError):
        restore_snapshot(cfg.build_world(), data)


def test_channels_match_world():
    cfg = puck_config()
    world = cfg.build_world()
    ch = Channels(world, cfg.probe)
    assert 'puck_vx' in ch.names and 'discharged_mass' not in ch.names
    vals = ch.values(world)
    ke = world.kinetic_energy()
    assert vals['total_kinetic_energy'] == pytest.approx(ke)
    assert vals['mechanical_energy'] == pytest.approx(ke)
    assert vals['vx2_mpm'] == pytest.approx(0.09)
    assert vals['puck_vx'] == pytest.approx(-1.)
    assert vals['step'] == 0
    with pytest.raises(ValueError):
        Channels(world, cfg.probe, ['no_such_channel'])


def test_series_writer(tmp_path):
    f = str(tmp_path / 'series.csv')
    w = TimeSeriesWriter(f, ['a'])
    w.write(0., dict(a=0.1))
    w.write(1e-4, dict(a=1. / 3.))
    with pytest.raises(ValueError):
        w.write(1e-4, dict(a=0.))
    df = load_series(f)
    assert list(df.columns) == ['t', 'a']
    assert df['a'].iloc[1] == 1. / 3.


def test_run_is_deterministic(tmp_path):
    out = []
    for k in ('a', 'b'):
        path = str(tmp_path / k)
        run(puck_config(), path, quiet=True)
        out.append(path)
    with open(os.path.join(out[0], 'series.csv')) as fa, \
            open(os.path.join(out[1], 'series.csv')) as fb:
        assert fa.read() == fb.read()
    series = load_series(os.path.join(out[0], 'series.csv'))
    assert series['t'].iloc[0] == 0.
    assert np.all(np.diff(series['t'].values) > 0.)
    info = read_run_info(out[0])
    assert info['name'] == 'puck' and info['n_points'] == 64
    assert series['t'].iloc[-1] == pytest.approx(info['t_end'], abs=info['dt'])
    assert os.path.exists(snapshot_name(out[0], 0))
    average = load_contact_average(out[0])
    assert average['point_normal'].shape == (64,)
    assert float(average['duration']) == pytest.approx(0.2 * info['t_end'], abs=info['dt'])


def test_main_exit_codes(tmp_path, capsys):
    assert main(['list-scenarios']) == 0
    assert 'silo_d2p5_n9' in capsys.readouterr().out
    assert main(['run', '--scenario', 'no_such_scenario', '--out', str(tmp_path)]) == 1
    f = tmp_path / 'bad.ini'
    f.write_text(PUCK.replace('contact_radius = 0.15', 'contact_radius = 0.5'))
    assert main(['run', str(f), '--out', str(tmp_path / 'bad')]) == 1
    assert 'contact-radius' in capsys.readouterr().err


def test_snapshot_round_trip_is_exact(tmp_path):
    cfg = puck_config()
    world = cfg.build_world()
    world.advance(cfg.dt, 3)
    f = save_snapshot(world, str(tmp_path / 'snap.npz'))
    other = restore_snapshot(cfg.build_world(), load_snapshot(f))
    for k in ('x', 'v', 'stress', 'strain', 'B', 'mass', 'volume', 'yield_flag'):
        np.testing.assert_array_equal(getattr(other.points, k), getattr(world.points, k))
    np.testing.assert_array_equal(other.bodies[0].center, world.bodies[0].center)
    np.testing.assert_array_equal(other.bodies[0].v, world.bodies[0].v)
    assert other.bodies[0].angle == world.bodies[0].angle
    assert other.ledger.data == world.ledger.data
    assert other.time == world.time


def test_snapshot_energy_matches_series(tmp_path):
    path = str(tmp_path / 'run')
    run(puck_config(), path, quiet=True)
    series = load_series(os.path.join(path, 'series.csv'))
    row = series[series['step'] == 4].iloc[0]
    world = restore_snapshot(puck_config().build_world(),
                             load_snapshot(snapshot_name(path, 4)))
    assert row['t'] == world.time
    assert world.kinetic_energy() == pytest.approx(row['total_kinetic_energy'], rel=1e-12)
