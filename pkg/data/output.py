# coding: utf-8
"""
@author: sdy
@email: sdy@epri.sgcc.com.cn

Time-series CSV and snapshot archives of a run.
"""

import json
import os

import numpy as np
import pandas as pd

from core.coupling import CouplingForces
from data.scenario_def import get_format_version

FLOAT_FORMAT = '%.17g'
LEDGER_KINDS = {'bb': 0, 'imp': 1}
LEDGER_WIDTH = 4

point_fields = ['x', 'v', 'mass', 'volume', 'material', 'stress', 'strain', 'B',
                'yield_flag', 'f_cont']


class TimeSeriesWriter:
    """
    Appends one CSV record per output step, header written on open.

    :param file_name: str.
    :param channels: list of str, fixed for the run.
    """

    def __init__(self, file_name, channels):
        self.file_name = file_name
        self.columns = ['t'] + list(channels)
        self.last_t = None
        pd.DataFrame(columns=self.columns).to_csv(file_name, index=False)

    def write(self, t, values):
        if self.last_t is not None and t <= self.last_t:
            raise ValueError('time must increase: %.17g after %.17g' % (t, self.last_t))
        row = [t] + [values[c] for c in self.columns[1:]]
        df = pd.DataFrame([row], columns=self.columns)
        df.to_csv(self.file_name, mode='a', header=False, index=False,
                  float_format=FLOAT_FORMAT)
        self.last_t = t


def load_series(file_name):
    return pd.read_csv(file_name, float_precision='round_trip')


def snapshot_name(path, step):
    return os.path.join(path, 'snapshot_%08d.npz' % step)


def _ledger_arrays(ledger):
    keys = sorted(ledger.data)
    codes = np.full((len(keys), LEDGER_WIDTH + 1), -1, dtype=np.int64)
    values = np.zeros((len(keys), 3))
    for i, k in enumerate(keys):
        codes[i, 0] = LEDGER_KINDS[k[0]]
        codes[i, 1:len(k)] = k[1:]
        values[i] = ledger.data[k]
    return codes, values


def _ledger_items(codes, values):
    names = dict((v, k) for k, v in LEDGER_KINDS.items())
    res = {}
    for c, (delta, stamp, fn) in zip(codes, values):
        kind = names[int(c[0])]
        width = LEDGER_WIDTH if kind == 'bb' else LEDGER_WIDTH - 1
        key = (kind,) + tuple(int(i) for i in c[1:1 + width])
        res[key] = (float(delta), int(stamp), float(fn))
    return res


def save_snapshot(world, file_name):
    """
    Point, body, ledger and coupling state of a world at its current time.
    """
    data = dict(format_version=get_format_version('snapshot'),
                t=world.time, step=world.step)
    pts = world.points
    for k in point_fields:
        data['point_' + k] = getattr(pts, k)
    bodies = world.bodies
    data['body_name'] = np.array([b.name or '' for b in bodies], dtype=str)
    data['body_center'] = np.array([b.center for b in bodies]).reshape(-1, 2)
    data['body_angle'] = np.array([b.angle for b in bodies])
    data['body_v'] = np.array([b.v for b in bodies]).reshape(-1, 2)
    data['body_omega'] = np.array([b.omega for b in bodies])
    data['body_staggered'] = np.array([b.staggered for b in bodies], dtype=bool)
    cf = world.coupling_forces
    data['coupling_point_force'] = cf.point_force
    data['coupling_point_normal'] = cf.point_normal
    data['coupling_body_force'] = cf.body_force
    data['coupling_body_torque'] = cf.body_torque
    data['coupling_sums'] = np.array([cf.normal_sum, cf.tangential[0], cf.tangential[1],
                                      cf.n_contacts])
    data['contact_force'] = world.contact_force
    data['contact_torque'] = world.contact_torque
    data['ledger_keys'], data['ledger_values'] = _ledger_arrays(world.ledger)
    np.savez(file_name, **data)
    return file_name


def load_snapshot(file_name):
    """
    :return: dict of arrays.
    """
    arch = np.load(file_name, allow_pickle=False)
    data = dict((k, arch[k]) for k in arch.files)
    version = float(data['format_version'])
    if version > get_format_version('snapshot'):
        raise ValueError('%s: snapshot format %.1f is newer than supported %.1f'
                         % (file_name, version, get_format_version('snapshot')))
    return data


def restore_snapshot(world, data):
    """
    Overwrite the dynamic state of a world built from the same scenario.
    """
    pts = world.points
    if len(data['point_x']) != len(pts) or len(data['body_angle']) != len(world.bodies):
        raise ValueError('snapshot does not match the world: %d points, %d bodies'
                         % (len(data['point_x']), len(data['body_angle'])))
    for k in point_fields:
        setattr(pts, k, np.array(data['point_' + k]))
    if len(pts):
        pts.refresh_stencil(world.grid.cfg)
    for i, b in enumerate(world.bodies):
        b.center = np.array(data['body_center'][i])
        b.angle = float(data['body_angle'][i])
        b.v = np.array(data['body_v'][i])
        b.omega = float(data['body_omega'][i])
        if 'body_staggered' in data:
            b.staggered = bool(data['body_staggered'][i])
        else:
            b.staggered = bool(data['step'] > 0)
    cf = CouplingForces(len(pts), len(world.bodies))
    cf.point_force = np.array(data['coupling_point_force'])
    cf.point_normal = np.array(data['coupling_point_normal'])
    cf.body_force = np.array(data['coupling_body_force'])
    cf.body_torque = np.array(data['coupling_body_torque'])
    sums = data['coupling_sums']
    cf.normal_sum = float(sums[0])
    cf.tangential = np.array(sums[1:3])
    cf.n_contacts = int(sums[3])
    world.coupling_forces = cf
    world.contact_force = np.array(data['contact_force'])
    world.contact_torque = np.array(data['contact_torque'])
    world.ledger.data = _ledger_items(data['ledger_keys'], data['ledger_values'])
    world.time = float(data['t'])
    world.step = int(data['step'])
    world.verlet = None
    world.imps = None
    return world


def write_run_info(path, info):
    with open(os.path.join(path, 'run_info.json'), 'w') as fp:
        json.dump(info, fp, indent=2, sort_keys=True)


def read_run_info(path):
    with open(os.path.join(path, 'run_info.json'), 'r') as fp:
        return json.load(fp)


def points_frame(world):
    """
    Per-point table: position, velocity, in-plane stress, yield flag and
    coupling force.
    """
    pts = world.points
    cf = world.coupling_forces
    return pd.DataFrame(dict(x=pts.x[:, 0], y=pts.x[:, 1], vx=pts.v[:, 0], vy=pts.v[:, 1],
                             sxx=pts.stress[:, 0, 0], syy=pts.stress[:, 1, 1],
                             sxy=pts.stress[:, 0, 1], szz=pts.stress[:, 2, 2],
                             material=pts.material, yield_flag=pts.yield_flag,
                             fx=cf.point_force[:, 0], fy=cf.point_force[:, 1],
                             fn=cf.point_normal))


def write_points_csv(world, file_name):
    points_frame(world).to_csv(file_name, index=False, float_format=FLOAT_FORMAT)
    return file_name


def save_contact_average(path, average):
    """
    :param average: ana.channels.ContactAverage.
    """
    file_name = os.path.join(path, 'contact_average.npz')
    np.savez(file_name, format_version=get_format_version('contact_average'),
             t_start=average.t_start, duration=average.duration,
             point_normal=average.mean())
    return file_name


def load_contact_average(path):
    """
    :return: dict of arrays, None when the run wrote no average.
    """
    file_name = os.path.join(path, 'contact_average.npz')
    if not os.path.exists(file_name):
        return None
    arch = np.load(file_name, allow_pickle=False)
    return dict((k, arch[k]) for k in arch.files)
