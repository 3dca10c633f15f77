# coding: utf-8
"""
@author: sdy
@email: sdy@epri.sgcc.com.cn

Acceptance checks evaluated on run outputs.
"""

import os

import glob2
import numpy as np

from ana.beverloo import collect_silo_rates, fit_rates
from data.output import load_contact_average, load_series, load_snapshot, read_run_info

NORMAL_TOL = 0.01
UNIFORM_TOL = 0.02
# points carrying less than this share of the largest force are not in the row
ROW_SHARE = 0.1
FRICTION_TOL = 0.01
HARD_TRANSFER = 0.99
SOFT_TRANSFER = 0.925
EXPONENT_RANGE = (1.35, 1.65)
COUNT_SPREAD = 0.1
MAX_JUMP_DEG = 5.
INCLINATION_TOL = 1e-3


def _result(passed, **details):
    details['passed'] = bool(passed)
    return details


def tail(series, share=0.2):
    n = max(int(round(len(series) * share)), 1)
    return series.iloc[-n:]


def check_normal_force(series, point_normal, weight):
    """
    Equilibrium normal reaction equals the weight; the bottom row carries it
    uniformly.

    :param point_normal: np.array. Per-point normal force, time averaged
        over the settled part of the run.
    """
    fn = float(tail(series)['total_normal_coupling_force'].mean())
    ratio = fn / weight
    normal = np.asarray(point_normal)
    row = normal[normal > ROW_SHARE * normal.max()] if len(normal) else normal
    spread = float((row.max() - row.min()) / row.mean()) if len(row) else np.inf
    return _result(abs(ratio - 1.) <= NORMAL_TOL and spread <= UNIFORM_TOL,
                   ratio=ratio, spread=spread, n_contacts=int(len(row)))


def check_friction(series, mu, speed_tol=1e-3):
    """
    Tangential over normal coupling force while the block slides.
    """
    fn = series['total_normal_coupling_force'].values
    ft = series['total_tangential_coupling_force'].values
    speed = np.sqrt(series['vx2_mpm'].values)
    v0 = speed[0] if len(speed) else 0.
    sel = (fn > 0.) & (speed > speed_tol * max(v0, 1e-300))
    # skip the touchdown transient
    sel[:max(int(0.2 * len(sel)), 1)] = False
    if not np.any(sel):
        return _result(False, ratio=np.nan, mu=mu, n_samples=0)
    ratio = float(np.mean(ft[sel] / fn[sel]))
    return _result(abs(ratio - mu) <= FRICTION_TOL * mu, ratio=ratio, mu=mu,
                   n_samples=int(np.count_nonzero(sel)))


def check_momentum_exchange(series, body, hard):
    v_in = float(np.sqrt(series['vx2_mpm'].iloc[0]))
    v_out = float(series[body + '_vx'].iloc[-1])
    fraction = v_out / v_in if v_in > 0. else np.nan
    limit = HARD_TRANSFER if hard else SOFT_TRANSFER
    return _result(fraction >= limit, fraction=fraction, limit=limit, v_in=v_in, v_out=v_out)


def check_energy_safety(series):
    """
    Mechanical energy never rises above its initial value once contact
    has started.
    """
    e = series['mechanical_energy'].values
    contact = np.nonzero(series['n_contacts'].values > 0)[0]
    if len(contact) == 0:
        return _result(False, reason='no contact', e0=float(e[0]))
    after = e[contact[0]:]
    excess = float(np.max(after) - e[0])
    return _result(excess < 0., e0=float(e[0]), max_after=float(np.max(after)),
                   first_contact_t=float(series['t'].iloc[contact[0]]))


def check_beverloo(rates, d=None):
    fit = fit_rates(rates, d)
    monotone = True
    for _, group in rates.groupby('n_points'):
        q = group.sort_values('D0')['Q'].values
        monotone &= bool(np.all(np.diff(q) > 0.))
    spread = 0.
    for _, group in rates.groupby('D0'):
        q = group['Q'].values
        if len(q) > 1:
            spread = max(spread, float((q.max() - q.min()) / q.min()))
    lo, hi = EXPONENT_RANGE
    return _result(lo <= fit.exponent <= hi and monotone and spread < COUNT_SPREAD,
                   exponent=fit.exponent, k_c=fit.k_c, C=fit.C, monotone=monotone,
                   count_spread=spread)


def check_block_impact(series, body, ground_y, tol=1e-6):
    """
    Inclination grows monotonically until the block touches the ground and
    never jumps by more than MAX_JUMP_DEG between records.
    """
    inc = series[body + '_inclination_deg'].values
    lowest = series[body + '_lowest'].values
    touch = np.nonzero(lowest <= ground_y + tol)[0]
    end = touch[0] if len(touch) else len(inc)
    steps = np.diff(inc[:end + 1] if end < len(inc) else inc)
    monotone = bool(np.all(steps >= -INCLINATION_TOL))
    jump = float(np.max(np.abs(np.diff(inc)))) if len(inc) > 1 else 0.
    return _result(monotone and jump <= MAX_JUMP_DEG, monotone=monotone, max_jump=jump,
                   ground_contact_t=float(series['t'].iloc[end]) if len(touch) else None,
                   max_inclination=float(np.max(inc)))


def last_snapshot(path):
    files = sorted(glob2.glob(os.path.join(path, 'snapshot_*.npz')))
    if not files:
        raise FileNotFoundError('no snapshot in %s' % path)
    return load_snapshot(files[-1])


def check_run(path):
    """
    Evaluate the check named in a run directory's run_info.json.

    :return: dict with 'passed' and check details.
    """
    info = read_run_info(path)
    series = load_series(os.path.join(path, 'series.csv'))
    kind = info.get('check')
    probe = info.get('probe', {})
    if kind == 'normal_force':
        g = float(np.linalg.norm(info['gravity']))
        average = load_contact_average(path)
        normal = average['point_normal'] if average is not None \
            else last_snapshot(path)['coupling_point_normal']
        return check_normal_force(series, normal, info['total_point_mass'] * g)
    if kind == 'friction':
        return check_friction(series, min(info['contact_mu'].values()))
    if kind == 'momentum_exchange':
        return check_momentum_exchange(series, probe['track'][0], 'hard' in info['name'])
    if kind == 'energy_safety':
        return check_energy_safety(series)
    if kind == 'block_impact':
        return check_block_impact(series, probe['inclination'][0], probe['ground_y'])
    if kind == 'beverloo':
        raise ValueError('beverloo needs several silo runs, call check_outputs on their parent')
    raise ValueError('no check defined for %s' % info.get('name'))


def check_outputs(name, path):
    """
    :param name: str. Scenario name, or 'beverloo' for a directory of silo runs.
    :param path: str. Run directory or parent of run directories.
    """
    if name == 'beverloo' or name.startswith('table3_silo'):
        return check_beverloo(collect_silo_rates(path))
    return check_run(path)
