# coding: utf-8
"""
@author: sdy
@email: sdy@epri.sgcc.com.cn

Silo discharge rates and the 2D Beverloo law Q = C rho sqrt(g) (D0 - k_c d)^p.
"""

import os
from collections import namedtuple

import glob2
import numpy as np
import pandas as pd
from scipy.optimize import minimize_scalar
from sklearn.linear_model import LinearRegression

from core.errors import FitDegenerate
from data.output import load_series, read_run_info

BeverlooFit = namedtuple('BeverlooFit', ['C', 'k_c', 'exponent', 'residual'])

N_SCAN = 200


def discharge_rate(t, mass, window=0.5):
    """
    Steady discharge rate by linear regression over the middle part of the
    discharge window (first outflow to completion or end of record).

    :param t: np.array.
    :param mass: np.array. Discharged mass.
    :param window: float. Central share of the window used.
    :return: float.
    """
    t = np.asarray(t, dtype=np.float64)
    mass = np.asarray(mass, dtype=np.float64)
    flowing = np.nonzero(mass > 0.)[0]
    if len(flowing) == 0:
        raise FitDegenerate('no discharged mass')
    t0 = t[max(flowing[0] - 1, 0)]
    done = np.nonzero(mass >= np.max(mass))[0][0]
    t1 = t[done]
    margin = 0.5 * (1. - window) * (t1 - t0)
    sel = (t >= t0 + margin) & (t <= t1 - margin)
    if np.count_nonzero(sel) < 2:
        raise FitDegenerate('fewer than 2 samples in the discharge window [%g, %g]' % (t0, t1))
    reg = LinearRegression().fit(t[sel, None], mass[sel])
    return float(reg.coef_[0])


def _log_fit(x, log_q):
    reg = LinearRegression().fit(np.log(x)[:, None], log_q)
    pred = reg.predict(np.log(x)[:, None])
    return reg, float(np.sum((pred - log_q) ** 2))


def beverloo_fit(d0, q, d, rho=None, g=None):
    """
    Least-squares fit of log Q against log(D0 - k_c d) with k_c found by a
    bounded scalar search.

    :param d0: array. Neck diameters.
    :param q: array. Steady mass rates.
    :param d: float. Characteristic grain size.
    :param rho: float. Bulk density, scales C when given with g.
    :param g: float. Gravity magnitude.
    :return: BeverlooFit.
    """
    d0 = np.asarray(d0, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if len(np.unique(d0)) < 4:
        raise FitDegenerate('need at least 4 distinct neck diameters, got %d'
                            % len(np.unique(d0)))
    if np.any(q <= 0.):
        raise FitDegenerate('all rates must be positive')
    if d <= 0. or np.min(d0) <= 0.:
        raise FitDegenerate('D0 - k_c d <= 0 over the whole search range')
    k_max = 0.999 * np.min(d0) / d
    log_q = np.log(q)

    def residual(k):
        return _log_fit(d0 - k * d, log_q)[1]

    ks = np.linspace(0., k_max, N_SCAN + 1)
    res = np.array([residual(k) for k in ks])
    i = int(np.argmin(res))
    lo, hi = ks[max(i - 1, 0)], ks[min(i + 1, N_SCAN)]
    k_c = ks[i]
    if hi > lo:
        opt = minimize_scalar(residual, bounds=(lo, hi), method='bounded',
                              options=dict(xatol=1e-12))
        if opt.fun <= res[i]:
            k_c = float(opt.x)
    reg, err = _log_fit(d0 - k_c * d, log_q)
    c = float(np.exp(reg.intercept_))
    if rho is not None and g is not None:
        c /= rho * np.sqrt(g)
    return BeverlooFit(c, float(k_c), float(reg.coef_[0]), err)


def collect_silo_rates(paths, file_name=None):
    """
    Discharge rate of every silo run below the given directories.

    :param paths: str or list of str.
    :param file_name: str. Optional CSV destination.
    :return: pd.DataFrame with name, D0, Q, n_points, d, rho, g.
    """
    paths = [paths] if isinstance(paths, str) else paths
    rows = []
    for path in paths:
        for f in sorted(glob2.glob(os.path.join(path, '**', 'run_info.json'))):
            run_path = os.path.dirname(f)
            info = read_run_info(run_path)
            probe = info.get('probe', {})
            if 'neck_diameter' not in probe or 'discharge_y' not in probe:
                continue
            series = load_series(os.path.join(run_path, 'series.csv'))
            try:
                rate = discharge_rate(series['t'].values, series['discharged_mass'].values)
            except FitDegenerate as e:
                print(run_path, ': skipped,', e)
                continue
            rows.append(dict(name=info['name'], D0=probe['neck_diameter'], Q=rate,
                             n_points=info['n_points'], d=probe.get('grain_size', np.nan),
                             rho=info.get('bulk_density', np.nan),
                             g=float(np.linalg.norm(info['gravity']))))
    df = pd.DataFrame(rows, columns=['name', 'D0', 'Q', 'n_points', 'd', 'rho', 'g'])
    if file_name:
        df.to_csv(file_name, index=False, float_format='%.17g')
    return df


def fit_rates(df, d=None, rho=None, g=None):
    """
    Beverloo fit over a rates table, averaging point-count variants per D0.
    """
    if d is None:
        if 'd' not in df or df['d'].isna().all():
            raise FitDegenerate('grain size d missing')
        d = float(df['d'].dropna().iloc[0])
    if rho is None and 'rho' in df and not df['rho'].isna().all():
        rho = float(df['rho'].dropna().iloc[0])
    if g is None and 'g' in df and not df['g'].isna().all():
        g = float(df['g'].dropna().iloc[0])
    mean = df.groupby('D0')['Q'].mean()
    return beverloo_fit(mean.index.values, mean.values, d, rho, g)
