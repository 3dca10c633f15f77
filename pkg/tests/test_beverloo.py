# coding: utf-8
"""
@author: sdy
@email: sdy@epri.sgcc.com.cn
"""

import os

import numpy as np
import pandas as pd
import pytest

from ana.beverloo import beverloo_fit, collect_silo_rates, discharge_rate, fit_rates
from ana.validate import check_outputs
from core.errors import FitDegenerate
from data.output import write_run_info

NECKS = np.array([1.5, 2.0, 2.5, 3.0, 3.5])


def synthetic_rates(d0, c=2., offset=1., p=1.5):
    return c * (d0 - offset) ** p


def ramp(rate, t0=0.5, total=3.):
    t = np.linspace(0., 2., 201)
    return t, np.clip(rate * (t - t0), 0., total)


def test_fit_recovers_exact_law():
    fit = beverloo_fit(NECKS, synthetic_rates(NECKS), d=0.5)
    assert fit.exponent == pytest.approx(1.5, abs=1e-6)
    assert fit.k_c * 0.5 == pytest.approx(1., abs=1e-6)
    assert fit.C == pytest.approx(2., rel=1e-6)
    assert fit.residual < 1e-12


def test_fit_scales_c_by_density_and_gravity():
    fit = beverloo_fit(NECKS, synthetic_rates(NECKS), d=0.5, rho=1.5, g=10.)
    assert fit.C == pytest.approx(2. / (1.5 * np.sqrt(10.)), rel=1e-6)


def test_fit_constant_rate():
    fit = beverloo_fit(NECKS, np.full(5, 5.), d=0.1)
    assert fit.exponent == pytest.approx(0., abs=1e-9)


def test_fit_degenerate():
    with pytest.raises(FitDegenerate):
        beverloo_fit(NECKS[:3], synthetic_rates(NECKS[:3]), d=0.5)
    with pytest.raises(FitDegenerate):
        beverloo_fit(NECKS, np.array([1., 2., 0., 3., 4.]), d=0.5)
    with pytest.raises(FitDegenerate):
        beverloo_fit(NECKS, synthetic_rates(NECKS), d=0.)


def test_discharge_rate_on_ramp():
    t, mass = ramp(3.)
    assert discharge_rate(t, mass) == pytest.approx(3., rel=1e-9)
    with pytest.raises(FitDegenerate):
        discharge_rate(t, np.zeros_like(t))


def write_silo_run(path, name, neck, rate, n_points):
    os.makedirs(path)
    t, mass = ramp(rate, total=10.)
    pd.DataFrame(dict(t=t, discharged_mass=mass)).to_csv(os.path.join(path, 'series.csv'),
                                                          index=False)
    write_run_info(path, dict(name=name, n_points=n_points, bulk_density=1.5,
                              gravity=[0., -10.],
                              probe=dict(neck_diameter=neck, discharge_y=-1.5,
                                         grain_size=0.5)))


def test_collect_and_check_silo_runs(tmp_path):
    for neck in NECKS:
        for n in (8000, 9000):
            name = 'silo_%g_%d' % (neck, n)
            write_silo_run(str(tmp_path / name), name, neck, synthetic_rates(neck), n)
    os.makedirs(str(tmp_path / 'other'))
    df = collect_silo_rates(str(tmp_path), str(tmp_path / 'rates.csv'))
    assert len(df) == 10
    assert os.path.exists(str(tmp_path / 'rates.csv'))
    fit = fit_rates(df)
    assert fit.exponent == pytest.approx(1.5, abs=1e-4)
    assert fit.k_c * 0.5 == pytest.approx(1., abs=1e-4)
    res = check_outputs('beverloo', str(tmp_path))
    assert res['passed'] and res['monotone'] and res['count_spread'] < 1e-6
