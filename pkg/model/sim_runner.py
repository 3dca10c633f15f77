# coding: utf-8
"""
@author: sdy
@email: sdy@epri.sgcc.com.cn

Command line driver: run scenarios, list builtins, fit Beverloo, batch and check.
"""

import argparse
import os
import sys
import traceback

import numpy as np
import pandas as pd

from ana.beverloo import fit_rates
from ana.channels import AVERAGE_SHARE, Channels, ContactAverage
from ana.validate import check_outputs
from common.cmd_util import run_multi_process
from common.time_util import ProgressClock, timer
from core.errors import SimulationError
from data.output import TimeSeriesWriter, save_contact_average, save_snapshot, snapshot_name, \
    write_points_csv, write_run_info
from data.scenario import builtin_scenarios, load_builtin, load_scenario
from data.scenario_def import format_versions


def _jsonable(value):
    if isinstance(value, dict):
        return dict((k, _jsonable(v)) for k, v in value.items())
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


def run_info(cfg, world, t_end):
    contacts = cfg.contacts()
    return _jsonable(dict(
        name=cfg.name, description=cfg.description, check=cfg.check, units=cfg.units,
        dt=cfg.dt, dt_min=cfg.dt_min, t_end=t_end,
        n_points=len(world.points), total_point_mass=float(np.sum(world.points.mass)),
        bulk_density=world.materials[0].density if world.materials else None,
        gravity=world.gravity, probe=cfg.probe,
        contact_mu=dict((k, c.mu) for k, c in contacts.items()),
        bodies=[b.name for b in world.bodies], format_versions=format_versions))


def run(cfg, out_path, until=None, dump_every=None, quiet=False):
    """
    Step a validated scenario to its end time writing series.csv, snapshots
    and run_info.json under out_path.

    :param cfg: ScenarioConfig.
    :param out_path: str.
    :param until: float. Overrides schedule t_end.
    :param dump_every: int. Overrides the snapshot interval.
    :return: World at the end of the run.
    """
    os.makedirs(out_path, exist_ok=True)
    world = cfg.build_world()
    dt = cfg.dt
    t_end = cfg.schedule['t_end'] if until is None else until
    n_steps = int(np.ceil(t_end / dt - 1e-9))
    output_every = cfg.schedule['output_every']
    snapshot_every = cfg.schedule['snapshot_every'] if dump_every is None else dump_every
    per_point = cfg.output.get('per_point', False)
    channels = Channels(world, cfg.probe, cfg.output.get('channels'))
    writer = TimeSeriesWriter(os.path.join(out_path, 'series.csv'), channels.names)
    write_run_info(out_path, run_info(cfg, world, t_end))
    clock = ProgressClock(n_steps * dt, world.time)
    average = ContactAverage(len(world.points), (1. - AVERAGE_SHARE) * t_end)

    def dump():
        save_snapshot(world, snapshot_name(out_path, world.step))
        if per_point:
            write_points_csv(world, os.path.join(out_path, 'points_%08d.csv' % world.step))

    def record():
        values = channels.values(world)
        writer.write(world.time, values)
        if not quiet:
            n_islands = len(world.verlet.clusters()) if world.verlet is not None else 0
            print('step %d t = %.6g KE = %.6g contacts = %d islands = %d eta: %s'
                  % (world.step, world.time, values.get('total_kinetic_energy', np.nan),
                     world.coupling_forces.n_contacts, n_islands, clock.eta(world.time)))

    record()
    if snapshot_every:
        dump()
    with timer('run %s' % cfg.name, quiet=quiet):
        for i in range(1, n_steps + 1):
            try:
                world.advance(dt)
            except SimulationError as e:
                if e.step is None:
                    e.step = world.step + 1
                raise
            average.add(world, dt)
            snap = snapshot_every and (i % snapshot_every == 0 or i == n_steps)
            if i % output_every == 0 or i == n_steps or snap:
                record()
            if snap:
                dump()
    save_contact_average(out_path, average)
    return world


def load_config(args):
    if args.scenario:
        return load_builtin(args.scenario)
    if not args.config:
        raise ValueError('give a config file or --scenario NAME')
    return load_scenario(args.config)


def run_names(names, out=None, quiet=True):
    """
    Run builtin scenarios one after another, each into out/<name>.

    :return: list of (name, message), message None on success.
    """
    res = []
    for name in names:
        try:
            cfg = load_builtin(name)
            run(cfg, os.path.join(out, name), quiet=quiet)
            res.append((name, None))
        except Exception as e:
            res.append((name, '%s: %s' % (type(e).__name__, e)))
    return res


def cmd_run(args):
    cfg = load_config(args)
    out = args.out or os.path.join('out', cfg.name)
    run(cfg, out, until=args.until, dump_every=args.dump_every, quiet=args.quiet)
    print('output written to', out)


def cmd_list(args):
    for name, raw in builtin_scenarios().items():
        print('%-20s %s' % (name, raw.get('scenario', {}).get('description', '')))


def cmd_fit(args):
    df = pd.read_csv(args.csv)
    fit = fit_rates(df, args.d, args.rho, args.g)
    print('C = %.6g  k_c = %.6g  exponent = %.6g  residual = %.3g'
          % (fit.C, fit.k_c, fit.exponent, fit.residual))


def cmd_batch(args):
    chunks = run_multi_process(run_names, list(args.names), args.processes, out=args.out)
    failed = [(n, m) for chunk in chunks for n, m in chunk if m is not None]
    for n, m in failed:
        print(n, ':', m)
    if failed:
        raise SimulationError('%d of %d scenarios failed' % (len(failed), len(args.names)))


def cmd_check(args):
    res = check_outputs(args.name, args.out)
    for k, v in res.items():
        print('%s: %s' % (k, v))
    if not res['passed']:
        raise ValueError('check %s failed' % args.name)


def build_parser():
    parser = argparse.ArgumentParser(
        description='Coupled MPM and spheropolygon DEM simulations.',
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    sub = parser.add_subparsers(dest='command')
    p = sub.add_parser('run', help='Run a scenario file or a builtin scenario')
    p.add_argument('config', nargs='?', default=None, help='Scenario INI file')
    p.add_argument('--out', default=None, help='Output directory (default out/<name>)')
    p.add_argument('--until', type=float, default=None, help='End time, overrides t_end')
    p.add_argument('--dump-every', type=int, default=None,
                   help='Snapshot interval in steps, overrides snapshot_every')
    p.add_argument('--scenario', default=None, help='Builtin scenario name')
    p.add_argument('--quiet', action='store_true', help='No progress lines')
    p.set_defaults(func=cmd_run)
    p = sub.add_parser('list-scenarios', help='List builtin scenarios')
    p.set_defaults(func=cmd_list)
    p = sub.add_parser('fit-beverloo', help='Fit the Beverloo law to a rates CSV (D0, Q)')
    p.add_argument('csv')
    p.add_argument('--d', type=float, default=None, help='Grain size, else the csv d column')
    p.add_argument('--rho', type=float, default=None, help='Bulk density')
    p.add_argument('--g', type=float, default=None, help='Gravity magnitude')
    p.set_defaults(func=cmd_fit)
    p = sub.add_parser('batch', help='Run builtin scenarios in parallel processes')
    p.add_argument('names', nargs='+')
    p.add_argument('--out', default='out')
    p.add_argument('--processes', type=int, default=None)
    p.set_defaults(func=cmd_batch)
    p = sub.add_parser('check', help='Evaluate the acceptance check of finished runs')
    p.add_argument('name', help="Scenario name or 'beverloo'")
    p.add_argument('out', help='Run directory, or parent of the silo runs')
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, 'func', None):
        parser.print_help()
        return 1
    try:
        args.func(args)
    except KeyboardInterrupt:
        print('interrupted')
        return 1
    except Exception as e:
        print('error:', e, file=sys.stderr)
        if os.environ.get('SIM_TRACEBACK'):
            traceback.print_exc()
        return 1
    return 0


if __name__ == '__main__':
    sys.exit(main())
