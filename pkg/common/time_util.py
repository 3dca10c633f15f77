# coding: utf-8
"""
@author: sdy
@email: sdy@epri.sgcc.com.cn
"""

from contextlib import contextmanager
from datetime import datetime


@contextmanager
def timer(name, quiet=False):
    """
    Print start, end and elapsed wall time of a block.
    Example:
        with timer("run collision_soft"):
            run(...)

    :param name: str.
    :param quiet: bool. Print nothing.
    """
    dt_start = datetime.now()
    if not quiet:
        print(name, ": started at", dt_start)
    yield
    dt_end = datetime.now()
    if not quiet:
        print(name, ": ended at", dt_end,
              ", consume = ", (dt_end - dt_start).total_seconds(), "(s)")


def pretty_eta(seconds_left):
    """
    Remaining wall time in words, e.g. '2 hours and 37 minutes'.

    :param seconds_left: int.
    :return: str.
    """
    minutes_left, _ = divmod(int(seconds_left), 60)
    hours_left, minutes_left = divmod(minutes_left, 60)
    days_left, hours_left = divmod(hours_left, 24)

    def helper(cnt, name):
        return "{} {}{}".format(cnt, name, 's' if cnt > 1 else '')

    for big, big_name, small, small_name in ((days_left, 'day', hours_left, 'hour'),
                                             (hours_left, 'hour', minutes_left, 'minute')):
        if big > 0:
            msg = helper(big, big_name)
            if small > 0:
                msg += ' and ' + helper(small, small_name)
            return msg
    if minutes_left > 0:
        return helper(minutes_left, 'minute')
    return 'less than a minute'


class ProgressClock:
    """
    Wall-clock ETA of a run from its simulated-time progress.

    :param t_end: float. Simulated end time.
    :param t_start: float. Simulated start time.
    """

    def __init__(self, t_end, t_start=0.):
        self.t_start = t_start
        self.t_end = t_end
        self.wall_start = datetime.now()

    def eta(self, t):
        done = (t - self.t_start) / max(self.t_end - self.t_start, 1e-300)
        if done <= 0.:
            return 'unknown'
        elapsed = (datetime.now() - self.wall_start).total_seconds()
        return pretty_eta(elapsed * (1. - done) / done)
