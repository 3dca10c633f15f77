# coding: utf-8
"""
@author: sdy
@email: sdy@epri.sgcc.com.cn
"""

from common.cmd_util import run_multi_process
from common.time_util import ProgressClock, pretty_eta, timer


def square_chunk(items, offset=0):
    return [i * i + offset for i in items]


def test_pretty_eta():
    assert pretty_eta(30) == 'less than a minute'
    assert pretty_eta(60) == '1 minute'
    assert pretty_eta(2 * 3600 + 37 * 60) == '2 hours and 37 minutes'
    assert pretty_eta(86400 + 3600) == '1 day and 1 hour'


def test_progress_clock_and_timer(capsys):
    clock = ProgressClock(1.)
    assert clock.eta(0.) == 'unknown'
    with timer('block'):
        pass
    assert 'block : started at' in capsys.readouterr().out
    with timer('block', quiet=True):
        pass
    assert capsys.readouterr().out == ''


def test_run_multi_process():
    chunks = run_multi_process(square_chunk, list(range(7)), 2, offset=1)
    assert sum(chunks, []) == [i * i + 1 for i in range(7)]
    assert run_multi_process(square_chunk, [], 2) == []
