# coding: utf-8
"""
@author: sdy
@email: sdy@epri.sgcc.com.cn
"""

import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


def pytest_addoption(parser):
    parser.addoption('--run-slow', action='store_true', default=False,
                     help='run the scenario acceptance tests')


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: full scenario run, needs --run-slow')


def pytest_collection_modifyitems(config, items):
    if config.getoption('--run-slow'):
        return
    skip = pytest.mark.skip(reason='needs --run-slow')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip)
