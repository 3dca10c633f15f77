# coding: utf-8
"""
@author: sdy
@email: sdy@epri.sgcc.com.cn
"""

import numpy as np


def cross2(a, b):
    """z-component of the 2D cross product, broadcasting over leading axes."""
    a = np.asarray(a)
    b = np.asarray(b)
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def perp(a):
    """Rotate by +90 degrees."""
    a = np.asarray(a)
    return np.stack((-a[..., 1], a[..., 0]), axis=-1)


def rotation(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])
