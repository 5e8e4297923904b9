"""Vectorized double-double arithmetic on pairs of numpy arrays.

A value is ``(hi, lo)`` with ``|lo| <= ulp(hi)/2``. Only the handful of
operations needed by the series solvers are provided. Error-free
transformations follow Dekker and Knuth; no FMA is assumed.
"""

from __future__ import annotations

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1


def two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def add(x, y):
    s, e = two_sum(x[0], y[0])
    t, f = two_sum(x[1], y[1])
    s, e = quick_two_sum(s, e + t)
    return quick_two_sum(s, e + f)


def mul(x, y):
    p, e = two_prod(x[0], y[0])
    e = e + (x[0] * y[1] + x[1] * y[0])
    return quick_two_sum(p, e)


def div_scalar(x, b):
    """``x / b`` for a plain double (array) ``b``."""
    q1 = x[0] / b
    p, e = two_prod(q1, b)
    s, f = two_sum(x[0], -p)
    f = f - e + x[1]
    return quick_two_sum(q1, (s + f) / b)


def from_float(a):
    a = np.asarray(a, dtype=float)
    return a, np.zeros_like(a)


def matmul(x, y):
    """Product of dd matrices ``x (m, l)`` and ``y (l, n)``."""
    xh, xl = x
    yh, yl = y
    acc = from_float(np.zeros((xh.shape[0], yh.shape[1])))
    for j in range(xh.shape[1]):
        term = mul((xh[:, j : j + 1], xl[:, j : j + 1]), (yh[j : j + 1, :], yl[j : j + 1, :]))
        acc = add(acc, term)
    return acc


def to_float(x):
    return x[0] + x[1]
