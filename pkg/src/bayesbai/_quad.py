"""Cached quadrature nodes in the conventions the kernels expect.

Gauss-Hermite nodes come pre-scaled so that E[f(X)] for X ~ N(mu, sigma^2)
is sum(w * f(mu + sigma * x)).  Gauss-Legendre nodes are mapped to [0, 1] so
a segment [a, b] integrates as (b - a) * sum(w * f(a + (b - a) * x)).
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def gauss_hermite(order: int) -> tuple[np.ndarray, np.ndarray]:
    if order < 1:
        raise ValueError("quadrature order must be >= 1")
    x, w = np.polynomial.hermite.hermgauss(order)
    return x * math.sqrt(2.0), w / math.sqrt(math.pi)


@lru_cache(maxsize=None)
def gauss_legendre_unit(order: int) -> tuple[np.ndarray, np.ndarray]:
    if order < 1:
        raise ValueError("quadrature order must be >= 1")
    x, w = np.polynomial.legendre.leggauss(order)
    return (x + 1.0) / 2.0, w / 2.0
