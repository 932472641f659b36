"""Backend dispatch for the numeric kernels.

Set BAYESBAI_BACKEND=numpy to force the pure-numpy implementations;
the default is the numba-compiled backend, with an automatic fallback
(and a warning) when numba cannot be imported.
"""

from __future__ import annotations

import os
import warnings

import numpy as np

from . import _quad

_requested = os.environ.get("BAYESBAI_BACKEND", "numba").strip().lower()
if _requested == "numpy":
    from . import _kernels_np as _impl

    BACKEND = "numpy"
elif _requested == "numba":
    try:
        from . import _kernels_nb as _impl

        BACKEND = "numba"
    except ImportError:
        warnings.warn("numba unavailable; using the pure-numpy kernel backend")
        from . import _kernels_np as _impl

        BACKEND = "numpy"
else:
    raise ValueError(f"BAYESBAI_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

DEFAULT_GL_ORDER = 10


def backend_name() -> str:
    return BACKEND


def _gl(gl_order):
    return _quad.gauss_legendre_unit(gl_order)


def _all_nodes(order, gl_order):
    ghx, ghw = _quad.gauss_hermite(order)
    glx, glw = _quad.gauss_legendre_unit(gl_order)
    return ghx, ghw, glx, glw


def _f64(a):
    return np.ascontiguousarray(np.asarray(a, dtype=np.float64))


def expected_max(mu, var, gl_order: int = DEFAULT_GL_ORDER) -> float:
    glx, glw = _gl(gl_order)
    return float(_impl.expected_max(_f64(mu), _f64(var), glx, glw))


def expected_max_batch(mu, var, gl_order: int = DEFAULT_GL_ORDER) -> np.ndarray:
    mu = _f64(mu)
    glx, glw = _gl(gl_order)
    out = np.empty(mu.shape[0])
    _impl.emax_batch(mu, _f64(var), glx, glw, out)
    return out


def terminal_loss(S, N, gl_order: int = DEFAULT_GL_ORDER) -> float:
    return float(terminal_loss_batch(_f64(S)[None, :], _f64(N)[None, :], gl_order)[0])


def terminal_loss_batch(S, N, gl_order: int = DEFAULT_GL_ORDER) -> np.ndarray:
    S = _f64(S)
    glx, glw = _gl(gl_order)
    out = np.empty(S.shape[0])
    _impl.terminal_batch(S, _f64(N), glx, glw, out)
    return out


def loss(S, N, budget, order, gl_order=DEFAULT_GL_ORDER) -> float:
    nodes = _all_nodes(order, gl_order)
    return float(_impl.dp_loss(_f64(S).copy(), _f64(N).copy(), budget, *nodes))


def arm_losses(S, N, budget, order, gl_order=DEFAULT_GL_ORDER) -> np.ndarray:
    S = _f64(S).copy()
    nodes = _all_nodes(order, gl_order)
    out = np.empty(S.shape[0])
    _impl.dp_arm_losses(S, _f64(N).copy(), budget, *nodes, out)
    return out


def arm_losses_batch(S, N, budget, order, gl_order=DEFAULT_GL_ORDER) -> np.ndarray:
    S = _f64(S)
    nodes = _all_nodes(order, gl_order)
    out = np.empty(S.shape)
    _impl.dp_arm_losses_batch(S, _f64(N), budget, *nodes, out)
    return out


def refined_arm_losses(S, N, budget, gl_order=DEFAULT_GL_ORDER) -> np.ndarray:
    """Kink-located piecewise quadrature variant of arm_losses.

    Far more accurate than plain Gauss-Hermite when the continuation value
    has policy switches (K >= 3), at a higher cost; small budgets only.
    """
    S = _f64(S).copy()
    glx, glw = _gl(gl_order)
    pglx, pglw = _quad.gauss_legendre_unit(_impl.REFINE_GL)
    out = np.empty(S.shape[0])
    _impl.refined_arm_losses(S, _f64(N).copy(), budget, glx, glw, pglx, pglw, out)
    return out


def refined_loss(S, N, budget, gl_order=DEFAULT_GL_ORDER) -> float:
    if budget <= 0:
        return terminal_loss(S, N, gl_order)
    return float(refined_arm_losses(S, N, budget, gl_order).min())


def loss_node_count(K: int, budget: int, order: int) -> int:
    """Number of expected-maximum evaluations dp_loss performs."""
    if budget <= 1:
        return 1
    return K * order * loss_node_count(K, budget - 1, order)


def arm_losses_node_count(K: int, budget: int, order: int) -> int:
    if budget == 1:
        return 1
    return K * order * loss_node_count(K, budget - 1, order)


def alternation_scan(S, N, budget, order, gl_order=DEFAULT_GL_ORDER, tol=1e-9):
    """Audit every decision of the 2-armed DP tree rooted at (S, N).

    Returns (violations, max_balanceable_gap, loss): violations counts
    nodes preferring the more-pulled arm when counts cannot be rebalanced,
    max_balanceable_gap is the largest |L_1 - L_2| where they can.
    """
    nodes = _all_nodes(order, gl_order)
    stats = np.zeros(2)
    val = _impl.alternation_scan(_f64(S).copy(), _f64(N).copy(), budget, *nodes, tol, stats)
    return int(stats[0]), float(stats[1]), float(val)


def oracle_dp_losses(
    S, N, budget, normals, first_arm, boundaries, boundary_arms,
    order, gl_order=DEFAULT_GL_ORDER,
) -> np.ndarray:
    nodes = _all_nodes(order, gl_order)
    normals = _f64(normals)
    out = np.empty(normals.shape[0])
    _impl.oracle_dp_losses(
        _f64(S), _f64(N), budget, normals, int(first_arm),
        _f64(boundaries), np.ascontiguousarray(boundary_arms, dtype=np.int64),
        *nodes, out,
    )
    return out


def episode_regrets(
    policy_code, means, prior_sds, use_prior, S0, N0, T, normals, sr_pulls
) -> np.ndarray:
    normals = _f64(normals)
    out = np.empty(normals.shape[0])
    _impl.episode_regrets(
        int(policy_code), _f64(means), _f64(prior_sds), bool(use_prior),
        _f64(S0), _f64(N0), int(T), normals,
        np.ascontiguousarray(sr_pulls, dtype=np.int64), out,
    )
    return out


def event_flags(normals, y_thresh, env) -> np.ndarray:
    normals = _f64(normals)
    out = np.empty(normals.shape[0], dtype=np.int64)
    _impl.event_flags(normals, float(y_thresh), _f64(env), out)
    return out
