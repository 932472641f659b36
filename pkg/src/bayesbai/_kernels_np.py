"""Pure-numpy numeric kernels.

Vectorized twins of the functions in `_kernels_nb`, selected by setting
BAYESBAI_BACKEND=numpy.  Both backends evaluate identical quadrature
nodes; results agree to within summation-order rounding (~1e-12).  See
`_kernels_nb` for the algorithmic notes, including the closed form that
reduces the last DP level to one expected-maximum evaluation per state.
"""

import math

import numpy as np
from scipy.special import ndtr, ndtri

SQRT2 = math.sqrt(2.0)
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
TAIL = 8.5
_OFFSETS = np.array([-TAIL, -4.0, -1.5, 0.0, 1.5, 4.0, TAIL])

REFINE_GL = 12
REFINE_BISECT_TOL = 1e-11
_REFINE_UB = np.array([
    6.22096057427174e-16, 2.866515718791933e-07, 0.0013498980316300933,
    0.022750131948179195, 0.15865525393145707, 0.5, 0.8413447460685429,
    0.9772498680518208, 0.9986501019683699, 0.9999997133484281,
    0.9999999999999993,
])


def _pdf(x):
    return np.exp(-0.5 * np.square(x)) * INV_SQRT_2PI


def _emax_rows(mu, var, glx, glw):
    """Row-wise E[max_i X_i], X_i ~ N(mu_i, var_i) independent."""
    R, K = mu.shape
    if K == 1:
        return mu[:, 0].copy()
    idx = np.argsort(-mu, axis=1, kind="stable")
    mu_s = np.take_along_axis(mu, idx, axis=1)
    sd_s = np.sqrt(np.take_along_axis(var, idx, axis=1))
    th = np.hypot(sd_s[:, 0], sd_s[:, 1])
    d = (mu_s[:, 0] - mu_s[:, 1]) / th
    e = mu_s[:, 0] * ndtr(d) + mu_s[:, 1] * ndtr(-d) + th * _pdf(d)
    for c in range(2, K):
        hi = mu_s[:, c] + TAIL * sd_s[:, c]
        lo = np.max(mu_s[:, :c] - TAIL * sd_s[:, :c], axis=1)
        active = hi > lo
        bp = (mu_s[:, : c + 1, None] + sd_s[:, : c + 1, None] * _OFFSETS)
        bp = np.clip(bp.reshape(R, -1), lo[:, None], hi[:, None])
        bp = np.concatenate([lo[:, None], bp, hi[:, None]], axis=1)
        bp.sort(axis=1)
        a = bp[:, :-1]
        w = np.maximum(bp[:, 1:] - a, 0.0)
        y = a[:, :, None] + w[:, :, None] * glx
        f = ndtr((mu_s[:, c, None, None] - y) / sd_s[:, c, None, None])
        for p in range(c):
            f *= ndtr((y - mu_s[:, p, None, None]) / sd_s[:, p, None, None])
        seg = (f @ glw) * w
        e += np.where(active, seg.sum(axis=1), 0.0)
    return e


def expected_max(mu, var, glx, glw):
    return float(_emax_rows(mu[None, :], var[None, :], glx, glw)[0])


def emax_batch(mu, var, glx, glw, out):
    out[:] = _emax_rows(mu, var, glx, glw)


def _terminal_rows(S, N, glx, glw):
    mu = S / N
    return _emax_rows(mu, 1.0 / N, glx, glw) - mu.max(axis=1)


def terminal_batch(S, N, glx, glw, out):
    out[:] = _terminal_rows(S, N, glx, glw)


def _post_draw_best_rows(S, N):
    """Row-wise E[max(mu_j + l, best other mean)] for every arm j."""
    mu = S / N
    sl = np.sqrt(1.0 / (N * (N + 1.0)))
    top = np.argmax(mu, axis=1)
    mx = np.take_along_axis(mu, top[:, None], axis=1)
    masked = mu.copy()
    np.put_along_axis(masked, top[:, None], -np.inf, axis=1)
    second = masked.max(axis=1)
    cp = np.where(np.arange(S.shape[1]) == top[:, None], second[:, None], mx)
    d = (cp - mu) / sl
    return cp + sl * _pdf(d) + (mu - cp) * ndtr(-d)


def _last_rows(S, N, glx, glw):
    t1 = _emax_rows(S / N, 1.0 / N, glx, glw)
    return t1[:, None] - _post_draw_best_rows(S, N)


def _arm_loss_rows(S, N, budget, ghx, ghw, glx, glw):
    if budget == 1:
        return _last_rows(S, N, glx, glw)
    R, K = S.shape
    m = ghx.shape[0]
    out = np.empty((R, K))
    for j in range(K):
        muj = S[:, j] / N[:, j]
        sd = np.sqrt(1.0 + 1.0 / N[:, j])
        Sc = np.repeat(S, m, axis=0)
        Nc = np.repeat(N, m, axis=0)
        Sc[:, j] += (muj[:, None] + sd[:, None] * ghx).ravel()
        Nc[:, j] += 1.0
        ch = _loss_rows(Sc, Nc, budget - 1, ghx, ghw, glx, glw)
        out[:, j] = ch.reshape(R, m) @ ghw
    return out


def _loss_rows(S, N, budget, ghx, ghw, glx, glw):
    if budget <= 0:
        return _terminal_rows(S, N, glx, glw)
    return _arm_loss_rows(S, N, budget, ghx, ghw, glx, glw).min(axis=1)


def dp_loss(S, N, budget, ghx, ghw, glx, glw):
    return float(_loss_rows(S[None, :], N[None, :], budget, ghx, ghw, glx, glw)[0])


def dp_arm_losses(S, N, budget, ghx, ghw, glx, glw, out):
    out[:] = _arm_loss_rows(S[None, :], N[None, :], budget, ghx, ghw, glx, glw)[0]


def dp_arm_losses_batch(S, N, budget, ghx, ghw, glx, glw, out):
    out[:] = _arm_loss_rows(S, N, budget, ghx, ghw, glx, glw)


def refined_arm_losses(S, N, budget, glx, glw, pglx, pglw, out):
    """Kink-located per-arm DP losses; mirrors the numba implementation."""
    K = S.shape[0]
    if budget == 1:
        out[:] = _last_rows(S[None, :], N[None, :], glx, glw)[0]
        return
    npieces = _REFINE_UB.shape[0] - 1
    ng = pglx.shape[0]
    child = np.empty(K)

    def child_eval(j, u, s0, n0, muj, sd):
        S[j] = s0 + muj + sd * float(ndtri(u))
        N[j] = n0 + 1.0
        refined_arm_losses(S, N, budget - 1, glx, glw, pglx, pglw, child)
        S[j] = s0
        N[j] = n0
        srt = np.sort(child)
        return srt[0], int(child.argmin()), srt[1] - srt[0]

    for j in range(K):
        s0 = S[j]
        n0 = N[j]
        muj = s0 / n0
        sd = math.sqrt(1.0 + 1.0 / n0)
        uu = np.empty(npieces * ng)
        gg = np.empty(npieces * ng)
        dd = np.empty(npieces * ng)
        aa = np.empty(npieces * ng, np.int64)
        t = 0
        for p in range(npieces):
            ua = _REFINE_UB[p]
            w = _REFINE_UB[p + 1] - ua
            for q in range(ng):
                uu[t] = ua + w * pglx[q]
                gg[t], aa[t], dd[t] = child_eval(j, uu[t], s0, n0, muj, sd)
                t += 1
        kinks = []
        if budget == 2:
            # children are last-step states: their loss formulas kink
            # where the pulled arm's new mean crosses another arm's mean
            for i in range(K):
                if i == j:
                    continue
                xc = (S[i] / N[i]) * (n0 + 1.0) - s0
                zc = (xc - muj) / sd
                if -8.0 < zc < 8.0:
                    kinks.append(float(ndtr(zc)))
        for t in range(npieces * ng - 1):
            if aa[t] == aa[t + 1]:
                continue
            if dd[t] < 1e-12 and dd[t + 1] < 1e-12:
                # competing losses tie to noise level across the gap,
                # so the min is smooth there to the same level
                continue
            lo_u, hi_u = uu[t], uu[t + 1]
            while hi_u - lo_u > REFINE_BISECT_TOL:
                mid = 0.5 * (lo_u + hi_u)
                _, a, _ = child_eval(j, mid, s0, n0, muj, sd)
                if a == aa[t]:
                    lo_u = mid
                else:
                    hi_u = mid
            kinks.append(0.5 * (lo_u + hi_u))
        acc = 0.0
        for p in range(npieces):
            ua = _REFINE_UB[p]
            ub = _REFINE_UB[p + 1]
            inner = [k for k in kinks if ua < k < ub]
            if not inner:
                acc += (ub - ua) * float(gg[p * ng : (p + 1) * ng] @ pglw)
                continue
            sub = [ua] + sorted(inner) + [ub]
            for s in range(len(sub) - 1):
                sa = sub[s]
                w = sub[s + 1] - sa
                if w <= 0.0:
                    continue
                seg = 0.0
                for q in range(ng):
                    g, _, _ = child_eval(j, sa + w * pglx[q], s0, n0, muj, sd)
                    seg += pglw[q] * g
                acc += w * seg
        out[j] = acc


def _balanced_final_counts(n1, n2, b):
    f1, f2 = n1, n2
    for _ in range(b):
        if f1 <= f2:
            f1 += 1
        else:
            f2 += 1
    return f1, f2


def _alt_rows(S, N, budget, ghx, ghw, glx, glw, tol, stats):
    # every row in one call shares the same pull counts, so the
    # balanceability test is a per-call scalar
    R = S.shape[0]
    if budget <= 0:
        return _terminal_rows(S, N, glx, glw)
    if budget == 1:
        L = _last_rows(S, N, glx, glw)
    else:
        m = ghx.shape[0]
        L = np.empty((R, 2))
        for j in range(2):
            muj = S[:, j] / N[:, j]
            sd = np.sqrt(1.0 + 1.0 / N[:, j])
            Sc = np.repeat(S, m, axis=0)
            Nc = np.repeat(N, m, axis=0)
            Sc[:, j] += (muj[:, None] + sd[:, None] * ghx).ravel()
            Nc[:, j] += 1.0
            ch = _alt_rows(Sc, Nc, budget - 1, ghx, ghw, glx, glw, tol, stats)
            L[:, j] = ch.reshape(R, m) @ ghw
    n1 = int(N[0, 0])
    n2 = int(N[0, 1])
    a1, a2 = _balanced_final_counts(n1 + 1, n2, budget - 1)
    b1, b2 = _balanced_final_counts(n1, n2 + 1, budget - 1)
    if min(a1, a2) == min(b1, b2) and max(a1, a2) == max(b1, b2):
        gap = np.abs(L[:, 0] - L[:, 1]).max()
        if gap > stats[1]:
            stats[1] = gap
    elif n1 < n2:
        stats[0] += float(np.count_nonzero(L[:, 0] > L[:, 1] + tol))
    else:
        stats[0] += float(np.count_nonzero(L[:, 1] > L[:, 0] + tol))
    return L.min(axis=1)


def alternation_scan(S, N, budget, ghx, ghw, glx, glw, tol, stats):
    return float(
        _alt_rows(S[None, :], N[None, :], budget, ghx, ghw, glx, glw, tol, stats)[0]
    )


_ORACLE_BLOCK = 4096


def oracle_dp_losses(
    S0, N0, budget, normals, first_arm, bnd, bnd_arm, ghx, ghw, glx, glw, out
):
    R = normals.shape[0]
    K = S0.shape[0]
    rows = np.arange(R)
    mu = S0 / N0 + normals[:, :K] / np.sqrt(N0)
    S = np.tile(S0, (R, 1))
    N = np.tile(N0, (R, 1))
    use_table = bnd_arm.shape[0] > 0
    for step in range(budget):
        brem = budget - step
        if step == 0:
            arm = np.full(R, first_arm, np.int64)
        elif step == 1 and use_table:
            x1 = mu[:, first_arm] + normals[:, K]
            arm = bnd_arm[np.searchsorted(bnd, x1)]
        elif brem == 1:
            arm = np.argmax(_post_draw_best_rows(S, N), axis=1)
        else:
            arm = np.empty(R, np.int64)
            for a in range(0, R, _ORACLE_BLOCK):
                b = min(a + _ORACLE_BLOCK, R)
                losses = _arm_loss_rows(S[a:b], N[a:b], brem, ghx, ghw, glx, glw)
                arm[a:b] = np.argmin(losses, axis=1)
        x = mu[rows, arm] + normals[:, K + step]
        S[rows, arm] += x
        N[rows, arm] += 1.0
    rec = np.argmax(S / N, axis=1)
    out[:] = mu.max(axis=1) - mu[rows, rec]


def episode_regrets(
    policy_code, means, prior_sds, use_prior, S0, N0, T, normals, sr_pulls, out
):
    R = normals.shape[0]
    K = means.shape[0]
    rows = np.arange(R)
    if use_prior:
        mu = means + prior_sds * normals[:, T : T + K]
    else:
        mu = np.broadcast_to(means, (R, K)).copy()
    S = np.tile(S0, (R, 1))
    N = np.tile(N0, (R, 1))
    if policy_code == 2:
        active = np.ones((R, K), bool)
        t = 0
        for phase in range(K - 1):
            nact = K - phase
            pulls = int(sr_pulls[phase])
            # within a phase, pulls cycle over surviving arms in index
            # order, so column q of the reshaped block belongs to the
            # q-th surviving arm of each replication
            block = normals[:, t : t + pulls * nact].reshape(R, pulls, nact)
            colsum = block.sum(axis=1)
            order = np.argsort(~active, axis=1, kind="stable")[:, :nact]
            gain = colsum + pulls * np.take_along_axis(mu, order, axis=1)
            np.put_along_axis(
                S, order, np.take_along_axis(S, order, axis=1) + gain, axis=1
            )
            np.put_along_axis(
                N, order, np.take_along_axis(N, order, axis=1) + pulls, axis=1
            )
            t += pulls * nact
            emp = np.where(active, S / N, np.inf)
            worst = K - 1 - np.argmin(emp[:, ::-1], axis=1)
            active[rows, worst] = False
        rec = np.argmax(active, axis=1)
    else:
        if policy_code == 0:
            seq = np.arange(T) % K
        else:
            seq = np.empty(T, np.int64)
            n = N0.copy()
            for t in range(T):
                seq[t] = int(np.argmin(n))
                n[seq[t]] += 1.0
        for a in range(K):
            slots = np.flatnonzero(seq == a)
            if slots.size == 0:
                continue
            S[:, a] += slots.size * mu[:, a] + normals[:, slots].sum(axis=1)
            N[:, a] += slots.size
        rec = np.argmax(S / N, axis=1)
    out[:] = mu.max(axis=1) - mu[rows, rec]


_EVENT_BLOCK = 1024


def event_flags(normals, y_thresh, env, out):
    R, Tp = normals.shape
    counts = np.arange(1, Tp + 1)
    for a in range(0, R, _EVENT_BLOCK):
        b = min(a + _EVENT_BLOCK, R)
        csum = normals[a:b].cumsum(axis=1)
        m_final = csum[:, -1] / Tp
        bit0 = np.abs(m_final) <= y_thresh
        dev = np.abs(csum / counts - m_final[:, None]) > env
        out[a:b] = np.where(bit0, 1 + 2 * dev.any(axis=1), 0)
