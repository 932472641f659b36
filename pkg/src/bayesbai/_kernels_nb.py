"""Numba-compiled numeric kernels.

Every public function here has a vectorized twin in `_kernels_np` with the
same name and signature; `kernels` picks one of the two modules at import
time.  Both backends evaluate the same quadrature nodes so their results
agree to roughly 1e-12 (last-ulp summation order is the only difference).

Conventions shared by both backends:
  * counts are passed as float64 arrays (small integers, exact in doubles)
  * Gauss-Hermite nodes arrive pre-scaled: E f(N(mu, s^2)) = sum w f(mu + s x)
  * Gauss-Legendre nodes live on [0, 1]
  * integration windows are truncated at TAIL posterior standard deviations

The one closed form worth spelling out: with one sample left, drawing arm j
shifts its posterior mean by l ~ N(0, 1/(N_j(N_j+1))) and the loss of the
draw is E[max_i mu_i] - E[max(mu_j + l, best other mean)].  The first term
does not depend on j (marginalizing the two-stage draw restores the arm's
posterior variance to exactly 1/N_j), so the whole last level of the DP
needs a single expected-maximum evaluation plus a per-arm closed form.
"""

import math

import numpy as np
from numba import njit, prange

SQRT2 = math.sqrt(2.0)
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
TAIL = 8.5


@njit(cache=True, inline="always")
def _pdf(x):
    return math.exp(-0.5 * x * x) * INV_SQRT_2PI


@njit(cache=True, inline="always")
def _cdf(x):
    return 0.5 * math.erfc(-x / SQRT2)


@njit(cache=True, inline="always")
def _sf(x):
    return 0.5 * math.erfc(x / SQRT2)


@njit(cache=True, inline="always")
def _emax2(m1, v1, m2, v2):
    # E max of two independent Gaussians, closed form.
    th = math.sqrt(v1 + v2)
    d = (m1 - m2) / th
    return m1 * _cdf(d) + m2 * _cdf(-d) + th * _pdf(d)


@njit(cache=True)
def expected_max(mu, var, glx, glw):
    """E[max_i X_i] for independent X_i ~ N(mu_i, var_i).

    Pairwise reduction: start from the closed form for the top two means,
    then add E[(X_c - M)_+] for each further arm c by a breakpointed
    composite Gauss-Legendre integral of sf_c * prod cdf_prev.
    """
    K = mu.shape[0]
    if K == 1:
        return mu[0]
    idx = np.empty(K, np.int64)
    for i in range(K):
        idx[i] = i
    # selection sort by decreasing mean, first index wins ties
    for i in range(K - 1):
        b = i
        for j in range(i + 1, K):
            if mu[idx[j]] > mu[idx[b]]:
                b = j
        tmp = idx[i]
        idx[i] = idx[b]
        idx[b] = tmp
    e = _emax2(mu[idx[0]], var[idx[0]], mu[idx[1]], var[idx[1]])
    if K == 2:
        return e
    nq = glx.shape[0]
    for c_pos in range(2, K):
        c = idx[c_pos]
        sc = math.sqrt(var[c])
        hi = mu[c] + TAIL * sc
        lo = -1.0e300
        for p_pos in range(c_pos):
            p = idx[p_pos]
            l = mu[p] - TAIL * math.sqrt(var[p])
            if l > lo:
                lo = l
        if hi <= lo:
            continue
        # breakpoints around every involved mean at +-{1.5, 4, TAIL}
        # posterior sd, so no Legendre segment straddles a sharp sigmoid
        nb = 2 + 7 * (c_pos + 1)
        bp = np.empty(nb, np.float64)
        bp[0] = lo
        bp[1] = hi
        pos = 2
        for p_pos in range(c_pos + 1):
            p = idx[p_pos]
            sp = math.sqrt(var[p])
            for off in (-TAIL, -4.0, -1.5, 0.0, 1.5, 4.0, TAIL):
                m = mu[p] + off * sp
                if m < lo:
                    m = lo
                elif m > hi:
                    m = hi
                bp[pos] = m
                pos += 1
        bp.sort()
        acc = 0.0
        for s in range(nb - 1):
            a = bp[s]
            w = bp[s + 1] - a
            if w <= 0.0:
                continue
            seg = 0.0
            for q in range(nq):
                y = a + w * glx[q]
                f = _sf((y - mu[c]) / sc)
                for p_pos in range(c_pos):
                    p = idx[p_pos]
                    f *= _cdf((y - mu[p]) / math.sqrt(var[p]))
                seg += glw[q] * f
            acc += w * seg
        e += acc
    return e


@njit(cache=True, parallel=True)
def emax_batch(mu, var, glx, glw, out):
    for r in prange(mu.shape[0]):
        out[r] = expected_max(mu[r], var[r], glx, glw)


@njit(cache=True)
def _posterior_emax(S, N, glx, glw):
    K = S.shape[0]
    mu = np.empty(K, np.float64)
    var = np.empty(K, np.float64)
    for i in range(K):
        mu[i] = S[i] / N[i]
        var[i] = 1.0 / N[i]
    return expected_max(mu, var, glx, glw)


@njit(cache=True)
def _terminal(S, N, glx, glw):
    K = S.shape[0]
    mx = -1.0e300
    for i in range(K):
        m = S[i] / N[i]
        if m > mx:
            mx = m
    return _posterior_emax(S, N, glx, glw) - mx


@njit(cache=True, parallel=True)
def terminal_batch(S, N, glx, glw, out):
    for r in prange(S.shape[0]):
        out[r] = _terminal(S[r], N[r], glx, glw)


@njit(cache=True, inline="always")
def _post_draw_best(S, N, j):
    """E[max(mu_j + l, best other mean)], the closed-form part of the
    last-step loss; larger is better, so the optimal final draw is its
    argmax."""
    K = S.shape[0]
    a = S[j] / N[j]
    sl = math.sqrt(1.0 / (N[j] * (N[j] + 1.0)))
    cp = -1.0e300
    for i in range(K):
        if i != j:
            m = S[i] / N[i]
            if m > cp:
                cp = m
    d = (cp - a) / sl
    return cp + sl * _pdf(d) + (a - cp) * _sf(d)


@njit(cache=True)
def _last_step_losses(S, N, glx, glw, out):
    K = S.shape[0]
    t1 = _posterior_emax(S, N, glx, glw)
    for j in range(K):
        out[j] = t1 - _post_draw_best(S, N, j)


@njit(cache=True)
def dp_loss(S, N, budget, ghx, ghw, glx, glw):
    K = S.shape[0]
    if budget <= 0:
        return _terminal(S, N, glx, glw)
    if budget == 1:
        t2 = -1.0e300
        for j in range(K):
            v = _post_draw_best(S, N, j)
            if v > t2:
                t2 = v
        return _posterior_emax(S, N, glx, glw) - t2
    best = 1.0e300
    for j in range(K):
        s0 = S[j]
        n0 = N[j]
        muj = s0 / n0
        sd = math.sqrt(1.0 + 1.0 / n0)
        acc = 0.0
        for k in range(ghx.shape[0]):
            S[j] = s0 + muj + sd * ghx[k]
            N[j] = n0 + 1.0
            acc += ghw[k] * dp_loss(S, N, budget - 1, ghx, ghw, glx, glw)
        S[j] = s0
        N[j] = n0
        if acc < best:
            best = acc
    return best


@njit(cache=True)
def dp_arm_losses(S, N, budget, ghx, ghw, glx, glw, out):
    K = S.shape[0]
    if budget == 1:
        _last_step_losses(S, N, glx, glw, out)
        return
    for j in range(K):
        s0 = S[j]
        n0 = N[j]
        muj = s0 / n0
        sd = math.sqrt(1.0 + 1.0 / n0)
        acc = 0.0
        for k in range(ghx.shape[0]):
            S[j] = s0 + muj + sd * ghx[k]
            N[j] = n0 + 1.0
            acc += ghw[k] * dp_loss(S, N, budget - 1, ghx, ghw, glx, glw)
        S[j] = s0
        N[j] = n0
        out[j] = acc


@njit(cache=True, parallel=True)
def dp_arm_losses_batch(S, N, budget, ghx, ghw, glx, glw, out):
    for r in prange(S.shape[0]):
        s = S[r].copy()
        n = N[r].copy()
        dp_arm_losses(s, n, budget, ghx, ghw, glx, glw, out[r])


@njit(cache=True)
def _ppnd(p):
    """Inverse standard normal CDF (Acklam rational fit + one Halley step)."""
    if p <= 0.02425:
        q = math.sqrt(-2.0 * math.log(p))
        x = (((((-7.784894002430293e-03 * q - 3.223964580411365e-01) * q
                - 2.400758277161838e+00) * q - 2.549732539343734e+00) * q
              + 4.374664141464968e+00) * q + 2.938163982698783e+00) / (
            (((7.784695709041462e-03 * q + 3.224671290700398e-01) * q
              + 2.445134137142996e+00) * q + 3.754408661907416e+00) * q + 1.0)
    elif p >= 1.0 - 0.02425:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        x = -(((((-7.784894002430293e-03 * q - 3.223964580411365e-01) * q
                 - 2.400758277161838e+00) * q - 2.549732539343734e+00) * q
               + 4.374664141464968e+00) * q + 2.938163982698783e+00) / (
            (((7.784695709041462e-03 * q + 3.224671290700398e-01) * q
              + 2.445134137142996e+00) * q + 3.754408661907416e+00) * q + 1.0)
    else:
        q = p - 0.5
        r = q * q
        x = (((((-3.969683028665376e+01 * r + 2.209460984245205e+02) * r
                - 2.759285104469687e+02) * r + 1.383577518672690e+02) * r
              - 3.066479806614716e+01) * r + 2.506628277459239e+00) * q / (
            ((((-5.447609879822406e+01 * r + 1.615858368580409e+02) * r
               - 1.556989798598866e+02) * r + 6.680131188771972e+01) * r
             - 1.328068155288572e+01) * r + 1.0)
    e = _cdf(x) - p
    u = e * math.sqrt(2.0 * math.pi) * math.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


# parameters of the kink-located ("refined") DP integrator: probit-space
# piece boundaries at Phi(k), k in {-8,-5,-3,-2,-1,0,1,2,3,5,8}; tail-piece
# quadrature error is scaled down by the piece's probability mass
REFINE_GL = 12
REFINE_BISECT_TOL = 1e-11
_REFINE_UB = np.array([
    6.22096057427174e-16, 2.866515718791933e-07, 0.0013498980316300933,
    0.022750131948179195, 0.15865525393145707, 0.5, 0.8413447460685429,
    0.9772498680518208, 0.9986501019683699, 0.9999997133484281,
    0.9999999999999993,
])


@njit(cache=True)
def refined_arm_losses(S, N, budget, glx, glw, pglx, pglw, out):
    """Per-arm DP losses with observation integrals split at policy kinks.

    The integrand of each predictive integral, min_k L_k(child(x)), has
    derivative kinks of two kinds: observations where the child argmin
    switches, and (when the children are last-step states) observations
    where the pulled arm's new posterior mean crosses another arm's, which
    kinks every L_k at once through the best-other-mean closed form.  This
    integrator evaluates Gauss-Legendre nodes piecewise in probit space,
    locates kinks of the first kind by bisecting argmin switches between
    adjacent nodes (skipping switches where the top two losses tie to
    within noise), adds kinks of the second kind in closed form, and
    re-integrates the affected pieces split at the kinks.  Deeper
    continuation values are integrals themselves, hence smooth, so no
    further kink sources arise.  Accurate to ~1e-9 but more expensive
    than plain Gauss-Hermite; small budgets only.
    """
    K = S.shape[0]
    if budget == 1:
        _last_step_losses(S, N, glx, glw, out)
        return
    npieces = _REFINE_UB.shape[0] - 1
    ng = pglx.shape[0]
    child = np.empty(K, np.float64)
    for j in range(K):
        s0 = S[j]
        n0 = N[j]
        muj = s0 / n0
        sd = math.sqrt(1.0 + 1.0 / n0)
        uu = np.empty((npieces, ng), np.float64)
        gg = np.empty((npieces, ng), np.float64)
        hh = np.empty((npieces, ng), np.float64)
        aa = np.empty((npieces, ng), np.int64)
        for p in range(npieces):
            ua = _REFINE_UB[p]
            w = _REFINE_UB[p + 1] - ua
            for q in range(ng):
                u = ua + w * pglx[q]
                uu[p, q] = u
                S[j] = s0 + muj + sd * _ppnd(u)
                N[j] = n0 + 1.0
                refined_arm_losses(S, N, budget - 1, glx, glw, pglx, pglw, child)
                S[j] = s0
                N[j] = n0
                a = 0
                bv = child[0]
                for k in range(1, K):
                    if child[k] < bv:
                        bv = child[k]
                        a = k
                sv = 1.0e300
                for k in range(K):
                    if k != a and child[k] < sv:
                        sv = child[k]
                gg[p, q] = bv
                hh[p, q] = sv
                aa[p, q] = a
        nflat = npieces * ng
        kinks = np.empty(nflat + K, np.float64)
        nk = 0
        if budget == 2:
            # children are last-step states: their loss formulas kink
            # where the pulled arm's new mean crosses another arm's mean
            for i in range(K):
                if i == j:
                    continue
                xc = (S[i] / N[i]) * (n0 + 1.0) - s0
                zc = (xc - muj) / sd
                if -8.0 < zc < 8.0:
                    kinks[nk] = _cdf(zc)
                    nk += 1
        for t in range(nflat - 1):
            a1 = aa[t // ng, t % ng]
            a2 = aa[(t + 1) // ng, (t + 1) % ng]
            if a1 == a2:
                continue
            if (hh[t // ng, t % ng] - gg[t // ng, t % ng] < 1e-12
                    and hh[(t + 1) // ng, (t + 1) % ng]
                    - gg[(t + 1) // ng, (t + 1) % ng] < 1e-12):
                # the competing losses tie to noise level across the
                # gap, so the min is smooth there to the same level
                continue
            lo_u = uu[t // ng, t % ng]
            hi_u = uu[(t + 1) // ng, (t + 1) % ng]
            while hi_u - lo_u > REFINE_BISECT_TOL:
                mid = 0.5 * (lo_u + hi_u)
                S[j] = s0 + muj + sd * _ppnd(mid)
                N[j] = n0 + 1.0
                refined_arm_losses(S, N, budget - 1, glx, glw, pglx, pglw, child)
                S[j] = s0
                N[j] = n0
                a = 0
                bv = child[0]
                for k in range(1, K):
                    if child[k] < bv:
                        bv = child[k]
                        a = k
                if a == a1:
                    lo_u = mid
                else:
                    hi_u = mid
            kinks[nk] = 0.5 * (lo_u + hi_u)
            nk += 1
        acc = 0.0
        sub = np.empty(nflat + K + 2, np.float64)
        for p in range(npieces):
            ua = _REFINE_UB[p]
            ub = _REFINE_UB[p + 1]
            sub[0] = ua
            nsub = 1
            for k in range(nk):
                if ua < kinks[k] < ub:
                    sub[nsub] = kinks[k]
                    nsub += 1
            sub[nsub] = ub
            nsub += 1
            # insertion sort; kinks from the two detectors interleave
            for s in range(1, nsub):
                key = sub[s]
                t = s - 1
                while t >= 0 and sub[t] > key:
                    sub[t + 1] = sub[t]
                    t -= 1
                sub[t + 1] = key
            if nsub == 2:
                seg = 0.0
                for q in range(ng):
                    seg += pglw[q] * gg[p, q]
                acc += (ub - ua) * seg
                continue
            for s in range(nsub - 1):
                sa = sub[s]
                w = sub[s + 1] - sa
                if w <= 0.0:
                    continue
                seg = 0.0
                for q in range(ng):
                    u = sa + w * pglx[q]
                    S[j] = s0 + muj + sd * _ppnd(u)
                    N[j] = n0 + 1.0
                    refined_arm_losses(S, N, budget - 1, glx, glw, pglx, pglw, child)
                    S[j] = s0
                    N[j] = n0
                    bv = child[0]
                    for k in range(1, K):
                        if child[k] < bv:
                            bv = child[k]
                    seg += pglw[q] * bv
                acc += w * seg
        out[j] = acc


@njit(cache=True)
def _balanced_final_counts(n1, n2, b):
    # final counts of the draw-least-pulled policy, arm 1 on ties
    f1 = n1
    f2 = n2
    for _ in range(b):
        if f1 <= f2:
            f1 += 1
        else:
            f2 += 1
    return f1, f2


@njit(cache=True)
def alternation_scan(S, N, budget, ghx, ghw, glx, glw, tol, stats):
    """DP over a 2-armed tree that audits every decision node.

    stats[0] accumulates nodes where the DP prefers the more-pulled arm by
    more than `tol` although the counts cannot be rebalanced afterwards;
    stats[1] tracks the largest |L_1 - L_2| over balanceable nodes.
    Returns the DP loss so parents can take expectations.
    """
    if budget <= 0:
        return _terminal(S, N, glx, glw)
    L1 = 0.0
    L2 = 0.0
    for j in range(2):
        if budget == 1:
            lj = _posterior_emax(S, N, glx, glw) - _post_draw_best(S, N, j)
        else:
            s0 = S[j]
            n0 = N[j]
            muj = s0 / n0
            sd = math.sqrt(1.0 + 1.0 / n0)
            lj = 0.0
            for k in range(ghx.shape[0]):
                S[j] = s0 + muj + sd * ghx[k]
                N[j] = n0 + 1.0
                lj += ghw[k] * alternation_scan(
                    S, N, budget - 1, ghx, ghw, glx, glw, tol, stats
                )
            S[j] = s0
            N[j] = n0
        if j == 0:
            L1 = lj
        else:
            L2 = lj
    n1 = int(N[0])
    n2 = int(N[1])
    a1, a2 = _balanced_final_counts(n1 + 1, n2, budget - 1)
    b1, b2 = _balanced_final_counts(n1, n2 + 1, budget - 1)
    if min(a1, a2) == min(b1, b2) and max(a1, a2) == max(b1, b2):
        gap = abs(L1 - L2)
        if gap > stats[1]:
            stats[1] = gap
    else:
        if n1 < n2:
            if L1 > L2 + tol:
                stats[0] += 1.0
        else:
            if L2 > L1 + tol:
                stats[0] += 1.0
    if L1 <= L2:
        return L1
    return L2


@njit(cache=True, parallel=True)
def oracle_dp_losses(
    S0, N0, budget, normals, first_arm, bnd, bnd_arm, ghx, ghw, glx, glw, out
):
    """Per-replication simple regret of the DP policy started at (S0, N0).

    normals[r] holds K posterior draws followed by `budget` reward noises.
    The first decision is state-independent and passed in as `first_arm`;
    if `bnd_arm` is nonempty it tabulates the second decision as a function
    of the first observed reward (boundaries `bnd`, searchsorted lookup).
    Decisions with one draw left use the closed-form rule; any remaining
    interior decision falls back to the plain Gauss-Hermite DP.
    """
    R = normals.shape[0]
    K = S0.shape[0]
    use_table = bnd_arm.shape[0] > 0
    for r in prange(R):
        mu = np.empty(K, np.float64)
        for i in range(K):
            mu[i] = S0[i] / N0[i] + normals[r, i] / math.sqrt(N0[i])
        S = S0.copy()
        N = N0.copy()
        losses = np.empty(K, np.float64)
        for step in range(budget):
            brem = budget - step
            if step == 0:
                arm = first_arm
            elif step == 1 and use_table:
                x1 = mu[first_arm] + normals[r, K]
                arm = bnd_arm[np.searchsorted(bnd, x1)]
            elif brem == 1:
                best = -1.0e300
                arm = 0
                for j in range(K):
                    v = _post_draw_best(S, N, j)
                    if v > best:
                        best = v
                        arm = j
            else:
                dp_arm_losses(S, N, brem, ghx, ghw, glx, glw, losses)
                best = losses[0]
                arm = 0
                for j in range(1, K):
                    if losses[j] < best:
                        best = losses[j]
                        arm = j
            x = mu[arm] + normals[r, K + step]
            S[arm] += x
            N[arm] += 1.0
        rec = 0
        bm = S[0] / N[0]
        for i in range(1, K):
            m = S[i] / N[i]
            if m > bm:
                bm = m
                rec = i
        mx = mu[0]
        for i in range(1, K):
            if mu[i] > mx:
                mx = mu[i]
        out[r] = mx - mu[rec]


@njit(cache=True, parallel=True)
def episode_regrets(
    policy_code, means, prior_sds, use_prior, S0, N0, T, normals, sr_pulls, out
):
    """Simple regret per replication for the non-DP policies.

    policy_code: 0 = round-robin uniform, 1 = draw-least-pulled, 2 =
    phased elimination per `sr_pulls` (pulls per surviving arm per phase,
    leftover budget on the survivor).  normals[r] holds T reward noises,
    then K prior noises when use_prior is set.
    """
    R = normals.shape[0]
    K = means.shape[0]
    for r in prange(R):
        mu = np.empty(K, np.float64)
        for i in range(K):
            if use_prior:
                mu[i] = means[i] + prior_sds[i] * normals[r, T + i]
            else:
                mu[i] = means[i]
        S = S0.copy()
        N = N0.copy()
        if policy_code == 2:
            active = np.ones(K, np.uint8)
            t = 0
            for phase in range(K - 1):
                for _p in range(sr_pulls[phase]):
                    for a in range(K):
                        if active[a] == 1:
                            S[a] += mu[a] + normals[r, t]
                            N[a] += 1.0
                            t += 1
                worst = 0
                wm = 1.0e300
                for a in range(K):
                    if active[a] == 1:
                        m = S[a] / N[a]
                        if m <= wm:
                            wm = m
                            worst = a
                active[worst] = 0
            rec = 0
            for a in range(K):
                if active[a] == 1:
                    rec = a
            while t < T:
                S[rec] += mu[rec] + normals[r, t]
                N[rec] += 1.0
                t += 1
        else:
            for t in range(T):
                if policy_code == 0:
                    arm = t % K
                else:
                    arm = 0
                    bn = N[0]
                    for i in range(1, K):
                        if N[i] < bn:
                            bn = N[i]
                            arm = i
                S[arm] += mu[arm] + normals[r, t]
                N[arm] += 1.0
            rec = 0
            bm = S[0] / N[0]
            for i in range(1, K):
                m = S[i] / N[i]
                if m > bm:
                    bm = m
                    rec = i
        mx = mu[0]
        for i in range(1, K):
            if mu[i] > mx:
                mx = mu[i]
        out[r] = mx - mu[rec]


@njit(cache=True, parallel=True)
def event_flags(normals, y_thresh, env, out):
    """Flags for the running-mean events of one arm's i.i.d. N(0,1) stream.

    bit 0: |final mean| <= y_thresh; bit 1: bit 0 and some prefix mean
    drifts further than env[n-1] from the final mean.
    """
    R = normals.shape[0]
    Tp = normals.shape[1]
    for r in prange(R):
        tot = 0.0
        for t in range(Tp):
            tot += normals[r, t]
        m_final = tot / Tp
        if abs(m_final) > y_thresh:
            out[r] = 0
            continue
        flag = 1
        s = 0.0
        for n in range(1, Tp + 1):
            s += normals[r, n - 1]
            if abs(s / n - m_final) > env[n - 1]:
                flag = 3
                break
        out[r] = flag
