"""The package's acceptance suite: fourteen self-contained checks.

Each criterion function returns a CriterionResult with the measured value,
the bound it was held to, and the wall time.  `run_all` executes a selection
and is what both the `validate` CLI subcommand and the acceptance test run;
the CLI can lower the quadrature order to demonstrate that the suite
genuinely fails when the solver is degraded.
"""

from __future__ import annotations

import math
import os
import tempfile
import time
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import kernels
from .bellman import DPConfig, exact_loss, loss_mc_oracle
from .core import BeliefState, Instance, Seed
from .policies import SuccessiveRejects, Alternating, Uniform
from .posterior import (
    best_arm_excess_mass,
    normal_tail,
    normal_tail_bounds,
    terminal_loss_two,
)
from .simulate import (
    bayesian_regret,
    construct_w_state,
    event_probes,
    frequentist_regret,
)


@dataclass(frozen=True)
class CriterionResult:
    index: int
    name: str
    passed: bool
    measured: float
    bound: float
    detail: str
    runtime: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"[{status}] {self.index:2d} {self.name}: measured={self.measured:.6g} "
            f"bound={self.bound:.6g} ({self.detail}) [{self.runtime:.1f}s]"
        )


def _result(index, name, passed, measured, bound, detail, t0) -> CriterionResult:
    return CriterionResult(
        index=index,
        name=name,
        passed=bool(passed),
        measured=float(measured),
        bound=float(bound),
        detail=detail,
        runtime=time.perf_counter() - t0,
    )


def _random_states(count: int, seed: int, max_count: int = 6):
    """Shared suite of random beliefs with K in {2, 3}."""
    rng = np.random.default_rng(seed)
    states = []
    for _ in range(count):
        K = int(rng.integers(2, 4))
        N = rng.integers(1, max_count + 1, size=K)
        S = rng.normal(0.0, 2.0, size=K) * np.sqrt(N)
        states.append(BeliefState.from_stats(S, N, T=64))
    return states


def criterion_1(cfg: DPConfig) -> CriterionResult:
    """Variance decomposition of one more pull is exact."""
    t0 = time.perf_counter()
    n = np.arange(1, 1001, dtype=float)
    resid = np.abs(1.0 / n - 1.0 / (n * (n + 1.0)) - 1.0 / (n + 1.0))
    worst = float(resid.max())
    eps = np.finfo(float).eps
    return _result(1, "variance-decomposition", worst <= eps, worst, eps,
                   "max |1/N - 1/(N(N+1)) - 1/(N+1)| over N=1..1000", t0)


def criterion_2(cfg: DPConfig) -> CriterionResult:
    """Gaussian tail sandwich holds strictly on a grid."""
    t0 = time.perf_counter()
    grid = np.linspace(0.5, 8.0, 100)
    worst = -math.inf
    ok = True
    for x in grid:
        lo, hi = normal_tail_bounds(float(x))
        tail = normal_tail(float(x))
        if not (lo < tail < hi):
            ok = False
        worst = max(worst, lo - tail, tail - hi)
    return _result(2, "tail-sandwich", ok, worst, 0.0,
                   "max violation of lower < tail < upper on 100 points", t0)


def criterion_3(cfg: DPConfig) -> CriterionResult:
    """Terminal loss closed form vs the symmetric value and Monte Carlo."""
    t0 = time.perf_counter()
    sym_err = abs(terminal_loss_two(0.0, 1, 1) - 1.0 / math.sqrt(math.pi))
    rng = np.random.default_rng(3003)
    worst_z = 0.0
    for _ in range(20):
        n1 = int(rng.integers(1, 9))
        n2 = int(rng.integers(1, 9))
        d = float(rng.normal(0.0, 1.5))
        sigma = math.sqrt(1.0 / n1 + 1.0 / n2)
        draws = np.maximum(sigma * rng.standard_normal(1_000_000) - abs(d), 0.0)
        mc = float(draws.mean())
        se = float(draws.std(ddof=1)) / 1000.0
        worst_z = max(worst_z, abs(mc - terminal_loss_two(d, n1, n2)) / se)
    passed = sym_err <= 1e-10 and worst_z <= 3.0
    return _result(3, "terminal-loss-closed-form", passed, worst_z, 3.0,
                   f"symmetric error {sym_err:.2e} (<=1e-10); worst MC z-score", t0)


def criterion_4(cfg: DPConfig) -> CriterionResult:
    """Exact DP loss matches a Monte-Carlo oracle of its own policy."""
    t0 = time.perf_counter()
    rcfg = DPConfig(
        quadrature_order=cfg.quadrature_order,
        gl_order=cfg.gl_order,
        max_depth=cfg.max_depth,
        refine=True,
    )
    rng = np.random.default_rng(4004)
    worst_z = 0.0
    for _ in range(20):
        K = int(rng.integers(2, 4))
        budget = int(rng.integers(1, 4))
        N = rng.integers(1, 5, size=K)
        S = rng.normal(0.0, 1.5, size=K) * np.sqrt(N)
        b = BeliefState.from_stats(S, N, T=16)
        res = exact_loss(b, budget, rcfg)
        est = loss_mc_oracle(b, budget, reps=100_000, seed=Seed(int(rng.integers(2**32))), cfg=rcfg)
        # compare against the loss of the arm the simulated policy commits to
        z = abs(est.mean - float(res.arm_losses[res.chosen_arm - 1])) / est.std_error
        worst_z = max(worst_z, z)
    return _result(4, "dp-vs-oracle", worst_z <= 3.0, worst_z, 3.0,
                   "worst z-score over 20 states, 1e5 reps each", t0)


def _ebi_suite(cfg: DPConfig):
    for b in _random_states(100, seed=5005):
        for budget in (1, 2, 3, 4):
            yield b, budget, exact_loss(b, budget, cfg)


def criterion_5(cfg: DPConfig) -> CriterionResult:
    """One-draw improvement is nonnegative."""
    t0 = time.perf_counter()
    worst = math.inf
    for _, _, res in _ebi_suite(cfg):
        worst = min(worst, float(res.ebi.min()))
    return _result(5, "improvement-nonnegative", worst >= -1e-8, worst, -1e-8,
                   "min improvement over 100 states x budgets 1..4", t0)


def criterion_6(cfg: DPConfig) -> CriterionResult:
    """One-draw improvement is capped by the best-arm excess mass."""
    t0 = time.perf_counter()
    worst = -math.inf
    for b, _, res in _ebi_suite(cfg):
        for i in range(b.K):
            cap = best_arm_excess_mass(b, i + 1, cfg.gl_order)
            worst = max(worst, float(res.ebi[i]) - cap)
    return _result(6, "improvement-upper-bound", worst <= 1e-6, worst, 1e-6,
                   "max (improvement - excess mass) over the same suite", t0)


def criterion_7(cfg: DPConfig) -> CriterionResult:
    """Two arms: the DP draws the least-pulled arm, and balanceable
    final counts leave the two commit losses equal."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(7007)
    violations = 0
    worst_gap = 0.0
    for _ in range(50):
        n1, n2 = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        S = rng.normal(0.0, 2.0, 2) * np.sqrt([n1, n2])
        N = np.array([float(n1), float(n2)])
        budget = max(8 - n1 - n2, 1)
        v, gap, _ = kernels.alternation_scan(
            S, N, budget, cfg.quadrature_order, cfg.gl_order
        )
        violations += int(v)
        worst_gap = max(worst_gap, float(gap))
    passed = violations == 0 and worst_gap <= 1e-6
    return _result(7, "two-armed-alternation", passed, worst_gap, 1e-6,
                   f"{violations} argmin violations; max balanceable loss gap", t0)


def criterion_8(cfg: DPConfig) -> CriterionResult:
    """Starvation states: the underestimated arm has the smallest
    improvement and is never pulled in a full episode."""
    t0 = time.perf_counter()
    margin = -math.inf
    pulled_starved = 0
    rng = np.random.default_rng(8008)
    for T in (9, 13):
        for cu in (3.0, 6.0):
            b0 = construct_w_state(T, cu, (T - 5) // 2)
            for budget in (1, 2, 3, 4):
                e = exact_loss(b0, budget, cfg).ebi
                margin = max(margin, float(e[2] - min(e[0], e[1])))
            for _ in range(5):
                from .posterior import update

                b = b0
                mu = b.means() + rng.standard_normal(3) / np.sqrt(b.counts())
                while b.budget_remaining > 0:
                    arm = exact_loss(b, b.budget_remaining, cfg).chosen_arm
                    if arm == 3:
                        pulled_starved += 1
                    b = update(b, arm, float(mu[arm - 1] + rng.standard_normal()))
    passed = margin < 0.0 and pulled_starved == 0
    return _result(8, "w-state-starvation", passed, margin, 0.0,
                   f"max B_3 - min(B_1, B_2); starved-arm pulls = {pulled_starved}", t0)


def criterion_9(cfg: DPConfig) -> CriterionResult:
    """Exact underestimation probability dominates its closed-form bound."""
    t0 = time.perf_counter()
    cu, dg = 2.0, 0.5
    worst = math.inf
    for T in (10, 100, 1000):
        x = cu * math.sqrt(math.log(T)) + dg
        p = normal_tail(x)
        f_under = T ** (-((cu + dg) ** 2) / 2.0) / (
            2.0 * (cu + dg) * math.sqrt(2.0 * math.pi * math.log(T))
        )
        worst = min(worst, p / f_under)
    return _result(9, "underestimation-bound", worst >= 1.0, worst, 1.0,
                   "min exact/bound ratio over T in {10, 100, 1000}", t0)


def criterion_10(cfg: DPConfig, reps: int = 10_000_000) -> CriterionResult:
    """Small-final-mean and drift-violation probabilities vs their bounds."""
    t0 = time.perf_counter()
    ok = True
    details = []
    worst = math.inf
    for T in (11, 101):
        r = event_probes(T, C_U=2.0, Delta_G=0.5, reps=reps, seed=Seed(1010, stream=T))
        m1 = (r.p_y - (r.f_close - 3.0 * r.p_y_se))
        m2 = ((r.f_nodrift + 3.0 * r.p_yz_se) - r.p_yz)
        ok = ok and m1 >= 0.0 and m2 >= 0.0
        worst = min(worst, m1, m2)
        details.append(f"T={T}: p_y={r.p_y:.3e}>={r.f_close:.3e}, p_yz={r.p_yz:.3e}<={r.f_nodrift:.3e}")
    return _result(10, "drift-event-bounds", ok, worst, 0.0, "; ".join(details), t0)


def criterion_11(cfg: DPConfig, reps: int = 1_000_000) -> CriterionResult:
    """Tiny-horizon uniform policy matches its closed-form regret."""
    t0 = time.perf_counter()
    est = frequentist_regret(Uniform(), Instance((0.0, 0.5)), T=2, reps=reps, seed=Seed(1111))
    z = abs(est.mean - 0.180911) / est.std_error
    return _result(11, "uniform-closed-form", z <= 3.0, z, 3.0,
                   f"regret {est.mean:.6f} +- {est.std_error:.6f} vs 0.180911", t0)


def criterion_12(cfg: DPConfig, reps: int = 1_000_000) -> CriterionResult:
    """Bayesian regret of the alternating policy scales like 1/T."""
    t0 = time.perf_counter()
    scaled = []
    for T in (11, 21, 51, 101, 201):
        est = bayesian_regret(
            Alternating(), (0.0, 0.0), (1.0, 1.0), T=T, reps=reps, seed=Seed(1212, stream=T)
        )
        scaled.append(T * est.mean)
    ratio = max(scaled) / min(scaled)
    return _result(12, "bayes-regret-band", ratio <= 3.0, ratio, 3.0,
                   "max/min of T x regret over T in {11..201}", t0)


def criterion_13(cfg: DPConfig, reps: int = 100_000) -> CriterionResult:
    """Phased-elimination regret decays monotonically in the budget."""
    t0 = time.perf_counter()
    inst = Instance((0.0, 0.0, 0.5))
    means, ses = [], []
    for T in range(30, 301, 30):
        est = frequentist_regret(
            SuccessiveRejects(3, T), inst, T=T, reps=reps, seed=Seed(1313, stream=T)
        )
        means.append(est.mean)
        ses.append(est.std_error)
    worst = -math.inf
    for i in range(len(means) - 1):
        slack = 3.0 * (ses[i] + ses[i + 1])
        worst = max(worst, means[i + 1] - means[i] - slack)
    passed = worst < 0.0
    detail = "log-regret drop per step: " + ", ".join(
        f"{math.log(max(m, 1e-300)):.2f}" for m in means
    )
    return _result(13, "elimination-trend", passed, worst, 0.0, detail, t0)


def criterion_14(cfg: DPConfig) -> CriterionResult:
    """Identical config and seed give byte-identical output files, for any
    worker count."""
    t0 = time.perf_counter()
    from . import cli

    with tempfile.TemporaryDirectory() as tmp:
        cfg_path = os.path.join(tmp, "cfg.json")
        with open(cfg_path, "w", encoding="utf-8") as fh:
            fh.write(
                '{"policies": ["uniform", "successive-rejects"],\n'
                ' "instance": [0.0, 0.0, 0.5], "horizons": [30, 60],\n'
                ' "reps": 150000, "seed": 99}\n'
            )
        outs = []
        for tag, workers in (("a", 1), ("b", 1), ("c", 4)):
            out = os.path.join(tmp, f"run_{tag}.csv")
            rc = cli.main([
                "regret-curve", "--config", cfg_path, "--out", out,
                "--workers", str(workers),
            ])
            if rc != 0:
                return _result(14, "reproducibility", False, rc, 0.0,
                               "regret-curve run failed", t0)
            with open(out, "rb") as fh:
                outs.append(fh.read())
        ev_outs = []
        ev_cfg = os.path.join(tmp, "ev.json")
        with open(ev_cfg, "w", encoding="utf-8") as fh:
            fh.write('{"T": [11], "C_U": 2.0, "Delta_G": 0.5, "reps": 150000, "seed": 7}\n')
        for tag, workers in (("a", 1), ("b", 4)):
            out = os.path.join(tmp, f"ev_{tag}.csv")
            rc = cli.main([
                "event-probe", "--config", ev_cfg, "--out", out,
                "--workers", str(workers),
            ])
            if rc != 0:
                return _result(14, "reproducibility", False, rc, 0.0,
                               "event-probe run failed", t0)
            with open(out, "rb") as fh:
                ev_outs.append(fh.read())
    same = outs[0] == outs[1] == outs[2] and ev_outs[0] == ev_outs[1]
    return _result(14, "reproducibility", same, 0.0 if same else 1.0, 0.0,
                   "byte equality across reruns and workers {1, 4}", t0)


_CRITERIA: Sequence[Callable[[DPConfig], CriterionResult]] = (
    criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
    criterion_6, criterion_7, criterion_8, criterion_9, criterion_10,
    criterion_11, criterion_12, criterion_13, criterion_14,
)


def run_all(
    cfg: DPConfig = DPConfig(),
    select: Optional[Sequence[int]] = None,
) -> list[CriterionResult]:
    """Run the selected criteria (1-based indices; all by default)."""
    wanted = set(select) if select else set(range(1, len(_CRITERIA) + 1))
    results = []
    for i, fn in enumerate(_CRITERIA, start=1):
        if i in wanted:
            results.append(fn(cfg))
    return results
