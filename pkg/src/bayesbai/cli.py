"""Experiment runner.

Subcommands
-----------
regret-curve  Estimate simple regret over a horizon grid; writes CSV.
ebi-probe     Exact loss / per-arm losses / one-draw improvements of a
              list of belief states; writes JSON.
event-probe   Exact and Monte-Carlo probabilities of the reward-stream
              events next to their closed-form bounds; writes CSV.
validate      Run the acceptance suite; nonzero exit on any failure.

Configs are JSON files; any CLI flag overrides the corresponding config
key.  Schemas (all keys optional unless marked):

regret-curve: policies (list of names, required), horizons (ascending ints,
  required), reps, seed, workers, and either instance (list of true means)
  or prior {"means": [...], "sds": [...], "mode": "flat-init"|"informative"}.
ebi-probe: states (required; each {"S": [...], "N": [...]} or
  {"w_state": {"T": int, "C_U": float, "n12": int}}), budgets (list),
  quadrature_order, max_depth, refine.
event-probe: T (list of odd ints, required), C_U, Delta_G, reps, seed,
  workers.
validate: criteria (list of ints 1..14), quadrature_order, max_depth.

Every output file embeds the resolved config and seed in '#'-prefixed
header lines (CSV) or a "config" member (JSON); numbers are written with
17 significant digits so reruns are byte-comparable.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from .bellman import DPConfig, exact_loss
from .core import BayesBaiError, BeliefState, CapacityError, Instance, Seed
from .policies import policy_by_name
from .simulate import bayesian_regret, construct_w_state, event_probes, frequentist_regret


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _load_config(path: Optional[str]) -> dict:
    if path is None:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ValueError("config must be a JSON object")
    return cfg


def _resolve(cfg: dict, args: argparse.Namespace, keys: Sequence[str]) -> dict:
    """Overlay CLI flags onto the config file values."""
    out = dict(cfg)
    for key in keys:
        val = getattr(args, key.replace("-", "_"), None)
        if val is not None:
            out[key] = val
    return out


def _write_csv(path: str, config: dict, header: Sequence[str], rows) -> None:
    lines = []
    for key in sorted(config):
        if key == "workers":  # does not affect the results; keep reruns comparable
            continue
        lines.append(f"# {key} = {json.dumps(config[key], sort_keys=True)}")
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(
            _fmt(v) if isinstance(v, float) else str(v) for v in row
        ))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_json(path: str, document: dict) -> None:
    def walk(obj):
        if isinstance(obj, float):
            return float(_fmt(obj))
        if isinstance(obj, dict):
            return {k: walk(v) for k, v in obj.items()}
        if isinstance(obj, (list, tuple)):
            return [walk(v) for v in obj]
        return obj

    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(walk(document), fh, sort_keys=True, indent=1)
        fh.write("\n")


def _cmd_regret_curve(args: argparse.Namespace) -> int:
    cfg = _resolve(_load_config(args.config), args, ("seed", "reps", "workers"))
    cfg.setdefault("reps", 100_000)
    cfg.setdefault("seed", 0)
    cfg.setdefault("workers", 1)
    policies = cfg["policies"]
    horizons = cfg["horizons"]
    if not horizons or list(horizons) != sorted(horizons):
        raise ValueError("horizons must be nonempty and ascending")
    if int(cfg["reps"]) < 1:
        raise ValueError("reps must be >= 1")
    rows = []
    for name in policies:
        for T in horizons:
            seed = Seed(int(cfg["seed"]), stream=T)
            try:
                policy = policy_by_name(name, K=_cfg_arms(cfg), T=T)
                if "instance" in cfg:
                    est = frequentist_regret(
                        policy, Instance(tuple(cfg["instance"])), T=T,
                        reps=int(cfg["reps"]), seed=seed, workers=int(cfg["workers"]),
                    )
                else:
                    prior = cfg["prior"]
                    est = bayesian_regret(
                        policy, prior["means"], prior["sds"], T=T,
                        reps=int(cfg["reps"]), seed=seed,
                        mode=prior.get("mode", "flat-init"),
                        workers=int(cfg["workers"]),
                    )
                rows.append((name, T, est.reps, est.mean, est.std_error,
                             cfg["seed"], "ok"))
            except (CapacityError, BayesBaiError) as exc:
                rows.append((name, T, 0, float("nan"), float("nan"),
                             cfg["seed"], type(exc).__name__))
    _write_csv(args.out, cfg,
               ("policy", "T", "reps", "regret_mean", "regret_se", "seed", "status"),
               rows)
    return 0


def _cfg_arms(cfg: dict) -> int:
    if "instance" in cfg:
        return len(cfg["instance"])
    return len(cfg["prior"]["means"])


def _parse_state(spec: dict) -> BeliefState:
    if "w_state" in spec:
        w = spec["w_state"]
        return construct_w_state(int(w["T"]), float(w["C_U"]), int(w["n12"]))
    return BeliefState.from_stats(spec["S"], spec["N"], T=int(spec.get("T", 64)))


def _cmd_ebi_probe(args: argparse.Namespace) -> int:
    cfg = _resolve(_load_config(args.config), args, ("quadrature_order", "max_depth"))
    dp = DPConfig(
        quadrature_order=int(cfg.get("quadrature_order", 8)),
        max_depth=int(cfg.get("max_depth", 6)),
        refine=bool(cfg.get("refine", False)),
    )
    budgets = cfg.get("budgets", [1])
    records = []
    for spec in cfg["states"]:
        for budget in budgets:
            try:
                belief = _parse_state(spec)
                res = exact_loss(belief, int(budget), dp)
                ebi = res.ebi
                records.append({
                    "S": list(map(float, belief.sums())),
                    "N": list(map(int, belief.counts())),
                    "budget": int(budget),
                    "loss": res.loss,
                    "arm_losses": list(map(float, res.arm_losses)),
                    "improvement": list(map(float, ebi)),
                    "chosen_arm": res.chosen_arm,
                    "symmetric_tie": bool(
                        ebi.size >= 2
                        and abs(ebi[0] - ebi[1]) <= 1e-9
                    ),
                    "quadrature_order": res.quadrature_order,
                    "node_count": res.nodes_evaluated,
                })
            except (CapacityError, BayesBaiError, ValueError) as exc:
                records.append({
                    "state": spec, "budget": int(budget),
                    "error": type(exc).__name__, "message": str(exc),
                })
    _write_json(args.out, {"config": cfg, "results": records})
    return 0


def _cmd_event_probe(args: argparse.Namespace) -> int:
    cfg = _resolve(_load_config(args.config), args, ("seed", "reps", "workers"))
    cfg.setdefault("reps", 1_000_000)
    cfg.setdefault("seed", 0)
    cfg.setdefault("workers", 1)
    cfg.setdefault("C_U", 2.0)
    cfg.setdefault("Delta_G", 0.5)
    rows = []
    for T in cfg["T"]:
        r = event_probes(
            int(T), float(cfg["C_U"]), float(cfg["Delta_G"]),
            reps=int(cfg["reps"]), seed=Seed(int(cfg["seed"]), stream=int(T)),
            workers=int(cfg["workers"]),
        )
        rows.append((T, "underestimation", r.p_x, 0.0, r.f_under, "lower",
                     "pass" if r.p_x >= r.f_under else "fail"))
        rows.append((T, "small-final-mean", r.p_y, r.p_y_se, r.f_close, "lower",
                     "pass" if r.p_y >= r.f_close - 3.0 * r.p_y_se else "fail"))
        rows.append((T, "drift-violation", r.p_yz, r.p_yz_se, r.f_nodrift, "upper",
                     "pass" if r.p_yz <= r.f_nodrift + 3.0 * r.p_yz_se else "fail"))
    _write_csv(args.out, cfg,
               ("T", "event", "probability", "std_error", "bound", "bound_side", "status"),
               rows)
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    from . import acceptance

    cfg = _resolve(_load_config(args.config), args, ("quadrature_order", "max_depth"))
    dp = DPConfig(
        quadrature_order=int(cfg.get("quadrature_order", 8)),
        max_depth=int(cfg.get("max_depth", 6)),
    )
    select = None
    if args.criteria:
        select = [int(s) for s in args.criteria.split(",")]
    elif "criteria" in cfg:
        select = [int(s) for s in cfg["criteria"]]
    results = acceptance.run_all(dp, select)
    lines = [r.line() for r in results]
    failed = [r for r in results if not r.passed]
    lines.append(
        f"{len(results) - len(failed)}/{len(results)} criteria passed"
    )
    report = "\n".join(lines) + "\n"
    sys.stdout.write(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(report)
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bayesbai",
        description="Exact small-horizon best-arm-identification experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_required=True):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int, help="root seed (overrides config)")
        p.add_argument("--reps", type=int, help="replications (overrides config)")
        p.add_argument("--out", required=out_required, help="output path")
        p.add_argument("--quadrature-order", type=int, dest="quadrature_order",
                       help="Gauss-Hermite order of the exact solver")
        p.add_argument("--max-depth", type=int, dest="max_depth",
                       help="depth limit of the exact solver")
        p.add_argument("--workers", type=int, help="worker threads")

    p = sub.add_parser("regret-curve", help="simple-regret curve to CSV")
    common(p)
    p.set_defaults(func=_cmd_regret_curve)

    p = sub.add_parser("ebi-probe", help="exact losses and improvements to JSON")
    common(p)
    p.set_defaults(func=_cmd_ebi_probe)

    p = sub.add_parser("event-probe", help="event probabilities vs bounds to CSV")
    common(p)
    p.set_defaults(func=_cmd_event_probe)

    p = sub.add_parser("validate", help="run the acceptance suite")
    common(p, out_required=False)
    p.add_argument("--criteria", help="comma-separated criterion indices to run")
    p.set_defaults(func=_cmd_validate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (KeyError, ValueError, OSError, BayesBaiError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
