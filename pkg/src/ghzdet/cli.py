"""Command-line front end: feasibility checks, corrected correlations,
parameter sweeps, and the seeded coincidence simulation.

Exit codes: 0 success/feasible, 1 infeasible, 2 input or domain error.
Set GHZDET_PRECISION to change the number of significant digits printed
(default 12).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import detector, lhv, montecarlo, quantum

EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_ERROR = 2


def _precision() -> int:
    try:
        return max(1, int(os.environ.get("GHZDET_PRECISION", "12")))
    except ValueError:
        return 12


def fmt(x: float) -> str:
    return f"{x:.{_precision()}g}"


def _emit_json(payload: dict) -> None:
    print(json.dumps(payload))


# --- check -------------------------------------------------------------------

def cmd_check(args: argparse.Namespace) -> int:
    c = lhv.CorrelationSet(args.e_a, args.e_b, args.e_c, args.e_abc)
    report = lhv.check_inequalities(c)
    witness = lhv.feasible_oracle(c)
    if args.json:
        _emit_json(
            {
                "feasible": report.feasible,
                "f_value": report.f_value,
                "slacks": list(report.slacks),
                "witness": None if witness is None else list(witness.probs),
            }
        )
    else:
        verdict = "feasible" if report.feasible else "infeasible"
        print(f"{verdict}, F={fmt(report.f_value)}")
        for k in range(4):
            lo, hi = report.slacks[2 * k], report.slacks[2 * k + 1]
            status = "ok" if lo >= 0.0 and hi >= 0.0 else "violated"
            print(f"inequality {k + 1}: lower slack {fmt(lo)}, upper slack {fmt(hi)} [{status}]")
        if witness is None:
            print("witness: none")
        else:
            for label, p in zip(lhv.ATOM_LABELS, witness.probs):
                print(f"witness P({label}) = {fmt(p)}")
    return EXIT_OK if report.feasible else EXIT_INFEASIBLE


# --- construct-joint ---------------------------------------------------------

def cmd_construct_joint(args: argparse.Namespace) -> int:
    joint = lhv.construct_symmetric_joint(lhv.SymmetricParams(args.p, args.q))
    back = lhv.expectations_from_joint(joint)
    if args.json:
        _emit_json({"atoms": list(joint.probs), "expectations": list(back.as_tuple())})
    else:
        for label, p in zip(lhv.ATOM_LABELS, joint.probs):
            print(f"P({label}) = {fmt(p)}")
        print(f"expectations: ({', '.join(fmt(v) for v in back.as_tuple())})")
    return EXIT_OK


# --- correlation -------------------------------------------------------------

def _parse_ratio_counts(text: str) -> float:
    try:
        num, den = text.split(":")
        r = float(num) / float(den)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"--ratio-counts expects A:B with B > 0, got {text!r}") from exc
    if r < 0.0:
        raise ValueError("--ratio-counts must be nonnegative")
    return r


def _resolve_gamma(args: argparse.Namespace) -> Optional[float]:
    if args.gamma is not None:
        return args.gamma
    if args.dark_rate is not None:
        if args.window is None:
            raise ValueError("--dark-rate requires --window")
        return detector.gamma_from_rates(detector.RateSpec(args.dark_rate, args.window))
    return None


def _correlation_payload(e: float) -> dict:
    sigma = detector.sigma_of_correlation(e)
    if e > 0.5:
        separation = detector.sigma_separation(e)
    else:
        separation = float("nan")
    return {"e": e, "sigma": sigma, "separation": separation}


def _print_correlation(payload: dict, as_json: bool) -> None:
    if as_json:
        _emit_json(payload)
        return
    print(f"E = {fmt(payload['e'])}")
    print(f"sigma = {fmt(payload['sigma'])}")
    sep = payload["separation"]
    if sep != sep:  # NaN: below the classical boundary
        print("separation = n/a (E <= 0.5)")
    elif sep == float("inf"):
        print("separation = saturated")
    else:
        print(f"separation = {fmt(sep)}")


def cmd_correlation(args: argparse.Namespace) -> int:
    if args.ratio_counts is not None:
        r = _parse_ratio_counts(args.ratio_counts)
        e = detector.correlation_from_ratio(r, args.e_ghz)
    else:
        gamma = _resolve_gamma(args)
        if gamma is None:
            raise ValueError("provide --gamma or --dark-rate/--window (or --ratio-counts)")
        params = detector.DetectorParams.from_ratio(args.d, gamma, args.ratio, args.e_ghz)
        e = detector.corrected_correlation(params, mode=args.mode)
    _print_correlation(_correlation_payload(e), args.json)
    return EXIT_OK


# --- sweep -------------------------------------------------------------------

def cmd_sweep(args: argparse.Namespace) -> int:
    if args.gamma_steps < 2 or args.d_steps < 2:
        raise ValueError("step counts must be >= 2")
    if not 0.0 < args.gamma_min <= args.gamma_max <= 1.0:
        raise ValueError("gamma bounds must satisfy 0 < min <= max <= 1")
    if not 0.0 < args.d_min <= args.d_max <= 1.0:
        raise ValueError("d bounds must satisfy 0 < min <= max <= 1")
    gammas = np.geomspace(args.gamma_min, args.gamma_max, args.gamma_steps)
    ds = np.linspace(args.d_min, args.d_max, args.d_steps)
    lines = ["gamma,d,E,sigma,separation"]
    for gamma in gammas:
        for d in ds:
            params = detector.DetectorParams.from_ratio(
                float(d), float(gamma), args.ratio, args.e_ghz
            )
            e = detector.corrected_correlation(params, mode=args.mode)
            sigma = detector.sigma_of_correlation(e)
            sep = detector.sigma_separation(e) if e > 0.5 else float("nan")
            lines.append(
                f"{gamma:.12g},{d:.12g},{e:.12g},{sigma:.12g},{sep:.12g}"
            )
    if args.contour is not None:
        lines.append(f"# contour E={args.contour:.12g}")
        lines.append("d,gamma")
        for d in ds:
            try:
                g = detector.find_gamma_for_correlation(
                    float(d), args.ratio, args.contour, args.e_ghz
                )
            except ValueError:
                continue  # level set does not cross this d-column
            lines.append(f"{d:.12g},{g:.12g}")
    text = "\n".join(lines) + "\n"
    try:
        Path(args.out).write_text(text)
    except OSError as exc:
        raise ValueError(f"cannot write {args.out}: {exc}") from exc
    print(f"wrote {len(gammas) * len(ds)} rows to {args.out}")
    return EXIT_OK


# --- simulate ----------------------------------------------------------------

_CONFIG_KEYS = {
    "d", "gamma", "pair", "twopair", "ratio", "e-ghz", "setting",
    "trials", "seed", "chunk-size", "workers",
}


def _load_config_file(path: str) -> dict:
    values = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"bad config line (expected key=value): {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _CONFIG_KEYS:
            raise ValueError(f"unknown config key {key!r}")
        values[key] = value.strip()
    return values


def _build_run_config(args: argparse.Namespace) -> montecarlo.RunConfig:
    cfg = _load_config_file(args.config) if args.config else {}

    def pick(flag_value, key, cast):
        if flag_value is not None:
            return flag_value
        if key in cfg:
            return cast(cfg[key])
        return None

    d = pick(args.d, "d", float)
    gamma = pick(args.gamma, "gamma", float)
    pair = pick(args.pair, "pair", float)
    twopair = pick(args.twopair, "twopair", float)
    ratio = pick(args.ratio, "ratio", float)
    e_ghz = pick(args.e_ghz, "e-ghz", float)
    setting = pick(args.setting, "setting", str)
    trials = pick(args.trials, "trials", int)
    seed = pick(args.seed, "seed", int)
    chunk_size = pick(args.chunk_size, "chunk-size", int)
    workers = pick(args.workers, "workers", int)

    if d is None or gamma is None:
        raise ValueError("simulate requires d and gamma")
    if trials is None:
        raise ValueError("simulate requires the number of trials")
    if seed is None:
        raise ValueError("simulate requires an explicit seed (no time-based seeding)")
    if setting is None:
        setting = "XYY"
    if e_ghz is None:
        e_ghz = 1.0

    if ratio is not None:
        params = detector.DetectorParams.from_ratio(d, gamma, ratio, e_ghz)
    else:
        if pair is None and twopair is None:
            raise ValueError("simulate requires --pair, --twopair, or --ratio")
        if pair is None:
            pair = 1.0 - twopair
        if twopair is None:
            twopair = 1.0 - pair
        params = detector.DetectorParams(d, gamma, pair, twopair, e_ghz)

    return montecarlo.RunConfig(
        params=params,
        setting=quantum.validate_setting(setting),
        n_trials=trials,
        master_seed=seed,
        chunk_size=chunk_size if chunk_size is not None else 1_000_000,
        n_workers=workers if workers is not None else 1,
    )


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _build_run_config(args)
    if args.events:
        with open(args.events, "w") as stream:
            stats = montecarlo.run(cfg, event_stream=stream)
    else:
        stats = montecarlo.run(cfg)
    report = montecarlo.compare_analytic(stats, cfg.params, cfg.setting)
    payload = {
        "n_trials": stats.n_trials,
        "n_fourfold": stats.n_fourfold,
        "n_ghz_fourfold": stats.n_ghz_fourfold,
        "no_coincidences": stats.no_coincidences,
        "e_hat": stats.e_hat,
        "std_err": stats.std_err,
        "p4_hat": stats.p4_hat,
        "analytic_e": report.analytic_e,
        "analytic_p4": report.analytic_p4,
        "z_correlation": report.z_correlation,
        "z_fourfold": report.z_fourfold,
        "comparable": report.comparable,
        "flagged": report.flagged,
    }
    if args.json:
        _emit_json(payload)
        return EXIT_OK
    print(f"trials = {stats.n_trials}")
    print(f"fourfold coincidences = {stats.n_fourfold}")
    print(f"ghz fourfolds = {stats.n_ghz_fourfold}")
    if stats.no_coincidences:
        print("no-coincidences: correlation undefined")
    else:
        print(f"e_hat = {fmt(stats.e_hat)}")
        print(f"std_err = {fmt(stats.std_err)}")
    print(f"p4_hat = {fmt(stats.p4_hat)}")
    analytic_e = "undefined" if report.analytic_e is None else fmt(report.analytic_e)
    print(f"analytic E = {analytic_e}, analytic p4 = {fmt(report.analytic_p4)}")
    if report.comparable:
        print(f"z(correlation) = {fmt(report.z_correlation)}, z(fourfold rate) = {fmt(report.z_fourfold)}")
    else:
        print("comparison: not comparable (no coincidences)")
    if report.flagged:
        print("WARNING: |z| above threshold, simulation disagrees with the model")
    return EXIT_OK


# --- quantum -----------------------------------------------------------------

def cmd_quantum(args: argparse.Namespace) -> int:
    setting = quantum.validate_setting(args.setting)
    state = quantum.ghz_state()
    value = quantum.operator_expectation(state, setting)
    probs = quantum.outcome_probabilities(state, setting)
    if args.json:
        _emit_json(
            {
                "setting": setting,
                "expectation": value,
                "outcomes": [
                    {"s1": int(s[0]), "s2": int(s[1]), "s3": int(s[2]), "p": float(p)}
                    for s, p in zip(quantum.OUTCOME_SIGNS, probs)
                ],
            }
        )
    else:
        print(f"<{setting}> = {fmt(value)}")
        for signs, p in zip(quantum.OUTCOME_SIGNS, probs):
            print(f"({signs[0]:+d},{signs[1]:+d},{signs[2]:+d})  p = {fmt(float(p))}")
    return EXIT_OK


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ghzdet", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="joint-distribution feasibility of a moment tetrad")
    p.add_argument("e_a", type=float)
    p.add_argument("e_b", type=float)
    p.add_argument("e_c", type=float)
    p.add_argument("e_abc", type=float)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("construct-joint", help="symmetric-case witness distribution")
    p.add_argument("p", type=float)
    p.add_argument("q", type=float)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_construct_joint)

    p = sub.add_parser("correlation", help="corrected conditional correlation")
    p.add_argument("--d", type=float, default=0.5)
    p.add_argument("--gamma", type=float)
    p.add_argument("--dark-rate", type=float, help="dark counts per second")
    p.add_argument("--window", type=float, help="coincidence window in seconds")
    p.add_argument(
        "--ratio",
        type=float,
        default=1e10,
        help="pair-to-two-pair production ratio (default 1e10, the reported order)",
    )
    p.add_argument("--ratio-counts", help="observed background:signal counts, e.g. 1:12")
    p.add_argument("--e-ghz", type=float, default=1.0)
    p.add_argument("--mode", choices=("approx", "exact"), default="approx")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_correlation)

    p = sub.add_parser("sweep", help="gamma x d sweep table (CSV)")
    p.add_argument("--gamma-min", type=float, required=True)
    p.add_argument("--gamma-max", type=float, required=True)
    p.add_argument("--gamma-steps", type=int, required=True)
    p.add_argument("--d-min", type=float, required=True)
    p.add_argument("--d-max", type=float, required=True)
    p.add_argument("--d-steps", type=int, required=True)
    p.add_argument("--ratio", type=float, required=True)
    p.add_argument("--e-ghz", type=float, default=1.0)
    p.add_argument("--mode", choices=("approx", "exact"), default="approx")
    p.add_argument("--contour", type=float, help="append gamma(d) rows for this E level")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="seeded coincidence simulation")
    p.add_argument("--config", help="key=value file; flags override it")
    p.add_argument("--d", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--pair", type=float, help="single-pair creation probability")
    p.add_argument("--twopair", type=float, help="two-pair creation probability")
    p.add_argument("--ratio", type=float, help="pair-to-two-pair ratio (alternative)")
    p.add_argument("--e-ghz", type=float)
    p.add_argument("--setting")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--chunk-size", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--events", help="write a per-trial event log to this path")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("quantum", help="state expectation and outcome distribution")
    p.add_argument("setting", help="three axes from {X, Y}, e.g. XYY")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_quantum)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
