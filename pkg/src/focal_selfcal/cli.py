"""Command-line interface.

Subcommands: estimate-f (RANSAC over a correspondence CSV), calibrate
(focal recovery from an F JSON), synth-bench (parameter sweeps to CSV)
and metrics (aggregate a results CSV).

Exit codes: 0 success, 1 input/parse error, 2 insufficient data,
3 method failure (imaginary focal / no real solution).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .closed_form import bougnoux, sturm_equal_focal, translate_f_to_origin
from .epipolar import FundamentalMatrix, normalize_f
from .exceptions import (
    DegenerateFormula,
    FocalSelfCalError,
    NoModelFound,
    NoRealFocal,
    NoRealSolution,
    SolverFailure,
    TooFewPoints,
)
from .metrics import mean_average_accuracy
from .ransac import Correspondence, RansacConfig, ransac_f
from .solver import PriorConfig, calibrate, calibrate_equal_focal
from .synth import SceneConfig, SweepSpec, run_sweep

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INSUFFICIENT = 2
EXIT_METHOD = 3

SWEEP_NAMES = {
    "convergence": ("eps", (1e-6,)),
    "coplanarity-theta": ("theta", (0.0, -2.0, 2.0, -5.0, 5.0, -10.0, 10.0, -15.0, 15.0)),
    "coplanarity-y": ("y", (0.0, -25.0, 25.0, -50.0, 50.0, -100.0, 100.0, -200.0, 200.0)),
    "pp-noise": ("sigma_p", (0.0, 5.0, 10.0, 20.0, 40.0)),
    "pixel-noise": ("sigma_n", (0.0, 0.5, 1.0, 2.0)),
    "prior": ("f_prior", (300.0, 450.0, 600.0, 750.0, 900.0)),
    "weights": ("weight_ratio", (5e-5, 5e-4, 5e-3, 5e-2)),
}


class InputError(Exception):
    """CSV/JSON parse or I/O failure; message names the offending location."""


def read_correspondences(path: str) -> list[Correspondence]:
    out: list[Correspondence] = []
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != ["x1", "y1", "x2", "y2"]:
                raise InputError(f"{path}:1: expected header 'x1,y1,x2,y2'")
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != 4:
                    raise InputError(f"{path}:{lineno}: expected 4 columns")
                try:
                    vals = [float(v) for v in row]
                except ValueError as exc:
                    raise InputError(f"{path}:{lineno}: {exc}") from exc
                out.append(Correspondence((vals[0], vals[1]), (vals[2], vals[3])))
    except OSError as exc:
        raise InputError(f"{path}: {exc}") from exc
    return out


def read_matrix_file(path: str) -> tuple[FundamentalMatrix, dict]:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc
    flat = data.get("F")
    if not isinstance(flat, list) or len(flat) != 9:
        raise InputError(f"{path}: 'F' must be a list of 9 floats")
    arr = np.array(flat, dtype=float).reshape(3, 3)
    if not np.all(np.isfinite(arr)) or np.linalg.norm(arr) == 0.0:
        raise InputError(f"{path}: 'F' entries must be finite and not all zero")
    try:
        f = normalize_f(arr)
    except FocalSelfCalError as exc:
        raise InputError(f"{path}: {exc}") from exc
    return f, data


def _parse_point(text: str, flag: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise InputError(f"{flag} expects 'u,v'")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise InputError(f"{flag}: {exc}") from exc


def cmd_estimate_f(args: argparse.Namespace) -> int:
    corrs = read_correspondences(args.input)
    if len(corrs) < 7:
        print("at least 7 correspondences required", file=sys.stderr)
        return EXIT_INSUFFICIENT
    pp1 = _parse_point(args.pp1, "--pp1")
    pp2 = _parse_point(args.pp2, "--pp2")
    cfg = RansacConfig(
        threshold=args.threshold,
        max_iterations=args.iters,
        seed=args.seed,
        rfc_enabled=args.rfc,
        rfc_principal_points=(pp1, pp2),
        confidence=args.confidence,
    )
    try:
        report = ransac_f(corrs, cfg)
    except (NoModelFound, TooFewPoints) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INSUFFICIENT
    payload = {
        "F": [float(v) for v in report.best_f.m.ravel()],
        "inlier_mask": [bool(b) for b in report.inlier_mask],
        "report": {
            "iterations_run": report.iterations_run,
            "models_generated": report.models_generated,
            "models_rejected_rfc": report.models_rejected_rfc,
            "score_evaluations": report.score_evaluations,
            "inlier_count": report.inlier_count,
        },
    }
    _write_json(args.out, payload)
    return EXIT_OK


def _default_priors(data: dict, args: argparse.Namespace) -> PriorConfig:
    f_prior = [args.prior_f1, args.prior_f2]
    c_prior = [
        _parse_point(args.prior_pp1, "--prior-pp1") if args.prior_pp1 else None,
        _parse_point(args.prior_pp2, "--prior-pp2") if args.prior_pp2 else None,
    ]
    for i, key in enumerate(("image1", "image2")):
        img = data.get(key)
        if f_prior[i] is None and img is not None:
            f_prior[i] = 1.2 * max(float(img["width"]), float(img["height"]))
        if c_prior[i] is None and img is not None:
            c_prior[i] = (float(img["width"]) / 2.0, float(img["height"]) / 2.0)
    if any(v is None for v in f_prior) or any(v is None for v in c_prior):
        raise InputError(
            "priors required: pass --prior-f1/--prior-f2/--prior-pp1/--prior-pp2 "
            "or include image sizes in the matrix file"
        )
    return PriorConfig(
        f_prior=(f_prior[0], f_prior[1]),
        c_prior=(c_prior[0], c_prior[1]),
        w_f=(args.wf, args.wf),
        w_c=(args.wc, args.wc),
    )


def cmd_calibrate(args: argparse.Namespace) -> int:
    f, data = read_matrix_file(args.input)
    prior = _default_priors(data, args)
    out: dict
    try:
        if args.method == "ours":
            fn = calibrate_equal_focal if args.equal_focal else calibrate
            res = fn(f, prior, eps=args.eps, maxiter=args.maxiter)
            k1, k2 = res.intrinsics
            out = {
                "f1": k1.f,
                "f2": k2.f,
                "c1": list(k1.c),
                "c2": list(k2.c),
                "iterations": res.iterations,
                "converged": res.converged,
                "cost": res.final_cost,
            }
        elif args.method == "bougnoux":
            centered = translate_f_to_origin(f, prior.c_prior[0], prior.c_prior[1])
            r1, r2 = bougnoux(centered)
            if not (r1.positive and r2.positive):
                print(
                    "imaginary focal length (negative squared-focal ratio)",
                    file=sys.stderr,
                )
                return EXIT_METHOD
            out = {
                "f1": float(np.sqrt(r1.value)),
                "f2": float(np.sqrt(r2.value)),
                "c1": list(prior.c_prior[0]),
                "c2": list(prior.c_prior[1]),
                "f1_squared_sign": 1,
                "f2_squared_sign": 1,
            }
        else:  # sturm
            centered = translate_f_to_origin(f, prior.c_prior[0], prior.c_prior[1])
            focal = sturm_equal_focal(centered)
            out = {
                "f1": focal,
                "f2": focal,
                "c1": list(prior.c_prior[0]),
                "c2": list(prior.c_prior[1]),
            }
    except (DegenerateFormula, NoRealFocal, NoRealSolution, SolverFailure) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_METHOD
    _write_json(args.out, out)
    return EXIT_OK


def cmd_synth_bench(args: argparse.Namespace) -> int:
    if args.sweep not in SWEEP_NAMES:
        print(
            f"unknown sweep {args.sweep!r}; choose from {sorted(SWEEP_NAMES)}",
            file=sys.stderr,
        )
        return EXIT_INPUT
    parameter, values = SWEEP_NAMES[args.sweep]
    base = SceneConfig(
        theta=args.theta,
        y=args.y,
        sigma_n=args.sigma_n,
        sigma_p=args.sigma_p,
        n_points=args.n_points,
        seed=args.seed,
    )
    estimators = tuple(args.estimators.split(","))
    spec = SweepSpec(
        parameter=parameter,
        values=values,
        trials=args.trials,
        base=base,
        estimators=estimators,
        use_gt_f=not args.ransac_f,
        f_priors=(args.prior_f1, args.prior_f2),
    )
    rows = run_sweep(spec, parallel=args.parallel)
    header = [
        "sweep_param",
        "value",
        "trial",
        "estimator",
        "f1_est",
        "f2_est",
        "f1_err",
        "f2_err",
        "iterations",
        "converged",
        "status",
    ]
    with _open_out(args.out) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for r in rows:
            writer.writerow(
                [
                    r.sweep_param,
                    repr(r.value),
                    r.trial,
                    r.estimator,
                    repr(r.f1_est),
                    repr(r.f2_est),
                    repr(r.f1_err),
                    repr(r.f2_err),
                    r.iterations,
                    int(r.converged),
                    r.status,
                ]
            )
    return EXIT_OK


def cmd_metrics(args: argparse.Namespace) -> int:
    try:
        with open(args.input, newline="") as fh:
            reader = csv.DictReader(fh)
            rows = list(reader)
    except OSError as exc:
        print(f"{args.input}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if not rows:
        print("no records", file=sys.stderr)
        return EXIT_INSUFFICIENT
    pose_thresholds = [float(v) for v in args.maa_pose.split(",")]
    focal_thresholds = [float(v) for v in args.maa_focal.split(",")]

    by_estimator: dict[str, dict[str, list[float]]] = {}
    for row in rows:
        est = row.get("estimator", "all")
        bucket = by_estimator.setdefault(est, {"f_err": [], "p_err": []})
        for col in ("f1_err", "f2_err"):
            if col in row and row[col] not in (None, ""):
                bucket["f_err"].append(float(row[col]))
        if "p_err" in row and row["p_err"] not in (None, ""):
            bucket["p_err"].append(float(row["p_err"]))

    writer = csv.writer(sys.stdout, lineterminator="\n")
    header = ["estimator", "median_f_err"]
    header += [f"maa_f_{t}" for t in focal_thresholds]
    header += ["median_p_err"]
    header += [f"maa_p_{t}" for t in pose_thresholds]
    writer.writerow(header)
    for est in sorted(by_estimator):
        f_errs = by_estimator[est]["f_err"]
        p_errs = by_estimator[est]["p_err"]
        row_out = [est, repr(float(np.median(f_errs))) if f_errs else ""]
        for t in focal_thresholds:
            row_out.append(repr(mean_average_accuracy(f_errs, t, round(t / 0.01))))
        row_out.append(repr(float(np.median(p_errs))) if p_errs else "")
        for t in pose_thresholds:
            row_out.append(repr(mean_average_accuracy(p_errs, t, round(t / 1.0))))
        writer.writerow(row_out)
    return EXIT_OK


class _StdoutWrapper:
    def __enter__(self):
        return sys.stdout

    def __exit__(self, *exc):
        return False


def _open_out(path: str | None):
    if path is None or path == "-":
        return _StdoutWrapper()
    return open(path, "w", newline="")


def _write_json(path: str | None, payload: dict) -> None:
    text = json.dumps(payload, indent=2)
    if path is None or path == "-":
        print(text)
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="focal-selfcal",
        description="Two-view focal-length self-calibration tools",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_est = sub.add_parser("estimate-f", help="RANSAC F from a correspondence CSV")
    p_est.add_argument("input")
    p_est.add_argument("--out", default=None)
    p_est.add_argument("--threshold", type=float, default=3.0)
    p_est.add_argument("--iters", type=int, default=1000)
    p_est.add_argument("--seed", type=int, default=0)
    p_est.add_argument("--rfc", action=argparse.BooleanOptionalAction, default=False)
    p_est.add_argument("--pp1", default="0,0")
    p_est.add_argument("--pp2", default="0,0")
    p_est.add_argument("--confidence", type=float, default=1.0)
    p_est.set_defaults(func=cmd_estimate_f)

    p_cal = sub.add_parser("calibrate", help="focal recovery from an F JSON")
    p_cal.add_argument("input")
    p_cal.add_argument("--out", default=None)
    p_cal.add_argument("--prior-f1", type=float, default=None)
    p_cal.add_argument("--prior-f2", type=float, default=None)
    p_cal.add_argument("--prior-pp1", default=None)
    p_cal.add_argument("--prior-pp2", default=None)
    p_cal.add_argument("--equal-focal", action="store_true")
    p_cal.add_argument("--wf", type=float, default=5e-4)
    p_cal.add_argument("--wc", type=float, default=1.0)
    p_cal.add_argument("--eps", type=float, default=1e-6)
    p_cal.add_argument("--maxiter", type=int, default=50)
    p_cal.add_argument("--method", choices=("ours", "bougnoux", "sturm"), default="ours")
    p_cal.set_defaults(func=cmd_calibrate)

    p_syn = sub.add_parser("synth-bench", help="run a synthetic sweep to CSV")
    p_syn.add_argument("--sweep", required=True)
    p_syn.add_argument("--trials", type=int, default=10)
    p_syn.add_argument("--seed", type=int, default=0)
    p_syn.add_argument("--out", default=None)
    p_syn.add_argument("--theta", type=float, default=0.0)
    p_syn.add_argument("--y", type=float, default=300.0)
    p_syn.add_argument("--sigma-n", type=float, default=1.0)
    p_syn.add_argument("--sigma-p", type=float, default=10.0)
    p_syn.add_argument("--n-points", type=int, default=100)
    p_syn.add_argument("--prior-f1", type=float, default=700.0)
    p_syn.add_argument("--prior-f2", type=float, default=400.0)
    p_syn.add_argument("--estimators", default="calibrate,bougnoux")
    p_syn.add_argument("--ransac-f", action="store_true")
    p_syn.add_argument("--parallel", action="store_true")
    p_syn.set_defaults(func=cmd_synth_bench)

    p_met = sub.add_parser("metrics", help="aggregate a results CSV")
    p_met.add_argument("input")
    p_met.add_argument("--maa-pose", default="10,20")
    p_met.add_argument("--maa-focal", default="0.1,0.2")
    p_met.set_defaults(func=cmd_metrics)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
