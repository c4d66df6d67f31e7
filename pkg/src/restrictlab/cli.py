"""Command-line front end.

Subcommands: contact, predict, polylab, flowcheck, verify-torus,
verify-sphere, verify-hermite, extremize.  Every run is driven by a JSON
config (validated against the shipped schema, defaults filled from it) with
per-command flag overrides.  Exit codes: 0 pass, 1 usage/config error,
2 verified with warnings, 3 acceptance failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
import warnings

import numpy as np

from .curves import parse_curve_string
from .errors import ConfigError, RestrictLabError
from .exponents import parse_q, parse_sigma, predict
from .runner import (
    ExperimentConfig,
    default_jobs,
    run_contact,
    verify_hermite,
    verify_sphere,
    verify_torus,
)

EXIT_PASS = 0
EXIT_USAGE = 1
EXIT_WARNINGS = 2
EXIT_FAIL = 3


def _load_config(args, overrides=None) -> ExperimentConfig:
    raw = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            raw = json.load(fh)
    if getattr(args, "symbol", None):
        raw["symbol"] = args.symbol
    if getattr(args, "curve", None):
        raw["curve"] = parse_curve_string(args.curve) if isinstance(args.curve, str) else args.curve
    if getattr(args, "seed", None) is not None:
        raw["seed"] = args.seed
    if getattr(args, "out", None):
        raw["output"] = args.out
    if getattr(args, "lambda_min", None) is not None:
        raw.setdefault("lambda_grid", {})["min"] = args.lambda_min
    if getattr(args, "lambda_max", None) is not None:
        raw.setdefault("lambda_grid", {})["max"] = args.lambda_max
    if getattr(args, "tolerance", None) is not None:
        raw["tolerance"] = args.tolerance
    if overrides:
        for key, val in overrides.items():
            raw.setdefault(key, val)
    return ExperimentConfig.from_dict(raw)


def _write_contact_files(report, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "contact.json"), "w") as fh:
        json.dump(report.to_dict(), fh, indent=2)
    with open(os.path.join(out_dir, "contact.csv"), "w") as fh:
        fh.write(f"# generated {time.strftime('%Y-%m-%dT%H:%M:%S')}\n")
        fh.write("t,sigma,confidence\n")
        for rec in report.per_t:
            fh.write(f"{rec.t:.12g},{rec.sigma_label()},{rec.confidence:.6g}\n")


def cmd_contact(args) -> int:
    cfg = _load_config(args)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        report = run_contact(cfg)
    _write_contact_files(report, cfg.output)
    print(f"sigma_global = {report.sigma_label()}")
    print(f"g2_points = {[round(float(t), 12) for t in report.g2_points]}"
          + (" (non-isolated: flow-line case)" if report.g2_non_isolated else ""))
    if report.b_dot_v is not None:
        print(f"|<b, v>| = {abs(report.b_dot_v):.6g} at t* = {report.t_star:.6g}")
    uncertain = [w for w in caught if "confidence" in str(w.message)]
    return EXIT_WARNINGS if uncertain else EXIT_PASS


def cmd_predict(args) -> int:
    qs = [parse_q(tok) for tok in args.q.split(",")]
    sigmas = [parse_sigma(tok) for tok in args.sigma.split(",")]
    out = sys.stdout if args.out in (None, "-") else open(args.out, "w")
    keys = ["q", "sigma", "rho", "rho_float", "hermite", "hermite_float",
            "bgt_low", "bgt_high", "bgt_curved", "tacy_flat", "tacy_transverse"]
    print(",".join(keys), file=out)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for q in qs:
            for s in sigmas:
                row = predict(q, s).row()
                print(",".join(str(row[k]) for k in keys), file=out)
    if out is not sys.stdout:
        out.close()
    return EXIT_PASS


def cmd_polylab(args) -> int:
    from .polynomials import polylab_report

    rep = polylab_report(args.sigma_max)
    text = json.dumps(rep, indent=2)
    if args.out in (None, "-"):
        print(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    return EXIT_PASS if rep["all_ok"] else EXIT_FAIL


def cmd_flowcheck(args) -> int:
    from .flow import flow_jet, integrate_flow
    from .symbols import PhaseSpacePoint, get_symbol

    rng = np.random.default_rng(args.seed if args.seed is not None else 1234)
    worst = {"energy": 0.0, "reversal": 0.0, "jets": 0.0}
    for name in ("torus_laplace", "sphere_laplace", "hermite"):
        sym = get_symbol(name)
        for _ in range(args.samples):
            pt = _random_zero_set_point(sym, rng)
            traj = integrate_flow(sym, pt, 1.0, 1e-10)
            worst["energy"] = max(worst["energy"], traj.energy_drift)
            end = traj.state_at(0.5)
            back = integrate_flow(sym, end, 0.5, 1e-10).interp(-0.5)
            worst["reversal"] = max(worst["reversal"], float(np.max(np.abs(back - np.array(pt.as_tuple())))))
            rec = flow_jet(sym, pt, 5, "recursion")
            fd = flow_jet(sym, pt, 5, "finite-difference")
            for j in range(6):
                scale = max(1.0, float(np.linalg.norm(rec.z_coeffs[j])))
                worst["jets"] = max(worst["jets"], float(np.linalg.norm(rec.z_coeffs[j] - fd.z_coeffs[j])) / scale)
    print(json.dumps(worst, indent=2))
    ok = worst["energy"] <= 1e-8 and worst["reversal"] <= 1e-7 and worst["jets"] <= 1e-4
    return EXIT_PASS if ok else EXIT_FAIL


def _random_zero_set_point(sym, rng):
    from .symbols import PhaseSpacePoint, _zero_on_ray

    box_p, box_f = sym.region.position, sym.region.frequency
    for _ in range(200):
        x = box_p.lo + rng.random(2) * (box_p.hi - box_p.lo)
        x = box_p.center + 0.6 * (x - box_p.center)
        ang = rng.random() * 2.0 * math.pi
        d = np.array([math.cos(ang), math.sin(ang)])
        half = 0.5 * (box_f.hi - box_f.lo)
        r_max = 1.0 / np.max(np.abs(d) / np.maximum(half, 1e-300))
        xi = _zero_on_ray(sym, x, box_f.center, d, r_max)
        if xi is not None:
            return PhaseSpacePoint(x, xi)
    raise RestrictLabError("could not sample the zero set")


def cmd_verify(args, family: str) -> int:
    defaults = {
        "torus": {"symbol": "torus_laplace",
                  "curve": {"kind": "expr", "components": ["t", "t^2"], "interval": [-0.3, 0.3]},
                  "lambda_grid": {"min": 100, "max": 3200, "points_per_decade": 5, "jitter_group": 3},
                  "tolerance": 0.04},
        "sphere": {"symbol": "sphere_laplace",
                   "curve": {"kind": "latitude", "theta0": math.pi / 3},
                   "lambda_grid": {"min": 50, "max": 1600, "points_per_decade": 5, "jitter_group": 1},
                   "tolerance": 0.05},
        "hermite": {"symbol": "hermite",
                    "curve": {"kind": "circle", "center": [0, 0], "radius": 0.5},
                    "lambda_grid": {"min": 200, "max": 5000, "points_per_decade": 5, "jitter_group": 3},
                    "tolerance": 0.06},
    }[family]
    cfg = _load_config(args, overrides=defaults)
    jobs = args.jobs if args.jobs is not None else default_jobs()
    fn = {"torus": verify_torus, "sphere": verify_sphere, "hermite": verify_hermite}[family]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        verdict = fn(cfg, jobs=jobs)
    print(json.dumps(verdict.to_dict(), indent=2))
    return EXIT_PASS if verdict.passed else EXIT_FAIL


def cmd_extremize(args) -> int:
    from .curves import curve_from_spec
    from .restriction import cap_extremizer_torus, curve_quadrature, gram_operator_norm, lower_bound_search
    from .bases import torus_cluster

    curve_spec = parse_curve_string(args.curve) if args.curve else {
        "kind": "expr", "components": ["t", "t^2"], "interval": [-0.3, 0.3]}
    curve = curve_from_spec(curve_spec)
    lam = args.lam
    sigma = args.sigma
    qs = [parse_q(tok) for tok in args.q.split(",")]
    quad = curve_quadrature(curve, lam + 1)
    coeffs, ratios, basis, meta = cap_extremizer_torus(
        lam, curve, sigma, c_width=args.c_width, t0=0.0, q_list=qs, quad=quad)
    print(f"lambda = {lam}, sigma = {sigma}, cap size = {meta['cap_size']} of dim {meta['dim']}")
    for q, val in ratios.items():
        print(f"  ratio q={q}: {val:.6g}")
    if args.ascent_steps > 0:
        q = qs[-1]
        _c, best, hist = lower_bound_search(basis, curve, float(q), quad, coeffs, steps=args.ascent_steps)
        print(f"  ascent q={q}: {ratios[q]:.6g} -> {best:.6g} ({len(hist)} accepted steps)")
    norm2 = gram_operator_norm(basis, curve, quad)
    print(f"  operator norm (q=2): {norm2.value:.6g}")
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="restrictlab",
        description="Contact order of plane curves against bicharacteristic flows, "
                    "and desk-scale verification of spectral-cluster restriction exponents.",
    )
    p.add_argument("--version", action="version", version="%(prog)s 0.1.0")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON experiment config")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--jobs", type=int, default=None,
                        help="worker processes (default: RESTRICTLAB_JOBS or 1)")
        sp.add_argument("--out", default=None, help="output directory")

    sp = sub.add_parser("contact", help="classify contact order along a curve")
    common(sp)
    sp.add_argument("--symbol", default=None)
    sp.add_argument("--curve", default=None, help="poly:ex,ey | circle:cx,cy,r | latitude:theta0")
    sp.set_defaults(fn=cmd_contact)

    sp = sub.add_parser("predict", help="closed-form exponent table")
    sp.add_argument("--q", default="2,4")
    sp.add_argument("--sigma", default="1,2,inf")
    sp.add_argument("--out", default=None)
    sp.set_defaults(fn=cmd_predict)

    sp = sub.add_parser("polylab", help="exact polynomial identity/root verification")
    sp.add_argument("--sigma-max", type=int, default=20, dest="sigma_max")
    sp.add_argument("--out", default=None)
    sp.set_defaults(fn=cmd_polylab)

    sp = sub.add_parser("flowcheck", help="flow/jet property suite")
    sp.add_argument("--samples", type=int, default=10)
    sp.add_argument("--seed", type=int, default=None)
    sp.set_defaults(fn=cmd_flowcheck)

    for fam in ("torus", "sphere", "hermite"):
        sp = sub.add_parser(f"verify-{fam}", help=f"measure and fit the {fam} exponent")
        common(sp)
        sp.add_argument("--symbol", default=None)
        sp.add_argument("--curve", default=None)
        sp.add_argument("--lambda-min", type=float, default=None, dest="lambda_min")
        sp.add_argument("--lambda-max", type=float, default=None, dest="lambda_max")
        sp.add_argument("--tolerance", type=float, default=None)
        sp.set_defaults(fn=lambda a, fam=fam: cmd_verify(a, fam))

    sp = sub.add_parser("extremize", help="cap extremizer ratios on the torus")
    sp.add_argument("--sigma", type=int, required=True)
    sp.add_argument("--lambda", type=float, required=True, dest="lam")
    sp.add_argument("--curve", default=None)
    sp.add_argument("--q", default="2")
    sp.add_argument("--c-width", type=float, default=1.0, dest="c_width")
    sp.add_argument("--ascent-steps", type=int, default=0, dest="ascent_steps")
    sp.set_defaults(fn=cmd_extremize)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (ConfigError, ValueError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RestrictLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
