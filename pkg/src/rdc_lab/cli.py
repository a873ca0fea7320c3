"""Command-line front end writing tradeoff curves as CSV plus a flat JSON report.

Exit codes: 0 success, 1 configuration error, 2 infeasible model,
3 internal invariant violation (a diagnostic dump goes to stderr).
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
import time
from importlib import metadata
from pathlib import Path

import numpy as np

from . import bounds, discrete_dcr, fixed_rep_region, gaussian_rdc, gaussian_universal, transport
from .model import (
    CaseLabel,
    DiscreteSource,
    GaussianPair,
    InfeasibleClassification,
    InvariantViolation,
    RDCError,
    TradeoffCurve,
    TradeoffPoint,
    validate_gaussian,
)

EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_INVARIANT = 1, 2, 3
MAX_POINTS = 1_000_000
INFEASIBLE_ERRORS = (
    InfeasibleClassification,
    discrete_dcr.InfeasibleLP,
    gaussian_universal.InfeasiblePair,
    fixed_rep_region.InfeasibleClassificationLevel,
    gaussian_rdc.InfeasibleOnGrid,
)


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def version_string() -> str:
    try:
        return "v" + metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "v0+unknown"


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def write_csv(path: str, header: list[str], rows) -> None:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    data = buf.getvalue().encode("utf-8")
    if path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        Path(path).write_bytes(data)


def _json_value(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else fmt(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    return v


def write_report(path: str | None, report: dict) -> None:
    text = json.dumps({k: _json_value(v) for k, v in report.items()}, indent=2) + "\n"
    if path is None:
        return
    if path == "-":
        sys.stderr.write(text)
    else:
        Path(path).write_bytes(text.encode("utf-8"))


# ---------------------------------------------------------------- parsing helpers

def floats(text: str) -> list[float]:
    return [float(t) for t in str(text).replace(" ", "").split(",") if t]


def matrix(text: str) -> np.ndarray:
    """Rows separated by ``;``, entries by ``,``."""
    rows = [floats(r) for r in str(text).split(";") if r.strip()]
    if not rows or len({len(r) for r in rows}) != 1:
        raise ConfigError(f"malformed matrix {text!r}")
    return np.array(rows)


def read_config(path: str) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment; keys may use ``-`` or ``_``."""
    out = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line or (line.startswith("[") and line.endswith("]")):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.replace("-", "_")] = value.strip("\"'")
    return out


def _add_gaussian(p):
    p.add_argument("--mu-x", type=float, default=0.0)
    p.add_argument("--sigma2-x", type=float, default=1.0)
    p.add_argument("--mu-s", type=float, default=0.0)
    p.add_argument("--sigma2-s", type=float, default=1.0)
    p.add_argument("--theta1", type=float, default=0.7)


def _add_discrete(p):
    p.add_argument("--q", default="0.5,0.5", help="source law, comma separated")
    p.add_argument("--T", dest="T", default=None,
                   help="classifier channel T[s,x]; rows by ';' (default: identity)")
    p.add_argument("--values", default=None, help="value of each source letter")
    p.add_argument("--recon-values", default=None, help="reconstruction values (MSE only)")
    p.add_argument("--distortion", choices=["mse", "hamming"], default="hamming")
    p.add_argument("--resolution", type=int, default=32, help="simplex grid denominator")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", default=None, help="key = value file; flags override it")
    common.add_argument("--output", "-o", default="-", help="CSV path ('-' for stdout)")
    common.add_argument("--report", default=None,
                        help="JSON report path (default: <output>.json, or none for stdout)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--units", choices=["nats", "bits"], default="nats")
    common.add_argument("--strict", action="store_true",
                        help="exit 3 when a verification report shows a violation")

    parser = _Parser(prog="rdc-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gaussian-dcr", parents=[common], help="D(C, R) at fixed rate")
    _add_gaussian(p)
    p.add_argument("--rate", type=float, default=0.2)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--margin", type=float, default=0.25)
    p.add_argument("--formula", choices=["stated", "exact"], default="stated")

    p = sub.add_parser("gaussian-rdc", parents=[common], help="R(D, C) at fixed classification")
    _add_gaussian(p)
    p.add_argument("--class-level", type=float, default=None,
                   help="classification level C (default: h(S) + 1, i.e. slack)")
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--d-max-factor", type=float, default=1.25)

    p = sub.add_parser("gaussian-universal", parents=[common],
                       help="one representation at max rate serving every boundary point")
    _add_gaussian(p)
    p.add_argument("--rates", default="0.05,0.1,0.15,0.2,0.34")
    p.add_argument("--points", type=int, default=100, help="boundary points per rate")
    p.add_argument("--boundary", choices=["stated", "exact"], default="stated")
    p.add_argument("--mc-samples", type=int, default=0, help="Monte Carlo samples per checked decoder")
    p.add_argument("--mc-points", type=int, default=5, help="decoders checked by Monte Carlo")

    p = sub.add_parser("discrete-dcr", parents=[common], help="LP D(C, R) sweep for a finite source")
    _add_discrete(p)
    p.add_argument("--sweep", choices=["R", "C"], default="R")
    p.add_argument("--fixed", type=float, default=None,
                   help="value of the other coordinate (default: slack C or full rate)")
    p.add_argument("--start", type=float, default=None)
    p.add_argument("--stop", type=float, default=None)
    p.add_argument("--points", type=int, default=20)

    p = sub.add_parser("region", parents=[common], help="decoder region of a fixed representation")
    _add_discrete(p)
    p.add_argument("--channel", default=None, help="p(z|x) rows by ';' (default: from --rate)")
    p.add_argument("--rate", type=float, default=None, help="take Z from the LP optimum at this rate")
    p.add_argument("--class-level", type=float, default=None, help="C used with --rate (default slack)")
    p.add_argument("--stochastic-grid", type=int, default=20)
    p.add_argument("--outer-method", choices=["realizable", "nearest-letter"], default="realizable")
    p.add_argument("--points", type=int, default=25, help="outer-bound C grid size")

    p = sub.add_parser("bound-check", parents=[common], help="posterior sampling costs twice the MMSE")
    p.add_argument("--mode", choices=["discrete", "gaussian"], default="discrete")
    p.add_argument("--joint", default=None, help="p(x, m) rows by ';' (default: seeded random)")
    p.add_argument("--values", default=None)
    p.add_argument("--size", default="4,3", help="n,|M| of the seeded random joint")
    _add_gaussian(p)
    p.add_argument("--rate", type=float, default=0.5)
    p.add_argument("--samples", type=int, default=1_000_000)

    p = sub.add_parser("w2", parents=[common], help="squared 2-Wasserstein distance")
    p.add_argument("--xs", default=None)
    p.add_argument("--px", default=None)
    p.add_argument("--ys", default=None)
    p.add_argument("--py", default=None)
    p.add_argument("--gaussian", default=None, help="mu1,s2_1,mu2,s2_2")
    parser.subcommands = sub.choices
    return parser


def parse_args(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        cfg = read_config(args.config)
        cfg.pop("command", None)
        sub = parser.subcommands[args.command]
        known = {a.dest for a in sub._actions}
        unknown = sorted(set(cfg) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        sub.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


# ---------------------------------------------------------------- commands

def _gaussian(args) -> GaussianPair:
    return validate_gaussian(GaussianPair(args.mu_x, args.sigma2_x, args.mu_s, args.sigma2_s, args.theta1))


def _discrete(args) -> DiscreteSource:
    q = np.array(floats(args.q))
    n = q.size
    T = np.eye(n) if args.T is None else matrix(args.T)
    values = None if args.values is None else floats(args.values)
    if args.distortion == "hamming":
        return DiscreteSource.hamming(q, T, values)
    values = list(range(n)) if values is None else values
    recon = None if args.recon_values is None else floats(args.recon_values)
    return DiscreteSource.mse(q, T, values, recon)


def _check_points(n: int) -> None:
    if not 2 <= n <= MAX_POINTS:
        raise ConfigError(f"sweep count must lie in [2, {MAX_POINTS}], got {n}")


def _finite(*xs) -> None:
    if not all(math.isfinite(float(x)) for x in xs):
        raise ConfigError("sweep range must be finite")


def cmd_gaussian_dcr(args, u):
    p = _gaussian(args)
    _check_points(args.points)
    _finite(args.rate, args.margin)
    if args.formula == "stated":
        curve = gaussian_rdc.sample_dcr_curve(p, args.rate, args.points, args.margin)
    else:
        c_lo = gaussian_rdc.feasibility_threshold(p)
        cs = np.linspace(c_lo, p.h_s + args.margin, args.points)
        pts = []
        for C in cs:
            D = gaussian_rdc.exact_distortion(p, float(C), args.rate)
            label = CaseLabel.INFEASIBLE if math.isinf(D) else CaseLabel.DISTORTION_ACTIVE
            pts.append(TradeoffPoint(D, float(C), args.rate, label))
        curve = TradeoffCurve(pts, "C", p.digest()).validate()
    rows = [(pt.C / u, pt.R / u, pt.D, pt.case_label.value) for pt in curve.points]
    return ["C", "R", "D", "case"], rows, curve, {"max_monotone_violation": curve.check_monotone()}


def cmd_gaussian_rdc(args, u):
    p = _gaussian(args)
    _check_points(args.points)
    C = p.h_s + 1.0 if args.class_level is None else args.class_level
    _finite(C, args.d_max_factor)
    curve = gaussian_rdc.sample_rdc_curve(p, C, args.points, args.d_max_factor)
    rows = [(pt.D, pt.C / u, pt.R / u, pt.case_label.value) for pt in curve.points]
    return ["D", "C", "R", "case"], rows, curve, {"max_monotone_violation": curve.check_monotone()}


def cmd_gaussian_universal(args, u):
    p = _gaussian(args)
    _check_points(args.points)
    rates = floats(args.rates)
    _finite(*rates)
    rep = gaussian_universal.verify_no_penalty(p, rates, args.points, boundary=args.boundary)
    rows = [(r / u, D, C / u, dD, dC / u, g) for r, D, C, dD, dC, g in rep.rows]
    extra = {
        "boundary": args.boundary,
        "r_max": rep.r_max / u,
        "n_points": rep.n_points,
        "max_D_violation": rep.max_D_violation,
        "max_C_violation": rep.max_C_violation / u,
        "max_violation": max(rep.max_D_violation, rep.max_C_violation / u),
        "passed": rep.max_violation <= 1e-9,
    }
    if args.mc_samples:
        z = gaussian_universal.build_representation(p, rep.r_max)
        idx = np.unique(np.linspace(0, len(rep.rows) - 1, max(1, args.mc_points)).astype(int))
        worst = 0.0
        for i in idx:
            _, D, C, _, _, _ = rep.rows[int(i)]
            dec = (gaussian_universal.decoder_for(p, z, D, C) if args.boundary == "stated"
                   else gaussian_universal.distortion_matching_decoder(p, z, D, C))
            exact = gaussian_universal.analytic_performance(p, z, dec)
            est = gaussian_universal.monte_carlo_check(p, dec, z, args.mc_samples, args.seed)
            worst = max(worst, abs(est.D_hat - exact.D) / max(est.D_se, 1e-300),
                        abs(est.C_hat - exact.C) / max(est.C_se, 1e-300))
        extra["mc_samples"] = args.mc_samples
        extra["mc_max_standard_errors"] = worst
    return (["rate", "target_D", "target_C", "achieved_D", "achieved_C", "gamma"], rows, None, extra)


def _dcr_point(src, grid, C, R):
    try:
        sol = discrete_dcr.solve_dcr(src, grid, C, R)
        return sol.D, sol.status
    except discrete_dcr.InfeasibleLP:
        return math.inf, "infeasible"


def cmd_discrete_dcr(args, u):
    src = _discrete(args)
    _check_points(args.points)
    grid = discrete_dcr.build_grid(src, args.resolution)
    if args.sweep == "R":
        fixed = src.label_entropy if args.fixed is None else args.fixed * u
        lo = 0.0 if args.start is None else args.start * u
        hi = src.source_entropy if args.stop is None else args.stop * u
    else:
        fixed = src.source_entropy if args.fixed is None else args.fixed * u
        lo = src.label_equivocation if args.start is None else args.start * u
        hi = src.label_entropy if args.stop is None else args.stop * u
    _finite(fixed, lo, hi)
    pts, rows = [], []
    for v in np.linspace(lo, hi, args.points):
        C, R = (fixed, float(v)) if args.sweep == "R" else (float(v), fixed)
        D, status = _dcr_point(src, grid, C, R)
        label = CaseLabel.INFEASIBLE if status == "infeasible" else CaseLabel.DISTORTION_ACTIVE
        pts.append(TradeoffPoint(D, C, R, label))
        rows.append((C / u, R / u, D, status))
    if all(r[3] == "infeasible" for r in rows):
        raise discrete_dcr.InfeasibleLP("every point of the sweep is infeasible",
                                        provably_infeasible=False)
    curve = TradeoffCurve(pts, args.sweep, src.digest(), tolerance=1e-9).validate()
    return (["C", "R", "D", "lp_status"], rows, curve,
            {"atoms": len(grid), "max_monotone_violation": curve.check_monotone()})


def cmd_region(args, u):
    src = _discrete(args)
    _check_points(args.points)
    if args.channel is not None:
        rep = fixed_rep_region.FixedRepresentation(src, matrix(args.channel))
    else:
        grid = discrete_dcr.build_grid(src, args.resolution)
        R = src.source_entropy / 2 if args.rate is None else args.rate * u
        C = src.label_entropy + 1.0 if args.class_level is None else args.class_level * u
        sol = discrete_dcr.solve_dcr(src, grid, C, R)
        rep = fixed_rep_region.representation_from_weights(src, grid, sol.weights)
    inner = fixed_rep_region.decoder_oracle(rep, args.stochastic_grid)
    a, b = fixed_rep_region.extreme_points(rep)
    cs = np.linspace(b[1], max(src.label_entropy, a[1]), args.points)
    outer = fixed_rep_region.outer_bound_curve(rep, cs, args.outer_method, args.stochastic_grid)
    out_at = {c: d for d, c in outer}
    by_c = sorted(inner, key=lambda pt: pt.C)
    try:
        at_inner = fixed_rep_region.outer_bound_curve(rep, [pt.C for pt in by_c],
                                                      args.outer_method, args.stochastic_grid)
        worst = max(bound - pt.D for (bound, _), pt in zip(at_inner, by_c))
    except fixed_rep_region.InfeasibleClassificationLevel:
        # the bound claims some realised decoder is impossible
        worst = math.inf
    curve = TradeoffCurve([TradeoffPoint(d, c, 0.0, CaseLabel.CLASSIFICATION_ACTIVE)
                           for c, d in out_at.items()], "C", src.digest(), tolerance=1e-9).validate()
    rows = ([("inner", pt.D, pt.C / u) for pt in inner]
            + [("outer", d, c / u) for d, c in outer]
            + [("extreme", a[0], a[1] / u), ("extreme", b[0], b[1] / u)])
    extra = {"representation_size": rep.size, "outer_method": args.outer_method,
             "mmse_distortion": rep.mmse_distortion, "max_sandwich_violation": max(worst, 0.0),
             "max_violation": max(worst, 0.0), "passed": worst <= 1e-9}
    return ["kind", "D", "C"], rows, curve, extra


def cmd_bound_check(args, u):
    if args.mode == "discrete":
        if args.joint is None:
            n, m = (int(v) for v in floats(args.size))
            rng = np.random.default_rng(args.seed)
            joint = rng.dirichlet(np.ones(n * m)).reshape(n, m)
            values = rng.normal(size=n) if args.values is None else np.array(floats(args.values))
        else:
            joint = matrix(args.joint)
            values = (np.arange(joint.shape[0], dtype=float) if args.values is None
                      else np.array(floats(args.values)))
        res = bounds.posterior_sampling_check_discrete(joint, values)
        passed = abs(res.d_ps - 2.0 * res.d_min) <= 1e-12 * max(1.0, res.d_ps)
        violation = abs(res.d_ps - 2.0 * res.d_min)
    else:
        p = _gaussian(args)
        res = bounds.posterior_sampling_check_gaussian(p, args.rate, args.samples, args.seed)
        violation = abs(res.d_ps - 2.0 * res.d_min) / res.d_ps_se
        passed = violation <= 3.0
    rows = [(res.d_min, res.d_ps, res.ratio, res.psnr_drop_db)]
    extra = {"mode": args.mode, "d_min": res.d_min, "d_ps": res.d_ps, "ratio": res.ratio,
             "d_ps_se": res.d_ps_se, "psnr_drop_db": res.psnr_drop_db,
             "psnr_drop_theory_db": bounds.PSNR_DROP_DB, "max_violation": violation,
             "passed": passed}
    return ["d_min", "d_ps", "ratio", "psnr_drop_db"], rows, None, extra


def cmd_w2(args, u):
    if args.gaussian is not None:
        vals = floats(args.gaussian)
        if len(vals) != 4:
            raise ConfigError("--gaussian takes mu1,s2_1,mu2,s2_2")
        cost = transport.w2_gaussian(*vals)
    else:
        if None in (args.xs, args.px, args.ys, args.py):
            raise ConfigError("w2 needs --xs --px --ys --py or --gaussian")
        cost = transport.w2_discrete(floats(args.xs), floats(args.px),
                                     floats(args.ys), floats(args.py)).cost
    return ["cost"], [(cost,)], None, {"cost": cost}


COMMANDS = {
    "gaussian-dcr": cmd_gaussian_dcr,
    "gaussian-rdc": cmd_gaussian_rdc,
    "gaussian-universal": cmd_gaussian_universal,
    "discrete-dcr": cmd_discrete_dcr,
    "region": cmd_region,
    "bound-check": cmd_bound_check,
    "w2": cmd_w2,
}

_SKIP = {"config", "output", "report", "command", "strict"}


def run(argv=None) -> int:
    t0 = time.perf_counter()
    try:
        args = parse_args(argv)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    u = math.log(2.0) if args.units == "bits" else 1.0
    params = {k: v for k, v in sorted(vars(args).items()) if k not in _SKIP}
    report = {"command": args.command, "version": version_string()}
    report.update(params)
    try:
        header, rows, curve, extra = COMMANDS[args.command](args, u)
        if curve is not None:
            curve.validate()
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except INFEASIBLE_ERRORS as exc:
        sys.stderr.write(f"infeasible: {exc}\n")
        return EXIT_INFEASIBLE
    except InvariantViolation as exc:
        dump = dict(report, error=type(exc).__name__, message=str(exc))
        sys.stderr.write("invariant violation\n" + json.dumps(
            {k: _json_value(v) for k, v in dump.items()}, indent=2) + "\n")
        return EXIT_INVARIANT
    except (RDCError, ValueError) as exc:
        sys.stderr.write(f"config error: {type(exc).__name__}: {exc}\n")
        return EXIT_CONFIG
    report.update(extra)
    report.setdefault("max_violation", extra.get("max_monotone_violation", 0.0))
    report["wall_time"] = time.perf_counter() - t0
    write_csv(args.output, header, rows)
    report_path = args.report
    if report_path is None and args.output != "-":
        report_path = str(Path(args.output).with_suffix(".json"))
    write_report(report_path, report)
    if args.strict and report.get("passed") is False:
        return EXIT_INVARIANT
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
