"""Command-line front end: ``jpvi <subcommand> --n N --alpha A --beta B ...``.

Every subcommand evaluates one record per grid point and writes a single
JSON object ``{subcommand, params, records, worst}`` or a CSV table.
Numbers are written as decimal strings with as many significant digits as
the working precision carries, so the output is byte-for-byte reproducible.

Exit status: 0 when every residual is within ``--tol``, 1 when one is not
(or a computation fails to converge), 2 on usage and domain errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from mpmath import mp, mpf

from . import numerics
from .errors import DomainError, JPVIError

SUBCOMMANDS = ("sigma-check", "identities", "gap", "pvi-compare", "asymptotics", "moments")

DEFAULT_TOL = {
    "sigma-check": "1e-18",
    "identities": "1e-18",
    "gap": "1e-20",
    "pvi-compare": "1e-8",
    "asymptotics": "1e-3",
    "moments": "1e-20",
}


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    n: int
    alpha: str
    beta: str
    A: str
    B: str
    t_points: tuple[str, ...]
    prec_bits: int
    tol: str
    fd_tol: str
    format: str
    out: str | None
    jobs: int

    def params(self):
        from .moments import WeightParams
        return WeightParams.of(self.alpha, self.beta, self.A, self.B)


def _decimal(text: str) -> str:
    text = text.strip()
    try:
        mpf(text)
    except (ValueError, TypeError):
        raise UsageError(f"not a decimal number: {text!r}") from None
    return text


def parse_grid(spec: str, prec: int) -> tuple[str, ...]:
    """``start:stop:count`` into rendered grid points, evenly spaced and inclusive."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise UsageError(f"--t-grid wants start:stop:count, got {spec!r}")
    start, stop = _decimal(parts[0]), _decimal(parts[1])
    try:
        count = int(parts[2])
    except ValueError:
        raise UsageError(f"grid count must be an integer, got {parts[2]!r}") from None
    if count < 1:
        raise UsageError("grid count must be >= 1")
    with numerics.working_precision(prec):
        a, b = mpf(start), mpf(stop)
        if not (0 < a < 1 and 0 < b < 1):
            raise UsageError("grid endpoints must lie in (0, 1)")
        if count == 1:
            return (start,)
        pts = [a + (b - a) * i / (count - 1) for i in range(count)]
        return tuple(_render_t(p, prec) for p in pts)


def _render_t(x: mpf, prec: int) -> str:
    # grid points are short decimals; drop the rounding noise of the division
    text = mp.nstr(x, max(15, _digits(prec) - 5), strip_zeros=True)
    return text


def _digits(prec: int) -> int:
    return int(prec * math.log10(2))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jpvi", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--alpha", required=True)
        p.add_argument("--beta", required=True)
        p.add_argument("--A", default="0")
        p.add_argument("--B", default="1")
        where = p.add_mutually_exclusive_group()
        where.add_argument("--t")
        where.add_argument("--t-grid")
        where.add_argument("--t-list", help="comma separated points")
        p.add_argument("--prec", type=int, default=None,
                       help="working precision in bits (default JPVI_PREC_BITS or 256)")
        p.add_argument("--tol", default=None)
        p.add_argument("--fd-tol", default="1e-10",
                       help="tolerance for residuals that use finite differences")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", default=None)
        p.add_argument("--jobs", type=int, default=1)
    return parser


def _default_points(sub: str) -> tuple[str, ...]:
    if sub == "asymptotics":
        return ("0.9", "0.99", "0.999", "0.9999")
    if sub == "pvi-compare":
        return parse_grid("0.1:0.9:17", numerics.DEFAULT_PREC)
    return ("0.5",)


def make_config(args: argparse.Namespace) -> RunConfig:
    prec = args.prec if args.prec is not None else numerics.default_prec()
    if prec < numerics.MIN_PREC:
        raise UsageError(f"--prec must be >= {numerics.MIN_PREC}")
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    if args.t_grid:
        points = parse_grid(args.t_grid, prec)
    elif args.t_list:
        points = tuple(_decimal(v) for v in args.t_list.split(",") if v.strip())
    elif args.t:
        points = (_decimal(args.t),)
    else:
        points = _default_points(args.subcommand)
    if not points:
        raise UsageError("no t points given")
    for v in points:
        if not 0 <= mpf(v) < 1:
            raise UsageError(f"t = {v} is outside [0, 1)")
    tol = _decimal(args.tol if args.tol is not None else DEFAULT_TOL[args.subcommand])
    return RunConfig(args.subcommand, args.n, _decimal(args.alpha), _decimal(args.beta),
                     _decimal(args.A), _decimal(args.B), points, prec, tol,
                     _decimal(args.fd_tol), args.format, args.out, args.jobs)


# ---------------------------------------------------------------------------
# per-point evaluation; each returns (fields, residual checks)


def _sigma(cfg: RunConfig, t: str):
    from .painleve import sigma_trace
    st = sigma_trace(cfg.n, cfg.params(), t, prec=cfg.prec_bits)
    fields = {"t": t, "sigma": st.sigma, "sigma1": st.sigma1, "sigma2": st.sigma2,
              "residual": st.residual}
    return fields, [("sigma_form", st.residual, mpf(cfg.tol))]


def _identities(cfg: RunConfig, t: str):
    from .identities import run_suite
    report = run_suite(cfg.n, cfg.params(), t, prec=cfg.prec_bits)
    tag, worst = report.worst
    fields = {"t": t, "worst_tag": tag, "residual": worst}
    checks = []
    for name, r in report.residuals.items():
        fields[name] = r.rel
        checks.append((name, r.rel, mpf(cfg.fd_tol if r.fd else cfg.tol)))
    return fields, checks


def _gap(cfg: RunConfig, t: str):
    from .gap import gap
    g = gap(cfg.n, cfg.alpha, cfg.beta, t, prec=cfg.prec_bits)
    fields = {"t": t, "prob": g.prob_hankel, "prob_gram": g.prob_gram, "residual": g.agreement}
    return fields, [("gram_vs_hankel", g.agreement, mpf(cfg.tol))]


def _pvi_point(cfg: RunConfig, t: str):
    from .painleve import pvi_pointwise_residual
    r = pvi_pointwise_residual(cfg.n, cfg.params(), t, prec=cfg.prec_bits)
    return {"t": t, "W": r["W"], "W1": r["W1"], "pointwise": r["residual"]}


def _moments(cfg: RunConfig, t: str):
    from .moments import hankel, moment, moment_hypergeometric
    p = cfg.params()
    with numerics.working_precision(cfg.prec_bits):
        tt = numerics.to_x(t)
        fields = {"t": t}
        worst = mpf(0)
        for k in range(2 * cfg.n - 1):
            mu = moment(k, p, tt)
            fields[f"mu_{k}"] = mu
            if 0 < tt < 1:
                other = moment_hypergeometric(k, p, tt)
                worst = max(worst, abs(mu - other) / max(abs(mu), abs(other), mpf(1)))
        hk = hankel(cfg.n, p, tt, prec=cfg.prec_bits)
        fields.update({"log_det": hk.log_det, "H": hk.H, "H1": hk.H1, "H2": hk.H2,
                       "residual": worst})
    return fields, [("moment_routes", worst, mpf(cfg.tol))]


_POINTWISE = {"sigma-check": _sigma, "identities": _identities, "gap": _gap,
              "moments": _moments}


def _evaluate(cfg: RunConfig, t: str):
    # workers start at the default context, so the precision is set per call
    with numerics.working_precision(cfg.prec_bits):
        return _POINTWISE[cfg.subcommand](cfg, t)


def _evaluate_pvi_point(cfg: RunConfig, t: str):
    with numerics.working_precision(cfg.prec_bits):
        return _pvi_point(cfg, t)


def _pvi_compare(cfg: RunConfig, pool):
    from .painleve import pvi_compare
    pts = cfg.t_points
    if len(pts) < 2:
        raise UsageError("pvi-compare needs a grid of at least two points")
    with numerics.working_precision(cfg.prec_bits):
        grid = [mpf(v) for v in pts]
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise UsageError("pvi-compare needs an increasing grid")
        rows = pvi_compare(cfg.n, cfg.params(), pts[0], pts[-1], count=len(pts),
                           prec=cfg.prec_bits)
    point = list(_map(pool, _evaluate_pvi_point, cfg, pts))
    tol = mpf(cfg.tol)
    out = []
    for t, row, pt in zip(pts, rows, point):
        fields = {"t": t, "W_integrated": row["W_integrated"], "W_pipeline": row["W_pipeline"],
                  "integration_defect": row["residual"], "pointwise": pt["pointwise"],
                  "residual": max(row["residual"], pt["pointwise"])}
        out.append((fields, [("integration", row["residual"], tol),
                             ("pointwise", pt["pointwise"], tol)]))
    return out


def _asymptotics(cfg: RunConfig):
    from .gap import asymptotic_check, asymptotic_constant
    ac = asymptotic_constant(cfg.n, cfg.alpha, cfg.beta, prec=cfg.prec_bits)
    est, rel = asymptotic_check(cfg.n, cfg.alpha, cfg.beta, cfg.t_points, prec=cfg.prec_bits)
    fields = {"t": ",".join(cfg.t_points), "exponent": ac.exponent, "C": ac.C,
              "C_extrapolated": est, "residual": rel}
    return [(fields, [("extrapolation", rel, mpf(cfg.tol))])]


def _map(pool, fn, cfg, pts):
    if pool is None:
        return map(lambda t: fn(cfg, t), pts)
    return pool.map(fn, [cfg] * len(pts), pts)


def run(cfg: RunConfig) -> tuple[list, list]:
    pool = ProcessPoolExecutor(max_workers=cfg.jobs) if cfg.jobs > 1 else None
    try:
        if cfg.subcommand == "pvi-compare":
            results = _pvi_compare(cfg, pool)
        elif cfg.subcommand == "asymptotics":
            results = _asymptotics(cfg)
        else:
            results = list(_map(pool, _evaluate, cfg, cfg.t_points))
    finally:
        if pool is not None:
            pool.shutdown()
    records = [fields for fields, _ in results]
    checks = [(fields["t"], name, value, tol) for fields, cs in results for name, value, tol in cs]
    return records, checks


# ---------------------------------------------------------------------------
# rendering


def _fmt(value, digits: int) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, int):
        return str(value)
    return mp.nstr(value, digits, min_fixed=-4, max_fixed=6)


def render(cfg: RunConfig, records: list, checks: list) -> tuple[str, bool]:
    digits = _digits(cfg.prec_bits)
    failed = [c for c in checks if not c[2] <= c[3]]
    if checks:
        t, name, value, _ = max(checks, key=lambda c: c[2] / c[3])
        worst = {"t": t, "check": name, "residual": _fmt(value, digits)}
    else:
        worst = {}
    if cfg.format == "json":
        doc = {
            "subcommand": cfg.subcommand,
            "params": {"n": cfg.n, "alpha": cfg.alpha, "beta": cfg.beta, "A": cfg.A,
                       "B": cfg.B, "prec_bits": cfg.prec_bits, "tol": cfg.tol},
            "records": [{k: _fmt(v, digits) for k, v in r.items()} for r in records],
            "worst": worst,
        }
        text = json.dumps(doc, indent=2) + "\n"
    else:
        buf = io.StringIO()
        columns = list(records[0]) if records else []
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for r in records:
            writer.writerow([_fmt(r[c], digits) for c in columns])
        text = buf.getvalue()
    return text, not failed


def _print_tags(stream):
    from .identities import TAG_FORMULAS
    width = max(map(len, TAG_FORMULAS))
    for tag, formula in TAG_FORMULAS.items():
        print(f"{tag:<{width}}  {formula}", file=stream)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = make_config(args)
        if cfg.subcommand == "identities":
            _print_tags(sys.stderr)
        with numerics.working_precision(cfg.prec_bits):
            records, checks = run(cfg)
            text, ok = render(cfg, records, checks)
    except (UsageError, DomainError) as exc:
        print(f"jpvi: error: {exc}", file=sys.stderr)
        return 2
    except JPVIError as exc:
        print(f"jpvi: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if not ok:
        bad = sorted({name for _, name, value, tol in checks if not value <= tol})
        print(f"jpvi: residual above tolerance: {', '.join(bad)}", file=sys.stderr)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
