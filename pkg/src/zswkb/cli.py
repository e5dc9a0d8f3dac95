"""Command-line sweeps and tables.

Exit status: 0 success, 2 invalid input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import cmath
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

import numpy as np

from .potentials import CATALOG, InvalidPotential, OutOfRange, Potential, potential_from_spec, turning_point

__all__ = ["RunConfig", "ConfigError", "MODES", "COLUMNS", "build_config", "run", "render", "main"]

MODES = ("spectrum", "count", "scattering", "liouville_table", "convergence", "specfun_table")

COLUMNS = {
    "spectrum": ["hbar", "n", "a_wkb", "alpha_wkb", "mu_wkb", "residual", "norming_sign",
                 "mu_oracle", "abs_delta_mu", "max_abs_delta_mu"],
    "count": ["hbar", "mu1", "mu2", "estimate", "integer_count", "oracle_count"],
    "scattering": ["lambda", "hbar", "sigma", "arg_T_wkb", "R_bound", "variation",
                   "oracle_abs_R", "oracle_abs_T", "oracle_arg_T", "unitarity_defect"],
    "liouville_table": ["x", "zeta", "psi"],
    "convergence": ["hbar", "records", "max_abs_delta_mu", "fitted_slope"],
    "specfun_table": ["function", "x", "b", "value", "derivative", "companion", "companion_derivative"],
}

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3


class ConfigError(ValueError):
    """The run configuration is incomplete or inconsistent."""


@dataclass(frozen=True)
class RunConfig:
    potential: object
    hbar_list: tuple
    mode: str
    output_path: Optional[str] = None
    output_format: str = "csv"
    oracle: bool = False
    mu_floor: Optional[float] = None
    mu1: Optional[float] = None
    mu2: Optional[float] = None
    lambdas: tuple = (0.5, 1.0, 2.0)
    turning_a: float = 1.0
    x_values: tuple = tuple(np.round(np.linspace(0.0, 5.0, 51), 12))
    b_values: tuple = (0.0, -1.0, -5.0)
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; choose from {', '.join(MODES)}")
        if not self.hbar_list:
            raise ConfigError("hbar_list must not be empty")
        if any(not (isinstance(h, (int, float)) and h > 0 and math.isfinite(h)) for h in self.hbar_list):
            raise ConfigError("every hbar must be a positive number")
        if self.output_format not in ("csv", "json"):
            raise ConfigError("output_format must be csv or json")
        if self.mode == "scattering" and (not self.lambdas or any(not lam > 0 for lam in self.lambdas)):
            raise ConfigError("scattering needs positive lambda values")
        if self.mode == "specfun_table" and any(b > 0 for b in self.b_values):
            raise ConfigError("specfun_table needs b <= 0")
        if self.mode == "liouville_table" and not self.turning_a > 0:
            raise ConfigError("liouville_table needs a positive turning point")


# helpers ------------------------------------------------------------------

def _max_workers() -> int:
    raw = os.environ.get("ZS_NUM_THREADS")
    if raw is None:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"ZS_NUM_THREADS must be an integer, got {raw!r}") from None


def _map(fun, items):
    items = list(items)
    workers = min(_max_workers(), len(items))
    if workers <= 1:
        return [fun(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fun, items))


def _potential(cfg: RunConfig) -> Potential:
    return potential_from_spec(cfg.potential)


def _oracle_roots(p, h, mu_lo):
    from .oracle import spectrum_scan

    return spectrum_scan(p, h, mu_lo, p.a_max)


def _floor(cfg, p):
    from .semiclassics import MU_FLOOR_FRACTION

    return MU_FLOOR_FRACTION * p.a_max if cfg.mu_floor is None else float(cfg.mu_floor)


# modes --------------------------------------------------------------------

def _spectrum(cfg: RunConfig, p: Potential):
    from .semiclassics import bs_eigenvalues

    floor = _floor(cfg, p)

    def one(h):
        recs = bs_eigenvalues(p, h, floor)
        roots = _oracle_roots(p, h, floor) if cfg.oracle and floor > 0 else None
        rows = []
        for i, r in enumerate(recs):
            mo = roots[i] if roots is not None and i < len(roots) else None
            rows.append({"hbar": h, "n": r.n, "a_wkb": r.a_wkb, "alpha_wkb": r.alpha_wkb, "mu_wkb": r.mu_wkb,
                         "residual": r.residual, "norming_sign": r.norming_sign, "mu_oracle": mo,
                         "abs_delta_mu": None if mo is None else abs(r.mu_wkb - mo)})
        deltas = [r["abs_delta_mu"] for r in rows if r["abs_delta_mu"] is not None]
        worst = max(deltas) if deltas else None
        for r in rows:
            r["max_abs_delta_mu"] = worst
        return rows

    rows = [r for chunk in _map(one, sorted(cfg.hbar_list, reverse=True)) for r in chunk]
    worst = [r["max_abs_delta_mu"] for r in rows if r["max_abs_delta_mu"] is not None]
    return rows, {"max_abs_delta_mu": max(worst) if worst else None}


def _count(cfg: RunConfig, p: Potential):
    from .semiclassics import count_eigenvalues

    mu1 = _floor(cfg, p) if cfg.mu1 is None else float(cfg.mu1)
    mu2 = p.a_max if cfg.mu2 is None else float(cfg.mu2)

    def one(h):
        est, k = count_eigenvalues(p, mu1, mu2, h)
        oc = None
        if cfg.oracle and mu1 > 0 and mu1 < mu2:
            from .oracle import spectrum_scan

            oc = len(spectrum_scan(p, h, mu1, mu2))
        return {"hbar": h, "mu1": mu1, "mu2": mu2, "estimate": est, "integer_count": k, "oracle_count": oc}

    return _map(one, sorted(cfg.hbar_list, reverse=True)), {}


def _scattering(cfg: RunConfig, p: Potential):
    from .scattering import wkb_scattering

    jobs = [(lam, h) for lam in sorted(cfg.lambdas) for h in sorted(cfg.hbar_list, reverse=True)]

    def one(job):
        lam, h = job
        rec = wkb_scattering(p, lam, h)
        row = {"lambda": lam, "hbar": h, "sigma": rec.sigma, "arg_T_wkb": rec.arg_T, "R_bound": rec.R_bound,
               "variation": rec.variation, "oracle_abs_R": None, "oracle_abs_T": None, "oracle_arg_T": None,
               "unitarity_defect": None}
        if cfg.oracle:
            from .oracle import jost_scattering_oracle

            R, T = jost_scattering_oracle(p, h, lam)
            row.update(oracle_abs_R=abs(R), oracle_abs_T=abs(T), oracle_arg_T=cmath.phase(T),
                       unitarity_defect=abs(T) ** 2 - abs(R) ** 2 - 1.0)
        return row

    return _map(one, jobs), {}


def _liouville_table(cfg: RunConfig, p: Potential):
    from .liouville import ErrorTermEvaluator, build_map

    ev = ErrorTermEvaluator(build_map(p, cfg.turning_a))
    x = np.asarray(sorted(cfg.x_values), dtype=float)
    z = ev.map.zeta_of_x(x)
    ps = ev.psi_at_x(x)
    rows = [{"x": float(a), "zeta": float(b), "psi": float(c)} for a, b, c in zip(x, np.atleast_1d(z), ps)]
    return rows, {"turning_point": cfg.turning_a, "alpha": ev.map.alpha, "mu": ev.map.mu}


def _convergence(cfg: RunConfig, p: Potential):
    from .numerics import loglog_slope
    from .semiclassics import bs_eigenvalues

    floor = 0.3 * p.a_max if cfg.mu_floor is None else float(cfg.mu_floor)

    def one(h):
        recs = bs_eigenvalues(p, h, floor)
        roots = _oracle_roots(p, h, floor)
        m = min(len(recs), len(roots))
        err = max((abs(r.mu_wkb - mo) for r, mo in zip(recs[:m], roots[:m])), default=None)
        return {"hbar": h, "records": m, "max_abs_delta_mu": err}

    rows = _map(one, sorted(cfg.hbar_list, reverse=True))
    usable = [r for r in rows if r["max_abs_delta_mu"]]
    slope = None
    if len(usable) >= 2:
        slope = loglog_slope([r["hbar"] for r in usable], [r["max_abs_delta_mu"] for r in usable])
    for r in rows:
        r["fitted_slope"] = slope
    return rows, {"fitted_slope": slope, "mu_floor": floor}


def _specfun_table(cfg: RunConfig, p: Potential):
    from .specfun import airy, pcf

    x = np.asarray(sorted(cfg.x_values), dtype=float)
    rows = []
    ai = airy(x)
    for i, xv in enumerate(x):
        rows.append({"function": "airy", "x": float(xv), "b": None, "value": float(ai.ai[i]),
                     "derivative": float(ai.ai1[i]), "companion": float(ai.bi[i]),
                     "companion_derivative": float(ai.bi1[i])})
    xp = x[x >= 0]
    for b in sorted(cfg.b_values, reverse=True):
        bund = pcf(xp, b)
        for i, xv in enumerate(xp):
            rows.append({"function": "pcf", "x": float(xv), "b": float(b), "value": float(bund.u[i]),
                         "derivative": float(bund.u1[i]), "companion": float(bund.ubar[i]),
                         "companion_derivative": float(bund.ubar1[i])})
    return rows, {}


_DISPATCH = {
    "spectrum": _spectrum,
    "count": _count,
    "scattering": _scattering,
    "liouville_table": _liouville_table,
    "convergence": _convergence,
    "specfun_table": _specfun_table,
}


# output ---------------------------------------------------------------------

def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _jsonable(v):
    if isinstance(v, (np.floating,)):
        v = float(v)
    if isinstance(v, (np.integer,)):
        v = int(v)
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def render(cfg: RunConfig, rows: list, summary: dict) -> str:
    cols = COLUMNS[cfg.mode]
    if cfg.output_format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([_cell(r.get(c)) for c in cols])
        return buf.getvalue()
    doc = {
        "mode": cfg.mode,
        "potential": cfg.potential,
        "hbar_list": list(cfg.hbar_list),
        "columns": cols,
        "rows": [{c: _jsonable(r.get(c)) for c in cols} for r in rows],
        "summary": {k: _jsonable(v) for k, v in sorted(summary.items())},
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def run(cfg: RunConfig) -> str:
    """Execute a configuration and return the rendered artifact."""
    p = _potential(cfg)
    rows, summary = _DISPATCH[cfg.mode](cfg, p)
    return render(cfg, rows, summary)


# argument handling ------------------------------------------------------------

def _floats(text: str) -> tuple:
    if text is None:
        return None
    parts = [t for t in str(text).replace(" ", "").split(",") if t]
    try:
        return tuple(float(t) for t in parts)
    except ValueError:
        raise ConfigError(f"cannot parse number list {text!r}") from None


def _parser() -> argparse.ArgumentParser:
    cols = "\n".join(f"  {m}: {', '.join(c)}" for m, c in COLUMNS.items())
    ap = argparse.ArgumentParser(
        prog="zswkb",
        description="Semiclassical spectra and scattering for the Zakharov-Shabat operator.",
        epilog="CSV columns (fixed order):\n" + cols + "\n\nFloats are written with 17 significant digits. "
               "ZS_NUM_THREADS caps parallel workers; rows are sorted independently of completion order.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    ap.add_argument("mode", nargs="?", choices=MODES)
    ap.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    ap.add_argument("--potential", help=f"catalog name ({', '.join(sorted(CATALOG))}) or inline JSON spec")
    ap.add_argument("--hbar", help="comma-separated hbar values")
    ap.add_argument("--format", dest="output_format", choices=("csv", "json"))
    ap.add_argument("--output", dest="output_path", help="output file (default stdout)")
    ap.add_argument("--oracle", action="store_const", const=True, help="add shooting/Jost oracle columns")
    ap.add_argument("--mu-floor", type=float, dest="mu_floor")
    ap.add_argument("--mu1", type=float)
    ap.add_argument("--mu2", type=float)
    ap.add_argument("--lambda", dest="lambdas", help="comma-separated lambda values")
    ap.add_argument("--turning-point", type=float, dest="turning_a", help="turning point a for liouville_table")
    ap.add_argument("--x", dest="x_values", help="comma-separated x values")
    ap.add_argument("--b", dest="b_values", help="comma-separated b values for specfun_table")
    ap.add_argument("--seed", type=int)
    return ap


def _parse_potential(text):
    if text is None or isinstance(text, dict):
        return text
    t = str(text).strip()
    if t.startswith("{"):
        try:
            return json.loads(t)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"inline potential is not valid JSON: {exc}") from None
    return t


def build_config(argv) -> RunConfig:
    args = _parser().parse_args(argv)
    base = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                base = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config!r}: {exc}") from None
        if not isinstance(base, dict):
            raise ConfigError("config file must hold a JSON object")
        known = {f.name for f in fields(RunConfig)}
        unknown = set(base) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
    over = {
        "mode": args.mode,
        "potential": _parse_potential(args.potential),
        "hbar_list": _floats(args.hbar),
        "output_format": args.output_format,
        "output_path": args.output_path,
        "oracle": args.oracle,
        "mu_floor": args.mu_floor,
        "mu1": args.mu1,
        "mu2": args.mu2,
        "lambdas": _floats(args.lambdas),
        "turning_a": args.turning_a,
        "x_values": _floats(args.x_values),
        "b_values": _floats(args.b_values),
        "seed": args.seed,
    }
    merged = dict(base)
    merged.update({k: v for k, v in over.items() if v is not None})
    for k in ("hbar_list", "lambdas", "x_values", "b_values"):
        if k in merged and merged[k] is not None:
            merged[k] = tuple(float(v) for v in merged[k])
    if "potential" in merged:
        merged["potential"] = _parse_potential(merged["potential"])
    for req in ("mode", "potential", "hbar_list"):
        if merged.get(req) is None:
            raise ConfigError(f"missing required setting {req!r}")
    return RunConfig(**merged)


def main(argv=None) -> int:
    try:
        cfg = build_config(sys.argv[1:] if argv is None else argv)
        p = _potential(cfg)
        if cfg.mode in ("spectrum", "count", "convergence") and cfg.mu_floor is not None:
            if not 0 <= cfg.mu_floor < p.a_max:
                raise OutOfRange("mu_floor must lie in [0, A_max)")
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_INVALID
    except (ConfigError, InvalidPotential, OutOfRange, ValueError, TypeError) as exc:
        print(f"zswkb: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        text = run(cfg)
    except (InvalidPotential, OutOfRange) as exc:
        print(f"zswkb: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ArithmeticError, RuntimeError, ValueError) as exc:
        print(f"zswkb: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
