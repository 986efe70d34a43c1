"""Command-line front end.

Commands::

    fracutm solve <config.json>
    fracutm regions <alpha> [--out geometry.json] [--csv rays.csv]
    fracutm check {fraccalc,geometry,transforms,utm,all}
    fracutm converge <config.json> --levels N

Exit codes: 0 ok, 1 check failure, 2 validation error, 3 tolerance not met.

Environment: ``FRACUTM_VERBOSE`` (0, 1, 2) sets the log level;
``FRACUTM_THREADS`` caps BLAS/OpenMP threads (read at package import);
``FRACUTM_NO_TIMING=1`` writes ``runtime_s: null`` so reports are byte-reproducible.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import tempfile
import time
import warnings
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from . import fraccalc as fc
from . import symbolgeo as sg
from .errors import FracUTMError, ToleranceNotMetError, ValidationError
from .kernels import BACKEND
from .transforms import QuadratureSpec
from .utm import ContourParams, ProblemSpec, gr_report, pde_residual, solve

log = logging.getLogger("fracutm")

EXIT_OK, EXIT_CHECK, EXIT_VALIDATION, EXIT_TOLERANCE = 0, 1, 2, 3
POINT_TOL = 1e-6  # default per-point bound: err_est <= tol * (1 + |q|)
GR_SAMPLES = 20


# ---------------------------------------------------------------------------
# config

_Q0_FAMILIES = {
    "zero": (fc.zero, ()),
    "exp_decay": (fc.exp_decay, ("lam",)),
    "poly_exp": (fc.poly_exp, ("p", "lam")),
    "gaussian_x": (fc.gaussian_x, ("lam",)),
}
_H_FAMILIES = {
    "zero": (fc.zero, ()),
    "constant": (fc.constant, ("c",)),
    "exp_decay": (fc.exp_decay, ("lam",)),
}


def _number(d, key, default=None):
    if key not in d:
        if default is None:
            raise ValidationError(f"missing key '{key}'")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ValidationError(f"'{key}' must be a finite number", value=v)
    return float(v)


def _family(spec, table, what):
    if not isinstance(spec, dict) or "family" not in spec:
        raise ValidationError(f"{what} needs a 'family'")
    fam = spec["family"]
    if fam not in table:
        raise ValidationError(f"unknown {what} family '{fam}'", choices=sorted(table))
    ctor, keys = table[fam]
    args = [_number(spec, k) for k in keys]
    if fam in ("exp_decay", "gaussian_x", "poly_exp") and not args[-1] > 0:
        raise ValidationError(f"{what} decay parameter lam must be positive")
    if fam == "poly_exp" and not args[0] >= 0:
        raise ValidationError(f"{what} power p must be non-negative")
    if "amp" in spec and fam not in ("zero", "constant"):
        args.append(_number(spec, "amp"))
    return ctor(*args)


def _axis(v, name):
    if not (isinstance(v, list) and len(v) == 3):
        raise ValidationError(f"grid.{name} must be [start, stop, count]")
    a, b = (_number({"v": x}, "v") for x in v[:2])
    n = v[2]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ValidationError(f"grid.{name} count must be a positive integer")
    if n > 1 and not b > a:
        raise ValidationError(f"grid.{name} needs stop > start")
    return np.linspace(a, b, n) if n > 1 else np.array([a])


@dataclass
class RunConfig:
    spec: ProblemSpec
    xs: np.ndarray
    ts: np.ndarray
    field_path: Optional[str]
    report_path: Optional[str]
    point_tol: float
    raw: dict


def parse_config(raw: dict, base_dir: str = ".") -> RunConfig:
    """Validate a config mapping and build the problem. Raises ValidationError."""
    if not isinstance(raw, dict):
        raise ValidationError("config must be a JSON object")
    for key in ("alpha", "A", "T", "q0", "bc", "grid"):
        if key not in raw:
            raise ValidationError(f"missing key '{key}'")
    alpha, A, T = _number(raw, "alpha"), _number(raw, "A"), _number(raw, "T")
    q0 = _family(raw["q0"], _Q0_FAMILIES, "q0")
    bc = raw["bc"]
    if not isinstance(bc, dict) or "kind" not in bc:
        raise ValidationError("bc needs a 'kind'")
    h = _family(bc.get("h", {"family": "zero"}), _H_FAMILIES, "h")
    qd = raw.get("quadrature", {})
    if not isinstance(qd, dict):
        raise ValidationError("quadrature must be an object")
    known = {"eps_rel", "r_max", "k_max", "eps_rot", "nodes_per_ray", "tol"}
    extra = set(qd) - known
    if extra:
        raise ValidationError("unknown quadrature keys", keys=sorted(extra))
    eps_rel = _number(qd, "eps_rel", 1e-10)
    k_max = _number(qd, "k_max", 80.0)
    if not (0 < eps_rel < 1 and k_max > 0):
        raise ValidationError("eps_rel must lie in (0, 1) and k_max must be positive")
    r_max = qd.get("r_max")
    if r_max is not None:
        r_max = _number(qd, "r_max")
    npr = qd.get("nodes_per_ray", 256)
    if isinstance(npr, bool) or not isinstance(npr, int):
        raise ValidationError("nodes_per_ray must be an integer")
    contour = ContourParams(r_max=r_max, eps_rot=_number(qd, "eps_rot", 0.05), nodes_per_ray=npr)
    with warnings.catch_warnings():
        warnings.simplefilter("always")
        spec = ProblemSpec(A, alpha, T, q0, bc["kind"], h,
                           QuadratureSpec(eps_rel=eps_rel, k_max=k_max), contour)
    g = raw["grid"]
    if not isinstance(g, dict) or "x" not in g or "t" not in g:
        raise ValidationError("grid needs 'x' and 't'")
    xs, ts = _axis(g["x"], "x"), _axis(g["t"], "t")
    if np.any(xs < 0):
        raise ValidationError("grid.x must be non-negative")
    if np.any(ts <= 0) or np.any(ts > T):
        raise ValidationError("grid.t must lie in (0, T]")
    out = raw.get("output", {})
    rel = lambda p: None if p is None else os.path.join(base_dir, p)
    tol = _number(qd, "tol", POINT_TOL)
    return RunConfig(spec, xs, ts, rel(out.get("field_path")), rel(out.get("report_path")), tol, raw)


def load_config(path: str) -> RunConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ValidationError("cannot read config", path=path, error=str(exc)) from None
    except json.JSONDecodeError as exc:
        raise ValidationError("config is not valid JSON", error=str(exc)) from None
    return parse_config(raw, os.path.dirname(os.path.abspath(path)))


# ---------------------------------------------------------------------------
# output

def atomic_write(path: str, text: str) -> None:
    """Write via a temporary file in the same directory and rename."""
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _f(v) -> str:
    return repr(float(v))


def field_csv(xs, ts, q, err) -> str:
    lines = ["x,t,re_q,im_q,err_est"]
    for i, t in enumerate(ts):
        for j, x in enumerate(xs):
            lines.append(",".join(map(_f, (x, t, q[i, j].real, q[i, j].imag, err[i, j]))))
    return "\n".join(lines) + "\n"


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emit_error(exc: FracUTMError) -> int:
    info = {k: (v if isinstance(v, (int, float, str, type(None))) else str(v))
            for k, v in exc.info.items()}
    print(json.dumps({"error": type(exc).__name__, "reason": exc.reason, "info": info}),
          file=sys.stderr)
    return exc.exit_code


def _gr_samples(seed=0):
    rng = np.random.default_rng(seed)
    return rng.uniform(-2, 2, GR_SAMPLES) - 1j * rng.uniform(0.1, 2, GR_SAMPLES)


# ---------------------------------------------------------------------------
# commands

def cmd_solve(config_path: str) -> int:
    t0 = time.perf_counter()
    try:
        cfg = load_config(config_path)
        sp = cfg.spec
        field = solve(sp)
        q, err = field.grid(cfg.xs, cfg.ts)
        log.info("field evaluated on %d x %d grid", len(cfg.ts), len(cfg.xs))
        gr = gr_report(sp, field, _gr_samples(), [sp.T / 4, sp.T / 2])
        pde = pde_residual(field, sp)
    except FracUTMError as exc:
        return _emit_error(exc)
    bad = int(np.sum(~(err <= cfg.point_tol * (1 + np.abs(q)))))
    report = {
        "gr_residual_max": gr.max,
        "gr_residual_median": gr.median,
        "pde_residual_rel": pde.relative,
        "runtime_s": None if os.environ.get("FRACUTM_NO_TIMING") == "1"
        else round(time.perf_counter() - t0, 3),
        "quadrature": {
            "eps_rel": sp.quadrature.eps_rel,
            "k_max": sp.quadrature.k_max,
            "r_max": sp.contour.r_max,
            "eps_rot": sp.contour.eps_rot,
            "nodes_per_ray": sp.contour.nodes_per_ray,
            "max_err_est": float(np.max(err)),
            "points_over_tol": bad,
            "point_tol": cfg.point_tol,
            "backend": BACKEND,
        },
    }
    csv = field_csv(cfg.xs, cfg.ts, q, err)
    if cfg.field_path:
        atomic_write(cfg.field_path, csv)
    else:
        sys.stdout.write(csv)
    if cfg.report_path:
        atomic_write(cfg.report_path, _json(report))
    else:
        sys.stdout.write(_json(report))
    if bad:
        return _emit_error(ToleranceNotMetError("tolerance not met", points=bad))
    return EXIT_OK


def regions_json(alpha: float) -> dict:
    if not (1.0 < alpha < 2.5):
        raise ValidationError("alpha outside regions range (1, 5/2)", alpha=alpha)
    sec = sg.dplus_sectors(alpha)
    th1, th2 = sg.exact_gamma_angles(alpha)
    nu = None
    if sg.nu_candidates(alpha):
        c = complex(np.exp(-2j * math.pi / alpha))
        nu = [c.real, c.imag]
    return {"alpha": alpha, "sectors": [list(map(float, s)) for s in sec.sectors],
            "gamma_rays": [float(th1), float(th2)] if not sec.empty else [], "nu": nu}


def regions_csv(geo: dict, r_max: float = 10.0, n: int = 51) -> str:
    lines = ["ray_id,re,im"]
    for i, th in enumerate(geo["gamma_rays"]):
        for r in np.linspace(0.0, r_max, n):
            z = r * np.exp(1j * th)
            lines.append(f"{i},{_f(z.real)},{_f(z.imag)}")
    return "\n".join(lines) + "\n"


def cmd_regions(alpha: float, out_path: Optional[str] = None, csv_path: Optional[str] = None) -> int:
    try:
        geo = regions_json(alpha)
    except FracUTMError as exc:
        return _emit_error(exc)
    if out_path:
        atomic_write(out_path, _json(geo))
    else:
        sys.stdout.write(_json(geo))
    if csv_path:
        atomic_write(csv_path, regions_csv(geo))
    return EXIT_OK


def cmd_check(suite: str) -> int:
    from .suites import SUITES, run_suite
    if suite != "all" and suite not in SUITES:
        return _emit_error(ValidationError("unknown suite", suite=suite))
    results = run_suite(suite)
    for c in results:
        print(c.line(), flush=True)
    failed = [c.name for c in results if not c.passed]
    if failed:
        print("failing: " + "; ".join(failed))
        return EXIT_CHECK
    return EXIT_OK


def convergence_study(cfg: RunConfig, levels: int) -> dict:
    """Re-solve with nodes_per_ray doubled per level; successive differences and orders."""
    sp = cfg.spec
    base = sp.contour.nodes_per_ray
    prev, diffs, scale = None, [], 0.0
    for lev in range(levels):
        c = ContourParams(r_max=sp.contour.r_max, eps_rot=sp.contour.eps_rot,
                          nodes_per_ray=base * 2 ** lev, r_max_cap=sp.contour.r_max_cap,
                          nystrom_panels=sp.contour.nystrom_panels, x_max=sp.contour.x_max)
        q, _ = solve(sp.replace(contour=c)).grid(cfg.xs, cfg.ts)
        scale = max(scale, float(np.max(np.abs(q))))
        if prev is not None:
            diffs.append(float(np.max(np.abs(q - prev))))
        prev = q
    floor = 1e-13 * (1 + scale)
    orders = []
    for a, b in zip(diffs[:-1], diffs[1:]):
        if b <= floor:
            orders.append(math.inf)
        elif a <= floor:
            orders.append(math.nan)
        else:
            orders.append(math.log2(a / b))
    finite = [o for o in orders if not math.isnan(o)]
    observed = min(finite) if finite else math.inf
    return {"nodes_per_ray": [base * 2 ** l for l in range(levels)], "differences": diffs,
            "orders": ["inf" if math.isinf(o) else (None if math.isnan(o) else o) for o in orders],
            "observed_order": "inf" if math.isinf(observed) else observed, "floor": floor}


def cmd_converge(config_path: str, levels: int) -> int:
    if levels < 3:
        return _emit_error(ValidationError("levels must be at least 3", levels=levels))
    try:
        cfg = load_config(config_path)
        res = convergence_study(cfg, levels)
    except FracUTMError as exc:
        return _emit_error(exc)
    sys.stdout.write(_json(res))
    order = res["observed_order"]
    if order != "inf" and not order >= 1:
        return _emit_error(ToleranceNotMetError("observed order below 1", order=order))
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fracutm", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("solve", help="solve a configured problem")
    s.add_argument("config")
    r = sub.add_parser("regions", help="D+ sectors, contour rays and nu map")
    r.add_argument("alpha", type=float)
    r.add_argument("--out")
    r.add_argument("--csv")
    c = sub.add_parser("check", help="run an invariant suite")
    c.add_argument("suite", choices=["fraccalc", "geometry", "transforms", "utm", "all"])
    v = sub.add_parser("converge", help="node-doubling convergence study")
    v.add_argument("config")
    v.add_argument("--levels", type=int, default=3)
    return p


def _setup_logging():
    level = {"0": logging.WARNING, "1": logging.INFO, "2": logging.DEBUG}.get(
        os.environ.get("FRACUTM_VERBOSE", "0"), logging.WARNING)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    if level > logging.INFO:
        warnings.simplefilter("ignore", RuntimeWarning)


def main(argv: Optional[List[str]] = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    if args.command == "solve":
        return cmd_solve(args.config)
    if args.command == "regions":
        return cmd_regions(args.alpha, args.out, args.csv)
    if args.command == "check":
        return cmd_check(args.suite)
    return cmd_converge(args.config, args.levels)


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
