"""Command-line harness: ``reflect``, ``appendix-compare``, ``b1-check``, ``ray``, ``classify``.

Settings come from an optional flat ``key = value`` file (``--config``) and
are overridden by command-line flags. Every effective setting is echoed as a
``#`` comment at the top of each data file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, fields, replace
from importlib.metadata import PackageNotFoundError, version

import numpy as np

from .asymptotics import LeadingOrderR, is_proven_range
from .errors import ConfigError, ConormalLabError
from .planewave import b1_expansion, compute_b1, connect_and_extract_R
from .potential import DEFAULT_X0, DEFAULT_X1, ConormalPotential1D, ZeroPotential
from .raytrace import PhasePoint, classify_boundary_point, get_demo, trace_gbb_tree
from .scatter1d import IntegratorConfig, ScatteringProblem, reflection_sweep, solve_direct

log = logging.getLogger(__name__)

COMMANDS = ("reflect", "appendix-compare", "b1-check", "ray", "classify")
EXIT_OK, EXIT_PARTIAL, EXIT_CONFIG = 0, 1, 2
FAILURE_FRACTION = 0.10


def _fmt(v) -> str:
    """17 significant digits: float round trip is exact."""
    return f"{v:.17g}"


def _fmt6(v) -> str:
    return f"{v:.6g}"


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    alpha: float | None = None
    h: tuple = ()
    h_inv_min: float | None = None
    h_inv_max: float | None = None
    h_log_min: float | None = None
    h_log_max: float | None = None
    points: int | None = None
    x0: float = DEFAULT_X0
    x1: float = DEFAULT_X1
    eta: float | None = None
    free: bool = False
    conjectural: bool = False
    rel_tol: float = IntegratorConfig.rel_tol
    abs_tol: float = IntegratorConfig.abs_tol
    y_min: float = 50.0
    y_max: float = 500.0
    quad_tol: float = 1e-10
    spec: str = "transverse"
    seed: tuple = ()
    tangential: tuple = ()
    depth: int = 2
    s_max: float | None = None
    out: str | None = None
    jobs: int = 1

    def validate(self) -> "ExperimentConfig":
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if self.command in ("reflect", "appendix-compare"):
            forms = [bool(self.h), self.h_inv_min is not None or self.h_inv_max is not None,
                     self.h_log_min is not None or self.h_log_max is not None]
            if sum(forms) != 1:
                raise ConfigError("give exactly one h specification: --h, --h-inv-min/max or --h-log-min/max")
            if not self.free and (self.alpha is None or not self.alpha > 0):
                raise ConfigError("--alpha must be given and positive")
            if any(h <= 0 for h in self.h_values()):
                raise ConfigError("all h must be positive")
        if self.command == "appendix-compare" and not self.free and not is_proven_range(self.alpha) \
                and not self.conjectural:
            raise ConfigError(f"alpha={self.alpha} lies outside (0, 1); pass --conjectural to run anyway")
        if self.command == "b1-check" and (self.alpha is None or not self.alpha > 0):
            raise ConfigError("--alpha must be given and positive")
        if self.command == "b1-check" and not 0 <= self.y_min < self.y_max:
            raise ConfigError("need 0 <= y_min < y_max")
        if self.command == "classify" and len(self.tangential) % 2:
            raise ConfigError("--tangential takes y values followed by the same number of eta values")
        return self

    def h_values(self) -> list[float]:
        if self.h:
            return [float(v) for v in self.h]
        if self.h_inv_min is not None or self.h_inv_max is not None:
            if self.h_inv_min is None or self.h_inv_max is None or self.points is None:
                raise ConfigError("inverse-h range needs --h-inv-min, --h-inv-max and --points")
            if not 0 < self.h_inv_min <= self.h_inv_max or self.points < 1:
                raise ConfigError("need 0 < h_inv_min <= h_inv_max and points >= 1")
            return [1.0 / v for v in np.linspace(self.h_inv_min, self.h_inv_max, self.points)]
        if self.h_log_min is None or self.h_log_max is None or self.points is None:
            raise ConfigError("log-h range needs --h-log-min, --h-log-max and --points")
        if not 0 < self.h_log_min <= self.h_log_max or self.points < 1:
            raise ConfigError("need 0 < h_log_min <= h_log_max and points >= 1")
        return [float(v) for v in np.geomspace(self.h_log_min, self.h_log_max, self.points)]

    def potential(self):
        if self.free:
            return ZeroPotential(alpha=self.alpha or 0.0, x1=self.x1)
        return ConormalPotential1D(self.alpha, self.x0, self.x1)

    def integrator(self) -> IntegratorConfig:
        return IntegratorConfig(rel_tol=self.rel_tol, abs_tol=self.abs_tol)


_TUPLE_KEYS = {"h", "seed", "tangential"}
_BOOL_KEYS = {"free", "conjectural"}


def _coerce(key: str, raw: str):
    ftype = {f.name: f.type for f in fields(ExperimentConfig)}[key]
    raw = raw.strip()
    if key in _TUPLE_KEYS:
        return tuple(float(v) for v in raw.replace(",", " ").split())
    if key in _BOOL_KEYS:
        low = raw.lower()
        if low not in ("true", "false", "1", "0", "yes", "no"):
            raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
        return low in ("true", "1", "yes")
    if raw.lower() == "none":
        return None
    if "int" in ftype:
        return int(raw)
    if "float" in ftype:
        return float(raw)
    return raw


def parse_config(text: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment; dashes in keys become underscores."""
    known = {f.name for f in fields(ExperimentConfig)}
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, raw = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            out[key] = _coerce(key, raw)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from exc
    return out


def serialize_config(cfg: ExperimentConfig) -> str:
    lines = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if isinstance(v, tuple):
            v = " ".join(_fmt(x) for x in v)
        elif isinstance(v, float):
            v = _fmt(v)
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"


def _header(cfg: ExperimentConfig, extra: dict | None = None) -> str:
    try:
        ver = version("artifact")
    except PackageNotFoundError:
        ver = "unknown"
    rows = [f"# conormal_lab {ver}"]
    rows += ["# " + line for line in serialize_config(cfg).splitlines()]
    for k, v in (extra or {}).items():
        rows.append(f"# {k} = {v}")
    return "\n".join(rows) + "\n"


def _write(path: str | None, text: str) -> None:
    if path is None:
        return
    with open(path, "w") as fh:
        fh.write(text)


def _split_results(results):
    ok, failed = [], []
    for r in results:
        (failed if isinstance(r, tuple) else ok).append(r)
    return ok, failed


def _exit_for(n_failed: int, n_total: int) -> int:
    return EXIT_PARTIAL if n_total and n_failed / n_total > FAILURE_FRACTION else EXIT_OK


# --- commands --------------------------------------------------------------


def cmd_reflect(cfg: ExperimentConfig, stdout=None) -> int:
    stdout = stdout or sys.stdout
    icfg = cfg.integrator()
    results = reflection_sweep(cfg.alpha or 0.0, cfg.h_values(), icfg, potential=cfg.potential(),
                               jobs=cfg.jobs, raise_errors=False)
    ok, failed = _split_results(results)
    alpha = cfg.alpha or 0.0
    lo = LeadingOrderR(alpha)
    body = io.StringIO()
    rows = []
    # h ascending from the sweep, so reverse for h^-1 ascending
    for r in reversed(results):
        if isinstance(r, tuple):
            body.write(f"# h={_fmt(r[0])} error={type(r[1]).__name__}: {r[1]}\n")
            continue
        rescaled = abs(r.R) * r.h ** (-alpha)
        rows.append((1.0 / r.h, rescaled, r.flux_defect))
        body.write(f"{_fmt(1.0 / r.h)} {_fmt(rescaled)}\n")
    header = _header(cfg, {"integrator": icfg, "columns": "h_inverse rescaled_modulus",
                           "constant": _fmt(lo.modulus_constant)})
    _write(cfg.out, header + body.getvalue())

    if rows:
        series = np.array([r[1] for r in rows])
        tail = series[-max(1, len(series) // 5):]
        tail_mean = float(np.mean(tail))
        worst_flux = max(abs(r[2]) for r in rows)
        if cfg.free:
            print(f"free: max |R| h^-alpha = {_fmt6(series.max())}, max flux defect = {_fmt6(worst_flux)}",
                  file=stdout)
        else:
            gap = (tail_mean - lo.modulus_constant) / lo.modulus_constant
            tag = " (conjectural range)" if lo.conjectural else ""
            print(f"alpha={_fmt6(alpha)} constant={_fmt6(lo.modulus_constant)}{tag} "
                  f"tail_mean={_fmt6(tail_mean)} rel_gap={_fmt6(gap)} "
                  f"max_flux_defect={_fmt6(worst_flux)} points={len(rows)} failed={len(failed)}", file=stdout)
    else:
        print(f"all {len(failed)} points failed", file=stdout)
    return _exit_for(len(failed), len(results))


def _rel_gap(a: float, b: float) -> float:
    return abs(a - b) / abs(b) if b != 0 else math.nan


def _appendix_row(args):
    pot, h, eta, icfg, alpha = args
    try:
        direct = solve_direct(ScatteringProblem(pot, h), icfg)
        r_app, _ = connect_and_extract_R(pot, h, eta, icfg)
    except ConormalLabError as exc:
        return h, exc
    r_pred = 0.0 if isinstance(pot, ZeroPotential) else abs(LeadingOrderR(alpha)(h))
    rd, ra = abs(direct.R), abs(r_app)
    return h, (rd, ra, r_pred, _rel_gap(ra, rd), _rel_gap(rd, r_pred))


def cmd_appendix_compare(cfg: ExperimentConfig, stdout=None) -> int:
    stdout = stdout or sys.stdout
    icfg = cfg.integrator()
    pot = cfg.potential()
    hs = sorted(cfg.h_values(), reverse=True)
    tasks = [(pot, h, cfg.eta, icfg, cfg.alpha) for h in hs]
    if cfg.jobs > 1 and len(tasks) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(_appendix_row, tasks))
    else:
        rows = [_appendix_row(t) for t in tasks]

    cols = ["h", "R_direct", "R_appendix", "R_predicted", "gap_direct_appendix", "gap_direct_predicted"]
    buf = io.StringIO()
    buf.write(_header(cfg, {"integrator": icfg}))
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    table = [cols]
    failed = 0
    for h, res in rows:
        if isinstance(res, Exception):
            failed += 1
            buf.write(f"# h={_fmt(h)} error={type(res).__name__}: {res}\n")
            continue
        writer.writerow([_fmt(h), *(_fmt(v) for v in res)])
        table.append([_fmt6(h), *(_fmt6(v) for v in res)])
    _write(cfg.out, buf.getvalue())
    widths = [max(len(r[i]) for r in table) for i in range(len(cols))]
    for r in table:
        print("  ".join(c.rjust(w) for c, w in zip(r, widths)), file=stdout)
    return _exit_for(failed, len(rows))


def b1_rows(alpha: float, ys, rel_tol: float = 1e-10):
    """``(y, |quadrature - expansion|)`` pairs; ``y = 0`` compares against the exact value 0."""
    out = []
    for y in ys:
        if y == 0:
            out.append((0.0, abs(compute_b1(alpha, 0.0, rel_tol))))
        else:
            out.append((float(y), abs(compute_b1(alpha, y, rel_tol) - b1_expansion(alpha, y))))
    return out


def fit_slope(ys, diffs) -> float:
    ys, diffs = np.asarray(ys, dtype=float), np.asarray(diffs, dtype=float)
    keep = (ys > 0) & (diffs > 0)
    return float(np.polyfit(np.log(ys[keep]), np.log(diffs[keep]), 1)[0])


def cmd_b1_check(cfg: ExperimentConfig, stdout=None) -> int:
    stdout = stdout or sys.stdout
    n = cfg.points or 20
    lo = cfg.y_min if cfg.y_min > 0 else 1.0
    ys = list(np.geomspace(lo, cfg.y_max, n))
    if cfg.y_min == 0:
        ys = [0.0, *ys]
    rows, failed = [], 0
    for y in ys:
        try:
            rows.extend(b1_rows(cfg.alpha, [y], cfg.quad_tol))
        except ConormalLabError as exc:
            failed += 1
            print(f"# y={_fmt(y)} error={exc}", file=stdout)
    pos = [(y, d) for y, d in rows if y > 0]
    slopes = [math.nan] + [math.log(d2 / d1) / math.log(y2 / y1) if d1 > 0 and d2 > 0 else math.nan
                           for (y1, d1), (y2, d2) in zip(pos[:-1], pos[1:])]
    local = dict(zip([y for y, _ in pos], slopes))
    buf = io.StringIO()
    buf.write(_header(cfg, {"columns": "y abs_difference local_slope"}))
    print(f"{'y':>12} {'|quad - expansion|':>20} {'local slope':>12}", file=stdout)
    for y, d in rows:
        s = local.get(y, math.nan) if y > 0 else math.nan
        buf.write(f"{_fmt(y)} {_fmt(d)} {_fmt(s)}\n")
        print(f"{_fmt6(y):>12} {_fmt6(d):>20} {_fmt6(s):>12}", file=stdout)
    _write(cfg.out, buf.getvalue())
    slope = fit_slope(*zip(*pos)) if len(pos) >= 2 else math.nan
    print(f"fitted slope {_fmt6(slope)} (alpha - 1 = {_fmt6(cfg.alpha - 1)})", file=stdout)
    return _exit_for(failed, len(ys))


def _demo_for(cfg: ExperimentConfig):
    kw = {}
    if cfg.spec in ("transverse", "i", "tangency", "iii") and cfg.alpha is not None:
        kw["alpha"] = cfg.alpha
    demo = get_demo(cfg.spec, **kw)
    if cfg.seed:
        n = demo.spec.ntan
        if len(cfg.seed) != 2 + 2 * n:
            raise ConfigError(f"--seed needs {2 + 2 * n} numbers: x, y..., xi, eta...")
        demo = replace(demo, seed=PhasePoint.from_array(cfg.seed))
    if cfg.s_max is not None:
        demo = replace(demo, s_max=cfg.s_max)
    return demo


def cmd_ray(cfg: ExperimentConfig, stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        demo = _demo_for(cfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    tree = trace_gbb_tree(demo.spec, demo.seed, demo.s_max, max_depth=cfg.depth)
    doc = tree.to_dict()
    doc["config"] = serialize_config(cfg).splitlines()
    _write(cfg.out, json.dumps(doc, indent=1) + "\n")
    print(f"{'id':>3} {'parent':>6} {'kind':<12} {'strength':>9} {'status':<19} endpoint (s; x, y, xi, eta)",
          file=stdout)
    for n in tree.nodes:
        end = n.segment.z[-1]
        parent = "-" if n.parent is None else str(n.parent)
        print(f"{n.id:>3} {parent:>6} {n.branch_kind:<12} {_fmt6(n.strength):>9} {n.status:<19} "
              f"{_fmt6(n.segment.s[-1])}; " + ", ".join(_fmt6(v) for v in end), file=stdout)
    failed = sum(n.status == "step_underflow" for n in tree.nodes)
    return _exit_for(failed, len(tree.nodes))


def cmd_classify(cfg: ExperimentConfig, stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        demo = _demo_for(cfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    spec = demo.spec
    if cfg.tangential:
        n = len(cfg.tangential) // 2
        if n != spec.ntan:
            raise ConfigError(f"--tangential needs {2 * spec.ntan} numbers: y..., eta...")
        y, eta = cfg.tangential[:n], cfg.tangential[n:]
    else:
        y, eta = demo.seed.y, demo.seed.eta
    cls = classify_boundary_point(spec, y, eta)
    print(f"{spec.name} y={list(y)} eta={list(eta)} -> {cls}", file=stdout)
    return EXIT_OK


HANDLERS = {"reflect": cmd_reflect, "appendix-compare": cmd_appendix_compare, "b1-check": cmd_b1_check,
            "ray": cmd_ray, "classify": cmd_classify}


# --- argument parsing ------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="conormal-lab", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="key = value settings file; flags override it")
    p.add_argument("--alpha", type=float)
    p.add_argument("--h", type=float, nargs="+", help="explicit list of h values")
    p.add_argument("--h-inv-min", type=float)
    p.add_argument("--h-inv-max", type=float)
    p.add_argument("--h-log-min", type=float, help="smallest h of a geometric grid")
    p.add_argument("--h-log-max", type=float, help="largest h of a geometric grid")
    p.add_argument("--points", type=int)
    p.add_argument("--x0", type=float, help="taper start")
    p.add_argument("--x1", type=float, help="taper end")
    p.add_argument("--eta", type=float, help="matching exponent for appendix-compare")
    p.add_argument("--free", action="store_true", default=None, help="use V = 0")
    p.add_argument("--conjectural", action="store_true", default=None, help="allow alpha outside (0, 1)")
    p.add_argument("--rel-tol", type=float)
    p.add_argument("--abs-tol", type=float)
    p.add_argument("--y-min", type=float)
    p.add_argument("--y-max", type=float)
    p.add_argument("--quad-tol", type=float)
    p.add_argument("--spec", help="demo name: transverse (i), glancing (ii), tangency (iii)")
    p.add_argument("--seed", type=float, nargs="+", help="ray seed x y... xi eta...")
    p.add_argument("--tangential", type=float, nargs="+", help="y... eta... for classify")
    p.add_argument("--depth", type=int)
    p.add_argument("--s-max", type=float)
    p.add_argument("--out")
    p.add_argument("--jobs", type=int)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(ns: argparse.Namespace) -> ExperimentConfig:
    settings = {}
    if ns.config:
        try:
            with open(ns.config) as fh:
                settings.update(parse_config(fh.read()))
        except OSError as exc:
            raise ConfigError(f"cannot read {ns.config}: {exc}") from exc
    settings.pop("command", None)
    for f in fields(ExperimentConfig):
        if f.name == "command":
            continue
        v = getattr(ns, f.name, None)
        if v is not None:
            settings[f.name] = tuple(v) if isinstance(v, list) else v
    return ExperimentConfig(command=ns.command, **settings).validate()


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = config_from_args(ns)
        if cfg.out:
            open(cfg.out, "a").close()
        return HANDLERS[cfg.command](cfg)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
