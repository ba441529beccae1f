"""Command line entry point: ``rvinterp {basis,perturb,reconstruct,bounds,nodes}``.

Configuration comes from an optional JSON file (``--config``) overridden by
flags.  Every JSON output carries the schema tag and a hash of the
result-relevant configuration, and is written with sorted keys so that equal
configurations produce byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

SCHEMA = "fil-report-v1"
COMMANDS = ("basis", "perturb", "reconstruct", "bounds", "nodes")


@dataclass
class RunConfig:
    command: str = "basis"
    nmax: int = 12
    trunc: int = 64
    weight: str = "s=5"
    eps: str = "power:0.01,1.5"
    delta: str | None = None
    grid: str = "-3:3:0.01"
    function: str = "gaussian"
    precision: str = "double"
    tol: float = 1e-7
    table: str | None = None
    nodes: str = "scaled:0.9"
    node_count: int = 2000
    out: str = "runs"
    jobs: int | None = None
    seed: int = 0

    # fields that change where or how fast results are produced, not what they are
    _NON_SEMANTIC = ("out", "jobs")

    def to_json(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        d = {k: v for k, v in self.to_json().items() if k not in self._NON_SEMANTIC}
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]

    @classmethod
    def from_json(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


def parse_grid(spec: str) -> np.ndarray:
    """``"a:b:step"`` -> points ``a, a+step, ...`` up to ``b`` inclusive."""
    try:
        a, b, h = (float(v) for v in spec.split(":"))
    except ValueError as exc:
        raise ValueError(f"grid must be 'a:b:step', got {spec!r}") from exc
    if h <= 0 or b < a:
        raise ValueError(f"bad grid {spec!r}")
    n = int(math.floor((b - a) / h + 1e-9))
    return a + h * np.arange(n + 1)


def _clean(obj):
    """Make ``obj`` JSON-safe: numpy scalars to Python, non-finite floats to ``None``."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def write_report(cfg: RunConfig, name: str, results: dict) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    doc = {
        "schema": SCHEMA,
        "command": cfg.command,
        "config_hash": cfg.digest(),
        "config": {k: v for k, v in cfg.to_json().items() if k not in cfg._NON_SEMANTIC},
        "results": results,
    }
    path = out / name
    path.write_text(json.dumps(_clean(doc), sort_keys=True, indent=2) + "\n")
    return path


def write_csv(cfg: RunConfig, name: str, header, rows) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    with open(path, "w", newline="") as fh:
        fh.write(f"# {SCHEMA} config_hash={cfg.digest()}\n")
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return path


class CommandError(Exception):
    """Failure with a message for the user and an exit code."""

    def __init__(self, msg: str, code: int = 1):
        super().__init__(msg)
        self.code = code


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_basis(cfg: RunConfig) -> int:
    from .rv_basis import PrecisionError, tabulate

    N = cfg.nmax
    roots = np.sqrt(np.arange(N + 1, dtype=float))
    parts = [roots]
    if cfg.trunc <= N:
        # also tabulate the perturbed nodes so perturb/reconstruct can use --table
        plan = _plan(cfg)
        parts += [plan.x, plan.y]
    g = parse_grid(cfg.grid) if cfg.grid else np.zeros(0)
    parts.append(g)
    pts = np.concatenate(parts)
    cache = Path(cfg.out) / "cache"
    try:
        table = tabulate(N, pts, cfg.precision, cache_dir=cache)
    except PrecisionError as exc:
        raise CommandError(f"precision guard: {exc}", 2) from exc
    a, ah = table.a.real[:, : N + 1], table.ahat.real[:, : N + 1]
    checks = {}
    if N >= 1:
        checks["a_n(sqrt m) = delta"] = float(np.abs(a[1:, 1:] - np.eye(N)).max())
        checks["ahat_n(sqrt m) = 0"] = float(np.abs(ah[1:, 1:]).max())
        checks["a_1(0) = -1"] = abs(a[1, 0] + 1)
        checks["ahat_1(0) = 1"] = abs(ah[1, 0] - 1)
    checks["a_0(0) = 1/2"] = abs(a[0, 0] - 0.5)
    failing = [k for k, v in checks.items() if not v < cfg.tol]
    results = {"nmax": N, "tolerance": cfg.tol, "max_errors": checks, "failing": failing,
               "passed": not failing, "table": str(cache / f"basis-{table.key()}.bin")}
    if g.size:
        ga, gah = table.a.real[:, -g.size :], table.ahat.real[:, -g.size :]
        rows = ((n, x, u, v) for n in range(N + 1) for x, u, v in zip(g, ga[n], gah[n]))
        write_csv(cfg, "basis.csv", ["n", "x", "a_n", "ahat_n"], rows)
    write_report(cfg, "basis_report.json", results)
    if failing:
        print("failing invariants: " + ", ".join(failing), file=sys.stderr)
        return 1
    return 0


def _plan(cfg: RunConfig):
    from .nodes import NodePlan, Perturbation

    eps = Perturbation.parse(cfg.eps)
    delta = Perturbation.parse(cfg.delta) if cfg.delta else None
    return NodePlan(eps, cfg.trunc, delta)


def _invert(op):
    from .perturb_op import NeumannError, hs_defect, invert_direct, invert_neumann

    d = hs_defect(op)
    if d < 1:
        try:
            return invert_neumann(op), d, None
        except NeumannError as exc:
            warn = str(exc)
    else:
        warn = f"defect {d:.4g} >= 1, Neumann series not applicable; using the direct inverse"
    print("warning: " + warn, file=sys.stderr)
    return invert_direct(op), d, warn


def _load_table(cfg: RunConfig):
    if not cfg.table:
        return None
    from .rv_basis import BasisTable

    if not Path(cfg.table).exists():
        raise CommandError(
            f"basis table {cfg.table} not found; build one with "
            f"'rvinterp basis --nmax {cfg.trunc} --out DIR' or drop --table to compute values directly"
        )
    try:
        return BasisTable.load(cfg.table)
    except ValueError as exc:
        raise CommandError(f"{exc}; rebuild it with 'rvinterp basis'") from exc


def cmd_perturb(cfg: RunConfig) -> int:
    from .perturb_op import (
        WeightScheme,
        build_truncation,
        coefficient_decay,
        node_residual,
        perturbed_coeffs,
        unweighted_inverse,
    )

    plan = _plan(cfg)
    w = WeightScheme.parse(cfg.weight)
    op = build_truncation(plan, w, table=_load_table(cfg))
    inv, defect, warn = _invert(op)
    coeffs = perturbed_coeffs(op, inv.inverse)
    rates = {}
    for n in (1, 2, 4, 8):
        if n + 3 <= plan.N:
            try:
                rates[str(n)] = coefficient_decay(coeffs, n)
            except ValueError:
                rates[str(n)] = None
    results = {
        "N": plan.N,
        "plan": plan.to_json(),
        "weight": w.to_json(),
        "hs_defect": defect,
        "tail_estimate": op.tail_estimate(),
        "inverse": {"method": inv.method, "terms": inv.terms, "last_increment": inv.last_increment,
                    "condition": inv.condition},
        "warning": warn,
        "node_residual": node_residual(coeffs, plan, min(plan.N, 32)),
        "coefficient_decay_rates": rates,
        "row_sums": coeffs.row_sums(),
    }
    write_report(cfg, "perturb_report.json", results)
    T = unweighted_inverse(op, inv.inverse)
    k = 2 * plan.N + 1
    write_csv(cfg, "operator.csv", ["row", "col", "matrix", "inverse"],
              ((i, j, op.raw[i, j], T[i, j]) for i in range(k) for j in range(k)))
    return 0


def cmd_reconstruct(cfg: RunConfig) -> int:
    from .interpolate import function_from_spec, reconstruct, sample
    from .perturb_op import WeightScheme, build_truncation, unweighted_inverse

    plan = _plan(cfg)
    f = function_from_spec(cfg.function)
    grid = parse_grid(cfg.grid)
    s = sample(f, plan)
    if plan.unperturbed:
        inverse, warn, defect = None, None, 0.0
    else:
        op = build_truncation(plan, WeightScheme.parse(cfg.weight), table=_load_table(cfg))
        inv, defect, warn = _invert(op)
        inverse = unweighted_inverse(op, inv.inverse)
    rep = reconstruct(s, grid, inverse, truth=f, seminorms=((0, 1), (1, 1), (2, 2)), precision=cfg.precision)
    results = {
        "N": plan.N,
        "function": f.describe(),
        "plan": plan.to_json(),
        "sup_error": rep.sup_error,
        "seminorm_errors": {f"{a},{b}": v for (a, b), v in rep.seminorm_errors.items()},
        "hs_defect": defect,
        "warning": warn,
        "provenance": rep.provenance,
    }
    write_csv(cfg, "reconstruction.csv", ["x", "truth", "value", "abs_error"], rep.rows())
    write_report(cfg, "reconstruction_report.json", results)
    return 0


def _claim(name: str):
    """Run one named bounds claim; top-level so worker processes can import it."""
    from . import bounds_lab as bl
    from .nodes import NodePlan, Perturbation

    if name == "decay-value":
        return bl.decay_fit(target="value").to_json()
    if name == "decay-derivative":
        return bl.decay_fit(target="derivative").to_json()
    if name == "a0-rate":
        return bl.exponential_rate(0).to_json()
    if name == "growth-b0":
        return bl.growth_on_disks(bl.basis_function(0), np.linspace(1.0, 3.0, 9)).to_json()
    if name == "growth-in-n":
        return bl.growth_in_n(3.0, 10).to_json()
    if name == "growth-calibration":
        return bl.gaussian_calibration().to_json()
    if name.startswith("lower-"):
        n, sign = int(name[6:-1]), 1 if name.endswith("+") else -1
        return bl.lower_bound_check(n, sign).to_json()
    if name == "analyticity":
        plan = NodePlan(Perturbation.exponential(0.01, 0.5), 32)
        return bl.analyticity_demo(plan).to_json()
    raise ValueError(f"unknown claim {name!r}")


CLAIMS = (
    ["decay-value", "decay-derivative", "a0-rate", "growth-b0", "growth-in-n", "growth-calibration"]
    + [f"lower-{n}{s}" for n in range(6) for s in "+-"]
    + ["analyticity"]
)


def cmd_bounds(cfg: RunConfig) -> int:
    jobs = cfg.jobs or os.cpu_count() or 1
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            out = dict(zip(CLAIMS, ex.map(_claim, CLAIMS)))
    else:
        out = {c: _claim(c) for c in CLAIMS}
    write_report(cfg, "bounds_report.json", out)
    g = out["growth-b0"]
    write_csv(cfg, "growth_b0.csv", ["r", "log_max"], zip(g["radii"], g["log_max"]))
    return 0


def _node_sequence(spec: str, count: int) -> np.ndarray:
    kind, _, rest = spec.partition(":")
    if kind == "scaled":
        a = float(rest)
        return a * np.sqrt(np.arange(count, dtype=float))
    if kind == "file":
        text = Path(rest).read_text()
        try:
            vals = json.loads(text)
        except json.JSONDecodeError:
            vals = [float(v) for v in text.replace(",", " ").split()]
        return np.asarray(vals, dtype=float)
    raise ValueError(f"node spec must be 'scaled:a' or 'file:PATH', got {spec!r}")


def cmd_nodes(cfg: RunConfig) -> int:
    from .nodes import classify_pair, match_nodes

    xs = _node_sequence(cfg.nodes, cfg.node_count)
    if xs.size == 0:
        raise CommandError("empty node sequence", 2)
    try:
        cls = classify_pair(xs, xs)
    except ValueError as exc:
        raise CommandError(f"cannot classify: {exc}", 2) from exc
    m = match_nodes(xs)
    results = {
        "count": int(xs.size),
        "classification": asdict(cls),
        "matching": {"covered_up_to": m.covered_up_to, "max_abs_eps": float(np.abs(m.eps).max()) if m.eps.size else 0.0,
                     "notes": m.notes},
    }
    write_report(cfg, "nodes_report.json", results)
    print(cls.verdict)
    return 0


HANDLERS = {
    "basis": cmd_basis,
    "perturb": cmd_perturb,
    "reconstruct": cmd_reconstruct,
    "bounds": cmd_bounds,
    "nodes": cmd_nodes,
}


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rvinterp", description="Fourier interpolation basis and perturbed-node tools")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON file with RunConfig fields")
        s.add_argument("--out", help="output directory")
        s.add_argument("--nmax", type=int)
        s.add_argument("--trunc", type=int, help="truncation N")
        s.add_argument("--weight", help="s=K or exp=C")
        s.add_argument("--eps", help="power:c,alpha | exp:c,C | file:PATH | zero")
        s.add_argument("--delta", help="frequency perturbation, same syntax as --eps")
        s.add_argument("--grid", help="a:b:step")
        s.add_argument("--function", help="gaussian[:a] | hermite:c0,c1,... | zero")
        s.add_argument("--precision", choices=("double", "extended"))
        s.add_argument("--tol", type=float)
        s.add_argument("--table", help="basis table file to read node values from")
        s.add_argument("--nodes", help="scaled:a | file:PATH")
        s.add_argument("--node-count", dest="node_count", type=int)
        s.add_argument("--jobs", type=int)
        s.add_argument("--seed", type=int)
    return p


def config_from_args(args: argparse.Namespace) -> RunConfig:
    base = {}
    if args.config:
        base = json.loads(Path(args.config).read_text())
    base["command"] = args.command
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None and f.name != "command":
            base[f.name] = v
    return RunConfig.from_json(base)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        return HANDLERS[cfg.command](cfg)
    except CommandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except KeyError as exc:
        print(f"error: {exc.args[0] if exc.args else exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
