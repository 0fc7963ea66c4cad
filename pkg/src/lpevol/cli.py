"""Command line front end: ``lpevol {norm,evolve,check,convergence} --spec FILE``.

Exit codes: 0 ok, 1 spec error, 2 not in L^p, 3 no convergence, 4 invariant failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import controls
from .errors import InvalidControl, LpEvolError, NoConvergence, NotInLp
from .checks import is_exact_control, run_invariants
from .evolution import EvolConfig, convergence_study, evolve, validate_control
from .lebesgue import LpElement, exponent, inclusion_check, lp_seminorm
from .lie import MatrixGroup, make_group
from .measurable import EUCLIDEAN, PiecewiseCurve, Seminorm, from_borel_samples

log = logging.getLogger("lpevol")

EXIT_OK, EXIT_SPEC, EXIT_NOT_LP, EXIT_NO_CONV, EXIT_INVARIANT = 0, 1, 2, 3, 4
INCLUSION_GRID = (1.0, 2.0, 4.0, math.inf)


class SpecError(ValueError):
    pass


def _p_out(p: float):
    return "inf" if math.isinf(p) else p


@dataclass
class RunSpec:
    control: dict
    group: dict | None = None
    p: float = 1.0
    domain: tuple[float, float] = (0.0, 1.0)
    evolve: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    seed: int = 0
    base_dir: str = "."

    @classmethod
    def from_dict(cls, d: dict, base_dir: str = ".") -> "RunSpec":
        known = {"control", "group", "p", "domain", "evolve", "output", "seed"}
        extra = set(d) - known
        if extra:
            raise SpecError(f"unknown keys {sorted(extra)}")
        if "control" not in d or "kind" not in d["control"]:
            raise SpecError("spec needs a control with a 'kind'")
        try:
            p = exponent(d.get("p", 1.0))
            dom = tuple(float(x) for x in d.get("domain", (0.0, 1.0)))
            if len(dom) != 2 or not dom[0] < dom[1]:
                raise SpecError("domain must be [a, b] with a < b")
            group = d.get("group")
            if group is not None and "name" not in group:
                raise SpecError("group needs a 'name'")
            return cls(control=dict(d["control"]), group=None if group is None else dict(group),
                       p=p, domain=dom, evolve=dict(d.get("evolve", {})),
                       output=dict(d.get("output", {})), seed=int(d.get("seed", 0)),
                       base_dir=base_dir)
        except (TypeError, ValueError) as exc:
            raise SpecError(str(exc)) from exc

    def to_dict(self) -> dict:
        out = {"control": self.control, "p": _p_out(self.p), "domain": list(self.domain),
               "evolve": self.evolve, "output": self.output, "seed": self.seed}
        if self.group is not None:
            out["group"] = self.group
        return out

    # ------------------------------------------------------------------ builders
    def build_group(self) -> MatrixGroup | None:
        if self.group is None:
            return None
        params = {k: v for k, v in self.group.items() if k != "name"}
        try:
            return make_group(self.group["name"], **params)
        except (TypeError, LpEvolError) as exc:
            raise SpecError(str(exc)) from exc

    def build_control(self, G: MatrixGroup | None) -> PiecewiseCurve:
        c = self.control
        kind = c["kind"]
        conv = (lambda v: _to_matrix(G, v)) if G is not None else (lambda v: np.atleast_1d(
            np.asarray(v, dtype=float)).ravel())
        dom = self.domain
        try:
            if kind == "constant":
                return controls.constant(conv(c["value"]), dom)
            if kind == "step":
                return controls.step(c["times"], [conv(v) for v in c["values"]], dom)
            if kind == "poly":
                return controls.polynomial([conv(v) for v in c["coeffs"]], dom)
            if kind == "trig":
                return controls.trig([(conv(t["amp"]), t.get("freq", 1.0), t.get("phase", 0.0))
                                      for t in c["terms"]], dom)
            if kind == "power":
                return controls.power(conv(c["coeff"]), float(c["exponent"]), dom)
            if kind == "samples-file":
                path = Path(self.base_dir) / c["path"]
                data = np.loadtxt(path, delimiter=",", skiprows=int(c.get("skiprows", 1)), ndmin=2)
                vals = data[:, 1:]
                if G is not None:
                    vals = np.stack([_to_matrix(G, v).ravel() for v in vals])
                return from_borel_samples(data[:, 0], vals, float(c.get("jump_tol", 0.5)))
        except (KeyError, TypeError, ValueError, OSError) as exc:
            raise SpecError(f"bad {kind} control: {exc}") from exc
        raise SpecError(f"unknown control kind {kind!r}")

    def evol_config(self) -> EvolConfig:
        e = self.evolve
        try:
            return EvolConfig(n_subdivisions=int(e.get("n_subdivisions", 32)),
                              method=str(e.get("method", "cf4")),
                              residual_tol=float(e.get("residual_tol", 1e-8)),
                              max_refine=int(e.get("max_refine", 4)))
        except (TypeError, ValueError) as exc:
            raise SpecError(str(exc)) from exc


def _to_matrix(G: MatrixGroup, v) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    n = G.n
    if arr.shape == (n, n):
        M = arr
    elif arr.size == G.algebra_dim:
        M = G.hat(arr.ravel())
    elif arr.size == n * n:
        M = arr.reshape(n, n)
    else:
        raise SpecError(f"value of size {arr.size} does not fit the algebra of {G}")
    return M.ravel()


def load_spec(path: str | Path) -> RunSpec:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SpecError(str(exc)) from exc
    try:
        if path.suffix.lower() == ".toml":
            try:
                import tomllib
            except ModuleNotFoundError:  # Python < 3.11
                import tomli as tomllib
            data = tomllib.loads(text)
        else:
            data = json.loads(text)
    except ValueError as exc:
        raise SpecError(f"cannot parse {path}: {exc}") from exc
    return RunSpec.from_dict(data, str(path.parent))


# --------------------------------------------------------------------------- commands


def _seminorms(dim: int) -> dict[str, Seminorm]:
    qs = {"euclidean": EUCLIDEAN, "max": Seminorm("max")}
    if math.isqrt(dim) ** 2 == dim and dim > 1:
        qs["operator"] = Seminorm("operator")
    return qs


def cmd_norm(spec: RunSpec) -> tuple[dict, int]:
    G = spec.build_group()
    gamma = spec.build_control(G)
    code = EXIT_OK
    values = {}
    for name, q in _seminorms(gamma.dim).items():
        try:
            values[name] = lp_seminorm(gamma, q, spec.p)
        except NotInLp as exc:
            values[name] = {"error": "not-in-Lp", "detail": str(exc)}
            code = EXIT_NOT_LP
    table = []
    for p in INCLUSION_GRID:
        for r in INCLUSION_GRID:
            if r < p:
                continue
            row = {"p": _p_out(p), "r": _p_out(r)}
            try:
                lhs, rhs = inclusion_check(LpElement(gamma, p), r)
                row.update(lhs=lhs, rhs=rhs, holds=bool(lhs <= rhs * (1 + 1e-8)))
            except NotInLp:
                row["error"] = "not-in-Lp"
            table.append(row)
    return {"command": "norm", "p": _p_out(spec.p), "seminorms": values, "inclusion": table}, code


def cmd_evolve(spec: RunSpec, out_dir: Path) -> tuple[dict, int]:
    G = spec.build_group()
    if G is None:
        raise SpecError("evolve needs a group")
    gamma = spec.build_control(G)
    cfg = spec.evol_config()
    try:
        result = evolve(G, LpElement(gamma, spec.p), cfg)
    except NoConvergence as exc:
        return {"command": "evolve", "error": "no-convergence", "detail": str(exc)}, EXIT_NO_CONV
    grid = int(spec.output.get("grid", 201))
    ts = np.linspace(*spec.domain, grid)
    mats = result.curve.values(ts)
    n = G.n
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / spec.output.get("csv", "trajectory.csv")
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [f"m{i}{j}" for i in range(n) for j in range(n)])
        for t, M in zip(ts, mats):
            w.writerow([f"{t:.17g}"] + [f"{x:.17g}" for x in M.ravel()])
    report = {
        "command": "evolve",
        "group": str(G),
        "residual": result.residual,
        "refinements_used": result.refinements_used,
        "n_cells": result.n_cells,
        "endpoint": mats[-1].tolist(),
        "cells": [asdict(c) for c in result.cells],
        "csv": csv_path.name,
    }
    return report, EXIT_OK


def cmd_check(spec: RunSpec, seed: int) -> tuple[dict, int]:
    G = spec.build_group()
    if G is None:
        raise SpecError("check needs a group")
    gamma = spec.build_control(G)
    results = run_invariants(G, gamma, spec.p, spec.evol_config(), seed)
    failed = [k for k, v in results.items() if v["status"] == "fail"]
    return {"command": "check", "invariants": results, "failed": failed}, \
        EXIT_INVARIANT if failed else EXIT_OK


def cmd_convergence(spec: RunSpec) -> tuple[dict, int]:
    G = spec.build_group()
    if G is None:
        raise SpecError("convergence needs a group")
    gamma = spec.build_control(G)
    validate_control(G, gamma)
    ns = tuple(int(n) for n in spec.evolve.get("ns", (4, 8, 16, 32, 64)))
    exact = is_exact_control(G, gamma)
    methods = ["exact-step"] if exact or spec.evolve.get("method") == "exact-step" else ["midpoint", "cf4"]
    table = {}
    for m in methods:
        rows, slope = convergence_study(G, LpElement(gamma, spec.p), m, ns)
        floor = max(r.residual for r in rows) <= 1e-12
        table[m] = {"rows": [{"n": r.n, "residual": r.residual} for r in rows],
                    "slope": None if math.isnan(slope) or floor else slope,
                    "at_machine_floor": floor}
    return {"command": "convergence", "group": str(G), "table": table}, EXIT_OK


# --------------------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lpevol", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=["norm", "evolve", "check", "convergence"])
    ap.add_argument("--spec", required=True, help="JSON or TOML run specification")
    ap.add_argument("--out", default=".", help="output directory")
    ap.add_argument("--deterministic", action="store_true",
                    help="sorted keys and no timing fields, for byte-identical reruns")
    ap.add_argument("--seed", type=int, default=None, help="override the spec seed")
    ap.add_argument("--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out_dir = Path(args.out)
    try:
        spec = load_spec(args.spec)
        seed = spec.seed if args.seed is None else args.seed
        if args.command == "norm":
            report, code = cmd_norm(spec)
        elif args.command == "evolve":
            report, code = cmd_evolve(spec, out_dir)
        elif args.command == "check":
            report, code = cmd_check(spec, seed)
        else:
            report, code = cmd_convergence(spec)
    except (SpecError, InvalidControl) as exc:
        report = {"command": args.command, "error": "spec-error"
                  if isinstance(exc, SpecError) else "invalid-control", "detail": str(exc)}
        code = EXIT_SPEC
    except NotInLp as exc:
        report, code = {"command": args.command, "error": "not-in-Lp", "detail": str(exc)}, EXIT_NOT_LP
    except LpEvolError as exc:
        report, code = {"command": args.command, "error": type(exc).__name__,
                        "detail": str(exc)}, EXIT_SPEC
    report["exit_code"] = code
    text = json.dumps(_jsonable(report), indent=2, sort_keys=args.deterministic)
    out_dir.mkdir(parents=True, exist_ok=True)
    name = "evolve.json" if args.command == "evolve" else f"{args.command}.json"
    (out_dir / name).write_text(text + "\n")
    print(text)
    return code


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else str(v)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


if __name__ == "__main__":
    sys.exit(main())
