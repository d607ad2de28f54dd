"""Command-line front end.

Every subcommand prints a report: the command line, a digest of the input, one
row per check (name, residual, threshold, verdict) and any produced
artifacts.  Exit codes: 0 when the required checks pass, 1 when one fails,
2 for unusable input and 3 when a required check is inconclusive.
"""
from __future__ import annotations

import argparse
import hashlib
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__, catalog, serialize
from .beurling import (
    InterpolationSpec,
    cholesky_complete,
    hankel_probe,
    inner_certify,
    representer_pipeline,
)
from .charfun import characteristic_function, coincidence_conditions, halmos_dilation, pure_check
from .colligation import structure_report
from .errors import InconclusiveError, InputError, RealizationError
from .kernels import (
    colligation_grid,
    d_subspace,
    defect_decomposition,
    weakly_coisometric_check,
)
from ._linalg import random_ball_points, spectral_norm
from .model import assemble, gleason_model_pair, hks_subspace, model_family
from .observability import strong_stability

SCHEMA = "drealize.report/1"
TOL_ENV = "DREALIZE_TOL"
EXIT_PASS, EXIT_FAIL, EXIT_INPUT, EXIT_INCONCLUSIVE = 0, 1, 2, 3


@dataclass
class Check:
    name: str
    residual: float
    threshold: float
    verdict: str  # "pass", "fail", "inconclusive" or "info"

    def to_obj(self) -> dict:
        return {"name": self.name, "residual": _num(self.residual),
                "threshold": _num(self.threshold), "verdict": self.verdict}


def _num(x):
    x = float(x)
    if math.isfinite(x):
        return x
    return "inf" if x > 0 else ("-inf" if x < 0 else "nan")


def _verdict(ok: bool, inconclusive: bool = False) -> str:
    if inconclusive:
        return "inconclusive"
    return "pass" if ok else "fail"


@dataclass
class Report:
    command: str
    argv: list[str]
    digest: str
    checks: list[Check] = field(default_factory=list)
    artifacts: dict = field(default_factory=dict)
    data: dict = field(default_factory=dict)
    required: list[str] | None = None

    def add(self, name, residual, threshold, ok, inconclusive=False, info=False):
        verdict = "info" if info else _verdict(ok, inconclusive)
        self.checks.append(Check(name, float(residual), float(threshold), verdict))

    def exit_code(self) -> int:
        names = {c.name for c in self.checks}
        req = names if self.required is None else set(self.required)
        missing = req - names
        if missing:
            raise InputError(f"unknown required check(s): {', '.join(sorted(missing))}")
        chosen = [c for c in self.checks if c.name in req and c.verdict != "info"]
        if any(c.verdict == "fail" for c in chosen):
            return EXIT_FAIL
        if any(c.verdict == "inconclusive" for c in chosen):
            return EXIT_INCONCLUSIVE
        return EXIT_PASS

    def to_obj(self, code: int) -> dict:
        return {
            "schema": SCHEMA,
            "version": __version__,
            "command": self.command,
            "argv": self.argv,
            "input_digest": self.digest,
            "checks": [c.to_obj() for c in self.checks],
            "data": self.data,
            "artifacts": self.artifacts,
            "exit_code": code,
        }

    def to_text(self, code: int) -> str:
        lines = [f"# {SCHEMA} {self.command}", f"# argv: {' '.join(self.argv)}",
                 f"# input: {self.digest}"]
        width = max([len(c.name) for c in self.checks] + [5])
        lines.append(f"{'check':<{width}}  {'residual':>12}  {'threshold':>10}  verdict")
        for c in self.checks:
            lines.append(f"{c.name:<{width}}  {c.residual:>12.3e}  {c.threshold:>10.1e}  {c.verdict}")
        for key, val in self.data.items():
            lines.append(f"# {key}: {serialize.dumps(val).strip()}")
        lines.append(f"# exit: {code}")
        return "\n".join(lines) + "\n"


def default_tol() -> float:
    raw = os.environ.get(TOL_ENV)
    if raw is None:
        return 1e-10
    try:
        val = float(raw)
    except ValueError:
        raise InputError(f"{TOL_ENV}={raw!r} is not a number") from None
    if not val > 0:
        raise InputError(f"{TOL_ENV} must be positive")
    return val


def _read(path: str) -> tuple[object, str]:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    digest = "sha256:" + hashlib.sha256(raw).hexdigest()
    try:
        return serialize.loads(raw.decode("utf-8")), digest
    except (InputError, UnicodeDecodeError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _write_artifact(path: str | None, obj: dict) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(serialize.dumps(obj))


def _structure_checks(report: Report, col, tol: float) -> None:
    s = structure_report(col, tol)
    report.add("contractive", max(s.norm - 1.0, 0.0), tol, s.contractive)
    report.add("isometric", s.isometry_residual, tol, s.isometric)
    report.add("coisometric", s.coisometry_residual, tol, s.coisometric)
    report.add("commutative", s.commutator_residual, tol, s.commutative)


def cmd_check(args, report: Report) -> None:
    obj, report.digest = _read(args.input)
    col = serialize.colligation_from_obj(obj)
    tol = args.tol
    _structure_checks(report, col, tol)
    stab = strong_stability(col.A, min(tol, 1e-12), args.stability_horizon)
    report.add("strongly_stable", stab.decay[-1], min(tol, 1e-12), stab.stable, stab.inconclusive)
    rng = np.random.default_rng(args.seed)
    pts = random_ball_points(args.grid_n, col.d, args.grid_radius, rng)
    ident, gap = 0.0, 0.0
    for lam in pts:
        for zeta in pts:
            dd = defect_decomposition(col, lam, zeta)
            ident = max(ident, dd.identity_error)
            gap = max(gap, spectral_norm(dd.KS - dd.KCA))
    report.add("kernel_identity", ident, tol, ident <= tol)
    report.add("kernel_agreement", gap, tol, gap <= tol)
    dsub = d_subspace(col.pair, seed=args.seed)
    wc = weakly_coisometric_check(col, dsub, tol)
    report.add("weakly_coisometric", wc.defect, tol, wc.passed, dsub.inconclusive)
    verdict = inner_certify(col, tol, max_iter=args.stability_horizon)
    worst = max(c.residual for c in verdict.conditions)
    report.add("inner", worst, tol, verdict.inner)
    pure = pure_check(col.D)
    report.add("pure", pure.norm, 1 - pure.tol, pure.pure, info=True)
    report.data["dim_D"] = dsub.dim
    report.data["stability_steps"] = stab.steps


def cmd_realize(args, report: Report) -> None:
    obj, report.digest = _read(args.input)
    pair = serialize.pair_from_obj(obj)
    col = cholesky_complete(pair, args.tol)
    _structure_checks(report, col, args.tol)
    out = serialize.colligation_to_obj(col)
    report.artifacts["colligation"] = out
    _write_artifact(args.output, out)


def cmd_representer(args, report: Report) -> None:
    obj, report.digest = _read(args.input)
    spec = serialize.spec_from_obj(obj)
    res = representer_pipeline(spec, args.tol, renormalize=not args.no_renormalize)
    for c in res.verdict.conditions:
        report.add(c.name, c.residual, c.threshold, c.passed, c.note == "inconclusive")
    report.add("coisometric", res.structure.coisometry_residual, args.tol, res.structure.coisometric)
    report.add("membership", res.membership_residual, args.tol, res.membership_residual <= args.tol)
    report.data["renormalized"] = res.renormalized
    report.data["dim_input"] = res.colligation.dim_input
    out = serialize.colligation_to_obj(res.colligation)
    report.artifacts["colligation"] = out
    _write_artifact(args.output, out)


def cmd_model(args, report: Report) -> None:
    obj, report.digest = _read(args.input)
    S = serialize.multiplier_from_obj(obj)
    N = args.degree if args.degree is not None else 2 * max(S.degree, 0) + 2
    space = hks_subspace(S, N, seed=args.seed)
    pair, gl = gleason_model_pair(space)
    report.add("shift_invariance", gl.worst[2], gl.tol, gl.invariant)
    fam = model_family(S, space, pair, seed=args.seed)
    report.add("input_fit", fam.fit_residual, 1e-9, fam.fit_residual <= 1e-9)
    X = None
    if args.param is not None:
        rows = serialize.loads(args.param)
        X = serialize.dec_matrix(rows, fam.parameter_shape[0], fam.parameter_shape[1])
    col = assemble(fam, X, args.tol)
    wc = weakly_coisometric_check(col, fam.dsub, args.tol)
    report.add("weakly_coisometric", wc.defect, args.tol, wc.passed)
    _structure_checks(report, col, args.tol)
    report.data["dim_state"] = space.dim
    report.data["dim_D"] = fam.dsub.dim
    report.data["parameter_shape"] = list(fam.parameter_shape)
    report.data["kernel_basis"] = [serialize.enc_vector(v) for v in fam.kernel_basis.T]
    report.data["complement_basis"] = [serialize.enc_vector(v) for v in fam.complement.T]
    out = serialize.colligation_to_obj(col)
    report.artifacts["colligation"] = out
    _write_artifact(args.output, out)


def cmd_charfun(args, report: Report) -> None:
    obj, report.digest = _read(args.input)
    T = serialize.row_contraction_from_obj(obj)
    col = halmos_dilation(T)
    s = structure_report(col, args.tol)
    report.add("unitary", max(s.isometry_residual, s.coisometry_residual), args.tol, s.unitary)
    co = coincidence_conditions(col)
    report.add("coincidence", 0.0 if co.coincides else 1.0, 0.5, co.coincides)
    report.add("purity_trio", 0.0 if co.trio_consistent else 1.0, 0.5, co.trio_consistent)
    theta = characteristic_function(T)
    rng = np.random.default_rng(args.seed)
    diff = 0.0
    for lam in random_ball_points(args.grid_n, T.d, args.grid_radius, rng):
        diff = max(diff, spectral_norm(col.transfer(lam) - theta(lam)))
    report.add("dilation_matches_theta", diff, args.tol, diff <= args.tol)
    report.data["pure"] = co.pure
    out = serialize.colligation_to_obj(col)
    report.artifacts["colligation"] = out
    _write_artifact(args.output, out)


def cmd_probe_hankel(args, report: Report) -> None:
    report.digest = "none"
    ranks = hankel_probe(args.n)
    for n, r in enumerate(ranks):
        report.add(f"rank_H{n}", r, n + 1, r == n + 1)
    report.data["ranks"] = ranks


def cmd_kernel_grid(args, report: Report) -> None:
    obj, report.digest = _read(args.input)
    col = serialize.colligation_from_obj(obj)
    grid = colligation_grid(col, args.which, args.grid_n, args.grid_radius, args.seed)
    out = {
        "which": grid.which,
        "points": [serialize.enc_vector(p) for p in grid.points],
        "values": [[serialize.enc_matrix(grid.values[i, k]) for k in range(grid.values.shape[1])]
                   for i in range(grid.values.shape[0])],
    }
    report.artifacts["kernel_grid"] = out
    _write_artifact(args.output, out)


EXAMPLES = {
    "twisted": lambda: ("colligation", serialize.colligation_to_obj(catalog.twisted_colligation())),
    "quadratic": lambda: ("colligation", serialize.colligation_to_obj(catalog.quadratic_colligation())),
    "quadratic-multiplier": lambda: ("multiplier", serialize.multiplier_to_obj(catalog.quadratic_multiplier())),
    "balanced-multiplier": lambda: ("multiplier", serialize.multiplier_to_obj(catalog.balanced_multiplier())),
    "point-at-origin": lambda: ("spec", serialize.spec_to_obj(
        InterpolationSpec("points", 2, [[0, 0]], [[1]]))),
    "lower-inclusive-quadratic": lambda: ("spec", serialize.spec_to_obj(
        InterpolationSpec("lower_inclusive", 2, [[0, 0]], [[1], [1], [1]],
                          ((0, 0), (1, 0), (0, 1))))),
}


def cmd_example(args, report: Report) -> None:
    report.digest = "none"
    kind, obj = EXAMPLES[args.name]()
    report.data["kind"] = kind
    report.artifacts[kind] = obj
    _write_artifact(args.output, obj)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="drealize", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, grid=False):
        p.add_argument("--tol", type=float, default=None,
                       help=f"tolerance (default ${TOL_ENV} or 1e-10)")
        p.add_argument("--format", choices=("json", "text"), default="json")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("-o", "--output", help="write the produced artifact to this path")
        p.add_argument("--require", action="append", default=None,
                       help="check that must pass for exit 0 (repeatable; default: all)")
        if grid:
            p.add_argument("--grid-n", type=int, default=12)
            p.add_argument("--grid-radius", type=float, default=0.7)

    p = sub.add_parser("check", help="structure, kernel and inner checks for a colligation")
    p.add_argument("input")
    common(p, grid=True)
    p.add_argument("--stability-horizon", type=int, default=5000)
    p.set_defaults(func=cmd_check, default_required=["contractive", "kernel_identity"])

    p = sub.add_parser("realize", help="coisometric completion of an output pair")
    p.add_argument("input")
    common(p)
    p.set_defaults(func=cmd_realize, default_required=None)

    p = sub.add_parser("representer", help="inner representer for interpolation data")
    p.add_argument("input")
    p.add_argument("--no-renormalize", action="store_true")
    common(p)
    p.set_defaults(func=cmd_representer, default_required=None)

    p = sub.add_parser("model", help="functional-model realization of a polynomial multiplier")
    p.add_argument("input")
    p.add_argument("--degree", type=int, default=None, help="degree cap for H(K_S)")
    p.add_argument("--param", default=None, help="free parameter X as a JSON matrix of [re, im]")
    common(p)
    p.set_defaults(func=cmd_model, default_required=["shift_invariance", "weakly_coisometric"])

    p = sub.add_parser("charfun", help="Halmos dilation and characteristic function")
    p.add_argument("input")
    common(p, grid=True)
    p.set_defaults(func=cmd_charfun, default_required=None)

    p = sub.add_parser("probe-hankel", help="exact ranks of the probe Hankel matrices")
    p.add_argument("--n", type=int, default=8)
    common(p)
    p.set_defaults(func=cmd_probe_hankel, default_required=None)

    p = sub.add_parser("kernel-grid", help="kernel values on random points, as JSON arrays")
    p.add_argument("input")
    p.add_argument("--which", choices=("KS", "KCA", "residual"), default="KS")
    common(p, grid=True)
    p.set_defaults(func=cmd_kernel_grid, default_required=None)

    p = sub.add_parser("example", help="write a built-in example input")
    p.add_argument("name", choices=sorted(EXAMPLES))
    common(p)
    p.set_defaults(func=cmd_example, default_required=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_PASS
    report = Report(args.command, argv, "")
    try:
        if args.tol is None:
            args.tol = default_tol()
        report.required = args.require if args.require is not None else args.default_required
        args.func(args, report)
        code = report.exit_code()
    except InputError as exc:
        print(f"drealize: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InconclusiveError as exc:
        print(f"drealize: inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except RealizationError as exc:
        print(f"drealize: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if args.format == "json":
        sys.stdout.write(serialize.dumps(report.to_obj(code)))
    else:
        sys.stdout.write(report.to_text(code))
    return code


if __name__ == "__main__":
    sys.exit(main())
