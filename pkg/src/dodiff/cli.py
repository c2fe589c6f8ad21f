"""Command-line entry point: config ingestion, dispatch, CSV emission.

Subcommands ``kernel``, ``solve``, ``oracle`` and ``verify`` read one
INI-style config document (sections [weight], [operator], [problem],
[numerics]) and write CSV payloads plus a provenance record into the output
directory.  Identical config and seed produce byte-identical outputs: no
timestamps or machine state enter the files, and the provenance carries the
canonical config hash.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, textio
from . import kernel as kn
from . import oracle as oc
from . import solver as sv
from . import spectral as sp
from . import verify as vf
from . import weight as wt
from .errors import DomainError, NumericError, PreconditionError

_RANGES = {
    "n_modes": (1, 4096),
    "quad_order": (8, 512),
    "duhamel_nodes": (16, 65536),
    "grid_points": (3, 100001),
    "alpha_nodes": (2, 512),
    "steps": (1, 10_000_000),
}


@dataclass
class RunConfig:
    subcommand: str
    config_path: str
    out_dir: str
    overrides: dict = field(default_factory=dict)
    seed: int | None = None  # falls back to [numerics] seed, then the default
    suite: str = "all"


@dataclass
class ProblemBundle:
    """Everything a subcommand needs, parsed and validated."""

    weight: wt.WeightFunction
    elliptic: sp.EllipticCoefficients
    basis: sp.SpectralBasis
    initial_coeffs: np.ndarray
    initial_profile: object  # callable x -> u0(x)
    source_coeffs: object | None  # callable t -> mode coefficients
    source_profile: object | None  # callable (t, x) -> values
    horizon: float
    times: np.ndarray
    kappas: tuple
    grid_points: int
    coefficient_exprs: tuple  # raw (a, q) expression strings, for round trips
    numerics: dict


def _check_range(key: str, value: float):
    lo, hi = _RANGES[key]
    if not (lo <= value <= hi):
        raise PreconditionError(f"[numerics] {key} = {value} outside [{lo}, {hi}]")
    return value


def _expression(expr: str, default: float | None = None):
    """Coefficient profile from a config value: a constant or an expression
    in x (numpy syntax, e.g. ``1 + x/2`` or ``1 + 0.3*sin(x)``)."""
    expr = expr.strip()
    names = {"x": None, "sin": np.sin, "cos": np.cos, "exp": np.exp,
             "sqrt": np.sqrt, "pi": np.pi, "abs": np.abs}

    def fn(x):
        local = dict(names)
        local["x"] = np.asarray(x, dtype=float)
        try:
            out = eval(expr, {"__builtins__": {}}, local)  # noqa: S307
        except Exception as exc:
            raise PreconditionError(f"cannot evaluate expression {expr!r}: {exc}")
        return np.broadcast_to(np.asarray(out, dtype=float),
                               np.asarray(x, dtype=float).shape).copy()

    # validate now so config errors surface at parse time
    fn(np.linspace(0.0, 1.0, 5))
    return fn


def parse_config(text: str, overrides: dict | None = None) -> ProblemBundle:
    """Parse and validate one config document into live objects.

    Schema: [weight] as in the weight serializer; [operator] keys kind
    (dirichlet|fd), a, q, L, c_a, M, N; [problem] keys u0 (``modes: c1 c2
    ...`` or ``profile: sine|parabola``), source (``none``, ``modes: ...``
    constant in time), T, times, kappas; [numerics] keys quad_order,
    duhamel_nodes, seed, theta, dt, steps, alpha_nodes.
    """
    sections = textio.parse_document(text)
    for name, body in (overrides or {}).items():
        sections.setdefault(name, {}).update(body)
    known = {"weight", "operator", "problem", "numerics"}
    for name in sections:
        if name not in known:
            raise PreconditionError(f"unknown config section [{name}]")

    weight = wt.weight_from_mapping(sections.get("weight", {"type": "constant"}))

    op = sections.get("operator", {})
    kind = op.get("kind", "dirichlet").strip().lower()
    length = float(op.get("l", repr(np.pi)))
    n_modes = int(_check_range("n_modes", int(op.get("n", "64"))))
    a_expr, q_expr = op.get("a", "1.0"), op.get("q", "0.0")
    a_fn = _expression(a_expr)
    q_fn = _expression(q_expr)
    c_a = float(op.get("c_a", "0")) or float(np.min(a_fn(np.linspace(0, length, 257))))
    elliptic = sp.EllipticCoefficients(a=a_fn, q=q_fn, c_a=c_a, length=length)
    M = int(_check_range("grid_points", int(op.get("m", "201"))))
    if kind == "dirichlet":
        basis = sp.build_exact_dirichlet(length, n_modes)
    elif kind == "fd":
        basis = sp.build_fd(elliptic, M, n_modes)
    else:
        raise PreconditionError(f"unknown operator kind {kind!r}")

    pr = sections.get("problem", {})
    horizon = float(pr.get("t", "1.0"))
    if horizon <= 0.0:
        raise PreconditionError(f"[problem] T = {horizon} must be positive")
    times = textio.parse_array(pr.get("times", "")) if pr.get("times") else \
        np.linspace(horizon / 8.0, horizon, 8)
    if np.any(times <= 0.0) or np.any(times > horizon * (1 + 1e-12)):
        raise PreconditionError("[problem] times must lie inside (0, T]")
    kappas = tuple(textio.parse_array(pr.get("kappas", "0.5 1.0")))
    if any(not 0.0 <= k <= 1.0 for k in kappas):
        raise PreconditionError("[problem] kappas must lie in [0, 1]")

    u0_spec = pr.get("u0", "modes: 1").strip()
    profile_fns = {
        "sine": lambda x: np.sin(np.pi * x / length),
        "parabola": lambda x: x * (length - x),
    }
    if u0_spec.startswith("modes:"):
        c0 = sp.coefficients_from_text(u0_spec.split(":", 1)[1], n_modes)
        u0_fn = (lambda c: (lambda x: _synth_on(basis, c, x)))(c0)
    elif u0_spec.startswith("profile:"):
        name = u0_spec.split(":", 1)[1].strip()
        if name not in profile_fns:
            raise PreconditionError(f"unknown u0 profile {name!r}")
        u0_fn = profile_fns[name]
        c0 = sp.project(basis, u0_fn(basis.grid))
    else:
        raise PreconditionError(f"[problem] u0 descriptor {u0_spec!r} not recognized")

    src_spec = pr.get("source", "none").strip()
    if src_spec == "none":
        src_coeffs = src_profile = None
    elif src_spec.startswith("modes:"):
        g = sp.coefficients_from_text(src_spec.split(":", 1)[1], n_modes)
        src_coeffs = (lambda gg: (lambda t: gg))(g)
        src_profile = (lambda gg: (lambda t, x: _synth_on(basis, gg, x)))(g)
    else:
        raise PreconditionError(f"[problem] source descriptor {src_spec!r} not recognized")

    nm = dict(sections.get("numerics", {}))
    dt = float(nm.get("dt", "1e-3"))
    default_steps = max(1, int(round(horizon / dt)))
    numerics = {
        "quad_order": int(_check_range("quad_order", int(nm.get("quad_order", "64")))),
        "duhamel_nodes": int(_check_range("duhamel_nodes",
                                          int(nm.get("duhamel_nodes", "256")))),
        "seed": int(nm.get("seed", "20240915")),
        "theta": float(nm.get("theta", repr(3 * np.pi / 4))),
        "dt": dt,
        "steps": int(_check_range("steps", int(nm.get("steps", str(default_steps))))),
        "alpha_nodes": int(_check_range("alpha_nodes", int(nm.get("alpha_nodes", "32")))),
    }
    if not (np.pi / 2 < numerics["theta"] < np.pi):
        raise PreconditionError(f"[numerics] theta = {numerics['theta']} outside (pi/2, pi)")

    return ProblemBundle(weight=weight, elliptic=elliptic, basis=basis,
                         initial_coeffs=c0, initial_profile=u0_fn,
                         source_coeffs=src_coeffs, source_profile=src_profile,
                         horizon=horizon, times=np.asarray(times, dtype=float),
                         kappas=kappas, grid_points=M,
                         coefficient_exprs=(a_expr, q_expr), numerics=numerics)


def _synth_on(basis, coeffs, x):
    vals = sp.synthesize(basis, coeffs)
    return np.interp(np.asarray(x, dtype=float), basis.grid, vals)


def serialize_bundle(bundle: ProblemBundle) -> str:
    """Canonical re-serialization of the parseable state (round-trip check)."""
    sections = {
        "weight": bundle.weight.to_mapping(),
        "operator": {
            "kind": "dirichlet" if bundle.basis.closed_form else "fd",
            "a": bundle.coefficient_exprs[0],
            "q": bundle.coefficient_exprs[1],
            "l": repr(bundle.elliptic.length),
            "n": str(bundle.basis.n_modes),
            "m": str(bundle.grid_points),
            "c_a": repr(bundle.elliptic.c_a),
        },
        "problem": {
            "u0": "modes: " + textio.format_array(bundle.initial_coeffs),
            "source": "none" if bundle.source_coeffs is None else
                      "modes: " + textio.format_array(bundle.source_coeffs(0.0)),
            "t": repr(bundle.horizon),
            "times": textio.format_array(bundle.times),
            "kappas": textio.format_array(bundle.kappas),
        },
        "numerics": {k: repr(v) if isinstance(v, float) else str(v)
                     for k, v in bundle.numerics.items()},
    }
    return textio.format_document(sections)


def provenance_lines(run: RunConfig, config_text: str) -> list[str]:
    return [
        f"dodiff {__version__}",
        f"subcommand = {run.subcommand}",
        f"config_sha256 = {textio.document_hash(config_text)}",
        f"seed = {run.seed}",
        f"tolerance_version = {vf.TOLERANCE_VERSION}",
    ]


def _kernel_config(bundle: ProblemBundle) -> kn.KernelConfig:
    return kn.KernelConfig.for_weight(bundle.weight,
                                      theta=bundle.numerics["theta"],
                                      moment_order=bundle.numerics["quad_order"])


def _cmd_kernel(run: RunConfig, bundle: ProblemBundle, prov: list[str]) -> int:
    out = Path(run.out_dir)
    cfg = _kernel_config(bundle)
    modes = [n for n in (1, 2, 4, 8, 16, 32, 64) if n <= bundle.basis.n_modes]
    contour = kn.build_kernel_table(bundle.basis, bundle.weight, bundle.times,
                                    modes=modes, method="contour", cfg=cfg)
    spectral = kn.build_kernel_table(bundle.basis, bundle.weight, bundle.times,
                                     modes=modes, method="spectral", cfg=cfg)
    rows = []
    for i, n in enumerate(modes):
        for j, t in enumerate(bundle.times):
            gc, gs = contour.G[i, j], spectral.G[i, j]
            rows.append([n, float(t), contour.E[i, j], gc, gs,
                         abs(gc - gs) / abs(gc)])
    textio.write_csv(out / "kernels.csv",
                     ["n", "t", "E_n", "G_n_contour", "G_n_spectral", "rel_diff"],
                     rows, comments=prov)
    return 0


def _solution_csvs(out: Path, field, kappas, prov: list[str], stem: str) -> None:
    rows = []
    for j, t in enumerate(field.times):
        x, u = field.sample(float(t))
        for xi, ui in zip(x, u):
            rows.append([float(t), float(xi), float(ui)])
    textio.write_csv(out / f"{stem}_field.csv", ["t", "x", "u"], rows,
                     comments=prov)
    norm_rows = []
    for j, t in enumerate(field.times):
        row = [float(t), float(field.l2_norms()[j])]
        row += [float(field.frac_norms(k)[j]) for k in kappas]
        norm_rows.append(row)
    textio.write_csv(out / f"{stem}_norms.csv",
                     ["t", "l2"] + [f"graph_{k}" for k in kappas],
                     norm_rows, comments=prov)


def _cmd_solve(run: RunConfig, bundle: ProblemBundle, prov: list[str]) -> int:
    prob = sv.ProblemSpec(bundle.weight, bundle.basis, bundle.initial_coeffs,
                          bundle.source_coeffs, bundle.horizon)
    field = sv.solve(prob, bundle.times, n_nodes=bundle.numerics["duhamel_nodes"],
                     cfg=_kernel_config(bundle))
    _solution_csvs(Path(run.out_dir), field, bundle.kappas, prov, "solve")
    return 0


def _cmd_oracle(run: RunConfig, bundle: ProblemBundle, prov: list[str]) -> int:
    cfg = oc.OracleConfig(dt=bundle.numerics["dt"], steps=bundle.numerics["steps"],
                          grid_points=max(bundle.grid_points,
                                          bundle.basis.n_modes + 2),
                          alpha_nodes=bundle.numerics["alpha_nodes"])
    src = None
    if bundle.source_profile is not None:
        src = bundle.source_profile
    field = oc.solve_oracle(bundle.elliptic, bundle.weight,
                            bundle.initial_profile, src, cfg)
    out = Path(run.out_dir)
    rows = []
    for t in bundle.times:
        x, u = field.sample(float(t))
        for xi, ui in zip(x, u):
            rows.append([float(t), float(xi), float(ui)])
    textio.write_csv(out / "oracle_field.csv", ["t", "x", "u"], rows,
                     comments=prov)
    return 0


def _cmd_verify(run: RunConfig, prov: list[str]) -> int:
    out = Path(run.out_dir)
    cfg = vf.VerifyConfig(seed=run.seed)
    names = list(vf.SUITES) if run.suite == "all" else [run.suite]
    status = 0
    for name in names:
        report = vf.SUITES[name](cfg)
        textio.write_csv(out / f"{name}_metrics.csv", report.csv_header(),
                         report.csv_rows(), comments=prov)
        (out / f"{name}_summary.txt").write_text(report.summary_text())
        if not report.passed:
            print(f"verify[{name}]: FAIL", file=sys.stderr)
            status = 1
    return status


def dispatch(run: RunConfig) -> int:
    """Run one subcommand; returns the process exit status."""
    out = Path(run.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    config_text = ""
    bundle = None
    if run.subcommand != "verify" or run.config_path:
        config_text = Path(run.config_path).read_text()
        bundle = parse_config(config_text, run.overrides)
        if run.seed is None:
            run.seed = bundle.numerics["seed"]
    if run.seed is None:
        run.seed = 20240915
    prov = provenance_lines(run, config_text)
    (out / "provenance.txt").write_text("\n".join(prov) + "\n")
    try:
        if run.subcommand == "kernel":
            return _cmd_kernel(run, bundle, prov)
        if run.subcommand == "solve":
            return _cmd_solve(run, bundle, prov)
        if run.subcommand == "oracle":
            return _cmd_oracle(run, bundle, prov)
        if run.subcommand == "verify":
            return _cmd_verify(run, prov)
    except (DomainError, PreconditionError, NumericError) as exc:
        print(f"error[{run.subcommand}]: {exc}", file=sys.stderr)
        return 1
    raise AssertionError(f"unhandled subcommand {run.subcommand}")


def _parse_overrides(pairs) -> dict:
    overrides: dict = {}
    for pair in pairs or []:
        try:
            key, value = pair.split("=", 1)
            section, name = key.strip().split(".", 1)
        except ValueError:
            raise PreconditionError(
                f"override {pair!r} must look like section.key=value")
        overrides.setdefault(section, {})[name] = value.strip()
    return overrides


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dodiff",
        description="Distributed-order fractional diffusion solver and checks")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, needs_config in (("kernel", True), ("solve", True),
                               ("oracle", True), ("verify", False)):
        p = sub.add_parser(name)
        p.add_argument("--config", required=needs_config, default="",
                       help="path to the INI-style problem document")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--set", action="append", dest="overrides",
                       metavar="SECTION.KEY=VALUE",
                       help="override a config value")
        p.add_argument("--seed", type=int, default=None,
                       help="randomization seed (default: [numerics] seed)")
        if name == "verify":
            p.add_argument("--suite", default="all",
                           choices=["all"] + list(vf.SUITES))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        run = RunConfig(subcommand=args.subcommand, config_path=args.config,
                        out_dir=args.out,
                        overrides=_parse_overrides(args.overrides),
                        seed=args.seed, suite=getattr(args, "suite", "all"))
        return dispatch(run)
    except (DomainError, PreconditionError, NumericError) as exc:
        print(f"error[{args.subcommand}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
