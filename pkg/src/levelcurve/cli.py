"""Batch front-end: JSON config in, CSV/JSON artifacts out.

Commands (the config's "command" key): solve, profile, check, jets, oracle.
Exit status: 0 when every requested check passed, 2 when a check failed,
1 on configuration or solver errors (a machine-readable error JSON goes to
stderr).  Re-running an identical config produces byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np

from . import jets as jets_mod
from . import oracles, profiles, solver, support
from .errors import ConfigError, LevelCurveError

_FLOAT_FMT = ".17g"


def _fmt(x: float) -> str:
    return format(float(x), _FLOAT_FMT)


# ---------------------------------------------------------------------------
# geometry and problem construction
# ---------------------------------------------------------------------------

def _build_support(spec: dict, n_theta: int, axisym: bool):
    if not isinstance(spec, dict) or "shape" not in spec:
        raise ConfigError(f"geometry spec must be an object with a 'shape': {spec!r}")
    shape = spec["shape"]
    try:
        if shape == "circle":
            if axisym:
                return support.support_of_sphere(spec["r"], n_theta)
            return support.support_of_circle(spec["r"], n_theta)
        if shape == "ellipse":
            if axisym:
                raise ConfigError("ellipse is a planar shape; use spheroid for axisymmetric runs")
            return support.support_of_ellipse(spec["a"], spec["b"], n_theta)
        if shape == "spheroid":
            if not axisym:
                raise ConfigError("spheroid needs the axisymmetric equation")
            return support.support_of_spheroid(spec["a"], spec["c"], n_theta)
        if shape == "offset-circle":
            if axisym:
                raise ConfigError("offset-circle is a planar shape")
            return support.support_of_offset_circle(spec["r"], spec["cx"], spec["cy"], n_theta)
        if shape == "support-csv":
            return _support_from_csv(spec["path"], n_theta, axisym)
    except KeyError as exc:
        raise ConfigError(f"geometry {shape!r} is missing parameter {exc}") from exc
    raise ConfigError(f"unknown shape {shape!r}")


def _support_from_csv(path: str, n_theta: int, axisym: bool):
    rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if rows.shape[1] != 2:
        raise ConfigError(f"support CSV {path} must have two columns theta,h")
    theta, h = rows[:, 0], rows[:, 1]
    if axisym:
        want = np.pi * np.arange(n_theta + 1) / n_theta
    else:
        want = 2.0 * np.pi * np.arange(n_theta) / n_theta
    if theta.shape != want.shape or np.abs(theta - want).max() > 1e-9:
        raise ConfigError(f"support CSV {path} does not match the configured theta grid")
    return support.MeridianSupport(h) if axisym else support.CircleSupport(h)


def _build_problem(cfg: dict) -> solver.RingProblem:
    try:
        pspec = cfg["problem"]
        equation = pspec["equation"]
        grid = pspec["grid"]
        n_theta, n_t = int(grid["n_theta"]), int(grid["n_t"])
    except KeyError as exc:
        raise ConfigError(f"problem config is missing {exc}") from exc
    axisym = equation == "harmonicAxisym3D"
    outer = _build_support(pspec["outer"], n_theta, axisym)
    inner = _build_support(pspec["inner"], n_theta, axisym)
    newton = solver.NewtonOptions(**cfg.get("newton", {}))
    return solver.RingProblem(
        equation=equation,
        h_outer=outer,
        h_inner=inner,
        n_t=n_t,
        p=pspec.get("p"),
        newton=newton,
    )


def _build_oracle(cfg: dict):
    """An analytic handle, either from an explicit 'oracle' block or inferred
    from a radial/eccentric 'problem' block."""
    if "oracle" in cfg:
        spec = dict(cfg["oracle"])
        family = spec.pop("family", None)
        levels = int(spec.pop("levels", 63))
        if family == "radial-green":
            return oracles.exact_radial_green(int(spec["n"]), spec["p"], spec["r_outer"], spec["r_inner"]), levels
        if family == "radial-ring":
            return oracles.exact_radial_ring(int(spec["n"]), spec["p"], spec["r_outer"], spec["r_inner"]), levels
        if family == "radial-minimal":
            return oracles.exact_radial_minimal(spec["r_outer"], spec["r_inner"]), levels
        if family == "eccentric-harmonic":
            o, i = spec["outer"], spec["inner"]
            return (
                oracles.exact_eccentric_harmonic(
                    oracles.Circle2D(o.get("cx", 0.0), o.get("cy", 0.0), o["r"]),
                    oracles.Circle2D(i.get("cx", 0.0), i.get("cy", 0.0), i["r"]),
                ),
                levels,
            )
        raise ConfigError(f"unknown oracle family {family!r}")
    pspec = cfg.get("problem")
    if pspec is None:
        raise ConfigError("oracle source needs an 'oracle' block or a 'problem' block")
    levels = int(pspec["grid"]["n_t"]) - 2
    equation = pspec["equation"]
    outer, inner = pspec["outer"], pspec["inner"]
    shapes = (outer.get("shape"), inner.get("shape"))
    if equation == "harmonicAxisym3D" and shapes == ("circle", "circle"):
        return oracles.exact_radial_ring(3, 2.0, outer["r"], inner["r"]), levels
    if equation == "pLaplace" and shapes == ("circle", "circle"):
        return oracles.exact_radial_ring(2, pspec["p"], outer["r"], inner["r"]), levels
    if equation == "minimalSurface" and shapes == ("circle", "circle"):
        return oracles.exact_radial_minimal(outer["r"], inner["r"]), levels
    if equation == "pLaplace" and pspec["p"] == 2 and shapes in (("circle", "offset-circle"), ("circle", "circle")):
        return (
            oracles.exact_eccentric_harmonic(
                oracles.Circle2D(0.0, 0.0, outer["r"]),
                oracles.Circle2D(inner.get("cx", 0.0), inner.get("cy", 0.0), inner["r"]),
            ),
            levels,
        )
    raise ConfigError("no analytic oracle covers this problem; supply an explicit 'oracle' block")


# ---------------------------------------------------------------------------
# artifact writers
# ---------------------------------------------------------------------------

def _write_solution_csv(path: str, sol: solver.SupportSolution) -> None:
    cols = ["theta", "t", "h", "h_t", "b_meridian"]
    if sol.b_parallel is not None:
        cols.append("b_parallel")
    lines = [",".join(cols)]
    for k in range(sol.t.size):
        for j in range(sol.theta.size):
            row = [sol.theta[j], sol.t[k], sol.h[j, k], sol.h_t[j, k], sol.b_meridian[j, k]]
            if sol.b_parallel is not None:
                row.append(sol.b_parallel[j, k])
            lines.append(",".join(_fmt(x) for x in row))
    _write_text(path, "\n".join(lines) + "\n")


def _write_profile_csv(path: str, prof: profiles.HeightProfile) -> None:
    lines = ["t,f"]
    lines += [f"{_fmt(t)},{_fmt(f)}" for t, f in zip(prof.t, prof.f)]
    _write_text(path, "\n".join(lines) + "\n")


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _write_json(path: str, payload: dict) -> None:
    _write_text(path, json.dumps(payload, indent=2) + "\n")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _profile_sources(cfg: dict, out_dir: str):
    """(profile, boundary-values) per configured kind, from the solver or an oracle."""
    source = cfg.get("source", "solver")
    kinds = []
    for item in cfg.get("checks", []):
        if item["kind"] not in kinds:
            kinds.append(item["kind"])
    if source == "solver":
        prob = _build_problem(cfg)
        sol = solver.solve(prob)
        _write_solution_csv(os.path.join(out_dir, "solution.csv"), sol)
        dtheta = float(prob.theta[1] - prob.theta[0])
        dt = float(sol.t[1] - sol.t[0])
        out = {}
        for kind in kinds:
            prof = profiles.profile_from_solution(sol, kind)
            out[kind] = (prof, profiles.boundary_extrema(sol, kind), (dt, dtheta))
        return out
    if source == "oracle":
        handle, levels = _build_oracle(cfg)
        t = profiles.interior_levels(levels)
        out = {}
        for kind in kinds:
            prof = handle.profile(kind, t)
            out[kind] = (prof, handle.boundary_values(kind), (float(t[1] - t[0]), 0.0))
        return out
    raise ConfigError(f"unknown source {source!r}")


def _tolerance(item: dict, prof: profiles.HeightProfile, steps: tuple[float, float]) -> float:
    if item.get("tol") is not None:
        return float(item["tol"])
    scale = float(np.abs(prof.f).max())
    if item.get("rtol") is not None:
        return float(item["rtol"]) * scale
    dt, dtheta = steps
    return profiles.default_tolerance(dt, dtheta, scale)


def _run_checks(cfg: dict, out_dir: str, quiet: bool) -> int:
    sources = _profile_sources(cfg, out_dir)
    reports = []
    for item in cfg.get("checks", []):
        kind, what = item["kind"], item["check"]
        prof, (f0, f1), steps = sources[kind]
        tol = _tolerance(item, prof, steps)
        if what == "convex":
            rep = profiles.check_convex(prof, tol)
        elif what == "concave":
            rep = profiles.check_concave(prof, tol)
        elif what == "affine":
            rep = profiles.check_affine(prof, tol)
        elif what == "endpoint":
            rep = profiles.check_endpoint_bound(prof, f0, f1, tol)
        else:
            raise ConfigError(f"unknown check {what!r}")
        reports.append((f"{kind}:{what}", rep))
    for kind, (prof, _, _) in sources.items():
        name = "profile.csv" if len(sources) == 1 else f"profile_{kind}.csv"
        _write_profile_csv(os.path.join(out_dir, name), prof)
    payload = {
        "command": cfg["command"],
        "reports": [dict(name=name, **rep.to_dict()) for name, rep in reports],
        "pass": all(rep.passed for _, rep in reports),
    }
    if cfg.get("problem", {}).get("equation") == "harmonicAxisym3D":
        # the meridian restriction samples the extremum on one chart only
        payload["note"] = "axisymmetric evidence"
    _write_json(os.path.join(out_dir, "report.json"), payload)
    if not quiet:
        for name, rep in reports:
            print(f"{name}: worst={rep.worst_value:.6e} tol={rep.tol_used:.3e} "
                  f"{'pass' if rep.passed else 'FAIL'}")
    return 0 if payload["pass"] else 2


def _run_jets(cfg: dict, out_dir: str, quiet: bool, seed_override=None) -> int:
    spec = cfg.get("jets")
    if spec is None:
        raise ConfigError("jets command needs a 'jets' block")
    mode = spec["mode"]
    n = int(spec["n"])
    p = float(spec.get("p", 2.0))
    alpha, beta = float(spec["alpha"]), float(spec["beta"])
    count = int(spec.get("count", 1000))
    if count < 1:
        raise ConfigError(f"jets count must be at least 1, got {count}")
    seed = int(seed_override if seed_override is not None else spec.get("seed", 0))
    threads = max(1, int(os.environ.get("LEVELCURVE_THREADS", "1")))

    def one(i: int) -> jets_mod.ChainReport:
        jet = jets_mod.sample_jet(n, p, mode, alpha, beta, seed=(seed, i))
        return replace(jets_mod.check_chain(jet), seed=[seed, i])

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            reports = list(pool.map(one, range(count)))
    else:
        reports = [one(i) for i in range(count)]

    lines = [json.dumps(rep.to_dict()) for rep in reports]
    _write_text(os.path.join(out_dir, "jets.jsonl"), "\n".join(lines) + "\n")

    canonical = (alpha, beta) in ((-1.0, 1.0), (0.0, 0.0))
    step_names = [s.name for s in reports[0].steps]
    summary = {}
    all_pass = True
    for name in step_names:
        entries = [rep.step(name) for rep in reports]
        kind = entries[0].kind
        if kind == "identity":
            worst = max(e.value for e in entries)
        else:
            worst = min(e.value / max(e.scale, 1.0) for e in entries)
        passed = all(e.passed for e in entries)
        all_pass = all_pass and passed
        summary[name] = {"kind": kind, "worst": worst, "pass": passed}
    payload = {
        "command": "jets",
        "mode": mode, "n": n, "p": p, "alpha": alpha, "beta": beta,
        "count": count, "seed": seed,
        "steps": summary,
        "pass": all_pass,
        "exploratory": not canonical,
    }
    _write_json(os.path.join(out_dir, "report.json"), payload)
    if not quiet:
        for name, entry in summary.items():
            print(f"{name}: worst={entry['worst']:.3e} {'pass' if entry['pass'] else 'FAIL'}")
        if not canonical:
            print("exploratory (alpha, beta): sign of the final bound is reported, not judged")
    return 0 if all_pass else 2


def _run_solve(cfg: dict, out_dir: str, quiet: bool) -> int:
    prob = _build_problem(cfg)
    sol = solver.solve(prob)
    _write_solution_csv(os.path.join(out_dir, "solution.csv"), sol)
    if not quiet:
        print(f"converged in {sol.iterations} Newton steps, residual {sol.residual_norm:.3e}")
    return 0

def _run_profile(cfg: dict, out_dir: str, quiet: bool) -> int:
    sources = _profile_sources(cfg, out_dir)
    if not sources:
        raise ConfigError("profile command needs at least one entry in 'checks'")
    for kind, (prof, _, _) in sources.items():
        name = "profile.csv" if len(sources) == 1 else f"profile_{kind}.csv"
        _write_profile_csv(os.path.join(out_dir, name), prof)
        if not quiet:
            print(f"{kind}: {prof.f.size} levels -> {name}")
    return 0


def _run_oracle(cfg: dict, out_dir: str, quiet: bool) -> int:
    cfg = dict(cfg)
    cfg["source"] = "oracle"
    return _run_profile(cfg, out_dir, quiet)


def run(config: dict, out_dir: str | None = None, quiet: bool = False, seed=None) -> int:
    """Execute one parsed config; returns the process exit status."""
    command = config.get("command")
    out = out_dir or config.get("output_dir") or "."
    os.makedirs(out, exist_ok=True)
    if command == "solve":
        return _run_solve(config, out, quiet)
    if command == "profile":
        return _run_profile(config, out, quiet)
    if command == "check":
        return _run_checks(config, out, quiet)
    if command == "oracle":
        return _run_oracle(config, out, quiet)
    if command == "jets":
        return _run_jets(config, out, quiet, seed_override=seed)
    raise ConfigError(f"unknown command {command!r}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="levelcurve", description=__doc__)
    parser.add_argument("--config", required=True, help="path to the JSON run configuration")
    parser.add_argument("--out", default=None, help="output directory (overrides output_dir)")
    parser.add_argument("--seed", type=int, default=None, help="override the jets seed")
    parser.add_argument("--quiet", action="store_true", help="suppress the stdout summary")
    args = parser.parse_args(argv)
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            config = json.load(fh)
    except json.JSONDecodeError as exc:
        _emit_error("ConfigParseError", str(exc), line=exc.lineno, col=exc.colno)
        return 1
    except OSError as exc:
        _emit_error("ConfigReadError", str(exc))
        return 1
    try:
        return run(config, out_dir=args.out, quiet=args.quiet, seed=args.seed)
    except (LevelCurveError, KeyError, TypeError, ValueError) as exc:
        _emit_error(type(exc).__name__, str(exc))
        return 1


def _emit_error(kind: str, message: str, **extra) -> None:
    payload = {"error": dict(type=kind, message=message, **extra)}
    print(json.dumps(payload), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
