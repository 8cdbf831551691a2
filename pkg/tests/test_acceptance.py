"""Acceptance suite: one test (and one printed pass/fail line) per criterion.

Run under pytest, or directly (`python -m tests.test_acceptance`) for the
plain per-criterion report.
"""

import json
import tempfile
from pathlib import Path

import numpy as np

from levelcurve.cli import main as cli_main
from levelcurve.jets import run_chain_batch
from levelcurve.oracles import (
    Circle2D,
    exact_eccentric_harmonic,
    exact_radial_green,
    exact_radial_minimal,
    exact_radial_ring,
)
from levelcurve.profiles import (
    boundary_extrema,
    check_affine,
    check_concave,
    check_convex,
    check_endpoint_bound,
    fitted_slope,
    interior_levels,
    profile_from_solution,
)

from tests._fixtures import (
    concentric_harmonic_solution,
    eccentric_harmonic_solution,
    ellipse_ring_solution,
    minimal_eccentric_solution,
    minimal_radial_solution,
    spheroid_solution,
)

P_VALUES = (1.5, 2.0, 3.0)


def _report(number: int, label: str, ok: bool) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {label}")
    assert ok, f"criterion {number}: {label}"


def test_criterion_1_radial_affineness():
    """Affine height profiles of the radial family, slope zero at p = n."""
    levels = interior_levels(65)
    ok = True
    for n, p in ((3, 2.0), (3, 1.5), (4, 3.0), (2, 2.0), (3, 3.0)):
        prof = exact_radial_green(n, p, 1.0, 0.5).profile("maxGradOverK1", levels)
        rep = check_affine(prof, tol=1e-10)
        ok = ok and rep.passed
        if p == n:
            ok = ok and abs(fitted_slope(prof)) < 1e-10
    _report(1, "radial profiles affine < 1e-10, p = n slope < 1e-10", ok)


def test_criterion_2_solver_vs_closed_form():
    """Newton solve on concentric circles against the closed form, with the
    expected drop under one refinement."""
    ok = True
    details = []
    for p in P_VALUES:
        handle = exact_radial_ring(2, p, 1.0, 0.5)
        errs = {}
        for n_theta, n_t in ((128, 65), (256, 129)):
            sol = concentric_harmonic_solution(p, n_theta, n_t)
            errs[n_theta] = float(np.abs(sol.h - handle.support_grid(n_theta, sol.t)).max())
        ok = ok and errs[128] < 1e-3
        # a discretely exact case (the support solution is polynomial in t)
        # bottoms out at round-off, where a ratio is meaningless
        refined_ok = errs[128] / max(errs[256], 1e-300) >= 3.0 or errs[256] < 1e-12
        ok = ok and refined_ok
        details.append(f"p={p}: {errs[128]:.2e}->{errs[256]:.2e}")
    _report(2, "radial solve sup error < 1e-3 and >= 3x drop per refinement "
               f"({'; '.join(details)})", ok)


def test_criterion_3_convexity_of_max_grad_over_k1():
    """max |grad u|/k1 is convex in the height with the chord bound, and the
    eccentric harmonic ring matches its conformal-map solution."""
    ok = True
    for p in P_VALUES:
        sol = ellipse_ring_solution(p)
        prof = profile_from_solution(sol, "maxGradOverK1")
        tol = 1e-3 * float(np.abs(prof.f).max())
        ok = ok and check_convex(prof, tol).passed
        f0, f1 = boundary_extrema(sol, "maxGradOverK1")
        ok = ok and check_endpoint_bound(prof, f0, f1, tol).passed
    sol = eccentric_harmonic_solution()
    prof = profile_from_solution(sol, "maxGradOverK1")
    handle = exact_eccentric_harmonic(Circle2D(0, 0, 1.0), Circle2D(0.2, 0.0, 0.3))
    agreement = float(np.abs(prof.f - handle.profile("maxGradOverK1", prof.t).f).max())
    tol = 1e-3 * float(np.abs(prof.f).max())
    ok = ok and agreement < 1e-3
    ok = ok and check_convex(prof, tol).passed
    f0, f1 = boundary_extrema(sol, "maxGradOverK1")
    ok = ok and check_endpoint_bound(prof, f0, f1, tol).passed
    _report(3, f"convexity + chord bound at 1e-3 scale; eccentric ring vs "
               f"conformal map within {agreement:.1e}", ok)


def test_criterion_4_axisymmetric_log_curvature_concavity():
    """min log k1 of the 3d harmonic ring is concave in the height."""
    sol = spheroid_solution()
    prof = profile_from_solution(sol, "minLogK1")
    tol = 2e-3 * float(np.abs(prof.f).max())
    rep = check_concave(prof, tol)
    _report(4, f"spheroid/sphere minLogK1 concave (worst {rep.worst_value:+.2e})", rep.passed)


def test_criterion_5_minimal_graph_profiles():
    """Minimal-surface ring: convex max |grad u|/k1, concave min log k1, and
    the radial solve matches the catenoid closed form."""
    ok = True
    sol = minimal_eccentric_solution()
    prof = profile_from_solution(sol, "maxGradOverK1")
    tol = 1e-3 * float(np.abs(prof.f).max())
    ok = ok and check_convex(prof, tol).passed
    f0, f1 = boundary_extrema(sol, "maxGradOverK1")
    ok = ok and check_endpoint_bound(prof, f0, f1, tol).passed
    prof = profile_from_solution(sol, "minLogK1")
    tol = 1e-3 * float(np.abs(prof.f).max())
    ok = ok and check_concave(prof, tol).passed
    radial = minimal_radial_solution()
    handle = exact_radial_minimal(2.0, 1.0)
    err = float(np.abs(radial.h - handle.support_grid(128, radial.t)).max())
    ok = ok and err < 1e-3
    _report(5, f"minimal ring profiles pass at 1e-3 scale; radial error {err:.1e}", ok)


def test_criterion_6_gauss_curvature_2d_specialization():
    """min |grad u|^(3-2p) k is concave in the height on the planar fixtures."""
    ok = True
    for p in P_VALUES:
        sol = ellipse_ring_solution(p)
        prof = profile_from_solution(sol, "gauss2d")
        tol = 1e-3 * float(np.abs(prof.f).max())
        ok = ok and check_concave(prof, tol).passed
    sol = eccentric_harmonic_solution()
    prof = profile_from_solution(sol, "gauss2d")
    tol = 1e-3 * float(np.abs(prof.f).max())
    ok = ok and check_concave(prof, tol).passed
    _report(6, "gauss2d profiles concave at 1e-3 scale", ok)


def test_criterion_7_identity_chain():
    """1000 seeded jets per configuration: identities to 1e-9, critical-jet
    inequalities to -1e-9 scale, exact final closed forms."""
    ok = True
    worst_id = 0.0
    worst_slack = 0.0
    for mode in ("pLaplace", "minimal"):
        for n in (2, 3, 5):
            for p in ((1.2, 2.0, 3.7) if mode == "pLaplace" else (2.0,)):
                reports = run_chain_batch(mode, n, p, alpha=-1.0, beta=1.0,
                                          count=1000, seed=20260810)
                for rep in reports:
                    ok = ok and rep.all_pass
                    worst_id = max(worst_id, rep.worst_identity())
                    worst_slack = min(worst_slack, rep.worst_slack())
                    ok = ok and rep.step("final_identity").value < 1e-12
                    if n == 2 and mode == "pLaplace":
                        ok = ok and rep.step("final_vanishes_2d").value < 1e-12
    for mode in ("pLaplace", "minimal"):
        for rep in run_chain_batch(mode, 3, 2.0, alpha=0.0, beta=0.0, count=1000, seed=20260810):
            ok = ok and rep.all_pass and rep.step("case_ii_identity").value < 1e-12
    _report(7, f"identity chains green (worst identity {worst_id:.1e}, "
               f"worst slack {worst_slack:+.1e})", ok)


def test_criterion_8_gradient_maximum_on_boundary():
    """The grid maximum of |grad u| sits on a boundary t-row in every fixture."""
    sols = [ellipse_ring_solution(p) for p in P_VALUES]
    sols += [concentric_harmonic_solution(p, 128, 65) for p in P_VALUES]
    sols += [
        eccentric_harmonic_solution(),
        spheroid_solution(),
        minimal_eccentric_solution(),
        minimal_radial_solution(),
    ]
    ok = all(sol.gradient_max_on_boundary() for sol in sols)
    _report(8, f"max |grad u| row is 0 or n_t-1 in all {len(sols)} fixture solves", ok)


def _run_cli(payload: dict, out_dir: Path) -> bytes:
    cfg = out_dir / "config.json"
    cfg.write_text(json.dumps(payload), encoding="utf-8")
    code = cli_main(["--config", str(cfg), "--out", str(out_dir), "--quiet"])
    assert code in (0, 2)
    blobs = []
    for name in sorted(p.name for p in out_dir.iterdir() if p.name != "config.json"):
        blobs.append(name.encode() + b"\0" + (out_dir / name).read_bytes())
    return b"\1".join(blobs)


def test_criterion_9_deterministic_artifacts(tmp_path=None):
    """Re-running the artifact-producing pipelines with fixed seeds gives
    byte-identical CSV/JSON files."""
    configs = [
        {  # oracle-backed affineness check (criterion 1 pipeline)
            "command": "check",
            "source": "oracle",
            "problem": {
                "equation": "pLaplace", "p": 2,
                "outer": {"shape": "circle", "r": 1.0},
                "inner": {"shape": "circle", "r": 0.5},
                "grid": {"n_theta": 128, "n_t": 65},
            },
            "checks": [{"kind": "maxGradOverK1", "check": "affine", "tol": 1e-10}],
        },
        {  # solver-backed profile checks (criteria 2-6 pipeline, small grid)
            "command": "check",
            "problem": {
                "equation": "pLaplace", "p": 2,
                "outer": {"shape": "ellipse", "a": 1.3, "b": 1.0},
                "inner": {"shape": "circle", "r": 0.4},
                "grid": {"n_theta": 64, "n_t": 33},
            },
            "checks": [
                {"kind": "maxGradOverK1", "check": "convex", "rtol": 5e-3},
                {"kind": "maxGradOverK1", "check": "endpoint", "rtol": 5e-3},
            ],
        },
        {  # jet chain artifacts (criterion 7 pipeline)
            "command": "jets",
            "jets": {"mode": "minimal", "n": 3, "p": 2.0, "alpha": -1.0, "beta": 1.0,
                     "count": 300, "seed": 20260810},
        },
    ]
    base = Path(tmp_path) if tmp_path else Path(tempfile.mkdtemp(prefix="levelcurve-det-"))
    ok = True
    for idx, payload in enumerate(configs):
        run_a = base / f"{idx}a"
        run_b = base / f"{idx}b"
        run_a.mkdir(parents=True)
        run_b.mkdir(parents=True)
        ok = ok and _run_cli(payload, run_a) == _run_cli(payload, run_b)
    _report(9, "re-runs produce byte-identical artifacts", ok)


if __name__ == "__main__":
    test_criterion_1_radial_affineness()
    test_criterion_2_solver_vs_closed_form()
    test_criterion_3_convexity_of_max_grad_over_k1()
    test_criterion_4_axisymmetric_log_curvature_concavity()
    test_criterion_5_minimal_graph_profiles()
    test_criterion_6_gauss_curvature_2d_specialization()
    test_criterion_7_identity_chain()
    test_criterion_8_gradient_maximum_on_boundary()
    test_criterion_9_deterministic_artifacts()
    print("all acceptance criteria passed")
