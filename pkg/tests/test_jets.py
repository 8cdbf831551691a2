import pytest

from levelcurve.ddfloat import DD
from levelcurve.jets import (
    make_jet,
    check_chain,
    dd_jet,
    enforce_first_order_condition,
    eval_L_phi_direct,
    eval_L_phi_paper,
    i12_closed,
    i12_direct,
    jet_with_coefficients,
    lb11_closed,
    lb11_direct,
    lphi_direct,
    lphi_regrouped,
    p1_term,
    p2_term,
    p3_term,
    p30_rhs,
    p4_term,
    degenerate_rhs,
    q_part_general,
    q_part_printed,
    r2_remainder,
    r3_remainder,
    run_chain_batch,
    sample_jet,
    step2_direct,
    theta_gradient,
    zero_tensor_jet,
)

CONFIGS = [
    ("pLaplace", 2, 1.2), ("pLaplace", 3, 2.0), ("pLaplace", 5, 3.7),
    ("minimal", 2, 2.0), ("minimal", 3, 2.0), ("minimal", 5, 2.0),
]


class TestSampling:
    def test_seed_determinism(self):
        a = sample_jet(4, 1.7, "pLaplace", -1.0, 1.0, seed=123)
        b = sample_jet(4, 1.7, "pLaplace", -1.0, 1.0, seed=123)
        assert a == b

    def test_different_seeds_differ(self):
        a = sample_jet(4, 1.7, "pLaplace", -1.0, 1.0, seed=1)
        b = sample_jet(4, 1.7, "pLaplace", -1.0, 1.0, seed=2)
        assert a != b

    def test_largest_radius_leads(self):
        for i in range(20):
            jet = sample_jet(5, 2.0, "pLaplace", -1.0, 1.0, seed=(4, i))
            assert jet.b_diag[0] == max(jet.b_diag)

    def test_field_symmetries(self):
        jet = sample_jet(4, 2.0, "minimal", 0.0, 0.0, seed=5)
        m = jet.m
        for i in range(m):
            for j in range(m):
                assert jet.bt[i][j] == jet.bt[j][i]
                assert jet.b11_ij[i][j] == jet.b11_ij[j][i]
                for k in range(m):
                    perms = {jet.d3_b[a][b][c] for (a, b, c) in
                             [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)]}
                    assert len(perms) == 1

    def test_ranges(self):
        jet = sample_jet(5, 2.0, "pLaplace", -1.0, 1.0, seed=6)
        assert -3.0 <= jet.h_t <= -0.2
        assert all(0.2 <= b <= 5.0 for b in jet.b_diag)
        assert all(-2.0 <= x <= 2.0 for x in jet.h_ti)

    def test_radial_jet_equation(self):
        # with all tangential data zero the equation collapses to
        # h_tt = lam h_t^2 sigma_1 exactly
        for p in (1.5, 2.0, 3.7):
            jet = sample_jet(3, p, "pLaplace", -1.0, 1.0, seed=9, radial=True)
            lam = 1.0 / (p - 1.0)
            sigma1 = sum(1.0 / b for b in jet.b_diag)
            assert jet.h_tt == pytest.approx(lam * jet.h_t**2 * sigma1, rel=1e-15)
            assert jet.h_ti == (0.0, 0.0)

    def test_n2_collapses_tail_sums(self):
        jet = sample_jet(2, 2.5, "pLaplace", -1.0, 1.0, seed=10)
        crit = enforce_first_order_condition(jet)
        assert jet.m == 1
        assert float(p1_term(crit)[0]) == 0.0  # no tail directions


class TestEnforcement:
    def test_documented_example(self):
        # alpha = -1, h_t = -1, h_t1 = 0.5, b_11 = 2  ->  b_11,1 = -1
        jet = make_jet(2, 2.0, "pLaplace", -1.0, 1.0, -1.0, (0.5,), (2.0,),
                        (((0.3,),),), ((0.4,),), ((0.7,),), (0.9,))
        crit = enforce_first_order_condition(jet)
        assert crit.d3_b[0][0][0] == pytest.approx(-1.0, rel=1e-15)

    def test_alpha_zero_clears_gradient_data(self):
        jet = sample_jet(3, 2.0, "pLaplace", 0.0, 0.0, seed=11)
        crit = enforce_first_order_condition(jet)
        assert crit.d3_b[0][0][0] == 0.0
        assert crit.d3_b[0][0][1] == 0.0

    def test_idempotent(self):
        jet = sample_jet(4, 2.2, "pLaplace", -1.0, 1.0, seed=12)
        once = enforce_first_order_condition(jet)
        twice = enforce_first_order_condition(once)
        assert once == twice

    def test_gradient_is_exactly_zero(self):
        for i in range(50):
            jet = sample_jet(4, 1.6, "pLaplace", -1.0, 1.0, seed=(13, i))
            crit = enforce_first_order_condition(jet)
            assert all(g == 0.0 for g in theta_gradient(crit))

    def test_remainders_vanish_exactly(self):
        for mode, n, p in CONFIGS:
            for i in range(25):
                jet = sample_jet(n, p, mode, -1.0, 1.0, seed=(14, i))
                crit = enforce_first_order_condition(jet)
                assert float(r2_remainder(crit)[0]) == 0.0
                assert float(r3_remainder(crit)[0]) == 0.0

    def test_untouched_fields(self):
        jet = sample_jet(4, 2.0, "pLaplace", -0.5, 0.5, seed=15)
        crit = enforce_first_order_condition(jet)
        assert crit.h_t == jet.h_t
        assert crit.bt == jet.bt
        assert crit.b11_ij == jet.b11_ij
        assert crit.d3_b[1][1][1] == jet.d3_b[1][1][1]


class TestIdentities:
    def test_radial_2d_regrouping(self):
        jet = sample_jet(2, 2.0, "pLaplace", -1.0, 1.0, seed=16, radial=True)
        assert eval_L_phi_direct(jet) == pytest.approx(eval_L_phi_paper(jet), rel=1e-12)

    def test_minimal_radial_regrouping(self):
        jet = sample_jet(3, 2.0, "minimal", -1.0, 1.0, seed=17, radial=True)
        assert eval_L_phi_direct(jet) == pytest.approx(eval_L_phi_paper(jet), rel=1e-12)

    def test_zero_tensor_jet_reduces_to_polynomials(self):
        jet = sample_jet(4, 2.7, "pLaplace", 0.3, -0.2, seed=18)
        zt = zero_tensor_jet(jet)
        direct = float(lphi_direct(zt)[0])
        assert direct == pytest.approx(float(q_part_printed(jet)[0]), rel=1e-12)
        assert direct == pytest.approx(float(q_part_general(jet)[0]), rel=1e-12)

    @pytest.mark.parametrize("mode,n,p", CONFIGS)
    def test_identity_battery(self, mode, n, p):
        for i in range(50):
            jet = sample_jet(n, p, mode, -1.0, 1.0, seed=(19, i))
            rep = check_chain(jet)
            assert rep.all_pass, [(s.name, s.value) for s in rep.steps if not s.passed]

    def test_alpha_zero_branch(self):
        jet = sample_jet(3, 2.0, "pLaplace", 0.0, 0.7, seed=20)
        rep = check_chain(jet)
        assert rep.all_pass

    def test_scaling_invariance(self):
        # rescaling every length by lam leaves both sides of each identity
        # unchanged (the chains are homogeneous of degree zero for c_const = 0)
        jet = sample_jet(4, 2.4, "pLaplace", -1.0, 1.0, seed=21)
        lam = 3.7
        scaled = make_jet(
            jet.n, jet.p, jet.mode, jet.alpha, jet.beta,
            lam * jet.h_t,
            tuple(lam * x for x in jet.h_ti),
            tuple(lam * x for x in jet.b_diag),
            tuple(tuple(tuple(lam * x for x in r) for r in mtx) for mtx in jet.d3_b),
            tuple(tuple(lam * x for x in r) for r in jet.bt),
            tuple(tuple(lam * x for x in r) for r in jet.b11_ij),
            tuple(lam * x for x in jet.b11_it),
        )
        # L(phi)-level quantities are homogeneous of degree zero in the lengths
        for fn in (lphi_direct, lphi_regrouped, i12_direct, i12_closed, step2_direct):
            a, b = float(fn(jet)[0]), float(fn(scaled)[0])
            assert b == pytest.approx(a, rel=1e-12)
        rep_a = check_chain(jet)
        rep_b = check_chain(scaled)
        for sa, sb in zip(rep_a.steps, rep_b.steps):
            if sa.kind == "identity":
                assert abs(sa.value - sb.value) < 1e-12

    def test_cross_wiring_tripwire(self):
        # the minimal-surface chain with its constant dropped must reproduce
        # the p-Laplace chain at p = 2, step by step, on identical raw fields
        for i in range(10):
            base = sample_jet(4, 2.0, "minimal", -0.4, 0.6, seed=(22, i))
            dropped = jet_with_coefficients(base, lam=1.0, c_const=0.0)
            mirror = sample_jet(4, 2.0, "pLaplace", -0.4, 0.6, seed=(22, i))
            assert dropped.h_t == mirror.h_t and dropped.d3_b == mirror.d3_b
            for fn in (lphi_direct, i12_direct, i12_closed, lb11_direct, lb11_closed,
                       step2_direct, p1_term, p2_term, p3_term, p30_rhs,
                       q_part_general, p4_term, degenerate_rhs):
                va, vb = float(fn(dropped)[0]), float(fn(mirror)[0])
                assert va == pytest.approx(vb, rel=1e-12, abs=1e-12)


class TestFinalBounds:
    def test_final_closed_form_steps(self):
        for mode in ("pLaplace", "minimal"):
            for n in (2, 3, 5):
                jet = sample_jet(n, 3.0 if mode == "pLaplace" else 2.0, mode, -1.0, 1.0, seed=(23, n))
                rep = check_chain(jet)
                assert rep.step("final_identity").value < 1e-12
                assert rep.step("final_nonneg").passed

    def test_n2_plaplace_bound_vanishes(self):
        for i in range(25):
            jet = sample_jet(2, 1.2 + 0.3 * i, "pLaplace", -1.0, 1.0, seed=(24, i))
            rep = check_chain(jet)
            assert rep.step("final_vanishes_2d").value < 1e-12

    def test_case_ii_states_squares(self):
        jet = sample_jet(3, 2.0, "pLaplace", 0.0, 0.0, seed=25)
        rep = check_chain(jet)
        assert rep.step("case_ii_identity").value < 1e-12
        crit = enforce_first_order_condition(jet)
        expected = (crit.h_ti[0] / crit.b_diag[0]) ** 2 + (crit.h_ti[1] / crit.b_diag[1]) ** 2
        assert float(degenerate_rhs(crit)[0]) == pytest.approx(expected, rel=1e-9)

    def test_beta_at_most_minus_one_rejected(self):
        jet = sample_jet(3, 2.0, "pLaplace", -1.0, -1.0, seed=40)
        with pytest.raises(ValueError):
            check_chain(jet)

    def test_higher_dimensions(self):
        # the index bookkeeping is dimension-generic; spot-check n up to 7
        for n in (4, 6, 7):
            for mode, p in (("pLaplace", 1.7), ("minimal", 2.0)):
                rep = check_chain(sample_jet(n, p, mode, -1.0, 1.0, seed=(41, n)))
                assert rep.all_pass, [(s.name, s.value) for s in rep.steps if not s.passed]

    def test_exploratory_pairs_still_satisfy_degenerate_bound(self):
        # the chained bound holds for any (alpha, beta > -1) on critical jets;
        # only the sign of the bound itself is special to the canonical pairs
        for i, (alpha, beta) in enumerate([(0.5, 0.2), (-2.0, 3.0), (1.5, 0.0)]):
            jet = sample_jet(4, 2.0, "pLaplace", alpha, beta, seed=(26, i))
            rep = check_chain(jet)
            assert rep.step("degenerate_bound").passed


class TestBatch:
    def test_batch_runs_and_reports(self):
        reports = run_chain_batch("pLaplace", 3, 2.0, -1.0, 1.0, count=20, seed=99)
        assert len(reports) == 20
        assert all(r.all_pass for r in reports)
        assert reports[0].seed == [99, 0]
        d = reports[0].to_dict()
        assert d["pass"] is True
        assert {s["kind"] for s in d["steps"]} == {"identity", "inequality"}


class TestDoubleDouble:
    def test_dd_arithmetic(self):
        x = DD(1.0) / 3.0
        assert abs(float(x * 3.0 - 1.0)) < 1e-30
        assert float(abs(DD(-2.5))) == 2.5
        assert float(DD(2.0) ** 3) == 8.0
        assert DD(1.0, 1e-20) > DD(1.0)

    def test_dd_beats_double_on_cancellation(self):
        a, b = 1e16, 1.0000000000000002
        naive = (a + b) - a
        dd = float((DD(a) + b) - a)
        assert abs(dd - b) < abs(naive - b)

    def test_dd_jet_rederives_consistently(self):
        jet = sample_jet(4, 2.3, "pLaplace", -1.0, 1.0, seed=30)
        dj = dd_jet(jet)
        assert float(dj.h_tt) == pytest.approx(jet.h_tt, rel=1e-15)
        assert float(dj.b11_tt) == pytest.approx(jet.b11_tt, rel=1e-13)
        a = float(lphi_direct(dj)[0])
        assert a == pytest.approx(float(lphi_direct(jet)[0]), rel=1e-12)

    def test_gray_zone_triggers_dd_rerun(self):
        from levelcurve.jets import _identity

        jet = sample_jet(3, 2.0, "pLaplace", -1.0, 1.0, seed=31)

        def noisy_pair(j):
            v, s = lphi_direct(j)
            return (v, s), (v * (1.0 + 2e-8) if isinstance(v, float) else v, s)

        step = _identity("noisy", noisy_pair, jet, tol=1e-9)
        assert step.used_dd
        assert step.passed  # the dd re-run resolves the perturbation as round-off
