import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import givens, random_spd
from kubo_ando import orderdet
from kubo_ando.catalog import MIXTURE_2A, MIXTURE_2B, SYMMETRIC_SELECTORS, Connection, parse_mean
from kubo_ando.errors import InputError, PreconditionError, SearchFailureError, TheoremViolationError
from kubo_ando.experiments import generate_pair, random_projection
from kubo_ando.matcore import apply_fn, below, is_psd, operator_norm, spectral_projection
from kubo_ando.means import RepresentingFunction, connection_eval, make_power_fn
from kubo_ando.orderdet import (
    OrderVerdict,
    case2a_limit_scan,
    case2b_divergence_scan,
    lower_projections,
    norm_dominates,
    order_determination_check,
    prop2_criteria,
    prop3_limit_scan,
    prop4_norm,
    sample_gamma_positive,
    structured_family,
    tol_norm,
    witness_search,
)

seeds = st.integers(0, 2**32 - 1)
A2, B2, P2 = np.diag([2.0, 1.0]), np.diag([1.0, 2.0]), np.diag([1.0, 0.0])
GRID = 2.0 ** np.arange(31)


class TestGammaSampler:
    def test_commute_and_positive(self, rng):
        G = rng.normal(size=(5, 5))
        D = G + G.T
        Xs = sample_gamma_positive(D, 3, 200)
        assert Xs.shape == (200, 5, 5)
        assert np.max(np.abs(Xs @ D - D @ Xs)) <= 1e-9 * (1 + operator_norm(D) * np.max(operator_norm(Xs)))
        assert np.all(is_psd(Xs))

    def test_scalar_d_gives_multiples_of_identity(self):
        Xs = sample_gamma_positive(2.0 * np.eye(3), 0, 10)
        for X in Xs:
            np.testing.assert_allclose(X, X[0, 0] * np.eye(3), atol=1e-14)
            assert X[0, 0] > 0

    def test_known_polynomial(self):
        lam1, lam2 = -0.5, 2.0
        out = apply_fn(np.diag([lam1, lam2]), lambda t: (t - lam1) ** 2 + 1)
        np.testing.assert_allclose(out, np.diag([1.0, (lam2 - lam1) ** 2 + 1]), atol=1e-14)

    def test_seeded(self, rng):
        D = random_spd(3, rng)
        np.testing.assert_array_equal(sample_gamma_positive(D, 7, 5), sample_gamma_positive(D, 7, 5))

    def test_count(self):
        with pytest.raises(InputError):
            sample_gamma_positive(np.eye(2), 0, 0)


class TestProjectionCriteria:
    def test_ordered(self):
        A, B = generate_pair(4, 11, "ordered")
        rep = prop2_criteria(A, B, np.geomspace(1e-3, 10, 9))
        assert rep.loewner and rep.norms_ok and rep.inclusion_ok
        assert all(r.norm_PAP <= r.norm_PBP + 1e-9 for r in rep.rows)

    def test_diagonal(self):
        rep = prop2_criteria(A2, B2, [0.5])
        (row,) = rep.rows
        assert (row.rank, row.norm_PAP, row.norm_PBP) == (1, 2.0, 1.0)
        assert (row.maxlam_A, row.maxlam_B) == (2.0, 1.0)
        assert not rep.loewner and not rep.norms_ok and not rep.inclusion_ok
        assert rep.consistent

    def test_boundary_collision_skipped(self):
        rep = prop2_criteria(A2, B2, [1.0, 0.5])
        assert [r.eps for r in rep.rows] == [0.5]

    def test_dimension_mismatch(self):
        with pytest.raises(InputError):
            prop2_criteria(np.eye(2), np.eye(3), [0.1])

    @settings(max_examples=40, deadline=None)
    @given(seed=seeds, n=st.integers(2, 8), kind=st.sampled_from(["ordered", "unordered"]))
    def test_equivalence(self, seed, n, kind):
        A, B = generate_pair(n, seed, kind)
        assert prop2_criteria(A, B, np.geomspace(1e-3, 10, 9)).consistent


class TestNormLimit:
    def test_diagonal(self):
        scan = prop3_limit_scan(lambda s: np.diag([3.0, 1.0]), P2, GRID, np.diag([3.0, 1.0]), stop=False)
        np.testing.assert_allclose(scan.values, 3.0, atol=1e-6)
        assert scan.target == 3.0 and scan.converged

    def test_full_projection(self, rng):
        X = random_spd(4, rng)
        scan = prop3_limit_scan(lambda s: X, np.eye(4), GRID[:10], X, stop=False)
        np.testing.assert_allclose(scan.values, operator_norm(X), atol=1e-12)

    def test_perturbed_family(self, rng):
        X, R = random_spd(4, rng), random_spd(4, rng)
        P = random_projection(4, rng)
        scan = prop3_limit_scan(lambda s: X + R / s, P, GRID, X)
        assert scan.converged and scan.s_star is not None
        assert scan.error <= 1e-5
        assert abs(scan.values[-1] - scan.extrapolated) <= 1e-6

    def test_unconverged_flag(self):
        scan = prop3_limit_scan(lambda s: np.eye(2) * s, P2, GRID[:5], np.eye(2))
        assert not scan.converged and scan.s_star is None

    def test_short_grid(self):
        with pytest.raises(InputError):
            prop3_limit_scan(lambda s: np.eye(2), P2, [1.0, 2.0, 4.0], np.eye(2))

    def test_csv(self):
        scan = prop3_limit_scan(lambda s: np.diag([3.0, 1.0]), P2, GRID[:4], np.diag([3.0, 1.0]), stop=False)
        lines = scan.to_csv().splitlines()
        assert lines[0] == "s,value,target" and len(lines) == 5


class TestClosedFormNorm:
    def test_geometric(self):
        assert prop4_norm(make_power_fn(0), np.diag([4.0, 9.0]), P2) == pytest.approx(2.0, abs=1e-14)
        assert operator_norm(connection_eval(make_power_fn(0), np.diag([4.0, 9.0]), P2)) == pytest.approx(2.0)

    def test_harmonic(self):
        assert prop4_norm(make_power_fn(-1), np.diag([4.0, 9.0]), P2) == pytest.approx(1.6, abs=1e-14)

    @pytest.mark.parametrize("p", [0, -0.5, -1])
    def test_identity_operator(self, rng, p):
        P = random_projection(5, rng)
        assert prop4_norm(make_power_fn(p), np.eye(5), P) == pytest.approx(1.0, abs=1e-13)

    def test_requires_zero_boundary(self):
        with pytest.raises(PreconditionError):
            prop4_norm(make_power_fn(1), np.eye(2), P2)

    def test_power_half_not_covered(self):
        # f(0+) = 1/4, and the closed form would give 1 where the true norm is 25
        f = make_power_fn(0.5)
        A = np.diag([1.0, 100.0])
        assert operator_norm(connection_eval(f, A, P2)) == pytest.approx(25.0)
        with pytest.raises(PreconditionError):
            prop4_norm(f, A, P2)

    def test_trivial(self):
        f = RepresentingFunction(lambda t: t + 0.0, 0.0, 1.0)
        with pytest.raises(PreconditionError):
            prop4_norm(f, np.eye(2), P2)

    def test_zero_projection(self):
        with pytest.raises(InputError):
            prop4_norm(make_power_fn(0), np.eye(2), np.zeros((2, 2)))

    @settings(max_examples=40, deadline=None)
    @given(seed=seeds, n=st.integers(2, 8), p=st.sampled_from([0.0, -0.5, -1.0]))
    def test_matches_direct(self, seed, n, p):
        rng = np.random.default_rng(seed)
        A = random_spd(n, rng)
        P = random_projection(n, rng)
        f = make_power_fn(p)
        assert abs(prop4_norm(f, A, P) - operator_norm(connection_eval(f, A, P))) <= 1e-8


class TestLargeScaleLimit:
    def test_arithmetic(self):
        scan = case2a_limit_scan(parse_mean("arithmetic"), np.diag([3.0, 1.0]), P2, 1.0)
        np.testing.assert_allclose(scan.values, 1.5, atol=1e-9)
        assert scan.target == 1.5

    def test_mixture(self):
        scan = case2a_limit_scan(parse_mean(MIXTURE_2A), np.diag([3.0, 1.0]), P2, 0.5)
        assert scan.target == pytest.approx(3.75)
        assert scan.converged and scan.error <= 1e-5

    @pytest.mark.parametrize("sel", ["arithmetic", MIXTURE_2A, "mix:0.3:arithmetic:harmonic"])
    def test_scalar_a(self, rng, sel):
        sigma = parse_mean(sel)
        m = sigma.measure
        P = random_projection(4, rng)
        scan = case2a_limit_scan(sigma, 2.5 * np.eye(4), P, 0.7)
        assert scan.target == pytest.approx((m.atom0 + m.interior_moment()) * 2.5)
        assert scan.error <= 1e-5

    @pytest.mark.parametrize("sel", ["power:-0.5", "geometric", "harmonic"])
    def test_preconditions(self, sel):
        with pytest.raises(PreconditionError):
            case2a_limit_scan(parse_mean(sel), np.eye(2), P2, 1.0)

    def test_delta_positive(self):
        with pytest.raises(InputError):
            case2a_limit_scan(parse_mean("arithmetic"), np.eye(2), P2, 0.0)


class TestDivergence:
    def test_diverges_when_ca_exceeds_cb(self):
        scan = case2b_divergence_scan(parse_mean(MIXTURE_2B), A2, B2, P2)
        assert (scan.c_A, scan.c_B) == (2.0, 1.0)
        assert scan.exceeds and scan.values[-1] > 1e3
        np.testing.assert_allclose(scan.values, scan.closed_form, rtol=1e-9)

    def test_needs_atom(self):
        with pytest.raises(PreconditionError):
            case2b_divergence_scan(parse_mean("geometric"), A2, B2, P2)

    def test_needs_measure(self):
        with pytest.raises(PreconditionError):
            case2b_divergence_scan(parse_mean("power:-0.5"), A2, B2, P2)


class TestNormDominates:
    def test_scalar_pair(self, rng):
        Xs = np.array([random_spd(2, rng) for _ in range(5)])
        assert norm_dominates(parse_mean("geometric"), np.eye(2), 2 * np.eye(2), Xs)

    def test_diagonal_violation(self):
        X = np.diag([1.5, 0.5])
        sigma = parse_mean("geometric")
        assert operator_norm(sigma(A2, X)) == pytest.approx(np.sqrt(3.0))
        assert operator_norm(sigma(B2, X)) == pytest.approx(np.sqrt(1.5))
        assert not norm_dominates(sigma, A2, B2, X)

    def test_ordered_random(self):
        A, B = generate_pair(5, 3, "ordered")
        Xs = sample_gamma_positive(B - A, 5, 1000)
        assert norm_dominates(parse_mean("power:-0.5"), A, B, Xs)

    def test_non_commuting(self):
        X = givens(0.4) @ np.diag([1.0, 3.0]) @ givens(0.4).T
        with pytest.raises(InputError, match="commute"):
            norm_dominates(parse_mean("geometric"), A2, B2, X)

    def test_explicit_tolerance(self):
        sigma = parse_mean("geometric")
        assert norm_dominates(sigma, A2, B2, np.diag([1.5, 0.5]), tol=1.0)


class TestWitness:
    def test_diagonal_geometric(self):
        w = witness_search(parse_mean("geometric"), A2, B2)
        np.testing.assert_allclose(w.P, P2, atol=1e-15)
        assert w.margin > 10 * w.tol
        np.testing.assert_allclose(w.X(), w.s * (P2 + w.delta * np.eye(2)))
        # witness at delta = 0.5: sqrt(3 s) against sqrt(1.5 s)
        sigma = parse_mean("geometric")
        for s in (1.0, 16.0):
            Xd = s * (P2 + 0.5 * np.eye(2))
            assert operator_norm(sigma(A2, Xd)) == pytest.approx(np.sqrt(3 * s))
            assert operator_norm(sigma(B2, Xd)) == pytest.approx(np.sqrt(1.5 * s))

    def test_ordered_has_none(self):
        A, B = generate_pair(4, 1, "ordered")
        assert witness_search(parse_mean("harmonic"), A, B) is None

    def test_rotated(self):
        G = givens(1.1)
        A, B = G @ A2 @ G.T, G @ B2 @ G.T
        w = witness_search(parse_mean(MIXTURE_2B), A, B)
        np.testing.assert_allclose(w.P, G @ P2 @ G.T, atol=1e-12)

    @pytest.mark.parametrize("sel", SYMMETRIC_SELECTORS)
    def test_minimal_form(self, sel):
        A, B = generate_pair(5, 99, "unordered")
        w = witness_search(parse_mean(sel), A, B)
        np.testing.assert_allclose(w.P, spectral_projection(B - A, below(-w.eps)), atol=1e-12)
        assert w.margin > 10 * w.tol
        assert w.tol == pytest.approx(tol_norm(A, B, w.X()))
        assert set(w.to_json()) >= {"P", "s", "delta", "norm_A", "norm_B", "margin"}

    def test_not_symmetric(self):
        f = RepresentingFunction(lambda t: t**0.3, 0.0, 0.0)
        with pytest.raises(PreconditionError):
            witness_search(Connection(f), A2, B2)

    def test_search_failure(self, monkeypatch):
        monkeypatch.setattr(orderdet, "S_GRID", (1.0, 2.0, 4.0, 8.0))
        with pytest.raises(SearchFailureError) as info:
            witness_search(parse_mean("geometric"), np.eye(2), np.diag([1.0, 1.0 - 3e-8]))
        assert len(info.value.table) == 4 * len(orderdet.DELTA_GRID)


class TestOrderCheck:
    def test_scalar_pair(self):
        v = order_determination_check(parse_mean("geometric"), np.eye(3), 2 * np.eye(3), 50, 0)
        assert v.loewner and v.norm_dominated and v.witness is None

    def test_diagonal_harmonic(self):
        v = order_determination_check(parse_mean("harmonic"), A2, B2, 50, 0)
        assert not v.loewner and not v.norm_dominated and v.witness is not None
        assert v.samples_used > 50

    def test_reflexive(self, rng):
        A = random_spd(3, rng)
        sigma = parse_mean(MIXTURE_2A)
        v = order_determination_check(sigma, A, A, 20, 0)
        assert v.loewner and v.norm_dominated
        gap, _ = orderdet.norm_gaps(sigma, A, A, sample_gamma_positive(np.zeros((3, 3)), 0, 20))
        np.testing.assert_array_equal(gap, 0.0)

    def test_verdict_invariants(self):
        with pytest.raises(TheoremViolationError):
            OrderVerdict(True, False, None, "x", 0)
        w = witness_search(parse_mean("geometric"), A2, B2)
        with pytest.raises(TheoremViolationError):
            OrderVerdict(True, True, w, "x", 0)

    def test_json(self):
        v = order_determination_check(parse_mean("geometric"), A2, B2, 10, 0)
        out = json.loads(json.dumps(v.to_json()))
        assert out["witness"]["rank"] == 1 and out["mean_label"] == "geometric"

    def test_requires_symmetric(self):
        with pytest.raises(PreconditionError):
            order_determination_check(Connection(RepresentingFunction(lambda t: t**0.3, 0.0, 0.0)), A2, B2)

    @settings(max_examples=15, deadline=None)
    @given(seed=seeds, n=st.integers(2, 6), sel=st.sampled_from(SYMMETRIC_SELECTORS),
           kind=st.sampled_from(["ordered", "unordered", "congruent-diagonal"]))
    def test_round_trip(self, seed, n, sel, kind):
        A, B = generate_pair(n, seed, kind)
        v = order_determination_check(parse_mean(sel), A, B, 200, seed)
        assert v.loewner == v.norm_dominated == (kind == "ordered")
        assert (v.witness is None) == (kind == "ordered")

    def test_structured_family_shape(self):
        Ps = lower_projections(np.diag([-1.0, 0.0, 2.0]))
        assert len(Ps) == 2
        fam = structured_family(Ps, s_grid=(1.0, 2.0), deltas=(0.0, 1.0))
        assert fam.shape == (8, 3, 3)
