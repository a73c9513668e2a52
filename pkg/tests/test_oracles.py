"""Geometric oracles: LP solver, uniqueness cone check, covering, regions."""

import numpy as np
import pytest
from scipy.optimize import linprog

from phasemax import (
    COMPLEX,
    REAL,
    Signal,
    caps_cover_sphere,
    coverage_mc,
    gen_instance,
    halfsphere_cover_prob,
    make_approx_at_angle,
    phase,
    regions_brute_force,
    regions_count,
    solve_lp,
    uniqueness_check,
)


# ---------------------------------------------------------------------------
# dense simplex


def _random_lp(rng):
    k = int(rng.integers(2, 6))
    p_ub = int(rng.integers(0, 5))
    p_eq = int(rng.integers(0, 3))
    c = rng.standard_normal(k)
    a_ub = rng.standard_normal((p_ub, k)) if p_ub else None
    b_ub = rng.standard_normal(p_ub) if p_ub else None
    a_eq = rng.standard_normal((p_eq, k)) if p_eq else None
    b_eq = rng.standard_normal(p_eq) if p_eq else None
    return c, a_ub, b_ub, a_eq, b_eq


def test_simplex_agrees_with_scipy_on_random_lps():
    rng = np.random.default_rng(101)
    checked = 0
    for _ in range(40):
        c, a_ub, b_ub, a_eq, b_eq = _random_lp(rng)
        mine = solve_lp(c, a_ub, b_ub, a_eq, b_eq)
        ref = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
                      bounds=(0, None), method="highs")
        if ref.status == 0:
            assert mine.status == "optimal"
            assert mine.value == pytest.approx(ref.fun, abs=1e-7)
            checked += 1
        elif ref.status == 2:
            assert mine.status == "infeasible"
        elif ref.status == 3:
            assert mine.status == "unbounded"
    assert checked >= 10  # the draw must produce a healthy share of solvable LPs


def test_simplex_known_cases():
    # min -x subject to x <= 3
    res = solve_lp([-1.0], a_ub=[[1.0]], b_ub=[3.0])
    assert res.status == "optimal"
    assert res.value == pytest.approx(-3.0)
    # x >= 0 and x <= -1 cannot hold
    res = solve_lp([1.0], a_ub=[[1.0]], b_ub=[-1.0])
    assert res.status == "infeasible"
    # min -x with x free upward
    res = solve_lp([-1.0])
    assert res.status == "unbounded"
    # no constraints, nonnegative cost: optimum at the origin
    res = solve_lp([2.0, 0.0])
    assert res.status == "optimal"
    assert res.value == 0.0


def test_simplex_solution_is_feasible():
    rng = np.random.default_rng(102)
    for _ in range(20):
        c, a_ub, b_ub, a_eq, b_eq = _random_lp(rng)
        res = solve_lp(c, a_ub, b_ub, a_eq, b_eq)
        if res.status != "optimal":
            continue
        assert np.all(res.x >= -1e-9)
        if a_ub is not None:
            assert np.all(a_ub @ res.x <= b_ub + 1e-7)
        if a_eq is not None:
            assert np.allclose(a_eq @ res.x, b_eq, atol=1e-7)


# ---------------------------------------------------------------------------
# region counting


def test_region_counts_match_formula():
    rng = np.random.default_rng(111)
    for n, k in [(2, 3), (2, 4), (3, 3), (3, 5), (4, 4)]:
        brute = regions_brute_force(n, k, rng, samples=200000)
        assert brute == regions_count(n, k), (n, k)


def test_regions_brute_force_domain():
    rng = np.random.default_rng(112)
    with pytest.raises(ValueError):
        regions_brute_force(6, 3, rng)
    with pytest.raises(ValueError):
        regions_brute_force(3, 9, rng)
    with pytest.raises(ValueError):
        regions_brute_force(0, 3, rng)


def test_single_hyperplane_two_regions():
    rng = np.random.default_rng(113)
    assert regions_brute_force(3, 1, rng, samples=1000) == 2


# ---------------------------------------------------------------------------
# cap covering


def test_caps_cover_sphere_known_configurations():
    rng = np.random.default_rng(121)
    s = np.sqrt(0.5)
    covering = np.array([[1.0, 0.0], [0.0, 1.0], [-s, -s]])
    assert caps_cover_sphere(covering, np.pi / 2, rng)
    half_only = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    assert not caps_cover_sphere(half_only, np.pi / 2, rng)
    # shrinking the caps below semispheres opens gaps between the three
    assert not caps_cover_sphere(covering, np.pi / 3, rng, probes=50000)


def test_coverage_mc_matches_exact_semisphere_law():
    rng = np.random.default_rng(122)
    for n, m in [(2, 3), (2, 5)]:
        p = halfsphere_cover_prob(m, n)
        trials = 3000
        hit = coverage_mc(n, m, np.pi / 2, trials, rng)
        se = np.sqrt(p * (1 - p) / trials)
        assert abs(hit - p) <= 4 * se + 1e-12, (n, m, hit, p)


def test_coverage_mc_sign_flip_sampler_invariance():
    # the uniform cap-center law is symmetric under a_i -> -a_i, so flipping
    # random signs must leave the coverage statistic unchanged
    def flipped(rng, m, n):
        a = rng.standard_normal((m, n))
        a /= np.linalg.norm(a, axis=1, keepdims=True)
        return a * np.where(rng.uniform(size=(m, 1)) < 0.5, -1.0, 1.0)

    trials = 3000
    p = halfsphere_cover_prob(3, 2)
    base = coverage_mc(2, 3, np.pi / 2, trials, np.random.default_rng(123))
    alt = coverage_mc(2, 3, np.pi / 2, trials, np.random.default_rng(124), sampler=flipped)
    se = np.sqrt(p * (1 - p) / trials)
    assert abs(base - p) <= 4 * se
    assert abs(alt - p) <= 4 * se


def test_coverage_mc_rejects_bad_theta():
    rng = np.random.default_rng(125)
    with pytest.raises(ValueError):
        coverage_mc(2, 3, 0.0, 10, rng)
    with pytest.raises(ValueError):
        coverage_mc(2, 3, 2.0, 10, rng)


# ---------------------------------------------------------------------------
# uniqueness oracle


def test_uniqueness_single_measurement_is_never_unique():
    inst = gen_instance(4, 1, COMPLEX, seed=131)
    report = uniqueness_check(inst.ensemble, inst.truth, inst.xhat)
    assert report.nontrivial
    assert report.witness is not None
    assert report.objective_value > 1e-7


def test_uniqueness_heavy_oversampling_with_good_anchor():
    inst = gen_instance(4, 60, COMPLEX, seed=132)
    rng = np.random.default_rng(133)
    anchor = make_approx_at_angle(inst.truth, np.radians(20.0), rng)
    inst = inst.with_xhat(anchor)
    report = uniqueness_check(inst.ensemble, inst.truth, inst.xhat)
    assert not report.nontrivial
    assert report.witness is None


def test_uniqueness_witness_satisfies_the_cone():
    inst = gen_instance(5, 6, COMPLEX, seed=134)
    report = uniqueness_check(inst.ensemble, inst.truth, inst.xhat)
    assert report.nontrivial
    delta = report.witness.entries
    assert np.linalg.norm(delta) == pytest.approx(1.0)
    tilted = phase(inst.ensemble.measure(inst.truth))[:, None] * inst.ensemble.vectors
    descent = np.real(np.conj(tilted) @ delta)
    assert np.all(descent <= 1e-7)
    ip = np.vdot(delta, inst.xhat.entries)
    assert abs(ip.imag) < 1e-7
    assert ip.real >= -1e-7


def test_uniqueness_invariant_under_row_permutation():
    inst = gen_instance(5, 25, COMPLEX, seed=135)
    ens = inst.ensemble
    perm = np.random.default_rng(136).permutation(ens.m)
    from phasemax import MeasurementEnsemble

    shuffled = MeasurementEnsemble(
        ens.vectors[perm], ens.b[perm], ens.eta[perm], ens.field,
        ens.normalized, ens.seed,
    )
    a = uniqueness_check(ens, inst.truth, inst.xhat)
    b = uniqueness_check(shuffled, inst.truth, inst.xhat)
    assert a.nontrivial == b.nontrivial


def test_uniqueness_real_field_and_zero_anchor():
    inst = gen_instance(4, 40, REAL, seed=137)
    rng = np.random.default_rng(138)
    anchor = make_approx_at_angle(inst.truth, np.radians(15.0), rng)
    report = uniqueness_check(inst.ensemble, inst.truth, anchor)
    assert not report.nontrivial
    with pytest.raises(ValueError, match="nonzero"):
        uniqueness_check(inst.ensemble, inst.truth, Signal([0.0] * 4, REAL))
