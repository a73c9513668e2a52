"""Anchor construction: random draws, spectral power iteration, truncation."""

import numpy as np
import pytest

from phasemax import (
    COMPLEX,
    GAUSSIAN,
    RANDOM,
    REAL,
    SPECTRAL,
    TRUNCATED_SPECTRAL,
    InitializerConfig,
    MeasurementEnsemble,
    align,
    angle_between,
    gen_instance,
    make_anchor,
    random_init,
    reserve_prefix,
    spectral_init,
)


def _aligned_cos_sq(x, truth):
    return np.cos(angle_between(align(x, truth), truth)) ** 2


def test_random_init_unit_norm_and_deterministic():
    a = random_init(12, COMPLEX, np.random.default_rng(5))
    b = random_init(12, COMPLEX, np.random.default_rng(5))
    assert a.norm == pytest.approx(1.0)
    assert np.array_equal(a.entries, b.entries)
    r = random_init(6, REAL, np.random.default_rng(6))
    assert np.all(r.entries.imag == 0.0)


def test_config_validation():
    with pytest.raises(ValueError):
        InitializerConfig(kind="oracle")
    with pytest.raises(ValueError):
        InitializerConfig(power_iters=0)
    with pytest.raises(ValueError):
        InitializerConfig(truncation_factor=0.0)
    with pytest.raises(ValueError):
        InitializerConfig(scale_to=-1.0)


def test_single_measurement_spectrum_is_the_row():
    # with one row, Y is rank one and the leading eigenvector is a_1
    inst = gen_instance(6, 1, COMPLEX, seed=7)
    out = spectral_init(inst.ensemble, InitializerConfig(kind=SPECTRAL))
    a1 = inst.ensemble.vectors[0]
    overlap = abs(np.vdot(out.x.entries, a1)) / (out.x.norm * np.linalg.norm(a1))
    assert overlap == pytest.approx(1.0, abs=1e-10)
    assert out.converged


def test_huge_truncation_factor_matches_plain_spectral():
    inst = gen_instance(20, 120, COMPLEX, kind=GAUSSIAN, seed=8)
    plain = spectral_init(inst.ensemble, InitializerConfig(kind=SPECTRAL))
    loose = spectral_init(
        inst.ensemble, InitializerConfig(kind=TRUNCATED_SPECTRAL, truncation_factor=1e12)
    )
    assert np.allclose(plain.x.entries, loose.x.entries, rtol=0, atol=1e-12)


def test_direction_invariant_under_magnitude_scaling():
    # doubling every b rescales the matrix by 4 and moves no eigenvector
    inst = gen_instance(10, 60, COMPLEX, kind=GAUSSIAN, seed=9)
    ens = inst.ensemble
    doubled = MeasurementEnsemble(
        ens.vectors, 2.0 * ens.b, ens.eta, ens.field, ens.normalized, ens.seed
    )
    base = spectral_init(ens, InitializerConfig(kind=SPECTRAL, scale_to=1.0))
    scaled = spectral_init(doubled, InitializerConfig(kind=SPECTRAL, scale_to=1.0))
    assert np.array_equal(base.x.entries, scaled.x.entries)


def test_row_permutation_moves_direction_only_by_roundoff():
    inst = gen_instance(8, 50, COMPLEX, kind=GAUSSIAN, seed=10)
    ens = inst.ensemble
    perm = np.random.default_rng(11).permutation(ens.m)
    shuffled = MeasurementEnsemble(
        ens.vectors[perm], ens.b[perm], ens.eta[perm], ens.field, ens.normalized, ens.seed
    )
    a = spectral_init(ens).x
    b = spectral_init(shuffled).x
    assert angle_between(align(a, b), b) < 1e-6


def test_rayleigh_quotient_matches_dense_eigensolver():
    inst = gen_instance(7, 40, COMPLEX, kind=GAUSSIAN, seed=12)
    ens = inst.ensemble
    out = spectral_init(ens, InitializerConfig(kind=SPECTRAL))
    coeff = ens.b**2 / ens.m
    dense = (ens.vectors.T * coeff) @ np.conj(ens.vectors)
    top = np.linalg.eigvalsh(dense)[-1]
    assert out.rayleigh_quotient == pytest.approx(top, rel=1e-8)


def test_default_scale_is_rms_magnitude():
    inst = gen_instance(6, 30, COMPLEX, seed=13)
    out = spectral_init(inst.ensemble)
    assert out.x.norm == pytest.approx(np.sqrt(np.mean(inst.ensemble.b**2)))
    scaled = spectral_init(inst.ensemble, InitializerConfig(scale_to=2.5))
    assert scaled.x.norm == pytest.approx(2.5)


def test_spectral_rejects_random_kind_and_empty_truncation():
    inst = gen_instance(5, 20, COMPLEX, seed=14)
    with pytest.raises(ValueError):
        spectral_init(inst.ensemble, InitializerConfig(kind=RANDOM))
    with pytest.raises(ValueError, match="truncation"):
        spectral_init(
            inst.ensemble,
            InitializerConfig(kind=TRUNCATED_SPECTRAL, truncation_factor=1e-12),
        )


def test_truncation_drops_heavy_rows():
    inst = gen_instance(6, 40, COMPLEX, kind=GAUSSIAN, seed=15)
    ens = inst.ensemble
    # a factor below the top outlier must change the matrix, hence the vector
    ratio = np.max(ens.b**2) / np.mean(ens.b**2)
    tight = spectral_init(
        ens, InitializerConfig(kind=TRUNCATED_SPECTRAL, truncation_factor=ratio * 0.9)
    )
    loose = spectral_init(ens, InitializerConfig(kind=SPECTRAL))
    assert not np.allclose(tight.x.entries, loose.x.entries, atol=1e-10)


def test_anchor_quality_at_healthy_oversampling():
    # complex Gaussian rows, m = 10n: the truncated spectral anchor should
    # land a squared cosine above 0.3 in nearly every draw
    n, m, good = 50, 500, 0
    for seed in range(100):
        inst = gen_instance(n, m, COMPLEX, kind=GAUSSIAN, seed=1000 + seed)
        out = spectral_init(inst.ensemble)
        if _aligned_cos_sq(out.x, inst.truth) > 0.3:
            good += 1
    assert good >= 95, f"only {good}/100 anchors cleared cos^2 > 0.3"


def test_real_field_spectral_output_is_real():
    inst = gen_instance(8, 60, REAL, kind=GAUSSIAN, seed=16)
    out = spectral_init(inst.ensemble)
    assert out.x.field == REAL
    assert np.all(out.x.entries.imag == 0.0)
    assert _aligned_cos_sq(out.x, inst.truth) > 0.3


def test_make_anchor_dispatch():
    inst = gen_instance(6, 36, COMPLEX, seed=17)
    rng = np.random.default_rng(18)
    rand = make_anchor(inst.ensemble, InitializerConfig(kind=RANDOM), rng=rng)
    assert rand.norm == pytest.approx(1.0)
    spec = make_anchor(inst.ensemble, InitializerConfig(kind=TRUNCATED_SPECTRAL))
    again = make_anchor(inst.ensemble, InitializerConfig(kind=TRUNCATED_SPECTRAL))
    assert np.array_equal(spec.entries, again.entries)  # no rng dependence


def test_reserve_prefix_splits_cleanly():
    inst = gen_instance(5, 30, COMPLEX, noise=None, seed=19)
    head, tail = reserve_prefix(inst.ensemble, 10)
    assert head.m == 10 and tail.m == 20
    assert np.array_equal(head.vectors, inst.ensemble.vectors[:10])
    assert np.array_equal(tail.vectors, inst.ensemble.vectors[10:])
    assert np.array_equal(head.b, inst.ensemble.b[:10])
    assert np.array_equal(tail.eta, inst.ensemble.eta[10:])
    assert head.field == tail.field == inst.ensemble.field
    assert head.seed == tail.seed == inst.ensemble.seed
    with pytest.raises(ValueError):
        reserve_prefix(inst.ensemble, 0)
    with pytest.raises(ValueError):
        reserve_prefix(inst.ensemble, 30)
