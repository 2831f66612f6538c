"""Bounded-distance decoder: planning, fit/decode, persistence, the guard."""

import math
from fractions import Fraction

import numpy as np
import pytest

from latgauss.decoder import (
    EXACT,
    GUARD,
    BddDecoder,
    FrameAbort,
    bdd_param_plan,
    decoding_radius,
    iteration_count,
    preprocess,
)
from latgauss.enumeration import closest_vector, lambda1
from latgauss.generators import (
    checkerboard,
    integer_identity,
    random_dual_orthogonal,
    random_integer,
)
from latgauss.rng import stream


def fitted(n=3, eps=1e-3, seed=1, n_advice=3000):
    basis = random_dual_orthogonal(n, seed=seed)
    dec = BddDecoder(eps, n_advice=n_advice, seed=seed).fit(basis)
    return basis, dec


def test_iteration_count_frozen_values():
    assert iteration_count(8, 1e-6) == 2
    assert iteration_count(4, 1e-3) == 2
    assert iteration_count(3, 0.0025) == 2
    with pytest.raises(ValueError):
        iteration_count(4, 0.01)
    with pytest.raises(ValueError):
        iteration_count(0, 1e-3)


def test_bdd_param_plan_frozen_values():
    assert bdd_param_plan(0.15, 6) == (1.254194270241461e-05, 38244)
    assert bdd_param_plan(0.15, 8) == (1.0437476825092872e-05, 56806)
    assert bdd_param_plan(0.15, 10) == (8.686131289838353e-06, 79084)


def test_bdd_param_plan_rejects_out_of_range_alpha():
    with pytest.raises(ValueError):
        bdd_param_plan(0.0, 6)
    with pytest.raises(ValueError):
        bdd_param_plan(0.5, 6)


def test_decoding_radius_matches_the_width_and_smoothing():
    from latgauss.gaussian import decoding_width, smoothing_parameter

    basis = integer_identity(4)
    eps = 1e-3
    s_eps, dmax = decoding_width(eps)
    eta = smoothing_parameter(basis.dual, eps).value
    assert decoding_radius(basis, eps) == pytest.approx(dmax * s_eps / eta, rel=1e-12)


def test_fit_exposes_the_decoding_state():
    basis, dec = fitted()
    assert dec.basis_ == basis
    assert dec.radius_ > 0
    assert dec.iterations_ == iteration_count(basis.rank, dec.eps)
    assert len(dec.advice_) == 3000
    assert dec.vstar_.rank == basis.rank
    # frame rows and short dual vectors are exactly biorthogonal
    for i, w in enumerate(dec.frame_.rows):
        for j, u in enumerate(dec.vstar_.rows):
            assert sum(a * b for a, b in zip(w, u)) == (1 if i == j else 0)


def test_decode_recovers_planted_points_exactly():
    basis, dec = fitted(n=3, seed=2)
    rng = stream(2, 7)
    hits = 0
    for k in range(40):
        coeffs = [int(v) for v in rng.integers(-3, 4, size=3)]
        point = np.array([float(x) for x in basis.vector(coeffs)])
        u = rng.normal(size=3)
        u /= np.linalg.norm(u)
        t = point + 0.9 * dec.radius_ * float(rng.random()) * u
        res = dec.decode(t)
        if res.status == EXACT:
            vec, _, _ = closest_vector(basis, [Fraction(x).limit_denominator(1 << 40) for x in t])
            hits += res.vector == vec
    assert hits >= 38


def test_decode_batch_matches_single_decodes():
    basis, dec = fitted(n=2, seed=3, n_advice=800)
    ts = np.array([[0.1, 0.2], [1.4, -0.7], [0.0, 0.0]])
    batch = dec.decode_batch(ts)
    for row, res in zip(ts, batch):
        single = dec.decode(row)
        assert single.vector == res.vector
        assert single.status == res.status
        assert len(single.trace) == len(res.trace)
        for (n1, v1), (n2, v2) in zip(single.trace, res.trace):
            assert n1 == pytest.approx(n2, abs=1e-12)
            assert v1 == pytest.approx(v2, abs=1e-12)
    preds = dec.predict(ts)
    assert preds.shape == (3, 2)
    assert preds[2] == pytest.approx([0.0, 0.0])


def test_decode_trace_and_iteration_budget():
    basis, dec = fitted(n=2, seed=4, n_advice=800)
    res = dec.decode([0.05, -0.03])
    assert res.iterations_run == dec.iterations_
    assert len(res.trace) == dec.iterations_ + 1
    for norm, val in res.trace:
        assert norm >= 0.0 and -1.0 <= val <= 1.0


def test_guard_trips_far_from_the_lattice():
    # the density at the deep hole of Z^3 sits below the eps^(1/4)/4 floor
    basis = integer_identity(3)
    dec = BddDecoder(1e-3, n_advice=3000, seed=5).fit(basis)
    res = dec.decode([0.5, 0.5, 0.5])
    assert res.status == GUARD
    assert "guard" in res.note or "lattice point" in res.note
    assert res.iterations_run < dec.iterations_
    inside = dec.decode([0.05, 0.0, -0.04])
    assert inside.status == EXACT


def test_decode_rejects_wrong_width_targets():
    _, dec = fitted(n=2, seed=6, n_advice=400)
    with pytest.raises(ValueError):
        dec.decode([0.1, 0.2, 0.3])


def test_unfitted_decoder_refuses_to_decode():
    dec = BddDecoder(1e-3)
    with pytest.raises(Exception):
        dec.decode([0.0])


def test_fit_validates_parameters():
    basis = integer_identity(2)
    with pytest.raises(ValueError):
        BddDecoder(0.02).fit(basis)
    with pytest.raises(ValueError):
        BddDecoder(1e-3, n_advice=0).fit(basis)


def test_save_load_roundtrip_preserves_decoding(tmp_path):
    basis, dec = fitted(n=3, seed=7, n_advice=1200)
    path = tmp_path / "decoder.txt"
    dec.save(path)
    back = BddDecoder.load(path)
    assert back.basis_ == basis
    assert back.scale_ == dec.scale_
    assert back.vstar_indices_ == dec.vstar_indices_
    ts = np.array([[0.2, -0.1, 0.4], [1.0, 0.3, -0.2]])
    for a, b in zip(dec.decode_batch(ts), back.decode_batch(ts)):
        assert a.vector == b.vector
        assert a.status == b.status


def test_load_rejects_a_corrupted_frame(tmp_path):
    _, dec = fitted(n=2, seed=8, n_advice=600)
    path = tmp_path / "decoder.txt"
    dec.save(path)
    lines = path.read_text().splitlines()
    # tamper with the last frame row
    parts = lines[-1].split()
    parts[0] = str(Fraction(parts[0]) + 1)
    lines[-1] = " ".join(parts)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(FrameAbort):
        BddDecoder.load(path)


def test_load_rejects_a_bad_header(tmp_path):
    path = tmp_path / "decoder.txt"
    path.write_text("latgauss-decoder 2\n")
    with pytest.raises(ValueError):
        BddDecoder.load(path)


def test_preprocess_is_fit_shorthand():
    basis = random_dual_orthogonal(2, seed=9)
    dec = preprocess(basis, 1e-3, n_advice=500, seed=9)
    ref = BddDecoder(1e-3, n_advice=500, seed=9).fit(basis)
    assert dec.radius_ == ref.radius_
    assert np.array_equal(dec.advice_.coeffs, ref.advice_.coeffs)


def test_param_mixin_roundtrip():
    dec = BddDecoder(1e-3, n_advice=100, seed=4)
    params = dec.get_params()
    assert params["eps"] == 1e-3 and params["n_advice"] == 100
    dec.set_params(seed=5)
    assert dec.seed == 5
    with pytest.raises(ValueError):
        dec.set_params(nonsense=1)
    assert "BddDecoder(" in repr(dec)


def test_radius_clears_the_promised_fraction_of_lambda1():
    for n in (4, 6):
        eps, count = bdd_param_plan(0.15, n)
        basis = integer_identity(n)
        assert decoding_radius(basis, eps) >= 0.15 * math.sqrt(float(lambda1(basis)))


def test_scale_equivariance_for_dyadic_factors():
    basis = random_integer(2, seed=10, bound=4)
    dec = BddDecoder(1e-3, n_advice=500, seed=10).fit(basis)
    dec2 = BddDecoder(1e-3, n_advice=500, seed=10).fit(basis.scaled(2))
    t = np.array([0.3, -0.8])
    a = dec.decode(t)
    b = dec2.decode(2 * t)
    assert tuple(2 * x for x in a.vector) == b.vector
    assert a.status == b.status


def test_translation_equivariance():
    basis = checkerboard(2)
    dec = BddDecoder(1e-3, n_advice=600, seed=11).fit(basis)
    t = np.array([0.12, -0.07])
    shift = np.array([float(x) for x in basis.vector((2, -1))])
    a = dec.decode(t)
    b = dec.decode(t + shift)
    assert tuple(x + y for x, y in zip(a.vector, basis.vector((2, -1)))) == b.vector
