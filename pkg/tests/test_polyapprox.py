import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import chebyshev as C

from distrace import polyapprox as pa
from distrace.errors import ApproximationError, InvalidInputError, InvalidParameterError


def dense(lo, hi, n=20001):
    return np.linspace(lo, hi, n)


def assert_structural_parity(p):
    c = p.cheb_coeffs
    if p.parity == "even":
        assert np.all(c[1::2] == 0)
    elif p.parity == "odd":
        assert np.all(c[0::2] == 0)


def assert_recertifies(p, n=3001):
    for rec, observed in zip(p.certified, p.recertify(n)):
        assert observed <= rec.bound + 1e-12, rec


# -- generic fit ---------------------------------------------------------------


def test_fit_identity_is_exact():
    p, rep = pa.chebyshev_fit_certified(lambda x: x, (0.0, 1.0), 1e-6)
    assert p.degree == 1
    assert rep.achieved_eps <= 1e-15


def test_fit_zero_function():
    p, rep = pa.chebyshev_fit_certified(lambda x: 0.0, (-0.3, 0.7), 1e-3)
    assert p.degree == 0
    assert rep.achieved_eps == 0


def test_fit_exponential_grid_error():
    p, rep = pa.chebyshev_fit_certified(np.exp, (-0.5, 0.5), 1e-4)
    x = dense(-0.5, 0.5)
    assert np.max(np.abs(p(x) - np.exp(x))) <= 1e-4
    assert rep.achieved_eps <= rep.requested_eps
    # degree 3 cannot work: the x^4 Taylor term alone is 0.5^4/24 / 8 ~ 3e-4 in the minimax sense
    assert p.degree == 4


def test_fit_degree_minimal():
    p, _ = pa.chebyshev_fit_certified(np.cos, (-1.0, 1.0), 1e-6)
    lower, _ = pa.chebyshev_fit_certified(np.cos, (-1.0, 1.0), 1e-6, max_degree=p.degree + 8)
    assert lower.degree == p.degree
    with pytest.raises(ApproximationError):
        pa.chebyshev_fit_certified(np.cos, (-1.0, 1.0), 1e-6, max_degree=p.degree - 2)


def test_fit_failure_carries_best_error():
    with pytest.raises(ApproximationError) as info:
        pa.chebyshev_fit_certified(np.abs, (-1.0, 1.0), 1e-8, max_degree=16)
    assert 1e-8 < info.value.best_error < 0.1


@pytest.mark.parametrize("eps", [0.0, 0.5, -1e-3])
def test_fit_rejects_eps(eps):
    with pytest.raises(InvalidParameterError):
        pa.chebyshev_fit_certified(np.exp, (0, 1), eps)


def test_fit_rejects_nonfinite():
    with pytest.raises(InvalidInputError):
        pa.chebyshev_fit_certified(lambda x: 1 / x, (-1, 1), 1e-3)


def test_fit_parity_projection():
    p, _ = pa.chebyshev_fit_certified(np.cosh, (-1, 1), 1e-8, parity="even")
    assert_structural_parity(p)


# -- symmetrize ----------------------------------------------------------------


def test_symmetrize_odd_cancels():
    p = pa.BoundedPolynomial([0.0, 1.0], "none")
    assert np.all(pa.symmetrize_even(p).cheb_coeffs == 0)


def test_symmetrize_even_doubles():
    sq = pa.BoundedPolynomial(C.poly2cheb([0, 0, 1]), "none")
    out = pa.symmetrize_even(sq)
    x = dense(-1, 1, 101)
    np.testing.assert_allclose(out(x), 2 * x**2, atol=1e-14)
    assert out.parity == "even"


def test_symmetrize_local_fit_certifies():
    # analytic f on [0, 2 x0]; the local fit vanishes on the negative axis so
    # P*(x) + P*(-x) keeps accuracy on [delta, 2 x0 - delta]
    def f(x):
        return 0.25 * np.exp(x)

    x0, delta, eps = 0.5, 0.1, 1e-3
    local = pa.local_poly(f, x0, delta, eps, bound=0.25 * math.e)
    even = pa.symmetrize_even(local, f, (delta, 2 * x0 - delta), eps)
    x = dense(delta, 2 * x0 - delta)
    assert np.max(np.abs(even(x) - f(x))) <= eps
    assert np.max(np.abs(even(-x) - f(x))) <= eps
    assert_structural_parity(even)


def test_local_poly_rescale_records_scale():
    def f(x):
        return 2.0 + 0 * x

    local = pa.local_poly(f, 0.5, 0.2, 1e-3, bound=2.0)
    scaled = local.rescaled(1 / (1e-3 + 2.0))
    assert scaled.scale == pytest.approx(1 / 2.001)
    assert scaled.sup_norm() <= 1.0


# -- log -----------------------------------------------------------------------


def test_log_poly_constant():
    _, K = pa.log_poly(0.5, 1e-2)
    assert K == pytest.approx(2 * math.log(4))
    assert K == pytest.approx(2.7726, abs=1e-4)


def test_log_poly_value_at_one():
    p, _ = pa.log_poly(0.5, 1e-3)
    assert abs(p(1.0)) <= 1e-3


@pytest.mark.parametrize("delta,eps", [(0.1, 1e-3), (0.5, 1e-2), (0.05, 1e-4), (1.0, 1e-3)])
def test_log_poly_accuracy_and_norm(delta, eps):
    p, K = pa.log_poly(delta, eps)
    x = dense(delta, 1)
    assert np.max(np.abs(p(x) - np.log(1 / x) / K)) <= eps
    assert np.max(np.abs(p(dense(-1, 1)))) <= 1
    assert p.parity == "even"
    assert_structural_parity(p)
    assert_recertifies(p)


def test_log_poly_rejects_bad_delta():
    with pytest.raises(InvalidParameterError):
        pa.log_poly(0.0, 1e-3)


# -- rectangle -----------------------------------------------------------------


def test_rect_plateau_and_stopband():
    eps_p = 1e-2
    p = pa.rect_poly(0.5, 0.1, eps_p)
    assert 1 - eps_p <= p(0.0) <= 1
    assert 0 <= p(0.9) <= eps_p


def test_rect_bands_on_grid():
    t, dp, ep = 0.4, 0.05, 1e-3
    p = pa.rect_poly(t, dp, ep)
    inner = p(dense(-t + dp, t - dp))
    outer = p(np.concatenate([dense(-1, -t - dp), dense(t + dp, 1)]))
    allx = p(dense(-1, 1))
    assert inner.min() >= 1 - ep and inner.max() <= 1
    assert outer.min() >= 0 and outer.max() <= ep
    assert np.abs(allx).max() <= 1
    assert_recertifies(p)


def test_rect_parity():
    p = pa.rect_poly(0.5, 0.1, 1e-2)
    x = dense(0, 1, 101)
    np.testing.assert_array_equal(p.cheb_coeffs[1::2], 0)
    np.testing.assert_allclose(p(-x), p(x), atol=1e-14)


def test_rect_rejects_empty_plateau():
    with pytest.raises(InvalidParameterError):
        pa.rect_poly(0.1, 0.1, 1e-2)


# -- powers --------------------------------------------------------------------


def test_positive_power_at_one():
    eps = 1e-3
    p = pa.power_poly(1.0, "odd", 0.25, eps, "positive")
    assert abs(p(1.0) - 0.5) <= eps


def test_negative_power_at_delta():
    eps, delta = 1e-3, 0.2
    p = pa.power_poly(1.0, "even", delta, eps, "negative")
    assert abs(p(delta) - 0.5) <= eps


def test_positive_sqrt_vanishes_at_zero():
    eps = 1e-3
    p = pa.power_poly(0.5, "even", 0.1, eps, "positive")
    assert abs(p(0.0)) <= eps


@pytest.mark.parametrize("c", [0.5, 1.0, 2.0, 1.5])
@pytest.mark.parametrize("parity", ["even", "odd"])
def test_positive_power_certificates(c, parity):
    delta, eps = 0.1, 1e-3
    p = pa.power_poly(c, parity, delta, eps, "positive")
    x = dense(delta, 1)
    assert np.max(np.abs(p(x) - x**c / 2)) <= eps
    xs = dense(-1, 1)
    assert np.all(np.abs(p(xs)) <= np.abs(xs) ** c / 2 + eps)
    assert np.max(np.abs(p(xs))) <= 1
    assert p.parity == parity
    assert_structural_parity(p)
    assert_recertifies(p)


@pytest.mark.parametrize("c", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("parity", ["even", "odd"])
def test_negative_power_certificates(c, parity):
    delta, eps = 0.25, 1e-3
    p = pa.power_poly(c, parity, delta, eps, "negative")
    x = dense(delta, 1)
    assert np.max(np.abs(p(x) - delta**c * x ** (-c) / 2)) <= eps
    sign = 1 if parity == "even" else -1
    assert np.max(np.abs(p(-x) - sign * delta**c * x ** (-c) / 2)) <= eps
    assert np.max(np.abs(p(dense(-1, 1)))) <= 1
    assert_recertifies(p)


def test_power_rejects_bad_sign():
    with pytest.raises(InvalidParameterError):
        pa.power_poly(1.0, "even", 0.1, 1e-2, "sideways")


# -- inverse -------------------------------------------------------------------


def test_inverse_at_delta_and_one():
    delta, eps = 0.2, 1e-3
    p = pa.inverse_poly(delta, eps)
    assert abs(p(delta) - 0.75) <= eps
    assert abs(p(1.0) - 0.75 * delta) <= eps


def test_inverse_odd_and_bounded():
    p = pa.inverse_poly(0.1, 1e-3)
    x = dense(0.1, 1)
    np.testing.assert_array_equal(p.cheb_coeffs[0::2], 0)
    np.testing.assert_allclose(p(-x), -p(x), atol=1e-13)
    assert np.max(np.abs(p(x) - 0.075 / x)) <= 1e-3
    assert np.max(np.abs(p(dense(-1, 1)))) <= 1
    assert_recertifies(p)


# -- global properties ---------------------------------------------------------


def test_degree_growth_is_linear_in_inverse_delta_log_inverse_eps():
    rows = []
    for delta in (0.5, 0.25, 0.1, 0.05):
        for eps in (1e-2, 1e-3, 1e-4):
            rows.append(((1 / delta) * math.log(1 / eps), pa.log_poly(delta, eps)[0].degree, pa.inverse_poly(min(delta, 0.5), eps).degree))
    rows = np.array(rows)
    for col in (1, 2):
        slope = np.polyfit(np.log(rows[:, 0]), np.log(rows[:, col]), 1)[0]
        assert slope <= 1.3


@settings(max_examples=12, deadline=None)
@given(delta=st.floats(0.05, 0.5), eps=st.floats(1e-4, 0.1), n=st.integers(500, 5000))
def test_certificates_hold_on_fresh_grids(delta, eps, n):
    for p in (pa.log_poly(delta, eps)[0], pa.inverse_poly(delta, eps), pa.power_poly(0.5, "even", delta, eps, "positive")):
        assert_recertifies(p, n)


def test_export_table(tmp_path):
    p, _ = pa.log_poly(0.5, 1e-2)
    path = tmp_path / "polys.jsonl"
    pa.export_table([p, pa.inverse_poly(0.5, 1e-2)], path)
    import json

    recs = [json.loads(line) for line in path.read_text().splitlines()]
    assert recs[0]["degree"] == p.degree
    assert recs[0]["achieved_eps"] <= 1e-2
    np.testing.assert_array_equal(recs[0]["coefficients"], p.cheb_coeffs)


def test_monomial_exact():
    x = dense(-1, 1, 11)
    np.testing.assert_allclose(pa.monomial(3)(x), x**3, atol=1e-14)
    assert pa.monomial(2).parity == "even"
