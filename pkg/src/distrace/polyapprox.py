"""Certified bounded polynomial approximations in the Chebyshev basis.

Every polynomial handed to a singular-value transformation must be real, have
definite parity and be bounded by 1 on [-1, 1]. The constructors here build
such polynomials for the logarithm, the smoothed rectangle, positive and
negative powers and the reciprocal. Each one returns a
:class:`BoundedPolynomial` whose ``certified`` list records what was checked
on a dense Chebyshev grid.

The recipe is the same throughout. A smooth surrogate target is formed on all
of [-1, 1] by multiplying the function of interest with an error-function
window that is ~1 where accuracy is required and decays to ~0 near the
singular point. The surrogate is interpolated at Chebyshev points with the
smallest degree that meets the fit budget (doubling, then bisection), the
wrong-parity coefficients are zeroed, and the result is checked against the
original function on the accuracy interval and against the norm bound on
[-1, 1].
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy.fft import dct
from scipy.special import erf, erfc, erfcinv

from .errors import ApproximationError, ContractViolationError, InvalidInputError, InvalidParameterError

MAX_DEGREE = 4096
GRID_FACTOR = 32
MIN_GRID = 4096
SEARCH_GRID_FACTOR = 8


@dataclass(frozen=True)
class CertRecord:
    """One certified statement about a polynomial.

    ``kind="error"`` means ``|P(x) - target(x)| <= bound`` on every interval in
    ``intervals``; ``kind="norm"`` means ``|P(x)| <= bound`` there, and
    ``kind="envelope"`` means ``|P(x)| <= target(x) + bound``.
    """

    kind: str
    intervals: tuple
    bound: float
    max_observed_error: float
    grid_points: int
    target: Optional[Callable] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ApproxReport:
    target_id: str
    interval: tuple
    requested_eps: float
    achieved_eps: float
    degree: int
    grid_points: int


@dataclass(frozen=True)
class BoundedPolynomial:
    """Real polynomial in the Chebyshev-T basis on [-1, 1].

    Attributes:
        cheb_coeffs: read-only coefficient array.
        parity: ``"even"``, ``"odd"`` or ``"none"``.
        certified: certificates established at construction.
        target_id: label of the approximated function.
        scale: factor already applied to reach the norm bound (1 if none).
    """

    cheb_coeffs: np.ndarray
    parity: str
    certified: tuple = ()
    target_id: str = ""
    scale: float = 1.0

    def __post_init__(self):
        c = np.array(self.cheb_coeffs, dtype=float)
        if c.ndim != 1 or c.size == 0:
            raise InvalidInputError("cheb_coeffs must be a non-empty 1-D array")
        if self.parity not in ("even", "odd", "none"):
            raise InvalidParameterError(f"unknown parity {self.parity!r}")
        c = _trim(_enforce_parity(c, self.parity))
        c.setflags(write=False)
        object.__setattr__(self, "cheb_coeffs", c)

    @property
    def degree(self) -> int:
        return int(self.cheb_coeffs.size - 1)

    def __call__(self, x):
        return C.chebval(x, self.cheb_coeffs)

    def coefficient_bound(self) -> float:
        """Rigorous sup-norm bound on [-1, 1]: sum of |c_k| since |T_k| <= 1."""
        return float(np.sum(np.abs(self.cheb_coeffs)))

    def sup_norm(self, n_points: int | None = None) -> float:
        """Grid estimate of max |P| on [-1, 1]."""
        n = n_points or max(GRID_FACTOR * (self.degree + 1), MIN_GRID)
        return float(np.max(np.abs(_values_on_nodes(self.cheb_coeffs, n))))

    def rescaled(self, factor: float) -> "BoundedPolynomial":
        certs = tuple(
            replace(r, bound=r.bound * abs(factor), max_observed_error=r.max_observed_error * abs(factor))
            for r in self.certified
            if r.kind == "norm"
        )
        return BoundedPolynomial(self.cheb_coeffs * factor, self.parity, certs, self.target_id, self.scale * factor)

    def recertify(self, n_points: int) -> list[float]:
        """Re-evaluate every certificate on a fresh grid of ``n_points`` per interval.

        Returns the observed violation measure of each record in the same order
        as ``certified``; a record holds if the value is <= its ``bound``.
        """
        out = []
        for rec in self.certified:
            worst = 0.0
            for lo, hi in rec.intervals:
                x = _mapped_nodes(lo, hi, n_points)
                worst = max(worst, _measure(rec, x, self(x)))
            out.append(worst)
        return out

    def to_record(self) -> dict:
        achieved = max((r.max_observed_error for r in self.certified if r.kind == "error"), default=None)
        interval = next((r.intervals for r in self.certified if r.kind == "error"), ((-1.0, 1.0),))
        return {
            "target_id": self.target_id,
            "interval": [list(map(float, iv)) for iv in interval],
            "parity": self.parity,
            "degree": self.degree,
            "scale": self.scale,
            "coefficients": [float(c) for c in self.cheb_coeffs],
            "achieved_eps": achieved,
        }


def export_table(polys, path) -> None:
    """Write one JSON record per polynomial (target, interval, degree, coefficients, achieved error)."""
    with open(path, "w", encoding="utf-8") as fh:
        for p in polys:
            fh.write(json.dumps(p.to_record()) + "\n")


# ---------------------------------------------------------------------------
# Chebyshev machinery


def _trim(c: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(c)
    return c[: nz[-1] + 1].copy() if nz.size else c[:1] * 0.0


def _enforce_parity(c: np.ndarray, parity: str) -> np.ndarray:
    c = c.copy()
    if parity == "even":
        c[1::2] = 0.0
    elif parity == "odd":
        c[0::2] = 0.0
    return c


def _nodes(n: int) -> np.ndarray:
    """First-kind Chebyshev points cos(pi (j + 1/2) / n), j = 0..n-1 (descending)."""
    return np.cos(np.pi * (np.arange(n) + 0.5) / n)


def _mapped_nodes(lo: float, hi: float, n: int) -> np.ndarray:
    x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * _nodes(n)
    return np.concatenate([x, [lo, hi]])


def _interpolate(values: np.ndarray) -> np.ndarray:
    """Chebyshev coefficients of the interpolant through values at ``_nodes(n)``."""
    n = values.size
    c = dct(values, type=2) / n
    c[0] /= 2
    return c


def _values_on_nodes(coeffs: np.ndarray, n: int) -> np.ndarray:
    """Evaluate a Chebyshev series at ``_nodes(n)`` by an inverse DCT (n > degree)."""
    a = np.zeros(n)
    a[: coeffs.size] = coeffs
    a[1:] /= 2
    return dct(a, type=3)


def _call(f, x: np.ndarray) -> np.ndarray:
    y = np.asarray(f(x), dtype=float)
    if y.shape != x.shape:
        y = np.broadcast_to(y, x.shape).astype(float) if y.ndim == 0 else np.vectorize(f, otypes=[float])(x)
    return y


def _measure(rec: CertRecord, x: np.ndarray, px: np.ndarray) -> float:
    if rec.kind == "error":
        return float(np.max(np.abs(px - _call(rec.target, x))))
    if rec.kind == "norm":
        return float(np.max(np.abs(px)))
    if rec.kind == "envelope":
        return float(np.max(np.abs(px) - _call(rec.target, x)))
    raise InvalidParameterError(f"unknown certificate kind {rec.kind!r}")


def _certify(coeffs, kind, intervals, bound, target=None, n=None) -> CertRecord:
    """Check a statement on a dense grid.

    The global grid has ``max(32 (deg+1), 4096)`` first-kind Chebyshev nodes;
    each interval uses the global nodes that fall inside it plus its endpoints.
    """
    deg = coeffs.size - 1
    n = n or max(GRID_FACTOR * (deg + 1), MIN_GRID)
    nodes = _nodes(n)
    values = _values_on_nodes(coeffs, n)
    rec = CertRecord(kind, tuple(intervals), float(bound), 0.0, n, target)
    worst = -np.inf
    for lo, hi in intervals:
        mask = (nodes >= lo) & (nodes <= hi)
        ends = np.array([lo, hi], dtype=float)
        x = np.concatenate([nodes[mask], ends])
        px = np.concatenate([values[mask], C.chebval(ends, coeffs)])
        worst = max(worst, _measure(rec, x, px))
    return replace(rec, max_observed_error=max(0.0, float(worst)) if kind != "envelope" else float(worst))


def _search_degree(fit, error, eps, max_degree, label):
    """Smallest degree whose fit meets ``error(coeffs) <= eps`` (doubling then bisection)."""
    best = (math.inf, None)
    cache = {}

    def passes(n):
        c = fit(n)
        e = error(c)
        cache[n] = c
        nonlocal best
        if e < best[0]:
            best = (e, n)
        return e <= eps

    n, last_fail = 0, -1
    while not passes(n):
        last_fail = n
        if n >= max_degree:
            raise ApproximationError(
                f"{label}: no polynomial of degree <= {max_degree} reached error {eps:.3e} "
                f"(best {best[0]:.3e} at degree {best[1]})",
                best_error=best[0],
                degree=best[1],
            )
        n = min(max(1, 2 * n), max_degree)
    lo, hi = last_fail, n
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if passes(mid):
            hi = mid
        else:
            lo = mid
    return cache[hi]


def _fit_global(target, parity, eps_fit, max_degree, label):
    """Parity-projected Chebyshev interpolant of a smooth target on [-1, 1] with uniform error <= eps_fit."""

    def fit(n):
        c = _interpolate(target(_nodes(n + 1)))
        return _enforce_parity(c, parity)

    def error(c):
        m = max(SEARCH_GRID_FACTOR * c.size, 1024)
        return float(np.max(np.abs(_values_on_nodes(c, m) - target(_nodes(m)))))

    return _search_degree(fit, error, eps_fit, max_degree, label)


def _check_eps(eps, hi=0.5, name="eps", inclusive=False):
    ok = 0 < eps <= hi if inclusive else 0 < eps < hi
    if not ok:
        bracket = "]" if inclusive else ")"
        raise InvalidParameterError(f"{name}={eps} outside (0, {hi}{bracket}")


# ---------------------------------------------------------------------------
# Generic certified fit


def chebyshev_fit_certified(f, interval, eps, max_degree: int = MAX_DEGREE, parity: str = "none"):
    """Minimal-degree Chebyshev interpolant of ``f`` on ``interval`` with certified sup error.

    Args:
        f: vectorised real function, finite on ``interval``.
        interval: ``(lo, hi)`` inside [-1, 1].
        eps: target sup-norm error, 0 < eps < 1/2.
        max_degree: degree cap for the search.
        parity: ``"even"``/``"odd"`` to project onto a parity class; only
            allowed on intervals symmetric about 0.

    Returns:
        ``(BoundedPolynomial, ApproxReport)``. The polynomial is expressed on
        [-1, 1]; accuracy is certified only on ``interval``.

    Raises:
        ApproximationError: if no degree up to ``max_degree`` succeeds.
    """
    lo, hi = map(float, interval)
    if not -1 <= lo < hi <= 1:
        raise InvalidParameterError(f"interval {interval} must satisfy -1 <= lo < hi <= 1")
    _check_eps(eps)
    if parity != "none" and not math.isclose(lo, -hi):
        raise InvalidParameterError("parity projection needs an interval symmetric about 0")
    with np.errstate(divide="ignore", invalid="ignore"):
        probe = _call(f, np.concatenate([_mapped_nodes(lo, hi, 257), np.linspace(lo, hi, 1001)]))
    if not np.all(np.isfinite(probe)):
        raise InvalidInputError("f is not finite on the interval")

    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)

    def g(y):
        return _call(f, mid + half * y)

    def to_x(c):
        if lo == -1 and hi == 1:
            return c
        return C.Chebyshev(c, domain=[lo, hi]).convert(domain=[-1, 1]).coef

    def fit(n):
        return _enforce_parity(_interpolate(g(_nodes(n + 1))), parity)

    def error(c):
        m = max(SEARCH_GRID_FACTOR * c.size, 1024)
        y = np.concatenate([_nodes(m), [-1.0, 1.0]])
        return float(np.max(np.abs(C.chebval(y, c) - g(y))))

    c_y = _search_degree(fit, error, eps, max_degree, "chebyshev_fit_certified")
    coeffs = _enforce_parity(to_x(c_y), parity)
    n = max(GRID_FACTOR * coeffs.size, MIN_GRID)
    x = _mapped_nodes(lo, hi, n)
    achieved = float(np.max(np.abs(C.chebval(x, coeffs) - _call(f, x))))
    if achieved > eps:
        raise ApproximationError(
            f"basis conversion raised the error to {achieved:.3e} > {eps:.3e}", best_error=achieved, degree=coeffs.size - 1
        )
    rec = CertRecord("error", ((lo, hi),), float(eps), achieved, n, f)
    poly = BoundedPolynomial(coeffs, parity, (rec,), getattr(f, "__name__", "f"))
    return poly, ApproxReport(poly.target_id, (lo, hi), float(eps), achieved, poly.degree, n)


# ---------------------------------------------------------------------------
# Windows


def _step(y, center, reach, tol, floor=None, floor_height=1.0):
    """Smooth step in y >= 0: ~0 below ``center``, >= 1 - tol from ``reach`` on.

    With ``floor`` given the step is also made steep enough that
    ``floor_height * step(floor) <= tol / 100``, which keeps the kink of a
    target clamped at ``floor`` far below the fit budget.
    """
    k = erfcinv(2 * tol) / (reach - center)
    if floor is not None:
        k = max(k, erfcinv(2 * tol / (100 * max(1.0, floor_height))) / (center - floor))
    return 0.5 * erfc(k * (center - y))


def _box(x, lo, hi, k):
    return 0.5 * (erf(k * (x - lo)) - erf(k * (x - hi)))


def _odd_ext(h):
    return lambda x: np.sign(x) * h(np.abs(x))


def _even_ext(h):
    return lambda x: h(np.abs(x))


def _finish(coeffs, parity, target_id, acc_target, acc_intervals, eps, extra=()):
    """Certify accuracy and the unit norm bound; raise if either fails."""
    acc = _certify(coeffs, "error", acc_intervals, eps, acc_target)
    nrm = _certify(coeffs, "norm", [(-1.0, 1.0)], 1.0)
    certs = (acc, nrm) + tuple(extra)
    for rec in certs:
        if rec.max_observed_error > rec.bound:
            raise ApproximationError(
                f"{target_id}: certificate {rec.kind} on {rec.intervals} failed "
                f"({rec.max_observed_error:.3e} > {rec.bound:.3e})",
                best_error=rec.max_observed_error,
                degree=coeffs.size - 1,
            )
    return BoundedPolynomial(coeffs, parity, certs, target_id)


# ---------------------------------------------------------------------------
# Specific constructions


@functools.lru_cache(maxsize=256)
def log_poly(delta: float, eps: float, max_degree: int = MAX_DEGREE):
    """Even polynomial approximating ln(1/x)/K on [delta, 1], K = 2 ln(2/delta).

    Returns:
        ``(poly, K)`` with ``|P| <= 1`` on [-1, 1] and
        ``|P(x) - ln(1/x)/K| <= eps`` for x in [delta, 1].
    """
    if not 0 < delta <= 1:
        raise InvalidParameterError(f"delta={delta} outside (0, 1]")
    _check_eps(eps)
    K = 2.0 * math.log(2.0 / delta)
    center = delta / 2
    floor = center / 20

    def h(y):
        return np.log(1.0 / np.maximum(y, floor)) / K * _step(y, center, delta, eps / 4, floor, math.log(1 / floor) / K)

    def exact(x):
        return np.log(1.0 / x) / K

    coeffs = _fit_global(_even_ext(h), "even", eps / 2, max_degree, "log_poly")
    return _finish(coeffs, "even", "ln(1/x)/K", exact, [(delta, 1.0)], eps), K


@functools.lru_cache(maxsize=256)
def rect_poly(t: float, delta_p: float, eps_p: float, max_degree: int = MAX_DEGREE) -> BoundedPolynomial:
    """Even smoothed indicator of [-t, t].

    The result lies in [1 - eps_p, 1] on [-t + delta_p, t - delta_p], in
    [0, eps_p] outside [-t - delta_p, t + delta_p], and in [0, 1] everywhere.
    """
    _check_eps(delta_p, name="delta_p")
    _check_eps(eps_p, name="eps_p")
    if not -1 <= t <= 1:
        raise InvalidParameterError(f"t={t} outside [-1, 1]")
    t = abs(t)
    if t <= delta_p:
        raise InvalidParameterError(f"empty plateau: need t > delta_p, got t={t}, delta_p={delta_p}")
    k = erfcinv(eps_p / 2) / delta_p

    def target(x):
        return eps_p / 4 + (1 - eps_p / 2) * _box(x, -t, t, k)

    coeffs = _fit_global(target, "even", 0.9 * eps_p / 4, max_degree, "rect_poly")
    plateau = [(-t + delta_p, t - delta_p)]
    stop = [iv for iv in [(-1.0, -t - delta_p), (t + delta_p, 1.0)] if iv[0] < iv[1]]
    one = lambda x: np.ones_like(x)  # noqa: E731
    zero = lambda x: np.zeros_like(x)  # noqa: E731
    certs = [
        _certify(coeffs, "error", plateau, eps_p, one),
        _certify(coeffs, "norm", [(-1.0, 1.0)], 1.0),
    ]
    if stop:
        certs.append(_certify(coeffs, "error", stop, eps_p, zero))
    lowest = float(np.min(_values_on_nodes(coeffs, max(GRID_FACTOR * coeffs.size, MIN_GRID))))
    for rec in certs:
        if rec.max_observed_error > rec.bound or lowest < 0:
            raise ApproximationError(
                f"rect_poly certificate failed on {rec.intervals}", best_error=rec.max_observed_error, degree=coeffs.size - 1
            )
    return BoundedPolynomial(coeffs, "even", tuple(certs), f"rect(t={t})")


@functools.lru_cache(maxsize=256)
def power_poly(c: float, parity: str, delta: float, eps: float, sign: str = "positive", max_degree: int = MAX_DEGREE):
    """Bounded polynomial for x^c / 2 (``sign="positive"``) or delta^c x^-c / 2 (``"negative"``).

    Accuracy is certified on [delta, 1] (and on [-1, -delta] against the
    parity extension). Positive powers are also certified against the
    envelope ``|P(x)| <= |x|^c / 2 + eps`` on all of [-1, 1].

    The positive construction fits |x|^c/2 times one minus an erf rectangle of
    half-width delta/2, so the polynomial is suppressed near 0, never exceeds
    the envelope, and is accurate from delta outward.
    """
    if c <= 0:
        raise InvalidParameterError(f"exponent c={c} must be positive")
    if parity not in ("even", "odd"):
        raise InvalidParameterError(f"parity must be 'even' or 'odd', got {parity!r}")
    _check_eps(delta, name="delta", inclusive=True)
    _check_eps(eps, inclusive=True)
    ext = _even_ext if parity == "even" else _odd_ext

    if sign == "negative":
        center = delta * 2.0 ** (-1.0 / c)
        floor = center / 20
        peak = (delta / floor) ** c / 2

        def h(y):
            return delta**c * np.maximum(y, floor) ** (-c) / 2 * _step(y, center, delta, eps / 4, floor, peak)

        coeffs = _fit_global(ext(h), parity, eps / 2, max_degree, "power_poly(negative)")
        exact = ext(lambda y: delta**c * np.maximum(y, 1e-300) ** (-c) / 2)
        return _finish(coeffs, parity, f"delta^c x^-c/2 (c={c})", exact, [(delta, 1.0), (-1.0, -delta)], eps)

    if sign != "positive":
        raise InvalidParameterError(f"sign must be 'positive' or 'negative', got {sign!r}")

    # (1 - smoothed rectangle of half-width delta/2) times x^c/2, fitted as one
    # smooth product; the complementary erf rectangle is the step below
    def h(y):
        return y**c / 2 * _step(y, delta / 2, delta, eps / 4)

    coeffs = _fit_global(ext(h), parity, eps / 2, max_degree, "power_poly(positive)")
    exact = ext(lambda y: y**c / 2)
    envelope = _certify(coeffs, "envelope", [(-1.0, 1.0)], eps, lambda x: np.abs(x) ** c / 2)
    return _finish(coeffs, parity, f"x^c/2 (c={c})", exact, [(delta, 1.0), (-1.0, -delta)], eps, (envelope,))


@functools.lru_cache(maxsize=256)
def inverse_poly(delta: float, eps: float, max_degree: int = MAX_DEGREE) -> BoundedPolynomial:
    """Odd polynomial within eps of 3 delta / (4x) on [-1, -delta] U [delta, 1], bounded by 1."""
    _check_eps(delta, name="delta", inclusive=True)
    _check_eps(eps, inclusive=True)
    center = 0.8 * delta
    floor = center / 20

    def h(y):
        return 0.75 * delta / np.maximum(y, floor) * _step(y, center, delta, eps / 4, floor, 0.75 * delta / floor)

    coeffs = _fit_global(_odd_ext(h), "odd", eps / 2, max_degree, "inverse_poly")
    exact = lambda x: 0.75 * delta / x  # noqa: E731
    return _finish(coeffs, "odd", "3 delta/(4x)", exact, [(delta, 1.0), (-1.0, -delta)], eps)


def local_poly(f, x0: float, delta: float, eps: float, bound: float, max_degree: int = MAX_DEGREE) -> BoundedPolynomial:
    """Polynomial approximating ``f`` on [delta, 2 x0 - delta] and vanishing away from it.

    ``f`` must be analytic on [0, 2 x0] and bounded there by ``bound``. The
    result satisfies ``|P - f| <= eps`` on [delta, 2 x0 - delta],
    ``|P| <= eps + bound`` on [-1, 1] and ``|P| <= eps`` outside
    [delta/2, 2 x0 - delta/2]. It has no parity; pass it to
    :func:`symmetrize_even`.
    """
    if not 0 < delta < x0 <= 1:
        raise InvalidParameterError(f"need 0 < delta < x0 <= 1, got delta={delta}, x0={x0}")
    _check_eps(eps)
    lo_acc, hi_acc = delta, 2 * x0 - delta
    tol = eps / (4 * max(bound, 1.0))
    k = erfcinv(2 * tol) / (delta / 4)
    edge_lo, edge_hi = lo_acc - delta / 4, hi_acc + delta / 4
    clip_lo, clip_hi = delta / 4, 2 * x0 - delta / 4

    def target(x):
        return _call(f, np.clip(x, clip_lo, clip_hi)) * _box(x, edge_lo, edge_hi, k)

    coeffs = _fit_global(target, "none", eps / 2, max_degree, "local_poly")
    outside = [iv for iv in [(-1.0, delta / 2), (2 * x0 - delta / 2, 1.0)] if iv[0] < iv[1]]
    certs = (
        _certify(coeffs, "error", [(lo_acc, hi_acc)], eps, f),
        _certify(coeffs, "norm", [(-1.0, 1.0)], eps + bound),
        _certify(coeffs, "norm", outside, eps),
    )
    for rec in certs:
        if rec.max_observed_error > rec.bound:
            raise ApproximationError(f"local_poly certificate failed on {rec.intervals}", rec.max_observed_error, coeffs.size - 1)
    return BoundedPolynomial(coeffs, "none", certs, getattr(f, "__name__", "f"))


def symmetrize_even(p_star: BoundedPolynomial, target=None, interval=None, eps=None) -> BoundedPolynomial:
    """Even part construction P(x) = P*(x) + P*(-x).

    In the Chebyshev basis this doubles the even-index coefficients and drops
    the odd ones. If ``target``, ``interval`` and ``eps`` are given, the result
    is re-certified against ``target`` on ``interval``.
    """
    c = np.real(np.asarray(p_star.cheb_coeffs)).astype(float)
    out = np.zeros_like(c)
    out[0::2] = 2 * c[0::2]
    certs = (_certify(out, "norm", [(-1.0, 1.0)], 2 * p_star.coefficient_bound()),)
    if target is not None:
        if interval is None or eps is None:
            raise InvalidParameterError("re-certification needs target, interval and eps together")
        acc = _certify(out, "error", [tuple(interval)], eps, target)
        if acc.max_observed_error > eps:
            raise ApproximationError("symmetrized polynomial misses its accuracy bound", acc.max_observed_error, out.size - 1)
        certs = (acc,) + certs
    return BoundedPolynomial(out, "even", certs, p_star.target_id, p_star.scale)


def require_parity(p: BoundedPolynomial) -> str:
    if p.parity not in ("even", "odd"):
        raise ContractViolationError("polynomial must have definite parity (even or odd)")
    return p.parity


def monomial(k: int) -> BoundedPolynomial:
    """Exact x^k as a bounded polynomial (norm 1 on [-1, 1])."""
    coeffs = C.poly2cheb(np.eye(k + 1)[k])
    parity = "even" if k % 2 == 0 else "odd"
    rec = CertRecord("error", ((-1.0, 1.0),), 0.0, 0.0, 0, lambda x: x**k)
    return BoundedPolynomial(coeffs, parity, (rec,), f"x^{k}")
