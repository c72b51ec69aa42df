"""Applications of the two-party trace estimator.

Every application reduces to one or more estimates of Tr(P(A~) Q(B~)) for
suitable encodings and polynomials, followed by classical post-processing:

* quantum relative entropy and Petz-Renyi divergences of two density matrices,
* the components of A^-1 b for a linear system split between the parties,
* expectation values under short-time evolution with H = H1 + H2.

Each estimate is sized adaptively. A pilot run measures the per-iteration
variance v, every batch then uses N = ceil(3 v / eps_T^2) iterations (so a
batch misses eps_T with probability at most 1/3 by Chebyshev), and the median
of several batches is returned. Because shot counts are drawn as binomials the
cost of a batch does not depend on m, so m is taken generously (64 d^2) to
push the shot-noise terms of the variance down.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import expm

from . import blockenc, numkit, protocol, svt
from .blockenc import BlockEncoding
from .errors import (
    ContractViolationError,
    InvalidInputError,
    InvalidParameterError,
    PreconditionViolationError,
    UnreliableLogError,
)
from .numkit import RngStream, as_matrix, dagger
from .polyapprox import BoundedPolynomial, inverse_poly, log_poly, monomial, power_poly

DEFAULT_SEED = 42
DEFAULT_BATCHES = 9
DEFAULT_C_M = 64
PILOT_N = 1000
MIN_N = 100
SPECTRAL_SLACK = 1e-12
# polynomial share of every error budget; the rest is statistical
POLY_SHARE = 0.1


# ---------------------------------------------------------------------------
# Result types


@dataclass(frozen=True)
class EpsBudget:
    """Split of a requested error into named allocations.

    Attributes:
        requested: the caller's eps.
        allocations: label -> share of eps assigned to that error source.
        achieved: label -> certified or planned error actually reached by that
            source (same units as ``requested``).
    """

    requested: float
    allocations: dict
    achieved: dict = field(default_factory=dict)

    def total(self) -> float:
        return float(sum(self.allocations.values()))

    def to_record(self) -> dict:
        return {"requested": self.requested, "allocations": dict(self.allocations), "achieved": dict(self.achieved)}


@dataclass(frozen=True)
class TraceRun:
    """Median-of-means estimate of Tr(P(A~) Q(B~)) with its sizing.

    Attributes:
        value: median (real and imaginary parts separately) of the batch values.
        batches: the individual batch values.
        N: iterations per batch.
        m: shots per iteration and (unitary, part) pair.
        pilot_variance: per-iteration variance measured by the pilot.
        n_queries: block-encoding queries of pilot and batches together.
    """

    value: complex
    batches: np.ndarray
    N: int
    m: int
    pilot_variance: float
    n_queries: int


@dataclass(frozen=True)
class TraceTerm:
    label: str
    estimate: complex
    K: float
    C: float

    def to_record(self) -> dict:
        return {"label": self.label, "estimate": [self.estimate.real, self.estimate.imag], "K": self.K, "C": self.C}


@dataclass(frozen=True)
class DivergenceResult:
    """Estimated divergence with the trace terms it was assembled from.

    Attributes:
        value: the divergence estimate.
        kind: ``"relative_entropy"`` or ``"renyi"``.
        trace_terms: raw trace estimates with their rescale constants.
        eps_budget: how the requested error was split.
        alpha: Renyi order (``None`` for the relative entropy).
        n_queries: total simulated block-encoding queries.
        metadata: method notes (trace floor, chosen delta, ...).
    """

    value: float
    kind: str
    trace_terms: list
    eps_budget: EpsBudget
    alpha: Optional[float] = None
    n_queries: int = 0
    metadata: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        return {
            "value": self.value,
            "kind": self.kind if self.alpha is None else f"renyi({self.alpha})",
            "trace_terms": [t.to_record() for t in self.trace_terms],
            "eps_budget": self.eps_budget.to_record(),
            "n_queries": self.n_queries,
            "metadata": dict(self.metadata),
        }


@dataclass(frozen=True)
class SolveResult:
    """Approximate solution of A x = b.

    Attributes:
        x_tilde: estimated solution vector.
        per_component_eps: error target of every component.
        residual: ``||A x_tilde - b||``.
        eps_budget: how the requested error was split.
        n_queries: total simulated block-encoding queries.
    """

    x_tilde: np.ndarray
    per_component_eps: float
    residual: float
    eps_budget: EpsBudget
    n_queries: int = 0

    def to_record(self) -> dict:
        return {
            "x_tilde": [[float(v.real), float(v.imag)] for v in self.x_tilde],
            "per_component_eps": self.per_component_eps,
            "residual": self.residual,
            "eps_budget": self.eps_budget.to_record(),
            "n_queries": self.n_queries,
        }


@dataclass(frozen=True)
class SimResult:
    """Estimated expectation value after evolution under H1 + H2.

    Attributes:
        estimate: the estimate S (real part of the trace estimate).
        exact: Tr(M e^{-iHt} rho e^{iHt}) computed directly.
        commutator_norm: ``||[H1, H2]||``.
        t: evolution time.
        eps_budget: how the requested error was split.
        n_queries: total simulated block-encoding queries.
    """

    estimate: float
    exact: float
    commutator_norm: float
    t: float
    eps_budget: EpsBudget
    n_queries: int = 0

    def to_record(self) -> dict:
        return {
            "estimate": self.estimate,
            "exact": self.exact,
            "commutator_norm": self.commutator_norm,
            "t": self.t,
            "eps_budget": self.eps_budget.to_record(),
            "n_queries": self.n_queries,
        }


# ---------------------------------------------------------------------------
# Shared machinery


def estimate_with_budget(
    be_a: BlockEncoding,
    be_b: BlockEncoding,
    poly_f: BoundedPolynomial,
    poly_g: BoundedPolynomial,
    eps_stat: float,
    seed: int,
    label=(),
    *,
    parts: str = "both",
    batches: int = DEFAULT_BATCHES,
    c_m: float = DEFAULT_C_M,
    workers: int = 1,
) -> TraceRun:
    """Estimate Tr(P(A~) Q(B~)) to statistical accuracy ``eps_stat``.

    Args:
        be_a: Alice's encoding.
        be_b: Bob's encoding.
        poly_f: Alice's polynomial.
        poly_g: Bob's polynomial.
        eps_stat: target error of the returned value.
        seed: root seed; ``label`` selects an independent substream.
        label: tuple of stream labels.
        parts: ``"real"`` when only the real part matters, ``"both"`` when the
            complex modulus of the error must stay below ``eps_stat``.
        batches: number of batches in the median.
        c_m: shots per iteration are ``ceil(c_m d^2)``.
        workers: threads per protocol run.
    """
    if eps_stat <= 0:
        raise InvalidParameterError(f"statistical budget {eps_stat} must be positive")
    if parts not in ("real", "both"):
        raise InvalidParameterError(f"parts must be 'real' or 'both', got {parts!r}")
    d = be_a.system_dim
    m = max(1, svt.ceil_guarded(c_m * d * d))
    base = protocol.ProtocolConfig(d, PILOT_N, m, seed, poly_f, poly_g, be_a, be_b, workers=workers)
    base = base.replay(*label)
    parties = protocol.make_parties(base)
    pilot_cfg = base.replay("pilot")
    pilot = protocol.estimate_trace(protocol.run_shots(pilot_cfg, parties), pilot_cfg)
    # empirical_variance of a run is Var(T); per-iteration variance is N times that
    v = pilot.empirical_variance * PILOT_N
    psi = pilot.influence()
    if parts == "real":
        v_target, target = float(np.var(psi.real, ddof=1)), eps_stat
    else:
        # medians are taken per part, so each part gets eps / sqrt(2)
        v_target = max(float(np.var(psi.real, ddof=1)), float(np.var(psi.imag, ddof=1)))
        target = eps_stat / math.sqrt(2)
    N = max(MIN_N, svt.ceil_guarded(3 * v_target / target**2))
    cfg = protocol.ProtocolConfig(d, N, m, seed, poly_f, poly_g, be_a, be_b, workers=workers).replay(*label)
    vals = np.empty(batches, dtype=complex)
    for b in range(batches):
        sub = cfg.replay("batch", b)
        vals[b] = protocol.estimate_trace(protocol.run_shots(sub, parties), sub).value
    value = complex(np.median(vals.real), np.median(vals.imag))
    queries = protocol.n_queries(pilot_cfg) + batches * protocol.n_queries(cfg)
    return TraceRun(value, vals, N, m, v, queries)


def _accuracy(p: BoundedPolynomial) -> float:
    """Certified (grid-observed) approximation error of ``p``, 0 for exact monomials."""
    return max((r.max_observed_error for r in p.certified if r.kind == "error"), default=0.0)


def _square(M, name: str) -> np.ndarray:
    M = as_matrix(M, name)
    if M.shape[0] != M.shape[1]:
        raise InvalidInputError(f"{name} must be square, got {M.shape}")
    return M


def _density(rho, name: str) -> tuple[np.ndarray, np.ndarray]:
    """Validate a density matrix and return it with its eigenvalues (descending)."""
    rho = _square(rho, name)
    try:
        w, _ = numkit.hermitian_eig(rho)
    except ContractViolationError as exc:
        raise InvalidInputError(f"{name} is not Hermitian") from exc
    if w[-1] < -1e-10:
        raise InvalidInputError(f"{name} is not positive semidefinite (eigenvalue {w[-1]:.3e})")
    if abs(w.sum() - 1) > 1e-9:
        raise InvalidInputError(f"{name} has trace {w.sum():.12g}, expected 1")
    return (rho + dagger(rho)) / 2, w


def _require_floor(w: np.ndarray, delta: float, name: str, what: str = "eigenvalue") -> None:
    lowest = float(np.min(w))
    if lowest < delta - SPECTRAL_SLACK:
        raise PreconditionViolationError(f"smallest {what} of {name} is {lowest:.6g} < delta={delta}")


def _check_eps(eps: float) -> None:
    if not 0 < eps <= 1:
        raise InvalidParameterError(f"eps={eps} outside (0, 1]")


def _check_delta(delta: float) -> None:
    if not 0 < delta <= 1:
        raise InvalidParameterError(f"delta={delta} outside (0, 1]")


# ---------------------------------------------------------------------------
# Tr(f(A) g(B)) for named functions


@dataclass(frozen=True)
class FunctionSpec:
    """A named scalar function with its bounded polynomial surrogate.

    ``build(delta, eps)`` returns a polynomial P with ``scale * P ~ func`` on
    [delta, 1] up to ``scale * eps``. ``homogeneity`` is k with
    f(x / beta) = f(x) / beta^k, or ``None`` when f is not homogeneous.
    """

    name: str
    parity: str
    func: object
    homogeneity: Optional[float]
    exact: bool
    lipschitz: Optional[float]

    def build(self, delta: float, eps: float) -> tuple[BoundedPolynomial, float]:
        if self.name == "identity":
            return monomial(1), 1.0
        if self.name == "square":
            return monomial(2), 1.0
        if self.name == "sqrt":
            return power_poly(0.5, "even", delta, eps), 2.0
        if self.name == "inverse":
            return inverse_poly(delta, eps), 4.0 / (3.0 * delta)
        if self.name == "neg_log":
            p, K = log_poly(delta, eps)
            return p, K
        raise InvalidInputError(f"unknown function label {self.name!r}")

    def scale(self, delta: float) -> float:
        """Rescale constant without building the polynomial."""
        return {"identity": 1.0, "square": 1.0, "sqrt": 2.0, "inverse": 4.0 / (3.0 * delta), "neg_log": 2.0 * math.log(2.0 / delta)}[
            self.name
        ]

    def lipschitz_on(self, delta: float) -> float:
        """Lipschitz constant of the function on [delta, 1]."""
        return {"identity": 1.0, "square": 2.0, "sqrt": 0.5 / math.sqrt(delta), "inverse": 1.0 / delta**2, "neg_log": 1.0 / delta}[self.name]


FUNCTIONS = {
    "identity": FunctionSpec("identity", "odd", lambda x: x, 1.0, True, 1.0),
    "square": FunctionSpec("square", "even", lambda x: x**2, 2.0, True, 2.0),
    "sqrt": FunctionSpec("sqrt", "even", np.sqrt, 0.5, False, None),
    "inverse": FunctionSpec("inverse", "odd", lambda x: 1.0 / x, -1.0, False, None),
    "neg_log": FunctionSpec("neg_log", "even", lambda x: np.log(1.0 / x), None, False, None),
}


def function_spec(label: str) -> FunctionSpec:
    try:
        return FUNCTIONS[label]
    except KeyError:
        raise InvalidInputError(f"unknown function label {label!r}; known: {sorted(FUNCTIONS)}") from None


def exact_trace_fg(A, B, f_id: str, g_id: str) -> complex:
    """Tr(f(A) g(B)) with f, g applied to singular values (eigenvalues for PSD inputs)."""
    f, g = function_spec(f_id), function_spec(g_id)
    with np.errstate(divide="ignore"):
        FA = svt.apply_function_sv(A, f.func, f.parity)
        GB = svt.apply_function_sv(B, g.func, g.parity)
    return complex(np.trace(FA @ GB))


@dataclass(frozen=True)
class TraceFGResult:
    value: complex
    run: TraceRun
    rescale: float
    eps_budget: EpsBudget


def estimate_trace_fg(
    A,
    B,
    f_id: str,
    g_id: str,
    eps: float,
    delta: float,
    mode: str = "exact_homogeneous",
    *,
    be_a: BlockEncoding | None = None,
    be_b: BlockEncoding | None = None,
    beta_a: float | None = None,
    beta_b: float | None = None,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
    batches: int = DEFAULT_BATCHES,
    return_details: bool = False,
):
    """Estimate Tr(f(A) g(B)) for named functions f and g.

    Args:
        A: Alice's matrix.
        B: Bob's matrix.
        f_id: label of f (``identity``, ``square``, ``sqrt``, ``inverse``, ``neg_log``).
        g_id: label of g.
        eps: additive error target.
        delta: lower bound on the singular values of the encoded blocks
            where an approximate polynomial is used.
        mode: ``"exact_homogeneous"`` builds exact dilations of ``A / beta``
            and undoes the scale using homogeneity; ``"lipschitz_approx"``
            uses the supplied (possibly inexact) encodings ``be_a``/``be_b``.
        be_a: Alice's encoding, required in ``lipschitz_approx`` mode.
        be_b: Bob's encoding, required in ``lipschitz_approx`` mode.
        beta_a: encoding scale of A (default 1 if ``||A|| <= 1`` else d).
        beta_b: encoding scale of B.
        seed: root seed.
        workers: threads per protocol run.
        batches: batches in the median.
        return_details: return a :class:`TraceFGResult` instead of the value.

    Returns:
        The complex estimate (or the detailed result).

    Raises:
        PreconditionViolationError: an encoded block has a singular value
            below ``delta`` on a side that uses an approximate polynomial.
        InvalidInputError: unknown function label or inconsistent inputs.
    """
    f, g = function_spec(f_id), function_spec(g_id)
    _check_eps(eps)
    _check_delta(delta)
    A, B = _square(A, "A"), _square(B, "B")
    if A.shape != B.shape:
        raise InvalidInputError(f"A and B have different shapes {A.shape} and {B.shape}")
    d = A.shape[0]

    if mode == "exact_homogeneous":
        betas = []
        for M, beta in ((A, beta_a), (B, beta_b)):
            if beta is None:
                beta = 1.0 if numkit.norm(M) <= 1 + SPECTRAL_SLACK else float(d)
            betas.append(float(beta))
        be_a, be_b = blockenc.dilate(A, betas[0]), blockenc.dilate(B, betas[1])
    elif mode == "lipschitz_approx":
        if be_a is None or be_b is None:
            raise InvalidInputError("lipschitz_approx mode needs be_a and be_b")
        betas = [be_a.beta, be_b.beta]
    else:
        raise InvalidParameterError(f"unknown mode {mode!r}")

    homog = 1.0
    for spec, beta, name in ((f, betas[0], "f"), (g, betas[1], "g")):
        if beta != 1.0:
            if spec.homogeneity is None:
                raise InvalidInputError(f"{name}={spec.name} is not homogeneous; encode with beta=1")
            homog *= beta**spec.homogeneity

    for spec, be, name in ((f, be_a, "A"), (g, be_b, "B")):
        if not spec.exact:
            s = np.linalg.svd(blockenc.top_left_block(be), compute_uv=False)
            _require_floor(s, delta, f"the encoded block of {name}", "singular value")

    scale = f.scale(delta) * g.scale(delta) * homog
    n_approx = (not f.exact) + (not g.exact)
    eps_poly_each = POLY_SHARE * eps / (3 * d * scale * max(n_approx, 1))
    poly_f, _ = f.build(delta, eps_poly_each)
    poly_g, _ = g.build(delta, eps_poly_each)
    poly_alloc = POLY_SHARE * eps if n_approx else 0.0
    eps_stat = (eps - poly_alloc) / scale
    run = estimate_with_budget(be_a, be_b, poly_f, poly_g, eps_stat, seed, ("trace_fg",), workers=workers, batches=batches)
    achieved_poly = 3 * d * scale * (_accuracy(poly_f) + _accuracy(poly_g))
    budget = EpsBudget(
        eps,
        {"polynomial": poly_alloc, "statistical": eps - poly_alloc},
        {"polynomial": achieved_poly, "statistical": eps_stat * scale},
    )
    value = scale * run.value
    if return_details:
        return TraceFGResult(value, run, scale, budget)
    return value


# ---------------------------------------------------------------------------
# Divergences


def exact_relative_entropy(rho, sigma) -> float:
    """Tr(rho (ln rho - ln sigma)) via eigendecompositions (full-rank sigma)."""
    w, v = numkit.hermitian_eig(rho)
    s, u = numkit.hermitian_eig(sigma)
    with np.errstate(divide="ignore", invalid="ignore"):
        term_rho = float(np.sum(np.where(w > 0, w * np.log(np.where(w > 0, w, 1.0)), 0.0)))
    log_sigma = (u * np.log(s)) @ dagger(u)
    return float(term_rho - np.trace(as_matrix(rho) @ log_sigma).real)


def exact_renyi_trace(rho, sigma, alpha: float) -> float:
    """Tr(rho^alpha sigma^(1 - alpha)) via eigendecompositions."""
    def power(M, c):
        return numkit.matrix_function_hermitian(M, lambda w: np.where(w > 0, np.abs(w) ** c, 0.0))

    return float(np.trace(power(rho, alpha) @ power(sigma, 1 - alpha)).real)


def exact_renyi(rho, sigma, alpha: float) -> float:
    """Petz-Renyi divergence ln Tr(rho^alpha sigma^(1 - alpha)) / (alpha - 1)."""
    if alpha == 1:
        raise InvalidParameterError("alpha = 1 is the relative entropy")
    return math.log(exact_renyi_trace(rho, sigma, alpha)) / (alpha - 1)


def relative_entropy(
    rho,
    sigma,
    eps: float,
    delta: float,
    *,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
    batches: int = DEFAULT_BATCHES,
) -> DivergenceResult:
    """Estimate D(rho || sigma) = Tr(rho ln rho) - Tr(rho ln sigma).

    Both terms are Tr(rho * P(X)) with P ~ ln(1/x)/K, X = sigma for the cross
    term and X = rho for the self term; Alice holds rho with the identity
    polynomial. D = K [Tr(rho P(sigma)) - Tr(rho P(rho))].

    Budget: each term gets eps/(20K) of polynomial error and 0.45 eps / K of
    statistical error, so the rescaled total stays below eps.

    Raises:
        PreconditionViolationError: an eigenvalue of rho or sigma is below delta.
    """
    _check_eps(eps)
    _check_delta(delta)
    rho, w_rho = _density(rho, "rho")
    sigma, w_sigma = _density(sigma, "sigma")
    if rho.shape != sigma.shape:
        raise InvalidInputError("rho and sigma have different dimensions")
    _require_floor(w_rho, delta, "rho")
    _require_floor(w_sigma, delta, "sigma")

    K = 2.0 * math.log(2.0 / delta)
    C = max(1.0, math.log(1.0 / delta))
    eps_poly = eps / (20 * K)
    p_log, _ = log_poly(delta, eps_poly)
    ident = monomial(1)
    be_rho, be_sigma = blockenc.dilate(rho), blockenc.dilate(sigma)
    eps_stat = 0.45 * eps / K
    cross = estimate_with_budget(be_rho, be_sigma, ident, p_log, eps_stat, seed, ("rel", "cross"), parts="real", workers=workers, batches=batches)
    self_term = estimate_with_budget(be_rho, be_rho, ident, p_log, eps_stat, seed, ("rel", "self"), parts="real", workers=workers, batches=batches)
    value = K * (cross.value.real - self_term.value.real)
    achieved = K * _accuracy(p_log)
    budget = EpsBudget(
        eps,
        {"poly:Tr(rho ln sigma)": K * eps_poly, "poly:Tr(rho ln rho)": K * eps_poly, "stat:Tr(rho ln sigma)": K * eps_stat, "stat:Tr(rho ln rho)": K * eps_stat},
        {"poly:Tr(rho ln sigma)": achieved, "poly:Tr(rho ln rho)": achieved},
    )
    terms = [
        TraceTerm("Tr(rho ln sigma)", -K * cross.value, K, C),
        TraceTerm("Tr(rho ln rho)", -K * self_term.value, K, C),
    ]
    meta = {"delta": delta, "degree": p_log.degree, "N": [cross.N, self_term.N], "m": cross.m}
    return DivergenceResult(value, "relative_entropy", terms, budget, None, cross.n_queries + self_term.n_queries, meta)


def default_trace_floor(alpha: float, delta: float, rank: int) -> float:
    """Lower bound assumed for Tr(rho^alpha sigma^(1 - alpha)).

    For alpha > 1 the Petz divergence is non-negative, so the trace is at least
    1. For alpha < 1 no bound follows from the inputs; delta^(|1 - alpha| r) is
    used as a heuristic.
    """
    if alpha > 1:
        return 1.0
    return delta ** (abs(1 - alpha) * rank)


def renyi_entropy(
    rho,
    sigma,
    alpha: float,
    eps: float,
    delta: float | None = None,
    rank: int | None = None,
    *,
    t_floor: float | None = None,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
    batches: int = DEFAULT_BATCHES,
) -> DivergenceResult:
    """Estimate the Petz-Renyi divergence ln Tr(rho^alpha sigma^(1-alpha)) / (alpha - 1).

    Alice transforms rho with P ~ x^alpha / 2. For alpha > 1 Bob uses
    Q ~ delta^(alpha-1) x^(1-alpha) / 2, so the trace is 4 / delta^(alpha-1)
    times Tr(PQ); for alpha < 1 Bob uses Q ~ x^(1-alpha) / 2 and the factor is 4.

    The trace is estimated to ``eps_tr = eps |alpha-1| T / (1 + eps |alpha-1|)``
    where T is a lower bound on the true trace (``t_floor``), which keeps the
    error of the logarithm below eps. One tenth of eps_tr goes to the
    polynomials, the rest is statistical.

    Args:
        rho: Alice's density matrix.
        sigma: Bob's density matrix.
        alpha: order, positive and not 1.
        eps: error target for the divergence.
        delta: eigenvalue floor of both states. Required for alpha > 1. For
            alpha < 1 it selects direct certification on [delta, 1]; without
            it the rank-based recipe delta = (eps')^(1/min(alpha, 1-alpha)),
            eps' = eps_tr / (8 r) is used, which is only affordable for
            loose targets.
        rank: upper bound on the ranks (default d); used when alpha < 1.
        t_floor: lower bound on the true trace (see :func:`default_trace_floor`).
        seed: root seed.
        workers: threads per protocol run.
        batches: batches in the median.

    Raises:
        InvalidParameterError: alpha = 1 or alpha <= 0.
        UnreliableLogError: the estimated trace is below ``t_floor - eps_tr``.
    """
    if alpha <= 0 or alpha == 1:
        raise InvalidParameterError(f"alpha={alpha} must be positive and different from 1")
    _check_eps(eps)
    rho, w_rho = _density(rho, "rho")
    sigma, w_sigma = _density(sigma, "sigma")
    if rho.shape != sigma.shape:
        raise InvalidInputError("rho and sigma have different dimensions")
    d = rho.shape[0]
    r = d if rank is None else int(rank)
    if not 1 <= r <= d:
        raise InvalidParameterError(f"rank={rank} outside [1, {d}]")

    if alpha > 1:
        if delta is None:
            raise InvalidParameterError("alpha > 1 needs an eigenvalue floor delta")
        _check_delta(delta)
        _require_floor(w_rho, delta, "rho")
        _require_floor(w_sigma, delta, "sigma")
        path = "direct"
        R = 4.0 / delta ** (alpha - 1)
    else:
        if delta is not None:
            _check_delta(delta)
            _require_floor(w_rho, delta, "rho")
            _require_floor(w_sigma, delta, "sigma")
            path = "direct"
        else:
            path = "rank"
        R = 4.0

    floor_delta = delta if delta is not None else float(np.min(np.concatenate([w_rho[:r], w_sigma[:r]])))
    T_floor = float(t_floor) if t_floor is not None else default_trace_floor(alpha, max(floor_delta, 1e-300), r)
    if T_floor <= 0:
        raise InvalidParameterError(f"t_floor={T_floor} must be positive")
    a1 = abs(alpha - 1)
    eps_tr = eps * a1 * T_floor / (1 + eps * a1)

    if path == "direct":
        # |Tr(PQ) - Tr(fg)| <= eps_p (||Q||_1 + ||f||_1) <= 2 d eps_p at the P level
        eps_p = POLY_SHARE * eps_tr / (2 * d * R)
        delta_used = delta
    else:
        bar = min(alpha, 1 - alpha)
        eps_p = POLY_SHARE * eps_tr / R / (8 * r)
        delta_used = eps_p ** (1 / bar)
    eps_p = min(eps_p, 0.5)
    poly_f = power_poly(float(alpha), "even", delta_used, eps_p)
    if alpha > 1:
        poly_g = power_poly(float(alpha - 1), "even", delta_used, eps_p, sign="negative")
    else:
        poly_g = power_poly(float(1 - alpha), "even", delta_used, eps_p)

    eps_stat = (1 - POLY_SHARE) * eps_tr / R
    run = estimate_with_budget(
        blockenc.dilate(rho), blockenc.dilate(sigma), poly_f, poly_g, eps_stat, seed, ("renyi",), parts="real", workers=workers, batches=batches
    )
    trace = R * run.value.real
    if trace < T_floor - eps_tr:
        raise UnreliableLogError(f"estimated trace {trace:.6g} is below the floor {T_floor:.6g} minus its error {eps_tr:.3g}")
    value = math.log(max(trace, T_floor - eps_tr)) / (alpha - 1)

    # log-level shares: the trace error eps_tr maps to at most eps at the divergence level
    budget = EpsBudget(
        eps,
        {"polynomial": POLY_SHARE * eps, "statistical": (1 - POLY_SHARE) * eps},
        {"trace_error_target": eps_tr, "polynomial_trace_level": 2 * d * R * max(_accuracy(poly_f), _accuracy(poly_g))},
    )
    C = max(1.0, delta_used ** (1 - alpha)) if alpha > 1 else 1.0
    terms = [TraceTerm("Tr(rho^a sigma^(1-a))", complex(R * run.value), R, C)]
    meta = {
        "path": path,
        "delta": delta_used,
        "t_floor": T_floor,
        "t_floor_is_default": t_floor is None,
        "log_error_propagation": "|ln a - ln b| <= |a - b| / min(a, b) with min(a, b) >= t_floor - eps_tr",
        "degrees": [poly_f.degree, poly_g.degree],
        "N": run.N,
        "m": run.m,
    }
    return DivergenceResult(value, "renyi", terms, budget, float(alpha), run.n_queries, meta)


# ---------------------------------------------------------------------------
# Linear systems


def linear_solve(
    A,
    b,
    eps: float,
    delta: float,
    *,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
    batches: int = DEFAULT_BATCHES,
) -> SolveResult:
    """Estimate x = A^-1 b component by component.

    Alice encodes A^dagger (the adjoint of the dilation of A) and applies the
    odd polynomial P ~ 3 delta / (4x), whose singular value transform of
    A^dagger is (3 delta / 4) A^-1. Bob encodes B_k = |b><k| with the identity
    polynomial. Then Tr(P Q) = (3 delta / 4) x_k.

    Every component gets eps / sqrt(d) so the vector error is at most eps;
    10% of it is polynomial error and 90% statistical.

    Raises:
        PreconditionViolationError: ``sigma_min(A) < delta`` or ``||A|| > 1``.
        InvalidInputError: ``b`` is not a unit vector of matching length.
    """
    _check_eps(eps)
    _check_delta(delta)
    A = _square(A, "A")
    d = A.shape[0]
    b = np.asarray(b, dtype=np.complex128).reshape(-1)
    if b.size != d:
        raise InvalidInputError(f"b has length {b.size}, expected {d}")
    if abs(np.linalg.norm(b) - 1) > 1e-9:
        raise InvalidInputError(f"b must be a unit vector, got norm {np.linalg.norm(b):.12g}")
    s = np.linalg.svd(A, compute_uv=False)
    _require_floor(s, delta, "A", "singular value")
    be_a = blockenc.dilate(A).adjoint()

    eps_c = eps / math.sqrt(d)
    scale = 4.0 / (3.0 * delta)
    poly = inverse_poly(delta, POLY_SHARE * eps_c / scale)
    eps_stat = (1 - POLY_SHARE) * eps_c / scale
    ident = monomial(1)
    x = np.empty(d, dtype=complex)
    queries = 0
    for k in range(d):
        Bk = np.outer(b, np.eye(d)[k])
        run = estimate_with_budget(be_a, blockenc.dilate(Bk), poly, ident, eps_stat, seed, ("solve", k), workers=workers, batches=batches)
        x[k] = scale * run.value
        queries += run.n_queries
    residual = float(np.linalg.norm(A @ x - b))
    budget = EpsBudget(
        eps,
        {"polynomial": POLY_SHARE * eps, "statistical": (1 - POLY_SHARE) * eps},
        {"polynomial": math.sqrt(d) * scale * _accuracy(poly)},
    )
    return SolveResult(x, eps_c, residual, budget, queries)


# ---------------------------------------------------------------------------
# Hamiltonian simulation


def commutator_norm(H1, H2) -> float:
    """Spectral norm of H1 H2 - H2 H1."""
    H1, H2 = _square(H1, "H1"), _square(H2, "H2")
    if H1.shape != H2.shape:
        raise InvalidInputError(f"H1 and H2 have different shapes {H1.shape} and {H2.shape}")
    return numkit.norm(H1 @ H2 - H2 @ H1)


def _evolution(H, t: float) -> np.ndarray:
    """e^{-iHt} through the eigendecomposition."""
    return numkit.matrix_function_hermitian(H, lambda w: np.exp(-1j * w * t))


def exact_expectation(H1, H2, M, rho_init, t: float) -> float:
    U = expm(-1j * (as_matrix(H1) + as_matrix(H2)) * t)
    return float(np.trace(as_matrix(M) @ U @ as_matrix(rho_init) @ dagger(U)).real)


def hamiltonian_expectation(
    H1,
    H2,
    M,
    rho_init,
    t: float,
    eps: float,
    *,
    t_cap: float | None = None,
    encoding_eps: float = 0.0,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
    batches: int = DEFAULT_BATCHES,
) -> SimResult:
    """Estimate Tr(M e^{-iHt} rho e^{iHt}) for H = H1 + H2 held by two parties.

    Alice holds P = V1 M U1 and Bob holds Q = U2 rho V2 with U_i = e^{-iH_i t}
    and V_i = e^{iH_i t}, so Tr(PQ) = Tr(M U1 U2 rho V2 V1). The product
    formula error is at most t^2 ||[H1, H2]||.

    Args:
        H1: Alice's Hamiltonian.
        H2: Bob's Hamiltonian.
        M: observable with ``||M|| <= 1``.
        rho_init: initial density matrix.
        t: evolution time, at most ``t_cap``.
        eps: statistical error target.
        t_cap: largest admissible time (default ``1 / sqrt(d)``).
        encoding_eps: when positive, each U_i, V_i is replaced by the block of
            a perturbed encoding of that accuracy, and the induced error
            (at most 4 encoding_eps) is taken out of ``eps``.
        seed: root seed.
        workers: threads per protocol run.
        batches: batches in the median.

    Raises:
        InvalidParameterError: ``t`` outside [0, t_cap] or the encoding
            error leaves no statistical budget.
        ContractViolationError: a Hamiltonian or M is not Hermitian.
    """
    _check_eps(eps)
    H1, H2, M = _square(H1, "H1"), _square(H2, "H2"), _square(M, "M")
    if not (H1.shape == H2.shape == M.shape):
        raise InvalidInputError("H1, H2 and M must have the same shape")
    for name, X in (("H1", H1), ("H2", H2), ("M", M)):
        if not numkit.is_hermitian(X, 1e-10 * max(1.0, float(np.max(np.abs(X))))):
            raise ContractViolationError(f"{name} is not Hermitian")
    rho, _ = _density(rho_init, "rho_init")
    d = H1.shape[0]
    cap = 1 / math.sqrt(d) if t_cap is None else float(t_cap)
    if not 0 <= t <= cap:
        raise InvalidParameterError(f"t={t} outside [0, {cap:.6g}]")
    if numkit.norm(M) > 1 + SPECTRAL_SLACK:
        raise PreconditionViolationError(f"||M|| = {numkit.norm(M):.6g} exceeds 1")

    U1, U2 = _evolution(H1, t), _evolution(H2, t)
    V1, V2 = dagger(U1), dagger(U2)
    if encoding_eps > 0:
        stream = RngStream(seed, ("hamsim", "encodings"))
        U1, V1, U2, V2 = (
            blockenc.top_left_block(blockenc.perturbed(X, 1.0, encoding_eps, stream.child(i))) for i, X in enumerate((U1, V1, U2, V2))
        )
    eps_enc = 4 * encoding_eps
    eps_stat = eps - eps_enc
    if eps_stat <= 0:
        raise InvalidParameterError(f"encoding error {eps_enc:.3g} uses the whole budget eps={eps}")

    P = V1 @ M @ U1
    Q = U2 @ rho @ V2
    ident = monomial(1)
    run = estimate_with_budget(blockenc.dilate(P), blockenc.dilate(Q), ident, ident, eps_stat, seed, ("hamsim",), parts="real", workers=workers, batches=batches)
    budget = EpsBudget(eps, {"encoding": eps_enc, "statistical": eps_stat})
    return SimResult(float(run.value.real), exact_expectation(H1, H2, M, rho, t), commutator_norm(H1, H2), float(t), budget, run.n_queries)
