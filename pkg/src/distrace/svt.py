"""Polynomial singular value transformations and Hadamard-test statistics.

The transformed block P(A~) that a QSVT circuit would expose is computed
directly from an SVD; phase factors are never synthesised because the
measurement statistics depend only on that block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import numkit
from .errors import ContractViolationError, InternalConsistencyError, InvalidInputError, InvalidParameterError
from .numkit import as_matrix, dagger
from .polyapprox import BoundedPolynomial, require_parity

NORM_SLACK = 1e-10
PROB_SLACK = 1e-10


@dataclass(frozen=True)
class TransformedBlock:
    """P(A~) with its Hermitian and anti-Hermitian parts.

    ``value = hermitian_part + 1j * antihermitian_part`` where both parts are
    Hermitian: ``(P + P^dagger) / 2`` and ``(P - P^dagger) / (2i)``.
    """

    value: np.ndarray
    hermitian_part: np.ndarray
    antihermitian_part: np.ndarray
    source_poly_degree: int

    @classmethod
    def from_matrix(cls, P, degree: int = 0) -> "TransformedBlock":
        P = as_matrix(P, "P")
        Pd = dagger(P)
        return cls(P, (P + Pd) / 2, (P - Pd) / 2j, int(degree))

    @property
    def dim(self) -> int:
        return self.value.shape[0]


def _check_block(block) -> np.ndarray:
    block = as_matrix(block, "block")
    if block.shape[0] != block.shape[1]:
        raise InvalidInputError(f"block must be square, got {block.shape}")
    return block


def apply_function_sv(block, func, parity: str) -> np.ndarray:
    """Singular value transformation by an arbitrary scalar function.

    Odd: ``sum func(z_i) |left_i><right_i|``; even: ``sum func(z_i) |right_i><right_i|``.
    """
    f = numkit.svd(_check_block(block))
    vals = func(f.singular_values)
    if parity == "odd":
        return (f.left * vals) @ dagger(f.right)
    if parity == "even":
        return (f.right * vals) @ dagger(f.right)
    raise ContractViolationError(f"parity must be 'even' or 'odd', got {parity!r}")


def apply_poly_sv(block, p: BoundedPolynomial) -> TransformedBlock:
    """P^(SV)(block) for a parity-definite bounded polynomial."""
    parity = require_parity(p)
    block = _check_block(block)
    nrm = numkit.norm(block)
    if nrm > 1 + NORM_SLACK:
        raise InvalidInputError(f"block norm {nrm:.6g} exceeds 1")
    P = apply_function_sv(block, lambda s: p(np.minimum(s, 1.0)), parity)
    return TransformedBlock.from_matrix(P, p.degree)


def apply_poly_ev(rho, p: BoundedPolynomial) -> TransformedBlock:
    """Eigenvalue transformation sum p(l_i)|v_i><v_i| of a PSD contraction."""
    w, v = numkit.hermitian_eig(rho)
    if w.min() < -NORM_SLACK:
        raise ContractViolationError(f"matrix is not PSD (min eigenvalue {w.min():.3e})")
    if w.max() > 1 + NORM_SLACK:
        raise InvalidInputError(f"norm {w.max():.6g} exceeds 1")
    P = (v * p(np.clip(w, 0.0, 1.0))) @ dagger(v)
    return TransformedBlock.from_matrix(P, p.degree)


def _expectations(part: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    return np.real(np.einsum("...i,ij,...j->...", vecs.conj(), part, vecs))


def outcome_p0(t: TransformedBlock, vecs: np.ndarray, phase_flag: int) -> np.ndarray:
    """Probability of outcome 0 for a batch of input states ``vecs`` (shape (..., d)).

    Flag 0 gives ``(1 + <v|A_Re|v>) / 2``; flag 1 (S gate) gives ``(1 - <v|A_Im|v>) / 2``.
    """
    if phase_flag == 0:
        p0 = 0.5 * (1 + _expectations(t.hermitian_part, vecs))
    elif phase_flag == 1:
        p0 = 0.5 * (1 - _expectations(t.antihermitian_part, vecs))
    else:
        raise InvalidParameterError(f"phase_flag must be 0 or 1, got {phase_flag!r}")
    lo, hi = float(np.min(p0)), float(np.max(p0))
    if lo < -PROB_SLACK or hi > 1 + PROB_SLACK:
        raise InternalConsistencyError(f"outcome probability {lo if lo < 0 else hi:.12g} outside [0, 1]")
    return np.clip(p0, 0.0, 1.0)


def hadamard_outcome_probs(t: TransformedBlock, u_mat, phase_flag: int) -> tuple[float, float]:
    """Outcome distribution of the Hadamard test on ``U|0>``.

    Returns:
        ``(p0, p1)`` with ``p0 + p1 == 1``.
    """
    U = as_matrix(u_mat, "u_mat")
    if U.shape != t.value.shape:
        raise InvalidInputError(f"unitary shape {U.shape} does not match block {t.value.shape}")
    p0 = float(outcome_p0(t, U[:, 0], phase_flag))
    return p0, 1.0 - p0


def ceil_guarded(x: float) -> int:
    """Ceiling that ignores float noise just above an integer (1/0.1**2 = 100.00000000000001)."""
    return int(math.ceil(x - 1e-9 * max(1.0, abs(x))))


def degree_budget(delta: float, eps: float, c: float = 4.0) -> int:
    """Reported query count ceil((c / delta) ln(1 / eps)), at least 1."""
    if not 0 < delta <= 1:
        raise InvalidParameterError(f"delta={delta} outside (0, 1]")
    if not 0 < eps <= 1:
        raise InvalidParameterError(f"eps={eps} outside (0, 1]")
    return max(1, ceil_guarded((c / delta) * math.log(1 / eps)))
