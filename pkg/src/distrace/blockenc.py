"""Block-encodings at matrix level.

A block-encoding of a d x d matrix A is a unitary U on ``2**a * d``
dimensions whose top-left d x d block, scaled by ``beta``, is within ``eps``
of A. The ancilla register is the most significant one, so
``(<0|_a (x) I) U (|0>_a (x) I)`` is simply ``U[:d, :d]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numkit
from .errors import InvalidInputError, InvalidParameterError, ScaleViolationError
from .numkit import RandomSource, as_matrix, dagger

UNITARY_TOL = 1e-10
VERIFY_SLACK = 1e-10


@dataclass(frozen=True)
class BlockEncoding:
    """A ``(beta, ancillas, eps)`` block-encoding.

    Attributes:
        unitary: square unitary of dimension ``2**ancillas * system_dim``.
        beta: scale factor.
        ancillas: number of ancilla qubits.
        eps: encoding error ``||A - beta * block||`` it is claimed to satisfy.
        system_dim: dimension of the encoded matrix (``2**s`` for s qubits).
    """

    unitary: np.ndarray
    beta: float
    ancillas: int
    eps: float
    system_dim: int

    def __post_init__(self):
        U = np.array(self.unitary, dtype=np.complex128)
        expected = (2**self.ancillas) * self.system_dim
        if U.shape != (expected, expected):
            raise InvalidInputError(f"unitary has shape {U.shape}, expected {(expected, expected)}")
        if self.beta <= 0:
            raise InvalidParameterError(f"beta={self.beta} must be positive")
        if self.eps < 0:
            raise InvalidParameterError(f"eps={self.eps} must be non-negative")
        res = numkit.unitarity_residual(U)
        if res > UNITARY_TOL:
            raise InvalidInputError(f"matrix is not unitary (residual {res:.3e})")
        U.setflags(write=False)
        object.__setattr__(self, "unitary", U)

    @property
    def system_qubits(self) -> int | None:
        s = self.system_dim.bit_length() - 1
        return s if 2**s == self.system_dim else None

    def adjoint(self) -> "BlockEncoding":
        """The inverse unitary, a block-encoding of A^dagger with the same parameters."""
        return BlockEncoding(dagger(self.unitary), self.beta, self.ancillas, self.eps, self.system_dim)


def top_left_block(be: BlockEncoding) -> np.ndarray:
    """The effective block ``(<0|_a (x) I) U (|0>_a (x) I)``."""
    d = be.system_dim
    return be.unitary[:d, :d].copy()


def verify(be: BlockEncoding, target) -> tuple[bool, float]:
    """Check ``||target - beta * block|| <= eps`` (spectral norm, 1e-10 slack)."""
    target = as_matrix(target, "target")
    if target.shape != (be.system_dim, be.system_dim):
        raise InvalidInputError(f"target shape {target.shape} does not match system dimension {be.system_dim}")
    residual = numkit.norm(target - be.beta * top_left_block(be))
    return residual <= be.eps + VERIFY_SLACK, residual


def _dilation(X: np.ndarray) -> np.ndarray:
    """[[X, sqrt(I - X X^dag)], [sqrt(I - X^dag X), -X^dag]] built from one SVD.

    With X = L diag(s) R^dag both square roots share the factor
    sqrt(1 - s^2) (clipped at 0), so singular values at 0 or 1 do not lose
    half their digits the way an eigendecomposition of I - X X^dag would.
    """
    L, s, Rh = np.linalg.svd(X)
    R = dagger(Rh)
    c = np.sqrt(np.clip((1 - s) * (1 + s), 0.0, None))
    top_right = (L * c) @ dagger(L)
    bottom_left = (R * c) @ dagger(R)
    return np.block([[X, top_right], [bottom_left, -dagger(X)]])


def dilate(A, beta: float = 1.0) -> BlockEncoding:
    """Exact one-ancilla unitary dilation of ``A / beta``.

    Raises:
        ScaleViolationError: if ``||A / beta|| > 1``.
    """
    A = as_matrix(A, "A")
    if A.shape[0] != A.shape[1]:
        raise InvalidInputError(f"A must be square, got {A.shape}")
    if beta <= 0:
        raise InvalidParameterError(f"beta={beta} must be positive")
    X = A / beta
    nrm = numkit.norm(X)
    if nrm > 1 + 1e-12:
        raise ScaleViolationError(f"||A/beta|| = {nrm:.6g} exceeds 1; increase beta")
    return BlockEncoding(_dilation(X), float(beta), 1, 0.0, A.shape[0])


def from_entry_access(A) -> BlockEncoding:
    """Encoding built from entry reads: beta = d, valid when every |A_ij| <= 1."""
    A = as_matrix(A, "A")
    if np.max(np.abs(A)) > 1 + 1e-12:
        raise ScaleViolationError("entry access needs |A_ij| <= 1")
    return dilate(A, float(A.shape[0]))


def _unitary_with_first_column(psi: np.ndarray) -> np.ndarray:
    n = psi.size
    M = np.eye(n, dtype=np.complex128)
    M[:, 0] = psi
    # keep the basis well conditioned when psi is close to some e_k (k > 0)
    k = int(np.argmax(np.abs(psi)))
    if k != 0:
        M[:, k] = np.eye(n)[:, 0]
    q, r = np.linalg.qr(M)
    return q * (r[0, 0] / abs(r[0, 0]))


def partial_trace_ancilla(psi, system_dim: int) -> np.ndarray:
    """Reduced state on the system register of ``|psi>`` ordered as (ancilla, system)."""
    psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
    Psi = psi.reshape(-1, system_dim)
    return Psi.T @ Psi.conj()


def from_purification(psi, system_dim: int | None = None) -> tuple[np.ndarray, BlockEncoding]:
    """Reduced state of a purification together with an exact block-encoding of it.

    ``psi`` is ordered (ancilla, system). The encoding is
    ``(G^dagger (x) I) SWAP (G (x) I)`` on registers (ancilla, copy, system),
    where G prepares ``psi`` on (ancilla, copy) and SWAP exchanges copy and
    system. Its top-left block is the reduced state.

    Args:
        psi: unit vector of length ``2**a * system_dim``.
        system_dim: dimension of the system register; defaults to the square
            root of the length when that is an integer.

    Returns:
        ``(rho, be)`` where ``be`` has ``beta = 1`` and ``eps = 0``.
    """
    psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
    if not np.all(np.isfinite(psi)):
        raise InvalidInputError("psi has non-finite entries")
    if abs(np.linalg.norm(psi) - 1) > 1e-12:
        raise InvalidInputError(f"psi must be normalised, got norm {np.linalg.norm(psi):.15g}")
    n = psi.size
    if system_dim is None:
        root = int(round(np.sqrt(n)))
        if root * root != n:
            raise InvalidInputError("cannot infer system dimension; pass system_dim")
        system_dim = root
    if n % system_dim:
        raise InvalidInputError(f"length {n} is not a multiple of system_dim {system_dim}")
    anc_dim = n // system_dim
    a = anc_dim.bit_length() - 1
    if 2**a != anc_dim:
        raise InvalidInputError(f"ancilla dimension {anc_dim} is not a power of two")
    s_dim = system_dim
    rho = partial_trace_ancilla(psi, s_dim)
    rho = (rho + dagger(rho)) / 2

    G = _unitary_with_first_column(psi)  # on (ancilla, copy)
    eye_s = np.eye(s_dim)
    # SWAP(copy, system) acting on (ancilla, copy, system)
    swap_cs = np.zeros((s_dim * s_dim, s_dim * s_dim))
    for i in range(s_dim):
        for j in range(s_dim):
            swap_cs[j * s_dim + i, i * s_dim + j] = 1.0
    swap = np.kron(np.eye(anc_dim), swap_cs)
    GI = np.kron(G, eye_s)
    U = dagger(GI) @ swap @ GI
    copy_qubits = s_dim.bit_length() - 1
    if 2**copy_qubits != s_dim:
        raise InvalidInputError(f"system dimension {s_dim} is not a power of two")
    return rho, BlockEncoding(U, 1.0, a + copy_qubits, 0.0, s_dim)


def controlled(be: BlockEncoding) -> np.ndarray:
    """``|0><0| (x) I + |1><1| (x) U`` with the control as the most significant qubit."""
    U = be.unitary
    n = U.shape[0]
    out = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    out[:n, :n] = np.eye(n)
    out[n:, n:] = U
    return out


def perturbed(A, beta: float, eps: float, stream: RandomSource) -> BlockEncoding:
    """Approximate block-encoding of ``A``.

    A random perturbation of spectral norm ``eps / beta`` is added to the
    off-diagonal blocks of the exact dilation of ``A / beta``, the result is
    re-unitarised by QR (phases fixed so the factor stays close to the
    perturbed matrix), and the achieved ``||A - beta * block||`` is measured
    and stored as the encoding's ``eps``.
    """
    exact = dilate(A, beta)
    d = exact.system_dim
    rng = stream.generator() if isinstance(stream, numkit.RngStream) else stream
    E = numkit.ginibre(2, d, rng)
    E = [e * ((eps / beta) / numkit.norm(e)) for e in E]
    U = np.array(exact.unitary)
    U[:d, d:] += E[0]
    U[d:, :d] += E[1]
    q, r = np.linalg.qr(U)
    diag = np.diagonal(r)
    q = q * (diag / np.abs(diag))[None, :]
    trial = BlockEncoding(q, exact.beta, 1, 0.0, d)
    _, achieved = verify(trial, A)
    return BlockEncoding(q, exact.beta, 1, achieved, d)
