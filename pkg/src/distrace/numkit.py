"""Dense complex linear algebra and reproducible random sampling.

Matrices are plain ``numpy`` complex128 arrays. Every function returns a fresh
array and never mutates its arguments.

Randomness is organised as a tree of substreams. An :class:`RngStream` is a
``(seed, path)`` pair; the path is hashed together with the seed into a
``SeedSequence`` that keys a counter-based Philox generator, so the draws of a
substream depend only on its own ``(seed, path)`` and never on the order in
which sibling substreams are consumed.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from .errors import ContractViolationError, InvalidInputError, InvalidParameterError

HERMITIAN_TOL = 1e-10


@dataclass(frozen=True)
class RngStream:
    """A named, reproducible random substream.

    Labels in ``path`` may be non-negative ints or strings; strings are mapped
    to integers with CRC32 so that paths read naturally, e.g.
    ``RngStream(7).child("shared", 3)``.
    """

    seed: int
    path: tuple = ()

    def child(self, *labels) -> "RngStream":
        return RngStream(self.seed, self.path + tuple(labels))

    def _key(self) -> tuple:
        key = []
        for label in self.path:
            if isinstance(label, str):
                key.append(zlib.crc32(label.encode("utf-8")))
            elif isinstance(label, (int, np.integer)) and label >= 0:
                key.append(int(label))
            else:
                raise InvalidInputError(f"rng path label {label!r} must be a str or non-negative int")
        return tuple(key)

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=int(self.seed) & (2**64 - 1), spawn_key=self._key())
        return np.random.Generator(np.random.Philox(seq))


RandomSource = Union[RngStream, np.random.Generator]


def _rng(source: RandomSource) -> np.random.Generator:
    if isinstance(source, np.random.Generator):
        return source
    if isinstance(source, RngStream):
        return source.generator()
    raise InvalidInputError(f"expected RngStream or numpy Generator, got {type(source).__name__}")


def as_matrix(M, name: str = "matrix") -> np.ndarray:
    """Validate and copy ``M`` into a 2-D complex128 array."""
    arr = np.array(M, dtype=np.complex128, copy=True)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidInputError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return arr


def dagger(M: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(M, -1, -2))


def hermitian_residual(M: np.ndarray) -> float:
    return float(np.linalg.norm(M - dagger(M), 2))


def is_hermitian(M, tol: float = HERMITIAN_TOL) -> bool:
    M = np.asarray(M)
    return M.ndim == 2 and M.shape[0] == M.shape[1] and hermitian_residual(M) <= tol


def unitarity_residual(U: np.ndarray) -> float:
    U = np.asarray(U)
    return float(np.max(np.abs(dagger(U) @ U - np.eye(U.shape[-1]))))


# ---------------------------------------------------------------------------
# Haar sampling


def ginibre(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` independent d x d complex standard-Gaussian matrices, shape (n, d, d)."""
    z = rng.standard_normal((n, d, d, 2))
    return (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0)


def haar_from_ginibre(z: np.ndarray) -> np.ndarray:
    """Map Ginibre matrices to Haar unitaries: QR with R's diagonal phases divided out."""
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    phases = diag / np.abs(diag)
    return q * phases[..., None, :]


def haar_first_columns(z: np.ndarray) -> np.ndarray:
    """First columns ``U|0>`` of the Haar unitaries that :func:`haar_from_ginibre` builds from ``z``.

    Column 0 of the phase-corrected QR factor equals the normalised first
    Ginibre column, so no factorisation is needed.
    """
    col = z[..., :, 0]
    return col / np.linalg.norm(col, axis=-1, keepdims=True)


def haar_states(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` Haar-random unit vectors ``U|0>``, shape (n, d).

    Equal in distribution to :func:`haar_first_columns` of a Ginibre batch but
    draws only one column per state.
    """
    z = rng.standard_normal((n, d, 2))
    col = z[..., 0] + 1j * z[..., 1]
    return col / np.linalg.norm(col, axis=-1, keepdims=True)


def haar_unitary(d: int, stream: RandomSource) -> np.ndarray:
    """Sample a d x d Haar-random unitary."""
    if not isinstance(d, (int, np.integer)) or d < 1:
        raise InvalidInputError(f"invalid dimension {d!r}; need d >= 1")
    return haar_from_ginibre(ginibre(1, int(d), _rng(stream)))[0]


def haar_unitaries(n: int, d: int, stream: RandomSource) -> np.ndarray:
    """Batch version of :func:`haar_unitary`, shape (n, d, d)."""
    if d < 1:
        raise InvalidInputError(f"invalid dimension {d!r}; need d >= 1")
    return haar_from_ginibre(ginibre(n, d, _rng(stream)))


# ---------------------------------------------------------------------------
# Factorizations and norms


class SVDFactorization(NamedTuple):
    """``M = left @ diag(singular_values) @ right^dagger``.

    Columns of ``left`` are the left singular vectors (|tau~_i>), columns of
    ``right`` the right singular vectors (|tau_i>).
    """

    left: np.ndarray
    singular_values: np.ndarray
    right: np.ndarray

    def reconstruct(self) -> np.ndarray:
        k = self.singular_values.shape[0]
        return (self.left[:, :k] * self.singular_values) @ dagger(self.right[:, :k])


def svd(M) -> SVDFactorization:
    """Full SVD; for rectangular input the min(rows, cols) singular values are kept."""
    u, s, vh = np.linalg.svd(as_matrix(M), full_matrices=True)
    return SVDFactorization(u, s, dagger(vh))


def hermitian_eig(M) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (non-increasing) and unitary eigenvector matrix of a Hermitian matrix."""
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise ContractViolationError(f"hermitian_eig needs a square matrix, got {M.shape}")
    res = hermitian_residual(M)
    if res > HERMITIAN_TOL * max(1.0, float(np.max(np.abs(M)))):
        raise ContractViolationError(f"matrix is not Hermitian (residual {res:.3e})")
    w, v = np.linalg.eigh((M + dagger(M)) / 2)
    return w[::-1].copy(), v[:, ::-1].copy()


def norm(M, kind: str = "spectral") -> float:
    """Spectral norm (largest singular value) or trace norm (sum of singular values)."""
    s = np.linalg.svd(as_matrix(M), compute_uv=False)
    if kind == "spectral":
        return float(s[0])
    if kind == "trace":
        return float(np.sum(s))
    raise InvalidParameterError(f"unknown norm kind {kind!r}; expected 'spectral' or 'trace'")


def matrix_function_hermitian(M, func) -> np.ndarray:
    """Apply a scalar function to a Hermitian matrix through its eigendecomposition."""
    w, v = hermitian_eig(M)
    return (v * func(w)) @ dagger(v)


# ---------------------------------------------------------------------------
# Fixture generators


def random_density_matrix(d: int, r: int, lambda_min: float, stream: RandomSource) -> np.ndarray:
    """Random rank-``r`` density matrix whose nonzero eigenvalues are all >= ``lambda_min``.

    The spectrum is ``lambda_min`` plus a flat-Dirichlet share of the remaining
    mass; eigenvectors come from a Haar unitary.
    """
    if d < 1:
        raise InvalidInputError(f"invalid dimension {d!r}")
    if not 1 <= r <= d:
        raise InvalidParameterError(f"rank must satisfy 1 <= r <= d, got r={r}, d={d}")
    if lambda_min < 0 or lambda_min * r > 1 + 1e-15:
        raise InvalidParameterError(f"lambda_min={lambda_min} infeasible for rank {r} (need lambda_min*r <= 1)")
    rng = _rng(stream)
    spare = max(0.0, 1.0 - lambda_min * r)
    spectrum = np.zeros(d)
    spectrum[:r] = lambda_min + spare * rng.dirichlet(np.ones(r))
    U = haar_from_ginibre(ginibre(1, d, rng))[0]
    rho = (U * spectrum) @ dagger(U)
    return (rho + dagger(rho)) / 2


def random_hermitian(d: int, stream: RandomSource, spectral_norm: float | None = None) -> np.ndarray:
    """GUE-style random Hermitian matrix, optionally rescaled to a given spectral norm."""
    rng = _rng(stream)
    z = ginibre(1, d, rng)[0]
    H = (z + dagger(z)) / 2
    if spectral_norm is not None:
        H = H * (spectral_norm / norm(H))
    return H


def random_contraction(d: int, stream: RandomSource, spectral_norm: float = 0.9) -> np.ndarray:
    """Random complex d x d matrix with prescribed spectral norm."""
    rng = _rng(stream)
    z = ginibre(1, d, rng)[0]
    return z * (spectral_norm / norm(z))


def random_well_conditioned(d: int, stream: RandomSource, sigma_min: float, sigma_max: float = 1.0) -> np.ndarray:
    """Random matrix with singular values drawn uniformly in [sigma_min, sigma_max]."""
    rng = _rng(stream)
    U = haar_from_ginibre(ginibre(1, d, rng))[0]
    V = haar_from_ginibre(ginibre(1, d, rng))[0]
    s = rng.uniform(sigma_min, sigma_max, size=d)
    s[0], s[-1] = sigma_max, sigma_min
    return (U * s) @ dagger(V)
