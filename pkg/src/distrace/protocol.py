"""Two-party Hadamard-test sampling and the classical trace estimator.

Alice holds a block-encoding of A and a polynomial P; Bob holds a
block-encoding of B and a polynomial Q. In every iteration i both parties
draw the same Haar unitary U_i from shared randomness, Alice draws a private
V_i and Bob a private W_i. Each party runs m Hadamard tests per (unitary,
part) on its own transformed block and announces only how many shots gave
outcome 0. From those counts the referee forms

    X_i^p = (2d/m) #0[A^p(V_i)] - d
    Y_i^q = (2d/m) #0[B^q(W_i)] - d
    Z_i^pq = (2d(d+1)/m^2) #{(j, j'): A_j^p(U_i) = B_j'^q(U_i)} - d(d+1)

and the estimator
    T = mean_i(Z^RR - i Z^RI - i Z^IR - Z^II)
        - (Xbar^R Ybar^R - i Xbar^R Ybar^I - i Xbar^I Ybar^R - Xbar^I Ybar^I),
whose expectation is Tr(P(A~) Q(B~)).

The asymmetric factors 2d versus 2d(d+1) come from the first and second Haar
moments and are intentional.

Randomness: iterations are grouped in fixed-size chunks; chunk c uses the
substreams ("shared", c), ("alice", c) and ("bob", c) of the run's root
stream. Chunks are independent of the number of worker threads, so results
are bit-identical for any ``workers`` value.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterator, NamedTuple, Optional

import numpy as np

from . import numkit, svt
from .blockenc import BlockEncoding, top_left_block
from .errors import InvalidInputError, InvalidParameterError
from .numkit import RngStream
from .polyapprox import BoundedPolynomial

PARTS = ("Re", "Im")
PHASE_FLAG = {"Re": 0, "Im": 1}
ALICE_KEYS = (("A", "U", "Re"), ("A", "U", "Im"), ("A", "V", "Re"), ("A", "V", "Im"))
BOB_KEYS = (("B", "U", "Re"), ("B", "U", "Im"), ("B", "W", "Re"), ("B", "W", "Im"))
TABLE_KEYS = ALICE_KEYS + BOB_KEYS
# coefficient of Z^pq (and of Xbar^p Ybar^q) in T
COMBINATION = {("Re", "Re"): 1.0, ("Re", "Im"): -1j, ("Im", "Re"): -1j, ("Im", "Im"): -1.0}
DEFAULT_CHUNK = 256


@dataclass(frozen=True)
class ProtocolConfig:
    """Inputs of one protocol run.

    Attributes:
        d: system dimension shared by both encodings.
        N: number of iterations.
        m: shots per iteration for every (unitary, part) pair.
        seed: root seed.
        poly_f: Alice's polynomial.
        poly_g: Bob's polynomial.
        be_a: Alice's block-encoding.
        be_b: Bob's block-encoding.
        workers: threads used to process iteration chunks.
        chunk_size: iterations per random substream chunk.
        record_bits: keep individual shot bits (otherwise only counts).
        stream_path: extra labels appended to the root stream (replays, batches).
    """

    d: int
    N: int
    m: int
    seed: int
    poly_f: BoundedPolynomial
    poly_g: BoundedPolynomial
    be_a: BlockEncoding
    be_b: BlockEncoding
    workers: int = 1
    chunk_size: int = DEFAULT_CHUNK
    record_bits: bool = False
    stream_path: tuple = ()

    def __post_init__(self):
        for name in ("d", "N", "m", "workers", "chunk_size"):
            val = getattr(self, name)
            if not isinstance(val, (int, np.integer)) or val < 1:
                raise InvalidParameterError(f"{name} must be a positive integer, got {val!r}")
        for name, be in (("be_a", self.be_a), ("be_b", self.be_b)):
            if be.system_dim != self.d:
                raise InvalidInputError(f"{name} encodes dimension {be.system_dim}, expected d={self.d}")

    @property
    def root(self) -> RngStream:
        return RngStream(self.seed, tuple(self.stream_path))

    def replay(self, *labels) -> "ProtocolConfig":
        return replace(self, stream_path=tuple(self.stream_path) + tuple(labels))


class Message(NamedTuple):
    party: str
    round: int
    payload: tuple
    payload_bits: int


@dataclass(frozen=True)
class Transcript:
    """Classical messages, one per party per iteration, stored column-wise.

    ``payloads[k]`` holds the four integers party ``parties[k]`` announced in
    iteration ``rounds[k]``; ``payload_bits[k]`` is the message size.
    """

    parties: np.ndarray
    rounds: np.ndarray
    payloads: np.ndarray
    payload_bits: np.ndarray

    PARTY_NAMES = ("alice", "bob")

    def __len__(self) -> int:
        return int(self.rounds.size)

    def messages(self) -> Iterator[Message]:
        for k in range(len(self)):
            yield Message(
                self.PARTY_NAMES[int(self.parties[k])],
                int(self.rounds[k]),
                tuple(int(v) for v in self.payloads[k]),
                int(self.payload_bits[k]),
            )

    def is_classical(self) -> bool:
        arrays = (self.parties, self.rounds, self.payloads, self.payload_bits)
        return all(np.issubdtype(a.dtype, np.integer) for a in arrays)


@dataclass(frozen=True)
class ShotTable:
    """Outcome statistics of all Hadamard tests.

    ``zeros[(op, role, part)]`` is an int array of length N counting the shots
    with outcome 0. ``bits`` holds the raw (N, m) bit arrays when recorded.
    """

    N: int
    m: int
    d: int
    zeros: dict
    transcript: Transcript
    bits: Optional[dict] = None

    def to_record(self) -> dict:
        rec = {
            "N": self.N,
            "m": self.m,
            "d": self.d,
            "zeros": {"/".join(k): v.tolist() for k, v in self.zeros.items()},
            "transcript": {
                "party": self.transcript.parties.tolist(),
                "round": self.transcript.rounds.tolist(),
                "payload_bits": self.transcript.payload_bits.tolist(),
            },
        }
        if self.bits is not None:
            rec["bits"] = {"/".join(k): v.tolist() for k, v in self.bits.items()}
        return rec


def _combine(X: dict, Y: dict, Z: dict) -> complex:
    zc = sum(COMBINATION[pq] * np.mean(Z[pq]) for pq in COMBINATION)
    xy = sum(COMBINATION[(p, q)] * np.mean(X[p]) * np.mean(Y[q]) for p, q in COMBINATION)
    return complex(zc - xy)


@dataclass(frozen=True)
class TraceEstimate:
    """Estimator value with its per-iteration components.

    Attributes:
        value: complex estimate T.
        X: per-iteration X_i^p, keyed by part.
        Y: per-iteration Y_i^q, keyed by part.
        Z: per-iteration Z_i^pq, keyed by (p, q).
        empirical_variance: plug-in estimate of E|T - E T|^2 from the
            iterations of this run (delta method on the per-iteration
            influence values); ``nan`` when N = 1.
        n_queries_simulated: block-encoding queries a circuit would use.
    """

    value: complex
    X: dict
    Y: dict
    Z: dict
    empirical_variance: float
    n_queries_simulated: int

    def recompute(self) -> complex:
        return _combine(self.X, self.Y, self.Z)

    def decomposition(self) -> dict:
        """T^RR, T^RI, T^IR, T^II with T = T^RR + T^II + i (T^RI + T^IR)."""
        xb = {p: np.mean(self.X[p]) for p in PARTS}
        yb = {q: np.mean(self.Y[q]) for q in PARTS}
        zb = {pq: np.mean(self.Z[pq]) for pq in COMBINATION}
        return {
            "RR": zb["Re", "Re"] - xb["Re"] * yb["Re"],
            "RI": -zb["Re", "Im"] + xb["Re"] * yb["Im"],
            "IR": -zb["Im", "Re"] + xb["Im"] * yb["Re"],
            "II": -zb["Im", "Im"] + xb["Im"] * yb["Im"],
        }

    def influence(self) -> np.ndarray:
        """Per-iteration linearised contributions psi_i with T ~ mean(psi)."""
        xb = {p: np.mean(self.X[p]) for p in PARTS}
        yb = {q: np.mean(self.Y[q]) for q in PARTS}
        psi = sum(COMBINATION[pq] * self.Z[pq] for pq in COMBINATION)
        for (p, q), c in COMBINATION.items():
            psi = psi - c * (self.X[p] * yb[q] + xb[p] * self.Y[q])
        return np.asarray(psi, dtype=complex)

    def to_record(self) -> dict:
        return {
            "value": [self.value.real, self.value.imag],
            "empirical_variance": self.empirical_variance,
            "n_queries_simulated": self.n_queries_simulated,
        }


# ---------------------------------------------------------------------------
# Parties


class Party:
    """One side of the protocol; its transformed block never leaves the object."""

    def __init__(self, name: str, op: str, local_role: str, be: BlockEncoding, poly: BoundedPolynomial):
        self.name = name
        self.op = op
        self.local_role = local_role
        self._block = svt.apply_poly_sv(top_left_block(be), poly)
        self.degree = poly.degree
        self.keys = tuple((op, role, part) for role in ("U", local_role) for part in PARTS)

    def measure(self, shared: RngStream, local: RngStream, n: int, d: int, m: int, record_bits: bool):
        """Run this party's shots for ``n`` iterations.

        Returns:
            ``(zeros, bits)``: dicts of integer arrays keyed like the shot table.
        """
        shared_states = numkit.haar_states(n, d, shared.generator())
        rng = local.generator()
        local_states = numkit.haar_states(n, d, rng)
        zeros, bits = {}, {}
        for op, role, part in self.keys:
            states = shared_states if role == "U" else local_states
            p0 = svt.outcome_p0(self._block, states, PHASE_FLAG[part])
            if record_bits:
                b = (rng.random((n, m)) >= p0[:, None]).astype(np.uint8)
                bits[op, role, part] = b
                zeros[op, role, part] = (m - b.sum(axis=1)).astype(np.int64)
            else:
                zeros[op, role, part] = rng.binomial(m, p0).astype(np.int64)
        return zeros, (bits if record_bits else None)

    def probabilities(self, shared_vecs: np.ndarray, local_vecs: np.ndarray) -> dict:
        return {
            (op, role, part): svt.outcome_p0(self._block, shared_vecs if role == "U" else local_vecs, PHASE_FLAG[part])
            for op, role, part in self.keys
        }


def make_parties(cfg: ProtocolConfig) -> tuple[Party, Party]:
    return Party("alice", "A", "V", cfg.be_a, cfg.poly_f), Party("bob", "B", "W", cfg.be_b, cfg.poly_g)


def _chunks(N: int, size: int):
    return [(c, c * size, min(N, (c + 1) * size)) for c in range(math.ceil(N / size))]


def run_shots(cfg: ProtocolConfig, parties: tuple[Party, Party] | None = None) -> ShotTable:
    """Simulate all Hadamard tests of one run and collect the announced counts.

    ``parties`` may be passed to reuse already transformed blocks across replays.
    """
    alice, bob = parties or make_parties(cfg)
    root = cfg.root
    d, m = cfg.d, cfg.m

    def work(chunk):
        c, lo, hi = chunk
        n = hi - lo
        shared = root.child("shared", c)
        za, ba = alice.measure(shared, root.child("alice", c), n, d, m, cfg.record_bits)
        zb, bb = bob.measure(shared, root.child("bob", c), n, d, m, cfg.record_bits)
        return za, zb, ba, bb

    chunks = _chunks(cfg.N, cfg.chunk_size)
    if cfg.workers == 1 or len(chunks) == 1:
        results = [work(ch) for ch in chunks]
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(work, chunks))

    zeros = {k: np.concatenate([r[0 if k[0] == "A" else 1][k] for r in results]) for k in TABLE_KEYS}
    bits = None
    if cfg.record_bits:
        bits = {k: np.concatenate([r[2 if k[0] == "A" else 3][k] for r in results]) for k in TABLE_KEYS}

    # one message per party per iteration carrying its four counts
    N = cfg.N
    per_count = max(1, math.ceil(math.log2(m + 1)))
    payload_a = np.stack([zeros[k] for k in ALICE_KEYS], axis=1)
    payload_b = np.stack([zeros[k] for k in BOB_KEYS], axis=1)
    transcript = Transcript(
        parties=np.tile(np.array([0, 1], dtype=np.int64), N),
        rounds=np.repeat(np.arange(N, dtype=np.int64), 2),
        payloads=np.stack([payload_a, payload_b], axis=1).reshape(2 * N, 4),
        payload_bits=np.full(2 * N, (m if cfg.record_bits else per_count) * 4, dtype=np.int64),
    )
    return ShotTable(N, m, d, zeros, transcript, bits)


def _components(zeros: dict, d: int, m: int):
    X = {p: (2 * d / m) * zeros["A", "V", p] - d for p in PARTS}
    Y = {q: (2 * d / m) * zeros["B", "W", q] - d for q in PARTS}
    Z = {}
    for p in PARTS:
        for q in PARTS:
            ca = zeros["A", "U", p].astype(np.float64)
            cb = zeros["B", "U", q].astype(np.float64)
            equal = ca * cb + (m - ca) * (m - cb)
            Z[p, q] = (2 * d * (d + 1) / m**2) * equal - d * (d + 1)
    return X, Y, Z


def estimate_trace(table: ShotTable, cfg: ProtocolConfig) -> TraceEstimate:
    """The classical estimator T computed from a shot table."""
    if (table.N, table.m, table.d) != (cfg.N, cfg.m, cfg.d):
        raise InvalidInputError("shot table does not match the configuration (N, m, d)")
    zeros = {}
    for k in TABLE_KEYS:
        if table.bits is not None and k in table.bits:
            b = table.bits[k]
            if b.shape != (cfg.N, cfg.m):
                raise InvalidInputError(f"bits for {'/'.join(k)} have shape {b.shape}")
            zeros[k] = (cfg.m - b.sum(axis=1)).astype(np.int64)
        elif k in table.zeros:
            zeros[k] = np.asarray(table.zeros[k])
            if zeros[k].shape != (cfg.N,):
                raise InvalidInputError(f"counts for {'/'.join(k)} have shape {zeros[k].shape}")
        else:
            raise InvalidInputError(f"shot table is missing entries for {'/'.join(k)}")
    X, Y, Z = _components(zeros, cfg.d, cfg.m)
    value = _combine(X, Y, Z)
    est = TraceEstimate(value, X, Y, Z, math.nan, n_queries(cfg))
    if cfg.N > 1:
        psi = est.influence()
        var = float(np.sum(np.abs(psi - psi.mean()) ** 2) / (cfg.N - 1)) / cfg.N
        est = replace(est, empirical_variance=var)
    return est


def n_queries(cfg: ProtocolConfig) -> int:
    """Queries a circuit implementation would make: 4m tests per party per iteration, deg each."""
    return int(cfg.N * 4 * cfg.m * (cfg.poly_f.degree + cfg.poly_g.degree))


def run(cfg: ProtocolConfig) -> TraceEstimate:
    return estimate_trace(run_shots(cfg), cfg)


# ---------------------------------------------------------------------------
# Oracles


def transformed_blocks(cfg: ProtocolConfig) -> tuple[np.ndarray, np.ndarray]:
    """P(A~) and Q(B~) for oracle use (outside the LOCC simulation)."""
    P = svt.apply_poly_sv(top_left_block(cfg.be_a), cfg.poly_f).value
    Q = svt.apply_poly_sv(top_left_block(cfg.be_b), cfg.poly_g).value
    return P, Q


def conditional_mean(unitaries, cfg: ProtocolConfig) -> complex:
    """E[T | U_i, V_i, W_i] with shot noise integrated out exactly.

    Given the unitaries, every count is binomial with a known success
    probability and Alice's shots are independent of Bob's, so
    E[#equal pairs] = m^2 (pA pB + (1 - pA)(1 - pB)) and E[Xbar Ybar] =
    E[Xbar] E[Ybar].
    """
    unitaries = list(unitaries)
    if len(unitaries) != cfg.N:
        raise InvalidInputError(f"expected {cfg.N} unitary triples, got {len(unitaries)}")
    alice, bob = make_parties(cfg)
    d = cfg.d
    U = np.stack([u[0][:, 0] for u in unitaries])
    V = np.stack([u[1][:, 0] for u in unitaries])
    W = np.stack([u[2][:, 0] for u in unitaries])
    pa = alice.probabilities(U, V)
    pb = bob.probabilities(U, W)
    EX = {p: 2 * d * pa["A", "V", p] - d for p in PARTS}
    EY = {q: 2 * d * pb["B", "W", q] - d for q in PARTS}
    EZ = {}
    for p in PARTS:
        for q in PARTS:
            a, b = pa["A", "U", p], pb["B", "U", q]
            EZ[p, q] = 2 * d * (d + 1) * (a * b + (1 - a) * (1 - b)) - d * (d + 1)
    return _combine(EX, EY, EZ)


def haar_mean(p_block, q_block, d: int) -> complex:
    """E[T] from the Haar moment identities.

    With a = <v|M|v> for Haar v: E a = Tr M / d and
    E a b = (Tr M Tr N + Tr MN) / (d (d+1)). Substituting the outcome
    probabilities of every Hadamard test into these identities gives E[X],
    E[Y] and E[Z] per part, which are combined exactly like the estimator.
    """
    P = numkit.as_matrix(p_block, "p_block")
    Q = numkit.as_matrix(q_block, "q_block")
    if P.shape != (d, d) or Q.shape != (d, d):
        raise InvalidInputError(f"blocks must be {d} x {d}")
    ta = svt.TransformedBlock.from_matrix(P)
    tb = svt.TransformedBlock.from_matrix(Q)
    # outcome-0 probability is (1 + s <v|M|v>) / 2 with s = +1 for Re, -1 for Im
    sign = {"Re": 1.0, "Im": -1.0}
    Ma = {"Re": ta.hermitian_part, "Im": ta.antihermitian_part}
    Mb = {"Re": tb.hermitian_part, "Im": tb.antihermitian_part}
    tr = lambda M: np.trace(M).real  # noqa: E731
    EX = {p: sign[p] * tr(Ma[p]) for p in PARTS}
    EY = {q: sign[q] * tr(Mb[q]) for q in PARTS}
    EZ = {}
    for p in PARTS:
        for q in PARTS:
            # E[pA pB + (1-pA)(1-pB)] = (1 + s_p s_q E[a b]) / 2
            second = (tr(Ma[p]) * tr(Mb[q]) + np.trace(Ma[p] @ Mb[q]).real) / (d * (d + 1))
            EZ[p, q] = d * (d + 1) * sign[p] * sign[q] * second
    return _combine(EX, EY, EZ)


# ---------------------------------------------------------------------------
# Planning and repetition


def plan_samples(d: int, eps: float, c_N: float = 1.0, c_m: float = 1.0) -> tuple[int, int]:
    """N = ceil(c_N / eps^2) iterations and m = ceil(c_m d^2) shots."""
    if not 0 < eps <= 1:
        raise InvalidParameterError(f"eps={eps} outside (0, 1]")
    if d < 1:
        raise InvalidParameterError(f"invalid dimension {d}")
    N = max(1, svt.ceil_guarded(c_N / eps**2))
    m = max(1, svt.ceil_guarded(c_m * d * d))
    return N, m


def replay_values(cfg: ProtocolConfig, replications: int, label: str = "replay") -> np.ndarray:
    """T from independent replays (fresh unitaries and shots from derived substreams)."""
    if replications < 1:
        raise InvalidParameterError("replications must be >= 1")
    parties = make_parties(cfg)
    out = np.empty(replications, dtype=complex)
    for r in range(replications):
        sub = cfg.replay(label, r)
        out[r] = estimate_trace(run_shots(sub, parties), sub).value
    return out


def empirical_variance(cfg: ProtocolConfig, replications: int) -> float:
    """Sample variance E|T - mean T|^2 over independent replays."""
    if replications < 2:
        raise InvalidParameterError("replications must be >= 2")
    vals = replay_values(cfg, replications)
    return float(np.sum(np.abs(vals - vals.mean()) ** 2) / (replications - 1))


def median_of_means(cfg: ProtocolConfig, batches: int = 9) -> tuple[complex, np.ndarray]:
    """Median (real and imaginary parts separately) of independent batch estimates."""
    if batches < 1:
        raise InvalidParameterError("batches must be >= 1")
    vals = replay_values(cfg, batches, label="batch")
    return complex(np.median(vals.real), np.median(vals.imag)), vals
