"""Acceptance suite: one marked group of tests per criterion.

Run ``pytest tests/test_acceptance.py`` to get a PASS/FAIL line per
criterion in the terminal summary.
"""

import math
import time

import numpy as np
import pytest

from distrace import apps, blockenc, numkit, polyapprox, protocol, svt
from distrace.numkit import RngStream

criterion = pytest.mark.criterion


def note(request, text):
    request.node.user_properties.append(("summary", text))


def pure_state(d, seed):
    v = numkit.haar_unitary(d, RngStream(seed, ("pure",)))[:, 0]
    return np.outer(v, v.conj())


# ---------------------------------------------------------------------------
# 1. unbiasedness


def unbiasedness_fixtures(d):
    """Four (block, polynomial) pairs per dimension covering both parities and all constructions."""
    s = RngStream(1000 + d)
    rho = numkit.random_density_matrix(d, d, 0.3 / d, s.child("rho"))
    sigma = numkit.random_density_matrix(d, d, 0.3 / d, s.child("sigma"))
    A = numkit.random_contraction(d, s.child("A"), 0.9)
    B = numkit.random_contraction(d, s.child("B"), 0.8)
    delta = 0.25 / d
    return [
        ("contractions, x and x", A, polyapprox.monomial(1), B, polyapprox.monomial(1)),
        ("states, identity and ln", rho, polyapprox.monomial(1), sigma, polyapprox.log_poly(delta, 1e-3)[0]),
        ("contractions, inverse and x^2", A, polyapprox.inverse_poly(0.2, 1e-3), B, polyapprox.monomial(2)),
        (
            "states, powers",
            rho,
            polyapprox.power_poly(1.5, "even", delta, 1e-3),
            sigma,
            polyapprox.power_poly(0.5, "even", delta, 1e-3, sign="negative"),
        ),
    ]


@criterion(1, "unbiasedness: Haar mean equals Tr(PQ), Monte Carlo mean within 5 SE")
@pytest.mark.parametrize("d", [2, 4])
def test_haar_mean_equals_trace_product(d, request):
    t0 = time.perf_counter()
    worst = 0.0
    for _, A, f, B, g in unbiasedness_fixtures(d):
        P = svt.apply_poly_sv(A, f).value
        Q = svt.apply_poly_sv(B, g).value
        worst = max(worst, abs(protocol.haar_mean(P, Q, d) - np.trace(P @ Q)))
    elapsed = time.perf_counter() - t0
    note(request, f"d={d} max |haar_mean - Tr(PQ)| = {worst:.1e}")
    assert worst <= 1e-9
    assert elapsed < 1.0


@criterion(1, "unbiasedness: Haar mean equals Tr(PQ), Monte Carlo mean within 5 SE")
@pytest.mark.parametrize("d", [2, 4])
def test_monte_carlo_mean_is_unbiased(d, request):
    worst = 0.0
    for k, (name, A, f, B, g) in enumerate(unbiasedness_fixtures(d)):
        cfg = protocol.ProtocolConfig(d, 50, d * d, 77 + k, f, g, blockenc.dilate(A), blockenc.dilate(B))
        vals = protocol.replay_values(cfg, 2000)
        target = complex(np.trace(np.matmul(*protocol.transformed_blocks(cfg))))
        for part in (np.real, np.imag):
            se = np.std(part(vals), ddof=1) / math.sqrt(vals.size)
            z = abs(part(vals).mean() - part(target)) / se
            worst = max(worst, z)
            assert z <= 5, f"{name}: {z:.2f} standard errors"
    note(request, f"d={d} worst deviation {worst:.2f} SE")


# ---------------------------------------------------------------------------
# 2. variance law


@criterion(2, "variance law: Var(T) N / (1 + d^2/m + d^4/m^2) spread <= 3")
def test_variance_law_spread(request):
    ratios = {}
    for d in (2, 4):
        rho = pure_state(d, d)
        be = blockenc.dilate(rho)
        ident = polyapprox.monomial(1)
        for mf in (1, 4, 16):
            m = mf * d * d
            for N in (25, 100):
                cfg = protocol.ProtocolConfig(d, N, m, 2024, ident, ident, be, be).replay("cell", d, m, N)
                var = protocol.empirical_variance(cfg, 200)
                ratios[d, m, N] = var * N / (1 + d**2 / m + d**4 / m**2)
    spread = max(ratios.values()) / min(ratios.values())
    note(request, f"spread {spread:.2f} over {len(ratios)} cells")
    assert spread <= 3


# ---------------------------------------------------------------------------
# 3. polynomial certificates (checked on an independent uniform grid)

GRID = np.linspace(-1, 1, 10_001)


def chebval(p, x):
    return np.polynomial.chebyshev.chebval(x, np.asarray(p.cheb_coeffs))


@criterion(3, "polynomial certificates")
def test_log_certificate(request):
    delta, eps = 0.1, 1e-3
    p, K = polyapprox.log_poly(delta, eps)
    x = np.linspace(delta, 1, 10_000)
    err = np.max(np.abs(chebval(p, x) - np.log(1 / x) / K))
    assert err <= eps
    assert np.max(np.abs(chebval(p, GRID))) <= 1
    note(request, f"log deg {p.degree} err {err:.1e}")


@criterion(3, "polynomial certificates")
def test_inverse_certificate(request):
    delta, eps = 0.1, 1e-3
    p = polyapprox.inverse_poly(delta, eps)
    x = np.linspace(delta, 1, 10_000)
    err = np.max(np.abs(chebval(p, x) - 0.75 * delta / x))
    assert err <= eps
    assert abs(chebval(p, delta) - 0.75) <= eps
    assert np.max(np.abs(chebval(p, GRID))) <= 1
    note(request, f"inverse deg {p.degree} err {err:.1e}")


@criterion(3, "polynomial certificates")
def test_rect_plateau_and_stop_band(request):
    t, dp, ep = 0.5, 0.1, 1e-3
    p = polyapprox.rect_poly(t, dp, ep)
    vals = chebval(p, GRID)
    plateau = np.abs(GRID) <= t - dp
    stop = np.abs(GRID) >= t + dp
    assert np.all((vals[plateau] >= 1 - ep) & (vals[plateau] <= 1))
    assert np.all((vals[stop] >= 0) & (vals[stop] <= ep))
    assert np.all((vals >= 0) & (vals <= 1))
    note(request, f"rect deg {p.degree}")


@criterion(3, "polynomial certificates")
@pytest.mark.parametrize("c,parity", [(0.5, "even"), (1.5, "odd"), (2.0, "even")])
def test_positive_power_envelope(c, parity):
    eps = 1e-3
    p = polyapprox.power_poly(c, parity, 0.1, eps)
    vals = chebval(p, GRID)
    assert np.all(np.abs(vals) <= np.abs(GRID) ** c / 2 + eps)
    x = np.linspace(0.1, 1, 10_000)
    assert np.max(np.abs(chebval(p, x) - x**c / 2)) <= eps


@criterion(3, "polynomial certificates")
def test_certificates_fast():
    polyapprox.log_poly.cache_clear()
    polyapprox.inverse_poly.cache_clear()
    polyapprox.rect_poly.cache_clear()
    polyapprox.power_poly.cache_clear()
    t0 = time.perf_counter()
    polyapprox.log_poly(0.1, 1e-3)
    polyapprox.inverse_poly(0.1, 1e-3)
    polyapprox.rect_poly(0.5, 0.1, 1e-3)
    for c, parity in [(0.5, "even"), (1.5, "odd"), (2.0, "even")]:
        polyapprox.power_poly(c, parity, 0.1, 1e-3)
    assert time.perf_counter() - t0 < 30


# ---------------------------------------------------------------------------
# 4. relative entropy


def relative_entropy_fixtures():
    half = np.eye(2) / 2
    yield "diagonal (0.5 ln 3)", np.kron(np.diag([0.75, 0.25]), half), np.kron(np.diag([0.25, 0.75]), half), 0.5 * math.log(3)
    for k in range(2):
        rho = numkit.random_density_matrix(4, 4, 0.1, RngStream(400 + k, ("rho",)))
        sigma = numkit.random_density_matrix(4, 4, 0.1, RngStream(400 + k, ("sigma",)))
        yield f"random pair {k}", rho, sigma, apps.exact_relative_entropy(rho, sigma)


@criterion(4, "relative entropy d=4, eps=0.1, >= 7/10 runs within eps")
def test_relative_entropy_success_rate(request):
    assert apps.exact_relative_entropy(np.diag([0.75, 0.25]), np.diag([0.25, 0.75])) == pytest.approx(0.5 * math.log(3), abs=1e-15)
    for name, rho, sigma, exact in relative_entropy_fixtures():
        hits = sum(abs(apps.relative_entropy(rho, sigma, 0.1, 0.1, seed=s).value - exact) <= 0.1 for s in range(10))
        note(request, f"{name}: {hits}/10")
        assert hits >= 7, name


# ---------------------------------------------------------------------------
# 5. Renyi


@criterion(5, "Renyi alpha=2 and alpha=1/2 on d=2, eps=0.1, >= 7/10 runs within eps")
def test_renyi_two(request):
    rho, sigma = np.diag([0.7, 0.3]), np.diag([0.4, 0.6])
    exact = math.log(0.7**2 / 0.4 + 0.3**2 / 0.6)
    hits = sum(abs(apps.renyi_entropy(rho, sigma, 2.0, 0.1, delta=0.3, seed=s).value - exact) <= 0.1 for s in range(10))
    note(request, f"alpha=2: {hits}/10")
    assert hits >= 7


@criterion(5, "Renyi alpha=2 and alpha=1/2 on d=2, eps=0.1, >= 7/10 runs within eps")
def test_renyi_half(request):
    rho, sigma = np.diag([0.9, 0.1]), np.diag([0.5, 0.5])
    exact = -2 * math.log(math.sqrt(0.45) + math.sqrt(0.05))
    hits = sum(
        abs(apps.renyi_entropy(rho, sigma, 0.5, 0.1, delta=0.1, t_floor=0.5, seed=s).value - exact) <= 0.1 for s in range(10)
    )
    note(request, f"alpha=1/2: {hits}/10")
    assert hits >= 7


# ---------------------------------------------------------------------------
# 6. linear solver


@criterion(6, "linear solver d=4, sigma_min >= 0.25, eps=0.1, >= 7/10 runs")
def test_linear_solver_success_rate(request):
    hits = 0
    for s in range(10):
        A = numkit.random_well_conditioned(4, RngStream(600 + s, ("A",)), 0.25)
        b = numkit.haar_unitary(4, RngStream(600 + s, ("b",)))[:, 0]
        res = apps.linear_solve(A, b, 0.1, 0.25, seed=s)
        hits += np.linalg.norm(res.x_tilde - np.linalg.solve(A, b)) <= 0.1
    note(request, f"{hits}/10")
    assert hits >= 7


# ---------------------------------------------------------------------------
# 7. Hamiltonian simulation


@criterion(7, "Hamiltonian simulation: commuting within eps, 100 random within ||[H1,H2]|| + eps")
def test_hamiltonian_commuting_pair(request):
    d = 4
    H1, H2 = np.diag([0.9, -0.3, 0.2, -0.7]), np.diag([0.1, 0.8, -0.6, 0.4])
    M = numkit.random_hermitian(d, RngStream(70), 1.0)
    rho = numkit.random_density_matrix(d, d, 0.0, RngStream(71))
    res = apps.hamiltonian_expectation(H1, H2, M, rho, 1 / (2 * math.sqrt(d)), 0.05, seed=72)
    note(request, f"commuting error {abs(res.estimate - res.exact):.3f}")
    assert res.commutator_norm <= 1e-12
    assert abs(res.estimate - res.exact) <= 0.05


@criterion(7, "Hamiltonian simulation: commuting within eps, 100 random within ||[H1,H2]|| + eps")
def test_hamiltonian_random_fixtures(request):
    d, eps = 4, 0.05
    worst = -math.inf
    for k in range(100):
        s = RngStream(700 + k)
        H1 = numkit.random_hermitian(d, s.child("H1"), 1.0)
        H2 = numkit.random_hermitian(d, s.child("H2"), 1.0)
        M = numkit.random_hermitian(d, s.child("M"), 1.0)
        rho = numkit.random_density_matrix(d, d, 0.0, s.child("rho"))
        res = apps.hamiltonian_expectation(H1, H2, M, rho, 1 / (2 * math.sqrt(d)), eps, seed=k)
        slack = abs(res.estimate - res.exact) - (res.commutator_norm + eps)
        worst = max(worst, slack)
        assert slack <= 0, f"fixture {k}"
    note(request, f"100 fixtures, worst margin {-worst:.3f}")


# ---------------------------------------------------------------------------
# 8. LOCC structure and determinism


@criterion(8, "LOCC structure and determinism across 1, 2, 8 workers")
def test_locc_and_determinism(request):
    d = 4
    A = numkit.random_contraction(d, RngStream(80), 0.9)
    B = numkit.random_contraction(d, RngStream(81), 0.9)
    tables, values = [], []
    for workers in (1, 2, 8):
        cfg = protocol.ProtocolConfig(
            d, 200, 16, 8, polyapprox.monomial(1), polyapprox.monomial(1), blockenc.dilate(A), blockenc.dilate(B),
            workers=workers, chunk_size=16, record_bits=True,
        )
        table = protocol.run_shots(cfg)
        tables.append(table)
        values.append(protocol.estimate_trace(table, cfg).value)
        tr = table.transcript
        assert tr.is_classical()
        assert len(tr) == 2 * cfg.N
        for msg in tr.messages():
            assert msg.party in ("alice", "bob")
            assert all(isinstance(v, int) for v in msg.payload)
    for other in tables[1:]:
        for k in protocol.TABLE_KEYS:
            assert np.array_equal(tables[0].bits[k], other.bits[k])
            assert np.array_equal(tables[0].zeros[k], other.zeros[k])
    assert values[0] == values[1] == values[2]
    note(request, "bit-identical")


@criterion(8, "LOCC structure and determinism across 1, 2, 8 workers")
def test_application_determinism_across_workers():
    rho = numkit.random_density_matrix(2, 2, 0.2, RngStream(82))
    sigma = numkit.random_density_matrix(2, 2, 0.2, RngStream(83))
    vals = [apps.relative_entropy(rho, sigma, 0.2, 0.2, seed=1, workers=w).value for w in (1, 2, 8)]
    assert vals[0] == vals[1] == vals[2]


# ---------------------------------------------------------------------------
# 9. block-encoding contracts


@criterion(9, "block-encoding contracts")
def test_dilation_residuals(request):
    worst = 0.0
    for k in range(50):
        d = (2, 3, 4, 8)[k % 4]
        A = numkit.random_contraction(d, RngStream(900 + k), 1.0 if k % 5 == 0 else 0.9)
        be = blockenc.dilate(A)
        ok, residual = blockenc.verify(be, A)
        assert ok
        worst = max(worst, residual, numkit.unitarity_residual(be.unitary))
    note(request, f"worst residual {worst:.1e}")
    assert worst <= 1e-10


@criterion(9, "block-encoding contracts")
@pytest.mark.parametrize("anc_dim,sys_dim", [(1, 2), (2, 2), (4, 2), (2, 4)])
def test_purification_matches_partial_trace(anc_dim, sys_dim):
    psi = numkit.haar_unitary(anc_dim * sys_dim, RngStream(950 + anc_dim * sys_dim))[:, 0]
    rho, be = blockenc.from_purification(psi, sys_dim)
    T = psi.reshape(anc_dim, sys_dim)
    oracle = np.einsum("ai,aj->ij", T, T.conj())
    np.testing.assert_allclose(rho, oracle, rtol=0, atol=1e-15)
    ok, residual = blockenc.verify(be, oracle)
    assert ok and residual <= 1e-10


@criterion(9, "block-encoding contracts")
def test_lipschitz_mode_degradation(request):
    d, eps, L = 2, 0.1, 1.0
    worst = -math.inf
    for k, enc_eps in enumerate((0.01, 0.03, 0.1)):
        A = numkit.random_contraction(d, RngStream(960 + k, ("A",)), 0.8)
        B = numkit.random_contraction(d, RngStream(960 + k, ("B",)), 0.8)
        be_a = blockenc.perturbed(A, 1.0, enc_eps, RngStream(960 + k, ("pa",)))
        be_b = blockenc.perturbed(B, 1.0, enc_eps, RngStream(960 + k, ("pb",)))
        est = apps.estimate_trace_fg(A, B, "identity", "identity", eps, 0.1, mode="lipschitz_approx", be_a=be_a, be_b=be_b, seed=k)
        gap = max(be_a.eps, be_b.eps)
        bound = (L + 1) * d * gap + eps
        err = abs(est - np.trace(A @ B))
        worst = max(worst, err - bound)
        assert err <= bound
    note(request, f"worst margin {-worst:.3f}")
