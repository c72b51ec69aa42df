"""Command-line front end.

Each subcommand maps to one application (or a verification suite) and writes
JSON-lines records that validate against ``data/record.schema.json``.
Parameters come from an optional JSON config file and are overridden by
flags. Exit codes: 0 ok, 1 config error, 2 precondition violation,
3 approximation failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__, apps, blockenc, numkit, polyapprox, protocol
from .errors import (
    ApproximationError,
    ContractViolationError,
    InvalidInputError,
    InvalidParameterError,
    PreconditionViolationError,
    UnreliableLogError,
)
from .numkit import RngStream

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PRECONDITION = 2
EXIT_APPROXIMATION = 3
DEFAULT_SEED = 42
FIXTURE_PREFIX = "fixture:"
COMMANDS = ("trace", "rel-entropy", "renyi", "linsolve", "hamsim", "verify-polys", "variance-sweep")


class ConfigError(Exception):
    """A configuration problem; the message names the offending key."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


# ---------------------------------------------------------------------------
# Matrix files


def _format_for(path: Path, fmt: str | None) -> str:
    if fmt is not None:
        if fmt not in ("json-dense", "csv-complex"):
            raise InvalidInputError(f"unknown matrix format {fmt!r}")
        return fmt
    return "csv-complex" if path.suffix.lower() == ".csv" else "json-dense"


def _entry(value, row: int, col: int) -> complex:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(isinstance(v, (int, float)) for v in value):
        return complex(value[0], value[1])
    raise InvalidInputError(f"row {row}, column {col}: expected a number or a [re, im] pair, got {value!r}")


def matrix_from_rows(rows) -> np.ndarray:
    """Dense complex matrix from nested rows of numbers or [re, im] pairs."""
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise InvalidInputError("matrix must be a non-empty list of rows")
    width = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != width:
            raise InvalidInputError(f"ragged matrix: row {i} has {len(row)} entries, expected {width}")
    return np.array([[_entry(v, i, j) for j, v in enumerate(row)] for i, row in enumerate(rows)], dtype=np.complex128)


def load_matrix(path, format: str | None = None) -> np.ndarray:
    """Read a dense complex matrix.

    ``json-dense`` files hold a list of rows whose entries are ``[re, im]``
    pairs (plain numbers are read as real). ``csv-complex`` files hold one
    row per line with ``re, im`` column pairs. The format defaults to the
    file extension.

    Raises:
        InvalidInputError: unparseable file or ragged rows (the row index is named).
    """
    path = Path(path)
    fmt = _format_for(path, format)
    text = path.read_text(encoding="utf-8")
    if fmt == "json-dense":
        try:
            rows = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"{path}: invalid JSON ({exc})") from exc
        return matrix_from_rows(rows)
    rows = []
    for i, line in enumerate(csv.reader(text.splitlines())):
        if not line:
            continue
        if len(line) % 2:
            raise InvalidInputError(f"row {i} has an odd number of columns; expected re,im pairs")
        try:
            vals = [float(v) for v in line]
        except ValueError as exc:
            raise InvalidInputError(f"row {i}: {exc}") from exc
        rows.append([[vals[k], vals[k + 1]] for k in range(0, len(vals), 2)])
    return matrix_from_rows(rows)


def save_matrix(M, path, format: str | None = None) -> None:
    """Write ``M`` so that :func:`load_matrix` returns bit-identical entries."""
    path = Path(path)
    M = numkit.as_matrix(M)
    fmt = _format_for(path, format)
    if fmt == "json-dense":
        rows = [[[float(z.real), float(z.imag)] for z in row] for row in M]
        path.write_text(json.dumps(rows), encoding="utf-8")
        return
    lines = [",".join(f"{float(z.real)!r},{float(z.imag)!r}" for z in row) for row in M]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_fixture(name: str) -> np.ndarray:
    """Matrix bundled with the package, e.g. ``pure_state_d2``."""
    try:
        text = resources.files("distrace").joinpath("data", f"{name}.json").read_text(encoding="utf-8")
    except FileNotFoundError:
        raise InvalidInputError(f"no bundled fixture named {name!r}") from None
    return matrix_from_rows(json.loads(text))


def record_schema() -> dict:
    """The published JSON schema every emitted record satisfies."""
    return json.loads(resources.files("distrace").joinpath("data", "record.schema.json").read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# Parameter declarations


def _positive_int(key, v):
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise ConfigError(key, f"expected a positive integer, got {v!r}")
    return v


def _unit_interval(key, v):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not 0 < v <= 1:
        raise ConfigError(key, f"expected a number in (0, 1], got {v!r}")
    return float(v)


def _positive(key, v):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0 or not math.isfinite(v):
        raise ConfigError(key, f"expected a positive number, got {v!r}")
    return float(v)


def _non_negative(key, v):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or v < 0 or not math.isfinite(v):
        raise ConfigError(key, f"expected a non-negative number, got {v!r}")
    return float(v)


def _alpha(key, v):
    v = _positive(key, v)
    if v == 1:
        raise ConfigError(key, "alpha must differ from 1")
    return v


def _label(key, v):
    if v not in apps.FUNCTIONS:
        raise ConfigError(key, f"unknown function label {v!r}; known: {sorted(apps.FUNCTIONS)}")
    return v


def _mode(key, v):
    if v not in ("exact_homogeneous", "lipschitz_approx"):
        raise ConfigError(key, f"unknown mode {v!r}")
    return v


def _matrix_ref(key, v):
    if isinstance(v, str) or isinstance(v, list):
        return v
    raise ConfigError(key, f"expected a file path, 'fixture:<name>' or an inline list, got {type(v).__name__}")


def _int_list(key, v):
    if isinstance(v, int) and not isinstance(v, bool):
        v = [v]
    if not isinstance(v, list) or not v:
        raise ConfigError(key, f"expected a positive integer or a list of them, got {v!r}")
    return [_positive_int(key, x) for x in v]


def _float_list(key, v):
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        v = [v]
    if not isinstance(v, list) or not v:
        raise ConfigError(key, f"expected a positive number or a list of them, got {v!r}")
    return [_positive(key, x) for x in v]


# command -> key -> (validator, default)
PARAMS = {
    "trace": {
        "A": (_matrix_ref, "fixture:pure_state_d2"),
        "B": (_matrix_ref, "fixture:pure_state_d2"),
        "f": (_label, "identity"),
        "g": (_label, "identity"),
        "eps": (_unit_interval, 0.1),
        "delta": (_unit_interval, 0.1),
        "mode": (_mode, "exact_homogeneous"),
        "encoding_eps": (_non_negative, 0.0),
        "N": (_positive_int, None),
        "m": (_positive_int, None),
        "workers": (_positive_int, 1),
    },
    "rel-entropy": {
        "rho": (_matrix_ref, None),
        "sigma": (_matrix_ref, None),
        "d": (_positive_int, 4),
        "eps": (_unit_interval, 0.1),
        "delta": (_unit_interval, 0.1),
        "workers": (_positive_int, 1),
    },
    "renyi": {
        "rho": (_matrix_ref, None),
        "sigma": (_matrix_ref, None),
        "d": (_positive_int, 2),
        "alpha": (_alpha, 2.0),
        "eps": (_unit_interval, 0.1),
        "delta": (_unit_interval, None),
        "rank": (_positive_int, None),
        "t_floor": (_positive, None),
        "workers": (_positive_int, 1),
    },
    "linsolve": {
        "A": (_matrix_ref, None),
        "b": (_matrix_ref, None),
        "d": (_positive_int, 4),
        "eps": (_unit_interval, 0.1),
        "delta": (_unit_interval, 0.25),
        "workers": (_positive_int, 1),
    },
    "hamsim": {
        "H1": (_matrix_ref, None),
        "H2": (_matrix_ref, None),
        "M": (_matrix_ref, None),
        "rho": (_matrix_ref, None),
        "d": (_positive_int, 4),
        "t": (_non_negative, None),
        "t_cap": (_positive, None),
        "eps": (_unit_interval, 0.05),
        "encoding_eps": (_non_negative, 0.0),
        "workers": (_positive_int, 1),
    },
    "verify-polys": {
        "eps": (_unit_interval, 1e-3),
        "delta": (_unit_interval, 0.1),
    },
    "variance-sweep": {
        "d": (_int_list, [2, 4]),
        "m_factors": (_float_list, [1, 4, 16]),
        "m": (_int_list, None),
        "N": (_int_list, [25, 100]),
        "replays": (_positive_int, 200),
        "workers": (_positive_int, 1),
    },
}


@dataclass
class RunSpec:
    """A fully resolved run: command, validated parameters, seed and output path."""

    command: str
    params: dict
    seed: int = DEFAULT_SEED
    output_path: str | None = None
    base_dir: Path = field(default_factory=Path.cwd)


def resolve_spec(command: str, config: dict | None, overrides: dict, base_dir: Path | None = None) -> RunSpec:
    """Merge config and flag overrides (flags win) and validate every key.

    Raises:
        ConfigError: unknown key or invalid value; the key is named.
    """
    if command not in PARAMS:
        raise ConfigError("command", f"unknown command {command!r}")
    decl = PARAMS[command]
    merged = {}
    seed, out = DEFAULT_SEED, None
    for source in (config or {}, {k: v for k, v in overrides.items() if v is not None}):
        for key, value in source.items():
            if key == "seed":
                if isinstance(value, bool) or not isinstance(value, int) or value < 0:
                    raise ConfigError("seed", f"expected a non-negative integer, got {value!r}")
                seed = value
            elif key == "out":
                if not isinstance(value, str):
                    raise ConfigError("out", "expected a file path")
                out = value
            elif key == "command":
                if value != command:
                    raise ConfigError("command", f"config is for {value!r}, not {command!r}")
            elif key not in decl:
                raise ConfigError(key, f"not a parameter of {command}")
            else:
                merged[key] = value
    params = {}
    for key, (check, default) in decl.items():
        params[key] = check(key, merged[key]) if key in merged and merged[key] is not None else default
    return RunSpec(command, params, seed, out, base_dir or Path.cwd())


def _matrix(spec: RunSpec, key: str) -> np.ndarray:
    ref = spec.params[key]
    if isinstance(ref, list):
        return matrix_from_rows(ref)
    if ref.startswith(FIXTURE_PREFIX):
        return load_fixture(ref[len(FIXTURE_PREFIX):])
    path = Path(ref)
    if not path.is_absolute():
        path = spec.base_dir / path
    if not path.exists():
        raise ConfigError(key, f"file {ref!r} does not exist")
    return load_matrix(path)


def _vector(spec: RunSpec, key: str) -> np.ndarray:
    """Inline list of numbers or [re, im] pairs, or a matrix reference flattened."""
    ref = spec.params[key]
    if isinstance(ref, list) and ref and all(not (isinstance(v, list) and v and isinstance(v[0], list)) for v in ref):
        return np.array([_entry(v, i, 0) for i, v in enumerate(ref)], dtype=np.complex128)
    return _matrix(spec, key).reshape(-1)


# ---------------------------------------------------------------------------
# Records


def _cplx(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _record(spec: RunSpec, label: str, estimate, oracle, error, n_queries: int, wall: float, details: dict) -> dict:
    return {
        "command": spec.command,
        "spec": spec.params,
        "seed": spec.seed,
        "label": label,
        "estimate": estimate,
        "oracle": oracle,
        "error": error,
        "n_queries": int(n_queries),
        "wall_time_s": wall,
        "details": details,
    }


def _fixture_stream(spec: RunSpec, *labels) -> RngStream:
    return RngStream(spec.seed, ("cli", "fixture") + labels)


# ---------------------------------------------------------------------------
# Commands


def _cmd_trace(spec: RunSpec):
    p = spec.params
    A, B = _matrix(spec, "A"), _matrix(spec, "B")
    t0 = time.perf_counter()
    oracle = apps.exact_trace_fg(A, B, p["f"], p["g"])
    if p["N"] is not None:
        # fixed-size run of the protocol with exact encodings
        fs, gs = apps.function_spec(p["f"]), apps.function_spec(p["g"])
        poly_f, sf = fs.build(p["delta"], p["eps"] / 10)
        poly_g, sg = gs.build(p["delta"], p["eps"] / 10)
        d = A.shape[0]
        cfg = protocol.ProtocolConfig(
            d, p["N"], p["m"] or d * d, spec.seed, poly_f, poly_g, blockenc.dilate(A), blockenc.dilate(B), workers=p["workers"]
        )
        est = protocol.run(cfg)
        value, queries = sf * sg * est.value, est.n_queries_simulated
        details = {"N": cfg.N, "m": cfg.m, "empirical_variance": est.empirical_variance}
    else:
        kw = {}
        if p["mode"] == "lipschitz_approx":
            kw["be_a"] = blockenc.perturbed(A, 1.0, p["encoding_eps"], _fixture_stream(spec, "A"))
            kw["be_b"] = blockenc.perturbed(B, 1.0, p["encoding_eps"], _fixture_stream(spec, "B"))
        res = apps.estimate_trace_fg(
            A, B, p["f"], p["g"], p["eps"], p["delta"], p["mode"], seed=spec.seed, workers=p["workers"], return_details=True, **kw
        )
        value, queries = res.value, res.run.n_queries
        details = {"N": res.run.N, "m": res.run.m, "rescale": res.rescale, "eps_budget": res.eps_budget.to_record()}
        if kw:
            details["encoding_eps_achieved"] = [kw["be_a"].eps, kw["be_b"].eps]
    wall = time.perf_counter() - t0
    yield _record(spec, f"Tr({p['f']}(A) {p['g']}(B))", _cplx(value), _cplx(oracle), abs(value - oracle), queries, wall, details)


def _pair(spec: RunSpec, lam: float):
    p = spec.params
    if (p["rho"] is None) != (p["sigma"] is None):
        raise ConfigError("rho" if p["rho"] is None else "sigma", "give both rho and sigma or neither")
    if p["rho"] is None:
        d = p["d"]
        if lam * d > 1:
            raise ConfigError("delta", f"no density matrix of dimension {d} has all eigenvalues >= {lam}")
        return (
            numkit.random_density_matrix(d, d, lam, _fixture_stream(spec, "rho")),
            numkit.random_density_matrix(d, d, lam, _fixture_stream(spec, "sigma")),
        )
    return _matrix(spec, "rho"), _matrix(spec, "sigma")


def _cmd_rel_entropy(spec: RunSpec):
    p = spec.params
    rho, sigma = _pair(spec, p["delta"])
    t0 = time.perf_counter()
    res = apps.relative_entropy(rho, sigma, p["eps"], p["delta"], seed=spec.seed, workers=p["workers"])
    wall = time.perf_counter() - t0
    oracle = apps.exact_relative_entropy(rho, sigma)
    yield _record(spec, "D(rho||sigma)", res.value, oracle, abs(res.value - oracle), res.n_queries, wall, res.to_record())


def _cmd_renyi(spec: RunSpec):
    p = spec.params
    if p["alpha"] > 1 and p["delta"] is None:
        raise ConfigError("delta", "alpha > 1 needs an eigenvalue floor delta")
    rho, sigma = _pair(spec, p["delta"] or 0.1)
    t0 = time.perf_counter()
    res = apps.renyi_entropy(
        rho, sigma, p["alpha"], p["eps"], p["delta"], p["rank"], t_floor=p["t_floor"], seed=spec.seed, workers=p["workers"]
    )
    wall = time.perf_counter() - t0
    oracle = apps.exact_renyi(rho, sigma, p["alpha"])
    yield _record(spec, f"D_{p['alpha']}(rho||sigma)", res.value, oracle, abs(res.value - oracle), res.n_queries, wall, res.to_record())


def _cmd_linsolve(spec: RunSpec):
    p = spec.params
    if p["A"] is None:
        A = numkit.random_well_conditioned(p["d"], _fixture_stream(spec, "A"), p["delta"])
    else:
        A = _matrix(spec, "A")
    if p["b"] is None:
        b = numkit.haar_unitary(A.shape[0], _fixture_stream(spec, "b"))[:, 0]
    else:
        b = _vector(spec, "b")
    t0 = time.perf_counter()
    res = apps.linear_solve(A, b, p["eps"], p["delta"], seed=spec.seed, workers=p["workers"])
    wall = time.perf_counter() - t0
    exact = np.linalg.solve(A, b)
    err = float(np.linalg.norm(res.x_tilde - exact))
    yield _record(spec, "A^-1 b", [_cplx(v) for v in res.x_tilde], [_cplx(v) for v in exact], err, res.n_queries, wall, res.to_record())


def _cmd_hamsim(spec: RunSpec):
    p = spec.params
    keys = ("H1", "H2", "M", "rho")
    given = [p[k] is not None for k in keys]
    if any(given) and not all(given):
        raise ConfigError(keys[given.index(False)], "give all of H1, H2, M, rho or none")
    if all(given):
        H1, H2, M, rho = (_matrix(spec, k) for k in keys)
    else:
        d = p["d"]
        H1 = numkit.random_hermitian(d, _fixture_stream(spec, "H1"), 1.0)
        H2 = numkit.random_hermitian(d, _fixture_stream(spec, "H2"), 1.0)
        M = numkit.random_hermitian(d, _fixture_stream(spec, "M"), 1.0)
        rho = numkit.random_density_matrix(d, d, 0.0, _fixture_stream(spec, "rho"))
    d = H1.shape[0]
    t = p["t"] if p["t"] is not None else 1 / (2 * math.sqrt(d))
    t0 = time.perf_counter()
    res = apps.hamiltonian_expectation(
        H1, H2, M, rho, t, p["eps"], t_cap=p["t_cap"], encoding_eps=p["encoding_eps"], seed=spec.seed, workers=p["workers"]
    )
    wall = time.perf_counter() - t0
    yield _record(spec, "Tr(M rho(t))", res.estimate, res.exact, abs(res.estimate - res.exact), res.n_queries, wall, res.to_record())


def _poly_record(spec: RunSpec, label: str, poly: polyapprox.BoundedPolynomial, eps: float, wall: float, achieved=None) -> dict:
    if achieved is None:
        achieved = max(r.max_observed_error for r in poly.certified if r.kind in ("error", "envelope"))
    checks = [
        {"kind": r.kind, "intervals": [list(iv) for iv in r.intervals], "bound": r.bound, "observed": r.max_observed_error}
        for r in poly.certified
    ]
    details = {"degree": poly.degree, "parity": poly.parity, "target_id": poly.target_id, "certificates": checks, "ok": achieved <= eps}
    return _record(spec, label, achieved, None, achieved, 0, wall, details)


def _cmd_verify_polys(spec: RunSpec):
    eps, delta = spec.params["eps"], spec.params["delta"]

    def timed(fn):
        t0 = time.perf_counter()
        out = fn()
        return out, time.perf_counter() - t0

    (p_log, _), w = timed(lambda: polyapprox.log_poly(delta, eps))
    yield _poly_record(spec, "log", p_log, eps, w)
    t = min(0.5, 1 - delta)
    if t > delta:
        p_rect, w = timed(lambda: polyapprox.rect_poly(t, delta, eps))
        # plateau and stop-band distances to 1 and 0
        achieved = max(r.max_observed_error for r in p_rect.certified if r.kind == "error")
        yield _poly_record(spec, "rect", p_rect, eps, w, achieved)
    x0 = 0.5

    def smooth(x):
        return np.exp(x - 1.0)

    p_loc, w = timed(lambda: polyapprox.local_poly(smooth, x0, min(delta, x0 / 2), eps, 1.0))
    achieved = max(r.max_observed_error for r in p_loc.certified if r.kind == "error")
    yield _poly_record(spec, "local", p_loc, eps, w, achieved)
    p_pos, w = timed(lambda: polyapprox.power_poly(0.5, "even", delta, eps))
    yield _poly_record(spec, "power_positive", p_pos, eps, w)
    p_neg, w = timed(lambda: polyapprox.power_poly(0.5, "even", delta, eps, sign="negative"))
    yield _poly_record(spec, "power_negative", p_neg, eps, w)
    p_inv, w = timed(lambda: polyapprox.inverse_poly(delta, eps))
    yield _poly_record(spec, "inverse", p_inv, eps, w)


def variance_law(d: int, m: int) -> float:
    return 1 + d**2 / m + d**4 / m**2


def _cmd_variance_sweep(spec: RunSpec):
    p = spec.params
    ratios = []
    ident = polyapprox.monomial(1)
    for d in p["d"]:
        v = numkit.haar_unitary(d, _fixture_stream(spec, "state", d))[:, 0]
        rho = np.outer(v, v.conj())
        be = blockenc.dilate(rho)
        ms = p["m"] if p["m"] is not None else [max(1, int(round(f * d * d))) for f in p["m_factors"]]
        for m in ms:
            for N in p["N"]:
                cfg = protocol.ProtocolConfig(d, N, m, spec.seed, ident, ident, be, be, workers=p["workers"]).replay("sweep", d, m, N)
                t0 = time.perf_counter()
                var = protocol.empirical_variance(cfg, p["replays"])
                wall = time.perf_counter() - t0
                law = variance_law(d, m)
                ratios.append(var * N / law)
                details = {"d": d, "m": m, "N": N, "replays": p["replays"], "law": law, "ratio": var * N / law}
                queries = p["replays"] * protocol.n_queries(cfg)
                yield _record(spec, f"Var*N d={d} m={m} N={N}", var * N, None, None, queries, wall, details)
    spread = max(ratios) / min(ratios)
    summary = {"fitted_constant": float(np.median(ratios)), "spread": spread, "cells": len(ratios)}
    yield _record(spec, "variance-law spread", spread, None, None, 0, 0.0, summary)


HANDLERS = {
    "trace": _cmd_trace,
    "rel-entropy": _cmd_rel_entropy,
    "renyi": _cmd_renyi,
    "linsolve": _cmd_linsolve,
    "hamsim": _cmd_hamsim,
    "verify-polys": _cmd_verify_polys,
    "variance-sweep": _cmd_variance_sweep,
}


def _dumps(rec: dict) -> str:
    return json.dumps(rec, sort_keys=True, allow_nan=True)


def run(spec: RunSpec, stdout=None, stderr=None) -> int:
    """Execute a resolved spec and write its records.

    Returns:
        exit code: 0 ok, 1 config error, 2 precondition violation, 3 approximation failure.
    """
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        records = list(HANDLERS[spec.command](spec))
    except ConfigError as exc:
        print(f"config error: {exc}", file=stderr)
        return EXIT_CONFIG
    except (PreconditionViolationError, ContractViolationError, UnreliableLogError) as exc:
        print(f"precondition violation: {exc}", file=stderr)
        return EXIT_PRECONDITION
    except ApproximationError as exc:
        print(f"approximation failure: {exc}", file=stderr)
        return EXIT_APPROXIMATION
    except (InvalidInputError, InvalidParameterError) as exc:
        print(f"invalid input: {exc}", file=stderr)
        return EXIT_PRECONDITION
    if spec.output_path:
        with open(spec.output_path, "a", encoding="utf-8") as fh:
            for rec in records:
                fh.write(_dumps(rec) + "\n")
    else:
        for rec in records:
            print(_dumps(rec), file=stdout)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="distrace", description="Two-party trace estimation experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON file with parameters")
        p.add_argument("--seed", type=int, help=f"root seed (default {DEFAULT_SEED})")
        p.add_argument("--out", help="append JSON-lines records to this file instead of stdout")
        p.add_argument("--eps", type=float)
        p.add_argument("--delta", type=float)
        multi = name == "variance-sweep"
        p.add_argument("--d", type=int, nargs="+" if multi else None)
        p.add_argument("--N", type=int, nargs="+" if multi else None)
        p.add_argument("--m", type=int, nargs="+" if multi else None)
        p.add_argument("--set", action="append", default=[], metavar="KEY=JSON", help="override any parameter")
    return parser


def _flag_overrides(args) -> dict:
    out = {}
    for key in ("seed", "out", "eps", "delta", "d", "N", "m"):
        val = getattr(args, key)
        if val is not None:
            out[key] = val
    for item in args.set:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(item, "expected KEY=JSON")
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config, base = None, Path.cwd()
    try:
        if args.config:
            path = Path(args.config)
            if not path.exists():
                raise ConfigError("config", f"file {args.config!r} does not exist")
            try:
                config = json.loads(path.read_text(encoding="utf-8"))
            except json.JSONDecodeError as exc:
                raise ConfigError("config", f"invalid JSON ({exc})") from exc
            if not isinstance(config, dict):
                raise ConfigError("config", "top level must be an object")
            base = path.resolve().parent
        overrides = _flag_overrides(args)
        # flag values only pass through the declarations of the chosen command
        for key in ("eps", "delta", "d", "N", "m"):
            if key in overrides and key not in PARAMS[args.command]:
                raise ConfigError(key, f"not a parameter of {args.command}")
        spec = resolve_spec(args.command, config, overrides, base)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(spec)


if __name__ == "__main__":
    sys.exit(main())
