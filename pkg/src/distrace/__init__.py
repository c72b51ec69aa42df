"""Two-party estimation of Tr(f(A) g(B)) from block-encoded matrices."""

from .apps import (
    estimate_trace_fg,
    hamiltonian_expectation,
    linear_solve,
    relative_entropy,
    renyi_entropy,
)
from .blockenc import BlockEncoding, dilate, from_purification
from .errors import DistraceError
from .numkit import RngStream
from .polyapprox import BoundedPolynomial
from .protocol import ProtocolConfig, TraceEstimate, run

__version__ = "0.1.0"

__all__ = [
    "BlockEncoding",
    "BoundedPolynomial",
    "DistraceError",
    "ProtocolConfig",
    "RngStream",
    "TraceEstimate",
    "dilate",
    "estimate_trace_fg",
    "from_purification",
    "hamiltonian_expectation",
    "linear_solve",
    "relative_entropy",
    "renyi_entropy",
    "run",
]
