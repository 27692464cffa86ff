"""Find and stabilize unstable cycles of discrete maps with predictive control."""

import json
from decimal import Decimal

from . import _core
from ._core import DEFAULT_PRECISION, Error, IoError, ValidationError, list_maps, run_manifest, verify_lemma1

__all__ = [
    "DEFAULT_PRECISION",
    "Error",
    "IoError",
    "ValidationError",
    "analyze",
    "chebyshev",
    "from_exact_multipliers",
    "iterate",
    "list_maps",
    "run_manifest",
    "search",
    "verify_lemma1",
]


def _text(x):
    return x if isinstance(x, str) else str(Decimal(x) if isinstance(x, float) else x)


def iterate(map, state, k=1, precision=0):
    """f^(k)(state) as a list of Decimals."""
    return [Decimal(v) for v in _core.iterate(map, [_text(v) for v in state], k, precision)]


def search(map, period, theta=None, coefficients=None, scheme=None, initial_states=None, precision=DEFAULT_PRECISION,
           **options):
    """Run one search and return its result document (the same JSON a manifest run writes)."""
    entry = {"map": map, "period": period, **options}
    if theta is not None:
        entry["theta"] = _text(theta)
    if coefficients is not None:
        entry["coefficients"] = [_text(c) for c in coefficients]
    if scheme is not None:
        entry["scheme"] = scheme
    if initial_states is not None:
        entry["initial_states"] = [[_text(v) for v in s] for s in initial_states]
    manifest = json.dumps({"precision": precision, "searches": [entry]})
    return json.loads(_core.search_json(manifest)[0])


def analyze(map, period, points, theta, precision=0):
    """Stability report of a cycle under the control coefficients theta."""
    pts = [[_text(v) for v in p] for p in points]
    return json.loads(_core.analyze(map, period, pts, [_text(t) for t in theta], precision))


def from_exact_multipliers(multipliers, precision=0):
    pairs = [(_text(m.real), _text(m.imag)) if isinstance(m, complex) else (_text(m), "0") for m in multipliers]
    return [Decimal(t) for t in _core.from_exact_multipliers(pairs, precision)]


def chebyshev(n, one_sided=False, precision=0):
    coeffs, bound = _core.chebyshev(n, one_sided, precision)
    return [Decimal(c) for c in coeffs], Decimal(bound)
