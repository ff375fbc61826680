"""Truncated Fock-space field states and qubit states.

Field density matrices are plain ``(dim, dim)`` complex numpy arrays with
``dim = n_max + 1``, indexed by photon number. Qubit matrices use the ordered
basis ``(|g>, |e>)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidParameterError, TruncationError

HERMITICITY_TOL = 1e-9
TRACE_TOL = 1e-9
PSD_TOL = 1e-9


@dataclass(frozen=True)
class QubitState:
    q: float
    c: float
    data: np.ndarray

    @property
    def coherence(self) -> float:
        return float(self.data[0, 1].real)


@dataclass(frozen=True)
class ValidityReport:
    trace_deviation: float
    hermiticity_violation: float
    min_eigenvalue: float
    top_population: float
    tol: float

    @property
    def valid(self) -> bool:
        return (
            self.trace_deviation <= self.tol
            and self.hermiticity_violation <= self.tol
            and self.min_eigenvalue >= -self.tol
        )


def _check_unit_interval(name, value):
    if not (0.0 <= value <= 1.0):
        raise InvalidParameterError(f"{name} must lie in [0, 1], got {value!r}")


def vacuum_state(n_max: int) -> np.ndarray:
    if n_max < 1:
        raise InvalidParameterError(f"n_max must be >= 1, got {n_max!r}")
    rho = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def fock_state(n: int, n_max: int) -> np.ndarray:
    if not 0 <= n <= n_max:
        raise InvalidParameterError(f"level {n} outside 0..{n_max}")
    rho = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    rho[n, n] = 1.0
    return rho


def diagonal_state(populations) -> np.ndarray:
    """Density matrix with the given populations on the diagonal."""
    p = np.asarray(populations, dtype=float)
    return np.diag(p).astype(complex)


def build_qubit_state(q: float, c: float) -> QubitState:
    """Qubit with ground weight ``q`` and real coherence fraction ``c``."""
    _check_unit_interval("q", q)
    _check_unit_interval("c", c)
    off = c * np.sqrt(q * (1.0 - q))
    data = np.array([[q, off], [off, 1.0 - q]], dtype=complex)
    return QubitState(q=float(q), c=float(c), data=data)


def validate(rho: np.ndarray, tol: float = TRACE_TOL) -> ValidityReport:
    rho = np.asarray(rho)
    herm = float(np.max(np.abs(rho - rho.conj().T))) if rho.size else 0.0
    # eigvalsh only reads one triangle, so symmetrise first
    evals = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    return ValidityReport(
        trace_deviation=float(abs(np.trace(rho) - 1.0)),
        hermiticity_violation=herm,
        min_eigenvalue=float(evals[0]),
        top_population=float(rho[-1, -1].real),
        tol=tol,
    )


def resize(rho: np.ndarray, new_n_max: int, max_discard: float = 1e-12):
    """Grow or shrink the Fock cutoff.

    Growing zero-pads. Shrinking drops levels above ``new_n_max`` and
    renormalises the trace; the discarded population is returned alongside
    the new matrix and must not exceed ``max_discard``.

    Returns
    -------
    (new_rho, discarded_weight)
    """
    if new_n_max < 1:
        raise InvalidParameterError(f"new_n_max must be >= 1, got {new_n_max!r}")
    rho = np.asarray(rho)
    dim, new_dim = rho.shape[0], new_n_max + 1
    if new_dim >= dim:
        out = np.zeros((new_dim, new_dim), dtype=complex)
        out[:dim, :dim] = rho
        return out, 0.0
    discarded = float(np.sum(rho.diagonal()[new_dim:].real))
    if discarded > max_discard:
        raise TruncationError(
            f"shrinking to n_max={new_n_max} discards weight {discarded:.3e} "
            f"> bound {max_discard:.3e}"
        )
    out = np.array(rho[:new_dim, :new_dim], dtype=complex)
    kept = np.trace(out).real
    if kept > 0:
        out = out * (np.trace(rho).real / kept)
    return out, discarded
