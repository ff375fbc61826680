"""Scalar diagnostics of a field state. Energies are in units of the mode
frequency and measured from the vacuum, so energy is the mean photon number."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .exceptions import MicromaserError, UndefinedObservableError


@dataclass(frozen=True)
class ObservableSet:
    energy: float
    purity: float
    fano: float  # nan only when the state has exactly zero photons
    ergotropy: float
    mean: float
    variance: float
    trace_leak: float = 0.0

    def as_dict(self):
        return asdict(self)


def population_distribution(rho) -> np.ndarray:
    return np.asarray(rho).diagonal().real.copy()


def _moments(rho):
    p = population_distribution(rho)
    n = np.arange(p.size, dtype=float)
    mean = float(n @ p)
    variance = float((n - mean) ** 2 @ p)
    return mean, variance


def energy(rho) -> float:
    p = population_distribution(rho)
    return float(np.arange(p.size) @ p)


def purity(rho) -> float:
    return float(np.sum(np.abs(np.asarray(rho)) ** 2))


def fano(rho) -> float:
    """Variance-to-mean ratio of the photon number."""
    mean, variance = _moments(rho)
    if mean <= 0:
        raise UndefinedObservableError("Fano factor is undefined for the vacuum")
    return variance / mean


def passive_energy(rho) -> float:
    try:
        evals = np.linalg.eigvalsh(np.asarray(rho))
    except np.linalg.LinAlgError as exc:
        raise MicromaserError(f"eigendecomposition failed: {exc}") from exc
    # largest eigenvalue on the lowest level
    return float(np.arange(evals.size) @ evals[::-1])


def ergotropy(rho) -> float:
    return max(energy(rho) - passive_energy(rho), 0.0)


def measure(rho, trace_leak: float = 0.0) -> ObservableSet:
    mean, variance = _moments(rho)
    return ObservableSet(
        energy=mean,
        purity=purity(rho),
        fano=variance / mean if mean > 0 else float("nan"),
        ergotropy=ergotropy(rho),
        mean=mean,
        variance=max(variance, 0.0),
        trace_leak=float(trace_leak),
    )
