"""Closed-form stationary states and trapping detection.

For ``theta = pi / sqrt(m)`` the upward rate ``sin^2(theta sqrt(n))`` vanishes
at ``n = m``, so an incoherent stream from the vacuum only ever fills levels
``0 .. m-1``. Detailed balance on those ``m`` levels gives
``p_n = r^n p_0`` with ``r = (1 - q) / q`` and ``p_0 = (r - 1) / (r^m - 1)``.
A normalisation over ``m + 1`` levels (exponent ``m + 1``) is *not* a fixed
point of the recurrence; :func:`fixed_point_residual` shows the difference.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .collision import apply_collision_diagonal
from .exceptions import InvalidParameterError

DEFAULT_M_SEARCH_LIMIT = 10_000
DEFAULT_Q_LIMIT = 4
MATCH_TOL = 1e-9

NORMALIZATION_NOTE = (
    "incoherent steady state normalised over levels 0..m-1 (exponent m); "
    "exponent m+1 leaves a non-zero fixed-point residual"
)


@dataclass(frozen=True)
class TrappingSpec:
    m: int
    Q: int
    theta: float

    @property
    def trap_level(self) -> int:
        """Smallest n >= 1 with sin(theta sqrt(n)) = 0; levels >= this stay empty."""
        for n in range(1, self.m + 1):
            k = self.Q * math.sqrt(n / self.m)
            if abs(k - round(k)) < 1e-12:
                return n
        return self.m


def theta_from_m(m_eff: float, Q: int = 1) -> float:
    if m_eff <= 0:
        raise InvalidParameterError(f"m_eff must be positive, got {m_eff!r}")
    return Q * math.pi / math.sqrt(m_eff)


def trapping_condition(
    theta: float,
    m_search_limit: int = DEFAULT_M_SEARCH_LIMIT,
    q_limit: int = DEFAULT_Q_LIMIT,
) -> TrappingSpec | None:
    """Return the smallest-``Q`` representation ``theta = Q pi / sqrt(m)``."""
    if not theta > 0:
        raise InvalidParameterError(f"theta must be positive, got {theta!r}")
    for Q in range(1, q_limit + 1):
        m = round((Q * math.pi / theta) ** 2)
        if 1 <= m <= m_search_limit and abs(theta - theta_from_m(m, Q)) <= MATCH_TOL:
            return TrappingSpec(m=int(m), Q=Q, theta=theta_from_m(m, Q))
    return None


def _check_q_m(q, m):
    if not 0.0 <= q <= 1.0:
        raise InvalidParameterError(f"q must lie in [0, 1], got {q!r}")
    if m < 1:
        raise InvalidParameterError(f"m must be >= 1, got {m!r}")


def _pad(p, n_max):
    if n_max is None:
        return p
    if n_max + 1 < p.size:
        raise InvalidParameterError(f"n_max={n_max} too small for {p.size} levels")
    out = np.zeros(n_max + 1)
    out[: p.size] = p
    return out


def incoherent_steady_state(q: float, m: int, n_max: int | None = None) -> np.ndarray:
    """Stationary populations for an incoherent stream at ``theta = pi/sqrt(m)``.

    Returns ``m`` levels, or ``n_max + 1`` levels zero-padded if given. The
    limits ``q = 0`` and ``q = 1`` are number states at ``m - 1`` and ``0``.
    """
    _check_q_m(q, m)
    p = np.zeros(m)
    if q == 0:
        p[m - 1] = 1.0
    elif q == 1:
        p[0] = 1.0
    else:
        r = (1.0 - q) / q
        # geometric weights relative to the largest term avoid overflow for big m
        log_w = np.arange(m) * math.log(r)
        w = np.exp(log_w - log_w.max())
        p = w / w.sum()
    return _pad(p, n_max)


def incoherent_purity_closed_form(q: float, m: int, levels: int | None = None) -> float:
    """``(r-1)/(r+1) * (r^(2M) - 1) / (r^M - 1)^2`` with ``M = levels``.

    ``levels`` defaults to ``m``, the number of populated levels.
    """
    _check_q_m(q, m)
    big_m = m if levels is None else levels
    if q in (0.0, 1.0):
        return 1.0
    r = (1.0 - q) / q
    if r == 1.0:
        return 1.0 / big_m
    if r > 1.0:
        # divide through by r^(2M)
        x = 1.0 / r
        return (r - 1) / (r + 1) * (1 - x ** (2 * big_m)) / (1 - x**big_m) ** 2
    return (r - 1) / (r + 1) * (r ** (2 * big_m) - 1) / (r**big_m - 1) ** 2


def large_m_purity(q: float) -> float:
    return 1.0 - 2.0 * q


def incoherent_steady_purity(q: float, m: int) -> float:
    p = incoherent_steady_state(q, m)
    return float(p @ p)


def fixed_point_residual(q: float, m: int, p=None, n_max: int | None = None) -> float:
    """Max-norm change of ``p`` under one incoherent collision at ``pi/sqrt(m)``."""
    if p is None:
        p = incoherent_steady_state(q, m, n_max=n_max if n_max is not None else m + 1)
    p = np.asarray(p, dtype=float)
    return float(np.max(np.abs(apply_collision_diagonal(theta_from_m(m), q, p) - p)))


def cotangent_state(q: float, m: int, n_max: int) -> np.ndarray:
    """Stationary populations of a coherent (c = 1) stream at ``theta = pi/sqrt(m)``.

    Successive ratios are ``r * cot^2(pi sqrt(n) / (2 sqrt(m)))`` for
    ``1 <= n < m``; levels ``n >= m`` are empty.
    """
    if not 0.0 < q < 1.0:
        raise InvalidParameterError(f"q must lie in (0, 1), got {q!r}")
    if m < 2:
        raise InvalidParameterError(f"m must be >= 2, got {m!r}")
    if n_max + 1 < m:
        raise InvalidParameterError(f"n_max={n_max} cannot hold {m} levels")
    r = (1.0 - q) / q
    n = np.arange(1, m, dtype=float)
    ratios = r / np.tan(np.pi * np.sqrt(n) / (2.0 * math.sqrt(m))) ** 2
    log_w = np.concatenate([[0.0], np.cumsum(np.log(ratios))])
    w = np.exp(log_w - log_w.max())
    return _pad(w / w.sum(), n_max)


def cotangent_wavefunction(q: float, m: int, n_max: int) -> np.ndarray:
    """Pure stationary field state whose populations are :func:`cotangent_state`.

    Amplitudes carry the phase ``(-i)^n`` fixed by the ``-i`` in the
    collision unitary with real qubit coherence.
    """
    p = cotangent_state(q, m, n_max)
    return np.sqrt(p) * (-1j) ** np.arange(p.size)
