"""Resonant Jaynes-Cummings collisions between a qubit and the cavity field.

The joint unitary ``exp(-i theta (a sigma_+ + a^dag sigma_-))`` is stored as
four field-space blocks ``K[j, i]`` such that
``U (|i> (x) |psi>) = sum_j |j> (x) K[j, i] |psi>``. Every block is a single
shifted diagonal, so one collision costs O(dim^2).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatchError, InvalidParameterError
from .hilbert import QubitState, build_qubit_state

G, E = 0, 1

# offset +1 raises the photon number (|n> -> |n+1>), -1 lowers it
_OFFSETS = {(G, G): 0, (E, E): 0, (G, E): +1, (E, G): -1}


@dataclass(frozen=True)
class CollisionMap:
    theta: float
    n_max: int
    gg: np.ndarray  # cos(theta sqrt(n)), n = 0..n_max
    ee: np.ndarray  # cos(theta sqrt(n+1)), n = 0..n_max
    ge: np.ndarray  # -i sin(theta sqrt(n+1)), source n = 0..n_max-1
    eg: np.ndarray  # -i sin(theta sqrt(n)), source n = 1..n_max

    @property
    def dim(self) -> int:
        return self.n_max + 1

    def block(self, j: int, i: int):
        values = {(G, G): self.gg, (E, E): self.ee, (G, E): self.ge, (E, G): self.eg}
        return _OFFSETS[j, i], values[j, i]

    def dense_block(self, j: int, i: int) -> np.ndarray:
        offset, values = self.block(j, i)
        return np.diag(values.astype(complex), -offset)

    def dense_unitary(self) -> np.ndarray:
        """Joint operator in the ordering qubit (x) field, i.e. index ``i*dim + n``."""
        d = self.dim
        u = np.zeros((2 * d, 2 * d), dtype=complex)
        for j in (G, E):
            for i in (G, E):
                u[j * d:(j + 1) * d, i * d:(i + 1) * d] = self.dense_block(j, i)
        return u


def jc_collision_map(theta: float, n_max: int) -> CollisionMap:
    if not theta > 0:
        raise InvalidParameterError(f"theta must be positive, got {theta!r}")
    if n_max < 1:
        raise InvalidParameterError(f"n_max must be >= 1, got {n_max!r}")
    n = np.arange(n_max + 1, dtype=float)
    root_n, root_n1 = np.sqrt(n), np.sqrt(n + 1.0)
    return CollisionMap(
        theta=float(theta),
        n_max=int(n_max),
        gg=np.cos(theta * root_n),
        ee=np.cos(theta * root_n1),
        ge=-1j * np.sin(theta * root_n1[:-1]),
        eg=-1j * np.sin(theta * root_n[1:]),
    )


def _left(offset, values, m):
    if offset == 0:
        return values[:, None] * m
    out = np.zeros(m.shape, dtype=complex)
    if offset > 0:
        out[1:] = values[:, None] * m[:-1]
    else:
        out[:-1] = values[:, None] * m[1:]
    return out


def _sandwich(a, rho, b):
    """``A rho B^dag`` for banded blocks ``a`` and ``b``."""
    left = _left(*a, rho)
    return _left(*b, left.conj().T).conj().T


def _check_dims(cmap, rho):
    if rho.shape != (cmap.dim, cmap.dim):
        raise DimensionMismatchError(
            f"state has shape {rho.shape}, collision map expects {(cmap.dim, cmap.dim)}"
        )


def apply_collision(cmap: CollisionMap, rho_b: np.ndarray, rho_q: QubitState) -> np.ndarray:
    """Field state after one collision with the qubit traced out.

    Weight pushed above ``n_max`` is dropped, so the output trace falls short
    of the input trace by exactly the truncation leak.
    """
    rho_b = np.asarray(rho_b)
    _check_dims(cmap, rho_b)
    qd = rho_q.data if isinstance(rho_q, QubitState) else np.asarray(rho_q)
    out = np.zeros(rho_b.shape, dtype=complex)
    for j in (G, E):
        kg, ke = cmap.block(j, G), cmap.block(j, E)
        out += qd[G, G].real * _sandwich(kg, rho_b, kg)
        out += qd[E, E].real * _sandwich(ke, rho_b, ke)
        if qd[G, E] != 0:
            x = qd[G, E] * _sandwich(kg, rho_b, ke)
            out += x + x.conj().T
    return 0.5 * (out + out.conj().T)


def outgoing_qubit(cmap: CollisionMap, rho_b: np.ndarray, rho_q: QubitState) -> np.ndarray:
    """Reduced 2x2 state of the qubit leaving the cavity."""
    rho_b = np.asarray(rho_b)
    _check_dims(cmap, rho_b)
    qd = rho_q.data if isinstance(rho_q, QubitState) else np.asarray(rho_q)
    out = np.zeros((2, 2), dtype=complex)
    for j in (G, E):
        for jp in (G, E):
            for i in (G, E):
                for ip in (G, E):
                    a = cmap.dense_block(j, i)
                    b = cmap.dense_block(jp, ip)
                    out[j, jp] += qd[i, ip] * np.trace(a @ rho_b @ b.conj().T)
    return out


def apply_collision_diagonal(theta: float, q: float, p) -> np.ndarray:
    """Population update for an incoherent (c = 0) qubit stream.

    Only valid for diagonal field states; the top level loses its upward flux
    to truncation just like :func:`apply_collision`.
    """
    p = np.asarray(p, dtype=float)
    if np.any(p < -1e-12):
        raise InvalidParameterError("populations must be non-negative")
    if not 0.0 <= q <= 1.0:
        raise InvalidParameterError(f"q must lie in [0, 1], got {q!r}")
    n = np.arange(p.size, dtype=float)
    s2 = np.sin(theta * np.sqrt(n)) ** 2
    s2_up = np.sin(theta * np.sqrt(n + 1.0)) ** 2
    above = np.zeros_like(p)
    above[:-1] = p[1:]
    below = np.zeros_like(p)
    below[1:] = p[:-1]
    return s2_up * (q * above - (1 - q) * p) + s2 * ((1 - q) * below - q * p) + p


def ladder_operators(n_max: int):
    """Truncated ``(a, a_dag)`` as dense matrices."""
    a = np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1)
    return a, a.T.copy()


def apply_collision_operator_form(theta: float, q: float, c: float, rho_b: np.ndarray) -> np.ndarray:
    """Operator-form collision map used as an independent cross-check.

    Written with explicit dense ``a``, ``a_dag`` and the functions
    ``cos(theta sqrt(N+1))``, ``cos(theta sqrt(N))`` and
    ``sin(theta sqrt(N+1)) / sqrt(N+1)``. The last coherence term is
    ``a_dag s rho c_N``, the Hermitian partner of ``c_N rho s a``.
    """
    rho = np.asarray(rho_b, dtype=complex)
    build_qubit_state(q, c)
    dim = rho.shape[0]
    a, ad = ladder_operators(dim - 1)
    n = np.arange(dim, dtype=float)
    c_n1 = np.diag(np.cos(theta * np.sqrt(n + 1)))
    c_n = np.diag(np.cos(theta * np.sqrt(n)))
    s_n1 = np.diag(np.sin(theta * np.sqrt(n + 1)) / np.sqrt(n + 1))
    coh = c * np.sqrt(q * (1 - q))
    out = (
        (1 - q) * c_n1 @ rho @ c_n1
        + q * s_n1 @ a @ rho @ ad @ s_n1
        + (1 - q) * ad @ s_n1 @ rho @ s_n1 @ a
        + q * c_n @ rho @ c_n
    )
    if coh:
        out = out + 1j * coh * (
            c_n @ rho @ s_n1 @ a
            + c_n1 @ rho @ ad @ s_n1
            - s_n1 @ a @ rho @ c_n1
            - ad @ s_n1 @ rho @ c_n
        )
    return out
