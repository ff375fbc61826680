"""Thermal damping of the cavity mode between collisions.

The generator is

    L(rho) = gamma (nbar + 1) (a rho a^dag - {N, rho} / 2)
           + gamma nbar (a^dag rho a - {a a^dag, rho} / 2)

It only couples ``rho[n, n+d]`` to ``rho[n +- 1, n +- 1 + d]``, so each
off-diagonal band ``d`` evolves independently under a real tridiagonal
matrix. The thermal pump out of the top level is not reflected back; that
weight shows up as truncation leak.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .exceptions import InvalidParameterError, StiffnessError

RK4_STEP_SCALE = 0.1
RK4_MIN_SUBSTEPS = 4
DEFAULT_STIFFNESS_BOUND = 1.0e3


@dataclass(frozen=True)
class LindbladBands:
    gamma: float
    nbar: float
    n_max: int
    generators: tuple  # generators[d] has shape (n_max + 1 - d,) * 2

    @property
    def dim(self) -> int:
        return self.n_max + 1


def _band_generator(gamma, nbar, dim, d):
    size = dim - d
    n = np.arange(size, dtype=float)
    gen = np.diag(-0.5 * gamma * (nbar + 1) * (2 * n + d) - 0.5 * gamma * nbar * (2 * n + d + 2))
    if size > 1:
        up = gamma * (nbar + 1) * np.sqrt((n[:-1] + 1) * (n[:-1] + 1 + d))
        down = gamma * nbar * np.sqrt(n[1:] * (n[1:] + d))
        gen += np.diag(up, 1) + np.diag(down, -1)
    return gen


def build_lindblad_bands(gamma: float, nbar: float, n_max: int) -> LindbladBands:
    if gamma < 0:
        raise InvalidParameterError(f"gamma must be >= 0, got {gamma!r}")
    if nbar < 0:
        raise InvalidParameterError(f"nbar must be >= 0, got {nbar!r}")
    if n_max < 1:
        raise InvalidParameterError(f"n_max must be >= 1, got {n_max!r}")
    dim = n_max + 1
    gens = tuple(_band_generator(gamma, nbar, dim, d) for d in range(dim))
    return LindbladBands(gamma=float(gamma), nbar=float(nbar), n_max=int(n_max), generators=gens)


def _band_indices(dim, d):
    rows = np.arange(dim - d)
    return rows, rows + d


def _apply_band_maps(maps, rho):
    dim = rho.shape[0]
    out = np.empty_like(rho, dtype=complex)
    for d, fn in enumerate(maps):
        rows, cols = _band_indices(dim, d)
        v = fn(rho[rows, cols])
        out[rows, cols] = v
        if d:
            out[cols, rows] = v.conj()
    return out


class DampingStep:
    """Precomputed ``exp(L * duration)`` applied band by band.

    Building it costs one small matrix exponential per band; applying it is
    O(dim^2). Reuse one instance for every collision of a run.
    """

    def __init__(self, bands: LindbladBands, duration: float):
        if duration < 0:
            raise InvalidParameterError(f"duration must be >= 0, got {duration!r}")
        self.bands = bands
        self.duration = float(duration)
        self.propagators = tuple(expm(g * duration) for g in bands.generators)

    def __call__(self, rho):
        rho = np.asarray(rho)
        if rho.shape != (self.bands.dim, self.bands.dim):
            raise InvalidParameterError(
                f"state has shape {rho.shape}, bands built for dim {self.bands.dim}"
            )
        return _apply_band_maps([p.__matmul__ for p in self.propagators], rho)


def rk4_substeps(bands: LindbladBands, duration: float) -> int:
    return max(RK4_MIN_SUBSTEPS, math.ceil(bands.gamma * duration * bands.n_max / RK4_STEP_SCALE))


def _rk4(gen, v, duration, steps):
    h = duration / steps
    for _ in range(steps):
        k1 = gen @ v
        k2 = gen @ (v + 0.5 * h * k1)
        k3 = gen @ (v + 0.5 * h * k2)
        k4 = gen @ (v + h * k3)
        v = v + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return v


def apply_damping(
    bands: LindbladBands,
    rho: np.ndarray,
    duration: float,
    method: str = "expm",
    substeps: int | None = None,
    stiffness_bound: float = DEFAULT_STIFFNESS_BOUND,
) -> np.ndarray:
    """Evolve ``rho`` under the damping generator for ``duration``.

    ``method="expm"`` exponentiates each band exactly. ``method="rk4"`` uses
    fixed-step RK4 with ``ceil(gamma * duration * n_max / 0.1)`` substeps
    (at least 4) unless ``substeps`` is given, and refuses when
    ``gamma * duration * (nbar + 1) * n_max`` exceeds ``stiffness_bound``.
    """
    if duration < 0:
        raise InvalidParameterError(f"duration must be >= 0, got {duration!r}")
    rho = np.asarray(rho, dtype=complex)
    if duration == 0 or bands.gamma == 0:
        return rho.copy()
    if method == "expm":
        return DampingStep(bands, duration)(rho)
    if method != "rk4":
        raise InvalidParameterError(f"unknown method {method!r}")
    load = bands.gamma * duration * (bands.nbar + 1) * bands.n_max
    if load > stiffness_bound:
        raise StiffnessError(
            f"gamma*t*(nbar+1)*n_max = {load:.3g} exceeds bound {stiffness_bound:.3g}; "
            "use method='expm' or lower n_max"
        )
    steps = substeps or rk4_substeps(bands, duration)
    maps = [lambda v, g=g: _rk4(g, v, duration, steps) for g in bands.generators]
    return _apply_band_maps(maps, rho)


def thermal_state(nbar: float, n_max: int) -> np.ndarray:
    """Bose-Einstein populations renormalised over ``0..n_max``."""
    if nbar < 0:
        raise InvalidParameterError(f"nbar must be >= 0, got {nbar!r}")
    if n_max < 1:
        raise InvalidParameterError(f"n_max must be >= 1, got {n_max!r}")
    ratio = nbar / (1.0 + nbar)
    p = ratio ** np.arange(n_max + 1, dtype=float)
    return np.diag(p / p.sum()).astype(complex)


def dense_liouvillian(gamma: float, nbar: float, n_max: int) -> np.ndarray:
    """Full superoperator acting on row-major ``vec(rho)``.

    Built from truncated ladder matrices with ``a a^dag`` taken as ``N + 1``
    on every level, which matches the band generators above.
    """
    dim = n_max + 1
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1)
    ad = a.T
    eye = np.eye(dim)
    num = np.diag(np.arange(dim, dtype=float))
    anti = num + eye

    # row-major vec: vec(A rho B) = kron(A, B.T) vec(rho)
    def spre(op):
        return np.kron(op, eye)

    def spost(op):
        return np.kron(eye, op.T)

    loss = np.kron(a, ad.T) - 0.5 * (spre(num) + spost(num))
    gain = np.kron(ad, a.T) - 0.5 * (spre(anti) + spost(anti))
    return gamma * (nbar + 1) * loss + gamma * nbar * gain
