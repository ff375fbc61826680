"""Charging protocol: repeated collision followed by damping for one interval.

Each step maps ``rho -> exp(L t_r) Tr_q[U (rho (x) rho_q) U^dag]`` starting
from the vacuum. Time is measured in units of the collision interval, so the
damping rate passed to the Lindbladian is ``gamma_tr``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .analytics import trapping_condition
from .collision import apply_collision, jc_collision_map
from .dissipation import DampingStep, build_lindblad_bands
from .exceptions import InsufficientDataError, InvalidParameterError, InvalidStateError
from .hilbert import build_qubit_state, resize, vacuum_state, validate
from .observables import ObservableSet, measure

CONVERGED = "converged"
METASTABLE_THEN_GROWING = "metastable_then_growing"
GROWING_UNBOUNDED = "growing_unbounded"
TRUNCATION_OVERFLOW = "truncation_overflow"
UNSETTLED = "unsettled"

CLASSIFICATIONS = (CONVERGED, METASTABLE_THEN_GROWING, GROWING_UNBOUNDED, TRUNCATION_OVERFLOW, UNSETTLED)

# the thresholds below are engineering choices, reported with every outcome
THRESHOLD_NOTE = "classification thresholds are engineering choices, see RunOptions"


@dataclass(frozen=True)
class ModelParams:
    theta: float
    q: float
    c: float = 0.0
    gamma_tr: float = 0.0
    nbar: float = 0.0
    n_max: int | None = None  # None: pick from the trapping structure of theta
    collisions: int = 1000

    def __post_init__(self):
        if not self.theta > 0:
            raise InvalidParameterError(f"theta must be positive, got {self.theta!r}")
        for name in ("q", "c"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidParameterError(f"{name} must lie in [0, 1], got {v!r}")
        if self.gamma_tr < 0 or self.nbar < 0:
            raise InvalidParameterError("gamma_tr and nbar must be non-negative")
        if self.n_max is not None and self.n_max < 1:
            raise InvalidParameterError(f"n_max must be >= 1, got {self.n_max!r}")
        if self.collisions < 0:
            raise InvalidParameterError(f"collisions must be >= 0, got {self.collisions!r}")

    @classmethod
    def from_m(cls, m_eff: float, Q: int = 1, **kwargs) -> "ModelParams":
        return cls(theta=Q * math.pi / math.sqrt(m_eff), **kwargs)


@dataclass(frozen=True)
class RunOptions:
    eps_plateau: float = 1e-8  # relative energy spread over the trailing window
    window: int = 100
    leak_threshold: float = 1e-10  # top-level population that triggers growth
    n_max_cap: int = 1024
    growth_factor: float = 1.5
    decimate: int = 1
    stop_when_converged: bool = True
    smoothing: int = 50
    growth_tol: float = 1e-3  # min relative rise over the last 3 windows
    plateau_tol: float = 0.05  # max relative rise within a metastable window
    reacceleration: float = 1.5
    validate_tol: float = 1e-9

    def __post_init__(self):
        if self.window < 1 or self.decimate < 1 or self.smoothing < 1:
            raise InvalidParameterError("window, decimate and smoothing must be >= 1")
        if self.growth_factor <= 1:
            raise InvalidParameterError("growth_factor must exceed 1")


@dataclass(frozen=True)
class TrajectoryRecord:
    k: int
    observables: ObservableSet
    n_max_used: int

    def as_row(self) -> dict:
        o = self.observables
        return {
            "k": self.k,
            "energy": o.energy,
            "purity": o.purity,
            "fano": o.fano,
            "ergotropy": o.ergotropy,
            "trace_leak": o.trace_leak,
            "n_max": self.n_max_used,
        }


@dataclass
class RunOutcome:
    classification: str
    steady_window: tuple | None = None
    final_state: np.ndarray | None = field(default=None, repr=False)
    collisions_run: int = 0
    n_max_final: int | None = None
    trace_leak: float = 0.0
    notes: tuple = (THRESHOLD_NOTE,)

    def summary(self) -> dict:
        d = asdict(self)
        d.pop("final_state")
        d["steady_window"] = list(self.steady_window) if self.steady_window else None
        d["notes"] = list(self.notes)
        return d


def default_n_max(theta: float) -> int:
    spec = trapping_condition(theta)
    if spec is None:
        return 64
    return max(2 * spec.trap_level + 2, 32)


def _smooth(energies, width):
    e = np.asarray(energies, dtype=float)
    if width <= 1:
        return e
    c = np.cumsum(np.concatenate([[0.0], e]))
    idx = np.arange(1, e.size + 1)
    lo = np.maximum(idx - width, 0)
    return (c[idx] - c[lo]) / (idx - lo)


def _relative(delta, ref):
    return delta / ref if ref > 0 else (0.0 if delta == 0 else math.inf)


def classify_energies(energies, options: RunOptions = RunOptions(), leak: float = 0.0):
    """Classify a per-collision energy series (index 0 is collision 1).

    Returns ``(classification, steady_window)``.
    """
    e = np.asarray(energies, dtype=float)
    w = options.window
    if e.size < 2 * w:
        raise InsufficientDataError(f"need at least {2 * w} collisions, got {e.size}")
    k_end = e.size
    tail = e[-w:]
    if _relative(tail.max() - tail.min(), abs(tail[-1])) < options.eps_plateau and leak < options.leak_threshold:
        return CONVERGED, (k_end - w + 1, k_end)

    s = _smooth(e, options.smoothing)
    # smoothed energy at window boundaries k = 0, w, 2w, ...; vacuum has energy 0
    bounds = np.concatenate([[0.0], s[w - 1 :: w]])
    if bounds.size >= 4:
        last = bounds[-4:]
        rising = np.all(np.diff(last) > 0)
        if rising and _relative(last[-1] - last[0], last[-1]) > options.growth_tol:
            rates = np.array([_relative(b - a, b) for a, b in zip(bounds[:-1], bounds[1:])])
            for i in range(1, rates.size - 1):
                later = rates[i + 1 :]
                if (
                    rates[i] < options.plateau_tol
                    and rates[i] < rates[i - 1]
                    and later.max() > options.reacceleration * rates[i]
                ):
                    return METASTABLE_THEN_GROWING, (i * w, (i + 1) * w)
            return GROWING_UNBOUNDED, None
    return UNSETTLED, None


def classify_outcome(trajectory, options: RunOptions = RunOptions()) -> "RunOutcome":
    """Classify a recorded trajectory (must be recorded every collision)."""
    records = list(trajectory)
    energies = [r.observables.energy for r in records]
    leak = records[-1].observables.trace_leak if records else 0.0
    label, window = classify_energies(energies, options, leak)
    return RunOutcome(
        classification=label,
        steady_window=window,
        collisions_run=records[-1].k if records else 0,
        n_max_final=records[-1].n_max_used if records else None,
        trace_leak=leak,
    )


def convergence_index(values, rel: float = 0.01) -> int:
    """1-based collision index after which ``values`` stay within ``rel`` of the last value."""
    v = np.asarray(values, dtype=float)
    final = v[-1]
    outside = np.nonzero(np.abs(v - final) > rel * abs(final))[0]
    return int(outside[-1]) + 2 if outside.size else 1


def run_protocol(params: ModelParams, options: RunOptions = RunOptions()):
    """Run the charging protocol from the vacuum.

    Returns ``(records, outcome)``. Stops early once the energy has converged
    (checked at window boundaries) unless ``options.stop_when_converged`` is
    false, and stops with ``truncation_overflow`` once growing the cutoff
    would exceed ``options.n_max_cap``.
    """
    n_max = params.n_max if params.n_max is not None else default_n_max(params.theta)
    n_max = min(n_max, options.n_max_cap)
    qubit = build_qubit_state(params.q, params.c)

    def build(nm):
        cmap = jc_collision_map(params.theta, nm)
        damp = None
        if params.gamma_tr > 0:
            damp = DampingStep(build_lindblad_bands(params.gamma_tr, params.nbar, nm), 1.0)
        return cmap, damp

    rho = vacuum_state(n_max)
    cmap, damp = build(n_max)
    records, energies = [], []
    levels = np.arange(options.n_max_cap + 1, dtype=float)
    leak = 0.0
    label, window = None, None

    for k in range(1, params.collisions + 1):
        before = np.trace(rho).real
        rho = apply_collision(cmap, rho, qubit)
        if damp is not None:
            rho = damp(rho)
        leak += max(before - np.trace(rho).real, 0.0)
        energies.append(float(levels[: n_max + 1] @ rho.diagonal().real))
        if k % options.decimate == 0:
            records.append(TrajectoryRecord(k=k, observables=measure(rho, leak), n_max_used=n_max))

        if k % options.window == 0:
            report = validate(rho, tol=options.validate_tol)
            if report.hermiticity_violation > options.validate_tol or report.min_eigenvalue < -options.validate_tol:
                raise InvalidStateError(f"state invalid after collision {k}: {report}")
            if options.stop_when_converged and k >= 2 * options.window:
                lab, win = classify_energies(energies, options, leak)
                if lab == CONVERGED:
                    label, window = lab, win
                    break

        if rho[-1, -1].real > options.leak_threshold:
            if n_max >= options.n_max_cap:
                label = TRUNCATION_OVERFLOW
                break
            n_max = min(options.n_max_cap, math.ceil(n_max * options.growth_factor))
            rho, _ = resize(rho, n_max)
            cmap, damp = build(n_max)

    if label is None:
        try:
            label, window = classify_energies(energies, options, leak)
        except InsufficientDataError:
            label = UNSETTLED
    outcome = RunOutcome(
        classification=label,
        steady_window=window,
        final_state=rho,
        collisions_run=len(energies),
        n_max_final=n_max,
        trace_leak=leak,
    )
    return records, outcome
