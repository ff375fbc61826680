"""Self-test suites comparing each fast path against an independent route."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from . import analytics
from .collision import (
    apply_collision,
    apply_collision_diagonal,
    apply_collision_operator_form,
    jc_collision_map,
    ladder_operators,
    outgoing_qubit,
)
from .dissipation import DampingStep, build_lindblad_bands, dense_liouvillian, thermal_state
from .hilbert import build_qubit_state
from .observables import energy, population_distribution
from .runner import ModelParams, RunOptions, run_protocol

SEED = 20230901


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    tol: float
    passed: bool

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.name}: residual={self.residual:.3e} tol={self.tol:.1e}"


def _check(name, residual, tol, upper=True):
    ok = residual <= tol if upper else residual >= tol
    return CheckResult(name, float(residual), float(tol), bool(ok))


def random_density_matrix(rng, dim, support=None, rank=None, real=False):
    """Random state supported on levels ``0..support-1`` of a ``dim`` space."""
    support = dim if support is None else support
    rank = support if rank is None else rank
    x = rng.normal(size=(support, rank))
    if not real:
        x = x + 1j * rng.normal(size=(support, rank))
    small = x @ x.conj().T
    rho = np.zeros((dim, dim), dtype=complex)
    rho[:support, :support] = small / np.trace(small).real
    return rho


def random_pure_state(rng, dim, support=None):
    support = dim if support is None else support
    v = np.zeros(dim, dtype=complex)
    v[:support] = rng.normal(size=support) + 1j * rng.normal(size=support)
    return v / np.linalg.norm(v)


def jc_unitary_expm(theta, n_max):
    """``exp(-i theta (a sigma_+ + a_dag sigma_-))`` on qubit (x) truncated field."""
    a, ad = ladder_operators(n_max)
    sigma_plus = np.array([[0, 0], [1, 0]], dtype=complex)  # |e><g| in (g, e) order
    h = np.kron(sigma_plus, a) + np.kron(sigma_plus.T, ad)
    return expm(-1j * theta * h)


def _random_case(rng):
    theta = rng.uniform(0.05, 3.0)
    q, c = rng.uniform(0, 1), rng.uniform(0, 1)
    n_max = int(rng.integers(3, 16))
    return theta, q, c, n_max


def suite_oracles(cases=200, seed=SEED):
    rng = np.random.default_rng(seed)
    operator_form = diag = unitary = 0.0
    for _ in range(cases):
        theta, q, c, n_max = _random_case(rng)
        rho = random_density_matrix(rng, n_max + 1, support=n_max)
        cmap = jc_collision_map(theta, n_max)
        qubit = build_qubit_state(q, c)
        operator_form = max(operator_form, np.max(np.abs(apply_collision(cmap, rho, qubit) - apply_collision_operator_form(theta, q, c, rho))))

        p = rng.dirichlet(np.ones(n_max + 1))
        via_map = apply_collision(cmap, np.diag(p).astype(complex), build_qubit_state(q, 0.0))
        diag = max(diag, np.max(np.abs(via_map.diagonal().real - apply_collision_diagonal(theta, q, p))))

        u = jc_unitary_expm(theta, n_max)
        blocks = cmap.dense_unitary()
        keep = np.ones(2 * (n_max + 1), dtype=bool)
        keep[2 * (n_max + 1) - 1] = False  # |e, n_max> is cut differently by the two routes
        unitary = max(unitary, np.max(np.abs(u[:, keep] - blocks[:, keep])))

    bands = 0.0
    for gamma, nbar in ((0.3, 0.0), (0.7, 0.15), (1.3, 0.8)):
        n_max = 10
        rho = random_density_matrix(rng, n_max + 1)
        step = DampingStep(build_lindblad_bands(gamma, nbar, n_max), 1.0)
        dense = expm(dense_liouvillian(gamma, nbar, n_max)) @ rho.reshape(-1)
        bands = max(bands, np.max(np.abs(step(rho).reshape(-1) - dense)))
    return [
        _check("operator-form collision vs block partial trace", operator_form, 1e-10),
        _check("diagonal recurrence vs full channel (c=0)", diag, 1e-12),
        _check("block unitary vs matrix exponential", unitary, 1e-10),
        _check("band-wise damping vs dense superoperator", bands, 1e-10),
    ]


def suite_invariants(cases=200, seed=SEED):
    rng = np.random.default_rng(seed)
    trace = psd = herm = excitation = joint = 0.0
    for _ in range(cases):
        theta, q, c, n_max = _random_case(rng)
        dim = n_max + 1
        rho = random_density_matrix(rng, dim, support=n_max)
        cmap = jc_collision_map(theta, n_max)
        qubit = build_qubit_state(q, c)
        out = apply_collision(cmap, rho, qubit)
        trace = max(trace, abs(np.trace(out) - np.trace(rho)))
        psd = min(psd, np.linalg.eigvalsh(out)[0])
        herm = max(herm, np.max(np.abs(out - out.conj().T)))
        q_out = outgoing_qubit(cmap, rho, qubit)
        before = energy(rho) + qubit.data[1, 1].real
        after = energy(out) + q_out[1, 1].real
        excitation = max(excitation, abs(after - before))

        psi = random_pure_state(rng, dim, support=n_max)
        qpsi = np.array([math.sqrt(q), math.sqrt(1 - q)], dtype=complex)
        joint_vec = cmap.dense_unitary() @ np.kron(qpsi, psi)
        joint_rho = np.outer(joint_vec, joint_vec.conj())
        joint = max(joint, abs(np.sum(np.abs(joint_rho) ** 2) - 1.0))

    damp_trace = 0.0
    for _ in range(20):
        # cutoff far above the support so heating cannot reach it
        rho = random_density_matrix(rng, 61, support=10)
        step = DampingStep(build_lindblad_bands(rng.uniform(0, 1), rng.uniform(0, 0.3), 60), 1.0)
        damp_trace = max(damp_trace, abs(np.trace(step(rho)) - 1.0))
    return [
        _check("collision trace preservation", trace, 1e-10),
        _check("collision positivity (min eigenvalue)", psd, -1e-9, upper=False),
        _check("collision Hermiticity", herm, 1e-12),
        _check("excitation conservation", excitation, 1e-10),
        _check("joint purity under one collision", joint, 1e-12),
        _check("damping trace preservation", damp_trace, 1e-10),
    ]


def suite_steady_states(q=0.25, m=15):
    results = []
    results.append(_check("incoherent fixed point residual", analytics.fixed_point_residual(q, m), 1e-12))
    closed = analytics.incoherent_purity_closed_form(q, m)
    results.append(_check("closed-form purity vs fixed point", abs(closed - analytics.incoherent_steady_purity(q, m)), 1e-10))
    results.append(_check("large-m purity approximation", abs(closed - analytics.large_m_purity(q)), 1e-6))

    p = np.zeros(m + 2)
    p[0] = 1.0
    theta = analytics.theta_from_m(m)
    for _ in range(20000):
        nxt = apply_collision_diagonal(theta, q, p)
        if np.max(np.abs(nxt - p)) < 1e-15:
            break
        p = nxt
    target = analytics.incoherent_steady_state(q, m, n_max=m + 1)
    results.append(_check("iterated recurrence vs closed-form state", np.max(np.abs(p - target)), 1e-10))

    records, outcome = run_protocol(
        ModelParams(theta=theta, q=q, c=1.0, n_max=2 * m + 2, collisions=3000), RunOptions()
    )
    cot = analytics.cotangent_state(q, m, 2 * m + 2)
    sim = population_distribution(outcome.final_state)
    results.append(_check("coherent long run vs cotangent state", np.max(np.abs(sim - cot)), 1e-6))

    nbar, n_max = 0.15, 40
    th = thermal_state(nbar, n_max)
    step = DampingStep(build_lindblad_bands(1.0, nbar, n_max), 3.0)
    results.append(_check("thermal state is a damping fixed point", np.max(np.abs(step(th) - th)), 1e-9))
    return results


SUITES = {
    "oracles": suite_oracles,
    "invariants": suite_invariants,
    "steady_states": suite_steady_states,
}
