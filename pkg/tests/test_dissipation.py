import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from micromaser.checks import random_density_matrix
from micromaser.dissipation import (
    DampingStep,
    apply_damping,
    build_lindblad_bands,
    dense_liouvillian,
    rk4_substeps,
    thermal_state,
)
from micromaser.exceptions import InvalidParameterError, StiffnessError
from micromaser.hilbert import fock_state
from micromaser.observables import energy


def test_zero_gamma_gives_zero_generators():
    bands = build_lindblad_bands(0.0, 0.3, 6)
    assert all(np.count_nonzero(g) == 0 for g in bands.generators)


def test_zero_temperature_cascade():
    gamma = 0.7
    g0 = build_lindblad_bands(gamma, 0.0, 5).generators[0]
    n = np.arange(6)
    np.testing.assert_allclose(np.diag(g0), -gamma * n)
    np.testing.assert_allclose(np.diag(g0, 1), gamma * n[1:])
    np.testing.assert_allclose(np.diag(g0, -1), 0)


def test_population_generator_columns_sum_to_zero():
    gamma, nbar, n_max = 0.4, 0.15, 12
    g0 = build_lindblad_bands(gamma, nbar, n_max).generators[0]
    sums = g0.sum(axis=0)
    np.testing.assert_allclose(sums[:-1], 0, atol=1e-14)
    # the top level pumps into the missing level n_max + 1
    assert sums[-1] == pytest.approx(-gamma * nbar * (n_max + 1))


def test_band_entries():
    gamma, nbar, n_max, d = 0.3, 0.2, 8, 3
    g = build_lindblad_bands(gamma, nbar, n_max).generators[d]
    n = 2
    assert g[n, n] == pytest.approx(-0.5 * gamma * (nbar + 1) * (2 * n + d) - 0.5 * gamma * nbar * (2 * n + d + 2))
    assert g[n, n + 1] == pytest.approx(gamma * (nbar + 1) * math.sqrt((n + 1) * (n + 1 + d)))
    assert g[n, n - 1] == pytest.approx(gamma * nbar * math.sqrt(n * (n + d)))


@pytest.mark.parametrize("gamma, nbar", [(-0.1, 0.0), (0.1, -0.5)])
def test_rejects_negative_rates(gamma, nbar):
    with pytest.raises(InvalidParameterError):
        build_lindblad_bands(gamma, nbar, 4)


def test_single_photon_decay():
    bands = build_lindblad_bands(1.0, 0.0, 6)
    out = apply_damping(bands, fock_state(1, 6), 0.5)
    assert out[1, 1].real == pytest.approx(math.exp(-0.5), abs=1e-12)
    assert out[0, 0].real == pytest.approx(1 - math.exp(-0.5), abs=1e-12)
    assert math.exp(-0.5) == pytest.approx(0.606531, abs=1e-6)


@pytest.mark.parametrize("duration", [0.1, 1.0, 10.0])
def test_thermal_state_is_fixed(duration):
    th = thermal_state(0.15, 40)
    out = apply_damping(build_lindblad_bands(0.8, 0.15, 40), th, duration)
    np.testing.assert_allclose(out, th, atol=1e-9)


def test_zero_duration_is_identity(rng):
    rho = random_density_matrix(rng, 9)
    np.testing.assert_array_equal(apply_damping(build_lindblad_bands(1.0, 0.2, 8), rho, 0.0), rho)


def test_thermal_state_values():
    np.testing.assert_array_equal(thermal_state(0.0, 5), fock_state(0, 5))
    th = thermal_state(0.15, 40)
    # geometric series truncation correction is far below double precision here
    assert th[0, 0].real == pytest.approx(1 / 1.15, abs=1e-15)
    assert energy(th) == pytest.approx(0.15, abs=1e-9)


@pytest.mark.parametrize("gamma, nbar", [(0.3, 0.0), (0.7, 0.15), (1.5, 0.6)])
def test_bands_match_dense_superoperator(gamma, nbar, rng):
    n_max = 10
    rho = random_density_matrix(rng, n_max + 1)
    band = apply_damping(build_lindblad_bands(gamma, nbar, n_max), rho, 0.9)
    dense = (expm(0.9 * dense_liouvillian(gamma, nbar, n_max)) @ rho.reshape(-1)).reshape(rho.shape)
    np.testing.assert_allclose(band, dense, atol=1e-10, rtol=0)


def test_dense_liouvillian_zero_temperature_action():
    # L(|1><1|) = gamma (|0><0| - |1><1|)
    gamma = 0.6
    lv = dense_liouvillian(gamma, 0.0, 3)
    out = (lv @ fock_state(1, 3).reshape(-1)).reshape(4, 4)
    np.testing.assert_allclose(out, gamma * (fock_state(0, 3) - fock_state(1, 3)), atol=1e-15)


def test_mean_photon_relaxation():
    gamma, nbar, n_max = 0.5, 0.15, 60
    rho = np.diag(np.r_[np.zeros(4), 0.5, 0.5, np.zeros(n_max - 5)]).astype(complex)
    n0 = energy(rho)
    step = DampingStep(build_lindblad_bands(gamma, nbar, n_max), 0.25)
    for k in range(1, 41):
        rho = step(rho)
        assert energy(rho) == pytest.approx(nbar + (n0 - nbar) * math.exp(-gamma * 0.25 * k), abs=1e-6)


def test_coherence_decay_zero_temperature():
    rho = 0.5 * np.array([[1, 1], [1, 1]], dtype=complex)
    rho = np.pad(rho, ((0, 4), (0, 4)))
    gamma = 0.9
    for t in (0.1, 0.5, 2.0):
        out = apply_damping(build_lindblad_bands(gamma, 0.0, 5), rho, t)
        assert out[0, 1].real == pytest.approx(0.5 * math.exp(-gamma * t / 2), abs=1e-8)


def _trace_norm(x):
    return np.sum(np.abs(np.linalg.eigvalsh(x)))


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=2**31), st.floats(min_value=0.05, max_value=1.0))
def test_contraction_towards_thermal(seed, gamma):
    rng = np.random.default_rng(seed)
    nbar, n_max = 0.15, 30
    rho = random_density_matrix(rng, n_max + 1, support=8)
    th = thermal_state(nbar, n_max)
    step = DampingStep(build_lindblad_bands(gamma, nbar, n_max), 0.3)
    dist = _trace_norm(rho - th)
    for _ in range(15):
        rho = step(rho)
        new = _trace_norm(rho - th)
        assert new <= dist + 1e-12
        dist = new


def test_damping_preserves_trace(rng):
    rho = random_density_matrix(rng, 41, support=10)
    out = apply_damping(build_lindblad_bands(0.1, 0.15, 40), rho, 1.0)
    assert abs(np.trace(out) - 1) <= 1e-10


def test_rk4_substep_rule():
    assert rk4_substeps(build_lindblad_bands(1e-3, 0.15, 40), 1.0) == 4
    assert rk4_substeps(build_lindblad_bands(0.1, 0.15, 40), 1.0) == 40


@pytest.mark.parametrize("gamma, n_max", [(1e-3, 40), (0.1, 40), (0.5, 10)])
def test_rk4_agrees_with_exact(gamma, n_max, rng):
    # the substep rule reaches a few 1e-8 relative at gamma*t = 0.1, n_max = 40
    rho = random_density_matrix(rng, n_max + 1, support=n_max // 2)
    bands = build_lindblad_bands(gamma, 0.15, n_max)
    rk = apply_damping(bands, rho, 1.0, method="rk4")
    ex = apply_damping(bands, rho, 1.0)
    assert np.max(np.abs(rk - ex)) / np.max(np.abs(ex)) < 5e-8


def test_rk4_stiffness_bound():
    bands = build_lindblad_bands(10.0, 1.0, 100)
    with pytest.raises(StiffnessError):
        apply_damping(bands, np.eye(101) / 101, 1.0, method="rk4")


def test_unknown_method():
    with pytest.raises(InvalidParameterError):
        apply_damping(build_lindblad_bands(1.0, 0.0, 3), np.eye(4) / 4, 1.0, method="euler")
