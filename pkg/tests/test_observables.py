from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import poisson, unitary_group

from micromaser.analytics import incoherent_steady_state
from micromaser.checks import random_density_matrix, random_pure_state
from micromaser.dissipation import thermal_state
from micromaser.exceptions import UndefinedObservableError
from micromaser.hilbert import diagonal_state, fock_state, resize, vacuum_state
from micromaser.observables import (
    energy,
    ergotropy,
    fano,
    measure,
    passive_energy,
    population_distribution,
    purity,
)


def test_energy_examples():
    assert energy(fock_state(14, 20)) == 14
    assert energy(vacuum_state(5)) == 0


def test_energy_of_incoherent_steady_state():
    # exact rational sum n r^n / sum r^n over 0..14 with r = 3
    num = sum(Fraction(n * 3**n) for n in range(15))
    den = sum(Fraction(3**n) for n in range(15))
    rho = diagonal_state(incoherent_steady_state(0.25, 15, n_max=20))
    assert energy(rho) == pytest.approx(float(num / den), abs=1e-12)


def test_purity_examples():
    assert purity(fock_state(7, 10)) == 1
    assert purity(diagonal_state([0.5, 0.5])) == 0.5
    assert purity(diagonal_state(incoherent_steady_state(0.25, 15))) == pytest.approx(0.5, abs=1e-6)


def test_fano_examples():
    assert fano(fock_state(14, 20)) == 0
    assert fano(thermal_state(0.15, 40)) == pytest.approx(1.15, abs=1e-9)
    lam, n_max = 4.0, 80
    p = poisson.pmf(np.arange(n_max + 1), lam)
    assert fano(diagonal_state(p)) == pytest.approx(1.0, abs=1e-9)


def test_fano_undefined_at_vacuum():
    with pytest.raises(UndefinedObservableError):
        fano(vacuum_state(4))


def test_measure_marks_vacuum_fano_nan():
    assert np.isnan(measure(vacuum_state(4)).fano)


def test_ergotropy_examples():
    assert ergotropy(thermal_state(0.15, 40)) == pytest.approx(0.0, abs=1e-12)
    assert ergotropy(diagonal_state([0.25, 0.75])) == pytest.approx(0.5, abs=1e-12)
    assert ergotropy(fock_state(14, 20)) == pytest.approx(14, abs=1e-12)


def test_population_distribution():
    np.testing.assert_array_equal(population_distribution(vacuum_state(3)), [1, 0, 0, 0])
    ind = population_distribution(fock_state(14, 20))
    assert ind[14] == 1 and ind.sum() == 1
    th = population_distribution(thermal_state(0.15, 40))
    np.testing.assert_allclose(th[1:] / th[:-1], 0.15 / 1.15, rtol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2**31), st.integers(min_value=2, max_value=20))
def test_pure_states_have_full_ergotropy(seed, dim):
    rng = np.random.default_rng(seed)
    v = random_pure_state(rng, dim)
    rho = np.outer(v, v.conj())
    assert purity(rho) == pytest.approx(1.0, abs=1e-12)
    assert ergotropy(rho) == pytest.approx(energy(rho), abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2**31), st.integers(min_value=2, max_value=20))
def test_mixed_states_lose_ergotropy(seed, dim):
    rng = np.random.default_rng(seed)
    rho = random_density_matrix(rng, dim)
    assert purity(rho) < 1 - 1e-6
    assert ergotropy(rho) < energy(rho) - 1e-9
    assert 0 <= ergotropy(rho) <= energy(rho)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=2**31))
def test_passive_energy_unitarily_invariant(seed):
    rng = np.random.default_rng(seed)
    rho = random_density_matrix(rng, 8)
    u = unitary_group.rvs(8, random_state=seed % (2**32))
    assert passive_energy(u @ rho @ u.conj().T) == pytest.approx(passive_energy(rho), abs=1e-10)


def test_fano_of_single_level_mixtures_is_zero():
    assert fano(diagonal_state([0, 0, 0, 1.0])) == 0


def test_observables_invariant_under_padding(rng):
    rho = random_density_matrix(rng, 10)
    padded, _ = resize(rho, 30)
    a, b = measure(rho), measure(padded)
    for field in ("energy", "purity", "fano", "ergotropy", "variance"):
        assert getattr(a, field) == pytest.approx(getattr(b, field), abs=1e-12)
