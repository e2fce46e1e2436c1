import numpy as np
import pytest

from conftest import random_state
from torus_que.errors import DimensionMismatchError
from torus_que.hilbert import (
    StateVector,
    basis_state,
    dft,
    dft_columns,
    inner,
    inverse_dft,
    inverse_dft_columns,
    parity,
)


@pytest.mark.parametrize("n", [1, 2, 7, 16])
def test_basis_states_are_orthonormal(n):
    for q in range(n):
        for r in range(n):
            expected = 1.0 if q == r else 0.0
            value = inner(basis_state(n, q), basis_state(n, r))
            assert value == pytest.approx(expected)


def test_inner_is_linear_in_first_argument(rng):
    psi, phi = random_state(rng, 9), random_state(rng, 9)
    scaled = StateVector(2j * psi.entries)
    assert inner(scaled, phi) == pytest.approx(2j * inner(psi, phi))
    assert inner(phi, scaled) == pytest.approx(-2j * inner(phi, psi))


def test_inner_rejects_mixed_dimensions():
    with pytest.raises(DimensionMismatchError):
        inner(basis_state(3, 0), basis_state(4, 0))


def test_state_entries_are_read_only():
    psi = basis_state(4, 1)
    with pytest.raises(ValueError):
        psi.entries[0] = 1.0


@pytest.mark.parametrize("n", [5, 8, 33])
def test_dft_is_unitary(rng, n):
    psi, phi = random_state(rng, n), random_state(rng, n)
    assert inner(dft(psi), dft(phi)) == pytest.approx(inner(psi, phi))
    np.testing.assert_allclose(inverse_dft(dft(psi)).entries, psi.entries, atol=1e-12)


@pytest.mark.parametrize("n", [4, 9])
def test_dft_squared_is_parity(rng, n):
    psi = random_state(rng, n)
    np.testing.assert_allclose(dft(dft(psi)).entries, parity(psi).entries, atol=1e-12)


def test_parity_reflects_basis_states():
    for q in range(6):
        np.testing.assert_array_equal(
            parity(basis_state(6, q)).entries, basis_state(6, -q).entries
        )


def test_dft_kernel_convention():
    # psi_hat(P) = N^{-1/2} sum_Q psi(Q) e_N(-QP)
    n = 8
    transformed = dft(basis_state(n, 1)).entries
    expected = np.exp(-2j * np.pi * np.arange(n) / n)
    np.testing.assert_allclose(transformed, expected, atol=1e-12)


def test_column_transforms_match_vector_transforms(rng):
    block = rng.standard_normal((6, 3)) + 1j * rng.standard_normal((6, 3))
    forward = dft_columns(block)
    for j in range(3):
        np.testing.assert_allclose(
            forward[:, j], dft(StateVector(block[:, j])).entries, atol=1e-12
        )
    np.testing.assert_allclose(inverse_dft_columns(forward), block, atol=1e-12)
