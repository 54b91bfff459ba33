"""Pauli algebra: term matrices, decomposition, reconstruction, text format."""

import numpy as np
import pytest

from conftest import random_hermitian
from lfvqe import PauliSum, decompose, pauli_matrix, reconstruct
from lfvqe.exceptions import ValidationError


def test_matrix_of_identity():
    assert np.array_equal(pauli_matrix("I"), np.eye(2))


def test_matrix_of_z():
    assert np.array_equal(pauli_matrix("Z"), np.diag([1.0, -1.0]))


def test_matrix_of_zi_lsb_convention():
    # Z on qubit 0, identity on qubit 1: expanding I (x) Z by hand under
    # LSB-first indexing alternates the sign with the low bit
    assert np.array_equal(pauli_matrix("ZI"), np.diag([1.0, -1.0, 1.0, -1.0]))


def test_matrix_of_rejects_bad_letters():
    with pytest.raises(ValidationError):
        pauli_matrix("XQ")


def test_decompose_identity():
    psum = decompose(np.eye(4))
    assert psum.terms == {"II": 1.0}


def test_decompose_pion_identity_coefficient(pion_matrix):
    # oracle: Tr(H)/4 from the four diagonal entries
    oracle = (640323.0 + 346707.0 + 346707.0 + 640323.0) / 4
    assert oracle == 493515.0
    psum = decompose(pion_matrix)
    assert psum["II"] == pytest.approx(493515.0, abs=1e-6)


def test_decompose_pion_zz_coefficient(pion_matrix):
    # oracle: Tr((Z x Z) H)/4 with diagonal sign pattern (+, -, -, +)
    oracle = (640323.0 - 346707.0 - 346707.0 + 640323.0) / 4
    assert oracle == 146808.0
    psum = decompose(pion_matrix)
    assert psum["ZZ"] == pytest.approx(146808.0, abs=1e-6)


def test_decompose_rejects_non_power_of_two():
    with pytest.raises(ValidationError):
        decompose(np.eye(3))


def test_decompose_rejects_non_hermitian():
    with pytest.raises(ValidationError):
        decompose(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_reconstruct_identity():
    assert np.allclose(reconstruct(PauliSum({"II": 1.0})), np.eye(4))


def test_reconstruct_scalar_multiple():
    assert np.allclose(reconstruct(PauliSum({"Z": 2.0})), np.diag([2.0, -2.0]))


def test_reconstruct_pion_roundtrip(pion_matrix):
    assert np.abs(reconstruct(decompose(pion_matrix)) - pion_matrix).max() < 1e-10


def test_strip_identity_basic():
    constant, rest = PauliSum({"II": 5.0, "ZZ": 1.0}).strip_identity()
    assert constant == 5.0
    assert rest.terms == {"ZZ": 1.0}


def test_strip_identity_absent():
    constant, rest = PauliSum({"XX": 2.0}).strip_identity()
    assert constant == 0.0
    assert rest.terms == {"XX": 2.0}


def test_strip_identity_pion_constant(pion_matrix):
    constant, rest = decompose(pion_matrix).strip_identity()
    assert constant == pytest.approx(493515.0, abs=1e-6)
    assert "II" not in rest
    assert np.abs(constant * np.eye(4) + rest.matrix() - pion_matrix).max() < 1e-10


@pytest.mark.parametrize("dim", [2, 4, 8])
def test_roundtrip_random_hermitian(dim):
    rng = np.random.default_rng(100 + dim)
    for _ in range(100):
        h = random_hermitian(rng, dim)
        assert np.abs(reconstruct(decompose(h)) - h).max() < 1e-10


def test_decompose_coefficients_real():
    rng = np.random.default_rng(7)
    for dim in (2, 4, 8):
        h = random_hermitian(rng, dim)
        for coeff in decompose(h).terms.values():
            assert isinstance(coeff, float)


def test_pauli_orthogonality():
    # Tr(P Q) = 2^n delta_PQ for every pair up to 3 qubits
    from itertools import product

    for n in (1, 2, 3):
        labels = ["".join(c) for c in product("IXYZ", repeat=n)]
        for a in labels:
            for b in labels:
                tr = np.trace(pauli_matrix(a) @ pauli_matrix(b))
                expected = 2.0 ** n if a == b else 0.0
                assert abs(tr - expected) < 1e-12


def test_decompose_linearity():
    rng = np.random.default_rng(21)
    h1 = random_hermitian(rng, 4)
    h2 = random_hermitian(rng, 4)
    a, b = 0.7, -2.3
    combo = decompose(a * h1 + b * h2)
    c1, c2 = decompose(h1), decompose(h2)
    labels = set(combo) | set(c1) | set(c2)
    for s in labels:
        assert combo.get(s) == pytest.approx(a * c1.get(s) + b * c2.get(s), abs=1e-12)


def test_zero_coefficients_pruned():
    psum = PauliSum({"XX": 0.0, "ZZ": 1.0})
    assert "XX" not in psum
    assert len(psum) == 1


def test_rejects_complex_coefficient():
    with pytest.raises(ValidationError):
        PauliSum({"X": 1.0 + 0.5j})


def test_rejects_inconsistent_lengths():
    with pytest.raises(ValidationError):
        PauliSum({"X": 1.0, "XX": 1.0})


def test_text_roundtrip(pion_matrix):
    psum = decompose(pion_matrix)
    again = PauliSum.from_text(psum.to_text())
    assert again == psum


def test_text_format_shape():
    text = PauliSum({"XZ": -1.5}).to_text()
    assert text == "XZ -1.5\n"


def test_text_parse_skips_comments_and_sums_repeats():
    psum = PauliSum.from_text("# comment\nZZ 1.0\n\nZZ 0.5\nXX 2\n")
    assert psum.terms == {"ZZ": 1.5, "XX": 2.0}


def test_text_parse_rejects_garbage():
    with pytest.raises(ValidationError):
        PauliSum.from_text("ZZ one\n")
    with pytest.raises(ValidationError):
        PauliSum.from_text("ZZ 1.0 extra\n")
