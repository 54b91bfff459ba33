"""Mappings from single-particle mode operators to qubit operators.

A mode operator is a d x d Hermitian matrix acting on d single-particle
modes (for the valence pion block, d = 4 spin configurations).  Exactly one
mode is occupied, which admits two encodings:

  * direct: one qubit per mode, occupation stored in the qubit, so physical
    states are the one-hot basis states.  Operators map through the
    Jordan-Wigner transformation ``a_k = Z_0 ... Z_{k-1} (X_k + iY_k)/2``.
  * compact: the index of the occupied mode stored in binary across
    ceil(log2(d)) qubits.  The operator is placed directly in the
    computational basis, so encoding is plain Pauli decomposition.

The direct encoding only promises to reproduce the mode operator on the
one-hot subspace (mode k corresponds to basis index ``1 << k``); its action
outside that subspace is whatever the JW image happens to be.  The ansatz
circuits never leave the subspace.
"""

from __future__ import annotations

import json
from enum import Enum

import numpy as np

from .exceptions import ValidationError
from .pauli import PauliSum, check_hermitian, decompose


class Encoding(str, Enum):
    """Fock-state encoding choice."""

    DIRECT = "direct"
    COMPACT = "compact"

    @classmethod
    def parse(cls, name: str) -> "Encoding":
        try:
            return cls(str(name).lower())
        except ValueError:
            raise ValidationError(
                f"unknown encoding {name!r}; expected 'direct' or 'compact'") from None


class ModeOperator:
    """Hermitian operator over single-particle modes, with a units tag."""

    __slots__ = ("n_modes", "entries", "units")

    def __init__(self, entries: np.ndarray, units: str = "dimensionless"):
        m = check_hermitian(entries)
        self.n_modes = m.shape[0]
        self.entries = m
        self.entries.flags.writeable = False
        self.units = str(units)

    def __repr__(self) -> str:
        return f"ModeOperator(n_modes={self.n_modes}, units={self.units!r})"

    def spectral_radius(self) -> float:
        return float(np.abs(np.linalg.eigvalsh(self.entries)).max())

    def to_json_dict(self) -> dict:
        pairs = [[float(z.real), float(z.imag)] for z in self.entries.reshape(-1)]
        return {"n_modes": self.n_modes, "units": self.units, "entries": pairs}

    @classmethod
    def from_json_dict(cls, data: dict) -> "ModeOperator":
        try:
            pairs = data["entries"]
        except (KeyError, TypeError):
            raise ValidationError("mode operator JSON needs an 'entries' field") from None
        flat = np.array([complex(re, im) for re, im in pairs])
        n = data.get("n_modes")
        if n is None:
            n = int(round(np.sqrt(flat.size)))
        if n * n != flat.size:
            raise ValidationError(
                f"entries length {flat.size} does not match n_modes={n}")
        return cls(flat.reshape(n, n), units=data.get("units", "dimensionless"))


def load_mode_operator(path) -> ModeOperator:
    with open(path, "r", encoding="utf-8") as fh:
        return ModeOperator.from_json_dict(json.load(fh))


def save_mode_operator(op: ModeOperator, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(op.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def qubit_count(encoding: Encoding, n_modes: int) -> int:
    """Qubits needed to hold one occupied mode out of ``n_modes``."""
    if n_modes < 1:
        raise ValidationError("n_modes must be positive")
    if encoding == Encoding.DIRECT:
        return n_modes
    return max(1, (n_modes - 1).bit_length())


def encode_direct(op: ModeOperator) -> PauliSum:
    """Jordan-Wigner image of a one-body mode operator.

    A diagonal element H_kk becomes ``H_kk (I - Z_k) / 2``.  An off-diagonal
    pair H_jk a_j^ a_k + h.c. becomes the usual XX + YY hopping string with a
    Z chain on the modes strictly between j and k; a complex H_jk adds the
    YX - XY combination weighted by its imaginary part.
    """
    d = op.n_modes
    iden = "I" * d
    terms: dict[str, float] = {}

    def add(letters: str, coeff: float) -> None:
        terms[letters] = terms.get(letters, 0.0) + coeff

    for k in range(d):
        hkk = op.entries[k, k].real
        add(iden, 0.5 * hkk)
        z = list(iden)
        z[k] = "Z"
        add("".join(z), -0.5 * hkk)

    for j in range(d):
        for k in range(j + 1, d):
            hjk = op.entries[j, k]
            if abs(hjk) == 0.0:
                continue
            chain = list(iden)
            for m in range(j + 1, k):
                chain[m] = "Z"
            xx, yy = list(chain), list(chain)
            xx[j] = xx[k] = "X"
            yy[j] = yy[k] = "Y"
            add("".join(xx), 0.5 * hjk.real)
            add("".join(yy), 0.5 * hjk.real)
            if hjk.imag != 0.0:
                yx, xy = list(chain), list(chain)
                yx[j], yx[k] = "Y", "X"
                xy[j], xy[k] = "X", "Y"
                add("".join(yx), 0.5 * hjk.imag)
                add("".join(xy), -0.5 * hjk.imag)

    return PauliSum(terms, d)


def encode_compact(op: ModeOperator) -> PauliSum:
    """Binary-index image of a mode operator.

    Mode k maps to computational-basis index k (qubit 0 is the LSB).  When
    the mode count is not a power of two the matrix is padded with a
    diagonal penalty exceeding ten times the spectral radius, so the
    spurious padded states can never undercut the physical spectrum.
    """
    d = op.n_modes
    n = qubit_count(Encoding.COMPACT, d)
    dim = 2 ** n
    if dim == d:
        return decompose(op.entries)
    penalty = 10.0 * op.spectral_radius() + 1.0
    padded = np.diag(np.full(dim, penalty, dtype=complex))
    padded[:d, :d] = op.entries
    return decompose(padded)


def encode(op: ModeOperator, encoding: Encoding) -> PauliSum:
    """Dispatch to :func:`encode_direct` or :func:`encode_compact`."""
    if encoding == Encoding.DIRECT:
        return encode_direct(op)
    if encoding == Encoding.COMPACT:
        return encode_compact(op)
    raise ValidationError(f"unknown encoding {encoding!r}")


def one_hot_index(mode: int) -> int:
    """Basis index of the direct-encoding state occupying ``mode``."""
    return 1 << mode
