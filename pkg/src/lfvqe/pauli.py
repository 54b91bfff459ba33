"""Pauli-string algebra and exact decomposition of Hermitian matrices.

Conventions used throughout the package:

  * A Pauli term is a string over the alphabet ``IXYZ`` with one letter per
    qubit, qubit 0 leftmost.  ``"XZII"`` means X on qubit 0 and Z on qubit 1.
  * Qubit 0 is the least-significant bit of the computational-basis index,
    so the matrix of a term is ``letter(n-1) (x) ... (x) letter(0)``.
  * A Pauli sum is a real-weighted combination of terms.  Real weights are
    exactly the Hermitian operators, which is all this package needs.

Coefficients are extracted with the trace inner product
``h_P = Tr(P H) / 2^n``; the Pauli matrices are orthogonal under it.
"""

from __future__ import annotations

from functools import lru_cache, reduce
from itertools import product
from typing import Iterator, Mapping

import numpy as np

from .exceptions import ValidationError

PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# relative threshold below which decomposition coefficients are dropped
PRUNE_RTOL = 1e-12


def _check_letters(letters: str) -> None:
    if not letters or any(c not in PAULI_1Q for c in letters):
        raise ValidationError(f"invalid Pauli letters {letters!r}")


@lru_cache(maxsize=None)
def pauli_matrix(letters: str) -> np.ndarray:
    """Dense matrix of a Pauli term, qubit 0 as the least-significant bit."""
    _check_letters(letters)
    mats = [PAULI_1Q[c] for c in reversed(letters)]
    out = reduce(np.kron, mats)
    out.flags.writeable = False
    return out


def check_hermitian(matrix: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    """Validate a square Hermitian matrix and return it as complex ndarray."""
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {m.shape}")
    scale = max(1.0, float(np.abs(m).max()))
    if not np.allclose(m, m.conj().T, atol=rtol * scale):
        raise ValidationError("matrix is not Hermitian within tolerance")
    return m


class PauliSum:
    """Real-weighted sum of Pauli terms on a fixed number of qubits.

    Terms are stored as a mapping from letter strings to coefficients.
    Zero and near-zero coefficients (relative to the largest magnitude)
    are dropped on construction, so equal operators have equal term maps.
    Instances are treated as immutable.
    """

    __slots__ = ("n_qubits", "_terms")

    def __init__(self, terms: Mapping[str, float], n_qubits: int | None = None):
        items = {}
        for letters, coeff in terms.items():
            _check_letters(letters)
            c = complex(coeff)
            if abs(c.imag) > 1e-12 * max(1.0, abs(c.real)):
                raise ValidationError(
                    f"coefficient of {letters!r} is not real: {coeff!r}")
            items[letters] = c.real
        lengths = {len(s) for s in items}
        if n_qubits is None:
            if not lengths:
                raise ValidationError("cannot infer qubit count from empty term map")
            n_qubits = lengths.pop()
            if lengths:
                raise ValidationError("terms have inconsistent qubit counts")
        else:
            if any(n != n_qubits for n in lengths):
                raise ValidationError("term length does not match n_qubits")
        if n_qubits < 1:
            raise ValidationError("n_qubits must be positive")
        cutoff = PRUNE_RTOL * max((abs(c) for c in items.values()), default=0.0)
        self.n_qubits = int(n_qubits)
        self._terms = {s: c for s, c in items.items() if abs(c) > cutoff}

    @property
    def terms(self) -> dict[str, float]:
        return dict(self._terms)

    @property
    def identity_label(self) -> str:
        return "I" * self.n_qubits

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[str]:
        return iter(self._terms)

    def __getitem__(self, letters: str) -> float:
        return self._terms[letters]

    def __contains__(self, letters: str) -> bool:
        return letters in self._terms

    def get(self, letters: str, default: float = 0.0) -> float:
        return self._terms.get(letters, default)

    def items(self):
        return self._terms.items()

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self.n_qubits == other.n_qubits and self._terms == other._terms

    def __repr__(self) -> str:
        body = ", ".join(f"{s}: {c:g}" for s, c in sorted(self._terms.items()))
        return f"PauliSum({{{body}}}, n_qubits={self.n_qubits})"

    def matrix(self) -> np.ndarray:
        """Dense Hermitian matrix of the sum (the inverse of :func:`decompose`)."""
        dim = 2 ** self.n_qubits
        out = np.zeros((dim, dim), dtype=complex)
        for letters, coeff in self._terms.items():
            out += coeff * pauli_matrix(letters)
        return out

    def strip_identity(self) -> tuple[float, "PauliSum"]:
        """Split off the all-identity coefficient.

        Returns ``(constant, rest)`` with ``constant + rest == self``.  The
        constant is what a measurement never needs to sample.
        """
        rest = dict(self._terms)
        constant = rest.pop(self.identity_label, 0.0)
        return constant, PauliSum(rest, self.n_qubits)

    def coefficient_norm(self) -> float:
        """Sum of absolute coefficients, an upper bound on the spectral radius."""
        return float(sum(abs(c) for c in self._terms.values()))

    def to_text(self) -> str:
        """One term per line, ``<letters> <coefficient>``, sorted by letters."""
        lines = [f"{s} {c:.17g}" for s, c in sorted(self._terms.items())]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, n_qubits: int | None = None) -> "PauliSum":
        """Parse the text format written by :meth:`to_text`.

        Blank lines and lines starting with ``#`` are ignored.  Repeated
        terms are summed.
        """
        terms: dict[str, float] = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValidationError(f"line {lineno}: expected '<letters> <coefficient>'")
            letters, coeff = parts
            try:
                value = float(coeff)
            except ValueError as exc:
                raise ValidationError(f"line {lineno}: bad coefficient {coeff!r}") from exc
            terms[letters] = terms.get(letters, 0.0) + value
        return cls(terms, n_qubits)


def decompose(matrix: np.ndarray) -> PauliSum:
    """Exact Pauli decomposition of a Hermitian matrix.

    The dimension must be a power of two.  Coefficients are
    ``Tr(P H) / 2^n`` and come out real for Hermitian input;
    ``reconstruct(decompose(H))`` returns H to within rounding.
    """
    m = check_hermitian(matrix)
    dim = m.shape[0]
    n = dim.bit_length() - 1
    if dim < 2 or 2 ** n != dim:
        raise ValidationError(f"dimension {dim} is not a power of two (>= 2)")
    terms = {}
    for combo in product("IXYZ", repeat=n):
        letters = "".join(combo)
        coeff = np.trace(pauli_matrix(letters) @ m) / dim
        terms[letters] = coeff.real
    return PauliSum(terms, n)


def reconstruct(psum: PauliSum) -> np.ndarray:
    """Dense matrix of a Pauli sum; alias for :meth:`PauliSum.matrix`."""
    return psum.matrix()
