"""Synthetic readout noise and measurement-error mitigation.

The noise channel is readout-only: each qubit independently misreads 0 as 1
with probability p01 and 1 as 0 with probability p10, both capped at 0.5 so
the channel stays invertible.  The channel acts on outcome distributions
through the tensor product of per-qubit 2x2 confusion matrices.

Mitigation inverts a calibration matrix A (A[i][j] = P(read i | prepared j))
on the probability simplex: plain inversion when it already lands there,
otherwise constrained least squares, so the corrected histogram is always a
valid distribution.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .exceptions import NumericsError, ValidationError
from .seeding import generator


@dataclass(frozen=True)
class ReadoutNoise:
    """Per-qubit readout flip probabilities (p01, p10)."""

    per_qubit: tuple[tuple[float, float], ...]

    def __post_init__(self):
        pairs = tuple((float(a), float(b)) for a, b in self.per_qubit)
        object.__setattr__(self, "per_qubit", pairs)
        if not pairs:
            raise ValidationError("noise model needs at least one qubit")
        for q, (p01, p10) in enumerate(pairs):
            if not (0.0 <= p01 <= 0.5 and 0.0 <= p10 <= 0.5):
                raise ValidationError(
                    f"qubit {q}: flip probabilities must lie in [0, 0.5]")

    @classmethod
    def uniform(cls, n_qubits: int, p01: float, p10: float | None = None) -> "ReadoutNoise":
        p10 = p01 if p10 is None else p10
        return cls(tuple((p01, p10) for _ in range(n_qubits)))

    @property
    def n_qubits(self) -> int:
        return len(self.per_qubit)

    def confusion_1q(self, qubit: int) -> np.ndarray:
        p01, p10 = self.per_qubit[qubit]
        return np.array([[1.0 - p01, p10], [p01, 1.0 - p10]])

    def confusion_matrix(self) -> np.ndarray:
        """Full 2^n x 2^n channel, qubit 0 as the LSB of the outcome index."""
        mats = [self.confusion_1q(q) for q in reversed(range(self.n_qubits))]
        return reduce(np.kron, mats)

    def to_json_dict(self) -> dict:
        return {"per_qubit": [list(p) for p in self.per_qubit]}

    @classmethod
    def from_json_dict(cls, data: dict) -> "ReadoutNoise":
        try:
            pairs = data["per_qubit"]
        except (KeyError, TypeError):
            raise ValidationError("noise JSON needs a 'per_qubit' field") from None
        return cls(tuple((float(a), float(b)) for a, b in pairs))


def load_noise(path) -> ReadoutNoise:
    with open(path, "r", encoding="utf-8") as fh:
        return ReadoutNoise.from_json_dict(json.load(fh))


def save_noise(noise: ReadoutNoise, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(noise.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


@dataclass(frozen=True)
class CalibrationMatrix:
    """Column-stochastic response matrix of the readout channel.

    ``source`` records how it was obtained: "exact" for the tensor product
    of the per-qubit confusion matrices, "estimated" for finite-shot
    calibration (with shots and seed kept for provenance).
    """

    n_qubits: int
    matrix: np.ndarray
    source: str
    shots: int | None = None
    seed: int | None = None

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        dim = 2 ** self.n_qubits
        if m.shape != (dim, dim):
            raise ValidationError(
                f"calibration matrix shape {m.shape} does not match {self.n_qubits} qubits")
        if m.min() < 0.0:
            raise ValidationError("calibration matrix entries must be non-negative")
        if not np.allclose(m.sum(axis=0), 1.0, atol=1e-9):
            raise ValidationError("calibration matrix columns must sum to 1")
        object.__setattr__(self, "matrix", m)
        m.flags.writeable = False

    def to_json_dict(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "source": self.source,
            "shots": self.shots,
            "seed": self.seed,
            "matrix": [[float(v) for v in row] for row in self.matrix],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "CalibrationMatrix":
        try:
            return cls(
                n_qubits=int(data["n_qubits"]),
                matrix=np.array(data["matrix"], dtype=float),
                source=str(data.get("source", "exact")),
                shots=data.get("shots"),
                seed=data.get("seed"),
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"bad calibration JSON: {exc}") from None


def load_calibration(path) -> CalibrationMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        return CalibrationMatrix.from_json_dict(json.load(fh))


def save_calibration(cal: CalibrationMatrix, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(cal.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _check_distribution(dist: np.ndarray) -> np.ndarray:
    d = np.asarray(dist, dtype=float)
    if d.ndim != 1 or d.min() < -1e-12 or abs(d.sum() - 1.0) > 1e-9:
        raise ValidationError("input is not a probability distribution")
    return np.clip(d, 0.0, None)


def corrupt(dist: np.ndarray, noise: ReadoutNoise) -> np.ndarray:
    """Push an outcome distribution through the readout channel."""
    d = _check_distribution(dist)
    if d.size != 2 ** noise.n_qubits:
        raise ValidationError("distribution size does not match the noise model")
    out = noise.confusion_matrix() @ d
    return out / out.sum()


def exact_calibration(noise: ReadoutNoise) -> CalibrationMatrix:
    """Calibration matrix equal to the exact tensor-product channel."""
    return CalibrationMatrix(noise.n_qubits, noise.confusion_matrix(), source="exact")


def calibrate(noise: ReadoutNoise, shots_per_state: int, seed: int) -> CalibrationMatrix:
    """Estimate the calibration matrix by preparing each basis state.

    Column j is the empirical outcome histogram of basis state j pushed
    through the channel, sampled with ``shots_per_state`` shots from a
    sub-stream derived from (seed, j).
    """
    if shots_per_state < 1:
        raise ValidationError("shots_per_state must be >= 1")
    dim = 2 ** noise.n_qubits
    exact = noise.confusion_matrix()
    cols = []
    for j in range(dim):
        rng = generator(seed, "calibration-column", j)
        counts = rng.multinomial(shots_per_state, exact[:, j])
        cols.append(counts / shots_per_state)
    return CalibrationMatrix(noise.n_qubits, np.column_stack(cols),
                             source="estimated", shots=shots_per_state, seed=seed)


def mitigate(raw_counts: np.ndarray, cal: CalibrationMatrix) -> np.ndarray:
    """Invert the calibration matrix on the probability simplex.

    Returns the distribution x minimizing ``||A x - p_hat||_2`` subject to
    ``x >= 0`` and ``sum(x) = 1``, where p_hat is the normalized histogram.
    Plain inversion is used whenever it already lands on the simplex.
    """
    counts = np.asarray(raw_counts, dtype=float)
    total = counts.sum()
    if counts.ndim != 1 or total < 1 or counts.min() < 0:
        raise ValidationError("raw_counts must be a non-negative histogram with >= 1 count")
    if counts.size != 2 ** cal.n_qubits:
        raise ValidationError("histogram size does not match the calibration matrix")
    p_hat = counts / total

    solution = None
    try:
        candidate = np.linalg.solve(cal.matrix, p_hat)
        if candidate.min() >= -1e-9:
            solution = np.clip(candidate, 0.0, None)
    except np.linalg.LinAlgError:
        pass

    if solution is None:
        from scipy.optimize import minimize

        a = cal.matrix

        def objective(x):
            r = a @ x - p_hat
            return float(r @ r)

        res = minimize(
            objective, p_hat, method="SLSQP",
            bounds=[(0.0, 1.0)] * p_hat.size,
            constraints=({"type": "eq", "fun": lambda x: float(x.sum() - 1.0)},),
            options={"maxiter": 1000, "ftol": 1e-14},
        )
        if not np.all(np.isfinite(res.x)):
            raise NumericsError("mitigation least-squares solve failed")
        solution = np.clip(res.x, 0.0, None)

    norm = solution.sum()
    if norm <= 0.0:
        raise NumericsError("mitigation produced an empty distribution")
    return solution / norm
