"""Expectation values of Pauli sums: exact, or estimated from seeded shots.

The sampled path follows the per-term protocol: every non-identity term is
rotated into the computational basis (H for X, then S-dagger H for Y),
measured with its own shot budget from its own derived seed, and the
operator value is re-assembled as ``constant + sum_i h_i <P_i>``.  The
identity coefficient is never sampled; callers can ask for it to be left
out, which is how the "no constant" reporting mode works.

Shot outcomes are drawn from the exact Born distribution of the rotated
state, optionally pushed through a readout-noise channel first, and
optionally corrected back by calibration-matrix mitigation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .circuits import StateVector, _apply_single
from .exceptions import ValidationError
from .mitigation import CalibrationMatrix, ReadoutNoise, corrupt, exact_calibration, mitigate
from .pauli import PauliSum
from .seeding import derive_seed, generator

MODE_EXACT = "exact"
MODE_SAMPLED = "sampled"

DEFAULT_SHOTS = 8192

_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_SDG = np.array([[1, 0], [0, -1j]], dtype=complex)


def _parity(values: np.ndarray) -> np.ndarray:
    """Bitwise parity of each entry (values below 2^32)."""
    v = values.copy()
    for shift in (16, 8, 4, 2, 1):
        v ^= v >> shift
    return v & 1


def _term_masks(letters: str) -> tuple[int, int, int]:
    x_mask = z_like = n_y = 0
    for q, ch in enumerate(letters):
        if ch in "XY":
            x_mask |= 1 << q
        if ch in "ZY":
            z_like |= 1 << q
        if ch == "Y":
            n_y += 1
    return x_mask, z_like, n_y


def pauli_term_expectation(state: StateVector, letters: str) -> float:
    """Exact <psi|P|psi> for a single Pauli string."""
    if len(letters) != state.n_qubits:
        raise ValidationError("term length does not match the state's qubit count")
    x_mask, z_like, n_y = _term_masks(letters)
    amps = state.amplitudes
    idx = np.arange(amps.size)
    signs = 1 - 2 * _parity(idx & z_like)
    value = (1j) ** n_y * np.sum(np.conj(amps[idx ^ x_mask]) * signs * amps)
    return float(value.real)


def expectation_exact(state: StateVector, op: PauliSum) -> float:
    """Exact expectation of a Pauli sum, identity coefficient included."""
    if state.n_qubits != op.n_qubits:
        raise ValidationError("state and operator qubit counts differ")
    constant, rest = op.strip_identity()
    total = constant
    for letters in sorted(rest):
        total += rest[letters] * pauli_term_expectation(state, letters)
    return total


class TermEstimate(NamedTuple):
    mean: float
    std_error: float


@dataclass(frozen=True)
class EstimatorConfig:
    """Sampling policy for expectation estimation.

    In exact mode the amplitudes are contracted directly and noise settings
    are ignored.  In sampled mode each term gets ``shots_per_term`` shots
    with a seed derived from (seed, term letters).  When ``mitigation`` is
    on, histograms are corrected with ``calibration`` if given, else with
    the exact tensor calibration of ``noise``.
    """

    mode: str = MODE_EXACT
    shots_per_term: int = DEFAULT_SHOTS
    seed: int = 0
    noise: ReadoutNoise | None = None
    mitigation: bool = False
    calibration: CalibrationMatrix | None = None

    def __post_init__(self):
        if self.mode not in (MODE_EXACT, MODE_SAMPLED):
            raise ValidationError(f"unknown estimator mode {self.mode!r}")
        if self.mode == MODE_SAMPLED and self.shots_per_term < 1:
            raise ValidationError("sampled mode needs shots_per_term >= 1")

    def resolved_calibration(self) -> CalibrationMatrix | None:
        if not self.mitigation:
            return None
        if self.calibration is not None:
            return self.calibration
        if self.noise is not None:
            return exact_calibration(self.noise)
        return None


@dataclass(frozen=True)
class ShotEstimate:
    """An estimated operator value with its statistical uncertainty.

    ``constant`` is the operator's identity coefficient; ``value`` contains
    it only when ``constant_included`` is set, which keeps both reporting
    conventions recoverable from one record.
    """

    value: float
    std_error: float
    shots_used: int
    per_term: dict[str, TermEstimate] = field(default_factory=dict)
    constant: float = 0.0
    constant_included: bool = True

    @property
    def value_with_constant(self) -> float:
        return self.value if self.constant_included else self.value + self.constant

    @property
    def value_without_constant(self) -> float:
        return self.value - self.constant if self.constant_included else self.value

    def to_json_dict(self) -> dict:
        return {
            "value": self.value,
            "std_error": self.std_error,
            "shots_used": self.shots_used,
            "constant": self.constant,
            "constant_included": self.constant_included,
            "value_with_constant": self.value_with_constant,
            "value_without_constant": self.value_without_constant,
            "per_term": {
                s: {"mean": t.mean, "std_error": t.std_error}
                for s, t in sorted(self.per_term.items())
            },
        }


def _rotated_distribution(state: StateVector, letters: str,
                          noise: ReadoutNoise | None) -> tuple[np.ndarray, int]:
    """Born distribution in the term's measurement basis plus support mask."""
    amps = state.amplitudes
    support = 0
    for q, ch in enumerate(letters):
        if ch == "I":
            continue
        support |= 1 << q
        if ch == "X":
            amps = _apply_single(amps, _HADAMARD, q)
        elif ch == "Y":
            amps = _apply_single(amps, _SDG, q)
            amps = _apply_single(amps, _HADAMARD, q)
    probs = np.abs(amps) ** 2
    probs = probs / probs.sum()
    if noise is not None:
        if noise.n_qubits != state.n_qubits:
            raise ValidationError("noise model qubit count does not match the state")
        probs = corrupt(probs, noise)
    return probs, support


def measure_term(state: StateVector, letters: str, shots: int, seed: int,
                 noise: ReadoutNoise | None = None,
                 calibration: CalibrationMatrix | None = None) -> TermEstimate:
    """Estimate <P> for one non-identity term from projective shots.

    The outcome histogram is a single multinomial draw from the (noisy)
    Born distribution; each shot contributes the parity (-1)^(bits in the
    term's support).  With a calibration matrix the histogram is mitigated
    before averaging.  Identical arguments reproduce identical results.
    """
    if len(letters) != state.n_qubits:
        raise ValidationError("term length does not match the state's qubit count")
    if set(letters) == {"I"}:
        raise ValidationError("identity term has no measurement; strip it first")
    if shots < 1:
        raise ValidationError("shots must be >= 1")
    probs, support = _rotated_distribution(state, letters, noise)
    rng = generator(seed, "shots")
    counts = rng.multinomial(shots, probs)
    parities = 1 - 2 * _parity(np.arange(probs.size) & support)
    if calibration is not None:
        corrected = mitigate(counts, calibration)
        mean = float(corrected @ parities)
    else:
        mean = float(counts @ parities) / shots
    if shots > 1:
        sample_var = max(0.0, 1.0 - mean * mean) * shots / (shots - 1)
        std_error = float(np.sqrt(sample_var / shots))
    else:
        std_error = 0.0
    return TermEstimate(mean, std_error)


def expectation_sampled(state: StateVector, op: PauliSum, cfg: EstimatorConfig,
                        include_constant: bool = True) -> ShotEstimate:
    """Estimate <op> under the configured sampling policy.

    Terms are processed in sorted order with seeds derived from
    (cfg.seed, letters), so the estimate is independent of term insertion
    order and reproducible bit for bit.
    """
    if state.n_qubits != op.n_qubits:
        raise ValidationError("state and operator qubit counts differ")
    constant, rest = op.strip_identity()
    letters_sorted = sorted(rest)

    if cfg.mode == MODE_EXACT:
        per_term = {s: TermEstimate(pauli_term_expectation(state, s), 0.0)
                    for s in letters_sorted}
        shots_used = 0
    else:
        calibration = cfg.resolved_calibration()
        per_term = {}
        for s in letters_sorted:
            per_term[s] = measure_term(
                state, s, cfg.shots_per_term, derive_seed(cfg.seed, s),
                noise=cfg.noise, calibration=calibration)
        shots_used = cfg.shots_per_term * len(letters_sorted)

    value = constant if include_constant else 0.0
    variance = 0.0
    for s in letters_sorted:
        value += rest[s] * per_term[s].mean
        variance += (rest[s] * per_term[s].std_error) ** 2
    return ShotEstimate(
        value=value,
        std_error=float(np.sqrt(variance)),
        shots_used=shots_used,
        per_term=per_term,
        constant=constant,
        constant_included=include_constant,
    )
