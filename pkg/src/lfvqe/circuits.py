"""Gate-level statevector simulation and the variational ansatz circuits.

States live on n qubits with qubit 0 as the least-significant bit of the
amplitude index.  Gates are applied by updating amplitude pairs in place of
building full unitaries, which keeps circuits up to a dozen qubits cheap.

Two ansatz families prepare the trial states:

  * direct (4 modes, 3 angles): an X gate followed by a cascade of
    controlled-Ry and controlled-X gates.  The output always lies in the
    one-hot subspace with real amplitudes
    ``(c1 s2, c1 c2, s1 c3, s1 s3)`` on modes 0..3, writing
    ``ci = cos(theta_i / 2)`` and ``si = sin(theta_i / 2)``.  Those products
    sweep every real unit 4-vector with ``amplitude(mode 1) >= 0``, i.e.
    every real state up to overall sign.
  * compact (2 qubits, 9 angles): general one-qubit rotations U(theta, phi,
    lambda) on each qubit, a controlled-X, and a final U, which reaches an
    arbitrary normalized two-qubit state.  A 3-angle single-qubit variant
    covers the two-mode case.

Parameter synthesis inverts each family in closed form and falls back to a
numerical fidelity fit if the closed form ever misses its target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .encodings import Encoding, one_hot_index, qubit_count
from .exceptions import ValidationError

# fidelity demanded from parameter synthesis
SYNTHESIS_FIDELITY = 1.0 - 1e-8

# amplitude^2 below this counts as zero in subspace checks
LEAK_TOL = 1e-12

_GATE_KINDS = {"x": 0, "ry": 1, "u": 3, "cx": 0, "cry": 1}
_CONTROLLED = {"cx", "cry"}


def ry_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def u_matrix(theta: float, phi: float, lam: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array(
        [[c, -np.exp(1j * lam) * s],
         [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c]])

_X_MATRIX = np.array([[0, 1], [1, 0]], dtype=complex)


@dataclass(frozen=True)
class Gate:
    """One gate: a kind, a target qubit, an optional control, and angles."""

    kind: str
    target: int
    control: int | None = None
    angles: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in _GATE_KINDS:
            raise ValidationError(f"unknown gate kind {self.kind!r}")
        if len(self.angles) != _GATE_KINDS[self.kind]:
            raise ValidationError(
                f"gate {self.kind!r} takes {_GATE_KINDS[self.kind]} angle(s)")
        has_control = self.control is not None
        if has_control != (self.kind in _CONTROLLED):
            raise ValidationError(f"gate {self.kind!r} control mismatch")
        if has_control and self.control == self.target:
            raise ValidationError("control and target must differ")
        if not all(math.isfinite(a) for a in self.angles):
            raise ValidationError("gate angles must be finite")

    @staticmethod
    def x(target: int) -> "Gate":
        return Gate("x", target)

    @staticmethod
    def ry(theta: float, target: int) -> "Gate":
        return Gate("ry", target, angles=(float(theta),))

    @staticmethod
    def u(theta: float, phi: float, lam: float, target: int) -> "Gate":
        return Gate("u", target, angles=(float(theta), float(phi), float(lam)))

    @staticmethod
    def cx(control: int, target: int) -> "Gate":
        return Gate("cx", target, control=control)

    @staticmethod
    def cry(theta: float, control: int, target: int) -> "Gate":
        return Gate("cry", target, control=control, angles=(float(theta),))

    def matrix(self) -> np.ndarray:
        """2x2 action on the target qubit (conditioned on the control if any)."""
        if self.kind == "x" or self.kind == "cx":
            return _X_MATRIX
        if self.kind == "ry" or self.kind == "cry":
            return ry_matrix(self.angles[0])
        return u_matrix(*self.angles)

    def to_line(self) -> str:
        parts = [self.kind, str(self.target)]
        if self.control is not None:
            parts.append(str(self.control))
        parts.extend(f"{a:.17g}" for a in self.angles)
        return " ".join(parts)

    @classmethod
    def from_line(cls, line: str) -> "Gate":
        parts = line.split()
        if not parts:
            raise ValidationError("empty gate line")
        kind = parts[0]
        if kind not in _GATE_KINDS:
            raise ValidationError(f"unknown gate kind {kind!r}")
        n_angles = _GATE_KINDS[kind]
        has_control = kind in _CONTROLLED
        expected = 2 + int(has_control) + n_angles
        if len(parts) != expected:
            raise ValidationError(f"gate line {line!r}: expected {expected} fields")
        target = int(parts[1])
        control = int(parts[2]) if has_control else None
        angles = tuple(float(v) for v in parts[2 + int(has_control):])
        return cls(kind, target, control=control, angles=angles)


@dataclass(frozen=True)
class Circuit:
    """Ordered gate sequence on a fixed register."""

    n_qubits: int
    gates: tuple[Gate, ...]

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValidationError("circuit needs at least one qubit")
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if not (0 <= g.target < self.n_qubits):
                raise ValidationError(f"gate target {g.target} out of range")
            if g.control is not None and not (0 <= g.control < self.n_qubits):
                raise ValidationError(f"gate control {g.control} out of range")

    def to_text(self) -> str:
        return "\n".join(g.to_line() for g in self.gates) + "\n"

    @classmethod
    def from_text(cls, text: str, n_qubits: int) -> "Circuit":
        gates = [Gate.from_line(ln) for ln in text.splitlines() if ln.strip()]
        return cls(n_qubits, tuple(gates))


class StateVector:
    """Normalized complex amplitudes over 2^n basis states."""

    __slots__ = ("n_qubits", "amplitudes")

    def __init__(self, amplitudes: np.ndarray, _validate: bool = True):
        amps = np.asarray(amplitudes, dtype=complex)
        n = int(amps.size).bit_length() - 1
        if amps.ndim != 1 or amps.size < 2 or 2 ** n != amps.size:
            raise ValidationError("amplitude vector length must be a power of two >= 2")
        if _validate:
            norm = float(np.linalg.norm(amps))
            if abs(norm - 1.0) > 1e-10:
                raise ValidationError(f"state norm {norm} is not 1 within 1e-10")
        self.n_qubits = n
        self.amplitudes = amps
        self.amplitudes.flags.writeable = False

    @classmethod
    def zero(cls, n_qubits: int) -> "StateVector":
        amps = np.zeros(2 ** n_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(amps, _validate=False)

    @classmethod
    def basis(cls, index: int, n_qubits: int) -> "StateVector":
        amps = np.zeros(2 ** n_qubits, dtype=complex)
        amps[index] = 1.0
        return cls(amps, _validate=False)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def fidelity(self, other: "StateVector") -> float:
        return float(abs(np.vdot(self.amplitudes, other.amplitudes)) ** 2)

    def __repr__(self) -> str:
        return f"StateVector(n_qubits={self.n_qubits})"


def _apply_single(amps: np.ndarray, mat: np.ndarray, target: int) -> np.ndarray:
    idx = np.arange(amps.size)
    i0 = idx[(idx >> target) & 1 == 0]
    i1 = i0 | (1 << target)
    out = np.empty_like(amps)
    out[i0] = mat[0, 0] * amps[i0] + mat[0, 1] * amps[i1]
    out[i1] = mat[1, 0] * amps[i0] + mat[1, 1] * amps[i1]
    return out


def _apply_controlled(amps: np.ndarray, mat: np.ndarray, control: int,
                      target: int) -> np.ndarray:
    idx = np.arange(amps.size)
    sel = (((idx >> control) & 1) == 1) & (((idx >> target) & 1) == 0)
    i0 = idx[sel]
    i1 = i0 | (1 << target)
    out = amps.copy()
    out[i0] = mat[0, 0] * amps[i0] + mat[0, 1] * amps[i1]
    out[i1] = mat[1, 0] * amps[i0] + mat[1, 1] * amps[i1]
    return out


def apply(state: StateVector, gate: Gate) -> StateVector:
    """Apply one gate and return the new state."""
    if not (0 <= gate.target < state.n_qubits):
        raise ValidationError(f"gate target {gate.target} out of range")
    if gate.control is not None and not (0 <= gate.control < state.n_qubits):
        raise ValidationError(f"gate control {gate.control} out of range")
    mat = gate.matrix()
    if gate.control is None:
        amps = _apply_single(state.amplitudes, mat, gate.target)
    else:
        amps = _apply_controlled(state.amplitudes, mat, gate.control, gate.target)
    return StateVector(amps, _validate=False)


def run(circuit: Circuit) -> StateVector:
    """Apply all gates to the all-zeros state."""
    state = StateVector.zero(circuit.n_qubits)
    for gate in circuit.gates:
        state = apply(state, gate)
    return state


# --- ansatz parameters -----------------------------------------------------

# two-point rule for plain rotation angles, exact for integer-frequency
# dependence; four-point rule for controlled-rotation angles, whose energy
# also carries half-frequency terms
_SHIFT_SINGLE = ((math.pi / 2, 0.5), (-math.pi / 2, -0.5))
_C_PLUS = (math.sqrt(2) + 1) / (4 * math.sqrt(2))
_C_MINUS = (math.sqrt(2) - 1) / (4 * math.sqrt(2))
_SHIFT_CONTROLLED = (
    (math.pi / 2, _C_PLUS), (-math.pi / 2, -_C_PLUS),
    (3 * math.pi / 2, -_C_MINUS), (-3 * math.pi / 2, _C_MINUS),
)


@dataclass(frozen=True)
class AnsatzParams:
    """Angles for one ansatz family, tagged with the encoding they serve.

    Valid shapes: 3 angles for the direct cascade on 4 qubits, 9 angles for
    the compact two-qubit preparation, 3 angles for the compact single-qubit
    variant (two modes).
    """

    encoding: Encoding
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not all(math.isfinite(v) for v in self.values):
            raise ValidationError("ansatz angles must be finite")
        shape = (self.encoding, len(self.values))
        if shape not in _ANSATZ_SHAPES:
            raise ValidationError(
                f"no {self.encoding.value} ansatz with {len(self.values)} parameters")

    @property
    def n_qubits(self) -> int:
        return _ANSATZ_SHAPES[(self.encoding, len(self.values))]

    def replace(self, values: Iterable[float]) -> "AnsatzParams":
        return AnsatzParams(self.encoding, tuple(values))

    def shift_rules(self) -> tuple[tuple[tuple[float, float], ...], ...]:
        """Per-parameter exact shift rules as (shift, weight) pairs."""
        if self.encoding == Encoding.DIRECT:
            return tuple(_SHIFT_CONTROLLED for _ in self.values)
        return tuple(_SHIFT_SINGLE for _ in self.values)

    def normalized(self) -> "AnsatzParams":
        """Equivalent parameters with every angle in [-pi, pi].

        The compact angles are 2*pi periodic up to a global sign, so they
        wrap directly.  The direct cascade angles are only 4*pi periodic
        (a controlled rotation flips the sign of a single branch), so the
        prepared amplitudes are recomputed and re-synthesized instead.
        """
        if self.encoding == Encoding.DIRECT:
            amps = _direct_mode_amplitudes(self.values)
            return synthesize_params(amps, Encoding.DIRECT)
        wrapped = tuple((v + math.pi) % (2 * math.pi) - math.pi for v in self.values)
        return AnsatzParams(self.encoding, wrapped)


_ANSATZ_SHAPES = {
    (Encoding.DIRECT, 3): 4,
    (Encoding.COMPACT, 9): 2,
    (Encoding.COMPACT, 3): 1,
}


def build_ansatz(params: AnsatzParams) -> Circuit:
    """Gate sequence preparing the trial state for the given parameters."""
    v = params.values
    if params.encoding == Encoding.DIRECT:
        t1, t2, t3 = v
        gates = (
            Gate.x(1),
            Gate.cry(t1, control=1, target=2),
            Gate.cx(control=2, target=1),
            Gate.cry(t2, control=1, target=0),
            Gate.cry(t3, control=2, target=3),
            Gate.cx(control=0, target=1),
            Gate.cx(control=3, target=2),
        )
        return Circuit(4, gates)
    if len(v) == 9:
        gates = (
            Gate.u(v[0], v[1], v[2], target=0),
            Gate.u(v[3], v[4], v[5], target=1),
            Gate.cx(control=1, target=0),
            Gate.u(v[6], v[7], v[8], target=0),
        )
        return Circuit(2, gates)
    return Circuit(1, (Gate.u(v[0], v[1], v[2], target=0),))


def _direct_mode_amplitudes(values: Sequence[float]) -> np.ndarray:
    t1, t2, t3 = values
    c1, s1 = math.cos(t1 / 2), math.sin(t1 / 2)
    c2, s2 = math.cos(t2 / 2), math.sin(t2 / 2)
    c3, s3 = math.cos(t3 / 2), math.sin(t3 / 2)
    return np.array([c1 * s2, c1 * c2, s1 * c3, s1 * s3])


def mode_state(amplitudes: Sequence[complex], encoding: Encoding) -> StateVector:
    """Embed normalized mode amplitudes as a qubit state.

    Direct: amplitude k goes on the one-hot basis state of mode k.
    Compact: amplitude k goes on computational-basis index k.
    """
    a = np.asarray(amplitudes, dtype=complex)
    if a.ndim != 1 or a.size < 2:
        raise ValidationError("mode amplitudes must be a vector of length >= 2")
    if abs(np.linalg.norm(a) - 1.0) > 1e-10:
        raise ValidationError("mode amplitudes must be normalized")
    n = qubit_count(encoding, a.size)
    amps = np.zeros(2 ** n, dtype=complex)
    if encoding == Encoding.DIRECT:
        for k, v in enumerate(a):
            amps[one_hot_index(k)] = v
    else:
        amps[: a.size] = a
    return StateVector(amps, _validate=False)


# --- parameter synthesis ---------------------------------------------------


def _as_mode_vector(target, encoding: Encoding) -> np.ndarray:
    """Extract a mode-amplitude vector from a target state specification."""
    if isinstance(target, StateVector):
        if encoding == Encoding.DIRECT:
            if target.n_qubits != 4:
                raise ValidationError("direct synthesis expects a 4-qubit state")
            amps = target.amplitudes
            modes = np.array([amps[one_hot_index(k)] for k in range(4)])
            if abs(np.linalg.norm(modes) - 1.0) > 1e-8:
                raise ValidationError("target state leaves the one-hot subspace")
            return modes
        return target.amplitudes.copy()
    vec = np.asarray(target, dtype=complex)
    if vec.ndim != 1:
        raise ValidationError("synthesis target must be a vector or StateVector")
    return vec


def _synthesize_direct(target) -> AnsatzParams:
    a = _as_mode_vector(target, Encoding.DIRECT)
    if np.abs(a.imag).max() > 1e-10:
        raise ValidationError("direct-encoding targets must have real amplitudes")
    a = a.real.astype(float)
    if a.size != 4:
        raise ValidationError("direct synthesis expects 4 mode amplitudes")
    if abs(np.linalg.norm(a) - 1.0) > 1e-8:
        raise ValidationError("synthesis target must be normalized")
    if a[1] < 0.0:
        a = -a  # the cascade fixes amplitude(mode 1) >= 0; flip the free sign
    r01 = math.hypot(a[0], a[1])
    r23 = math.hypot(a[2], a[3])
    sigma = -1.0 if a[2] < 0.0 else 1.0
    t1 = 2.0 * math.atan2(sigma * r23, r01)
    t2 = 2.0 * math.atan2(a[0], a[1])
    t3 = 2.0 * math.atan2(sigma * a[3], sigma * a[2])
    return AnsatzParams(Encoding.DIRECT, (t1, t2, t3))


def _phase_completion(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """A 2x2 unitary sending ``src`` to ``dst`` (orthogonal complements mapped)."""
    s_perp = np.array([-np.conj(src[1]), np.conj(src[0])])
    d_perp = np.array([-np.conj(dst[1]), np.conj(dst[0])])
    return np.outer(dst, src.conj()) + np.outer(d_perp, s_perp.conj())


def _u_angles(mat: np.ndarray) -> tuple[float, float, float]:
    """Angles with ``u_matrix(theta, phi, lam)`` equal to ``mat`` up to phase."""
    if abs(mat[0, 0]) > 1e-12:
        v = mat * np.exp(-1j * np.angle(mat[0, 0]))
        theta = 2.0 * math.atan2(abs(v[1, 0]), v[0, 0].real)
        phi = float(np.angle(v[1, 0])) if abs(v[1, 0]) > 1e-14 else 0.0
        lam = float(np.angle(-v[0, 1])) if abs(v[0, 1]) > 1e-14 else 0.0
        return theta, phi, lam
    phi = float(np.angle(mat[1, 0]))
    lam = float(np.angle(-mat[0, 1])) - phi
    lam = (lam + math.pi) % (2 * math.pi) - math.pi
    return math.pi, phi, lam


def _synthesize_compact_1q(vec: np.ndarray) -> AnsatzParams:
    phase = np.angle(vec[0]) if abs(vec[0]) > 1e-14 else np.angle(vec[1])
    v = vec * np.exp(-1j * phase)
    theta = 2.0 * math.atan2(abs(v[1]), v[0].real)
    phi = float(np.angle(v[1])) if abs(v[1]) > 1e-14 else 0.0
    return AnsatzParams(Encoding.COMPACT, (theta, phi, 0.0))


def _synthesize_compact(target) -> AnsatzParams:
    vec = _as_mode_vector(target, Encoding.COMPACT)
    if abs(np.linalg.norm(vec) - 1.0) > 1e-8:
        raise ValidationError("synthesis target must be normalized")
    if vec.size == 2:
        return _synthesize_compact_1q(vec)
    if vec.size != 4:
        raise ValidationError("compact synthesis expects 2 or 4 amplitudes")

    # split on qubit 1: w0 pairs with |q1=0>, w1 with |q1=1>
    w0, w1 = vec[[0, 1]], vec[[2, 3]]
    r0, r1 = float(np.linalg.norm(w0)), float(np.linalg.norm(w1))
    theta2 = 2.0 * math.atan2(r1, r0)
    overlap = np.vdot(w0, w1)
    phi2 = float(np.angle(overlap)) if abs(overlap) > 1e-14 else 0.0
    mix = abs(overlap) / (r0 * r1) if r0 * r1 > 1e-14 else 0.0
    theta1 = math.asin(min(max(mix, 0.0), 1.0))
    a = np.array([math.cos(theta1 / 2), math.sin(theta1 / 2)], dtype=complex)
    xa = a[::-1].copy()

    x = w0 / r0 if r0 > 1e-14 else None
    y = w1 / (r1 * np.exp(1j * phi2)) if r1 > 1e-14 else None
    if x is None:
        u_c = _phase_completion(xa, y)
    elif y is None:
        u_c = _phase_completion(a, x)
    else:
        basis = np.column_stack([a, xa])
        if abs(np.linalg.det(basis)) > 1e-7:
            u_c = np.column_stack([x, y]) @ np.linalg.inv(basis)
        else:
            u_c = _phase_completion(a, x)
    theta3, phi3, lam3 = _u_angles(u_c)
    return AnsatzParams(
        Encoding.COMPACT,
        (theta1, 0.0, 0.0, theta2, phi2, 0.0, theta3, phi3, lam3))


def _refine_numerically(params: AnsatzParams, target_state: StateVector) -> AnsatzParams:
    from scipy.optimize import minimize

    def infidelity(v):
        trial = run(build_ansatz(params.replace(v)))
        return 1.0 - target_state.fidelity(trial)

    res = minimize(infidelity, np.array(params.values), method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
    return params.replace(res.x)


def synthesize_params(target, encoding: Encoding) -> AnsatzParams:
    """Find ansatz angles whose prepared state matches ``target``.

    The direct family takes a real mode 4-vector (or a one-hot 4-qubit
    state); the compact family takes any normalized state on one or two
    qubits.  The result satisfies fidelity >= 1 - 1e-8, with global phase
    (or sign) left free.
    """
    if encoding == Encoding.DIRECT:
        params = _synthesize_direct(target)
        reference = mode_state(_as_mode_vector(target, encoding).real /
                               np.linalg.norm(_as_mode_vector(target, encoding).real),
                               Encoding.DIRECT)
    else:
        params = _synthesize_compact(target)
        vec = _as_mode_vector(target, encoding)
        reference = StateVector(vec / np.linalg.norm(vec))
    prepared = run(build_ansatz(params))
    if reference.fidelity(prepared) < 1.0 - 1e-9:
        params = _refine_numerically(params, reference)
        prepared = run(build_ansatz(params))
        if reference.fidelity(prepared) < SYNTHESIS_FIDELITY:
            raise ValidationError("parameter synthesis failed to reach the target")
    return params


def one_hot_leakage(state: StateVector) -> float:
    """Total probability outside the one-hot subspace of a direct-encoding state."""
    probs = state.probabilities()
    keep = [one_hot_index(k) for k in range(state.n_qubits)]
    mask = np.ones(probs.size, dtype=bool)
    mask[keep] = False
    return float(probs[mask].sum())
