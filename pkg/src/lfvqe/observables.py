"""Ground-state observables of the valence pion block.

The built-in Hamiltonian is the 4x4 valence block of the BLFQ-NJL light
meson model in the lowest basis truncation, in MeV^2; its modes are the
four spin configurations of the quark-antiquark pair and its lowest
eigenvalue is the squared pion mass.  Which spin configuration sits on
which row is irrelevant for everything computed here, so modes are treated
as abstract indices.

Other observables (mass radius, decay constant, form-factor families) are
supplied by the user as Hermitian mode operators; the engine's job is to
evaluate their ground-state expectations under either encoding, with or
without the constant term, and to turn form-factor slopes into a charge
radius.  Unit bookkeeping goes through a single pinned constant,
hbar*c = 0.1973269804 GeV fm.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Sequence

import numpy as np

from .circuits import StateVector
from .encodings import Encoding, ModeOperator, encode, qubit_count
from .estimator import EstimatorConfig, ShotEstimate, expectation_sampled
from .exceptions import NumericsError, ValidationError
from .seeding import derive_seed

HBARC_GEV_FM = 0.1973269804

# valence pion mass-squared matrix over the 4 spin configurations, MeV^2
_PION_MATRIX = np.array(
    [
        [640323.0, 139872.0, -139872.0, -107450.0],
        [139872.0, 346707.0, 174794.0, 139872.0],
        [-139872.0, 174794.0, 346707.0, -139872.0],
        [-107450.0, 139872.0, -139872.0, 640323.0],
    ]
)

# model parameters behind the matrix, carried as provenance only
_PION_PARAMETERS = {
    "quark_mass_mev": 337.01,
    "antiquark_mass_mev": 337.01,
    "confinement_strength_mev": 227.00,
    "njl_coupling_gev-2": 250.785,
}


@dataclass(frozen=True)
class PionHamiltonian:
    """The built-in pion mass-squared operator plus its model parameters."""

    operator: ModeOperator
    parameters: dict = field(default_factory=dict)

    @property
    def matrix(self) -> np.ndarray:
        return self.operator.entries


def pion_hamiltonian() -> PionHamiltonian:
    """Valence pion Hamiltonian; sqrt of its lowest eigenvalue is m_pi."""
    op = ModeOperator(_PION_MATRIX.copy(), units="MeV^2")
    return PionHamiltonian(op, dict(_PION_PARAMETERS))


def exact_ground_state(op: ModeOperator) -> tuple[float, np.ndarray]:
    """Lowest eigenvalue and its (real, unit) eigenvector."""
    evals, evecs = np.linalg.eigh(op.entries)
    vec = evecs[:, 0]
    if abs(vec.imag).max() < 1e-12:
        vec = vec.real
    return float(evals[0]), vec


@dataclass(frozen=True)
class ObservableSpec:
    """A named Hermitian observable and its reporting convention."""

    name: str
    operator: ModeOperator
    include_constant: bool = True
    units: str = ""

    def __post_init__(self):
        if not self.units:
            object.__setattr__(self, "units", self.operator.units)

    def to_json_dict(self) -> dict:
        d = self.operator.to_json_dict()
        return {
            "name": self.name,
            "units": self.units,
            "include_constant": self.include_constant,
            "n_modes": d["n_modes"],
            "entries": d["entries"],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "ObservableSpec":
        op = ModeOperator.from_json_dict(
            {"entries": data.get("entries"),
             "n_modes": data.get("n_modes"),
             "units": data.get("units", "dimensionless")})
        return cls(
            name=str(data.get("name", "observable")),
            operator=op,
            include_constant=bool(data.get("include_constant", True)),
            units=str(data.get("units", op.units)),
        )


def load_observable(path) -> ObservableSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return ObservableSpec.from_json_dict(json.load(fh))


def save_observable(spec: ObservableSpec, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(spec.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def evaluate_observable(state: StateVector, spec: ObservableSpec,
                        encoding: Encoding, est: EstimatorConfig) -> ShotEstimate:
    """Ground-state (or any-state) expectation of one observable.

    The operator is encoded, its identity coefficient split off exactly,
    the rest estimated per the config, and the constant re-added only when
    the spec asks for it.  Both conventions stay recoverable from the
    returned estimate.
    """
    expected = qubit_count(encoding, spec.operator.n_modes)
    if state.n_qubits != expected:
        raise ValidationError(
            f"state has {state.n_qubits} qubits but the {encoding.value} encoding "
            f"of a {spec.operator.n_modes}-mode operator needs {expected}")
    return expectation_sampled(state, encode(spec.operator, encoding), est,
                               include_constant=spec.include_constant)


class ScanPoint(NamedTuple):
    q2_gev2: float
    value: float
    std_error: float


@dataclass(frozen=True)
class FormFactorScan:
    """Momentum-transfer grid of operators, first point at Q^2 = 0.

    ``normalization`` left as None means the Q^2 = 0 expectation divides
    the whole curve, forcing F(0) = 1.
    """

    points: tuple[tuple[float, ModeOperator], ...]
    name: str = "form_factor"
    normalization: float | None = None

    def __post_init__(self):
        pts = tuple((float(q2), op) for q2, op in self.points)
        object.__setattr__(self, "points", pts)
        if not pts:
            raise ValidationError("scan needs at least one point")
        q2s = [q2 for q2, _ in pts]
        if q2s[0] != 0.0:
            raise ValidationError("scan must start at Q^2 = 0")
        if any(b <= a for a, b in zip(q2s, q2s[1:])):
            raise ValidationError("Q^2 values must be strictly increasing")
        dims = {op.n_modes for _, op in pts}
        if len(dims) != 1:
            raise ValidationError("all scan operators must share one dimension")

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "normalization": self.normalization,
            "points": [
                {"q2": q2, **op.to_json_dict()} for q2, op in self.points
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "FormFactorScan":
        try:
            raw_points = data["points"]
        except (KeyError, TypeError):
            raise ValidationError("scan JSON needs a 'points' list") from None
        points = tuple(
            (float(p["q2"]), ModeOperator.from_json_dict(p)) for p in raw_points
        )
        return cls(points=points, name=str(data.get("name", "form_factor")),
                   normalization=data.get("normalization"))


def load_form_factor_scan(path) -> FormFactorScan:
    with open(path, "r", encoding="utf-8") as fh:
        return FormFactorScan.from_json_dict(json.load(fh))


def save_form_factor_scan(scan: FormFactorScan, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scan.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def form_factor_scan(state: StateVector, scan: FormFactorScan,
                     encoding: Encoding, est: EstimatorConfig) -> list[ScanPoint]:
    """Evaluate F(Q^2) = <O(Q^2)> / normalization over the grid.

    Each point samples from its own derived seed so shot noise is
    independent across the curve.  With auto-normalization the F(0) point
    is exactly 1 with zero error (it divides itself).
    """
    estimates = []
    for i, (q2, op) in enumerate(scan.points):
        cfg = replace(est, seed=derive_seed(est.seed, "scan-point", i))
        spec = ObservableSpec(name=f"{scan.name}[{i}]", operator=op,
                              include_constant=True)
        estimates.append((q2, evaluate_observable(state, spec, encoding, cfg)))

    auto = scan.normalization is None
    if auto:
        norm = estimates[0][1].value
        norm_se = estimates[0][1].std_error
    else:
        norm = float(scan.normalization)
        norm_se = 0.0
    if norm == 0.0:
        raise NumericsError("form-factor normalization is zero")

    points = []
    for i, (q2, estimate) in enumerate(estimates):
        if auto and i == 0:
            points.append(ScanPoint(q2, 1.0, 0.0))
            continue
        value = estimate.value / norm
        variance = (estimate.std_error / norm) ** 2
        variance += (estimate.value * norm_se / norm ** 2) ** 2
        points.append(ScanPoint(q2, value, float(np.sqrt(variance))))
    return points


def scan_points_to_csv(points: Sequence[ScanPoint]) -> str:
    lines = ["q2_gev2,form_factor,std_error"]
    for p in points:
        lines.append(f"{p.q2_gev2:.17g},{p.value:.17g},{p.std_error:.17g}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ChargeRadius:
    """Charge radius from the form-factor slope at Q^2 = 0.

    ``physical`` is False when the fitted slope gives a negative radius
    squared; ``r_fm`` is NaN in that case rather than an imaginary root.
    """

    r2_fm2: float
    r_fm: float
    physical: bool
    slope_gev: float
    fit_points: int

    def to_json_dict(self) -> dict:
        return {
            "r2_fm2": self.r2_fm2,
            "r_fm": self.r_fm,
            "physical": self.physical,
            "slope_gev-2": self.slope_gev,
            "fit_points": self.fit_points,
        }


def charge_radius(points: Sequence[ScanPoint], fit_points: int = 3) -> ChargeRadius:
    """<r_c^2> = -6 dF/dQ^2 at Q^2 = 0, converted to fm^2.

    The slope comes from a quadratic least-squares fit in Q^2 over the
    ``fit_points`` lowest grid points (a two-point difference would be
    fragile under shot noise).  Q^2 must be in GeV^2.
    """
    pts = sorted(points, key=lambda p: p.q2_gev2)
    if len(pts) < 3:
        raise ValidationError("charge radius needs at least 3 scan points")
    if pts[0].q2_gev2 != 0.0:
        raise ValidationError("charge radius needs a Q^2 = 0 point")
    k = min(max(int(fit_points), 3), len(pts))
    window = pts[:k]
    q2 = np.array([p.q2_gev2 for p in window])
    f = np.array([p.value for p in window])
    coeffs = np.polyfit(q2, f, 2)
    slope = float(coeffs[1])
    r2_gev = -6.0 * slope
    r2_fm2 = convert_units(r2_gev, "GeV^-2", "fm^2")
    physical = r2_fm2 >= 0.0
    r_fm = float(np.sqrt(r2_fm2)) if physical else float("nan")
    return ChargeRadius(r2_fm2=r2_fm2, r_fm=r_fm, physical=physical,
                        slope_gev=slope, fit_points=k)


_CONVERSIONS = {
    ("MeV^2", "GeV^2"): 1e-6,
    ("GeV^2", "MeV^2"): 1e6,
    ("MeV", "GeV"): 1e-3,
    ("GeV", "MeV"): 1e3,
    ("GeV^-2", "fm^2"): HBARC_GEV_FM ** 2,
    ("fm^2", "GeV^-2"): HBARC_GEV_FM ** -2,
}


def convert_units(value: float, from_unit: str, to_unit: str) -> float:
    """Convert between the supported unit pairs (exact factors)."""
    if from_unit == to_unit:
        return value
    try:
        factor = _CONVERSIONS[(from_unit, to_unit)]
    except KeyError:
        raise ValidationError(
            f"unsupported unit conversion {from_unit!r} -> {to_unit!r}") from None
    return value * factor
