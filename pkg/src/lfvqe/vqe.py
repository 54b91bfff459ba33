"""Hybrid variational minimization loop over the ansatz families.

Three classical optimizers are offered: SPSA for shot-noisy objectives,
Nelder-Mead for exact-mode objectives, and plain gradient descent driven by
the parameter-shift rule (exact mode only).  The loop records every iterate
with its energy estimate, tracks the running best, and reports convergence
when the relative energy change stays below tolerance for a patience window.

Parameter-shift gradients are exact for both ansatz families.  Angles of
uncontrolled rotations use the two-point rule with shifts of pi/2.  Angles
of controlled rotations produce half-integer frequencies in the energy, so
they use the four-point rule instead; the naive two-point formula is biased
there and would fail a finite-difference check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .circuits import AnsatzParams, build_ansatz, run, synthesize_params
from .encodings import Encoding
from .estimator import (
    MODE_EXACT,
    EstimatorConfig,
    ShotEstimate,
    expectation_sampled,
)
from .exceptions import NumericsError, ValidationError
from .pauli import PauliSum
from .seeding import derive_seed, generator

METHOD_SPSA = "spsa"
METHOD_NELDER_MEAD = "neldermead"
METHOD_PSHIFT = "pshift"
_METHODS = (METHOD_SPSA, METHOD_NELDER_MEAD, METHOD_PSHIFT)


@dataclass(frozen=True)
class OptimizerConfig:
    """Classical-optimizer settings for :func:`vqe_minimize`.

    ``convergence_tol`` left as None resolves to 1e-6 in exact mode and
    1e-3 in sampled mode.  The SPSA gain ``a`` is auto-calibrated so the
    first step moves roughly ``spsa_target_step`` radians, which makes the
    defaults insensitive to the operator's overall scale (MeV^2 or order
    one alike); the same scale-freedom motivates the normalized step of the
    pshift method.
    """

    method: str = METHOD_NELDER_MEAD
    max_iterations: int = 100
    convergence_tol: float | None = None
    patience: int = 10
    seed: int = 0
    # SPSA gains and schedules
    spsa_perturbation: float = 0.2
    spsa_target_step: float = 0.25
    spsa_alpha: float = 0.602
    spsa_gamma: float = 0.101
    spsa_stability: float | None = None
    spsa_step_clip: float = 0.3
    spsa_calibration_samples: int = 10
    # parameter-shift descent
    pshift_step_scale: float = 0.5
    # Nelder-Mead initial simplex edge (radians)
    nm_simplex_step: float = 0.6

    def __post_init__(self):
        if self.method not in _METHODS:
            raise ValidationError(f"unknown optimizer method {self.method!r}")
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be >= 1")
        if self.convergence_tol is not None and self.convergence_tol <= 0:
            raise ValidationError("convergence_tol must be positive")
        if self.patience < 1:
            raise ValidationError("patience must be >= 1")


@dataclass(frozen=True)
class IterationRecord:
    index: int
    params: AnsatzParams
    energy: ShotEstimate


@dataclass(frozen=True)
class VQETrace:
    """Full record of one minimization run."""

    encoding: Encoding
    iterations: tuple[IterationRecord, ...]
    best: IterationRecord
    total_shots: int
    converged: bool

    def to_csv(self) -> str:
        n_params = len(self.iterations[0].params.values)
        header = ["iteration", "energy", "std_error", "shots"]
        header += [f"theta{k}" for k in range(n_params)]
        lines = [",".join(header)]
        for rec in self.iterations:
            row = [str(rec.index), f"{rec.energy.value:.17g}",
                   f"{rec.energy.std_error:.17g}", str(rec.energy.shots_used)]
            row += [f"{v:.17g}" for v in rec.params.values]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        return {
            "encoding": self.encoding.value,
            "converged": self.converged,
            "total_shots": self.total_shots,
            "best": {
                "index": self.best.index,
                "params": list(self.best.params.values),
                "energy": self.best.energy.to_json_dict(),
            },
            "iterations": [
                {
                    "index": rec.index,
                    "params": list(rec.params.values),
                    "energy": rec.energy.value,
                    "std_error": rec.energy.std_error,
                    "shots": rec.energy.shots_used,
                }
                for rec in self.iterations
            ],
        }


def default_initial_params(n_qubits: int, encoding: Encoding) -> AnsatzParams:
    """Paper-free starting point: uniform one-hot superposition for the
    direct cascade, all-zero angles for the compact preparations."""
    if encoding == Encoding.DIRECT and n_qubits == 4:
        return synthesize_params(np.full(4, 0.5), Encoding.DIRECT)
    if encoding == Encoding.COMPACT and n_qubits == 2:
        return AnsatzParams(Encoding.COMPACT, (0.0,) * 9)
    if encoding == Encoding.COMPACT and n_qubits == 1:
        return AnsatzParams(Encoding.COMPACT, (0.0,) * 3)
    raise ValidationError(
        f"no {encoding.value} ansatz available for {n_qubits} qubits")


class _Evaluator:
    """Counted, seeded energy evaluations of the ansatz against one operator."""

    def __init__(self, op: PauliSum, template: AnsatzParams, est: EstimatorConfig):
        self.op = op
        self.template = template
        self.est = est
        self.calls = 0

    def __call__(self, values, stream: str) -> ShotEstimate:
        self.calls += 1
        params = self.template.replace(values)
        state = run(build_ansatz(params))
        cfg = replace(self.est, seed=derive_seed(self.est.seed, stream, self.calls))
        estimate = expectation_sampled(state, self.op, cfg, include_constant=True)
        if not math.isfinite(estimate.value):
            raise NumericsError("energy evaluation diverged to a non-finite value")
        return estimate


class _Convergence:
    """Relative-change stopping rule sustained over a patience window."""

    def __init__(self, tol: float, patience: int):
        self.tol = tol
        self.patience = patience
        self.previous: float | None = None
        self.streak = 0
        self.converged = False

    def update(self, energy: float) -> bool:
        if self.previous is not None:
            scale = max(abs(energy), abs(self.previous), 1e-30)
            if abs(energy - self.previous) / scale < self.tol:
                self.streak += 1
            else:
                self.streak = 0
            if self.streak >= self.patience:
                self.converged = True
        self.previous = energy
        return self.converged


def parameter_shift_gradient(op: PauliSum, encoding: Encoding,
                             params: AnsatzParams) -> np.ndarray:
    """Exact energy gradient from shifted exact-mode evaluations.

    Each parameter is evaluated at the shifts of its gate's rule (two-point
    for plain rotations, four-point for controlled rotations) and combined
    with the corresponding weights, matching central finite differences to
    rounding.
    """
    if params.encoding != encoding:
        raise ValidationError("params encoding does not match the requested encoding")
    if params.n_qubits != op.n_qubits:
        raise ValidationError("operator and ansatz qubit counts differ")
    exact = EstimatorConfig(mode=MODE_EXACT)
    base = np.array(params.values, dtype=float)
    grad = np.zeros_like(base)
    for k, rule in enumerate(params.shift_rules()):
        total = 0.0
        for shift, weight in rule:
            shifted = base.copy()
            shifted[k] += shift
            state = run(build_ansatz(params.replace(shifted)))
            total += weight * expectation_sampled(
                state, op, exact, include_constant=True).value
        grad[k] = total
    return grad


def _minimize_nelder_mead(evaluate: _Evaluator, x0: np.ndarray,
                          opt: OptimizerConfig, tracker: _Convergence,
                          record: Callable[[np.ndarray], None]) -> None:
    from scipy.optimize import minimize

    dim = x0.size
    simplex = np.vstack([x0] + [x0 + opt.nm_simplex_step * np.eye(dim)[k]
                                for k in range(dim)])

    def objective(v):
        return evaluate(v, "feval").value

    def callback(xk):
        record(xk)
        if tracker.converged:
            raise StopIteration

    minimize(
        objective, x0, method="Nelder-Mead", callback=callback,
        options={
            "maxiter": opt.max_iterations,
            "maxfev": max(2000, 40 * opt.max_iterations),
            "xatol": 1e-12,
            "fatol": 1e-12,
            "initial_simplex": simplex,
        },
    )


def _minimize_spsa(evaluate: _Evaluator, x0: np.ndarray, opt: OptimizerConfig,
                   tracker: _Convergence,
                   record: Callable[[np.ndarray], None]) -> None:
    rng = generator(opt.seed, "spsa-perturbations")
    theta = x0.copy()
    c0 = opt.spsa_perturbation
    stability = opt.spsa_stability
    if stability is None:
        stability = 0.1 * opt.max_iterations

    # calibrate the gain so the first step is about spsa_target_step radians
    magnitudes = []
    for _ in range(opt.spsa_calibration_samples):
        delta = rng.choice([-1.0, 1.0], size=theta.size)
        e_plus = evaluate(theta + c0 * delta, "feval").value
        e_minus = evaluate(theta - c0 * delta, "feval").value
        magnitudes.append(abs(e_plus - e_minus) / (2 * c0))
    gain = (opt.spsa_target_step * (stability + 1) ** opt.spsa_alpha
            / max(float(np.median(magnitudes)), 1e-12))

    for k in range(1, opt.max_iterations + 1):
        a_k = gain / (k + stability) ** opt.spsa_alpha
        c_k = c0 / k ** opt.spsa_gamma
        delta = rng.choice([-1.0, 1.0], size=theta.size)
        e_plus = evaluate(theta + c_k * delta, "feval").value
        e_minus = evaluate(theta - c_k * delta, "feval").value
        estimate = (e_plus - e_minus) / (2 * c_k) * delta
        theta = theta - np.clip(a_k * estimate,
                                -opt.spsa_step_clip, opt.spsa_step_clip)
        record(theta)
        if tracker.converged:
            return


def _minimize_pshift(evaluate: _Evaluator, x0: np.ndarray, opt: OptimizerConfig,
                     tracker: _Convergence, record: Callable[[np.ndarray], None],
                     op: PauliSum, encoding: Encoding,
                     template: AnsatzParams) -> None:
    _, rest = op.strip_identity()
    scale = max(rest.coefficient_norm(), 1e-30)
    step = opt.pshift_step_scale / scale
    theta = x0.copy()
    for k in range(1, opt.max_iterations + 1):
        grad = parameter_shift_gradient(op, encoding, template.replace(theta))
        if k == 1 and np.linalg.norm(grad) < 1e-9 * scale:
            # stationary start (the all-zero compact angles sit on one);
            # nudge deterministically so descent has a direction
            theta = theta + 0.2
            record(theta)
            continue
        theta = theta - step * grad
        record(theta)
        if tracker.converged:
            return


def vqe_minimize(op: PauliSum, encoding: Encoding, est: EstimatorConfig,
                 opt: OptimizerConfig,
                 initial: AnsatzParams | None = None) -> VQETrace:
    """Minimize <op> over the ansatz family of the given encoding.

    The trace is deterministic given the estimator and optimizer seeds.
    Iteration 0 is the starting point; each optimizer step appends one
    record holding the iterate and its (estimated) energy.  ``total_shots``
    sums the recorded estimates' shots; SPSA's internal perturbation
    evaluations sample on top of that.
    """
    template = initial if initial is not None else default_initial_params(
        op.n_qubits, encoding)
    if template.encoding != encoding:
        raise ValidationError("initial params belong to a different encoding")
    if template.n_qubits != op.n_qubits:
        raise ValidationError("operator qubit count does not match the ansatz")
    if opt.method == METHOD_PSHIFT and est.mode != MODE_EXACT:
        raise ValidationError("the pshift optimizer requires exact mode")

    tol = opt.convergence_tol
    if tol is None:
        tol = 1e-6 if est.mode == MODE_EXACT else 1e-3
    tracker = _Convergence(tol, opt.patience)
    evaluate = _Evaluator(op, template, est)

    records: list[IterationRecord] = []

    def record(values: np.ndarray) -> None:
        params = template.replace(values)
        energy = evaluate(values, "record")
        records.append(IterationRecord(len(records), params, energy))
        tracker.update(energy.value)

    record(np.array(template.values, dtype=float))
    x0 = np.array(template.values, dtype=float)
    if opt.method == METHOD_NELDER_MEAD:
        _minimize_nelder_mead(evaluate, x0, opt, tracker, record)
    elif opt.method == METHOD_SPSA:
        _minimize_spsa(evaluate, x0, opt, tracker, record)
    else:
        _minimize_pshift(evaluate, x0, opt, tracker, record, op, encoding, template)

    best = min(records, key=lambda rec: rec.energy.value)
    total_shots = sum(rec.energy.shots_used for rec in records)
    return VQETrace(
        encoding=encoding,
        iterations=tuple(records),
        best=best,
        total_shots=total_shots,
        converged=tracker.converged,
    )
