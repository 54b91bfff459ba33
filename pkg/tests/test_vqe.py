"""Hybrid minimization loop, optimizers, and parameter-shift gradients."""

import numpy as np
import pytest

from conftest import random_hermitian
from lfvqe import (
    AnsatzParams,
    Encoding,
    EstimatorConfig,
    ModeOperator,
    OptimizerConfig,
    PauliSum,
    build_ansatz,
    encode_compact,
    encode_direct,
    expectation_exact,
    parameter_shift_gradient,
    run,
    vqe_minimize,
)
from lfvqe.exceptions import ValidationError

EXACT = EstimatorConfig(mode="exact")


def finite_difference(psum, params, h=1e-5):
    base = np.array(params.values)
    grad = np.zeros_like(base)
    for k in range(base.size):
        up, down = base.copy(), base.copy()
        up[k] += h
        down[k] -= h
        e_up = expectation_exact(run(build_ansatz(params.replace(up))), psum)
        e_dn = expectation_exact(run(build_ansatz(params.replace(down))), psum)
        grad[k] = (e_up - e_dn) / (2 * h)
    return grad


def test_minimize_single_qubit_z():
    trace = vqe_minimize(
        PauliSum({"Z": 1.0}), Encoding.COMPACT, EXACT,
        OptimizerConfig(method="neldermead", max_iterations=100, seed=1))
    assert trace.best.energy.value == pytest.approx(-1.0, abs=1e-6)


def test_minimize_single_qubit_z_with_pshift():
    trace = vqe_minimize(
        PauliSum({"Z": 1.0}), Encoding.COMPACT, EXACT,
        OptimizerConfig(method="pshift", max_iterations=150, seed=1))
    assert trace.best.energy.value == pytest.approx(-1.0, abs=1e-6)


def test_minimize_compact_pion_exact(pion_operator, pion_ground):
    lam, _ = pion_ground
    trace = vqe_minimize(
        encode_compact(pion_operator), Encoding.COMPACT, EXACT,
        OptimizerConfig(method="neldermead", max_iterations=200, seed=2))
    assert abs(trace.best.energy.value - lam) / lam < 1e-3
    assert len(trace.iterations) - 1 <= 200


def test_minimize_direct_pion_exact(pion_operator, pion_ground):
    lam, _ = pion_ground
    trace = vqe_minimize(
        encode_direct(pion_operator), Encoding.DIRECT, EXACT,
        OptimizerConfig(method="neldermead", max_iterations=200, seed=2))
    assert abs(trace.best.energy.value - lam) / lam < 5e-3


def test_minimize_direct_pion_spsa_sampled(pion_operator, pion_ground):
    lam, _ = pion_ground
    psum = encode_direct(pion_operator)
    est = EstimatorConfig(mode="sampled", shots_per_term=8192, seed=5)
    opt = OptimizerConfig(method="spsa", max_iterations=100, seed=5)
    trace = vqe_minimize(psum, Encoding.DIRECT, est, opt)
    final = trace.iterations[-1].energy
    no_constant_scale = abs(lam - final.constant)
    assert abs(final.value - lam) / no_constant_scale < 0.05


def test_variational_bound_random_operators():
    rng = np.random.default_rng(70)
    for trial in range(5):
        h = random_hermitian(rng, 4, real=True)
        lam_min = np.linalg.eigvalsh(h)[0]
        trace = vqe_minimize(
            encode_compact(ModeOperator(h)), Encoding.COMPACT, EXACT,
            OptimizerConfig(method="neldermead", max_iterations=80, seed=trial))
        for rec in trace.iterations:
            assert rec.energy.value >= lam_min - 1e-8


def test_trace_reproducibility(pion_operator):
    psum = encode_direct(pion_operator)
    est = EstimatorConfig(mode="sampled", shots_per_term=1024, seed=13)
    opt = OptimizerConfig(method="spsa", max_iterations=15, seed=13)
    a = vqe_minimize(psum, Encoding.DIRECT, est, opt)
    b = vqe_minimize(psum, Encoding.DIRECT, est, opt)
    assert a.to_csv() == b.to_csv()
    assert a.best.index == b.best.index


def test_trace_well_formedness(pion_operator):
    psum = encode_compact(pion_operator)
    est = EstimatorConfig(mode="sampled", shots_per_term=256, seed=3)
    opt = OptimizerConfig(method="spsa", max_iterations=20, seed=3)
    trace = vqe_minimize(psum, Encoding.COMPACT, est, opt)
    # indices are consecutive from zero
    assert [rec.index for rec in trace.iterations] == list(range(len(trace.iterations)))
    # best is the running minimum
    values = [rec.energy.value for rec in trace.iterations]
    assert trace.best.energy.value == min(values)
    # running best envelope is non-increasing
    env = np.minimum.accumulate(values)
    assert all(a >= b for a, b in zip(env, env[1:]))
    # shots bookkeeping
    assert trace.total_shots == sum(r.energy.shots_used for r in trace.iterations)


def test_convergence_flag(pion_operator, pion_ground):
    psum = encode_compact(pion_operator)
    done = vqe_minimize(psum, Encoding.COMPACT, EXACT,
                        OptimizerConfig(method="neldermead", max_iterations=200, seed=2))
    assert done.converged
    cut = vqe_minimize(psum, Encoding.COMPACT, EXACT,
                       OptimizerConfig(method="neldermead", max_iterations=3, seed=2))
    assert not cut.converged


def test_qubit_count_mismatch(pion_operator):
    psum = encode_compact(pion_operator)
    with pytest.raises(ValidationError):
        vqe_minimize(psum, Encoding.DIRECT, EXACT,
                     OptimizerConfig(method="neldermead"))


def test_pshift_requires_exact_mode(pion_operator):
    with pytest.raises(ValidationError):
        vqe_minimize(encode_compact(pion_operator), Encoding.COMPACT,
                     EstimatorConfig(mode="sampled", shots_per_term=64, seed=0),
                     OptimizerConfig(method="pshift"))


def test_optimizer_config_validation():
    with pytest.raises(ValidationError):
        OptimizerConfig(method="adam")
    with pytest.raises(ValidationError):
        OptimizerConfig(max_iterations=0)
    with pytest.raises(ValidationError):
        OptimizerConfig(convergence_tol=-1.0)


def test_gradient_matches_finite_differences(pion_operator):
    # work in GeV^2 so the 1e-5 finite-difference window is noise-free
    op = ModeOperator(pion_operator.entries / 1e6, units="GeV^2")
    rng = np.random.default_rng(71)
    for encoding, psum, n_par in (
        (Encoding.DIRECT, encode_direct(op), 3),
        (Encoding.COMPACT, encode_compact(op), 9),
    ):
        for _ in range(10):
            params = AnsatzParams(encoding, tuple(rng.uniform(-np.pi, np.pi, n_par)))
            shift = parameter_shift_gradient(psum, encoding, params)
            fd = finite_difference(psum, params)
            assert np.abs(shift - fd).max() < 1e-5


def test_gradient_zero_for_constant_operator():
    params = AnsatzParams(Encoding.COMPACT, (0.3,) * 9)
    grad = parameter_shift_gradient(PauliSum({"II": 4.2}), Encoding.COMPACT, params)
    assert np.array_equal(grad, np.zeros(9))


def test_gradient_vanishes_at_minimum(pion_operator):
    op = ModeOperator(pion_operator.entries / 1e6, units="GeV^2")
    psum = encode_compact(op)
    rough = vqe_minimize(psum, Encoding.COMPACT, EXACT,
                         OptimizerConfig(method="neldermead", max_iterations=400,
                                         seed=4, convergence_tol=1e-12))
    # polish into the stationary point with gradient descent
    polished = vqe_minimize(psum, Encoding.COMPACT, EXACT,
                            OptimizerConfig(method="pshift", max_iterations=200,
                                            seed=4, convergence_tol=1e-14),
                            initial=rough.best.params)
    grad = parameter_shift_gradient(psum, Encoding.COMPACT, polished.best.params)
    assert np.linalg.norm(grad) < 1e-4


def test_gradient_encoding_mismatch(pion_operator):
    params = AnsatzParams(Encoding.COMPACT, (0.0,) * 9)
    with pytest.raises(ValidationError):
        parameter_shift_gradient(encode_compact(pion_operator), Encoding.DIRECT, params)


def test_trace_serialization(pion_operator):
    psum = encode_compact(pion_operator)
    est = EstimatorConfig(mode="sampled", shots_per_term=128, seed=9)
    trace = vqe_minimize(psum, Encoding.COMPACT, est,
                         OptimizerConfig(method="spsa", max_iterations=5, seed=9))
    csv_text = trace.to_csv()
    lines = csv_text.strip().splitlines()
    assert lines[0] == "iteration,energy,std_error,shots," + ",".join(
        f"theta{k}" for k in range(9))
    assert len(lines) == len(trace.iterations) + 1
    data = trace.to_json_dict()
    assert data["encoding"] == "compact"
    assert data["total_shots"] == trace.total_shots
    assert len(data["iterations"]) == len(trace.iterations)
    assert data["best"]["energy"]["value"] == trace.best.energy.value
