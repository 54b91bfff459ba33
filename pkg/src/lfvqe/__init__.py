"""Variational quantum eigensolver engine for the light-front valence pion.

The package glues together five layers: Pauli-string algebra (`pauli`),
mode-to-qubit encodings (`encodings`), statevector circuit simulation and
the ansatz families (`circuits`), expectation estimation from exact
amplitudes or seeded shots with optional readout noise and mitigation
(`estimator`, `mitigation`), and the hybrid minimization loop plus
ground-state observables (`vqe`, `observables`).  The `cli` module exposes
the whole pipeline as the ``lfvqe`` command.
"""

from .circuits import (
    AnsatzParams,
    Circuit,
    Gate,
    StateVector,
    apply,
    build_ansatz,
    mode_state,
    one_hot_leakage,
    run,
    synthesize_params,
)
from .encodings import (
    Encoding,
    ModeOperator,
    encode,
    encode_compact,
    encode_direct,
    qubit_count,
)
from .estimator import (
    EstimatorConfig,
    ShotEstimate,
    TermEstimate,
    expectation_exact,
    expectation_sampled,
    measure_term,
    pauli_term_expectation,
)
from .exceptions import NumericsError, ValidationError
from .mitigation import (
    CalibrationMatrix,
    ReadoutNoise,
    calibrate,
    corrupt,
    exact_calibration,
    mitigate,
)
from .observables import (
    HBARC_GEV_FM,
    ChargeRadius,
    FormFactorScan,
    ObservableSpec,
    PionHamiltonian,
    ScanPoint,
    charge_radius,
    convert_units,
    evaluate_observable,
    exact_ground_state,
    form_factor_scan,
    pion_hamiltonian,
)
from .pauli import PauliSum, decompose, pauli_matrix, reconstruct
from .vqe import (
    IterationRecord,
    OptimizerConfig,
    VQETrace,
    default_initial_params,
    parameter_shift_gradient,
    vqe_minimize,
)

__version__ = "0.1.0"
