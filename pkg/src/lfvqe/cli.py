"""Command-line frontend.

Subcommands: decompose (operator to Pauli text), vqe (run the minimization),
observe (evaluate an observable in a prepared state), formfactor (scan a
Q^2 operator family and extract the charge radius), calibrate (estimate a
readout calibration matrix).

Every run that writes results also writes a resolved-config echo with all
defaults materialized; re-running with ``--config <echo>`` reproduces the
output files byte for byte.  Exit codes: 0 success, 1 validation error,
2 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .circuits import AnsatzParams, build_ansatz, mode_state, run
from .encodings import Encoding, ModeOperator, encode, load_mode_operator
from .estimator import DEFAULT_SHOTS, EstimatorConfig
from .exceptions import NumericsError, ValidationError
from .mitigation import calibrate, load_calibration, load_noise, save_calibration
from .observables import (
    ObservableSpec,
    charge_radius,
    evaluate_observable,
    exact_ground_state,
    form_factor_scan,
    load_form_factor_scan,
    load_observable,
    pion_hamiltonian,
    scan_points_to_csv,
)
from .pauli import PauliSum
from .seeding import derive_seed
from .vqe import OptimizerConfig, vqe_minimize

DEFAULT_SEED = 12345

BUILTIN_OPERATORS = {"builtin:pion": lambda: pion_hamiltonian().operator}


class _CliParseError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage problems as exit-code-1 errors."""

    def error(self, message):
        raise _CliParseError(message)


@dataclass
class RunConfig:
    """Fully resolved settings of one CLI run (what the echo file stores)."""

    command: str
    hamiltonian: str = "builtin:pion"
    observable: str | None = None
    scan: str | None = None
    params: str | None = None
    encoding: str = "compact"
    mode: str = "sampled"
    shots: int = DEFAULT_SHOTS
    seed: int = DEFAULT_SEED
    noise: str | None = None
    mitigate: bool = False
    calibration: str | None = None
    optimizer: str | None = None
    max_iter: int = 200
    fit_points: int = 3
    out: str | None = None
    format: str = "json"
    plot: bool = True

    def resolved(self) -> "RunConfig":
        cfg = dataclasses.replace(self)
        if cfg.optimizer is None:
            cfg.optimizer = "spsa" if cfg.mode == "sampled" else "neldermead"
        return cfg

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json_file(cls, path) -> "RunConfig":
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        try:
            return cls(**data)
        except TypeError as exc:
            raise ValidationError(f"bad config file {path}: {exc}") from None


def _load_input(field: str, value: str | None, loader):
    if value is None:
        raise ValidationError(f"{field} is required for this command")
    try:
        return loader(value)
    except FileNotFoundError:
        raise ValidationError(f"{field} file not found: {value}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{field} file {value} is not valid JSON: {exc}") from None


def _load_hamiltonian_operator(spec: str) -> ModeOperator:
    if spec in BUILTIN_OPERATORS:
        return BUILTIN_OPERATORS[spec]()
    if spec.startswith("builtin:"):
        raise ValidationError(f"--hamiltonian: unknown builtin {spec!r}")
    return _load_input("--hamiltonian", spec, load_mode_operator)


def _load_hamiltonian_pauli(spec: str, encoding: Encoding) -> tuple[PauliSum, float | None]:
    """Operator for VQE plus its exact minimum when cheaply available."""
    if spec in BUILTIN_OPERATORS or spec.endswith(".json"):
        op = _load_hamiltonian_operator(spec)
        exact, _ = exact_ground_state(op)
        return encode(op, encoding), exact
    try:
        with open(spec, "r", encoding="utf-8") as fh:
            return PauliSum.from_text(fh.read()), None
    except FileNotFoundError:
        raise ValidationError(f"--hamiltonian file not found: {spec}") from None


def _estimator_config(cfg: RunConfig) -> EstimatorConfig:
    noise = _load_input("--noise", cfg.noise, load_noise) if cfg.noise else None
    calibration = (
        _load_input("--calibration", cfg.calibration, load_calibration)
        if cfg.calibration else None)
    return EstimatorConfig(
        mode=cfg.mode, shots_per_term=cfg.shots, seed=cfg.seed,
        noise=noise, mitigation=cfg.mitigate, calibration=calibration)


def _resolve_state(cfg: RunConfig, encoding: Encoding):
    """State to evaluate observables in: ansatz params or the exact ground state."""
    if cfg.params:
        data = _load_input("--params", cfg.params,
                           lambda p: json.load(open(p, "r", encoding="utf-8")))
        if "best" in data:
            values = data["best"]["params"]
            enc = Encoding.parse(data.get("encoding", encoding.value))
        else:
            values = data["values"]
            enc = Encoding.parse(data.get("encoding", encoding.value))
        if enc != encoding:
            raise ValidationError(
                f"--params were produced for the {enc.value} encoding")
        return run(build_ansatz(AnsatzParams(encoding, tuple(values))))
    op = _load_hamiltonian_operator(cfg.hamiltonian)
    _, ground = exact_ground_state(op)
    return mode_state(ground, encoding)


def _out_paths(cfg: RunConfig) -> tuple[Path, Path, Path]:
    out = Path(cfg.out)
    echo = out.with_name(out.stem + ".config.json")
    figure = out.with_name(out.stem + ".png")
    return out, echo, figure


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _emit(cfg: RunConfig, text: str) -> None:
    """Write the result plus the config echo, or print when no --out."""
    if cfg.out:
        out, echo, _ = _out_paths(cfg)
        _write_text(out, text)
        _write_text(echo, cfg.to_json())
    else:
        sys.stdout.write(text)


def _cmd_decompose(cfg: RunConfig) -> None:
    encoding = Encoding.parse(cfg.encoding)
    op = _load_hamiltonian_operator(cfg.hamiltonian)
    psum = encode(op, encoding)
    _emit(cfg, psum.to_text())


def _cmd_vqe(cfg: RunConfig) -> None:
    encoding = Encoding.parse(cfg.encoding)
    psum, exact = _load_hamiltonian_pauli(cfg.hamiltonian, encoding)
    est = _estimator_config(cfg)
    opt = OptimizerConfig(
        method=cfg.optimizer, max_iterations=cfg.max_iter,
        seed=derive_seed(cfg.seed, "optimizer"))
    trace = vqe_minimize(psum, encoding, est, opt)

    if cfg.format == "csv":
        text = trace.to_csv()
    else:
        text = json.dumps(trace.to_json_dict(), indent=2, sort_keys=True) + "\n"
    _emit(cfg, text)
    if cfg.out and cfg.plot:
        from .plotting import save_trace_plot

        _, _, figure = _out_paths(cfg)
        save_trace_plot(trace, figure, exact_energy=exact)
    best = trace.best.energy
    print(f"best energy {best.value:.6g} +/- {best.std_error:.3g} "
          f"at iteration {trace.best.index} "
          f"({'converged' if trace.converged else 'stopped at max iterations'})")


def _cmd_observe(cfg: RunConfig) -> None:
    encoding = Encoding.parse(cfg.encoding)
    if cfg.observable:
        spec = _load_input("--observable", cfg.observable, load_observable)
    else:
        op = _load_hamiltonian_operator(cfg.hamiltonian)
        spec = ObservableSpec(name="mass_squared", operator=op)
    state = _resolve_state(cfg, encoding)
    est = _estimator_config(cfg)
    result = evaluate_observable(state, spec, encoding, est)

    if cfg.format == "csv":
        header = "name,value,std_error,value_without_constant,constant,shots"
        row = (f"{spec.name},{result.value:.17g},{result.std_error:.17g},"
               f"{result.value_without_constant:.17g},{result.constant:.17g},"
               f"{result.shots_used}")
        text = header + "\n" + row + "\n"
    else:
        payload = {"name": spec.name, "units": spec.units,
                   "encoding": encoding.value, **result.to_json_dict()}
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    _emit(cfg, text)
    print(f"{spec.name} = {result.value:.6g} +/- {result.std_error:.3g} {spec.units}")


def _cmd_formfactor(cfg: RunConfig) -> None:
    encoding = Encoding.parse(cfg.encoding)
    scan = _load_input("--scan", cfg.scan, load_form_factor_scan)
    state = _resolve_state(cfg, encoding)
    est = _estimator_config(cfg)
    points = form_factor_scan(state, scan, encoding, est)
    radius = charge_radius(points, cfg.fit_points) if len(points) >= 3 else None

    if cfg.format == "csv":
        text = scan_points_to_csv(points)
    else:
        payload = {
            "name": scan.name,
            "encoding": encoding.value,
            "points": [{"q2_gev2": p.q2_gev2, "value": p.value,
                        "std_error": p.std_error} for p in points],
            "charge_radius": radius.to_json_dict() if radius else None,
        }
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    _emit(cfg, text)
    if cfg.out and cfg.plot:
        from .plotting import save_scan_plot

        _, _, figure = _out_paths(cfg)
        save_scan_plot(points, figure, name=scan.name)
    if radius is not None:
        if radius.physical:
            print(f"charge radius {radius.r_fm:.6g} fm "
                  f"(r^2 = {radius.r2_fm2:.6g} fm^2, {radius.fit_points}-point fit)")
        else:
            print(f"charge radius fit gave negative r^2 = {radius.r2_fm2:.6g} fm^2")


def _cmd_calibrate(cfg: RunConfig) -> None:
    noise = _load_input("--noise", cfg.noise, load_noise)
    cal = calibrate(noise, shots_per_state=cfg.shots, seed=cfg.seed)
    if cfg.out:
        out, echo, _ = _out_paths(cfg)
        out.parent.mkdir(parents=True, exist_ok=True)
        save_calibration(cal, out)
        _write_text(echo, cfg.to_json())
    else:
        sys.stdout.write(json.dumps(cal.to_json_dict(), indent=2, sort_keys=True) + "\n")
    print(f"calibrated {cal.n_qubits}-qubit readout matrix from "
          f"{cfg.shots} shots per basis state")


_COMMANDS = {
    "decompose": _cmd_decompose,
    "vqe": _cmd_vqe,
    "observe": _cmd_observe,
    "formfactor": _cmd_formfactor,
    "calibrate": _cmd_calibrate,
}


def _add_estimator_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=["exact", "sampled"], default="sampled",
                   help="exact amplitudes or shot sampling (default sampled)")
    p.add_argument("--shots", type=int, default=DEFAULT_SHOTS,
                   help="shots per Pauli term (default 8192)")
    p.add_argument("--noise", help="readout-noise JSON file")
    p.add_argument("--mitigate", action="store_true",
                   help="apply measurement error mitigation")
    p.add_argument("--calibration", help="calibration-matrix JSON file")


def _add_io_flags(p: argparse.ArgumentParser, with_format: bool = True) -> None:
    p.add_argument("--seed", type=int, default=DEFAULT_SEED,
                   help=f"master random seed (default {DEFAULT_SEED})")
    p.add_argument("--out", help="output file path")
    if with_format:
        p.add_argument("--format", choices=["csv", "json"], default="json",
                       help="output format (default json)")
    p.add_argument("--config", help="re-run from a resolved-config echo file")


def build_parser() -> _Parser:
    parser = _Parser(prog="lfvqe",
                     description="Light-front pion VQE engine")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("decompose", help="encode an operator and print Pauli terms")
    p.add_argument("--input", dest="hamiltonian", default="builtin:pion",
                   help="builtin:pion or a mode-operator JSON file")
    p.add_argument("--encoding", choices=["direct", "compact"], default="compact")
    _add_io_flags(p, with_format=False)

    p = sub.add_parser("vqe", help="minimize the mass-squared operator")
    p.add_argument("--hamiltonian", default="builtin:pion",
                   help="builtin:pion, mode-operator JSON, or Pauli text file")
    p.add_argument("--encoding", choices=["direct", "compact"], default="compact")
    _add_estimator_flags(p)
    p.add_argument("--optimizer", choices=["spsa", "neldermead", "pshift"],
                   help="default: spsa when sampled, neldermead when exact")
    p.add_argument("--max-iter", dest="max_iter", type=int, default=200)
    p.add_argument("--no-plot", dest="plot", action="store_false",
                   help="skip the trace figure")
    _add_io_flags(p)

    p = sub.add_parser("observe", help="evaluate an observable in the ground state")
    p.add_argument("--hamiltonian", default="builtin:pion")
    p.add_argument("--observable", help="observable JSON file (default: the hamiltonian)")
    p.add_argument("--params", help="ansatz parameters JSON (e.g. a vqe output)")
    p.add_argument("--encoding", choices=["direct", "compact"], default="compact")
    _add_estimator_flags(p)
    _add_io_flags(p)

    p = sub.add_parser("formfactor", help="scan a form-factor operator family")
    p.add_argument("--hamiltonian", default="builtin:pion")
    p.add_argument("--scan", help="scan JSON file", required=False)
    p.add_argument("--params", help="ansatz parameters JSON (e.g. a vqe output)")
    p.add_argument("--encoding", choices=["direct", "compact"], default="compact")
    p.add_argument("--fit-points", dest="fit_points", type=int, default=3,
                   help="points in the charge-radius fit window (default 3)")
    p.add_argument("--no-plot", dest="plot", action="store_false")
    _add_estimator_flags(p)
    _add_io_flags(p)

    p = sub.add_parser("calibrate", help="estimate a readout calibration matrix")
    p.add_argument("--noise", help="readout-noise JSON file", required=False)
    p.add_argument("--shots", type=int, default=DEFAULT_SHOTS,
                   help="shots per prepared basis state")
    _add_io_flags(p, with_format=False)

    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    if getattr(args, "config", None):
        cfg = RunConfig.from_json_file(args.config)
        if cfg.command != args.command:
            raise ValidationError(
                f"--config was recorded by {cfg.command!r}, not {args.command!r}")
        return cfg.resolved()
    fields = {f.name for f in dataclasses.fields(RunConfig)}
    values = {k: v for k, v in vars(args).items() if k in fields and v is not None}
    # argparse stores flag defaults; booleans need explicit passthrough
    if hasattr(args, "plot"):
        values["plot"] = args.plot
    if hasattr(args, "mitigate"):
        values["mitigate"] = args.mitigate
    return RunConfig(**values).resolved()


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _CliParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        cfg = _config_from_args(args)
        _COMMANDS[cfg.command](cfg)
        return 0
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NumericsError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
