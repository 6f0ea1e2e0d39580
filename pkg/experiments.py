"""Experiment configuration and runners.

An experiment is resolved from three layers, lowest precedence first:

1. the bundled experiment bank (``SignalModel/data/experiment_bank.json``,
   or the file named by PWAPPROX_BANK_PATH), one defaults block per kind;
2. a JSON config file, local or ``gs://bucket/object``;
3. command-line overrides.

The merged dict is validated by ``ExperimentConfig`` and handed to the
matching ``run_*`` function, which returns an ``ExperimentReport``.
"""

import copy
import json
import math
import os
import sys
from typing import Any, Callable, Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# Google Cloud Storage for config loading
try:
    from google.cloud import storage
    GCS_AVAILABLE = True
except ImportError:
    GCS_AVAILABLE = False

from SignalModel.measurements import MeasurementSystem
from SignalModel.sampler import (
    DEFAULT_SUPPORT,
    GeneratingFunctionConfig,
    SamplingSequence,
    gram_eigenvalues,
    gram_matrix,
    parseval_residual,
    write_gram_csv,
)
from SignalModel.spectral import (
    SpectralGrid,
    Spectrum,
    TransferFunction,
    bandlimited_random_spectrum,
    constant_spectrum,
    hilbert_transfer,
    identity_transfer,
    indicator_spectrum,
    lowpass_transfer,
    triangle_spectrum,
    zero_spectrum,
)
from SystemApprox.approximator import SystemApproximator
from SystemApprox.diagnostics import (
    FOUR_OVER_PI_SQUARED,
    adversarial_transfer,
    dirichlet_lebesgue,
    growth_fit,
    kernel_l1,
    kernel_l1_profile,
    kernel_spectrum,
    worst_case_signal_value,
)
from SystemApprox.functional_engines import dyadic_limit
from SystemApprox.reports import ExperimentReport

DEFAULT_BANK_PATH = os.path.join(os.path.dirname(os.path.abspath(__file__)), "SignalModel", "data", "experiment_bank.json")
BANK_ENV = "PWAPPROX_BANK_PATH"

EXPERIMENTS = (
    "reconstruct",
    "walsh-converge",
    "divergence",
    "lebesgue",
    "riesz",
    "export-kernel",
    "functional-converge",
)

# Keys that only name output files; left out of the embedded config.
OUTPUT_KEYS = {"out", "gram_out"}


def _print_notice(tag: str, msg: str) -> None:
    """Print a bracket-tagged notice to stderr, keeping stdout for CSV."""
    try:
        print(f"[{tag}] {msg}", file=sys.stderr)
    except Exception:
        pass


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SequenceSpec(_Strict):
    """Sampling sequence: rule, Kadec bound, seed, index window, perturbation support, product order."""

    rule: Literal["equidistant", "kadec"] = "equidistant"
    delta: float = Field(default=0.0, ge=0.0, lt=0.25, description="Kadec perturbation bound")
    seed: int = Field(default=0, ge=0, description="Perturbation seed")
    K: int = Field(default=64, ge=0, description="Index window |k| <= K")
    support: int = Field(default=DEFAULT_SUPPORT, ge=0, description="Perturbed indices 0 < |k| <= support (kadec)")
    n_prod: Optional[int] = Field(default=None, ge=1, description="Generating-function product order")


class SystemSpec(_Strict):
    """LTI system; ``adversarial`` is built from (omega, t, N) on the configured sequence."""

    kind: Literal["identity", "hilbert", "lowpass", "adversarial"] = "identity"
    cutoff: float = Field(default=math.pi, gt=0.0, le=math.pi)
    omega: float = Field(default=0.0, ge=-math.pi, le=math.pi)
    t: float = 0.0
    N: int = Field(default=0, ge=0)


class SignalSpec(_Strict):
    """Named test spectrum."""

    kind: Literal["constant", "triangle", "indicator", "bandlimited-random", "zero"] = "triangle"
    band: float = Field(default=math.pi, gt=0.0, le=math.pi)
    band_low: float = Field(default=0.0, ge=0.0)
    seed: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _inner_edge_below_band(self):
        if self.band_low >= self.band:
            raise ValueError(f"band_low ({self.band_low}) must be below band ({self.band})")
        return self


class TGridSpec(_Strict):
    """Evaluation times: ``count`` equally spaced points on [start, stop]."""

    start: float = -8.0
    stop: float = 8.0
    count: int = Field(default=257, ge=1)

    @model_validator(mode="after")
    def _ordered(self):
        if self.count > 1 and not self.stop > self.start:
            raise ValueError(f"stop ({self.stop}) must exceed start ({self.start})")
        return self

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([self.start])
        return np.linspace(self.start, self.stop, self.count)


class ExperimentConfig(_Strict):
    """Fully resolved experiment configuration; unknown keys are rejected."""

    experiment: Literal[EXPERIMENTS]
    grid: int = Field(default=4096, ge=2, description="Spectral grid size M (power of two)")
    sequence: SequenceSpec = Field(default_factory=SequenceSpec)
    system: SystemSpec = Field(default_factory=SystemSpec)
    signal: SignalSpec = Field(default_factory=SignalSpec)
    stages: List[int] = Field(default_factory=lambda: [8, 16, 32, 64], min_length=1)
    t_grid: TGridSpec = Field(default_factory=TGridSpec)
    out: Optional[str] = None
    gram_out: Optional[str] = None
    inclusive_limit: bool = False
    both_limits: bool = False
    exploratory: bool = False
    engine: Literal["sampling", "oversampled", "functional", "walsh-a", "walsh-b"] = "sampling"
    oversampling: float = Field(default=1.0, ge=1.0)
    kernel: Literal["system", "transition"] = "system"
    measurement: Literal["walsh", "fourier_exponentials"] = "walsh"
    omega: float = Field(default=0.0, ge=-math.pi, le=math.pi, description="Probe frequency")
    t: float = Field(default=0.0, description="Probe time")
    sigma: float = Field(default=math.pi, gt=0.0, le=math.pi, description="Worst-case band")
    sigma_low: float = Field(default=0.0, ge=0.0)
    n_max: int = Field(default=16, ge=1)
    export: Literal["kernel", "adversarial", "signal", "system"] = "kernel"

    @field_validator("grid")
    @classmethod
    def _power_of_two(cls, v: int) -> int:
        if v & (v - 1):
            raise ValueError(f"grid size must be a power of two, got {v}")
        return v

    @field_validator("stages")
    @classmethod
    def _non_negative(cls, v: List[int]) -> List[int]:
        if any(N < 0 for N in v):
            raise ValueError(f"stages must be non-negative, got {v}")
        return v

    def embedded(self) -> Dict[str, Any]:
        """Config as written into report headers (output paths dropped)."""
        return self.model_dump(mode="json", exclude=OUTPUT_KEYS)


# --- Loading ----------------------------------------------------------------


def _load_gcs_json(url: str) -> Dict[str, Any]:
    if not GCS_AVAILABLE:
        raise RuntimeError("Google Cloud Storage client not available. Install with: pip install google-cloud-storage")
    parts = url[5:].split("/", 1)
    if len(parts) != 2 or not parts[0] or not parts[1]:
        raise ValueError(f"Invalid GCS URL format: {url}")
    bucket_name, blob_path = parts
    blob = storage.Client().bucket(bucket_name).blob(blob_path)
    if not blob.exists():
        raise FileNotFoundError(f"Config file not found in GCS: {url}")
    return json.loads(blob.download_as_text())


def load_json_source(path: str) -> Dict[str, Any]:
    """Load a JSON object from a local path or a ``gs://`` URL."""
    if path.startswith("gs://"):
        data = _load_gcs_json(path)
    else:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: top-level JSON value must be an object")
    return data


def load_experiment_bank(path: Optional[str] = None) -> Dict[str, Any]:
    """Per-experiment default blocks from the bank file."""
    return load_json_source(path or os.getenv(BANK_ENV) or DEFAULT_BANK_PATH)


def _merge(base: Dict[str, Any], update: Dict[str, Any]) -> Dict[str, Any]:
    out = copy.deepcopy(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def resolve_config(
    experiment: str,
    source: Optional[Dict[str, Any]] = None,
    overrides: Optional[Dict[str, Any]] = None,
    bank: Optional[Dict[str, Any]] = None,
) -> ExperimentConfig:
    """Merge bank defaults, a config dict and overrides, then validate.

    Args:
        experiment: Experiment kind; wins over any ``experiment`` key below.
        source: Parsed config file contents.
        overrides: Command-line or request overrides.
        bank: Experiment bank; loaded from disk when omitted.

    Raises:
        pydantic.ValidationError: If any key is unknown or out of range.
    """
    if experiment not in EXPERIMENTS:
        raise ValueError(f"Unknown experiment '{experiment}'. Available experiments: {list(EXPERIMENTS)}")
    bank = load_experiment_bank() if bank is None else bank
    merged = _merge(bank.get(experiment, {}), source or {})
    merged = _merge(merged, overrides or {})
    merged["experiment"] = experiment
    return ExperimentConfig.model_validate(merged)


# --- Builders ---------------------------------------------------------------


def build_grid(config: ExperimentConfig) -> SpectralGrid:
    return SpectralGrid(config.grid)


def build_sequence(config: ExperimentConfig) -> SamplingSequence:
    spec = config.sequence
    return SamplingSequence(spec.rule, spec.delta, spec.seed, spec.K, spec.support)


def build_truncation(config: ExperimentConfig) -> GeneratingFunctionConfig:
    return GeneratingFunctionConfig(config.sequence.n_prod)


def build_signal(config: ExperimentConfig, grid: SpectralGrid) -> Spectrum:
    spec = config.signal
    if spec.kind == "constant":
        return constant_spectrum(grid, spec.band, spec.band_low)
    if spec.kind == "triangle":
        return triangle_spectrum(grid, spec.band)
    if spec.kind == "indicator":
        return indicator_spectrum(grid, spec.band, spec.band_low)
    if spec.kind == "bandlimited-random":
        return bandlimited_random_spectrum(grid, spec.seed, spec.band, spec.band_low)
    return zero_spectrum(grid, spec.band)


def build_system(config: ExperimentConfig, grid: SpectralGrid) -> TransferFunction:
    spec = config.system
    if spec.kind == "hilbert":
        return hilbert_transfer(grid)
    if spec.kind == "lowpass":
        return lowpass_transfer(grid, spec.cutoff)
    if spec.kind == "adversarial":
        return adversarial_transfer(build_sequence(config), spec.omega, spec.t, spec.N, grid, build_truncation(config))
    return identity_transfer(grid)


def _engine_options(config: ExperimentConfig, grid: SpectralGrid) -> Dict[str, Any]:
    if config.engine == "sampling":
        return {"seq": build_sequence(config), "cfg": build_truncation(config)}
    if config.engine == "oversampled":
        return {"a": config.oversampling, "kernel": config.kernel}
    if config.engine == "functional":
        return {"system": MeasurementSystem(config.measurement, grid, max(config.stages))}
    return {"inclusive": config.inclusive_limit}


def _scan(config: ExperimentConfig, engine: str, options: Dict[str, Any]) -> ExperimentReport:
    grid = build_grid(config)
    f = build_signal(config, grid)
    T = build_system(config, grid)
    return SystemApproximator(engine=engine, options=options).run(f, T, config.stages, config.t_grid.values())


def _grid_note(config: ExperimentConfig) -> str:
    tg = config.t_grid
    return f"grid: M={config.grid}; t_grid: {tg.count} points on [{tg.start!r}, {tg.stop!r}]"


# --- Runners ----------------------------------------------------------------


def run_reconstruct(config: ExperimentConfig) -> ExperimentReport:
    """Per-stage sup-over-t error of the configured engine."""
    grid = build_grid(config)
    report = _scan(config, config.engine, _engine_options(config, grid))
    report.experiment = "reconstruct"
    report.config = config.embedded()
    report.notes.append(_grid_note(config))
    return report


def run_walsh_converge(config: ExperimentConfig) -> ExperimentReport:
    """Dyadic sweep of engines A and B, one or both summation limits."""
    limits = [False, True] if config.both_limits else [config.inclusive_limit]
    columns = ["N", "U", "a_sup_error", "b_sup_error"]
    if config.both_limits:
        columns += ["U_inclusive", "a_sup_error_inclusive", "b_sup_error_inclusive"]
    columns.append("flags")
    errors: Dict[bool, Dict[str, List[float]]] = {}
    for inclusive in limits:
        errors[inclusive] = {
            engine: _scan(config, engine, {"inclusive": inclusive}).column("abs_error") for engine in ("walsh-a", "walsh-b")
        }
    report = ExperimentReport("walsh-converge", columns, config=config.embedded(), notes=[_grid_note(config)])
    first = limits[0]
    for i, N in enumerate(config.stages):
        row = {
            "N": N,
            "U": dyadic_limit(N, first),
            "a_sup_error": errors[first]["walsh-a"][i],
            "b_sup_error": errors[first]["walsh-b"][i],
            "flags": "both" if config.both_limits else ("inclusive" if first else "classical"),
        }
        if config.both_limits:
            row.update(
                U_inclusive=dyadic_limit(N, True),
                a_sup_error_inclusive=errors[True]["walsh-a"][i],
                b_sup_error_inclusive=errors[True]["walsh-b"][i],
            )
        report.add_row(**row)
    return report


DIVERGENCE_COLUMNS = [
    "row",
    "N",
    "kernel_l1",
    "kernel_max_over_M",
    "dirichlet_lebesgue",
    "worst_case_value",
    "argmax_omega",
    "slope",
    "intercept",
    "residual",
    "flags",
]


def run_divergence(config: ExperimentConfig) -> ExperimentReport:
    """Adversarial system at (omega, t, max stage); kernel and worst-case sweeps plus growth fits."""
    grid = build_grid(config)
    seq = build_sequence(config)
    cfg = build_truncation(config)
    stages = list(config.stages)
    exploratory = config.exploratory or not seq.is_equidistant
    flag = "exploratory" if exploratory else ""
    T = adversarial_transfer(seq, config.omega, config.t, max(stages), grid, cfg)
    top = max(stages)
    running = kernel_l1_profile(seq, config.omega, top, grid, cfg)[1] if top >= 1 else np.array([])

    report = ExperimentReport("divergence", list(DIVERGENCE_COLUMNS), config=config.embedded())
    report.notes.append(f"grid: M={config.grid}; sequence: {seq.label}; adversarial system built at N={top}")
    if exploratory:
        report.notes.append("exploratory: no reference value exists for this sequence")
        _print_notice("Exploratory", f"divergence run on {seq.label} is exploratory")
    kernels, worst, gaps = [], [], []
    for N in stages:
        value, argmax = worst_case_signal_value(T, seq, N, config.t, config.sigma, cfg, config.sigma_low)
        k_val = kernel_l1(seq, config.omega, N, grid, cfg)
        d_val = dirichlet_lebesgue(N, grid)
        kernels.append(k_val)
        worst.append(value)
        gaps.append(abs(k_val - d_val))
        report.add_row(
            row="stage",
            N=N,
            kernel_l1=k_val,
            kernel_max_over_M=float(running[N - 1]) if N >= 1 else k_val,
            dirichlet_lebesgue=d_val,
            worst_case_value=value,
            argmax_omega=argmax,
            flags=flag,
        )
    report.notes.append(
        "quadrature: kernel_l1 uses the M-node grid rule, dirichlet_lebesgue per-lobe Gauss-Legendre; "
        f"the two drift apart as 2N+1 approaches M (max gap {max(gaps)!r})"
    )
    if sum(1 for N in stages if N >= 1) < 3:
        msg = "growth fit omitted: fewer than 3 stages with N >= 1"
        report.add_row(row="warning", flags=msg)
        _print_notice("Fit Skipped", msg)
        return report
    for name, values in (("kernel_l1", kernels), ("worst_case_value", worst)):
        fit = growth_fit(stages, values)
        report.add_row(
            row="fit",
            slope=fit.slope,
            intercept=fit.intercept,
            residual=fit.residual,
            flags=f"{name};exploratory" if exploratory else name,
        )
    return report


def run_lebesgue(config: ExperimentConfig) -> ExperimentReport:
    """Dirichlet Lebesgue constants with log-ratio and log-slope columns."""
    grid = build_grid(config)
    columns = ["row", "N", "lebesgue", "log_ratio", "asymptotic_ratio", "increment_slope", "slope", "intercept", "residual"]
    report = ExperimentReport("lebesgue", columns, config=config.embedded())
    report.notes.append(f"reference constant 4/pi^2 = {FOUR_OVER_PI_SQUARED!r}")
    values = []
    previous = None
    for N in config.stages:
        value = dirichlet_lebesgue(N, grid)
        values.append(value)
        ratio = value / math.log(N) if N >= 2 else None
        increment = None
        if previous is not None and previous[0] >= 1 and N > previous[0]:
            increment = (value - previous[1]) / (math.log(N) - math.log(previous[0]))
        report.add_row(
            row="stage",
            N=N,
            lebesgue=value,
            log_ratio=ratio,
            asymptotic_ratio=None if ratio is None else ratio / FOUR_OVER_PI_SQUARED,
            increment_slope=increment,
        )
        previous = (N, value)
    if sum(1 for N in config.stages if N >= 1) >= 3:
        fit = growth_fit(config.stages, values)
        report.add_row(row="fit", slope=fit.slope, intercept=fit.intercept, residual=fit.residual)
    return report


def run_riesz(config: ExperimentConfig) -> ExperimentReport:
    """Gram eigenvalues of the finite section |j|, |k| <= n_max."""
    grid = build_grid(config)
    seq = build_sequence(config)
    cfg = build_truncation(config)
    gram = gram_matrix(seq, config.n_max, grid, cfg)
    if config.gram_out:
        write_gram_csv(config.gram_out, gram)
    eigenvalues = gram_eigenvalues(gram)
    residual = max(parseval_residual(seq, k, grid, cfg=cfg) for k in range(-config.n_max, config.n_max + 1))
    report = ExperimentReport("riesz", ["index", "eigenvalue"], config=config.embedded())
    report.notes.extend(
        [
            f"sequence: {seq.label}",
            f"lower_bound: {float(eigenvalues[0])!r}",
            f"upper_bound: {float(eigenvalues[-1])!r}",
            f"max_parseval_residual: {residual!r}",
        ]
    )
    for i, value in enumerate(eigenvalues):
        report.add_row(index=i, eigenvalue=float(value))
    return report


def run_export_kernel(config: ExperimentConfig) -> ExperimentReport:
    """Kernel, adversarial transfer, signal or system on the grid as (omega, re, im)."""
    grid = build_grid(config)
    seq = build_sequence(config)
    cfg = build_truncation(config)
    N = max(config.stages)
    if config.export == "kernel":
        values = kernel_spectrum(seq, config.omega, N, grid, cfg)
    elif config.export == "adversarial":
        values = adversarial_transfer(seq, config.omega, config.t, N, grid, cfg).values
    elif config.export == "signal":
        values = build_signal(config, grid).values
    else:
        values = build_system(config, grid).values
    report = ExperimentReport("export-kernel", ["omega", "re", "im"], config=config.embedded())
    for w, v in zip(grid.nodes, values):
        report.add_row(omega=float(w), re=float(v.real), im=float(v.imag))
    return report


def run_functional_converge(config: ExperimentConfig) -> ExperimentReport:
    """Measurement-functional process sup error per stage."""
    grid = build_grid(config)
    system = MeasurementSystem(config.measurement, grid, max(config.stages))
    report = _scan(config, "functional", {"system": system})
    report.experiment = "functional-converge"
    report.config = config.embedded()
    report.notes.append(_grid_note(config))
    if config.signal.band >= math.pi:
        report.notes.append("signal band is pi: no oversampling margin")
    return report


RUNNERS: Dict[str, Callable[[ExperimentConfig], ExperimentReport]] = {
    "reconstruct": run_reconstruct,
    "walsh-converge": run_walsh_converge,
    "divergence": run_divergence,
    "lebesgue": run_lebesgue,
    "riesz": run_riesz,
    "export-kernel": run_export_kernel,
    "functional-converge": run_functional_converge,
}


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    return RUNNERS[config.experiment](config)


__all__ = [
    "EXPERIMENTS",
    "ExperimentConfig",
    "SequenceSpec",
    "SystemSpec",
    "SignalSpec",
    "TGridSpec",
    "load_json_source",
    "load_experiment_bank",
    "resolve_config",
    "build_grid",
    "build_sequence",
    "build_signal",
    "build_system",
    "run_reconstruct",
    "run_walsh_converge",
    "run_divergence",
    "run_lebesgue",
    "run_riesz",
    "run_export_kernel",
    "run_functional_converge",
    "RUNNERS",
    "run_experiment",
]
