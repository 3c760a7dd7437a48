"""Run a configured experiment and write its outputs.

:func:`run` integrates the joint dynamics once, evaluates the requested
observables at every sample and collects numerical-quality telemetry.
:func:`emit` writes a CSV table, a JSON sidecar and (optionally) a figure.
Nothing in the pipeline is random, so equal configs give byte-identical
CSV and JSON files.
"""

from __future__ import annotations

import csv
import json
import logging
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import BUILTIN_COLUMNS, RunConfig
from .errors import GaussbathError, ValidationError
from .evolution import IntegrationGrid, evolve_state, propagate
from .gaussian import EPS_SYMP, mean_energy
from .models import initial_joint_state
from .thermo import CorrelationMap, Partition, ThermoSample, correlation_map, thermo_sample

log = logging.getLogger(__name__)

ENTROPY_DRIFT_LIMIT = 1e-6
ENERGY_DRIFT_LIMIT = 1e-6
RECONCILIATION_LIMIT = 1e-6

_SAMPLE_FIELDS = {
    "T_eff": "T_eff",
    "S_S": "S_sys",
    "S_E": "S_env",
    "S_SE": "S_joint",
    "zeta": "zeta",
    "D": "rel_entropy",
    "E_E": "E_env",
}


@dataclass(frozen=True)
class Telemetry:
    max_defect: float
    max_entropy_drift: float
    plateau_energy_drift: float
    max_reconciliation: float
    min_zeta: float
    min_rel_entropy: float
    min_mutual_information: float
    failures: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return not self.failures

    def as_dict(self) -> dict:
        return {
            "max_symplectic_defect": self.max_defect,
            "max_joint_entropy_drift": self.max_entropy_drift,
            "plateau_energy_relative_drift": self.plateau_energy_drift,
            "max_reconciliation_error": self.max_reconciliation,
            "min_zeta": self.min_zeta,
            "min_relative_entropy": self.min_rel_entropy,
            "min_mutual_information": self.min_mutual_information,
            "failures": list(self.failures),
            "passed": self.passed,
        }


@dataclass
class TrajectoryRecord:
    config: RunConfig
    samples: list[ThermoSample]
    correlations: list[CorrelationMap]
    telemetry: Telemetry
    states: list[np.ndarray] | None = field(default=None, repr=False)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    @property
    def labels(self) -> list[str]:
        return [c.label for c in self.config.columns]

    def column(self, label: str) -> np.ndarray:
        if label == "t":
            return self.times
        if label in _SAMPLE_FIELDS:
            name = _SAMPLE_FIELDS[label]
            return np.array([np.nan if getattr(s, name) is None else getattr(s, name) for s in self.samples])
        if label in self.correlations[0].as_dict():
            return np.array([c.as_dict()[label] for c in self.correlations])
        if label in self.labels:
            # a system/bath split; read off the stored sample instead of recomputing
            return np.array([s.mi_sys_env for s in self.samples])
        raise KeyError(label)

    def table(self) -> np.ndarray:
        """Rows of ``t`` followed by the configured columns."""
        return np.column_stack([self.times] + [self.column(c) for c in self.labels])


@contextmanager
def _stage(name: str):
    """Re-raise library errors with the pipeline stage prefixed."""
    try:
        yield
    except GaussbathError as exc:
        raise type(exc)(f"{name}: {exc}") from exc


def run(config: RunConfig, keep_states: bool = False) -> TrajectoryRecord:
    spec = config.model
    with _stage("model"):
        driven = spec.driven_hamiltonian()
        sigma0 = initial_joint_state(spec)
        F_env = spec.environment_hamiltonian()
        partition = Partition(driven.system, driven.environment)
        partition.check(spec.total_modes)
    grid = IntegrationGrid.uniform(0.0, config.duration, config.dt, config.samples)
    if not spec.T_E > 0:
        raise ValidationError("model: the bath temperature must be positive for D and zeta")
    beta = 1.0 / spec.T_E
    system, environment = set(partition.system), set(partition.environment)
    pairs = [
        (c.label, c.modes_a, c.modes_b)
        for c in config.columns
        if c.is_pair and not (set(c.modes_a) == system and set(c.modes_b) == environment)
    ]
    ramp, tau = spec.switching.ramp, spec.switching.duration

    samples, correlations, states = [], [], []
    defects, plateau_energy = [], []
    with _stage("evolution"):
        for prop in propagate(driven, grid):
            sigma = evolve_state(sigma0, prop)
            sample = thermo_sample(
                prop.t, sigma, sigma0, F_env, beta, partition,
                omega_sys=spec.omega, thermality_rtol=config.thermality_rtol,
            )  # fmt: skip
            samples.append(sample)
            correlations.append(correlation_map(sigma, pairs, prop.t))
            defects.append(prop.defect)
            if ramp <= prop.t <= tau - ramp:
                plateau_energy.append(mean_energy(driven(prop.t), sigma))
            if keep_states:
                states.append(sigma)

    telemetry = _telemetry(samples, defects, plateau_energy)
    if not telemetry.passed:
        log.warning("run %s FAILED quality gates: %s", config.name, "; ".join(telemetry.failures))
    return TrajectoryRecord(config, samples, correlations, telemetry, states if keep_states else None)


def _telemetry(samples, defects, plateau_energy) -> Telemetry:
    joint = np.array([s.S_joint for s in samples])
    zeta = np.array([s.zeta for s in samples])
    rel = np.array([s.rel_entropy for s in samples])
    mi = np.array([s.mi_sys_env for s in samples])
    energy = np.array(plateau_energy)
    max_defect = float(max(defects))
    entropy_drift = float(np.max(np.abs(joint - joint[0])))
    energy_drift = float(np.max(np.abs(energy - energy[0])) / abs(energy[0])) if energy.size else 0.0
    reconciliation = float(np.max(np.abs(zeta - mi - rel)))

    failures = []
    if max_defect > EPS_SYMP:
        failures.append(f"symplectic defect {max_defect:.3e} > {EPS_SYMP:.0e}")
    if entropy_drift > ENTROPY_DRIFT_LIMIT:
        failures.append(f"joint entropy drift {entropy_drift:.3e} > {ENTROPY_DRIFT_LIMIT:.0e}")
    if energy_drift > ENERGY_DRIFT_LIMIT:
        failures.append(f"plateau energy drift {energy_drift:.3e} > {ENERGY_DRIFT_LIMIT:.0e}")
    if reconciliation > RECONCILIATION_LIMIT:
        failures.append(f"zeta - I - D mismatch {reconciliation:.3e} > {RECONCILIATION_LIMIT:.0e}")
    return Telemetry(
        max_defect=max_defect,
        max_entropy_drift=entropy_drift,
        plateau_energy_drift=energy_drift,
        max_reconciliation=reconciliation,
        min_zeta=float(zeta.min()),
        min_rel_entropy=float(rel.min()),
        min_mutual_information=float(mi.min()),
        failures=tuple(failures),
    )


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _model_summary(config: RunConfig) -> str:
    spec = config.model
    r = lambda x: repr(float(x))  # noqa: E731
    common = f"N={spec.n_modes} omega={r(spec.omega)} coupling={r(spec.coupling)} T_S={r(spec.T_S)} T_E={r(spec.T_E)}"
    if spec.kind == "cavity":
        extra = f"L={r(spec.length)} x={r(spec.position)}"
    else:
        extra = f"alpha={r(spec.alpha)} contacts={list(spec.contacts)}"
    return f"{spec.kind} {common} {extra} tau={r(spec.switching.duration)} delta={r(spec.switching.ramp)}"


def write_csv(record: TrajectoryRecord, path) -> None:
    config = record.config
    header = [
        f"# gaussbath {__version__} run {config.name}",
        f"# model: {_model_summary(config)}",
        f"# grid: dt={_fmt(config.dt)} samples={config.samples}",
        "# units: hbar = k_B = 1; t in inverse frequency units; entropies, MI, zeta and D in nats",
        "# conventions: sigma_ab = <x_a x_b + x_b x_a> (vacuum = identity); S = detector, E = bath, j = bath mode j (1-based), E-j = bath without mode j",
        "# T_eff is nan where the detector state is not thermal within the configured tolerance",
    ]
    for label in record.labels:
        if label in BUILTIN_COLUMNS:
            header.append(f"# {label}: {BUILTIN_COLUMNS[label]}")
    table = record.table()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("\n".join(header) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t"] + record.labels)
        for row in table:
            writer.writerow([_fmt(x) for x in row])


def read_csv(path) -> tuple[list[str], np.ndarray]:
    """Inverse of :func:`write_csv`: column names and the float table."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(line for line in fh if not line.startswith("#"))]
    return rows[0], np.array([[float(x) for x in r] for r in rows[1:]])


def sidecar(record: TrajectoryRecord) -> dict:
    config = record.config
    return {
        "tool": "gaussbath",
        "version": __version__,
        "run": config.name,
        "config": config.document,
        "overrides": config.overrides,
        "assumptions": config.assumptions,
        "resolved": {
            "model": _model_summary(config),
            "dt": config.dt,
            "samples": config.samples,
            "thermality_rtol": config.thermality_rtol,
            "columns": ["t"] + record.labels,
        },
        "telemetry": record.telemetry.as_dict(),
        "status": "ok" if record.telemetry.passed else "FAILED",
    }


def emit(record: TrajectoryRecord, out_dir, plot: bool = True) -> dict[str, Path]:
    """Write ``<name>.csv``, ``<name>.json`` and, with ``plot``, ``<name>.png``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    name = record.config.name
    paths = {"csv": out / f"{name}.csv", "json": out / f"{name}.json"}
    write_csv(record, paths["csv"])
    with open(paths["json"], "w", encoding="utf-8") as fh:
        json.dump(sidecar(record), fh, indent=2, sort_keys=True)
        fh.write("\n")
    if plot:
        from .plotting import plot_record

        paths["png"] = out / f"{name}.png"
        plot_record(record, paths["png"])
    return paths


ORACLE_TOLERANCE = 1e-3


@dataclass
class OracleComparison:
    times: np.ndarray
    gaussian: dict[str, np.ndarray]
    exact: dict[str, np.ndarray]
    leakage: np.ndarray
    tolerance: float = ORACLE_TOLERANCE

    @property
    def max_differences(self) -> dict[str, float]:
        return {k: float(np.max(np.abs(self.gaussian[k] - self.exact[k]))) for k in self.gaussian}

    @property
    def passed(self) -> bool:
        return all(d < self.tolerance for d in self.max_differences.values())


def compare_with_oracle(config: RunConfig, n_max: int | None = None, oracle_dt: float | None = None) -> OracleComparison:
    """Run the Gaussian pipeline and the truncated Fock oracle on the same small model.

    ``n_max`` and ``oracle_dt`` default to the ``[oracle]`` table of the config
    (40 and 1e-2 when absent). The two pipelines share sample times.
    """
    from .fock import TruncatedSystem, run_oracle

    table = config.document.get("oracle", {})
    n_max = int(table.get("n_max", 40) if n_max is None else n_max)
    oracle_dt = float(table.get("dt", 1e-2) if oracle_dt is None else oracle_dt)
    with _stage("oracle"):
        system = TruncatedSystem.from_model(config.model, n_max)
        grid = IntegrationGrid.uniform(0.0, config.duration, oracle_dt, config.samples)
        exact = run_oracle(system, grid)
    record = run(config)
    keys = {"S_S": ("S_sys", "S_sys"), "MI(S:E)": ("mi_sys_env", "mi_sys_env"), "zeta": ("zeta", "zeta"), "D": ("rel_entropy", "rel_entropy")}
    gaussian = {k: np.array([getattr(s, a) for s in record.samples]) for k, (a, _) in keys.items()}
    oracle = {k: np.array([getattr(o, b) for o in exact]) for k, (_, b) in keys.items()}
    return OracleComparison(record.times, gaussian, oracle, np.array([o.leakage for o in exact]))


def write_oracle_csv(comparison: OracleComparison, path) -> None:
    names = list(comparison.gaussian)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# gaussbath {__version__} Gaussian pipeline vs truncated Fock oracle; entropies in nats\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t"] + [f"{n} gaussian" for n in names] + [f"{n} fock" for n in names] + ["leakage"])
        for i, t in enumerate(comparison.times):
            row = [t] + [comparison.gaussian[n][i] for n in names] + [comparison.exact[n][i] for n in names]
            writer.writerow([_fmt(x) for x in row + [comparison.leakage[i]]])
