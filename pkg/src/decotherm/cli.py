"""Configuration-driven runner.

Commands:

    decotherm evolve  --config FILE --out FILE.csv
    decotherm figures {fig1|fig2} --out DIR [--config FILE]
    decotherm oracle  --config FILE --out FILE.csv

Configs are flat ``key = value`` text files; ``#`` starts a comment and
``--set key=value`` flags override file keys. Exit codes: 0 success,
1 validation error, 2 numerical failure, 3 tolerance failure (oracle).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .dephasing import ModelParams, TimeGrid
from .errors import (
    ConsistencyError,
    IntegrationDriftError,
    QuadratureError,
    ValidationError,
)
from .linops import check_density_matrix
from .oracle import (
    FiniteBathEvolution,
    FiniteBathSpec,
    discretize_spectral_density,
    global_quantities_from_joint,
    joint_coherence_factor,
    mode_interaction_energy,
)
from .spectral import SpectralDensity, Temperature
from .thermo import CONVENTIONS, TRACE_COLUMNS, ThermoTrace, dephasing_thermo_trace

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_TOLERANCE = 3

_NUMERICAL_ERRORS = (QuadratureError, IntegrationDriftError, ConsistencyError)


@dataclass(frozen=True)
class ScenarioConfig:
    """Flat scenario description; defaults reproduce the reference run."""

    omega0: float = 1.0
    alpha: float = 1.0
    cutoff: float = 1.0
    beta: float = 1.0
    rho11_0: float = 0.75
    rho01_re: float = 0.25
    rho01_im: float = 0.0
    t_max: float = 20.0
    dt: float = 0.01
    conventions: tuple = CONVENTIONS
    cutoff_sweep: tuple = (0.5, 1.0, 2.0)
    # finite-bath comparison settings
    bath_modes: int = 2
    n_max: int = 8
    omega_max: float | None = None
    oracle_tol: float = 1e-6

    def __post_init__(self):
        if not 0.0 <= self.rho11_0 <= 1.0:
            raise ValidationError(f"rho11_0 must lie in [0, 1], got {self.rho11_0}")
        if not (self.t_max > 0 and self.dt > 0):
            raise ValidationError("t_max and dt must be positive")
        bad = [c for c in self.conventions if c not in CONVENTIONS]
        if bad:
            raise ValidationError(f"unknown conventions {bad}; choose from {CONVENTIONS}")
        check_density_matrix(self.initial_state())

    def initial_state(self) -> np.ndarray:
        c = self.rho01_re + 1j * self.rho01_im
        return np.array(
            [[1.0 - self.rho11_0, c], [np.conj(c), self.rho11_0]], dtype=complex
        )

    def model(self, cutoff: float | None = None) -> ModelParams:
        return ModelParams(
            omega0=self.omega0,
            density=SpectralDensity.ohmic(self.alpha, cutoff or self.cutoff),
            temperature=Temperature.finite(self.beta),
        )

    def grid(self) -> TimeGrid:
        return TimeGrid(t_end=self.t_max, step=self.dt)


_FLOAT_KEYS = {
    "omega0", "alpha", "cutoff", "beta", "rho11_0", "rho01_re", "rho01_im",
    "t_max", "dt", "omega_max", "oracle_tol",
}
_INT_KEYS = {"bath_modes", "n_max"}
_LIST_KEYS = {"conventions", "cutoff_sweep"}


def parse_config_text(text: str) -> dict:
    """Parse the flat ``key = value`` grammar (# comments, blank lines)."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValidationError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if not key or not value:
            raise ValidationError(f"line {lineno}: empty key or value in {line!r}")
        raw[key] = value
    return raw


def _convert(key: str, value: str):
    try:
        if key in _FLOAT_KEYS:
            return float(value)
        if key in _INT_KEYS:
            return int(value)
        if key in _LIST_KEYS:
            items = [item.strip() for item in value.split(",") if item.strip()]
            if key == "cutoff_sweep":
                return tuple(float(item) for item in items)
            return tuple(items)
    except ValueError as exc:
        raise ValidationError(f"config key {key!r}: cannot parse {value!r}") from exc
    raise ValidationError(f"unknown config key {key!r}")


def load_config(path: str | None, overrides: dict | None = None) -> ScenarioConfig:
    raw = {}
    if path is not None:
        raw.update(parse_config_text(Path(path).read_text(encoding="utf-8")))
    raw.update(overrides or {})
    values = {key: _convert(key, value) for key, value in raw.items()}
    known = {f.name for f in fields(ScenarioConfig)}
    unknown = set(values) - known
    if unknown:  # unreachable after _convert, kept as a guard
        raise ValidationError(f"unknown config keys {sorted(unknown)}")
    return ScenarioConfig(**values)


def _format(value: float) -> str:
    return f"{value:.17g}"


def write_trace_csv(trace: ThermoTrace, path, cutoff: float | None = None) -> None:
    """Write a trace in the canonical column order, 17 significant digits.

    Figure CSVs carry the sweep value in a trailing ``cutoff`` column;
    plain runs omit it. Appending to an existing file skips the header so
    sweeps can share one file.
    """
    path = Path(path)
    header = ",".join(TRACE_COLUMNS) + (",cutoff" if cutoff is not None else "")
    new_file = not path.exists() or path.stat().st_size == 0
    with open(path, "a", encoding="utf-8", newline="") as fh:
        if new_file:
            fh.write(header + "\n")
        for i in range(len(trace)):
            row = [_format(float(trace.column(c)[i])) for c in TRACE_COLUMNS]
            if cutoff is not None:
                row.append(_format(cutoff))
            fh.write(",".join(row) + "\n")


def run_scenario(config: ScenarioConfig, cutoff: float | None = None) -> ThermoTrace:
    """Evolve the model for a config and return the validated trace."""
    trace = dephasing_thermo_trace(
        config.model(cutoff),
        config.initial_state(),
        config.grid(),
        conventions=config.conventions,
    )
    trace.validate()
    return trace


def reproduce_figure(which: str, out_dir, config: ScenarioConfig | None = None) -> list:
    """Write the data and SVG for one of the two report figures.

    ``fig1`` sweeps the cutoff and compares local with global entropy
    production; ``fig2`` shows the first-law quantities per convention.
    Returns the list of written paths.
    """
    from . import figures

    if which not in ("fig1", "fig2"):
        raise ValidationError(f"unknown figure {which!r}; choose fig1 or fig2")
    config = config or ScenarioConfig()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{which}.csv"
    svg_path = out_dir / f"{which}.svg"
    if csv_path.exists():
        csv_path.unlink()

    if which == "fig1":
        traces = []
        for cutoff in config.cutoff_sweep:
            trace = run_scenario(config, cutoff=cutoff)
            write_trace_csv(trace, csv_path, cutoff=cutoff)
            traces.append((cutoff, trace))
        figures.render_entropy_production(traces, svg_path)
    else:
        trace = run_scenario(config)
        write_trace_csv(trace, csv_path, cutoff=config.cutoff)
        figures.render_first_law(trace, svg_path)
    return [csv_path, svg_path]


ORACLE_COLUMNS = (
    "t",
    "coh_analytic", "coh_exact",
    "hint_analytic", "hint_exact",
    "qgl_analytic", "qgl_exact",
    "sigmagl_analytic", "sigmagl_exact", "sigmagl_relent",
)


@dataclass
class OracleReport:
    columns: dict
    deviations: dict
    tolerance: float

    @property
    def passed(self) -> bool:
        return all(v <= self.tolerance for v in self.deviations.values())


def oracle_run(config: ScenarioConfig) -> OracleReport:
    """Compare exact finite-bath evolution against the mode-sum closed forms.

    The bath is the Gauss-Legendre discretization of the configured Ohmic
    profile. Analytic columns use the truncation-free mode sums (with the
    joint-model coherence exponent 2 eta_K); exact columns come from full
    diagonalization on the truncated Fock space.
    """
    omega_max = config.omega_max if config.omega_max is not None else 30.0 * config.cutoff
    modes = discretize_spectral_density(
        SpectralDensity.ohmic(config.alpha, config.cutoff),
        config.bath_modes,
        omega_max,
    )
    spec = FiniteBathSpec(modes=tuple(modes), n_max=config.n_max, beta=config.beta)
    rho0 = config.initial_state()
    evolution = FiniteBathEvolution(spec, rho0, omega0=config.omega0)
    ts = config.grid().times

    joint_traj = [(t, evolution.state(t)) for t in ts]
    # route agreement is reported as a deviation (exit code 3), not raised
    thermo = global_quantities_from_joint(
        joint_traj, spec, evolution.operators, agree_tol=float("inf")
    )

    coh_exact = np.array(
        [abs(evolution.reduced_state(t)[0, 1]) for t in ts]
    )
    coh_analytic = abs(rho0[0, 1]) * joint_coherence_factor(spec, ts)
    hint_analytic = mode_interaction_energy(spec.modes, ts)
    qgl_analytic = hint_analytic - hint_analytic[0]

    p11 = float(rho0[1, 1].real)
    radius = np.sqrt((p11 - 0.5) ** 2 + coh_analytic**2)
    lam = np.clip(np.stack([0.5 - radius, 0.5 + radius]), 1e-300, None)
    s_analytic = -(lam * np.log(lam)).sum(axis=0)
    sigmagl_analytic = (s_analytic - s_analytic[0]) - spec.beta * qgl_analytic

    columns = {
        "t": ts,
        "coh_analytic": coh_analytic,
        "coh_exact": coh_exact,
        "hint_analytic": hint_analytic,
        "hint_exact": thermo.interaction,
        "qgl_analytic": qgl_analytic,
        "qgl_exact": thermo.q_gl,
        "sigmagl_analytic": sigmagl_analytic,
        "sigmagl_exact": thermo.sigma_gl,
        "sigmagl_relent": thermo.sigma_gl_relent,
    }
    deviations = {
        "coherence": float(np.max(np.abs(coh_analytic - coh_exact))),
        "interaction_energy": float(np.max(np.abs(hint_analytic - thermo.interaction))),
        "heat": float(np.max(np.abs(qgl_analytic - thermo.q_gl))),
        "entropy_production": float(
            np.max(np.abs(sigmagl_analytic - thermo.sigma_gl))
        ),
        "clausius_vs_relative_entropy": float(
            np.max(np.abs(thermo.sigma_gl - thermo.sigma_gl_relent))
        ),
    }
    return OracleReport(columns=columns, deviations=deviations, tolerance=config.oracle_tol)


def write_oracle_csv(report: OracleReport, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(ORACLE_COLUMNS) + "\n")
        n = len(report.columns["t"])
        for i in range(n):
            fh.write(
                ",".join(_format(float(report.columns[c][i])) for c in ORACLE_COLUMNS)
                + "\n"
            )


def _parse_overrides(pairs) -> dict:
    overrides = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise ValidationError(f"--set expects key=value, got {pair!r}")
        key, value = pair.split("=", 1)
        overrides[key.strip()] = value.strip()
    return overrides


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="decotherm",
        description="Thermodynamics of a qubit dephasing into a bosonic bath.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    evolve = sub.add_parser("evolve", help="run a scenario and write the trace CSV")
    evolve.add_argument("--config", required=True, help="key = value config file")
    evolve.add_argument("--out", required=True, help="output CSV path")
    evolve.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config key")

    figs = sub.add_parser("figures", help="reproduce a report figure (CSV + SVG)")
    figs.add_argument("which", choices=("fig1", "fig2"))
    figs.add_argument("--out", required=True, help="output directory")
    figs.add_argument("--config", help="optional config file")
    figs.add_argument("--set", action="append", metavar="KEY=VALUE")

    oracle = sub.add_parser("oracle", help="finite-bath comparison report")
    oracle.add_argument("--config", required=True)
    oracle.add_argument("--out", required=True, help="output CSV path")
    oracle.add_argument("--set", action="append", metavar="KEY=VALUE")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        overrides = _parse_overrides(getattr(args, "set", None))
        config = load_config(getattr(args, "config", None), overrides)
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    try:
        if args.command == "evolve":
            trace = run_scenario(config)
            out = Path(args.out)
            if out.exists():
                out.unlink()
            write_trace_csv(trace, out)
            print(f"wrote {out} ({len(trace)} rows)")
            return EXIT_OK
        if args.command == "figures":
            paths = reproduce_figure(args.which, args.out, config)
            for p in paths:
                print(f"wrote {p}")
            return EXIT_OK
        # oracle
        report = oracle_run(config)
        write_oracle_csv(report, args.out)
        print(f"wrote {args.out}")
        for name, value in report.deviations.items():
            status = "pass" if value <= report.tolerance else "FAIL"
            print(f"  {name:<28s} max deviation {value:.3e}  [{status}]")
        if not report.passed:
            print(f"tolerance {report.tolerance:.1e} exceeded", file=sys.stderr)
            return EXIT_TOLERANCE
        print(f"all deviations within {report.tolerance:.1e}")
        return EXIT_OK
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
