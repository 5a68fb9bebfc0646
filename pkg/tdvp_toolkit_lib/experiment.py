"""Experiment configuration and orchestration of exact, Gaussified and TDVP runs.

A configuration is INI-like text with the sections [model], [run] and
[output], e.g.

  [model]
  type = hubbard
  L = 4
  u = 4.0
  mu = -2.0

  [run]
  mode = compare
  t_final = 20.0
"""

import argparse
import configparser
import dataclasses
import os
import platform
import re
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np
import scipy

from tdvp_toolkit_lib import __version__
from tdvp_toolkit_lib import config
from tdvp_toolkit_lib import fock
from tdvp_toolkit_lib import gaussian
from tdvp_toolkit_lib import gaussified
from tdvp_toolkit_lib import hubbard
from tdvp_toolkit_lib import inout
from tdvp_toolkit_lib import integrate
from tdvp_toolkit_lib import lindblad
from tdvp_toolkit_lib import metrics
from tdvp_toolkit_lib import misc
from tdvp_toolkit_lib import sampling
from tdvp_toolkit_lib import tdvp
from tdvp_toolkit_lib import verification


logger = misc.get_logger(__name__)

MODES = ("exact", "gaussified", "tdvp", "compare", "verify-theorem1")
MODEL_TYPES = ("hubbard", "file", "random")
INITIAL_STATES = ("ground", "polarized")
CHARTS = ("gaussian", "full")
NORMS = ("frobenius", "spectral")

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_ABORT = 3

TRAJECTORY_COLUMNS = ["t", "n_up", "n_down", "purity", "C1", "m_s"]
COMPARE_COLUMNS = TRAJECTORY_COLUMNS + ["dGamma", "dRho"]


def _parse_alpha_list(s):
    alphas = [float(a) for a in s.split(",") if a.strip()]
    if not alphas:
        raise ValueError("empty alpha list")
    for a in alphas:
        if not 0.0 <= a <= 1.0:
            raise ValueError("alpha {} outside [0, 1]".format(a))
    return alphas


def _parse_bool(s):
    states = configparser.ConfigParser.BOOLEAN_STATES
    if s.lower() not in states:
        raise ValueError("not a boolean: {!r}".format(s))
    return states[s.lower()]


# Section -> key -> (parser, ExperimentConfig field).
SCHEMA = {
    "model": {
        "type": (str, "model_type"),
        "L": (int, "L"),
        "J": (float, "J"),
        "u": (float, "u"),
        "mu": (float, "mu"),
        "kappa": (float, "kappa"),
        "periodic": (_parse_bool, "periodic"),
        "path": (str, "spec_path"),
        "n_modes": (int, "n_modes"),
        "initial": (str, "initial"),
    },
    "run": {
        "mode": (str, "mode"),
        "t_final": (float, "t_final"),
        "dt": (float, "dt"),
        "sample_interval": (float, "sample_interval"),
        "alpha": (_parse_alpha_list, "alphas"),
        "seed": (int, "seed"),
        "cases": (int, "cases"),
        "chart": (str, "chart"),
        "norm": (str, "norm"),
    },
    "output": {
        "directory": (str, "output_dir"),
        "format": (str, "output_format"),
    },
}
REQUIRED_KEYS = [("model", "type"), ("run", "mode")]


@dataclass
class ExperimentConfig:
    mode: str
    model_type: str = "hubbard"
    # Hubbard model.
    L: int = 4
    J: float = 1.0
    u: float = 4.0
    mu: float = -2.0
    kappa: float = 1.0
    periodic: bool = True
    # Generic spec file (model type 'file') and random model size.
    spec_path: Optional[str] = None
    n_modes: Optional[int] = None
    initial: str = "ground"
    # Run.
    t_final: float = config.default_t_final
    dt: float = config.default_dt
    sample_interval: float = config.default_sample_interval
    alphas: List[float] = field(default_factory=lambda: [0.5])
    seed: int = 0
    cases: int = 50
    chart: str = "gaussian"
    norm: str = config.default_norm
    # Output.
    output_dir: str = config.output_path
    output_format: str = config.default_output_format

    def hubbard_params(self):
        return hubbard.HubbardParams(
            L=self.L, J=self.J, u=self.u, mu=self.mu, kappa=self.kappa, periodic=self.periodic
        )


def validate_config(cfg: ExperimentConfig, lines=None):
    """Checks the invariants of a configuration.

    :param cfg: ExperimentConfig.
    :param lines: Optional dict {(section, key): line number} for messages.
    :return: cfg.
    """
    lines = lines or {}

    def fail(section, key, msg):
        raise misc.ConfigError("[{}] {}: {}".format(section, key, msg), lines.get((section, key)))

    if cfg.mode not in MODES:
        fail("run", "mode", "unknown mode {!r}, options: {}".format(cfg.mode, ", ".join(MODES)))
    if cfg.model_type not in MODEL_TYPES:
        fail("model", "type", "unknown model type {!r}".format(cfg.model_type))
    if cfg.initial not in INITIAL_STATES:
        fail("model", "initial", "unknown initial state {!r}".format(cfg.initial))
    if cfg.chart not in CHARTS:
        fail("run", "chart", "unknown chart {!r}".format(cfg.chart))
    if cfg.norm not in NORMS:
        fail("run", "norm", "unknown norm {!r}".format(cfg.norm))
    if cfg.output_format not in inout.OUTPUT_FORMATS:
        fail("output", "format", "unknown format {!r}".format(cfg.output_format))
    if not cfg.t_final > 0:
        fail("run", "t_final", "must be positive")
    if not cfg.dt > 0:
        fail("run", "dt", "must be positive")
    if not cfg.sample_interval >= cfg.dt:
        fail("run", "sample_interval", "must be at least dt")
    if cfg.t_final > 0 and cfg.sample_interval >= cfg.dt > 0:
        try:
            integrate.sample_grid(cfg.t_final, cfg.dt, cfg.sample_interval)
        except ValueError as e:
            fail("run", "sample_interval", str(e))
    if cfg.cases < 1:
        fail("run", "cases", "must be positive")
    if cfg.L < 2:
        fail("model", "L", "must be at least 2")
    if not cfg.kappa >= 0:
        fail("model", "kappa", "must be nonnegative")
    for a in cfg.alphas:
        if not 0.0 <= a <= 1.0:
            fail("run", "alpha", "alpha {} outside [0, 1]".format(a))
    if cfg.initial == "polarized" and cfg.model_type != "hubbard":
        fail("model", "initial", "the polarized state is defined for the hubbard model only")
    if cfg.model_type == "file" and not cfg.spec_path:
        fail("model", "path", "required for model type 'file'")
    if cfg.model_type == "random" and cfg.mode != "verify-theorem1" and not cfg.n_modes:
        fail("model", "n_modes", "required for model type 'random'")
    if cfg.n_modes is not None and cfg.n_modes < 1:
        fail("model", "n_modes", "must be positive")
    return cfg


def _key_lines(text):
    """Maps (section, key) to the line number of its definition; key None is the header."""
    lines = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        m = re.match(r"^\s*\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip()
            lines.setdefault((section, None), lineno)
            continue
        m = re.match(r"^\s*([^=:#;\s][^=:]*?)\s*[=:]", line)
        if m and section is not None:
            lines.setdefault((section, m.group(1)), lineno)
    return lines


def parse_config(text):
    """Parses an experiment configuration.

    :param text: INI-like text with [model], [run] and [output] sections.
    :return: ExperimentConfig with defaults filled in.
    """
    parser = configparser.ConfigParser(strict=True, interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.DuplicateOptionError as e:
        raise misc.ConfigError(
            "duplicate key {!r} in section [{}]".format(e.option, e.section), e.lineno
        )
    except configparser.DuplicateSectionError as e:
        raise misc.ConfigError("duplicate section [{}]".format(e.section), e.lineno)
    except configparser.MissingSectionHeaderError as e:
        raise misc.ConfigError("missing section header", e.lineno)
    except configparser.ParsingError as e:
        lineno = e.errors[0][0] if e.errors else None
        raise misc.ConfigError("malformed line", lineno)

    lines = _key_lines(text)
    values = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise misc.ConfigError("unknown section [{}]".format(section), lines.get((section, None)))
        for key, raw in parser.items(section):
            lineno = lines.get((section, key))
            if key not in SCHEMA[section]:
                raise misc.ConfigError("unknown key {!r} in section [{}]".format(key, section), lineno)
            conv, name = SCHEMA[section][key]
            try:
                values[name] = conv(raw.strip())
            except ValueError as e:
                raise misc.ConfigError(
                    "[{}] {}: invalid value {!r} ({})".format(section, key, raw, e), lineno
                )

    for section, key in REQUIRED_KEYS:
        if not parser.has_option(section, key):
            raise misc.ConfigError("missing required key [{}] {}".format(section, key))
    return validate_config(ExperimentConfig(**values), lines)


def serialize_config(cfg: ExperimentConfig):
    """Writes a configuration as text accepted by parse_config."""
    by_field = {}
    for section, keys in SCHEMA.items():
        for key, (_, name) in keys.items():
            by_field[name] = (section, key)

    out = {"model": [], "run": [], "output": []}
    for f in dataclasses.fields(cfg):
        value = getattr(cfg, f.name)
        if value is None:
            continue
        section, key = by_field[f.name]
        if isinstance(value, bool):
            s = "true" if value else "false"
        elif isinstance(value, float):
            s = repr(value)
        elif isinstance(value, list):
            s = ", ".join(repr(float(a)) for a in value)
        else:
            s = str(value)
        out[section].append("{} = {}".format(key, s))
    return "\n".join(
        "[{}]\n{}\n".format(section, "\n".join(entries)) for section, entries in out.items()
    )


def load_config(path):
    """Reads and parses a configuration file (a missing file is a ConfigError)."""
    if not os.path.exists(path):
        raise misc.ConfigError("configuration file not found: {}".format(path))
    with open(path, "r") as f:
        return parse_config(f.read())


class _Model:
    """Spec and initial state resolved from a configuration."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.params = None
        self.occupied = None
        self.periodic = True
        if cfg.model_type == "hubbard":
            self.params = cfg.hubbard_params()
            self.periodic = self.params.periodic
            self.spec = hubbard.build_hubbard(self.params)
        elif cfg.model_type == "file":
            if not os.path.exists(cfg.spec_path):
                raise misc.ConfigError("spec file not found: {}".format(cfg.spec_path))
            try:
                self.spec, self.occupied = inout.load_spec_file(cfg.spec_path)
            except (ValueError, AssertionError) as e:
                if isinstance(e, misc.ConfigError):
                    raise
                raise misc.ConfigError("spec file {}: {}".format(cfg.spec_path, e))
        else:
            self.spec = sampling.random_spec(cfg.n_modes, sampling.get_rng(cfg.seed))
        self.n_modes = self.spec.n_modes

    def initial_state(self):
        cfg = self.cfg
        if self.occupied is not None:
            return fock.basis_state_projector(self.n_modes, self.occupied)
        if cfg.model_type == "random":
            return sampling.random_density_matrix(2**self.n_modes, sampling.get_rng(cfg.seed + 1))
        if cfg.initial == "polarized":
            return hubbard.polarized_state(self.params.L)
        # Ground state of the closed system.
        return fock.ground_state(self.spec.hamiltonian_matrix())

    def moment_equations(self):
        """Compiled covariance dynamics; unsupported operator degrees are config errors."""
        try:
            return gaussified.moment_equations(self.spec)
        except ValueError as e:
            raise misc.ConfigError("model not supported by the covariance dynamics: {}".format(e))

    def initial_covariance(self):
        if self.occupied is None and self.cfg.model_type == "hubbard" and self.cfg.initial == "polarized":
            return hubbard.polarized_covariance(self.params.L)
        return gaussian.gaussify(self.initial_state())


def _spin_columns(state, periodic=True):
    if hubbard.is_covariance(state):
        n_modes = state.shape[0] // 2
    else:
        n_modes = fock.n_modes_from_dim(state.shape[0])
    if n_modes % 2 == 1:
        return {"n_up": np.nan, "n_down": np.nan, "C1": np.nan, "m_s": np.nan}
    occ = hubbard.occupations(state)
    order = hubbard.spin_order(state, periodic=periodic)
    return {"n_up": occ.n_up, "n_down": occ.n_down, "C1": order.c1, "m_s": order.m_s}


def _diagnostics(t, state, periodic=True):
    """Trajectory row of a dense density matrix or a covariance matrix."""
    if hubbard.is_covariance(state):
        purity = gaussian.purity_from_cm(state)
    else:
        purity = fock.purity(state)
    row = {"t": t, "purity": purity}
    row.update(_spin_columns(state, periodic))
    return row


def _integration_args(cfg):
    return dict(t_final=cfg.t_final, dt=cfg.dt, sample_interval=cfg.sample_interval)


def _run_exact(cfg, model, out_dir, files):
    path = out_dir / ("exact" + inout.trajectory_extension(cfg.output_format))
    with inout.TrajectoryWriter(path, TRAJECTORY_COLUMNS, cfg.output_format) as w:
        lindblad.integrate_exact(
            model.spec,
            model.initial_state(),
            on_sample=lambda t, rho: w.write_row(_diagnostics(t, rho, model.periodic)),
            keep_states=False,
            **_integration_args(cfg),
        )
    files.append(path.name)


def _run_gaussified(cfg, model, out_dir, files, keep_states=False):
    path = out_dir / ("gaussified" + inout.trajectory_extension(cfg.output_format))
    with inout.TrajectoryWriter(path, TRAJECTORY_COLUMNS, cfg.output_format) as w:
        traj = gaussified.integrate_gaussified(
            model.initial_covariance(),
            model.spec,
            on_sample=lambda t, G: w.write_row(_diagnostics(t, G, model.periodic)),
            keep_states=keep_states,
            **_integration_args(cfg),
        )
    files.append(path.name)
    return traj


def _run_compare(cfg, model, out_dir, files):
    """Gaussified run first (states kept), then the exact run streamed against it."""
    cm_traj = _run_gaussified(cfg, model, out_dir, files, keep_states=True)
    ext = inout.trajectory_extension(cfg.output_format)
    exact_path = out_dir / ("exact" + ext)
    compare_path = out_dir / ("compare" + ext)
    n_done = [0]

    with inout.TrajectoryWriter(exact_path, TRAJECTORY_COLUMNS, cfg.output_format) as w_exact, \
            inout.TrajectoryWriter(compare_path, COMPARE_COLUMNS, cfg.output_format) as w_cmp:

        def on_sample(t, rho):
            i = n_done[0]
            if abs(cm_traj.times[i] - t) > 1e-9:
                raise misc.NumericalAbort("compare: sample times differ at t={:.6f}".format(t))
            row = _diagnostics(t, rho, model.periodic)
            w_exact.write_row(row)
            row["dGamma"], row["dRho"] = gaussified.compare_states(rho, cm_traj.states[i], cfg.norm)
            w_cmp.write_row(row)
            n_done[0] += 1

        lindblad.integrate_exact(
            model.spec, model.initial_state(), on_sample=on_sample, keep_states=False,
            **_integration_args(cfg)
        )
    files.extend([exact_path.name, compare_path.name])
    return cm_traj


def _run_tdvp(cfg, model, out_dir, files):
    """One TDVP trajectory per alpha of the configuration."""
    if cfg.chart == "gaussian":
        chart = tdvp.GaussianChart(model.n_modes)
        x0 = chart.coordinates(model.initial_covariance())
        to_state = chart.covariance
    else:
        chart = tdvp.FullDensityChart(2**model.n_modes)
        x0 = chart.coordinates(model.initial_state())
        to_state = chart.state

    for alpha in cfg.alphas:
        metric = metrics.AlphaMetric.single(alpha)
        name = misc.get_run_signature("tdvp", alpha=alpha)
        path = out_dir / (name + inout.trajectory_extension(cfg.output_format))
        with inout.TrajectoryWriter(path, TRAJECTORY_COLUMNS, cfg.output_format) as w:
            tdvp.integrate_tdvp(
                chart,
                x0,
                metric,
                model.spec,
                on_sample=lambda t, x: w.write_row(_diagnostics(t, to_state(x), model.periodic)),
                keep_states=False,
                **_integration_args(cfg),
            )
        files.append(path.name)


def _run_verify(cfg, out_dir, files):
    n_modes = cfg.n_modes if cfg.n_modes else 3
    alphas = tuple(sorted(set(verification.DEFAULT_ALPHAS) | set(cfg.alphas)))
    report = verification.metric_independence_report(
        cfg.seed, n_modes_list=(n_modes,), cases=cfg.cases, alphas=alphas
    )
    report["tangent_dimension"] = verification.tangent_dimension_report(
        (n_modes,), seed=cfg.seed
    )
    report["passed"] = report["passed"] and report["tangent_dimension"]["passed"]
    inout.save_json(out_dir / "verify_theorem1.json", report)
    files.append("verify_theorem1.json")
    return report


def run(cfg: ExperimentConfig):
    """Runs an experiment and writes its trajectory files and manifest.

    :param cfg: ExperimentConfig.
    :return: Exit status (0 success, 1 failed verification, 2 configuration
      error, 3 numerical abort).
    """
    t_start = time.time()
    out_dir = Path(cfg.output_dir)
    files = []
    manifest = {
        "config": serialize_config(cfg),
        "mode": cfg.mode,
        "seed": cfg.seed,
        "versions": {
            "tdvp_toolkit": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "started": misc.utc_timestamp(),
    }

    status = EXIT_OK
    try:
        validate_config(cfg)
        misc.ensure_dir(str(out_dir))
        if cfg.mode == "verify-theorem1":
            report = _run_verify(cfg, out_dir, files)
            manifest["verification_passed"] = report["passed"]
            if not report["passed"]:
                status = EXIT_VERIFICATION_FAILED
        else:
            model = _Model(cfg)
            manifest["n_modes"] = model.n_modes
            if cfg.model_type == "hubbard" and cfg.kappa == 0:
                manifest["time_unit"] = "1/J"
                manifest["note"] = "kappa = 0: time in units of the inverse hopping"
            else:
                manifest["time_unit"] = "1/kappa"
            if cfg.mode in ("gaussified", "compare"):
                model.moment_equations()
            if cfg.mode == "exact":
                _run_exact(cfg, model, out_dir, files)
            elif cfg.mode == "gaussified":
                traj = _run_gaussified(cfg, model, out_dir, files)
                manifest["clip_events"] = traj.info.get("clip_events", 0)
            elif cfg.mode == "compare":
                traj = _run_compare(cfg, model, out_dir, files)
                manifest["clip_events"] = traj.info.get("clip_events", 0)
            else:
                _run_tdvp(cfg, model, out_dir, files)
    except (misc.ConfigError, misc.DenseCapError) as e:
        logger.error("Configuration error: {}".format(e))
        manifest["error"] = str(e)
        status = EXIT_CONFIG_ERROR
    except (misc.NumericalAbort, misc.DegenerateGroundStateError) as e:
        logger.error("Numerical abort: {}".format(e))
        manifest["error"] = str(e)
        status = EXIT_NUMERICAL_ABORT

    manifest["files"] = files
    manifest["exit_status"] = status
    manifest["wall_time_seconds"] = time.time() - t_start
    if os.path.isdir(out_dir):
        inout.save_json(out_dir / "manifest.json", manifest)
    misc.log("Run '{}' finished with status {}".format(cfg.mode, status))
    return status


def get_parser(defaults=None):
    """Command-line parser: subcommand = mode, plus overrides of the config."""
    defaults = defaults or {}
    parser = argparse.ArgumentParser(description="Exact, Gaussified and TDVP Lindblad dynamics.")
    parser.add_argument("mode", choices=MODES)
    parser.add_argument("--config", default=defaults.get("config"), help="Experiment config file")
    parser.add_argument("--out", default=defaults.get("out"), help="Output directory")
    parser.add_argument("--seed", default=defaults.get("seed"), type=int)
    parser.add_argument("--alpha", default=defaults.get("alpha"), help="Comma-separated list in [0, 1]")
    parser.add_argument("--dt", default=defaults.get("dt"), type=float)
    parser.add_argument("--t-final", dest="t_final", default=defaults.get("t_final"), type=float)
    return parser


def config_from_params(p):
    """ExperimentConfig from the config file in p["config"] and the overrides in p."""
    if p.get("config"):
        cfg = load_config(p["config"])
    else:
        cfg = parse_config("[model]\ntype = hubbard\n[run]\nmode = {}\n".format(p["mode"]))
    cfg.mode = p["mode"]
    if p.get("out") is not None:
        cfg.output_dir = p["out"]
    if p.get("seed") is not None:
        cfg.seed = int(p["seed"])
    if p.get("alpha") is not None:
        try:
            cfg.alphas = _parse_alpha_list(p["alpha"])
        except ValueError as e:
            raise misc.ConfigError("--alpha: {}".format(e))
    if p.get("dt") is not None:
        cfg.dt = float(p["dt"])
    if p.get("t_final") is not None:
        cfg.t_final = float(p["t_final"])
    return validate_config(cfg)


def run_params(p):
    """Builds the configuration from parameters and runs it; returns the exit status."""
    try:
        cfg = config_from_params(p)
    except misc.ConfigError as e:
        logger.error("Configuration error: {}".format(e))
        return EXIT_CONFIG_ERROR
    return run(cfg)


def main(argv=None):
    args = get_parser().parse_args(argv)
    return run_params(vars(args))
