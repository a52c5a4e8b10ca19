"""Run configuration: flat INI-style key-value sections with defaults.

One file describes one run.  Every key can be overridden from the
environment with QMHD2D_<SECTION>__<KEY> (uppercase), e.g.
QMHD2D_SOLVER__DT=1e-3.  Unknown sections or keys are rejected so typos
fail loudly.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass

from .approximation import RegularizationParams, SolverOptions
from .constitutive import ConstitutiveParams, ResistivityProfile
from .errors import ConfigError

__all__ = ["ICSpec", "RunConfig", "parse_config", "config_from_dict",
           "config_to_dict", "ENV_PREFIX"]

ENV_PREFIX = "QMHD2D_"

IC_KINDS = ("constant", "smooth-random", "density-bump", "orszag-tang-like")

# section -> key -> (type tag, default); None defaults are filled afterwards
SCHEMA: dict[str, dict[str, tuple[str, object]]] = {
    "grid": {"nx": ("int", 64), "ny": ("int", 0)},  # ny = 0 means "same as nx"
    "constitutive": {
        "gamma": ("float", 2.0), "gamma_minus": ("float", 5.0),
        "c1": ("float", 0.1), "c2": ("float", 0.1), "mu0": ("float", 0.1),
        "alpha": ("float", 0.5), "hbar": ("float", 0.05),
    },
    "resistivity": {
        "d0": ("float", 0.05), "d0p": ("float", 0.2),
        "d1": ("float", 0.05), "d1p": ("float", 0.2),
        "a": ("float", 2.0), "ap": ("float", 2.5), "b": ("float", 1.0),
        "b_thr": ("float", 1.0),
    },
    "regularization": {
        "epsilon": ("float", 0.0), "lambda_reg": ("float", 0.0),
        "s": ("int", 1), "n_modes": ("int", 64),
    },
    "solver": {
        "dt": ("float", 1e-3), "t_end": ("float", 1.0),
        "integrator": ("str", "rk4"), "fp_tol": ("float", 1e-10),
        "fp_max_iters": ("int", 50), "density_floor": ("float", 1e-6),
    },
    "ic": {
        "kind": ("str", "smooth-random"), "amplitude": ("float", 0.1),
        "decay": ("float", 1.0), "mean_density": ("float", 1.0),
        "mean_bx": ("float", 0.0), "mean_by": ("float", 0.0),
        "seed": ("int", 1234),
    },
    "output": {
        "directory": ("str", "out"), "cadence": ("int", 10),
        "store_fields": ("bool", False), "checkpoint_every": ("int", 0),
        "include_bd": ("bool", True),
        "density_lower_bound_audit": ("bool", False),
    },
}


@dataclass(frozen=True)
class ICSpec:
    """Initial-condition family: kind plus its amplitude, spectral decay
    rate, mean density, mean magnetic field and RNG seed."""

    kind: str = "smooth-random"
    amplitude: float = 0.1
    decay: float = 1.0
    mean_density: float = 1.0
    mean_bx: float = 0.0
    mean_by: float = 0.0
    seed: int = 1234

    def __post_init__(self):
        if self.kind not in IC_KINDS:
            raise ValueError(f"ic kind must be one of {IC_KINDS}")
        if self.mean_density <= 0:
            raise ValueError("mean density must be > 0")
        if self.amplitude < 0:
            raise ValueError("ic amplitude must be >= 0")


@dataclass(frozen=True)
class RunConfig:
    nx: int
    ny: int
    cparams: ConstitutiveParams
    reg: RegularizationParams
    solver: SolverOptions
    ic: ICSpec
    output_dir: str
    cadence: int
    store_fields: bool
    checkpoint_every: int
    include_bd: bool
    density_lower_bound_audit: bool


def _parse_bool(raw, where):
    val = raw.strip().lower()
    if val in ("1", "true", "yes", "on"):
        return True
    if val in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{where}: expected a boolean, got {raw!r}")


def _coerce(tag, raw, where):
    try:
        if tag == "int":
            return int(raw)
        if tag == "float":
            return float(raw)
        if tag == "bool":
            return _parse_bool(str(raw), where) if isinstance(raw, str) else bool(raw)
        return str(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _flat_defaults() -> dict[str, dict[str, object]]:
    return {sec: {k: d for k, (_, d) in keys.items()} for sec, keys in SCHEMA.items()}


def _apply_env(values):
    for env_key, raw in os.environ.items():
        if not env_key.startswith(ENV_PREFIX):
            continue
        rest = env_key[len(ENV_PREFIX):]
        if "__" not in rest:
            continue
        sec, key = rest.lower().split("__", 1)
        if sec in SCHEMA and key in SCHEMA[sec]:
            tag = SCHEMA[sec][key][0]
            values[sec][key] = _coerce(tag, raw, f"env {env_key}")


def parse_config(path) -> RunConfig:
    """Read, override from the environment, validate, and build a RunConfig.

    Raises ConfigError with file/line information on malformed input.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh, source=str(path))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc

    values = _flat_defaults()
    for sec in parser.sections():
        if sec not in SCHEMA:
            raise ConfigError(f"{path}: unknown section [{sec}]")
        for key, raw in parser.items(sec):
            if key not in SCHEMA[sec]:
                raise ConfigError(f"{path}: unknown key {sec}.{key}")
            values[sec][key] = _coerce(SCHEMA[sec][key][0], raw,
                                       f"{path}: {sec}.{key}")
    _apply_env(values)
    return config_from_dict(values)


def config_from_dict(values: dict) -> RunConfig:
    """Build a validated RunConfig from a nested {section: {key: value}} dict
    (missing entries take their defaults)."""
    full = _flat_defaults()
    for sec, keys in values.items():
        if sec not in full:
            raise ConfigError(f"unknown section [{sec}]")
        for key, val in keys.items():
            if key not in full[sec]:
                raise ConfigError(f"unknown key {sec}.{key}")
            full[sec][key] = _coerce(SCHEMA[sec][key][0], val, f"{sec}.{key}")

    g = full["grid"]
    nx = g["nx"]
    ny = g["ny"] or nx
    try:
        prof = ResistivityProfile(
            d0=full["resistivity"]["d0"], d0p=full["resistivity"]["d0p"],
            d1=full["resistivity"]["d1"], d1p=full["resistivity"]["d1p"],
            a=full["resistivity"]["a"], ap=full["resistivity"]["ap"],
            b=full["resistivity"]["b"], B_thr=full["resistivity"]["b_thr"],
        )
        cparams = ConstitutiveParams(resistivity=prof, **full["constitutive"])
        reg = RegularizationParams(**full["regularization"])
        solver = SolverOptions(**full["solver"])
        ic = ICSpec(**full["ic"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    out = full["output"]
    if out["cadence"] < 1:
        raise ConfigError("output.cadence must be >= 1")
    if out["density_lower_bound_audit"] and cparams.gamma_minus <= 4.0:
        raise ConfigError(
            "the density-lower-bound audit requires gamma_minus > 4")
    return RunConfig(
        nx=nx, ny=ny, cparams=cparams, reg=reg, solver=solver, ic=ic,
        output_dir=out["directory"], cadence=out["cadence"],
        store_fields=out["store_fields"],
        checkpoint_every=out["checkpoint_every"],
        include_bd=out["include_bd"],
        density_lower_bound_audit=out["density_lower_bound_audit"],
    )


def config_to_dict(cfg: RunConfig) -> dict:
    """Nested plain dict mirroring the file schema; round-trips through
    config_from_dict."""
    return {
        "grid": {"nx": cfg.nx, "ny": cfg.ny},
        "constitutive": {
            "gamma": cfg.cparams.gamma, "gamma_minus": cfg.cparams.gamma_minus,
            "c1": cfg.cparams.c1, "c2": cfg.cparams.c2,
            "mu0": cfg.cparams.mu0, "alpha": cfg.cparams.alpha,
            "hbar": cfg.cparams.hbar,
        },
        "resistivity": {
            "d0": cfg.cparams.resistivity.d0, "d0p": cfg.cparams.resistivity.d0p,
            "d1": cfg.cparams.resistivity.d1, "d1p": cfg.cparams.resistivity.d1p,
            "a": cfg.cparams.resistivity.a, "ap": cfg.cparams.resistivity.ap,
            "b": cfg.cparams.resistivity.b, "b_thr": cfg.cparams.resistivity.B_thr,
        },
        "regularization": {
            "epsilon": cfg.reg.epsilon, "lambda_reg": cfg.reg.lambda_reg,
            "s": cfg.reg.s, "n_modes": cfg.reg.n_modes,
        },
        "solver": {
            "dt": cfg.solver.dt, "t_end": cfg.solver.t_end,
            "integrator": cfg.solver.integrator, "fp_tol": cfg.solver.fp_tol,
            "fp_max_iters": cfg.solver.fp_max_iters,
            "density_floor": cfg.solver.density_floor,
        },
        "ic": {
            "kind": cfg.ic.kind, "amplitude": cfg.ic.amplitude,
            "decay": cfg.ic.decay, "mean_density": cfg.ic.mean_density,
            "mean_bx": cfg.ic.mean_bx, "mean_by": cfg.ic.mean_by,
            "seed": cfg.ic.seed,
        },
        "output": {
            "directory": cfg.output_dir, "cadence": cfg.cadence,
            "store_fields": cfg.store_fields,
            "checkpoint_every": cfg.checkpoint_every,
            "include_bd": cfg.include_bd,
            "density_lower_bound_audit": cfg.density_lower_bound_audit,
        },
    }
