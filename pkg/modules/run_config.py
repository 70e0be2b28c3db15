"""
Run Configuration Module
Resolves the global command-line flags into a validated RunConfig
"""
import argparse
from dataclasses import dataclass
from typing import Dict, Optional

import config
from modules.errors import ParameterError
from modules.quadrature import QuadratureGrid
from modules.space_core import SpaceParams

# Settings shared by every subcommand
RUN_SETTINGS = {
    "d": {
        "label": "Complex dimension",
        "type": int,
        "default": 1,
        "env": "FOCKOP_D",
        "help": "Dimension d of C^d",
    },
    "m": {
        "label": "Weight exponent",
        "type": float,
        "default": 1.0,
        "env": "FOCKOP_M",
        "help": "Exponent m >= 1 in exp(-alpha |z|^(2m))",
    },
    "alpha": {
        "label": "Scale",
        "type": float,
        "default": 1.0,
        "env": "FOCKOP_ALPHA",
        "help": "Scale alpha > 0",
    },
    "s": {
        "label": "Power weight",
        "type": float,
        "default": 0.0,
        "env": "FOCKOP_S",
        "help": "Power weight s >= 0 in |z|^(2s)",
    },
    "degree": {
        "label": "Truncation degree",
        "type": int,
        "default": config.DEFAULT_DEGREE,
        "env": "FOCKOP_DEGREE",
        "help": "Largest total degree D kept in truncated matrices",
    },
    "n_r": {
        "label": "Radial nodes",
        "type": int,
        "default": None,
        "env": "FOCKOP_N_R",
        "help": "Radial quadrature nodes (default depends on d)",
    },
    "n_theta": {
        "label": "Angular nodes",
        "type": int,
        "default": None,
        "env": "FOCKOP_N_THETA",
        "help": "Equispaced angles per circle (default depends on d)",
    },
    "n_polar": {
        "label": "Polar nodes",
        "type": int,
        "default": None,
        "env": "FOCKOP_N_POLAR",
        "help": "Gauss-Legendre nodes in |z1|^2/|z|^2 (d=2 only)",
    },
    "tol": {
        "label": "Tolerance",
        "type": float,
        "default": config.DEFAULT_TOL,
        "env": "FOCKOP_TOL",
        "help": "Pass/fail tolerance reported with each check",
    },
    "format": {
        "label": "Output format",
        "type": str,
        "default": "json",
        "env": "FOCKOP_FORMAT",
        "choices": ("json", "csv"),
        "help": "Output format",
    },
    "output": {
        "label": "Output path",
        "type": str,
        "default": None,
        "env": None,
        "help": "Write output here instead of stdout",
    },
}

FLAG_ALIASES = {"degree": ("--max-degree",)}


@dataclass(frozen=True)
class RunConfig:
    d: int
    m: float
    alpha: float
    s: float
    degree: int
    n_r: int
    n_theta: int
    n_polar: int
    tol: float
    format: str = "json"
    output: Optional[str] = None

    def space_params(self) -> SpaceParams:
        return SpaceParams(self.d, self.m, self.alpha, self.s)

    def grid(self) -> QuadratureGrid:
        return QuadratureGrid(self.n_r, self.n_theta, self.n_polar)

    def as_dict(self) -> Dict[str, object]:
        """Resolved settings in table order; the output path is left out."""
        return {key: getattr(self, key) for key in RUN_SETTINGS if key != "output"}


def add_run_arguments(parser: argparse.ArgumentParser):
    """Add one flag per RUN_SETTINGS entry; values left as None resolve later."""
    for key, setting in RUN_SETTINGS.items():
        flags = ["--" + key.replace("_", "-")] + list(FLAG_ALIASES.get(key, ()))
        kwargs = {"dest": key, "type": setting["type"], "default": None, "help": setting["help"]}
        if "choices" in setting:
            kwargs["choices"] = setting["choices"]
        parser.add_argument(*flags, **kwargs)


def _resolve(key: str, namespace: argparse.Namespace):
    setting = RUN_SETTINGS[key]
    cli_values = {setting["env"]: getattr(namespace, key, None)} if setting["env"] else {}
    raw = config.get_config_value(setting["env"], None, cli_values) if setting["env"] else getattr(namespace, key, None)
    if raw is None:
        return setting["default"]
    try:
        return setting["type"](raw)
    except (TypeError, ValueError):
        raise ParameterError(f"{setting['label']} ({key}) has invalid value {raw!r}")


def resolve_run_config(namespace: argparse.Namespace) -> RunConfig:
    """
    Resolve every setting with priority: command line > environment/.env > default.

    Raises:
        ParameterError: a value is malformed or violates the space constraints
    """
    values = {key: _resolve(key, namespace) for key in RUN_SETTINGS}
    space = SpaceParams(values["d"], values["m"], values["alpha"], values["s"])
    grid = QuadratureGrid.for_dimension(space.d, values["n_r"], values["n_theta"], values["n_polar"])
    if values["degree"] < 0:
        raise ParameterError(f"degree must be >= 0, got {values['degree']}")
    if not values["tol"] > 0:
        raise ParameterError(f"tol must be > 0, got {values['tol']}")
    if values["format"] not in RUN_SETTINGS["format"]["choices"]:
        raise ParameterError(f"format must be one of {RUN_SETTINGS['format']['choices']}, got {values['format']!r}")
    return RunConfig(
        d=space.d,
        m=space.m,
        alpha=space.alpha,
        s=space.s,
        degree=values["degree"],
        n_r=grid.n_r,
        n_theta=grid.n_theta,
        n_polar=grid.n_polar,
        tol=values["tol"],
        format=values["format"],
        output=values["output"],
    )
