import os
from pathlib import Path
from dotenv import load_dotenv
from typing import Optional

from modules.errors import ParameterError

load_dotenv()

# --- Paths ---
BASE_DIR = Path(__file__).parent
DATA_DIR = BASE_DIR / "data"
RUN_LOG_DEFAULT_PATH = DATA_DIR / "run_log.json"

# --- Truncation & Quadrature Defaults ---
DEFAULT_DEGREE = 10
DEFAULT_N_R = 60
DEFAULT_N_THETA = 64
DEFAULT_N_POLAR = 24
DEFAULT_TOL = 1e-8

# Smaller grids keep d=2 assembly in memory; angular exactness still covers
# every frequency reachable at the default degree.
GRID_DEFAULTS = {
    1: {"n_r": DEFAULT_N_R, "n_theta": DEFAULT_N_THETA, "n_polar": 1},
    2: {"n_r": 40, "n_theta": 32, "n_polar": DEFAULT_N_POLAR},
}

# Radial nodes per assembly chunk; fixed so sums do not depend on thread count
ASSEMBLY_CHUNK = 4

# --- Mittag-Leffler Settings ---
ML_SERIES_TOL = 1e-12
ML_TERM_BUDGET = 500
ML_MAX_TERMS = 25000
ML_SECTOR_MARGIN = 0.1
ML_GUARD_DIGITS = 20

# --- Mellin / Omega Settings ---
MELLIN_REL_TOL = 1e-8
MELLIN_ABS_FLOOR = 1e-10
# tanh-sinh levels tried before an integral counts as divergent
MELLIN_DEGREES = (6, 10)
# widths (in sqrt(Re a)) of the cuts placed around the peak of t^{a-1} e^{-t}
GAMMA_PEAK_CUTS = (-4.0, 0.0, 4.0, 10.0)
PERIOD_SCAN_GRID = {
    "re_min": 5.0,
    "re_max": 15.0,
    "steps": 11,
    "imag": (0.0, 1.0),
}
PERIOD_SCAN_TOL = 1e-8
PERIOD_SCAN_RANGE = (-5, 5)

# QUADPACK settings for the inner integral of Mellin convolutions
CONVOLUTION_QUAD = {
    "epsabs": 1e-12,
    "epsrel": 1e-10,
    "limit": 200,
}

# --- Pointwise Projection ---
# ceiling for the angular rule chosen from the kernel aliasing bound
PROJECTION_MAX_N_THETA = 1024
# polynomial degree allowance of the projected symbol in that bound
PROJECTION_DEGREE_ALLOWANCE = DEFAULT_DEGREE

# --- Symbol Sampling ---
SAMPLE_SEED = 20240607
SAMPLE_POINTS = 24
RADIALITY_TOL = 1e-10
# largest expansion kept when a radial profile is a finite sum of families
MAX_RADIAL_TERMS = 64


# --- Configuration Helper Functions ---
def get_config_value(key: str, default: Optional[str] = None, user_config: Optional[dict] = None) -> Optional[str]:
    """
    Get configuration value with priority: user_config > .env > default

    Args:
        key: Environment variable name
        default: Default value
        user_config: Dictionary of values supplied on the command line

    Returns:
        Configuration value or default
    """
    # Priority 1: explicit command-line value
    if user_config and key in user_config and user_config[key] is not None:
        return user_config[key]

    # Priority 2: Environment variable from .env file
    env_value = os.getenv(key)
    if env_value:
        return env_value

    # Priority 3: Default value
    return default


def get_thread_count(user_config: Optional[dict] = None) -> int:
    """Worker cap for matrix assembly (FOCKOP_THREADS, default: CPU count)."""
    raw = get_config_value("FOCKOP_THREADS", None, user_config)
    if raw is None:
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except (TypeError, ValueError):
        raise ParameterError(f"FOCKOP_THREADS must be a positive integer, got {raw!r}")
    if value < 1:
        raise ParameterError(f"FOCKOP_THREADS must be a positive integer, got {raw!r}")
    return value


def get_log_level(user_config: Optional[dict] = None) -> str:
    return str(get_config_value("FOCKOP_LOG_LEVEL", "WARNING", user_config)).upper()


def get_run_log_path(user_config: Optional[dict] = None) -> Optional[Path]:
    """Run log location; None disables the log."""
    raw = get_config_value("FOCKOP_RUN_LOG", None, user_config)
    if raw is None:
        return None
    if str(raw).lower() in ("1", "true", "yes"):
        return RUN_LOG_DEFAULT_PATH
    return Path(raw)
