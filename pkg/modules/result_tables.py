"""
Output documents and tables.

Every subcommand produces {config, results, diagnostics}; JSON is rendered
with a fixed layout so identical runs give identical bytes, and CSV is the
flattened results list.
"""
import json
import math
from collections import OrderedDict
from typing import Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd

from modules.quadrature import QuadratureGrid
from modules.space_core import SpaceParams
from modules.symbols import Symbol
from modules.toeplitz_engine import build_matrix, commutator_residual, offblock_mass


def to_jsonable(value):
    """Complex -> {"re", "im"}; numpy -> Python; tuples -> lists; inf/nan -> None."""
    if isinstance(value, dict):
        return OrderedDict((str(k), to_jsonable(v)) for k, v in value.items())
    if isinstance(value, (list, tuple, set, frozenset)):
        items = sorted(value) if isinstance(value, (set, frozenset)) else value
        return [to_jsonable(v) for v in items]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return OrderedDict([("re", to_jsonable(float(value.real))), ("im", to_jsonable(float(value.imag)))])
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def build_document(run_config: dict, results: Sequence[dict], diagnostics: Optional[dict] = None) -> OrderedDict:
    return OrderedDict([
        ("config", to_jsonable(run_config)),
        ("results", to_jsonable(list(results))),
        ("diagnostics", to_jsonable(diagnostics or {})),
    ])


def render_json(document: dict) -> str:
    return json.dumps(document, indent=2, allow_nan=False) + "\n"


def results_frame(results: Sequence[dict]) -> pd.DataFrame:
    """Results flattened to columns; nested keys become dotted names."""
    rows = to_jsonable(list(results))
    if not rows:
        return pd.DataFrame()
    return pd.json_normalize(rows, sep=".")


def render_csv(results: Sequence[dict], run_config: Optional[dict] = None) -> str:
    """CSV table; the run config is echoed as leading `# key: value` comment lines."""
    header = "".join(f"# {key}: {json.dumps(value)}\n" for key, value in to_jsonable(run_config or {}).items())
    return header + results_frame(results).to_csv(index=False, lineterminator="\n")


def convergence_table(f: Symbol, g: Symbol, p: SpaceParams, degrees: Iterable[int],
                      grid: Optional[QuadratureGrid] = None) -> pd.DataFrame:
    """Commutator residual and off-block mass of T_g as the truncation degree grows."""
    rows: List[dict] = []
    for D in degrees:
        tf = build_matrix(f, p, D, grid)
        tg = build_matrix(g, p, D, grid)
        report = commutator_residual(f, g, p, D, grid, operators=(tf, tg))
        rows.append({
            "degree": D,
            "interior_degree": report.interior_degree,
            "commutator_residual": report.frobenius_residual,
            "offblock_mass": offblock_mass(g, p, D, grid, operator=tg),
        })
    return pd.DataFrame(rows, columns=["degree", "interior_degree", "commutator_residual", "offblock_mass"])
