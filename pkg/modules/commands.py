"""
Subcommand handlers.

Each handler takes the parsed arguments and the resolved RunConfig and returns
(results, diagnostics) for the output document.
"""
import argparse
import logging
import math
from typing import Callable, Dict, List, Tuple

import numpy as np

import config
from modules import mellin, special_functions, toeplitz_engine
from modules.errors import ParameterError
from modules.quadrature import build_product_rule
from modules.result_tables import convergence_table
from modules.run_config import RunConfig
from modules.space_core import MultiIndex, evaluate_basis, graded_basis, moment
from modules.symbols import g_transform, parse_symbol, v_transform

logger = logging.getLogger(__name__)

Outcome = Tuple[List[dict], dict]


def parse_point(text: str, d: int) -> np.ndarray:
    """"1+2i, 0" -> array of d complex coordinates."""
    try:
        values = [complex(item.strip().replace("i", "j")) for item in str(text).split(",") if item.strip()]
    except ValueError:
        raise ParameterError(f"malformed point {text!r}")
    if len(values) != d:
        raise ParameterError(f"point {text!r} has {len(values)} coordinates, expected d={d}")
    return np.array(values, dtype=complex)


def parse_floats(text: str) -> List[float]:
    try:
        return [float(item) for item in str(text).split(",") if item.strip()]
    except ValueError:
        raise ParameterError(f"malformed number list {text!r}")


def parse_degrees(text: str) -> List[int]:
    values = parse_floats(text)
    if not values or any(not math.isfinite(v) or v != int(v) or v < 0 for v in values):
        raise ParameterError(f"degrees must be non-negative integers, got {text!r}")
    return [int(v) for v in values]


def _passes(value: float, tol: float) -> bool:
    return bool(value <= tol)


def run_moments(args: argparse.Namespace, run: RunConfig) -> Outcome:
    p = run.space_params()
    rule = build_product_rule(p, run.grid()) if p.d <= 2 else None
    results = []
    worst = 0.0
    for nu in graded_basis(p, run.degree):
        exact = moment(p, nu)
        row = {"nu": list(nu), "total_degree": nu.total_degree, "formula": exact}
        if rule is not None:
            exponents = np.array(nu)
            numeric = rule.integrate(lambda z: np.prod(np.abs(z) ** (2 * exponents), axis=1)).real
            error = abs(numeric - exact) / exact
            worst = max(worst, error)
            row.update({"quadrature": numeric, "relative_error": error})
        results.append(row)
    diagnostics = {"max_relative_error": worst if rule is not None else None,
                   "quadrature": rule is not None}
    if rule is not None:
        diagnostics["pass"] = _passes(worst, run.tol)
    return results, diagnostics


def run_kernel(args: argparse.Namespace, run: RunConfig) -> Outcome:
    p = run.space_params()
    xi = parse_point(args.xi, p.d)
    zeta = parse_point(args.zeta, p.d)
    value = special_functions.kernel_value(p, xi, zeta)
    basis = graded_basis(p, run.degree)
    partial = complex(np.sum(evaluate_basis(p, basis, xi[None, :]) * evaluate_basis(p, basis, zeta[None, :]).conj()))
    results = [{
        "xi": xi, "zeta": zeta, "kernel": value.value, "regime": value.regime.value,
        "expansion": partial, "expansion_gap": abs(partial - value.value),
    }]
    for t in parse_floats(args.t) if args.t else []:
        results.append({"t": t, "asymptotic_ratio": special_functions.kernel_asymptotic_ratio(p, t)})
    return results, {"degree": run.degree}


def run_eigenvalues(args: argparse.Namespace, run: RunConfig) -> Outcome:
    p = run.space_params()
    f = parse_symbol(args.f, p.d)
    table = mellin.OmegaFunction(f, p)
    results = [{"zeta": k, "omega": table(k)} for k in range(run.degree + 1)]
    for zeta in args.zeta or []:
        z = parse_point(zeta, 1)[0]
        results.append({"zeta": z, "omega": table(z)})
    return results, {"symbol": f.describe()}


def run_matrix(args: argparse.Namespace, run: RunConfig) -> Outcome:
    p = run.space_params()
    g = parse_symbol(args.g, p.d)
    op = toeplitz_engine.build_matrix(g, p, run.degree, run.grid())
    results = op.records(threshold=args.threshold)
    diagnostics = {
        "symbol": g.describe(),
        "size": op.size,
        "hermitian_deviation": float(np.linalg.norm(op.matrix - op.matrix.conj().T)),
        "offblock_mass": toeplitz_engine.offblock_mass(g, p, run.degree, operator=op),
    }
    return results, diagnostics


def run_commute(args: argparse.Namespace, run: RunConfig) -> Outcome:
    p = run.space_params()
    f = parse_symbol(args.f, p.d)
    g = parse_symbol(args.g, p.d)
    grid = run.grid()
    if args.sweep:
        degrees = parse_degrees(args.sweep)
        table = convergence_table(f, g, p, degrees, grid)
        return table.to_dict("records"), {"f": f.describe(), "g": g.describe(), "degrees": degrees}
    tf = toeplitz_engine.build_matrix(f, p, run.degree, grid)
    tg = toeplitz_engine.build_matrix(g, p, run.degree, grid)
    report = toeplitz_engine.commutator_residual(f, g, p, run.degree, grid, operators=(tf, tg))
    mass = toeplitz_engine.offblock_mass(g, p, run.degree, operator=tg)
    results = [{"f": f.label, "g": g.label, **report.as_dict(), "offblock_mass": mass}]
    commutes = report.frobenius_residual <= run.tol
    invariant = mass <= run.tol
    return results, {"commutes": commutes, "offblock_vanishes": invariant, "agree": commutes == invariant,
                     "f": f.describe(), "g": g.describe()}


def run_zero_product(args: argparse.Namespace, run: RunConfig) -> Outcome:
    p = run.space_params()
    f = parse_symbol(args.f, p.d)
    g = parse_symbol(args.g, p.d)
    fg, gf = toeplitz_engine.zero_product_residual(f, g, p, run.degree, run.grid())
    results = [{"f": f.label, "g": g.label, **fg.as_dict()}, {"f": f.label, "g": g.label, **gf.as_dict()}]
    return results, {"zero_product": max(fg.frobenius_residual, gf.frobenius_residual) <= run.tol}


def run_equation(args: argparse.Namespace, run: RunConfig) -> Outcome:
    p = run.space_params()
    f1 = parse_symbol(args.f1, p.d)
    f2 = parse_symbol(args.f2, p.d)
    g = parse_symbol(args.g, p.d)
    k = MultiIndex.parse(args.k, p.d)
    n = MultiIndex.parse(args.n, p.d)
    report = toeplitz_engine.equation_residual(f1, f2, g, k, n, p, run.degree, run.grid())
    return [report.as_dict()], {"satisfied": report.max_entry_residual <= run.tol}


def run_period_scan(args: argparse.Namespace, run: RunConfig) -> Outcome:
    p = run.space_params()
    f1 = parse_symbol(args.f1, p.d)
    f2 = parse_symbol(args.f2, p.d)
    n_range = (args.n_min, args.n_max)
    deviations = mellin.period_deviations(f1, f2, p, n_range)
    periods = frozenset(n for n, value in deviations.items() if value <= run.tol)
    results = [{"n": n, "deviation": value, "period": value <= run.tol} for n, value in deviations.items()]
    return results, {"periods": periods, "classification": mellin.classify_period_set(periods, n_range)}


def run_mellin_check(args: argparse.Namespace, run: RunConfig) -> Outcome:
    results = []
    for a, b, m in ((1.0, 2.0, 1.0), (1.0, 3.0, 2.0), (2.0, 5.0, 1.5)):
        for z in parse_floats(args.z):
            results.append({"check": "gamma_quotient", **mellin.gamma_quotient_check(a, b, m, z)})

    def decay(x):
        return np.exp(-np.asarray(x, dtype=float))

    def unit_interval(x):
        return np.where(np.asarray(x, dtype=float) <= 1.0, 1.0, 0.0)

    identity = mellin.convolution_identity_check(decay, unit_interval, 2.0, f_breakpoints=(1.0,), g_breakpoints=(1.0,))
    results.append({"check": "convolution", "zeta": 2.0, **identity})

    kernel = mellin.partial_fraction_kernel([1.0, 1.0], 2)
    for zeta in (0.5, 1.0, 2.0):
        exact = (1.0 + zeta) / ((zeta + 1.0) * (zeta + 2.0))
        numeric = mellin.mellin_transform(lambda x: kernel(x) * unit_interval(x), 2.0 * zeta + 2.0,
                                          breakpoints=(1.0,))
        results.append({"check": "partial_fraction", "zeta": zeta, "numeric": numeric, "exact": exact,
                        "relative_error": abs(numeric - exact) / abs(exact)})
    worst = max(r["relative_error"] for r in results)
    return results, {"max_relative_error": worst, "pass": _passes(worst, run.tol)}


def run_scaling_check(args: argparse.Namespace, run: RunConfig) -> Outcome:
    """𝒢V_t g(z) against t^{−2(s+d)−2Σz} 𝒢g(z)."""
    p = run.space_params()
    g = parse_symbol(args.g, p.d)
    grid = run.grid()
    results = []
    for t in parse_floats(args.t):
        vg = v_transform(g, t, p)
        for zeta in parse_floats(args.z):
            z = np.full(p.d, zeta)
            lhs = g_transform(vg, z, p, grid)
            rhs = t ** (-2 * (p.s + p.d) - 2 * float(np.sum(z))) * g_transform(g, z, p, grid)
            error = abs(lhs - rhs) / max(abs(rhs), 1e-300)
            results.append({"t": t, "z": z, "lhs": lhs, "rhs": rhs, "relative_error": error})
    worst = max((r["relative_error"] for r in results), default=0.0)
    return results, {"symbol": g.describe(), "max_relative_error": worst, "pass": _passes(worst, run.tol)}


def run_counterexample(args: argparse.Namespace, run: RunConfig) -> Outcome:
    p = run.space_params()
    report = toeplitz_engine.counterexample_check(args.N, p, run.degree, run.grid())
    return [report.as_dict()], {"commutes": report.frobenius_residual <= run.tol,
                                "rotation_invariant": report.extras["offblock_mass"] <= run.tol}


COMMANDS: Dict[str, Tuple[Callable[[argparse.Namespace, RunConfig], Outcome], str]] = {
    "moments": (run_moments, "Moments S(nu): closed form against quadrature"),
    "kernel": (run_kernel, "Reproducing kernel value, expansion and asymptotic ratio"),
    "eigenvalues": (run_eigenvalues, "Omega(f, zeta) table for a radial symbol"),
    "matrix": (run_matrix, "Truncated Toeplitz matrix entries"),
    "commute": (run_commute, "Commutator residual of T_f and T_g"),
    "zero-product": (run_zero_product, "Residuals of T_f T_g and T_g T_f"),
    "equation": (run_equation, "Residual of the equation E(f1, f2)"),
    "period-scan": (run_period_scan, "Integer shifts n with Omega(f1, z) = Omega(f2, z+n)"),
    "mellin-check": (run_mellin_check, "Gamma-quotient, convolution and partial-fraction identities"),
    "scaling-check": (run_scaling_check, "Scaling law of the G transform under V_t"),
    "counterexample": (run_counterexample, "Non-invariant symbol commuting with an exponential Toeplitz operator"),
}


def add_command_arguments(name: str, parser: argparse.ArgumentParser):
    if name == "kernel":
        parser.add_argument("--xi", required=True, help="Point xi, comma separated")
        parser.add_argument("--zeta", required=True, help="Point zeta, comma separated")
        parser.add_argument("--t", default=None, help="Arguments t for the asymptotic ratio")
    elif name == "eigenvalues":
        parser.add_argument("--f", required=True, help="Radial symbol")
        parser.add_argument("--zeta", action="append", help="Extra complex arguments")
    elif name == "matrix":
        parser.add_argument("--g", required=True, help="Symbol")
        parser.add_argument("--threshold", type=float, default=1e-14, help="Drop entries below this modulus")
    elif name in ("commute", "zero-product"):
        parser.add_argument("--f", required=True, help="Symbol f")
        parser.add_argument("--g", required=True, help="Symbol g")
        if name == "commute":
            parser.add_argument("--sweep", default=None,
                                help="Truncation degrees, comma separated; reports the residual per degree")
    elif name == "equation":
        parser.add_argument("--f1", required=True, help="Radial symbol f1")
        parser.add_argument("--f2", required=True, help="Radial symbol f2")
        parser.add_argument("--g", required=True, help="Symbol g")
        parser.add_argument("--k", default="0", help="Multi-index k")
        parser.add_argument("--n", default="0", help="Multi-index n")
    elif name == "period-scan":
        parser.add_argument("--f1", required=True, help="Radial symbol f1")
        parser.add_argument("--f2", required=True, help="Radial symbol f2")
        parser.add_argument("--n-min", dest="n_min", type=int, default=config.PERIOD_SCAN_RANGE[0])
        parser.add_argument("--n-max", dest="n_max", type=int, default=config.PERIOD_SCAN_RANGE[1])
    elif name == "mellin-check":
        parser.add_argument("--z", default="0.5,1,2,4", help="Points z for the Gamma quotient")
    elif name == "scaling-check":
        parser.add_argument("--g", required=True, help="Symbol")
        parser.add_argument("--t", default="0.5,2", help="Scales t")
        parser.add_argument("--z", default="0,0.5,1.5", help="Transform points (same value in each coordinate)")
    elif name == "counterexample":
        parser.add_argument("--N", type=int, required=True, help="Rotation order N > 6m")
