"""Scenario tasks, parameter sweeps and the figure presets.

Figure presets are fixed parameter sets, so reproducing a data table needs
no scenario file. Values picked here rather than given are commented.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from . import __version__
from .closed_form import optimal_price_quality, optimal_profit_homogeneous, optimal_quality_homogeneous
from .config import ConfigError, ScenarioConfig, check_sections
from .model import CostModel, Population, expected_profit_multi, expected_profit_single
from .montecarlo import simulate_market, simulate_spam, spam_expected
from .optimizer import (
    best_variant_count,
    maximize_1d,
    maximize_price_quality,
    maximize_qualities,
    phase_label,
    phase_summary,
)
from .spam import NoProfitableSpam, SpamScenario, spam_optimal_quality

THREADS_ENV = "QUALDIFF_THREADS"
SIG_DIGITS = 12
NAN = float("nan")


@dataclass
class SweepResult:
    columns: tuple[str, ...]
    rows: list[tuple]
    meta: dict[str, Any] = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([row[i] for row in self.rows], dtype=float)


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def pmap(fn: Callable, items: Sequence, threads: int = 1) -> list:
    """Order-preserving map, over worker processes when threads > 1."""
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# -- output ------------------------------------------------------------------


def fmt(value) -> str:
    if value is None:
        return "nan"
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), f".{SIG_DIGITS}g")


def _json_value(value):
    if value is None:
        return None
    if isinstance(value, (bool, np.bool_)):
        return int(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    value = float(format(float(value), f".{SIG_DIGITS}g"))
    return None if math.isnan(value) else value


def to_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(result.columns)
    for row in result.rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def to_json(result: SweepResult) -> str:
    doc = {
        "meta": {"version": __version__, **result.meta},
        "rows": [dict(zip(result.columns, map(_json_value, row))) for row in result.rows],
    }
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def render(result: SweepResult, fmt_name: str) -> str:
    if fmt_name == "csv":
        return to_csv(result)
    if fmt_name == "json":
        return to_json(result)
    raise ValueError(f"unknown format {fmt_name!r}")


# -- single-scenario tasks ---------------------------------------------------


def _levels_two(q: Sequence[float]) -> tuple[float, float]:
    return min(q), max(q)


def task_eval(cfg: ScenarioConfig) -> dict[str, Any]:
    line = cfg.product.build_line()
    x = expected_profit_multi(line, cfg.population.build(), cfg.cost.build())
    return {"x": x}


def task_optimize(cfg: ScenarioConfig) -> dict[str, Any]:
    prod = cfg.product
    if prod.m is None:
        raise ConfigError("product.m is required for 'optimize'")
    res = maximize_qualities(prod.m, cfg.population.build(), cfg.cost.build(),
                             weights=prod.weights, price=prod.price, beta=prod.beta, gamma=prod.gamma,
                             ordered=prod.ordered)
    out: dict[str, Any] = {"x_star": res.global_value}
    for i, q in enumerate(res.global_arg, 1):
        out[f"q{i}"] = q
    out["distinct_qualities"] = res.distinct_qualities
    out["local_maxima"] = len(res.local_maxima)
    return out


def task_variants(cfg: ScenarioConfig) -> dict[str, Any]:
    prod = cfg.product
    if prod.m_max is None:
        raise ConfigError("product.m_max is required for 'variants'")
    table = best_variant_count(prod.m_max, cfg.population.build(), cfg.cost.build(),
                               price=prod.price, beta=prod.beta, gamma=prod.gamma)
    i = table.chosen_m - 1
    return {"chosen_m": table.chosen_m, "x_star": table.x_star[i], "distinct_qualities": table.distinct[i]}


def task_phase(cfg: ScenarioConfig) -> dict[str, Any]:
    weights = cfg.product.weights if cfg.product else None
    ordered = cfg.product.ordered if cfg.product else None
    s = phase_summary(cfg.population.build(), cfg.cost.build(), weights, ordered)
    lo, hi = _levels_two(s.q2)
    return {"x1_star": s.x1, "q1_star": s.q1, "x2_star": s.x2, "q2_low": lo, "q2_high": hi, "phase": s.label}


def task_price(cfg: ScenarioConfig) -> dict[str, Any]:
    cost = cfg.cost.build() if cfg.cost else CostModel()
    res = maximize_price_quality(cfg.population.build(), cost)
    q, p = res.global_arg
    return {"q_star": q, "p_star": p, "x_star": res.global_value}


def _spam_row(scenario: SpamScenario) -> dict[str, Any]:
    try:
        opt = spam_optimal_quality(scenario)
    except NoProfitableSpam as exc:
        return {"q_star": exc.q, "m_star": exc.m, "x_star": exc.best_profit, "m_star_formula": NAN,
                "q_root": NAN, "profitable": 0}
    return {"q_star": opt.q_star, "m_star": opt.m_star, "x_star": opt.x_star, "m_star_formula": opt.m_star_real,
            "q_root": NAN if opt.q_root is None else opt.q_root, "profitable": 1}


def task_spam(cfg: ScenarioConfig) -> dict[str, Any]:
    return _spam_row(cfg.spam.build())


TASKS: dict[str, Callable[[ScenarioConfig], dict[str, Any]]] = {
    "eval": task_eval,
    "optimize": task_optimize,
    "variants": task_variants,
    "phase": task_phase,
    "price": task_price,
    "spam": task_spam,
}


def run_task(task: str, cfg: ScenarioConfig) -> SweepResult:
    check_sections(cfg, task)
    row = TASKS[task](cfg)
    return SweepResult(tuple(row), [tuple(row.values())], {"task": task, "parameters": _dump(cfg)})


def _dump(cfg: ScenarioConfig) -> dict:
    return cfg.model_dump(exclude_none=True, exclude={"output"})


# -- sweeps ------------------------------------------------------------------


def apply_axis(cfg: ScenarioConfig, task: str, name: str, value: float) -> ScenarioConfig:
    cfg = cfg.model_copy(deep=True)
    if name == "c2":
        if cfg.population is None or len(cfg.population.groups) != 2:
            raise ConfigError("axis 'c2' needs a population of exactly two groups")
        cfg.population.groups[0].proportion = 1.0 - value
        cfg.population.groups[1].proportion = value
    elif name == "z":
        if task == "spam":
            cfg.spam.z = value
        else:
            if cfg.cost is None:
                raise ConfigError("axis 'z' needs a [cost] table")
            cfg.cost.z = value
    elif name == "r2":
        if cfg.product is None:
            raise ConfigError("axis 'r2' needs a [product] table")
        cfg.product.weights = [1.0 - value, value]
    elif name == "price":
        cfg.product.price = value
    elif name == "alpha" and task == "spam":
        cfg.spam.alpha = value
    elif name[:5] in ("alpha", "sigma") and name[5:].isdigit():
        idx = int(name[5:]) - 1
        groups = cfg.population.groups if cfg.population else []
        if not 0 <= idx < len(groups):
            raise ConfigError(f"axis {name!r}: no group {idx + 1}")
        setattr(groups[idx], name[:5], value)
    else:
        raise ConfigError(f"invalid sweep axis {name!r}")
    return cfg


def _sweep_point(args) -> dict[str, Any]:
    task, cfg = args
    return TASKS[task](cfg)


def run_sweep(cfg: ScenarioConfig, threads: int = 1) -> SweepResult:
    if cfg.sweep is None:
        raise ConfigError("missing [sweep] table")
    task = cfg.sweep.task
    check_sections(cfg, task, sweep=True)
    names = [a.name for a in cfg.sweep.axes]
    if len(set(names)) != len(names):
        raise ConfigError("duplicate sweep axis")
    grids = [a.grid() for a in cfg.sweep.axes]
    points = list(itertools.product(*grids))
    jobs = []
    for coords in points:
        point_cfg = cfg
        for name, value in zip(names, coords):
            point_cfg = apply_axis(point_cfg, task, name, value)
        jobs.append((task, point_cfg))
    results = pmap(_sweep_point, jobs, threads)
    columns = tuple(names) + tuple(results[0])
    rows = [tuple(coords) + tuple(r.values()) for coords, r in zip(points, results)]
    return SweepResult(columns, rows, {"task": task, "parameters": _dump(cfg)})


# -- validation --------------------------------------------------------------


@dataclass(frozen=True)
class ValidationReport:
    analytic: float
    sampled: float
    standard_error: float
    passed: bool

    def as_result(self, meta: dict) -> SweepResult:
        return SweepResult(("analytic", "sampled", "standard_error", "z_score", "passed"),
                           [(self.analytic, self.sampled, self.standard_error,
                             (self.sampled - self.analytic) / self.standard_error if self.standard_error else NAN,
                             self.passed)], meta)


def run_validate(cfg: ScenarioConfig, n_buyers: int, seed: int, threads: int = 1,
                 n_se: float = 4.0) -> ValidationReport:
    check_sections(cfg, "validate")
    if cfg.spam is not None:
        if cfg.population or cfg.product or cfg.cost:
            raise ConfigError("validate takes either [spam] or [population]/[product]/[cost], not both")
        scenario = cfg.spam.build()
        q, m = cfg.spam.quality, cfg.spam.m
        if q is None or m is None:
            opt = spam_optimal_quality(scenario)
            q = opt.q_star if q is None else q
            m = opt.m_star if m is None else m
        expected, _ = spam_expected(scenario, q, m)
        report = simulate_spam(scenario, q, m, n_buyers, seed, threads)
    else:
        missing = [t for t in ("population", "product", "cost") if getattr(cfg, t) is None]
        if missing:
            raise ConfigError(f"validate needs table(s): {', '.join(missing)}")
        line = cfg.product.build_line()
        pop, cost = cfg.population.build(), cfg.cost.build()
        expected = expected_profit_multi(line, pop, cost)
        report = simulate_market(line, pop, cost, n_buyers, seed, threads)
    ok = report.within(expected, n_se)
    return ValidationReport(float(expected), report.sampled_profit_per_buyer, report.standard_error, ok)


# -- figure presets ----------------------------------------------------------

F3_ALPHA1, F3_Z = 0.1, 0.01
F3_ALPHA2 = (0.5, 1.0, 3.0, 10.0)  # chosen
F4_ALPHA = (0.1, 3.0)
F4_Z = 0.01
F6_GROUPS = dict(alpha1=0.2, alpha2=3.0, sigma1=0.5, sigma2=3.0)
F6_Z = (0.002, 0.005)  # two distinct variants never pay above z ~ 0.0073
# grids chosen to contain all three phases
F7_C2_STEP, F7_Z_STOP, F7_Z_STEP = 0.02, 0.02, 0.0005
F7B_C2_STEP, F7B_M_MAX = 0.05, 60
F8_C2 = 0.5  # chosen, inside the differentiated region
F10_GROUPS = dict(alpha1=0.2, alpha2=3.0, sigma1=0.2, sigma2=2.0)
F10_Z, F10_C2 = 0.01, 0.5
F13_Z = (1e-2, 1e-3, 1e-4)


def _grid(start: float, stop: float, step: float) -> list[float]:
    n = int(round((stop - start) / step))
    return [round(start + i * step, 12) for i in range(n + 1)]


def single_product_optimum(pop: Population, z: float, grid_points: int = 1024):
    f = lambda q: expected_profit_single(q, pop, CostModel(z))  # noqa: E731
    return maximize_1d(f, 0.0, 1.0, grid_points=grid_points, tol=1e-10, batch=f)


def figure_f2() -> SweepResult:
    z = 0.05
    rows = [(a, optimal_quality_homogeneous(a), optimal_profit_homogeneous(a, z)) for a in _grid(0.01, 5.0, 0.01)]
    return SweepResult(("alpha", "q_star", "x_star"), rows, {"z": z})


def _f3_point(args):
    alpha2, c2 = args
    res = single_product_optimum(Population.two_group(F3_ALPHA1, alpha2, c2), F3_Z)
    return (alpha2, c2, res.global_arg[0], res.global_value)


def figure_f3(threads: int = 1) -> SweepResult:
    jobs = [(a2, c2) for a2 in F3_ALPHA2 for c2 in _grid(0.0, 1.0, 0.01)]
    return SweepResult(("alpha2", "c2", "q_star", "x_star"), pmap(_f3_point, jobs, threads),
                       {"alpha1": F3_ALPHA1, "z": F3_Z})


def profit_peaks(c2: float, z: float = F4_Z, alphas=F4_ALPHA):
    """Low- and high-quality local maxima of the single-product profit.

    A lone maximum is classed by which side of the midpoint between the
    groups' homogeneous optima it falls.
    """
    a1, a2 = alphas
    res = single_product_optimum(Population.two_group(a1, a2, c2), z)
    split = 0.5 * (optimal_quality_homogeneous(a1) + optimal_quality_homogeneous(a2))
    by_arg = sorted(res.local_maxima, key=lambda m: m.argument[0])
    low = high = None
    if len(by_arg) >= 2:
        low, high = by_arg[0], by_arg[-1]
    elif by_arg[0].argument[0] < split:
        low = by_arg[0]
    else:
        high = by_arg[0]
    return low, high, res


def figure_f4() -> SweepResult:
    rows = []
    for c2 in _grid(0.20, 0.45, 0.005):
        low, high, res = profit_peaks(c2)
        rows.append((
            c2,
            low.argument[0] if low else NAN,
            high.argument[0] if high else NAN,
            low.value if low else NAN,
            high.value if high else NAN,
            res.global_arg[0],
        ))
    return SweepResult(("c2", "Q_low_peak", "Q_high_peak", "x_low", "x_high", "q_star"), rows,
                       {"alpha1": F4_ALPHA[0], "alpha2": F4_ALPHA[1], "z": F4_Z})


def _f6_pop(c2: float) -> Population:
    g = F6_GROUPS
    return Population.two_group(g["alpha1"], g["alpha2"], c2, g["sigma1"], g["sigma2"])


def _gross_phase(c2: float):
    """One- and two-variant optima without fixed cost (z only shifts them)."""
    return c2, phase_summary(_f6_pop(c2), CostModel(0.0))


def _phase_rows(summary, c2, zs):
    for z in zs:
        x1, x2 = summary.x1 - z, summary.x2 - 2 * z
        lo, hi = _levels_two(summary.q2)
        yield z, c2, x1, summary.q1, x2, lo, hi, phase_label(x1, x2, summary.q2)


def figure_f6(threads: int = 1) -> SweepResult:
    gross = pmap(_gross_phase, _grid(0.0, 1.0, 0.01), threads)
    rows = [row for c2, s in gross for row in _phase_rows(s, c2, F6_Z)]
    rows.sort(key=lambda r: (r[0], r[1]))
    return SweepResult(("z", "c2", "x1_star", "q1_star", "x2_star", "q2_low", "q2_high", "phase"), rows,
                       {**F6_GROUPS, "z": list(F6_Z)})


def figure_f7a(threads: int = 1) -> SweepResult:
    zs = _grid(0.0, F7_Z_STOP, F7_Z_STEP)
    gross = pmap(_gross_phase, _grid(0.0, 1.0, F7_C2_STEP), threads)
    rows = [(c2, r[0], r[-1]) for c2, s in gross for r in _phase_rows(s, c2, zs)]
    return SweepResult(("c2", "z", "phase"), rows, {**F6_GROUPS})


def _gross_variants(c2: float):
    return c2, best_variant_count(F7B_M_MAX, _f6_pop(c2), CostModel(0.0))


def choose_count(table, z: float) -> tuple[int, float, int]:
    """(variants, profit, distinct levels) at fixed cost z from a z = 0 table; 0 variants if unprofitable."""
    x = [v - m * z for m, v in zip(table.m_values, table.x_star)]
    best = max(x)
    if best <= 0:
        return 0, 0.0, 0
    i = next(i for i, v in enumerate(x) if v >= best - 1e-12)
    return table.m_values[i], x[i], table.distinct[i]


def figure_f7b(threads: int = 1) -> SweepResult:
    zs = _grid(0.0, F7_Z_STOP, F7_Z_STEP)
    tables = pmap(_gross_variants, _grid(0.0, 1.0, F7B_C2_STEP), threads)
    rows = []
    for c2, table in tables:
        for z in zs:
            m, _, distinct = choose_count(table, z)
            rows.append((c2, z, m, distinct))
    return SweepResult(("c2", "z", "m_star", "distinct_qualities"), rows, {**F6_GROUPS, "m_max": F7B_M_MAX})


def _variant_rows(table):
    for m, x, arg, d in zip(table.m_values, table.x_star, table.arguments, table.distinct):
        lo, hi = min(arg), max(arg)
        n_high = sum(1 for q in arg if q > lo + 1e-4) if d > 1 else 0
        yield m, x, lo, hi, n_high, d


def figure_f8(z: float, m_max: int) -> SweepResult:
    table = best_variant_count(m_max, _f6_pop(F8_C2), CostModel(z))
    return SweepResult(("M", "x_star", "q_low", "q_high", "n_high", "distinct_qualities"),
                       list(_variant_rows(table)),
                       {**F6_GROUPS, "c2": F8_C2, "z": z, "chosen_m": table.chosen_m,
                        "ansatz_gap_m4": table.ansatz_gap})


def _f10_pop() -> Population:
    g = F10_GROUPS
    return Population.two_group(g["alpha1"], g["alpha2"], F10_C2, g["sigma1"], g["sigma2"])


def _f10_point(r2: float):
    s = phase_summary(_f10_pop(), CostModel(F10_Z), weights=(1.0 - r2, r2), ordered=True)
    x_star = s.x2 if s.label == 2 else s.x1
    return (r2, s.q2[0], s.q2[1], s.x2, s.x1, x_star, s.label)


def figure_f10(threads: int = 1, r2_grid: Sequence[float] | None = None) -> SweepResult:
    grid = _grid(0.005, 0.995, 0.005) if r2_grid is None else list(r2_grid)
    return SweepResult(("r2", "Q1", "Q2", "x2_star", "x1_star", "x_star", "phase"),
                       pmap(_f10_point, grid, threads),
                       {**F10_GROUPS, "z": F10_Z, "c2": F10_C2, "M": 2})


def figure_f11() -> SweepResult:
    rows = []
    for a in _grid(0.01, 5.0, 0.01):
        opt = optimal_price_quality(a)
        rows.append((a, optimal_profit_homogeneous(a, 0.0), opt.x_star, opt.q_star, opt.p_star))
    return SweepResult(("alpha", "x_fixed_price", "x_variable_price", "q_star", "p_star"), rows, {"z": 0.0})


def _f13_point(args):
    alpha, z = args
    return (alpha, z, *_spam_row(SpamScenario(alpha, z)).values())


def figure_f13(threads: int = 1) -> SweepResult:
    alphas = [float(format(a, ".6g")) for a in np.geomspace(1e-2, 1.0, 13)]
    jobs = [(a, z) for a in alphas for z in sorted(F13_Z)]
    return SweepResult(("alpha", "z", "q_star", "m_star", "x_star", "m_star_formula", "q_root", "profitable"),
                       pmap(_f13_point, jobs, threads), {"z": list(F13_Z)})


FIGURES: dict[str, Callable[..., SweepResult]] = {
    "f2": lambda threads=1: figure_f2(),
    "f3": figure_f3,
    "f4": lambda threads=1: figure_f4(),
    "f6": figure_f6,
    "f7a": figure_f7a,
    "f7b": figure_f7b,
    "f8a": lambda threads=1: figure_f8(0.002, 10),
    "f8b": lambda threads=1: figure_f8(0.0, 60),
    "f10": figure_f10,
    "f11": lambda threads=1: figure_f11(),
    "f13": figure_f13,
}


def run_figure(figure_id: str, threads: int = 1) -> SweepResult:
    try:
        build = FIGURES[figure_id]
    except KeyError:
        raise ValueError(f"unknown figure {figure_id!r}; choose from {', '.join(FIGURES)}") from None
    result = build(threads=threads)
    result.meta = {"figure": figure_id, **result.meta}
    return result


def figure_ids() -> Iterable[str]:
    return FIGURES.keys()

