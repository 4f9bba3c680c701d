"""Shock scenarios, default classification and parameter sweeps."""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .network import FinancialNetwork, apply_shock, book_equity
from .solver import SolverConfig, solve_fixed_point
from .valuation import ModelError, ValuationModel, TUNABLE


@dataclass(frozen=True)
class ScenarioResult:
    shock: float
    direct_defaults: int
    total_defaults: int
    defaulted_ids: tuple[str, ...]
    direct_ids: tuple[str, ...]
    final_delta_r: float
    converged: bool
    iterations_used: int
    final_equity: np.ndarray = field(repr=False, compare=False)

    @property
    def indirect_defaults(self) -> int:
        return self.total_defaults - self.direct_defaults

    @property
    def total_final_equity(self) -> float:
        return float(np.sum(self.final_equity))


def classify_defaults(E_direct, E_star) -> tuple[int, int, list[int]]:
    """Count defaults before and after network revaluation.

    An institution defaults when its equity is <= 0. Direct defaults use the
    post-shock book equity ``E_direct``; the total uses the fixed point
    ``E_star``. Returns ``(direct, indirect, indices defaulted at E_star)``.
    """
    E_direct = np.asarray(E_direct, dtype=np.float64)
    E_star = np.asarray(E_star, dtype=np.float64)
    if E_direct.shape != E_star.shape:
        raise ValueError("equity vectors differ in length")
    direct = int(np.count_nonzero(E_direct <= 0))
    failed = np.nonzero(E_star <= 0)[0]
    return direct, len(failed) - direct, failed.tolist()


def run_scenario(network: FinancialNetwork, model: ValuationModel, a,
                 config: SolverConfig | None = None) -> ScenarioResult:
    shocked = apply_shock(network, a)
    traj = solve_fixed_point(network, shocked, model, config)
    direct, _, failed = classify_defaults(traj.initial, traj.final)
    ids = network.ids
    direct_ids = tuple(ids[k] for k in np.nonzero(traj.initial <= 0)[0])
    return ScenarioResult(
        shock=float(np.mean(a)) if np.ndim(a) else float(a),
        direct_defaults=direct,
        total_defaults=len(failed),
        defaulted_ids=tuple(ids[k] for k in failed),
        direct_ids=direct_ids,
        final_delta_r=traj.final_delta_r,
        converged=traj.converged,
        iterations_used=traj.iterations_used,
        final_equity=traj.final,
    )


def shock_grid(start: float, stop: float, step: float) -> np.ndarray:
    """Closed grid ``start, start + step, ..., stop``.

    Points are computed as ``start + k * step`` and rounded to 12 decimals so
    that grids such as 0:0.1:0.005 hit their end points exactly.
    """
    if not step > 0:
        raise ValueError(f"shock step must be positive, got {step!r}")
    if stop < start:
        raise ValueError(f"shock grid stop {stop!r} is below start {start!r}")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(count), 12)


@dataclass
class SweepSpec:
    """Cartesian sweep over shocks and model parameters.

    ``params`` maps a tunable parameter name of ``model`` to the list of values
    to try; an empty mapping runs the template model alone.
    """

    network: FinancialNetwork
    model: ValuationModel
    shocks: list[float]
    params: dict[str, list] = field(default_factory=dict)
    config: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        self.shocks = [float(a) for a in np.atleast_1d(self.shocks)]
        if not self.shocks:
            raise ValueError("shock grid is empty")
        allowed = TUNABLE[self.model.variant]
        for name, values in self.params.items():
            if name not in allowed:
                raise ModelError(
                    f"unknown parameter {name!r} for {self.model.variant}; "
                    f"tunable: {', '.join(allowed) or 'none'}"
                )
            if len(values) == 0:
                raise ValueError(f"parameter grid for {name!r} is empty")

    def combinations(self) -> list[dict]:
        names = list(self.params)
        return [dict(zip(names, vals))
                for vals in itertools.product(*(self.params[n] for n in names))]


@dataclass(frozen=True)
class SweepRow:
    shock: float
    params: dict
    result: ScenarioResult

    @property
    def param_name(self) -> str:
        return ";".join(self.params)

    @property
    def param_value(self) -> str:
        return ";".join(repr(float(v)) for v in self.params.values())


def sweep(spec: SweepSpec, max_workers: int | None = None) -> list[SweepRow]:
    """One row per (shock, parameter combination), shocks outermost.

    Rows may be computed on a thread pool; the output order is always the
    grid order.
    """
    combos = spec.combinations()
    # Build (and validate) every model before any scenario runs.
    models = [spec.model.with_params(**c) if c else spec.model for c in combos]
    jobs = [(a, c, m) for a in spec.shocks for c, m in zip(combos, models)]

    def run(job):
        a, combo, model = job
        return SweepRow(a, combo, run_scenario(spec.network, model, a, spec.config))

    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(run, jobs))
    return [run(job) for job in jobs]


def envelope(rows) -> dict[float, tuple[int, int]]:
    """Per shock, the maximum total and indirect default counts over parameters."""
    rows = list(rows)
    if not rows:
        raise ValueError("cannot take the envelope of an empty table")
    out: dict[float, tuple[int, int]] = {}
    for row in rows:
        res = row.result
        tot, ind = out.get(row.shock, (-1, -1))
        out[row.shock] = (max(tot, res.total_defaults), max(ind, res.indirect_defaults))
    return dict(sorted(out.items()))


def curve(rows, **params) -> tuple[np.ndarray, np.ndarray]:
    """Shocks and total defaults of the rows matching ``params``."""
    sel = [r for r in rows if all(r.params.get(k) == v for k, v in params.items())]
    sel.sort(key=lambda r: r.shock)
    return (np.array([r.shock for r in sel]),
            np.array([r.result.total_defaults for r in sel], dtype=int))


def critical_points(shocks, defaults, k: int = 1) -> list[float]:
    """Shocks at which the default count rises by at least ``k`` over the
    previous grid point."""
    shocks = list(shocks)
    defaults = list(defaults)
    if len(shocks) != len(defaults):
        raise ValueError("shocks and defaults differ in length")
    return [shocks[i] for i in range(1, len(shocks)) if defaults[i] - defaults[i - 1] >= k]


def first_shock_reaching(shocks, defaults, k: int) -> float | None:
    for a, d in zip(shocks, defaults):
        if d >= k:
            return float(a)
    return None


def direct_defaults(network: FinancialNetwork, a) -> int:
    """Defaults caused by the shock alone, before any revaluation."""
    return int(np.count_nonzero(book_equity(apply_shock(network, a)) <= 0))
