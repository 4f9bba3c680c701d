"""NEVA equity map and its Picard fixed-point iteration."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .network import FinancialNetwork, _equity_at, book_equity, current_assets
from .valuation import ValuationModel, system_state


class ConvergenceError(RuntimeError):
    """Raised by :meth:`Trajectory.raise_if_failed` for non-converged runs."""


@dataclass(frozen=True)
class SolverConfig:
    """Stopping rule for the Picard iteration.

    ``epsilon`` is an absolute tolerance on the largest equity change between
    consecutive iterates. When None it defaults to ``rel_epsilon`` times the
    total initial equity of the unshocked network.
    """

    epsilon: float | None = None
    max_iterations: int = 100_000
    record_trajectory: bool = True
    rel_epsilon: float = 1e-9

    def __post_init__(self):
        if self.epsilon is not None and not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon!r}")
        if not self.rel_epsilon > 0:
            raise ValueError(f"rel_epsilon must be positive, got {self.rel_epsilon!r}")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ValueError(f"max_iterations must be a positive integer, got {self.max_iterations!r}")

    def tolerance(self, E0) -> float:
        if self.epsilon is not None:
            return float(self.epsilon)
        scale = float(np.abs(E0).sum())
        # An all-zero network still needs a positive tolerance.
        return self.rel_epsilon * scale if scale > 0 else self.rel_epsilon


@dataclass
class Trajectory:
    iterates: list[np.ndarray]
    final_delta_r: float
    iterations_used: int
    converged: bool
    monotone: bool
    epsilon: float
    last_step: float = field(default=np.inf)

    @property
    def initial(self) -> np.ndarray:
        return self.iterates[0]

    @property
    def final(self) -> np.ndarray:
        return self.iterates[-1]

    def raise_if_failed(self) -> "Trajectory":
        if not self.converged:
            raise ConvergenceError(
                f"no convergence after {self.iterations_used} iterations "
                f"(last step {self.last_step:.3g}, epsilon {self.epsilon:.3g})"
            )
        return self


def phi_map(network: FinancialNetwork, model: ValuationModel, E, *,
            baseline: FinancialNetwork | None = None) -> np.ndarray:
    """Evaluate the equity map at ``E``.

    ``network`` supplies the (possibly shocked) external assets. Initial
    equities and assets inside the valuations come from ``baseline``, the
    unshocked network, which defaults to ``network`` itself.
    """
    E = np.asarray(E, dtype=np.float64)
    ref = network if baseline is None else baseline
    E0 = book_equity(ref)
    A0 = current_assets(ref, E0)
    return _phi(network, model, E, E0, A0)[0]


def _phi(network, model, E, E0, A0):
    state = system_state(network, model, E, E0, A0)
    v_int, v_ext = model.valuate(state)
    return _equity_at(network, v_ext, v_int), state.delta_r


def solve_fixed_point(network: FinancialNetwork, shocked: FinancialNetwork,
                      model: ValuationModel, config: SolverConfig | None = None) -> Trajectory:
    """Run ``E(k+1) = phi(E(k))`` from the post-shock book equity.

    Starting at the upper bound makes the sequence nonincreasing and selects
    the greatest fixed point. Iteration stops once the sup-norm of the step
    drops below epsilon or ``max_iterations`` maps have been applied; the
    latter is reported through ``converged = False``.
    """
    config = SolverConfig() if config is None else config
    if shocked.n != network.n:
        raise ValueError("shocked network has a different number of institutions")
    E0 = book_equity(network)
    A0 = current_assets(network, E0)
    eps = config.tolerance(E0)

    E = book_equity(shocked)
    iterates = [E]
    monotone = True
    converged = False
    step = np.inf
    k = 0
    while k < config.max_iterations:
        E_next = _phi(shocked, model, E, E0, A0)[0]
        k += 1
        if np.any(E_next > E):
            monotone = False
        step = float(np.max(np.abs(E_next - E))) if E.size else 0.0
        if config.record_trajectory:
            iterates.append(E_next)
        E = E_next
        if step < eps:
            converged = True
            break
    if not config.record_trajectory:
        iterates.append(E)
    # Rate change at the reported equities, not at the previous iterate.
    dr = system_state(shocked, model, E, E0, A0).delta_r
    return Trajectory(iterates, float(dr), k, converged, monotone, eps, step)
