"""Balance-sheet model of a network of financial institutions.

A network stores, for N institutions, the matrix of internal holdings
(``internal_assets[i, j]`` is the face value of instruments issued by ``j``
and held by ``i``) together with external assets and liabilities.
Internal liabilities are never stored: what ``i`` owes ``j`` is
``internal_assets[j, i]``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np


class NetworkValidationError(ValueError):
    """Raised when a network violates the balance-sheet invariants."""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("invalid network: " + "; ".join(self.violations))


@dataclass(frozen=True)
class Institution:
    id: str
    is_fund: bool = False


@dataclass(frozen=True, eq=False)
class FinancialNetwork:
    """Static balance sheets of N institutions at t = 0.

    Arrays are copied to float64 and made read-only on construction.
    Construction does not validate; call :func:`validate` or
    :meth:`checked` for that.
    """

    institutions: tuple[Institution, ...]
    internal_assets: np.ndarray
    external_assets: np.ndarray
    external_liabilities: np.ndarray

    def __post_init__(self):
        insts = tuple(
            inst if isinstance(inst, Institution) else Institution(str(inst))
            for inst in self.institutions
        )
        object.__setattr__(self, "institutions", insts)
        for name in ("internal_assets", "external_assets", "external_liabilities"):
            arr = np.array(getattr(self, name), dtype=np.float64, copy=True)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_arrays(cls, internal_assets, external_assets, external_liabilities,
                    ids=None, is_fund=None) -> "FinancialNetwork":
        n = len(external_assets)
        ids = [f"I{k}" for k in range(n)] if ids is None else list(ids)
        is_fund = [False] * n if is_fund is None else list(is_fund)
        insts = tuple(Institution(str(i), bool(f)) for i, f in zip(ids, is_fund))
        return cls(insts, internal_assets, external_assets, external_liabilities)

    @property
    def n(self) -> int:
        return len(self.institutions)

    @property
    def ids(self) -> list[str]:
        return [inst.id for inst in self.institutions]

    @property
    def fund_mask(self) -> np.ndarray:
        return np.array([inst.is_fund for inst in self.institutions], dtype=bool)

    @property
    def internal_liabilities(self) -> np.ndarray:
        """``L[i, j]``: amount ``i`` owes ``j``."""
        return self.internal_assets.T

    @property
    def total_liabilities(self) -> np.ndarray:
        return self.external_liabilities + self.internal_assets.sum(axis=0)

    def checked(self) -> "FinancialNetwork":
        problems = validate(self)
        if problems:
            raise NetworkValidationError(problems)
        return self

    def __eq__(self, other):
        if not isinstance(other, FinancialNetwork):
            return NotImplemented
        return (
            self.institutions == other.institutions
            and np.array_equal(self.internal_assets, other.internal_assets)
            and np.array_equal(self.external_assets, other.external_assets)
            and np.array_equal(self.external_liabilities, other.external_liabilities)
        )

    __hash__ = None


def validate(network: FinancialNetwork) -> list[str]:
    """Return a list of human-readable violations; empty means valid."""
    problems = []
    n = network.n
    A = network.internal_assets
    ae = network.external_assets
    le = network.external_liabilities
    if n < 1:
        problems.append("network must contain at least one institution")
    ids = network.ids
    if len(set(ids)) != len(ids):
        dup = sorted({i for i in ids if ids.count(i) > 1})
        problems.append(f"duplicate institution ids: {', '.join(dup)}")
    if A.shape != (n, n):
        problems.append(f"internal_assets has shape {A.shape}, expected ({n}, {n})")
    for name, vec in (("external_assets", ae), ("external_liabilities", le)):
        if vec.shape != (n,):
            problems.append(f"{name} has shape {vec.shape}, expected ({n},)")
    if problems:
        return problems

    for name, arr in (("internal_assets", A), ("external_assets", ae),
                      ("external_liabilities", le)):
        bad = ~np.isfinite(arr)
        for idx in zip(*np.nonzero(bad)):
            problems.append(f"{name}{list(idx)} is not finite")
        neg = np.isfinite(arr) & (arr < 0)
        for idx in zip(*np.nonzero(neg)):
            problems.append(f"{name}{list(idx)} = {arr[idx]!r} is negative")
    for k in np.nonzero(np.diag(A) != 0)[0]:
        problems.append(
            f"internal_assets[{k}][{k}] = {A[k, k]!r}: self-holding on the diagonal"
            f" ({ids[k]})"
        )
    return problems


def _equity_at(network: FinancialNetwork, v_external, v_internal) -> np.ndarray:
    # Shared by book_equity and the NEVA map so both use one evaluation order.
    A = network.internal_assets
    return (
        network.external_assets * v_external
        - network.external_liabilities
        + A @ v_internal
        - A.sum(axis=0)
    )


def book_equity(network: FinancialNetwork) -> np.ndarray:
    """Equity with every asset valued at face value."""
    return _equity_at(network, 1.0, np.ones(network.n))


def current_assets(network: FinancialNetwork, equity) -> np.ndarray:
    """Asset value implied by ``equity`` with liabilities held at face value."""
    equity = np.asarray(equity, dtype=np.float64)
    if equity.shape != (network.n,):
        raise ValueError(f"equity has shape {equity.shape}, expected ({network.n},)")
    return equity + network.total_liabilities


def apply_shock(network: FinancialNetwork, a) -> FinancialNetwork:
    """Scale external assets by ``1 - a``.

    ``a`` is a scalar or a per-institution vector, each entry in [0, 1].
    """
    a_arr = np.asarray(a, dtype=np.float64)
    if a_arr.ndim > 1 or (a_arr.ndim == 1 and a_arr.shape != (network.n,)):
        raise ValueError(f"shock must be a scalar or a length-{network.n} vector")
    if not np.all(np.isfinite(a_arr)) or np.any(a_arr < 0) or np.any(a_arr > 1):
        raise ValueError(f"shock magnitude must lie in [0, 1], got {a!r}")
    return replace(network, external_assets=network.external_assets * (1.0 - a_arr))
