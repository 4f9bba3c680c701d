"""Valuation functions for internal and external assets.

Four families are provided:

``linear-dr``
    Linear DebtRank, ``V_ij = min(E_j+ / E_j(0), 1)`` and ``V_e = 1``.
``recovery-dr``
    DebtRank with a dynamic recovery term,
    ``V_ij = min(alpha E_j+ / E_j(0) + beta A_j+ / A_j(0), 1)``.
``reduced-form``
    Duffie-Singleton style discounting ``V_ij = exp(-s_j tau)`` with a spread
    driven by the issuer's equity (hazard) and assets (recovery).
``ir-feedback``
    As ``reduced-form`` plus a system-wide rate increment ``dr`` driven by
    aggregate equity and assets, ``V_ij = exp(-(dr + s_j) tau)`` and
    ``V_e = exp(-dr tau)``.

Models must be calibrated (:func:`calibrate`) before evaluation, which pins
every valuation to 1 at the initial state.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace

import numpy as np

from .network import FinancialNetwork, book_equity, current_assets

LINEAR_DR = "linear-dr"
RECOVERY_DR = "recovery-dr"
REDUCED_FORM = "reduced-form"
IR_FEEDBACK = "ir-feedback"
VARIANTS = (LINEAR_DR, RECOVERY_DR, REDUCED_FORM, IR_FEEDBACK)

# Parameters a user may set (and sweep) for each variant.
TUNABLE = {
    LINEAR_DR: (),
    RECOVERY_DR: ("alpha",),
    REDUCED_FORM: ("gamma", "beta", "tau"),
    IR_FEEDBACK: ("gamma", "beta", "tau", "gamma_sys", "beta_sys"),
}

_ALIASES = {
    "linear": LINEAR_DR, "lineardr": LINEAR_DR, "linear_dr": LINEAR_DR,
    "debtrank": LINEAR_DR,
    "recovery": RECOVERY_DR, "recoverydr": RECOVERY_DR, "recovery_dr": RECOVERY_DR,
    "reducedform": REDUCED_FORM, "reduced_form": REDUCED_FORM, "rf": REDUCED_FORM,
    "irfeedback": IR_FEEDBACK, "ir_feedback": IR_FEEDBACK, "ir": IR_FEEDBACK,
}


class ModelError(ValueError):
    """Invalid model parameters or use of an uncalibrated model."""


class DegenerateInstitutionError(ModelError):
    """An institution has non-positive initial equity or assets."""


def normalize_variant(name: str) -> str:
    key = str(name).strip().lower()
    if key in VARIANTS:
        return key
    try:
        return _ALIASES[key.replace("-", "_")]
    except KeyError:
        raise ModelError(
            f"unknown model variant {name!r}; expected one of {', '.join(VARIANTS)}"
        ) from None


def _param(value):
    arr = np.array(value, dtype=np.float64)
    if arr.ndim > 1:
        raise ModelError("parameters must be scalars or 1-D per-institution arrays")
    if arr.ndim == 0:
        return float(arr)
    arr.setflags(write=False)
    return arr


def _check_range(name, value, lo, hi, lo_open=False):
    arr = np.asarray(value)
    ok = np.all(np.isfinite(arr)) if np.isfinite(hi) else not np.any(np.isnan(arr))
    ok = ok and (np.all(arr > lo) if lo_open else np.all(arr >= lo)) and np.all(arr <= hi)
    if not ok:
        bracket = "(" if lo_open else "["
        raise ModelError(f"{name} must lie in {bracket}{lo}, {hi}], got {value!r}")


@dataclass(frozen=True, eq=False)
class ValuationModel:
    """A valuation-function family with its parameters.

    Per-institution parameters (``alpha``, ``beta``, ``gamma``) may be scalars
    or length-N arrays. ``gamma_sys`` and ``beta_sys`` are the system-level
    scale and recovery parameters of the rate feedback; ``alpha_sys`` is the
    system-level counterpart of ``alpha`` and is fixed to 1 by calibration.

    For ``recovery-dr``, ``alpha`` weights the equity ratio and ``beta`` the
    asset ratio. For the reduced-form variants, ``alpha`` sets how strongly
    the hazard rate depends on equity and ``beta`` scales recovery.
    """

    variant: str
    alpha: float | np.ndarray = 1.0
    beta: float | np.ndarray = 0.0
    gamma: float | np.ndarray = 1.0
    tau: float = 1.0
    gamma_sys: float = 0.0
    beta_sys: float = 0.0
    alpha_sys: float = 1.0
    calibrated: bool = field(default=False)

    def __post_init__(self):
        object.__setattr__(self, "variant", normalize_variant(self.variant))
        for name in ("alpha", "beta", "gamma"):
            object.__setattr__(self, name, _param(getattr(self, name)))
        for name in ("tau", "gamma_sys", "beta_sys", "alpha_sys"):
            val = np.asarray(getattr(self, name), dtype=np.float64)
            if val.ndim != 0:
                raise ModelError(f"{name} must be a scalar")
            object.__setattr__(self, name, float(val))
        _check_range("alpha", self.alpha, 0.0, 1.0)
        _check_range("beta", self.beta, 0.0, 1.0)
        _check_range("alpha_sys", self.alpha_sys, 0.0, 1.0)
        _check_range("beta_sys", self.beta_sys, 0.0, 1.0)
        if self.variant in (REDUCED_FORM, IR_FEEDBACK):
            _check_range("gamma", self.gamma, 0.0, np.inf, lo_open=True)
            _check_range("tau", self.tau, 0.0, np.inf, lo_open=True)
        if self.variant == IR_FEEDBACK:
            _check_range("gamma_sys", self.gamma_sys, 0.0, np.inf)

    def __eq__(self, other):
        if not isinstance(other, ValuationModel):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, f.name), getattr(other, f.name))
            for f in fields(self)
        )

    __hash__ = None

    @property
    def has_rate_feedback(self) -> bool:
        return self.variant == IR_FEEDBACK

    def with_params(self, **params) -> "ValuationModel":
        """Copy with parameters replaced; calibrated models are recalibrated."""
        allowed = set(TUNABLE[self.variant])
        unknown = sorted(set(params) - allowed)
        if unknown:
            raise ModelError(
                f"{self.variant} has no parameter(s) {', '.join(unknown)}; "
                f"tunable: {', '.join(TUNABLE[self.variant]) or 'none'}"
            )
        out = replace(self, calibrated=False, **params)
        return calibrate(out) if self.calibrated else out

    def params(self) -> dict:
        return {name: getattr(self, name) for name in TUNABLE[self.variant]}

    def valuate(self, state: "SystemState") -> tuple[np.ndarray, float]:
        """Internal valuation per issuer and the common external valuation."""
        return internal_values(self, state), value_external(self, state)


def calibrate(model: ValuationModel) -> ValuationModel:
    """Fix the parameters that make every valuation equal 1 at t = 0.

    Recovery DebtRank gets ``beta = 1 - alpha``; the reduced-form variants get
    ``alpha = alpha_sys = 1``. Linear DebtRank needs no change.
    """
    if model.variant == RECOVERY_DR:
        alpha = model.alpha
        beta = 1.0 - alpha
        if isinstance(beta, np.ndarray):
            beta = beta.copy()
        return replace(model, beta=beta, calibrated=True)
    if model.variant in (REDUCED_FORM, IR_FEEDBACK):
        alpha = 1.0 if np.ndim(model.alpha) == 0 else np.ones_like(model.alpha)
        return replace(model, alpha=alpha, alpha_sys=1.0, calibrated=True)
    return replace(model, calibrated=True)


def linear_debtrank() -> ValuationModel:
    return calibrate(ValuationModel(LINEAR_DR))


def recovery_debtrank(alpha=0.5) -> ValuationModel:
    return calibrate(ValuationModel(RECOVERY_DR, alpha=alpha))


def reduced_form(gamma=1.0, beta=0.5, tau=1.0) -> ValuationModel:
    return calibrate(ValuationModel(REDUCED_FORM, gamma=gamma, beta=beta, tau=tau))


def ir_feedback(gamma=20.0, beta=0.5, gamma_sys=0.05, beta_sys=0.5, tau=1.0) -> ValuationModel:
    return calibrate(ValuationModel(
        IR_FEEDBACK, gamma=gamma, beta=beta, tau=tau,
        gamma_sys=gamma_sys, beta_sys=beta_sys,
    ))


@dataclass(frozen=True, eq=False)
class SystemState:
    """Equities and assets now and at t = 0, plus the current rate change."""

    E: np.ndarray
    E0: np.ndarray
    A: np.ndarray
    A0: np.ndarray
    delta_r: float = 0.0

    @property
    def n(self) -> int:
        return len(self.E)

    @property
    def default_probability(self) -> np.ndarray:
        """DebtRank-style distress ``1 - min(E+, E0) / E0``."""
        return 1.0 - np.minimum(np.maximum(self.E, 0.0), self.E0) / self.E0


def system_state(network: FinancialNetwork, model: ValuationModel | None, E,
                 E0=None, A0=None) -> SystemState:
    """Build the state for equities ``E`` on ``network``.

    ``E0`` defaults to the book equity of ``network``; pass the unshocked
    values explicitly when ``network`` has been shocked. ``A`` and ``A0`` are
    equity plus face-value liabilities. The rate change is computed from
    ``model`` (0 when ``model`` is None or has no rate feedback).
    """
    E = np.asarray(E, dtype=np.float64)
    E0 = book_equity(network) if E0 is None else np.asarray(E0, dtype=np.float64)
    A0 = current_assets(network, E0) if A0 is None else np.asarray(A0, dtype=np.float64)
    state = SystemState(E, E0, current_assets(network, E), A0, 0.0)
    if model is not None and model.has_rate_feedback:
        state = replace(state, delta_r=delta_r(model, state))
    return state


def _per_institution(model, name, n):
    value = getattr(model, name)
    try:
        return np.broadcast_to(value, (n,))
    except ValueError:
        raise ModelError(
            f"{name} has length {np.size(value)}, network has {n} institutions"
        ) from None


def _require_calibrated(model):
    if not model.calibrated:
        raise ModelError(f"{model.variant} model must be calibrated before evaluation")


def _check_initial(state, needs_assets):
    bad = np.nonzero(~(state.E0 > 0))[0]
    if bad.size:
        raise DegenerateInstitutionError(
            f"initial equity must be positive; institutions {bad.tolist()} have "
            f"E0 = {state.E0[bad].tolist()}"
        )
    if needs_assets:
        bad = np.nonzero(~(state.A0 > 0))[0]
        if bad.size:
            raise DegenerateInstitutionError(
                f"initial assets must be positive; institutions {bad.tolist()}"
            )


def _decline(weight, current, initial):
    """``1 - w * min(x+, x0 / w) / x0``, which is 1 when ``w == 0``."""
    w = np.asarray(weight, dtype=np.float64)
    x = np.maximum(current, 0.0)
    safe_w = np.where(w > 0, w, 1.0)
    with np.errstate(over="ignore"):
        cap = np.where(w > 0, initial / safe_w, np.inf)
    return 1.0 - w * np.minimum(x, cap) / initial


def spreads(model: ValuationModel, state: SystemState) -> np.ndarray:
    """Credit spread of every issuer; zeros for the DebtRank variants."""
    _require_calibrated(model)
    if model.variant not in (REDUCED_FORM, IR_FEEDBACK):
        return np.zeros(state.n)
    _check_initial(state, needs_assets=True)
    n = state.n
    gamma = _per_institution(model, "gamma", n)
    hazard = _decline(_per_institution(model, "alpha", n), state.E, state.E0)
    loss = _decline(_per_institution(model, "beta", n), state.A, state.A0)
    return np.maximum(gamma * hazard * loss, 0.0)


def spread(model: ValuationModel, j: int, state: SystemState) -> float:
    if model.variant not in (REDUCED_FORM, IR_FEEDBACK):
        raise ModelError(f"{model.variant} has no credit spread")
    return float(spreads(model, state)[j])


def delta_r(model: ValuationModel, state: SystemState) -> float:
    """System-wide rate increment from aggregate equity and assets."""
    _require_calibrated(model)
    if not model.has_rate_feedback:
        return 0.0
    e_pos = np.maximum(state.E, 0.0).sum()
    a_pos = np.maximum(state.A, 0.0).sum()
    e0 = np.abs(state.E0).sum()
    a0 = np.abs(state.A0).sum()
    if not (e0 > 0 and a0 > 0):
        raise DegenerateInstitutionError("aggregate initial equity and assets must be positive")
    hazard = _decline(model.alpha_sys, e_pos, e0)
    loss = _decline(model.beta_sys, a_pos, a0)
    return float(max(model.gamma_sys * hazard * loss, 0.0))


def internal_values(model: ValuationModel, state: SystemState) -> np.ndarray:
    """Valuation factor in [0, 1] of instruments issued by each institution."""
    _require_calibrated(model)
    n = state.n
    if model.variant == LINEAR_DR:
        _check_initial(state, needs_assets=False)
        v = np.minimum(np.maximum(state.E, 0.0) / state.E0, 1.0)
    elif model.variant == RECOVERY_DR:
        _check_initial(state, needs_assets=True)
        alpha = _per_institution(model, "alpha", n)
        beta = _per_institution(model, "beta", n)
        v = np.minimum(
            alpha * (np.maximum(state.E, 0.0) / state.E0)
            + beta * (np.maximum(state.A, 0.0) / state.A0),
            1.0,
        )
    else:
        rate = spreads(model, state)
        if model.has_rate_feedback:
            rate = state.delta_r + rate
        v = np.exp(-rate * model.tau)
    return np.clip(v, 0.0, 1.0)


def value_internal(model: ValuationModel, j: int, state: SystemState) -> float:
    return float(internal_values(model, state)[j])


def value_external(model: ValuationModel, state: SystemState) -> float:
    _require_calibrated(model)
    if not model.has_rate_feedback:
        return 1.0
    return float(np.clip(np.exp(-state.delta_r * model.tau), 0.0, 1.0))


@dataclass
class FeasibilityReport:
    feasible: bool
    pairs_checked: int
    violation: str | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __bool__(self):
        return self.feasible


def check_feasibility(model, network: FinancialNetwork, *, levels=(-1.5, -0.5, 0.0, 0.25,
                      0.5, 0.75, 1.0, 1.5), n_random: int = 64, seed: int = 0) -> FeasibilityReport:
    """Probe a valuation for range [0, 1] and monotonicity in equity.

    ``model`` is anything with a ``valuate(state)`` method returning
    ``(internal_values, external_value)``. Probe states are built on
    ``network``: uniform scalings ``E = level * E0`` for each entry of
    ``levels``, plus ``n_random`` seeded random equity vectors. Each probe is
    paired with copies raised in one coordinate at a time (and in all
    coordinates) and the valuation must not decrease from lower to upper.
    """
    E0 = book_equity(network)
    n = network.n
    rng = np.random.default_rng(seed)
    bases = [lvl * E0 for lvl in levels]
    bases += list(rng.uniform(-1.5, 1.5, size=(n_random, n)) * E0)
    scale = np.abs(E0)
    checked = 0

    # Only real models feed the rate change into the state.
    model_for_state = model if isinstance(model, ValuationModel) else None

    def evaluate(E):
        v_int, v_ext = model.valuate(system_state(network, model_for_state, E, E0))
        return np.atleast_1d(np.asarray(v_int, dtype=np.float64)), float(v_ext)

    for lo in bases:
        steps = [np.eye(n)[k] * scale[k] * 0.3 for k in range(n)] + [scale * 0.1]
        v_lo = evaluate(lo)
        for step in steps:
            hi = lo + step
            v_hi = evaluate(hi)
            checked += 1
            for vals, tag in ((v_lo, "lower"), (v_hi, "upper")):
                arr = np.append(vals[0], vals[1])
                if np.any(~np.isfinite(arr)) or np.any(arr < 0) or np.any(arr > 1):
                    return FeasibilityReport(
                        False, checked, f"valuation outside [0, 1] at {tag} state", lo, hi
                    )
            if np.any(v_hi[0] < v_lo[0]) or v_hi[1] < v_lo[1]:
                return FeasibilityReport(
                    False, checked, "valuation decreases when equity increases", lo, hi
                )
    return FeasibilityReport(True, checked)
