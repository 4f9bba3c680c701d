import numpy as np

from nevarisk import FinancialNetwork


def two_bank(ext_assets=100.0, ext_liab=80.0, holding=20.0):
    """Symmetric pair; each bank holds ``holding`` of the other's debt."""
    return FinancialNetwork.from_arrays(
        [[0.0, holding], [holding, 0.0]], [ext_assets] * 2, [ext_liab] * 2, ids=["A", "B"]
    )


def random_network(rng, n, density=0.6, integer=False, capital=(0.02, 0.3),
                   internal_scale=30.0):
    """Solvent random network with positive book equity everywhere."""
    mask = rng.random((n, n)) < density
    np.fill_diagonal(mask, False)
    amounts = rng.lognormal(0.0, 1.0, size=(n, n)) * internal_scale / max(n, 1)
    holdings = np.where(mask, amounts, 0.0)
    ext_assets = rng.uniform(50.0, 150.0, size=n)
    if integer:
        holdings = np.round(holdings)
        ext_assets = np.round(ext_assets)
    held = holdings.sum(axis=1)
    owed = holdings.sum(axis=0)
    total = ext_assets + held
    kappa = rng.uniform(*capital, size=n)
    # Raise external assets where internal debt leaves no room for equity.
    need = owed / (1 - kappa) * 1.05 - total
    ext_assets = ext_assets + np.maximum(need, 0.0)
    if integer:
        ext_assets = np.ceil(ext_assets)
    total = ext_assets + held
    ext_liab = total * (1 - kappa) - owed
    if integer:
        ext_liab = np.floor(ext_liab)
    return FinancialNetwork.from_arrays(holdings, ext_assets, ext_liab)


def random_state_equities(rng, E0, count):
    """Equity vectors spread over [-1.5, 1.5] * E0, including negatives."""
    return rng.uniform(-1.5, 1.5, size=(count, len(E0))) * E0
