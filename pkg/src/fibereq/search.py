"""Preset topology catalog and budget-constrained hyper-parameter search.

The catalog holds, for each of the five architectures, one unconstrained
"best" configuration plus six budget tiers spanning 1e3..1e8 multiplications
per symbol, together with their nominal two-significant-figure complexity
labels. ``search`` offers a reproducible uniform-random strategy and a
Gaussian-process surrogate with expected-improvement acquisition (a compact
stand-in for a full Bayesian-optimization package, not a reproduction of
one); candidates violating the budget are resampled before evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .complexity import DEFAULT_BUDGET_TOLERANCE, rmps
from .topologies import (
    BiLstmSpec,
    CnnBiLstmSpec,
    CnnMlpSpec,
    EsnSpec,
    MlpSpec,
    TopologySpec,
)

__all__ = [
    "PRESET_TIERS",
    "BUDGET_TIERS",
    "preset_topologies",
    "preset",
    "DEFAULT_SEARCH_SPACE",
    "FAMILY_PARAMS",
    "spec_from_params",
    "Trial",
    "SearchResult",
    "search",
]

# tier -> family -> (spec, nominal complexity label)
PRESET_TIERS: dict = {
    "best": {
        "cnn_bilstm": (CnnBiLstmSpec(244, 10, 226), "2.7E+07"),
        "bilstm": (BiLstmSpec(226), "1.7E+07"),
        "esn": (EsnSpec(88, 0.18), "8.6E+04"),
        "cnn_mlp": (CnnMlpSpec(470, 10, 456, 467), "7.7E+06"),
        "mlp": (MlpSpec(149, 132, 596), "1.2E+05"),
    },
    "topology1": {
        "cnn_bilstm": (CnnBiLstmSpec(1, 10, 1), "2.1E+03"),
        "bilstm": (BiLstmSpec(1), "2.0E+03"),
        "esn": (EsnSpec(6, 0.18), "2.2E+03"),
        "cnn_mlp": (CnnMlpSpec(2, 5, 10, 10), "2.3E+03"),
        "mlp": (MlpSpec(10, 10, 25), "2.0E+03"),
    },
    "topology2": {
        "cnn_bilstm": (CnnBiLstmSpec(5, 10, 3), "1.3E+04"),
        "bilstm": (BiLstmSpec(4), "1.2E+04"),
        "esn": (EsnSpec(22, 0.18), "1.1E+04"),
        "cnn_mlp": (CnnMlpSpec(9, 5, 12, 30), "1.1E+04"),
        "mlp": (MlpSpec(40, 40, 80), "1.1E+04"),
    },
    "topology3": {
        "cnn_bilstm": (CnnBiLstmSpec(20, 10, 10), "1.1E+05"),
        "bilstm": (BiLstmSpec(16), "1.1E+05"),
        "esn": (EsnSpec(100, 0.18), "1.1E+05"),
        "cnn_mlp": (CnnMlpSpec(50, 9, 30, 100), "1.1E+05"),
        "mlp": (MlpSpec(170, 170, 300), "1.1E+05"),
    },
    "topology4": {
        "cnn_bilstm": (CnnBiLstmSpec(50, 10, 41), "1.0E+06"),
        "bilstm": (BiLstmSpec(53), "1.0E+06"),
        "esn": (EsnSpec(350, 0.18), "1.0E+06"),
        "cnn_mlp": (CnnMlpSpec(300, 10, 70, 200), "1.1E+06"),
        "mlp": (MlpSpec(600, 600, 900), "1.0E+06"),
    },
    "topology5": {
        "cnn_bilstm": (CnnBiLstmSpec(244, 10, 108), "1.0E+07"),
        "bilstm": (BiLstmSpec(172), "1.0E+07"),
        "esn": (EsnSpec(1150, 0.18), "1.0E+07"),
        "cnn_mlp": (CnnMlpSpec(600, 12, 500, 500), "1.0E+07"),
        "mlp": (MlpSpec(2100, 2100, 2500), "1.0E+07"),
    },
    "topology6": {
        "cnn_bilstm": (CnnBiLstmSpec(400, 10, 455), "1.0E+08"),
        "bilstm": (BiLstmSpec(550), "1.0E+08"),
        "esn": (EsnSpec(3660, 0.18), "1.0E+08"),
        "cnn_mlp": (CnnMlpSpec(1000, 10, 2900, 2200), "1.0E+08"),
        "mlp": (MlpSpec(7050, 7050, 7000), "1.0E+08"),
    },
}

# Complexity-budget decade -> catalog tier trained under that constraint.
BUDGET_TIERS = {
    1e3: "topology1", 1e4: "topology2", 1e5: "topology3",
    1e6: "topology4", 1e7: "topology5", 1e8: "topology6",
}

ARCHITECTURES = ("mlp", "bilstm", "esn", "cnn_mlp", "cnn_bilstm")


def preset_topologies() -> list:
    """All catalog entries as (label, spec) with labels like ``best/mlp``."""
    out = []
    for tier, row in PRESET_TIERS.items():
        for family, (spec, _) in row.items():
            out.append((f"{tier}/{family}", spec))
    return out


def preset(tier: str, family: str) -> TopologySpec:
    try:
        return PRESET_TIERS[tier][family][0]
    except KeyError:
        raise KeyError(f"no preset {tier}/{family}") from None


# hyper-parameter ranges: name -> (low, high, is_integer)
DEFAULT_SEARCH_SPACE = {
    "n_neighbors": (1, 50, True),
    "filters": (1, 1000, True),
    "kernel_size": (1, 20, True),
    "hidden_units": (1, 1000, True),
    "hidden1": (1, 1000, True),
    "hidden2": (1, 1000, True),
    "hidden3": (1, 1000, True),
    "reservoir_size": (1, 1000, True),
    "sparsity": (0.0, 1.0, False),
    "leak_rate": (0.0, 1.0, False),
    "spectral_radius": (0.0, 1.0, False),
}

FAMILY_PARAMS = {
    "mlp": ("n_neighbors", "hidden1", "hidden2", "hidden3"),
    "bilstm": ("n_neighbors", "hidden_units"),
    "esn": ("n_neighbors", "reservoir_size", "sparsity", "leak_rate", "spectral_radius"),
    "cnn_mlp": ("n_neighbors", "filters", "kernel_size", "hidden1", "hidden2"),
    "cnn_bilstm": ("n_neighbors", "filters", "kernel_size", "hidden_units"),
}


def family_space(family: str, space: dict | None = None) -> dict:
    space = space or DEFAULT_SEARCH_SPACE
    return {k: space[k] for k in FAMILY_PARAMS[family]}


def spec_from_params(family: str, params: dict) -> TopologySpec:
    """Build a topology from sampled hyper-parameters."""
    p = dict(params)
    window = 2 * int(p.pop("n_neighbors", 20)) + 1
    if family == "mlp":
        return MlpSpec(p["hidden1"], p["hidden2"], p["hidden3"], window_symbols=window)
    if family == "bilstm":
        return BiLstmSpec(p["hidden_units"], window_symbols=window)
    if family == "esn":
        return EsnSpec(
            p["reservoir_size"], p["sparsity"], p["leak_rate"],
            p["spectral_radius"], window_symbols=window,
        )
    if family == "cnn_mlp":
        kernel = min(p["kernel_size"], window)
        return CnnMlpSpec(p["filters"], kernel, p["hidden1"], p["hidden2"],
                          window_symbols=window)
    if family == "cnn_bilstm":
        kernel = min(p["kernel_size"], window)
        return CnnBiLstmSpec(p["filters"], kernel, p["hidden_units"],
                             window_symbols=window)
    raise ValueError(f"unknown family {family!r}")


@dataclass
class Trial:
    params: dict
    spec: TopologySpec | None
    rmps: int
    score: float
    seed: int
    epochs_used: int


@dataclass
class SearchResult:
    best: Trial
    history: list = field(default_factory=list)


class EmptyFeasibleRegion(RuntimeError):
    """No candidate within the budget was found after many attempts."""


def _sample(space: dict, rng: np.random.Generator) -> dict:
    out = {}
    for name, (lo, hi, is_int) in space.items():
        if is_int:
            out[name] = int(rng.integers(lo, hi + 1))
        else:
            out[name] = float(rng.uniform(lo, hi))
    return out


def _to_unit(params: dict, space: dict) -> np.ndarray:
    vec = []
    for name, (lo, hi, _) in space.items():
        vec.append((params[name] - lo) / (hi - lo) if hi > lo else 0.0)
    return np.asarray(vec)


def _feasible_sample(space, rng, spec_builder, budget, tolerance, max_attempts=20000):
    for _ in range(max_attempts):
        params = _sample(space, rng)
        spec = spec_builder(params) if spec_builder else None
        cost = rmps(spec).total if spec is not None else 0
        if budget is None or spec is None or cost <= budget * tolerance:
            return params, spec, cost
    raise EmptyFeasibleRegion(
        f"no spec within {tolerance:.2f} x budget {budget:g} after {max_attempts} samples"
    )


def _gp_posterior(x_obs: np.ndarray, y_obs: np.ndarray, x_query: np.ndarray,
                  length_scale: float = 0.2, noise: float = 1e-8):
    """RBF-kernel GP regression on standardized observations."""
    y_mean = y_obs.mean()
    y_std = y_obs.std()
    if y_std == 0:
        y_std = 1.0
    y = (y_obs - y_mean) / y_std

    def kern(a, b):
        d2 = np.sum((a[:, None, :] - b[None, :, :]) ** 2, axis=2)
        return np.exp(-0.5 * d2 / length_scale**2)

    k_oo = kern(x_obs, x_obs) + noise * np.eye(len(x_obs))
    k_oq = kern(x_obs, x_query)
    chol = np.linalg.cholesky(k_oo)
    alpha = np.linalg.solve(chol.T, np.linalg.solve(chol, y))
    mu = k_oq.T @ alpha
    v = np.linalg.solve(chol, k_oq)
    var = np.clip(1.0 - np.sum(v**2, axis=0), 1e-12, None)
    return mu * y_std + y_mean, np.sqrt(var) * y_std


def _expected_improvement(mu, sigma, best, xi=0.01):
    gap = mu - best - xi
    z = gap / sigma
    return gap * norm.cdf(z) + sigma * norm.pdf(z)


def search(
    objective,
    space: dict,
    n_trials: int,
    seed: int = 0,
    strategy: str = "random",
    budget: float | None = None,
    budget_tolerance: float = DEFAULT_BUDGET_TOLERANCE,
    spec_builder=None,
    n_init: int = 8,
    candidate_pool: int = 256,
) -> SearchResult:
    """Maximize ``objective`` over a box of hyper-parameters.

    ``objective(spec_or_params, trial_seed)`` returns a score (higher is
    better) or a (score, epochs_used) pair; it receives the built spec when
    ``spec_builder`` is given, else the raw parameter dict. The ``random``
    strategy samples uniformly; ``surrogate`` spends ``n_init`` random
    trials, then picks the expected-improvement maximizer over a fresh
    random candidate pool each round. Both are bit-reproducible given the
    seed, and share their prefix: the first ``n_init`` surrogate trials
    coincide with the random strategy's.
    """
    if strategy not in ("random", "surrogate"):
        raise ValueError("strategy must be 'random' or 'surrogate'")
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    rng = np.random.Generator(np.random.MT19937(seed))
    history: list[Trial] = []

    def run_trial(params, spec, cost, trial_idx):
        target = spec if spec_builder else params
        result = objective(target, seed + trial_idx)
        score, epochs = result if isinstance(result, tuple) else (result, 0)
        trial = Trial(params=params, spec=spec, rmps=int(cost), score=float(score),
                      seed=seed + trial_idx, epochs_used=int(epochs))
        history.append(trial)

    for i in range(min(n_init, n_trials) if strategy == "surrogate" else n_trials):
        params, spec, cost = _feasible_sample(space, rng, spec_builder, budget, budget_tolerance)
        run_trial(params, spec, cost, i)

    if strategy == "surrogate":
        while len(history) < n_trials:
            x_obs = np.array([_to_unit(t.params, space) for t in history])
            y_obs = np.array([t.score for t in history])
            cands = [
                _feasible_sample(space, rng, spec_builder, budget, budget_tolerance)
                for _ in range(candidate_pool)
            ]
            x_query = np.array([_to_unit(c[0], space) for c in cands])
            mu, sigma = _gp_posterior(x_obs, y_obs, x_query)
            ei = _expected_improvement(mu, sigma, y_obs.max())
            pick = int(np.argmax(ei))
            run_trial(*cands[pick], len(history))

    best = max(history, key=lambda t: t.score)
    return SearchResult(best=best, history=history)
