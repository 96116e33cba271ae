"""Parameter proposal strategies: plain random search and a Parzen-style adaptive sampler."""

import math
from typing import Any, Dict, List, Mapping, Sequence

import numpy as np

from src.tuning.space import Choice, Param, sample_params

STRATEGIES = ("random", "adaptive")
GAMMA = 0.25
N_CANDIDATES = 24


def random_sequence(space: Mapping[str, Param], n_trials: int, seed: int) -> List[Dict[str, Any]]:
    """The whole random-search sequence, drawn up front from one generator."""
    rng = np.random.default_rng(seed)
    return [sample_params(space, rng) for _ in range(n_trials)]


def n_startup(n_trials: int) -> int:
    return max(5, n_trials // 4)


class _UnitParzen:
    """Gaussian mixture on [0, 1] with one kernel per observation plus a uniform prior."""

    def __init__(self, points: Sequence[float]):
        self.mus = np.asarray(points, dtype=np.float64)
        n = len(self.mus)
        self.prior_weight = 1.0 / (n + 1)
        if n == 0:
            self.sigmas = np.empty(0)
            return
        order = np.argsort(self.mus, kind="stable")
        padded = np.concatenate([[0.0], self.mus[order], [1.0]])
        gaps = np.maximum(padded[1:-1] - padded[:-2], padded[2:] - padded[1:-1])
        sigmas = np.empty(n)
        sigmas[order] = np.clip(gaps, 1.0 / min(100, n + 1), 1.0)
        self.sigmas = sigmas

    def sample(self, rng: np.random.Generator) -> float:
        pick = rng.random()
        if pick < self.prior_weight or len(self.mus) == 0:
            return float(rng.random())
        i = int(rng.integers(0, len(self.mus)))
        return float(np.clip(rng.normal(self.mus[i], self.sigmas[i]), 0.0, 1.0))

    def log_pdf(self, u: float) -> float:
        density = self.prior_weight
        if len(self.mus):
            z = (u - self.mus) / self.sigmas
            kernels = np.exp(-0.5 * z ** 2) / (self.sigmas * math.sqrt(2 * math.pi))
            density += (1 - self.prior_weight) * float(kernels.mean())
        return math.log(max(density, 1e-300))


class _CategoricalParzen:
    """Smoothed category frequencies (one pseudo-count per option)."""

    def __init__(self, choice: Choice, observed: Sequence[Any]):
        counts = np.ones(len(choice.options))
        for value in observed:
            counts[choice.options.index(value)] += 1
        self.options = choice.options
        self.probs = counts / counts.sum()

    def sample(self, rng: np.random.Generator) -> Any:
        return self.options[int(rng.choice(len(self.options), p=self.probs))]

    def log_pdf(self, value: Any) -> float:
        return math.log(self.probs[self.options.index(value)])


class AdaptiveSampler:
    """Tree-structured Parzen-style proposals.

    The first ``n_startup`` trials are random. Afterwards trials are split into
    the top ``gamma`` quantile by score and the rest; each parameter gets a
    density for both groups, ``n_candidates`` joint draws come from the good
    densities, and the draw with the highest good/bad log-density ratio wins.
    Failed trials (score -inf) always land in the bad group.
    """

    def __init__(self, space: Mapping[str, Param], n_trials: int, seed: int,
                 gamma: float = GAMMA, n_candidates: int = N_CANDIDATES):
        self.space = dict(space)
        self.startup = n_startup(n_trials)
        self.gamma = gamma
        self.n_candidates = n_candidates
        self.rng = np.random.default_rng(seed)

    def propose(self, history: Sequence[Any]) -> Dict[str, Any]:
        """Next parameters given completed trials (objects with ``params`` and ``score``)."""
        if len(history) < self.startup:
            return sample_params(self.space, self.rng)

        ranked = sorted(history, key=lambda t: (-t.score, t.index))
        n_good = max(1, math.ceil(self.gamma * len(ranked)))
        good, bad = ranked[:n_good], ranked[n_good:]

        models = {}
        for name, param in self.space.items():
            if isinstance(param, Choice):
                models[name] = (
                    _CategoricalParzen(param, [t.params[name] for t in good]),
                    _CategoricalParzen(param, [t.params[name] for t in bad]),
                )
            else:
                models[name] = (
                    _UnitParzen([param.to_unit(t.params[name]) for t in good]),
                    _UnitParzen([param.to_unit(t.params[name]) for t in bad]),
                )

        best_params: Dict[str, Any] = {}
        best_ratio = -math.inf
        for _ in range(self.n_candidates):
            candidate: Dict[str, Any] = {}
            ratio = 0.0
            for name, param in self.space.items():
                good_model, bad_model = models[name]
                if isinstance(param, Choice):
                    value = good_model.sample(self.rng)
                    ratio += good_model.log_pdf(value) - bad_model.log_pdf(value)
                else:
                    value = param.from_unit(good_model.sample(self.rng))
                    u = param.to_unit(value)
                    ratio += good_model.log_pdf(u) - bad_model.log_pdf(u)
                candidate[name] = value
            if ratio > best_ratio:
                best_ratio, best_params = ratio, candidate
        return best_params
