"""Monte Carlo simulation of random-phase trials and decision testing.

Samples (k, k') outcomes from the random-phase model, applies the
likelihood-ratio (Neyman-Pearson) decision rule, estimates conditional
and average error rates over dataset ensembles, and sweeps the true
visibility below the design point for the worst-case error band.

Every dataset draws from its own stream derived from (seed, hypothesis
key, dataset index), so results do not depend on evaluation order.
"""

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import photostat
from .util import DomainError

TWO_PI = 2.0 * math.pi

# Floor applied to table cells inside log-likelihoods: keeps zero-
# probability outcomes decisively ordered without producing NaNs.
_LOG_FLOOR = 1e-300


class TrialOutcome(NamedTuple):
    k_plus: int
    k_minus: int


class Decision(enum.Enum):
    V1 = 1
    V2 = 2


@dataclass(frozen=True)
class ExperimentConfig:
    """One conditional Monte Carlo run: M datasets of N trials each,
    sampled at the true visibility."""

    true_visibility: float
    energy: float
    truncation: int
    repetitions_per_test: int
    ensemble_size: int
    seed: int

    def __post_init__(self):
        if not 0.0 <= self.true_visibility <= 1.0:
            raise DomainError("true_visibility must lie in [0, 1]")
        if self.repetitions_per_test < 1 or self.ensemble_size < 1:
            raise DomainError("repetitions_per_test and ensemble_size must be >= 1")


@dataclass(frozen=True)
class ErrorEstimate:
    error_mean: float
    error_std: float
    conditional_v1_given_v2: float
    conditional_v2_given_v1: float


@dataclass(frozen=True)
class WorstCaseBand:
    """Error estimates per true visibility, tested against a fixed
    design pair, with the min/max envelope of the average error."""

    v2_values: np.ndarray
    estimates: tuple
    band_lo: float
    band_hi: float


def dataset_rng(seed, *key):
    """Independent generator for one dataset, derived from the run seed
    and an integer key path (hypothesis index, dataset index, ...)."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def _sample_counts(u, intensities, truncation):
    """Poisson sampling by inversion (sequential CDF search), clamped at
    the truncation; exact and deterministic for the means used here."""
    pmf = np.exp(-intensities)
    cdf = pmf.copy()
    counts = np.zeros(len(u), dtype=np.int64)
    for k in range(truncation):
        counts += u > cdf
        pmf = pmf * intensities / (k + 1)
        cdf += pmf
    return counts


def sample_dataset(rng, energy, vis_magnitude, truncation, size):
    """Draw `size` independent trials: a uniform global phase each, then
    clamped Poisson counts at the two port intensities. Returns an
    (size, 2) integer array of (k_plus, k_minus) rows."""
    if energy < 0.0:
        raise DomainError("energy must be >= 0")
    vis = photostat.ComplexVisibility(vis_magnitude)
    phases = rng.uniform(0.0, TWO_PI, size)
    i_plus = energy * (1.0 + vis.magnitude * np.cos(phases)) / 2.0
    k_plus = _sample_counts(rng.random(size), i_plus, truncation)
    k_minus = _sample_counts(rng.random(size), energy - i_plus, truncation)
    return np.column_stack([k_plus, k_minus])


def sample_outcome(rng, energy, vis_magnitude, truncation):
    """Draw a single random-phase trial outcome."""
    row = sample_dataset(rng, energy, vis_magnitude, truncation, 1)[0]
    return TrialOutcome(int(row[0]), int(row[1]))


def _as_outcome_array(dataset, truncation):
    data = np.asarray(dataset, dtype=np.int64)
    if data.size == 0:
        return data.reshape(0, 2)
    if data.ndim != 2 or data.shape[1] != 2:
        raise DomainError("dataset must be a sequence of (k_plus, k_minus) pairs")
    if np.any(data < 0) or np.any(data > truncation):
        raise DomainError("outcome outside the distribution table range")
    return data


def _log_ratio_table(p1, p2):
    t1 = np.log(np.maximum(np.asarray(p1.probs, dtype=float), _LOG_FLOOR))
    t2 = np.log(np.maximum(np.asarray(p2.probs, dtype=float), _LOG_FLOOR))
    return t1 - t2


def log_likelihood_ratio(dataset, p1, p2):
    """Sum over the dataset of log p1(outcome) - log p2(outcome)."""
    if p1.truncation != p2.truncation:
        raise DomainError("hypothesis tables have different truncation")
    data = _as_outcome_array(dataset, p1.truncation)
    if len(data) == 0:
        return 0.0
    table = _log_ratio_table(p1, p2)
    return float(table[data[:, 0], data[:, 1]].sum())


def neyman_pearson(dataset, p1, p2):
    """Decide V1 on a strictly positive log-likelihood ratio, V2 on a
    tie or negative ratio."""
    return Decision.V1 if log_likelihood_ratio(dataset, p1, p2) > 0.0 else Decision.V2


def _conditional_error(config, table, truth, hypothesis_key):
    """Fraction of datasets sampled under `truth` that are misdecided,
    using the precomputed log-ratio `table` (favoring V1 when > 0)."""
    n = config.repetitions_per_test
    k = config.truncation
    wrong = 0
    for i in range(config.ensemble_size):
        rng = dataset_rng(config.seed, *hypothesis_key, i)
        data = sample_dataset(rng, config.energy, config.true_visibility, k, n)
        llr = table[data[:, 0], data[:, 1]].sum()
        decided_v1 = llr > 0.0
        if decided_v1 != (truth is Decision.V1):
            wrong += 1
    return wrong / config.ensemble_size


def estimate_error(config_v1, config_v2, p1, p2):
    """Monte Carlo estimate of the average error probability.

    Generates M fresh datasets of N trials under each true hypothesis,
    applies the Neyman-Pearson rule with the fixed (p1, p2) pair, and
    returns the two conditional error fractions, their average, and the
    binomial standard error sqrt(eps(1-eps)/M).
    """
    if (config_v1.repetitions_per_test != config_v2.repetitions_per_test
            or config_v1.ensemble_size != config_v2.ensemble_size):
        raise DomainError("the two conditional runs must share N and M")
    if p1.truncation != p2.truncation:
        raise DomainError("hypothesis tables have different truncation")
    table = _log_ratio_table(p1, p2)
    eps_v2_given_v1 = _conditional_error(config_v1, table, Decision.V1, (1, 0))
    eps_v1_given_v2 = _conditional_error(config_v2, table, Decision.V2, (2, 0))
    mean = (eps_v1_given_v2 + eps_v2_given_v1) / 2.0
    std = math.sqrt(mean * (1.0 - mean) / config_v1.ensemble_size)
    return ErrorEstimate(mean, std, eps_v1_given_v2, eps_v2_given_v1)


def worst_case_sweep(v1, v2_grid, designed_v2, config):
    """Error band when the true second visibility ranges below the
    design point while the test stays fixed at (p(v1), p(designed_v2)).

    `config` supplies energy, truncation, N, M, and the seed; its
    true_visibility field is ignored (each grid point overrides it).
    """
    v2_grid = np.asarray(v2_grid, dtype=float)
    if len(v2_grid) == 0:
        raise DomainError("empty visibility grid")
    if not math.isclose(float(v2_grid.max()), designed_v2, rel_tol=0.0, abs_tol=1e-12):
        raise DomainError("designed_v2 must equal the maximum of the grid")
    k = config.truncation
    params = photostat.DetectionParams(config.energy, 0.0, k)
    p1 = photostat.joint_random_phase(params, v1)
    p2 = photostat.joint_random_phase(params, designed_v2)
    table = _log_ratio_table(p1, p2)

    cfg1 = ExperimentConfig(v1, config.energy, k, config.repetitions_per_test,
                            config.ensemble_size, config.seed)
    eps_v2_given_v1 = _conditional_error(cfg1, table, Decision.V1, (1, 0))
    estimates = []
    for j, v2 in enumerate(v2_grid):
        cfg2 = ExperimentConfig(float(v2), config.energy, k,
                                config.repetitions_per_test,
                                config.ensemble_size, config.seed)
        eps_v1_given_v2 = _conditional_error(cfg2, table, Decision.V2, (2, j))
        mean = (eps_v1_given_v2 + eps_v2_given_v1) / 2.0
        std = math.sqrt(mean * (1.0 - mean) / config.ensemble_size)
        estimates.append(ErrorEstimate(mean, std, eps_v1_given_v2, eps_v2_given_v1))
    means = [e.error_mean for e in estimates]
    return WorstCaseBand(v2_grid, tuple(estimates), min(means), max(means))
