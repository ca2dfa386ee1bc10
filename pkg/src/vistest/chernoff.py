"""Error exponents and bounds for binary hypothesis testing.

Implements the Chernoff information over finite outcome distributions,
the coherent-signal closed form, the standard exp(-NC)/2 bound, tilted
distributions, relative entropy, and the refined (second-order) bound.

Convention: alpha_star is the exponent on the second hypothesis in the
minimized objective sum(p1^(1-a) p2^a), so the tilted distribution
p1^(1-a) p2^a at a = alpha_star is equidistant (in relative entropy)
from both hypotheses. Swapping the hypotheses maps alpha_star to
1 - alpha_star. All logarithms are natural.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .util import DomainError, golden_section

_ALPHA_TOL = 1e-10


class DegeneratePairError(DomainError):
    """The refined bound is undefined for this distribution pair."""


@dataclass(frozen=True)
class ChernoffResult:
    """Chernoff information in nats with the optimizing exponent and the
    standard deviation of the log-likelihood ratio under the tilted
    distribution. infinite marks perfectly distinguishable pairs; the
    information field then holds math.inf."""

    information: float
    alpha_star: float
    sigma: float
    infinite: bool = False


def _as_table(p):
    probs = getattr(p, "probs", p)
    return np.asarray(probs, dtype=float).ravel()


def _validate_pair(p1, p2):
    a = _as_table(p1)
    b = _as_table(p2)
    if a.shape != b.shape:
        raise DomainError(f"distribution shapes differ: {a.shape} vs {b.shape}")
    for name, t in (("p1", a), ("p2", b)):
        if np.any(t < 0.0):
            raise DomainError(f"{name} has negative entries")
        if abs(t.sum() - 1.0) > 1e-9:
            raise DomainError(f"{name} sums to {t.sum()!r}, not 1")
    return a, b


def chernoff_information(p1, p2):
    """Chernoff information of two distributions on a common outcome set.

    Minimizes sum(p1^(1-a) p2^a) over a in [0, 1] by golden section to
    absolute tolerance 1e-10 in a (the objective is log-convex, so a
    bracketing minimizer is exact up to tolerance). Identical inputs
    report alpha_star = 0.5 by convention; disjoint supports yield the
    infinite sentinel.
    """
    a, b = _validate_pair(p1, p2)
    if np.allclose(a, b, rtol=0.0, atol=1e-15):
        return ChernoffResult(0.0, 0.5, 0.0)
    mask = (a > 0.0) & (b > 0.0)
    if not np.any(mask):
        return ChernoffResult(math.inf, 0.5, 0.0, infinite=True)
    l1 = np.log(a[mask])
    l2 = np.log(b[mask])

    def objective(alpha):
        return logsumexp((1.0 - alpha) * l1 + alpha * l2)

    alpha_star, log_min = golden_section(objective, 0.0, 1.0, tol=_ALPHA_TOL)
    info = max(0.0, -log_min)
    tilted = np.exp((1.0 - alpha_star) * l1 + alpha_star * l2 - log_min)
    tilted /= tilted.sum()
    ratio = l1 - l2
    sigma = math.sqrt(float(np.dot(tilted, ratio**2)))
    return ChernoffResult(info, alpha_star, sigma)


def chernoff_coherent_closed_form(energy, re_v1, re_v2):
    """Closed-form Chernoff information for phase-locked signals with
    full photon-number resolution; proportional to the detected energy."""
    if not (math.isfinite(energy) and energy >= 0.0):
        raise DomainError("energy must be finite and >= 0")
    if abs(re_v1) > 1.0 or abs(re_v2) > 1.0:
        raise DomainError("Re(V) must lie in [-1, 1]")
    if re_v1 == re_v2:
        return ChernoffResult(0.0, 0.5, 0.0)

    def objective(alpha):
        return 0.5 * ((1.0 + re_v1) ** (1.0 - alpha) * (1.0 + re_v2) ** alpha
                      + (1.0 - re_v1) ** (1.0 - alpha) * (1.0 - re_v2) ** alpha)

    alpha_star, g_min = golden_section(objective, 0.0, 1.0, tol=_ALPHA_TOL)
    info = energy * (1.0 - g_min)

    # Tilted product-Poisson statistics: per-port intensities interpolate
    # geometrically, and the log-likelihood ratio is linear in the counts.
    sigma2 = 0.0
    mean = 0.0
    degenerate = False
    for sign in (1.0, -1.0):
        i1 = energy * (1.0 + sign * re_v1) / 2.0
        i2 = energy * (1.0 + sign * re_v2) / 2.0
        if i1 == 0.0 and i2 == 0.0:
            continue
        if i1 == 0.0 or i2 == 0.0:
            degenerate = True
            continue
        d = math.log(i1 / i2)
        tilted = i1 ** (1.0 - alpha_star) * i2**alpha_star
        sigma2 += tilted * d * d
        mean += tilted * d - (i1 - i2)
    sigma = math.nan if degenerate else math.sqrt(sigma2 + mean * mean)
    return ChernoffResult(info, alpha_star, sigma)


def chernoff_bound(information, repetitions):
    """Standard bound exp(-N C)/2 on the average error probability."""
    if repetitions < 1:
        raise DomainError("repetitions must be >= 1")
    if isinstance(information, ChernoffResult):
        if information.infinite:
            return 0.0
        information = information.information
    if math.isinf(information):
        return 0.0
    return math.exp(-repetitions * information) / 2.0


def tilted_distribution(p1, p2, alpha):
    """Normalized geometric interpolation p1^(1-alpha) p2^alpha.

    alpha = 0 and alpha = 1 return p1 and p2 exactly (0**0 is taken as
    1 so off-support entries survive at the endpoints)."""
    if not 0.0 <= alpha <= 1.0:
        raise DomainError("alpha must lie in [0, 1]")
    a, b = _validate_pair(p1, p2)
    weights = a ** (1.0 - alpha) * b**alpha
    total = weights.sum()
    if total == 0.0:
        raise DomainError("tilted distribution has zero mass (disjoint supports)")
    return weights / total


def relative_entropy(p, q):
    """Relative entropy D(p||q) in nats; +inf when p puts mass where q
    has none."""
    a = _as_table(p)
    b = _as_table(q)
    if a.shape != b.shape:
        raise DomainError(f"distribution shapes differ: {a.shape} vs {b.shape}")
    support = a > 0.0
    if np.any(b[support] == 0.0):
        return math.inf
    return float(np.sum(a[support] * (np.log(a[support]) - np.log(b[support]))))


def refined_bound(p1, p2, repetitions):
    """Second-order refinement of the Chernoff bound:
    exp(-NC) / (sqrt(2 pi N) * 2 * alpha*(1-alpha*) * sigma)."""
    if repetitions < 1:
        raise DomainError("repetitions must be >= 1")
    result = chernoff_information(p1, p2)
    if result.infinite or result.information == 0.0:
        raise DegeneratePairError("refined bound needs 0 < C < inf")
    a = result.alpha_star
    if result.sigma == 0.0 or a <= _ALPHA_TOL or a >= 1.0 - _ALPHA_TOL:
        raise DegeneratePairError("refined bound undefined: boundary optimum")
    n = repetitions
    return math.exp(-n * result.information) / (
        math.sqrt(2.0 * math.pi * n) * 2.0 * a * (1.0 - a) * result.sigma)
