"""
Randomised rounding of the non-signaling LP: draw l inputs i.i.d. from
{p_x / k}, keep the set they form and decode it by maximum likelihood.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from channel_app.channels import seeded_rng
from coding_app.coding import ml_code
from coding_app.exceptions import DegenerateDistribution, IndexOutOfRange
from coding_app.metaconverse import SUM_TOLERANCE
from coding_app.ratios import ratio

logger = logging.getLogger(__name__)

# Trials drawn per vectorised batch
_CHUNK = 4096


@dataclass(frozen=True)
class RoundingReport:
    l: int
    k: int
    exact_expectation: float
    mc_mean: float
    mc_stddev: float
    mc_trials: int
    bound: float
    ns_value: float
    seed: int

    @property
    def standard_error(self):
        return self.mc_stddev / math.sqrt(self.mc_trials)

    def consistent(self, errors=4.0):
        """
        True when the Monte-Carlo mean lies within `errors` standard errors
        of the exact expectation.
        """
        return abs(self.mc_mean - self.exact_expectation) <= errors * self.standard_error + 1e-12


def _sampling_distribution(solution):
    p = solution.p
    if abs(p.sum() - solution.k) > SUM_TOLERANCE:
        raise DegenerateDistribution(f"p sums to {p.sum()!r}, expected k = {solution.k}")
    weights = np.clip(p, 0.0, None)
    return weights / weights.sum()


def _check_l(l):
    if l < 1:
        raise IndexOutOfRange(f"l must be positive, got {l}")


def sample_code(channel, solution, l, seed):
    """
    Draws l inputs from {p_x / k} with replacement. Repeated draws collapse,
    so the code has at most l codewords; it carries l messages.
    """
    _check_l(l)
    probs = _sampling_distribution(solution)
    rng = seeded_rng(seed)
    draws = rng.choice(channel.x_size, size=l, p=probs)
    codewords = tuple(dict.fromkeys(int(x) for x in draws))
    return ml_code(channel, codewords, l)


def exact_expected_value(channel, solution, l):
    """
    E[f_W(S)] / l for the rounding distribution, in closed form.

    For each y the inputs are ordered by decreasing W(y|x), smallest index on
    ties; the i-th one is the best sampled input with probability
    (1 - Q_{i-1}/k)^l - (1 - Q_i/k)^l, where Q_i is the prefix sum of p.
    """
    _check_l(l)
    order = np.argsort(-channel.w, axis=0, kind='stable')
    prefix = np.cumsum(solution.p[order], axis=0) / solution.k
    survive = np.clip(1.0 - prefix, 0.0, 1.0) ** l
    before = np.vstack([np.ones((1, channel.y_size)), survive[:-1]])
    weights = np.take_along_axis(channel.w, order, axis=0)
    return float((weights * (before - survive)).sum()) / l


def monte_carlo(channel, solution, l, trials, seed):
    """
    Averages f_W(S) / l over `trials` sampled sets, all drawn from one
    generator seeded with `seed`.
    """
    _check_l(l)
    if trials < 1:
        raise IndexOutOfRange(f"trials must be positive, got {trials}")
    probs = _sampling_distribution(solution)
    rng = seeded_rng(seed)
    values = []
    for start in range(0, trials, _CHUNK):
        draws = rng.choice(channel.x_size, size=(min(_CHUNK, trials - start), l), p=probs)
        # A repeated input does not change the per-output maximum
        values.append(channel.w[draws].max(axis=1).sum(axis=1) / l)
    values = np.concatenate(values)

    mean = math.fsum(values) / trials
    stddev = float(np.std(values, ddof=1)) if trials > 1 else 0.0
    report = RoundingReport(
        l=l,
        k=solution.k,
        exact_expectation=exact_expected_value(channel, solution, l),
        mc_mean=mean,
        mc_stddev=stddev,
        mc_trials=trials,
        bound=ratio(solution.k, l) * solution.value,
        ns_value=solution.value,
        seed=seed,
    )
    logger.debug("rounding l=%d: exact %.9f, sampled %.9f over %d trials", l, report.exact_expectation, mean, trials)
    return report

