"""
Binary hypothesis testing view of the non-signaling value:

    1 - S^NS(W, k) = min_mu max_nu beta_{1-1/k}(mu x nu, mu x W)

beta is computed as a linear program and, independently, by the
Neyman-Pearson threshold test. The inner maximisation over nu is evaluated
through its dual form, a program over tests T(x, y).
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from channel_app.channels import seeded_rng
from channel_app.conf import oneshot_setting
from channel_app.exceptions import OutOfRange
from coding_app.exceptions import InvalidDistribution, InvalidSolution, KExceedsInputAlphabet
from coding_app.metaconverse import LPSolution, ns_value
from solver_app.exceptions import NumericalFailure
from solver_app.simplex import LinearProgram, Status, solve

logger = logging.getLogger(__name__)

DISTRIBUTION_TOLERANCE = 1e-9
METHODS = ('lp', 'threshold')


def as_distribution(values, label='distribution', size=None):
    """
    Validates a probability vector.

    Raises:
        InvalidDistribution: wrong length, negative entries or total away from 1.
    """
    probs = np.asarray(values, dtype=float)
    if probs.ndim != 1 or probs.size == 0:
        raise InvalidDistribution(f"{label} must be a nonempty vector")
    if size is not None and probs.size != size:
        raise InvalidDistribution(f"{label} has {probs.size} entries, expected {size}")
    if not np.all(np.isfinite(probs)) or probs.min() < -DISTRIBUTION_TOLERANCE:
        raise InvalidDistribution(f"{label} has negative or non-finite entries")
    if abs(math.fsum(probs) - 1.0) > DISTRIBUTION_TOLERANCE:
        raise InvalidDistribution(f"{label} sums to {math.fsum(probs)!r}")
    return np.clip(probs, 0.0, None)


def _check_alpha(alpha):
    if not 0.0 <= alpha <= 1.0:
        raise OutOfRange(f"alpha must lie in [0, 1], got {alpha}")


@dataclass(frozen=True, eq=False)
class HypothesisInstance:
    """
    beta_alpha(P, Q) together with the test that attains it.
    """
    p: np.ndarray
    q: np.ndarray
    alpha: float
    test: np.ndarray = None
    beta: float = None

    def check(self, tolerance=DISTRIBUTION_TOLERANCE):
        as_distribution(self.p, 'P')
        as_distribution(self.q, 'Q', size=len(self.p))
        _check_alpha(self.alpha)
        if self.test is None:
            return self
        if np.any(self.test < -tolerance) or np.any(self.test > 1 + tolerance):
            raise InvalidDistribution("test values must lie in [0, 1]")
        if self.p @ self.test < self.alpha - tolerance:
            raise InvalidDistribution("test accepts P with probability below alpha")
        if self.beta is not None and abs(self.q @ self.test - self.beta) > tolerance:
            raise InvalidDistribution("beta does not match the test")
        return self


@dataclass(frozen=True, eq=False)
class ChannelTest:
    """
    A test T(x, y) under the input distribution mu, feasible when
    sum_x mu(x) T(x, y) >= 1 - 1/k for every y. value = sum mu(x) W(y|x) T(x, y).
    """
    mu: np.ndarray
    test: np.ndarray
    value: float
    k: int

    def slack(self):
        """
        Per-output margin sum_x mu(x) T(x, y) - (1 - 1/k).
        """
        return self.mu @ self.test - (1.0 - 1.0 / self.k)


def _threshold_fill(weights, costs, target):
    """
    Minimum of costs.T subject to weights.T >= target and T in [0, 1]:
    symbols with positive weight are accepted in increasing order of
    costs/weights (smallest index on ties) until the target is met.
    """
    test = np.zeros_like(weights)
    support = np.flatnonzero(weights > 0)
    order = support[np.argsort(costs[support] / weights[support], kind='stable')]
    caps = weights[order]
    before = np.cumsum(caps) - caps
    taken = np.clip(target - before, 0.0, caps)
    test[order] = taken / caps
    return test


def neyman_pearson(p, q, alpha):
    """
    beta_alpha(P, Q) from the likelihood-ratio threshold test, randomised on
    the boundary symbol.

    Returns:
        tuple: (beta, test)
    """
    p = as_distribution(p, 'P')
    q = as_distribution(q, 'Q', size=p.size)
    _check_alpha(alpha)
    test = _threshold_fill(p, q, alpha)
    return float(q @ test) + 0.0, test


def beta(p, q, alpha):
    """
    beta_alpha(P, Q) = min sum_z Q(z) T(z) over tests T in [0, 1] with
    sum_z P(z) T(z) >= alpha, solved as a linear program.

    Returns:
        tuple: (beta, optimal test)
    """
    p = as_distribution(p, 'P')
    q = as_distribution(q, 'Q', size=p.size)
    _check_alpha(alpha)
    lp = LinearProgram(
        objective=-q,
        matrix=p[None, :],
        relations=('>=',),
        rhs=[float(alpha)],
        upper=np.ones(p.size),
    )
    result = solve(lp)
    if result.status is not Status.OPTIMAL:
        raise NumericalFailure(f"beta LP reported {result.status.value}")
    # + 0.0 turns a -0.0 optimum into 0.0
    return -result.value + 0.0, result.primal


def _check_k(channel, k):
    if not 1 <= k <= channel.x_size:
        raise KExceedsInputAlphabet(k, channel.x_size)


def max_nu_beta(channel, k, mu, method='lp'):
    """
    max over nu of beta_{1-1/k}(mu x nu, mu x W), evaluated as
    min sum mu(x) W(y|x) T(x, y) over tests with
    sum_x mu(x) T(x, y) >= 1 - 1/k for every output y.

    method='lp' solves the whole program with the simplex; 'threshold'
    solves each output separately with the threshold test.

    Returns:
        tuple: (value, ChannelTest)
    """
    _check_k(channel, k)
    mu = as_distribution(mu, 'mu', size=channel.x_size)
    target = 1.0 - 1.0 / k
    costs = mu[:, None] * channel.w
    x_size, y_size = channel.x_size, channel.y_size

    if method == 'threshold':
        test = np.column_stack([_threshold_fill(mu, costs[:, y], target) for y in range(y_size)])
    elif method == 'lp':
        lp = LinearProgram(
            objective=-costs.ravel(),
            matrix=np.tile(np.eye(y_size), x_size) * np.repeat(mu, y_size)[None, :],
            relations=('>=',) * y_size,
            rhs=np.full(y_size, target),
            upper=np.ones(x_size * y_size),
        )
        result = solve(lp)
        if result.status is not Status.OPTIMAL:
            raise NumericalFailure(f"test LP reported {result.status.value}")
        test = result.primal.reshape(x_size, y_size)
    else:
        raise OutOfRange(f"unknown method {method!r}, expected one of {METHODS}")

    value = float((costs * test).sum()) + 0.0
    return value, ChannelTest(mu=mu, test=test, value=value, k=k)


def test_from_lp(solution, channel):
    """
    The pair mu(x) = p_x / k, T(x, y) = 1 - r_{x,y} / p_x built from an LP
    solution; T(x, .) = 1 where p_x = 0. Its value is 1 - solution.value.
    """
    try:
        solution.check()
    except InvalidSolution as exc:
        raise InvalidSolution(f"cannot build a test: {exc}") from exc
    p, k = solution.p, solution.k
    used = p[:, None] > 0
    fraction = np.divide(solution.r, p[:, None], out=np.zeros_like(solution.r), where=used)
    test = np.clip(np.where(used, 1.0 - fraction, 1.0), 0.0, 1.0)
    mu = p / k
    value = float((mu[:, None] * channel.w * test).sum())
    return ChannelTest(mu=mu, test=test, value=value, k=k)


def lp_from_test(test, channel):
    """
    LP point p_x = k mu(x), r_{x,y} = k mu(x)(1 - T(x, y)) of a feasible
    test. Needs mu(x) <= 1/k so that p_x <= 1.
    """
    k = test.k
    if test.mu.max() > 1.0 / k + DISTRIBUTION_TOLERANCE:
        raise InvalidDistribution(f"mu exceeds 1/k = {1.0 / k}, so p_x would exceed 1")
    if test.slack().min() < -DISTRIBUTION_TOLERANCE:
        raise InvalidDistribution("test violates sum_x mu(x) T(x, y) >= 1 - 1/k")
    p = np.minimum(k * test.mu, 1.0)
    r = np.clip(p[:, None] * (1.0 - test.test), 0.0, None)
    value = float((channel.w * r).sum()) / k
    return LPSolution(r=r, p=p, value=value, k=k).check()


@dataclass(frozen=True)
class MinMaxReport:
    """
    Numerical check of 1 - S^NS = min_mu max_nu beta at mu = p/k, with
    random mu as lower-bound witnesses.
    """
    k: int
    ns_value: float
    target: float
    at_lp_mu: float
    sampled: tuple
    seed: int
    tolerance: float

    @property
    def optimum_matches(self):
        return abs(self.at_lp_mu - self.target) <= self.tolerance

    @property
    def samples_dominate(self):
        return all(value >= self.target - self.tolerance for value in self.sampled)

    @property
    def passed(self):
        return self.optimum_matches and self.samples_dominate


def verify_appendix_b(channel, k, samples=None, seed=0, tolerance=1e-6):
    """
    Checks that max_nu_beta at mu = p/k from the LP optimum equals
    1 - S^NS(W, k), and that `samples` Dirichlet-random mu never go below it.
    """
    samples = oneshot_setting('MIN_MAX_SAMPLES', samples)
    solution = ns_value(channel, k)
    target = 1.0 - solution.value
    at_lp_mu, _ = max_nu_beta(channel, k, solution.p / k)
    rng = seeded_rng(seed)
    sampled = tuple(
        max_nu_beta(channel, k, mu / mu.sum())[0]
        for mu in rng.dirichlet(np.ones(channel.x_size), size=samples)
    )
    report = MinMaxReport(
        k=k,
        ns_value=solution.value,
        target=target,
        at_lp_mu=at_lp_mu,
        sampled=sampled,
        seed=seed,
        tolerance=tolerance,
    )
    if not report.passed:
        logger.warning("min-max beta check failed: target %.9f, at p/k %.9f", target, at_lp_mu)
    return report
