"""
Numerical verification of the approximation guarantees relating S, S^greedy
and S^NS, plus closed forms for the tightness family and the data behind
the success-probability-versus-messages curves.

Every check records a signed residual (positive means satisfied with room to
spare) rather than a bare flag.
"""
import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from channel_app.conf import oneshot_setting
from channel_app.exceptions import OutOfRange
from coding_app.coding import marginal_gains, exact_opt, f_value, greedy
from coding_app.exceptions import EnumerationCapExceeded
from coding_app.metaconverse import box_from_lp, certify_tightness, f_fractional, lp_from_box, ns_value
from coding_app.ratios import ratio, ratio_lower_bounds
from coding_app.rounding import exact_expected_value

logger = logging.getLogger(__name__)

__all__ = [
    'BoundReport', 'Check', 'SweepRow', 'TightnessGap', 'ratio', 'ratio_lower_bounds', 'sweep',
    'tightness_closed_form', 'tightness_gap', 'verify_centered', 'verify_chain', 'verify_induction',
    'verify_box', 'verify_lemma4', 'verify_lemma4_greedy', 'verify_theorem3',
]

GUARANTEE_CHECKS = ('greedy_vs_ns', 'exact_vs_ns', 'rounding_vs_ns', 'exact_le_ns')


@dataclass(frozen=True)
class Check:
    name: str
    lhs: float
    rhs: float
    residual: float
    passed: bool

    @classmethod
    def at_least(cls, name, lhs, rhs, tolerance):
        """
        lhs >= rhs, residual lhs - rhs.
        """
        residual = lhs - rhs
        return cls(name=name, lhs=lhs, rhs=rhs, residual=residual, passed=residual >= -tolerance)

    @classmethod
    def at_most(cls, name, lhs, rhs, tolerance):
        """
        lhs <= rhs, residual rhs - lhs.
        """
        residual = rhs - lhs
        return cls(name=name, lhs=lhs, rhs=rhs, residual=residual, passed=residual >= -tolerance)

    @classmethod
    def equal(cls, name, lhs, rhs, tolerance):
        """
        lhs == rhs, residual -|lhs - rhs|.
        """
        residual = -abs(lhs - rhs)
        return cls(name=name, lhs=lhs, rhs=rhs, residual=residual, passed=residual >= -tolerance)


@dataclass(frozen=True)
class BoundReport:
    channel: str
    k: int
    l: int
    s_exact: float
    s_greedy: float
    s_ns_k: float
    s_ns_l: float
    rounding_expectation: float
    ratio: float
    checks: tuple

    @property
    def passed(self):
        return all(check.passed for check in self.checks)

    def failures(self):
        return [check for check in self.checks if not check.passed]


def verify_chain(channel, k, l, tolerance=None, enumeration_cap=None):
    """
    Every link of

        1/l <= ratio(k, l) S^NS(W, k) <= S^greedy(W, l) <= S(W, l) <= S^NS(W, l) <= 1

    together with the rounding expectation sitting between the bound and
    S(W, l).
    """
    tolerance = oneshot_setting('VERIFY_TOLERANCE', tolerance)
    ns_k = ns_value(channel, k)
    ns_l = ns_value(channel, l)
    s_exact, _ = exact_opt(channel, l, enumeration_cap=enumeration_cap)
    s_greedy, _, _ = greedy(channel, l, lazy=True)
    expectation = exact_expected_value(channel, ns_k, l)
    factor = ratio(k, l)
    bound = factor * ns_k.value

    checks = (
        Check.at_least('greedy_vs_ns', s_greedy, bound, tolerance),
        Check.at_least('exact_vs_ns', s_exact, bound, tolerance),
        Check.at_least('rounding_vs_ns', expectation, bound, tolerance),
        Check.at_most('exact_le_ns', s_exact, ns_l.value, tolerance),
        Check.at_most('greedy_le_exact', s_greedy, s_exact, tolerance),
        Check.at_least('exact_ge_uniform', s_exact, 1.0 / l, tolerance),
        Check.at_most('ns_le_one', ns_l.value, 1.0, tolerance),
        Check.at_most('rounding_le_exact', expectation, s_exact, tolerance),
    )
    report = BoundReport(
        channel=channel.name,
        k=k,
        l=l,
        s_exact=s_exact,
        s_greedy=s_greedy,
        s_ns_k=ns_k.value,
        s_ns_l=ns_l.value,
        rounding_expectation=expectation,
        ratio=factor,
        checks=checks,
    )
    for check in report.failures():
        logger.warning("check %s failed for k=%d, l=%d: residual %.3e", check.name, k, l, check.residual)
    return report


def verify_theorem3(channel, k, l, tolerance=None, enumeration_cap=None):
    """
    S^greedy(W, l), S(W, l) and the rounding expectation are each at least
    ratio(k, l) S^NS(W, k), and S(W, l) <= S^NS(W, l).
    """
    report = verify_chain(channel, k, l, tolerance=tolerance, enumeration_cap=enumeration_cap)
    checks = tuple(check for check in report.checks if check.name in GUARANTEE_CHECKS)
    return replace(report, checks=checks)


def verify_centered(channel, k, tolerance=None, enumeration_cap=None):
    """
    S(W, k) - 1/k >= (1 - (1 - 1/k)^(k-1)) (S^NS(W, k) - 1/k).
    """
    tolerance = oneshot_setting('VERIFY_TOLERANCE', tolerance)
    s_exact, _ = exact_opt(channel, k, enumeration_cap=enumeration_cap)
    s_ns = ns_value(channel, k).value
    factor = -math.expm1((k - 1) * math.log1p(-1.0 / k)) if k > 1 else 0.0
    return Check.at_least('centered', s_exact - 1.0 / k, factor * (s_ns - 1.0 / k), tolerance)


def verify_lemma4(channel, subset, p, tolerance=None):
    """
    f_W(p) <= f_W(S) + k max_x (f_W(S + x) - f_W(S)) for p in [0, 1]^X with
    integral total k.
    """
    tolerance = oneshot_setting('VERIFY_TOLERANCE', tolerance)
    p = np.asarray(p, dtype=float)
    k = round(float(p.sum()))
    if k < 1 or abs(p.sum() - k) > 1e-7:
        raise OutOfRange(f"p must sum to a positive integer, got {p.sum()!r}")
    base = f_value(channel, subset)
    covered = channel.w[list(subset)].max(axis=0) if len(subset) else np.zeros(channel.y_size)
    best_gain = float(marginal_gains(channel.w, covered, np.arange(channel.x_size)).max())
    return Check.at_most('lemma4', f_fractional(channel, p), base + k * best_gain, tolerance)


def verify_lemma4_greedy(channel, k, tolerance=None):
    """
    The marginal-gain inequality at every greedy prefix S_0, ..., S_{k-1},
    with p the optimal point of the non-signaling LP.
    """
    p = ns_value(channel, k).p
    _, _, trace = greedy(channel, k, lazy=True)
    return tuple(
        replace(verify_lemma4(channel, prefix, p, tolerance=tolerance), name=f'lemma4_prefix_{j}')
        for j, prefix in enumerate(trace.chain[:-1])
    )


def verify_box(channel, k, tolerance=1e-9):
    """
    The box built from the LP optimum is non-signaling, is worth S^NS(W, k),
    and converts back to an LP point of the same value.
    """
    solution = ns_value(channel, k)
    box = box_from_lp(solution, channel)
    violation = max(box.violations().values())
    back = lp_from_box(box, channel, k)
    return (
        Check.at_most('non_signaling', violation, 0.0, tolerance),
        Check.equal('box_value', box.success_probability(channel), solution.value, tolerance),
        Check.equal('round_trip_value', back.value, solution.value, tolerance),
    )


def verify_induction(channel, k, tolerance=None):
    """
    Along the greedy chain, OPT - f(S_{j+1}) <= (1 - 1/k)(OPT - f(S_j)) where
    OPT = max_p f_W(p) = k S^NS(W, k).
    """
    tolerance = oneshot_setting('VERIFY_TOLERANCE', tolerance)
    optimum = k * ns_value(channel, k).value
    _, _, trace = greedy(channel, k, lazy=True)
    values = [f_value(channel, prefix) for prefix in trace.chain]
    return tuple(
        Check.at_most(f'induction_step_{j}', optimum - values[j + 1], (1.0 - 1.0 / k) * (optimum - values[j]), tolerance)
        for j in range(len(values) - 1)
    )


def tightness_closed_form(k, t, l):
    """
    S(W, l) of the tightness family with n = kt inputs:
    (k/l)(1 - prod_{j<l} (1 - t/(n - j))).
    """
    n = k * t
    if k < 1 or t < 1:
        raise OutOfRange(f"k and t must be positive, got k={k}, t={t}")
    if not 1 <= l <= n:
        raise OutOfRange(f"l must lie in [1, n = {n}], got {l}")
    factors = []
    for j in range(l):
        factor = 1.0 - t / (n - j)
        if factor <= 0:
            factors = [0.0]
            break
        factors.append(factor)
    return (k / l) * (1.0 - math.prod(factors))


@dataclass(frozen=True)
class TightnessGap:
    k: int
    t: int
    l: int
    closed_form: float
    ns_value: float
    gap: float
    ratio: float


def tightness_gap(k, t, l):
    """
    S(W, l) / S^NS(W, k) on the tightness family, with S^NS(W, k) = 1
    certified at the analytic LP point.
    """
    closed_form = tightness_closed_form(k, t, l)
    certified = certify_tightness(k, t)
    return TightnessGap(
        k=k, t=t, l=l,
        closed_form=closed_form,
        ns_value=certified,
        gap=closed_form / certified,
        ratio=ratio(k, l),
    )


@dataclass(frozen=True)
class SweepRow:
    l: int
    s_method: str
    s_value: float
    s_ns: float
    method: str


def sweep(channel, l_from=1, l_to=None, enumeration_cap=None):
    """
    (l, S(W, l), S^NS(W, l)) for l in [l_from, l_to]; rows whose exact search
    exceeds the enumeration cap carry S^greedy instead and say so.
    """
    l_to = channel.x_size if l_to is None else l_to
    if not 1 <= l_from <= l_to <= channel.x_size:
        raise OutOfRange(f"need 1 <= l_from <= l_to <= |X| = {channel.x_size}, got [{l_from}, {l_to}]")
    rows = []
    for l in range(l_from, l_to + 1):
        try:
            value, _ = exact_opt(channel, l, enumeration_cap=enumeration_cap)
            s_method, method = 'S', 'exact'
        except EnumerationCapExceeded as exc:
            logger.info("l=%d: %s, using greedy", l, exc)
            value, _, _ = greedy(channel, l, lazy=True)
            s_method, method = 'S_greedy', 'greedy'
        rows.append(SweepRow(l=l, s_method=s_method, s_value=value, s_ns=ns_value(channel, l).value, method=method))
    return rows
