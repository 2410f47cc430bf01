"""
The non-signaling value S^NS(W, k) as a linear program over (r_{x,y}, p_x),
its fractional coverage function f_W(p), and the conversions between LP
solutions and non-signaling boxes P(x, j | i, y).
"""
import logging
from dataclasses import dataclass

import numpy as np

from channel_app.channels import make_tightness, tightness_outputs
from coding_app.exceptions import InvalidBox, InvalidSolution, KExceedsInputAlphabet
from channel_app.exceptions import OutOfRange
from solver_app.exceptions import NumericalFailure
from solver_app.simplex import LinearProgram, Status, check_feasible, solve

logger = logging.getLogger(__name__)

BOUND_TOLERANCE = 1e-9
SUM_TOLERANCE = 1e-7


@dataclass(frozen=True, eq=False)
class LPSolution:
    """
    A feasible point of the non-signaling LP and its objective
    (1/k) sum_{x,y} W(y|x) r_{x,y}.
    """
    r: np.ndarray
    p: np.ndarray
    value: float
    k: int

    @property
    def x_size(self):
        return self.p.shape[0]

    def as_vector(self):
        """
        Variables in LP order: r row-major, then p.
        """
        return np.concatenate([self.r.ravel(), self.p])

    def check(self):
        """
        Raises InvalidSolution unless 0 <= r <= p <= 1, column sums of r are at
        most 1 and sum(p) = k.
        """
        r, p = self.r, self.p
        if r.ndim != 2 or r.shape[0] != p.shape[0]:
            raise InvalidSolution(f"r has shape {r.shape} but p has {p.shape[0]} entries")
        if r.min(initial=0.0) < -BOUND_TOLERANCE or p.min() < -BOUND_TOLERANCE:
            raise InvalidSolution("negative LP variables")
        if p.max() > 1 + BOUND_TOLERANCE:
            raise InvalidSolution("p_x exceeds 1")
        if np.any(r > p[:, None] + BOUND_TOLERANCE):
            raise InvalidSolution("r_{x,y} exceeds p_x")
        if np.any(r.sum(axis=0) > 1 + BOUND_TOLERANCE):
            raise InvalidSolution("an output column of r sums above 1")
        if abs(p.sum() - self.k) > SUM_TOLERANCE:
            raise InvalidSolution(f"p sums to {p.sum()!r}, not k = {self.k}")
        return self


def _objective(channel, r, k):
    return float((channel.w * r).sum()) / k


def _check_k(channel, k):
    if not 1 <= k <= channel.x_size:
        raise KExceedsInputAlphabet(k, channel.x_size)


def _fill(room, amount):
    """
    Spreads `amount` over `room` in index order without exceeding any entry.
    """
    before = np.cumsum(room) - room
    return np.clip(amount - before, 0.0, room)


def _rebalance(p, k, floor):
    """
    Moves p into [floor, 1] with sum exactly k, raising or lowering entries
    in index order.
    """
    p = np.clip(p, floor, 1.0)
    gap = k - p.sum()
    if gap > 0:
        p = p + _fill(1.0 - p, gap)
    elif gap < 0:
        p = p - _fill(p - floor, -gap)
    return p


def ns_program(channel, k):
    """
    The LP: maximise (1/k) sum W(y|x) r_{x,y} subject to sum_x r_{x,y} <= 1,
    sum_x p_x = k, r_{x,y} <= p_x and 0 <= r, p <= 1. Variables are r
    row-major followed by p.
    """
    _check_k(channel, k)
    x_size, y_size = channel.x_size, channel.y_size
    n_r = x_size * y_size
    n = n_r + x_size

    columns = np.zeros((y_size, n))
    columns[:, :n_r] = np.tile(np.eye(y_size), x_size)
    total = np.zeros((1, n))
    total[0, n_r:] = 1.0
    dominated = np.zeros((n_r, n))
    dominated[:, :n_r] = np.eye(n_r)
    dominated[:, n_r:] = -np.repeat(np.eye(x_size), y_size, axis=0)

    return LinearProgram(
        objective=np.concatenate([channel.w.ravel() / k, np.zeros(x_size)]),
        matrix=np.vstack([columns, total, dominated]),
        relations=('<=',) * y_size + ('=',) + ('<=',) * n_r,
        rhs=np.concatenate([np.ones(y_size), [float(k)], np.zeros(n_r)]),
        upper=np.ones(n),
    )


def _polish(channel, r, p, k):
    """
    Removes solver round-off so the solution meets the LPSolution invariants
    exactly: r in [0, p], column sums <= 1, p in [0, 1] summing to k.
    """
    r = np.clip(r, 0.0, 1.0)
    p = _rebalance(p, k, floor=r.max(axis=1))
    r = np.minimum(r, p[:, None])
    excess = r.sum(axis=0)
    r = np.where(excess > 1.0, r / np.maximum(excess, 1.0), r)
    return LPSolution(r=r, p=p, value=_objective(channel, r, k), k=k)


def ns_value(channel, k):
    """
    S^NS(W, k) with an optimal (r, p).
    """
    lp = ns_program(channel, k)
    result = solve(lp)
    if result.status is not Status.OPTIMAL:
        raise NumericalFailure(f"non-signaling LP reported {result.status.value}")
    n_r = channel.x_size * channel.y_size
    r = result.primal[:n_r].reshape(channel.x_size, channel.y_size)
    solution = _polish(channel, r, result.primal[n_r:], k).check()
    logger.debug("S^NS(k=%d) = %.12f after %d pivots", k, solution.value, result.iterations)
    return solution


def fractional_assignment(channel, p):
    """
    Optimal r for f_W(p): each output y is filled up to total mass 1 with the
    inputs in decreasing order of W(y|x) (smallest index first on ties), input
    x contributing at most p_x.
    """
    p = np.asarray(p, dtype=float)
    if p.shape != (channel.x_size,):
        raise OutOfRange(f"p must have {channel.x_size} entries, got shape {p.shape}")
    if np.any(p < 0) or np.any(p > 1):
        raise OutOfRange("entries of p must lie in [0, 1]")
    order = np.argsort(-channel.w, axis=0, kind='stable')
    caps = p[order]
    before = np.cumsum(caps, axis=0) - caps
    take = np.clip(1.0 - before, 0.0, caps)
    r = np.zeros_like(channel.w)
    np.put_along_axis(r, order, take, axis=0)
    return r


def f_fractional(channel, p):
    """
    Fractional extension f_W(p) = max sum W(y|x) r_{x,y} over 0 <= r_{x,y} <= p_x,
    sum_x r_{x,y} <= 1. Agrees with f_W(S) on indicator vectors.
    """
    return float((channel.w * fractional_assignment(channel, p)).sum())


def complete_columns(channel, solution):
    """
    Raises every column sum of r to exactly 1 using the slack p_x - r_{x,y},
    cheapest W(y|x) first. Leaves the value of an optimal solution unchanged.
    """
    r = solution.r.copy()
    for y in range(r.shape[1]):
        deficit = 1.0 - r[:, y].sum()
        if deficit <= 0:
            continue
        order = np.argsort(channel.w[:, y], kind='stable')
        slack = np.maximum(solution.p - r[:, y], 0.0)[order]
        r[order, y] += _fill(slack, deficit)
    return LPSolution(r=r, p=solution.p, value=_objective(channel, r, solution.k), k=solution.k)


@dataclass(frozen=True, eq=False)
class NSBox:
    """
    A bipartite box P(x, j | i, y): the sender inputs message i and gets the
    channel input x, the receiver inputs the channel output y and gets a
    guess j. probs is indexed [x, j, i, y], marginal_a [x, i], marginal_b [j, y].
    """
    probs: np.ndarray
    marginal_a: np.ndarray
    marginal_b: np.ndarray

    @property
    def k(self):
        return self.probs.shape[1]

    def violations(self):
        """
        Largest deviation for each box condition, in checking order.
        """
        probs = self.probs
        return {
            'negative probabilities': max(-float(probs.min()), 0.0),
            'P(., . | i, y) does not sum to 1': float(np.abs(probs.sum(axis=(0, 1)) - 1.0).max()),
            'sender marginal depends on the receiver input y':
                float(np.abs(probs.sum(axis=1) - self.marginal_a[:, :, None]).max()),
            'receiver marginal depends on the sender input i':
                float(np.abs(probs.sum(axis=0) - self.marginal_b[:, None, :]).max()),
        }

    def check(self, tolerance=BOUND_TOLERANCE):
        """
        Raises InvalidBox unless the box is a normalised non-signaling distribution.
        """
        for problem, amount in self.violations().items():
            if amount > tolerance:
                raise InvalidBox(f"{problem} (by {amount:.3e})")
        return self

    def success_probability(self, channel):
        """
        (1/k) sum_{x,y,i} W(y|x) P(x, i | i, y).
        """
        return float(np.einsum('xiiy,xy->', self.probs, channel.w)) / self.k


def box_from_lp(solution, channel=None):
    """
    The box P(x, j | i, y) = r_{x,y}/k when i = j and
    (p_x - r_{x,y}) / (k(k-1)) otherwise.

    Columns of r are first completed to sum 1 (cheapest W(y|x) first when the
    channel is given, index order otherwise), which the receiver marginal needs.
    """
    try:
        solution.check()
    except InvalidSolution as exc:
        raise InvalidSolution(f"cannot build a box: {exc}") from exc
    if channel is not None:
        completed = complete_columns(channel, solution)
        if abs(completed.value - solution.value) > BOUND_TOLERANCE:
            logger.warning(
                "completing the columns of r moved the box value from %.9f to %.9f",
                solution.value, completed.value,
            )
        solution = completed
    else:
        r = solution.r.copy()
        deficit = 1.0 - r.sum(axis=0)
        if deficit.max() > BOUND_TOLERANCE:
            logger.warning(
                "columns of r short by up to %.3e were completed in index order; the box value may differ from %.9f",
                float(deficit.max()), solution.value,
            )
        for y in range(r.shape[1]):
            r[:, y] += _fill(np.maximum(solution.p - r[:, y], 0.0), deficit[y])
        solution = LPSolution(r=r, p=solution.p, value=solution.value, k=solution.k)

    r, p, k = solution.r, solution.p, solution.k
    x_size, y_size = r.shape
    if k == 1:
        probs = r.reshape(x_size, 1, 1, y_size).copy()
    else:
        off_diagonal = (p[:, None] - r) / (k * (k - 1))
        probs = np.broadcast_to(off_diagonal[:, None, None, :], (x_size, k, k, y_size)).copy()
        messages = np.arange(k)
        probs[:, messages, messages, :] = (r / k)[:, None, :]
    return NSBox(
        probs=probs,
        marginal_a=np.repeat((p / k)[:, None], k, axis=1),
        marginal_b=probs[:, :, 0, :].sum(axis=0),
    )


def box_from_code(channel, code):
    """
    The deterministic box of a classical code: x = e(i), j = d(y).
    """
    e = code.encoder_matrix(channel.x_size)
    d = code.decoder_matrix()
    probs = np.einsum('ix,yj->xjiy', e, d)
    return NSBox(probs=probs, marginal_a=e.T.copy(), marginal_b=d.T.copy())


def lp_from_box(box, channel, k):
    """
    Feasible LP point of a box: r_{x,y} = sum_i P(x, i | i, y),
    p_x = sum_i P_A(x|i), then p clipped to 1 and raised back to sum k in
    index order. The value equals the box's success probability.
    """
    _check_k(channel, k)
    if box.k != k:
        raise InvalidBox(f"box has {box.k} messages, expected {k}")
    if box.probs.shape[0] != channel.x_size or box.probs.shape[3] != channel.y_size:
        raise InvalidBox("box alphabets do not match the channel")
    box.check()
    r = np.einsum('xiiy->xy', box.probs)
    p = _rebalance(np.minimum(box.marginal_a.sum(axis=1), 1.0), k, floor=np.minimum(r.max(axis=1), 1.0))
    return LPSolution(r=r, p=p, value=_objective(channel, r, k), k=k).check()


def tightness_point(k, t):
    """
    The analytic optimum of the tightness family: p_x = k/n for every input
    and r_{x,y} = k/n whenever x belongs to the subset y.
    """
    channel = make_tightness(k, t)
    n = k * t
    r = np.zeros((n, channel.y_size))
    for y, subset in enumerate(tightness_outputs(k, t)):
        r[list(subset), y] = k / n
    p = np.full(n, k / n)
    return channel, LPSolution(r=r, p=p, value=_objective(channel, r, k), k=k)


def certify_tightness(k, t):
    """
    Certifies S^NS = 1 for the tightness family by checking the analytic point
    against the LP without solving it.

    Returns:
        float: the LP objective at the analytic point.
    """
    channel, point = tightness_point(k, t)
    return check_feasible(ns_program(channel, k), point.as_vector())
