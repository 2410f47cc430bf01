"""
One-shot coding as monotone submodular maximisation.

k * S(W, k) is the maximum over |S| <= k of f_W(S) = sum_y max_{x in S} W(y|x).
This module evaluates f_W, finds the optimum by enumeration, runs the greedy
algorithm (naive or lazy), and moves between codeword sets and explicit
encoder/decoder matrices.
"""
import heapq
import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np

from channel_app.conf import oneshot_setting
from coding_app.exceptions import (
    EmptySet,
    EnumerationCapExceeded,
    IndexOutOfRange,
    StochasticityViolation,
)

logger = logging.getLogger(__name__)

# Subsets evaluated per vectorised batch during exact search
_BATCH = 4096


@dataclass(frozen=True)
class Code:
    """
    Deterministic code: message i < len(codewords) is sent as codewords[i],
    later messages reuse codewords[0]; decoder[y] is the decoded message.
    Messages and inputs are 0-based.
    """
    codewords: tuple
    k: int
    decoder: tuple

    @property
    def size(self):
        return len(self.codewords)

    def encoder_matrix(self, x_size):
        """
        e as a k x |X| stochastic matrix, e[i, x] = e(x|i).
        """
        e = np.zeros((self.k, x_size))
        for i in range(self.k):
            x = self.codewords[i] if i < self.size else self.codewords[0]
            e[i, x] = 1.0
        return e

    def decoder_matrix(self):
        """
        d as a |Y| x k stochastic matrix, d[y, i] = d(i|y).
        """
        d = np.zeros((len(self.decoder), self.k))
        d[np.arange(len(self.decoder)), list(self.decoder)] = 1.0
        return d


@dataclass(frozen=True)
class GreedyTrace:
    """
    The greedy chain S_0 = {} ⊂ S_1 ⊂ ... and the marginal gain of each step.
    """
    chain: tuple
    gains: tuple


def _check_inputs(channel, subset):
    subset = [int(x) for x in subset]
    for x in subset:
        if not 0 <= x < channel.x_size:
            raise IndexOutOfRange(f"input {x} outside [0, {channel.x_size})")
    return subset


def f_value(channel, subset):
    """
    f_W(S) = sum_y max_{x in S} W(y|x); the empty set has value 0.
    """
    subset = _check_inputs(channel, subset)
    if not subset:
        return 0.0
    return float(channel.w[subset].max(axis=0).sum())


def i_infinity(channel, subset):
    """
    Order-infinity mutual information log2 f_W(S), in bits, of the uniform
    input distribution on S.
    """
    subset = _check_inputs(channel, subset)
    if not subset:
        raise EmptySet("I_inf is undefined for the empty set")
    return math.log2(f_value(channel, subset))


def ml_code(channel, codewords, k):
    """
    The code sending message i as codewords[i], decoded by maximum likelihood
    with the smallest message index winning ties.
    """
    codewords = tuple(_check_inputs(channel, codewords))
    if not codewords:
        raise EmptySet("a code needs at least one codeword")
    if len(set(codewords)) != len(codewords):
        raise IndexOutOfRange(f"codewords must be distinct, got {codewords}")
    if len(codewords) > k:
        raise IndexOutOfRange(f"{len(codewords)} codewords for only {k} messages")
    # argmax returns the first maximum, i.e. the smallest message index
    decoder = np.argmax(channel.w[list(codewords)], axis=0)
    return Code(codewords=codewords, k=k, decoder=tuple(int(i) for i in decoder))


def success_probability(channel, code):
    """
    Average success probability of a deterministic code, (1/k) f_W(S).
    """
    return f_value(channel, code.codewords) / code.k


def exact_opt(channel, k, enumeration_cap=None):
    """
    S(W, k) by enumerating every subset of size min(k, |X|).

    Returns:
        tuple: (value, Code) where the code is the lexicographically smallest
        optimal subset.
    """
    if k < 1:
        raise IndexOutOfRange(f"k must be positive, got {k}")
    enumeration_cap = oneshot_setting('ENUMERATION_CAP', enumeration_cap)
    size = min(k, channel.x_size)
    count = math.comb(channel.x_size, size)
    if count > enumeration_cap:
        raise EnumerationCapExceeded(count, enumeration_cap)

    best_value, best_subset = -1.0, None
    subsets = itertools.combinations(range(channel.x_size), size)
    while True:
        batch = np.array(list(itertools.islice(subsets, _BATCH)), dtype=int)
        if not batch.size:
            break
        values = channel.w[batch].max(axis=1).sum(axis=1)
        top = int(np.argmax(values))
        # Strict improvement keeps the earliest (lexicographically smallest) optimum
        if values[top] > best_value:
            best_value, best_subset = float(values[top]), tuple(int(x) for x in batch[top])

    code = ml_code(channel, best_subset, k)
    return f_value(channel, best_subset) / k, code


def marginal_gains(w, covered, candidates):
    """
    Marginal gains f(S + x) - f(S) for each candidate x, where `covered` is
    the per-output maximum over S. Summing clipped differences makes the
    floating-point gains non-increasing in S, so naive and lazy greedy see
    identical numbers.
    """
    return np.maximum(w[candidates] - covered, 0.0).sum(axis=1)


def greedy(channel, k, lazy=False):
    """
    S^greedy(W, k): add the input with the largest marginal gain, smallest
    index on ties, for min(k, |X|) steps.

    Returns:
        tuple: (value, Code, GreedyTrace)
    """
    if k < 1:
        raise IndexOutOfRange(f"k must be positive, got {k}")
    steps = min(k, channel.x_size)
    chosen, gains = _lazy_chain(channel.w, steps) if lazy else _naive_chain(channel.w, steps)
    chain = tuple(tuple(chosen[:j]) for j in range(steps + 1))
    code = ml_code(channel, chosen, k)
    return f_value(channel, chosen) / k, code, GreedyTrace(chain=chain, gains=tuple(gains))


def _naive_chain(w, steps):
    covered = np.zeros(w.shape[1])
    available = np.ones(w.shape[0], dtype=bool)
    chosen, gains = [], []
    everyone = np.arange(w.shape[0])
    for _ in range(steps):
        step_gains = marginal_gains(w, covered, everyone)
        step_gains[~available] = -np.inf
        x = int(np.argmax(step_gains))
        chosen.append(x)
        gains.append(float(step_gains[x]))
        available[x] = False
        covered = np.maximum(covered, w[x])
    return chosen, gains


def _lazy_chain(w, steps):
    """
    Lazy greedy: stale gains are upper bounds, so a refreshed gain that still
    beats the best stale entry (ties by index) is the true argmax.
    """
    covered = np.zeros(w.shape[1])
    initial = marginal_gains(w, covered, np.arange(w.shape[0]))
    heap = [(-float(g), x) for x, g in enumerate(initial)]
    heapq.heapify(heap)
    chosen, gains = [], []
    refreshes = 0
    while len(chosen) < steps:
        _, x = heapq.heappop(heap)
        fresh = float(marginal_gains(w, covered, np.array([x]))[0])
        refreshes += 1
        if not heap or (-fresh, x) <= heap[0]:
            chosen.append(x)
            gains.append(fresh)
            covered = np.maximum(covered, w[x])
        else:
            heapq.heappush(heap, (-fresh, x))
    logger.debug("lazy greedy: %d steps, %d gain evaluations", steps, refreshes)
    return chosen, gains


def _check_stochastic(matrix, label, tolerance):
    if np.any(matrix < -tolerance):
        raise StochasticityViolation(f"{label} has negative entries")
    deviation = np.abs(matrix.sum(axis=1) - 1.0)
    if deviation.size and deviation.max() > tolerance:
        raise StochasticityViolation(f"{label} row {int(np.argmax(deviation))} does not sum to 1")


def evaluate_pair(channel, e, d, tolerance=None):
    """
    Success probability (1/k) sum_{x,y,i} e(x|i) W(y|x) d(i|y) of an
    encoder e (k x |X|) and decoder d (|Y| x k).
    """
    tolerance = oneshot_setting('ROW_SUM_TOLERANCE', tolerance)
    e = np.asarray(e, dtype=float)
    d = np.asarray(d, dtype=float)
    k = e.shape[0]
    if e.shape != (k, channel.x_size) or d.shape != (channel.y_size, k):
        raise StochasticityViolation(
            f"encoder {e.shape} and decoder {d.shape} do not fit a {channel.x_size}x{channel.y_size} channel"
        )
    _check_stochastic(e, 'encoder', tolerance)
    _check_stochastic(d, 'decoder', tolerance)
    return float(np.trace(e @ channel.w @ d)) / k


def code_from_pair(channel, e, d):
    """
    Converse reduction: message i gets the input maximising
    sum_y W(y|x) d(i|y); duplicates are merged and the result is decoded by
    maximum likelihood. Its success probability is at least that of (e, d).
    """
    evaluate_pair(channel, e, d)
    scores = channel.w @ np.asarray(d, dtype=float)
    picks = np.argmax(scores, axis=0)
    codewords = tuple(dict.fromkeys(int(x) for x in picks))
    return ml_code(channel, codewords, len(picks))
