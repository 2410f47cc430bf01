"""
Finite noisy channels W(y|x): the data model, validation, and the generators
used throughout the project (standard families, the tightness family, the
max-coverage reduction, tensor powers and seeded random instances).
"""
import functools
import itertools
import logging
import numbers
from dataclasses import dataclass
from math import comb

import numpy as np

from channel_app.conf import oneshot_setting
from channel_app.exceptions import (
    InvalidSetSystem,
    MalformedMatrix,
    NegativeEntry,
    OutOfRange,
    RowSumViolation,
    SizeCapExceeded,
)

logger = logging.getLogger(__name__)

# Row-sum deviations at or below this are floating-point noise
_ROUNDING_NOISE = 1e-12


def seeded_rng(seed):
    """
    numpy Generator for an integer seed. Negative seeds wrap onto [0, 2**64)
    so every integer is accepted.
    """
    if isinstance(seed, bool) or not isinstance(seed, numbers.Integral):
        raise OutOfRange(f"seed must be an integer, got {seed!r}")
    seed = int(seed)
    return np.random.default_rng(seed if seed >= 0 else seed % 2**64)


@dataclass(frozen=True, eq=False)
class Channel:
    """
    Row-stochastic matrix w[x, y] = W(y|x). Immutable once built; construct it
    through `validate` or one of the generators.
    """
    w: np.ndarray
    name: str = ''

    def __post_init__(self):
        self.w.setflags(write=False)

    @property
    def x_size(self):
        return self.w.shape[0]

    @property
    def y_size(self):
        return self.w.shape[1]

    def __repr__(self):
        label = self.name or 'channel'
        return f'<Channel {label} {self.x_size}x{self.y_size}>'


@dataclass(frozen=True)
class SetSystem:
    """
    A collection of d-element subsets T_x of {0, ..., ground_size - 1},
    indexed by x. Instance format of the max-k-coverage problem.
    """
    ground_size: int
    sets: tuple
    uniform_size: int

    def __post_init__(self):
        if self.ground_size < 1:
            raise InvalidSetSystem("ground set must be nonempty")
        if not self.sets:
            raise InvalidSetSystem("at least one set is required")
        if self.uniform_size < 1:
            raise InvalidSetSystem("set size d must be at least 1")
        normalised = []
        for x, members in enumerate(self.sets):
            members = tuple(sorted(set(members)))
            if len(members) != self.uniform_size:
                raise InvalidSetSystem(
                    f"T_{x} has {len(members)} elements, expected d = {self.uniform_size}"
                )
            if members[0] < 0 or members[-1] >= self.ground_size:
                raise InvalidSetSystem(f"T_{x} has elements outside [0, {self.ground_size})")
            normalised.append(members)
        object.__setattr__(self, 'sets', tuple(normalised))

    def union_size(self, subset):
        """
        |∪_{x in subset} T_x|.
        """
        covered = set()
        for x in subset:
            covered.update(self.sets[x])
        return len(covered)


def validate(raw_matrix, name='', tolerance=None):
    """
    Builds a Channel from a matrix of reals.

    Rows that sum to 1 within the row-sum tolerance are renormalised exactly;
    anything further away is rejected.
    """
    tolerance = oneshot_setting('ROW_SUM_TOLERANCE', tolerance)
    try:
        w = np.array(raw_matrix, dtype=float)
    except (TypeError, ValueError) as exc:
        raise MalformedMatrix(f"channel matrix is not rectangular and numeric: {exc}") from exc
    if w.ndim != 2 or w.shape[0] < 1 or w.shape[1] < 1:
        raise MalformedMatrix(f"channel matrix must be a nonempty 2-d array, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise MalformedMatrix("channel matrix contains NaN or infinite entries")

    negative = np.argwhere(w < 0)
    if negative.size:
        x, y = (int(i) for i in negative[0])
        raise NegativeEntry(x, y, float(w[x, y]))

    totals = w.sum(axis=1)
    deviation = np.abs(totals - 1.0)
    worst = int(np.argmax(deviation))
    if deviation[worst] > tolerance:
        raise RowSumViolation(worst, float(totals[worst]))
    if np.any(deviation > 0):
        noticeable = int(np.count_nonzero(deviation > _ROUNDING_NOISE))
        if noticeable:
            logger.warning("renormalising %d rows that were off by up to %.3e", noticeable, float(deviation[worst]))
        else:
            logger.debug("renormalising %d rows with rounding noise", int(np.count_nonzero(deviation)))
        w = w / totals[:, None]
    return Channel(w=w, name=name)


def _check_probability(value, label):
    if not 0.0 <= value <= 1.0:
        raise OutOfRange(f"{label} must lie in [0, 1], got {value}")


def make_bsc(p):
    """
    Binary symmetric channel with crossover probability p.
    """
    _check_probability(p, 'crossover probability')
    return validate([[1 - p, p], [p, 1 - p]], name=f'bsc({p})')


def make_erasure(eps):
    """
    Binary erasure channel; outputs are 0, 1 and the erasure symbol (last column).
    """
    _check_probability(eps, 'erasure probability')
    return validate(
        [[1 - eps, 0.0, eps], [0.0, 1 - eps, eps]],
        name=f'erasure({eps})',
    )


def tightness_outputs(k, t):
    """
    Output alphabet of the tightness family: all t-subsets of the n = kt
    inputs, in lexicographic order.
    """
    return list(itertools.combinations(range(k * t), t))


def make_tightness(k, t, size_cap=None):
    """
    The channel on n = kt inputs whose outputs are the t-subsets of the
    inputs; input x produces a uniformly random subset containing x.
    """
    if k < 1 or t < 1:
        raise OutOfRange(f"k and t must be positive, got k={k}, t={t}")
    size_cap = oneshot_setting('TIGHTNESS_SIZE_CAP', size_cap)
    n = k * t
    if n > size_cap:
        raise SizeCapExceeded('tightness channel (n = kt)', n, size_cap)

    outputs = tightness_outputs(k, t)
    weight = 1.0 / comb(n - 1, t - 1)
    w = np.zeros((n, len(outputs)))
    for y, subset in enumerate(outputs):
        w[list(subset), y] = weight
    return validate(w, name=f'tightness(k={k},t={t})')


def from_set_system(system):
    """
    Max-k-coverage reduction: W(y|x) = 1/d on T_x, so that
    d * f_W(S) = |∪_{x in S} T_x| for every S.
    """
    w = np.zeros((len(system.sets), system.ground_size))
    for x, members in enumerate(system.sets):
        w[x, list(members)] = 1.0 / system.uniform_size
    return validate(w, name=f'coverage(d={system.uniform_size})')


def random_set_system(ground_size, count, d, seed):
    """
    `count` independent uniformly random d-subsets of the ground set.
    """
    if not 1 <= d <= ground_size:
        raise OutOfRange(f"set size d={d} must lie in [1, {ground_size}]")
    if count < 1:
        raise OutOfRange("at least one set is required")
    rng = seeded_rng(seed)
    sets = tuple(
        tuple(int(e) for e in rng.choice(ground_size, size=d, replace=False))
        for _ in range(count)
    )
    return SetSystem(ground_size=ground_size, sets=sets, uniform_size=d)


def tensor_power(channel, n, size_cap=None):
    """
    n independent uses of a channel. Inputs and outputs are n-tuples in
    lexicographic order (first coordinate most significant).
    """
    if n < 1:
        raise OutOfRange(f"tensor power must be at least 1, got {n}")
    if n == 1:
        return channel
    size_cap = oneshot_setting('TENSOR_SIZE_CAP', size_cap)
    size = channel.x_size ** n * channel.y_size ** n
    if size > size_cap:
        raise SizeCapExceeded(f'tensor power {n}', size, size_cap)
    w = functools.reduce(np.kron, [channel.w] * n)
    label = channel.name or 'W'
    return validate(w, name=f'{label}^{n}')


def random_channel(x_size, y_size, seed):
    """
    Rows of independent uniform(0, 1) draws, normalised. Bit-identical for
    equal seeds.
    """
    if x_size < 1 or y_size < 1:
        raise OutOfRange(f"alphabet sizes must be positive, got {x_size}x{y_size}")
    rng = seeded_rng(seed)
    draws = rng.uniform(size=(x_size, y_size))
    totals = draws.sum(axis=1, keepdims=True)
    # All-zero rows are practically impossible but would not normalise
    draws[totals[:, 0] == 0] = 1.0
    return validate(draws / draws.sum(axis=1, keepdims=True), name=f'random({seed})')
