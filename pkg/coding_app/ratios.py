import math

from channel_app.exceptions import OutOfRange


def ratio(k, l):
    """
    (k/l)(1 - (1 - 1/k)^l), evaluated as -(k/l) expm1(l log1p(-1/k)) so that
    large k does not cancel catastrophically.
    """
    if k < 1 or l < 1:
        raise OutOfRange(f"k and l must be positive, got k={k}, l={l}")
    if k == 1:
        return 1.0 / l
    return -(k / l) * math.expm1(l * math.log1p(-1.0 / k))


def ratio_lower_bounds(k, l):
    """
    Returns:
        tuple: ((k/l)(1 - e^{-l/k}), 1 - l/(2k)); for l <= k,
        ratio(k, l) >= first >= second.
    """
    if k < 1 or l < 1:
        raise OutOfRange(f"k and l must be positive, got k={k}, l={l}")
    exp_form = -(k / l) * math.expm1(-l / k)
    return exp_form, 1.0 - l / (2.0 * k)
