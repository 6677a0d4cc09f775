"""Fixed-point encoding of reals as signed integers scaled by ``2**scale_bits``."""
from ..errors import FixedPointOverflow

INT64_LIMIT = 1 << 63


def encode_fixed(x, scale_bits):
    if not abs(x) < 2.0 ** (63 - scale_bits):
        raise FixedPointOverflow(f"{x!r} does not fit a 64-bit fixed-point word "
                                 f"at scale 2^{scale_bits}")
    return round(x * (1 << scale_bits))


def decode_fixed(n, scale_bits):
    return n / (1 << scale_bits)


def rdiv(n, d):
    """Integer division rounding half up; ``d > 0``."""
    q, r = divmod(n, d)
    return q + (2 * r >= d)


def check_word(n):
    if not -INT64_LIMIT <= n < INT64_LIMIT:
        raise FixedPointOverflow("fixed-point result leaves the 64-bit range")
    return n
