"""Arithmetic for tetration-scale magnitudes.

Quantities like exp^n(x) with astronomically large n cannot live in
floats, but every formula that needs them only ever scales, inverts,
exponentiates, or compares.  A value is stored either on a plain-real
fast path (magnitudes in [2^-512, 2^512], ordinary float arithmetic) or
as a canonical tower exp^h(f) with integer height h >= 1 and mantissa
f in [0,1); values below the plain range store the tower of their
reciprocal.  Heights are exact Python integers, so they survive the
combinatorial bookkeeping that produces them.  Tower addition is not
supported; nothing here needs it.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import mpmath

#: plain-path magnitude bounds
PLAIN_MAX = 2.0**512
PLAIN_MIN = 2.0**-512
_LN_PLAIN_MAX = 512.0 * math.log(2.0)

#: refuse integer ceilings whose decimal expansion would exceed this
CEIL_DIGIT_CAP = 2_000_000


@dataclass(frozen=True)
class TowerReal:
    """Canonical signed magnitude: plain float or tower exp^h(f).

    sign is -1, 0, or +1; recip marks that the stored tower is the
    reciprocal's.  height 0 is the plain path (mantissa holds the
    magnitude itself); height >= 1 towers are only used for magnitudes
    outside the plain range, so representations are unique and equality
    is structural.
    """

    sign: int
    recip: bool
    height: int
    mantissa: float

    def __post_init__(self) -> None:
        if self.sign not in (-1, 0, 1):
            raise ValueError("sign must be -1, 0, or +1")
        if self.sign == 0:
            if self.recip or self.height != 0 or self.mantissa != 0.0:
                raise ValueError("zero must be (0, False, 0, 0.0)")
            return
        if self.height < 0:
            raise ValueError("height must be >= 0")
        if self.height == 0:
            if self.recip:
                raise ValueError("plain values store no reciprocal flag")
            if not (PLAIN_MIN <= self.mantissa <= PLAIN_MAX):
                raise ValueError("plain magnitude out of range")
        else:
            if not (0.0 <= self.mantissa < 1.0):
                raise ValueError("tower mantissa must lie in [0, 1)")

    def is_zero(self) -> bool:
        return self.sign == 0

    def __repr__(self) -> str:
        return f"TowerReal({render(self)!r})"


ZERO = TowerReal(0, False, 0, 0.0)


def _peel(v: float) -> tuple[int, float]:
    """Write finite v >= 0 as exp^j(f) with f in [0,1); at most ~5 logs."""
    j = 0
    while v >= 1.0:
        v = math.log(v)
        j += 1
    return j, v


def _chain(f: float, h: int) -> float:
    """exp^h(f) in floats, math.inf once it leaves the representable range."""
    v = f
    for _ in range(h):
        if v > 709.0:
            return math.inf
        v = math.exp(v)
    return v


def _from_magnitude(sign: int, mag_height: int, mag_mantissa: float,
                    recip: bool) -> TowerReal:
    """Canonicalize a positive magnitude exp^mag_height(mag_mantissa)."""
    if mag_height <= 6:
        v = _chain(mag_mantissa, mag_height)
        if v <= PLAIN_MAX:
            if v == 0.0:
                return ZERO
            if v >= PLAIN_MIN:
                if recip:
                    v = 1.0 / v
                return TowerReal(sign, False, 0, v)
            # magnitude below the plain range: flip to the reciprocal tower
            return _tower_from_float(sign, -math.log(v), 1, not recip)
    return TowerReal(sign, recip, mag_height, mag_mantissa)


def _tower_from_float(sign: int, v: float, extra_height: int, recip: bool) -> TowerReal:
    """Canonical value of magnitude exp^extra_height(v) for finite v >= 0."""
    j, f = _peel(v)
    return _from_magnitude(sign, extra_height + j, f, recip)


def from_real(x: float) -> TowerReal:
    """Embed an ordinary real number."""
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        raise ValueError("value must be finite")
    if x == 0.0:
        return ZERO
    sign = 1 if x > 0 else -1
    mag = abs(x)
    if PLAIN_MIN <= mag <= PLAIN_MAX:
        return TowerReal(sign, False, 0, mag)
    if mag > PLAIN_MAX:
        return _tower_from_float(sign, mag, 0, False)
    # tiny: store the reciprocal's tower; -log stays comfortably finite
    return _tower_from_float(sign, -math.log(mag), 1, True)


def to_real(a: TowerReal) -> float:
    """Float value; towers overflow to signed inf (or 0 for reciprocals)."""
    if a.sign == 0:
        return 0.0
    if a.height == 0:
        return a.sign * a.mantissa
    if a.recip:
        return a.sign * 0.0
    return a.sign * math.inf


def tetrate(n: int, x) -> TowerReal:
    """exp applied n times to x (a real or a TowerReal); tetrate(0, x) = x.

    Arbitrarily large integer n is absorbed into the height, so the cost
    is O(1) apart from a short float chain near the plain range.
    """
    if n < 0:
        raise ValueError("tetration count must be >= 0")
    a = x if isinstance(x, TowerReal) else from_real(x)
    if n == 0:
        return a
    if a.sign == 0:
        return tetrate(n - 1, from_real(1.0))
    if a.height >= 1 and not a.recip:
        if a.sign > 0:
            return TowerReal(1, False, a.height + n, a.mantissa)
        # exp of a hugely negative value: reciprocal of exp of its magnitude
        flipped = _from_magnitude(1, a.height + 1, a.mantissa, True)
        return tetrate(n - 1, flipped)
    if a.height >= 1 and a.recip:
        # exp(+-1/huge) rounds to 1 honestly at float precision
        return tetrate(n - 1, from_real(1.0))
    v = a.sign * a.mantissa
    k = n
    while k > 0 and v <= _LN_PLAIN_MAX:
        if v < -_LN_PLAIN_MAX:
            # exp lands below the plain range: reciprocal tower of e^{-v}
            tiny = _tower_from_float(1, -v, 1, True)
            return tetrate(k - 1, tiny)
        v = math.exp(v)
        k -= 1
    if k == 0:
        return from_real(v)
    return _tower_from_float(1, v, k, False)


def tower_exp(a: TowerReal) -> TowerReal:
    return tetrate(1, a)


def tower_ln(a: TowerReal) -> TowerReal:
    """Natural log; exact height shift on the tower path."""
    if a.sign <= 0:
        raise ValueError("logarithm needs a positive value")
    if a.height == 0:
        v = math.log(a.mantissa)
        return from_real(v)
    if a.recip:
        inner = tower_ln(TowerReal(1, False, a.height, a.mantissa))
        return tower_negate(inner)
    return _from_magnitude(1, a.height - 1, a.mantissa, False)


def tower_negate(a: TowerReal) -> TowerReal:
    if a.sign == 0:
        return a
    return TowerReal(-a.sign, a.recip, a.height, a.mantissa)


def tower_recip(a: TowerReal) -> TowerReal:
    """1/a; exact flag flip on the tower path, exact division on plain."""
    if a.sign == 0:
        raise ZeroDivisionError("reciprocal of zero")
    if a.height == 0:
        return TowerReal(a.sign, False, 0, 1.0 / a.mantissa)
    return TowerReal(a.sign, not a.recip, a.height, a.mantissa)


def tower_scale(a: TowerReal, c) -> TowerReal:
    """c*a for a positive finite factor c (float or arbitrary int).

    Exact on the plain path.  On towers the factor is pushed one level
    down (ln(c*x) = ln x + ln c) when that level still fits in floats;
    once it does not, the honest adjustment to the mantissa is below
    float precision and the value is returned unchanged.
    """
    if isinstance(c, int):
        if c <= 0:
            raise ValueError("scale factor must be > 0")
        ln_c = math.log(c)  # exact-enough for big ints, no float conversion
        c_float = float(c) if c.bit_length() <= 1024 else math.inf
    else:
        c_float = float(c)
        if not (c_float > 0.0) or math.isinf(c_float):
            raise ValueError("scale factor must be positive and finite")
        ln_c = math.log(c_float)
    if a.sign == 0:
        return a
    if c_float == 1.0 and a.height == 0:
        return a
    if a.height == 0:
        mag = a.mantissa * c_float if math.isfinite(c_float) else math.inf
        if PLAIN_MIN <= mag <= PLAIN_MAX:
            return TowerReal(a.sign, False, 0, mag)
        return tower_scale_log(a, ln_c)
    return tower_scale_log(a, ln_c)


def tower_scale_log(a: TowerReal, ln_c: float) -> TowerReal:
    """Multiply by e^{ln_c}; the log-domain twin of tower_scale."""
    if a.sign == 0:
        return a
    if not math.isfinite(ln_c):
        raise ValueError("log factor must be finite")
    if a.recip:
        flipped = tower_scale_log(TowerReal(a.sign, False, a.height, a.mantissa), -ln_c)
        return tower_recip(flipped) if flipped.sign != 0 else ZERO
    if a.height == 0:
        level = math.log(a.mantissa) + ln_c
        if abs(level) <= _LN_PLAIN_MAX:
            # prefer the exact product when it stays in range
            direct = a.mantissa * math.exp(ln_c)
            if PLAIN_MIN <= direct <= PLAIN_MAX:
                return TowerReal(a.sign, False, 0, direct)
            return TowerReal(a.sign, False, 0, math.exp(level))
        if level > 0:
            return _tower_from_float(a.sign, level, 1, False)
        return _tower_from_float(a.sign, -level, 1, True)
    below = _chain(a.mantissa, a.height - 1)
    if math.isinf(below):
        return a  # adjustment far below mantissa precision
    level = below + ln_c
    if level <= 0.0:
        # scaled all the way below 1: magnitude e^{level} < 1
        return _tower_from_float(a.sign, -level, 1, True)
    return _tower_from_float(a.sign, level, 1, False)


def tower_pow(a: TowerReal, p) -> TowerReal:
    """a^p for positive a and positive real/int p: exp(p * ln a)."""
    if a.sign <= 0:
        raise ValueError("power base must be positive")
    la = tower_ln(a)
    if la.sign == 0:
        return from_real(1.0)
    return tower_exp(tower_scale(la, p))


def tower_compare(a: TowerReal, b: TowerReal) -> int:
    """-1, 0, or +1; a total order consistent with the real values."""
    if a.sign != b.sign:
        return -1 if a.sign < b.sign else 1
    if a.sign == 0:
        return 0
    mag = _compare_magnitude(a, b)
    return mag if a.sign > 0 else -mag


def _class_rank(a: TowerReal) -> int:
    # reciprocal towers sit below the plain range, towers above it
    if a.height == 0:
        return 1
    return 0 if a.recip else 2


def _compare_magnitude(a: TowerReal, b: TowerReal) -> int:
    ca, cb = _class_rank(a), _class_rank(b)
    if ca != cb:
        return -1 if ca < cb else 1
    if ca == 1:
        x, y = a.mantissa, b.mantissa
        return (x > y) - (x < y)
    key_a = (a.height, a.mantissa)
    key_b = (b.height, b.mantissa)
    raw = (key_a > key_b) - (key_a < key_b)
    return -raw if ca == 0 else raw


_RENDER_RE = re.compile(
    r"^(?P<neg>-)?(?P<recip>1/)?exp\^(?P<h>\d+)\((?P<f>[^)]+)\)$"
)


def render(a: TowerReal) -> str:
    """Textual form exp^h(f) / 1/exp^h(f), with sign prefix; zero is "0"."""
    if a.sign == 0:
        return "0"
    neg = "-" if a.sign < 0 else ""
    body = f"exp^{a.height}({a.mantissa!r})"
    if a.recip:
        body = "1/" + body
    return neg + body


def parse(text: str) -> TowerReal:
    """Inverse of render (whitespace-tolerant); re-canonicalizes."""
    s = text.strip()
    if s == "0":
        return ZERO
    m = _RENDER_RE.match(s)
    if m is None:
        raise ValueError(f"cannot parse tower literal {text!r}")
    sign = -1 if m.group("neg") else 1
    height = int(m.group("h"))
    f = float(m.group("f"))
    recip = m.group("recip") is not None
    if height == 0:
        if recip:
            raise ValueError("plain literals take no reciprocal prefix")
        return from_real(sign * f)
    if not (0.0 <= f < 1.0):
        raise ValueError("tower mantissa must lie in [0, 1)")
    return _from_magnitude(sign, height, f, recip)


def exp_ceil(exponent: float, scale: float = 1.0) -> int:
    """Exact integer ceiling of scale * e^exponent.

    Floats cannot give trustworthy ceilings past 2^53; this routes
    through arbitrary precision with enough digits for the result, and
    refuses (rather than silently truncates) when the integer would have
    more than CEIL_DIGIT_CAP digits.
    """
    if not math.isfinite(exponent) or not math.isfinite(scale) or scale <= 0:
        raise ValueError("need finite exponent and positive finite scale")
    digits = exponent / math.log(10.0) + math.log10(max(scale, 1.0)) + 30
    if digits > CEIL_DIGIT_CAP:
        raise OverflowError(
            f"integer ceiling would need ~{digits:.0f} digits, above the cap"
        )
    with mpmath.workdps(int(max(30, digits))):
        value = mpmath.mpf(scale) * mpmath.exp(mpmath.mpf(exponent))
        return int(mpmath.ceil(value))
