import re
from fractions import Fraction
from numbers import Rational

from ..errors import MalformedNumber

_DECIMAL = re.compile(r"[+-]?\d+(\.\d+)?")
_FRACTION = re.compile(r"([+-]?\d+)/(\d+)")


def rat_from_decimal(text):
    """
    Parse a decimal ("0.35") or fraction ("7/20") literal into an exact Fraction.

    Parameters
    ----------
    text : str
        The literal. Surrounding whitespace is ignored. Scientific notation,
        bare dots (".5") and zero denominators are rejected.

    Returns
    -------
    fractions.Fraction
        The exact value in canonical form, so "0.50" and "1/2" compare and hash equal.

    Raises
    ------
    MalformedNumber
        If the literal is neither a plain decimal nor a fraction.
    """
    if not isinstance(text, str):
        raise MalformedNumber(f"expected a decimal or fraction string, got {type(text).__name__}")
    literal = text.strip()
    if _DECIMAL.fullmatch(literal):
        return Fraction(literal)
    match = _FRACTION.fullmatch(literal)
    if match:
        numerator, denominator = int(match.group(1)), int(match.group(2))
        if denominator == 0:
            raise MalformedNumber(f"zero denominator in '{text}'")
        return Fraction(numerator, denominator)
    raise MalformedNumber(f"'{text}' is not a decimal or fraction literal")


def as_rational(value):
    """Coerce an int, Fraction or literal string to a Fraction. Floats are refused."""
    if isinstance(value, bool):
        raise MalformedNumber(f"booleans are not probabilities: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, str):
        return rat_from_decimal(value)
    raise MalformedNumber(
        f"{value!r} ({type(value).__name__}) is not exact; pass a decimal or fraction string"
    )


def format_fraction(value):
    """Canonical "a/b" text ("3/10", "0", "1")."""
    return str(Fraction(value))


def to_decimal_string(value):
    """
    Exact decimal text of a terminating rational, e.g. 7/20 -> "0.35".

    Non-terminating values (denominator with a prime factor other than 2 and 5)
    fall back to the fraction string, which rat_from_decimal also accepts.
    """
    value = Fraction(value)
    denominator = value.denominator
    twos = fives = 0
    while denominator % 2 == 0:
        denominator //= 2
        twos += 1
    while denominator % 5 == 0:
        denominator //= 5
        fives += 1
    if denominator != 1:
        return format_fraction(value)

    places = max(twos, fives)
    scaled = abs(value.numerator) * (10**places // value.denominator)
    sign = "-" if value < 0 else ""
    if places == 0:
        return f"{sign}{scaled}"
    digits = str(scaled).rjust(places + 1, "0")
    whole, frac = digits[:-places], digits[-places:].rstrip("0")
    return f"{sign}{whole}.{frac}" if frac else f"{sign}{whole}"
