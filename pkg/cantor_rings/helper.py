import hashlib
import json
import math

from .const import Target
from .cantor_exception import SpecError

LOG10_2 = math.log10(2.0)


def parity_sign(k: int) -> int:
    match k % 2:
        case 0:
            return 1
        case _:
            return -1


def ring_target(n: int, i: int, p: int) -> Target:
    """Trap that ring i of f_{p,d1..dn} maps into."""
    match ((n - i) % 2, p):
        case (1, 1) | (0, 0):
            return Target.SMALL
        case _:
            return Target.LARGE


def band_sign(n: int, k: int, p: int) -> int:
    """Orientation of f on band k (1 = innermost) of f_{p,d1..dn}."""
    return parity_sign(n - p - k + 1)


def parse_degrees(text: str) -> list[int]:
    try:
        degrees = [int(part) for part in text.replace(" ", "").split(",") if part]
    except ValueError as ex:
        raise SpecError(f"Invalid degree list '{text}'", field="/degrees") from ex
    if not degrees:
        raise SpecError("Empty degree list", field="/degrees")
    return degrees


def format_log_value(log_value: float) -> str:
    """Decimal string for exp(log_value), also beyond the double range."""
    if log_value == -math.inf:
        return "0"
    if log_value == math.inf:
        return "inf"
    if -700.0 < log_value < 700.0:
        return repr(math.exp(log_value))
    log10_value = log_value / math.log(10.0)
    exponent = math.floor(log10_value)
    mantissa = 10.0 ** (log10_value - exponent)
    if mantissa >= 9.9999999999995:
        mantissa /= 10.0
        exponent += 1
    return f"{mantissa:.12f}e{exponent:+d}"


def json_float(value: float):
    if math.isfinite(value):
        return value
    return str(value)


def canonical_json(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False)


def digest(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


def is_power_of_two(count: int) -> bool:
    return count > 0 and count & (count - 1) == 0


def json_pointer(path) -> str:
    return "/" + "/".join(str(part) for part in path)


def complex_to_dict(z: complex) -> dict:
    return {"re": json_float(z.real), "im": json_float(z.imag)}


def dict_to_complex(obj) -> complex:
    if isinstance(obj, dict):
        return complex(float(obj.get("re", 0.0)), float(obj.get("im", 0.0)))
    return complex(obj)
