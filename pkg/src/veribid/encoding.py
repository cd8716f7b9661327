"""Wire-format helpers shared by every module.

Big integers travel as lowercase big-endian hex without leading zeros
("0" for zero).  Structured records are serialized as canonical JSON:
keys sorted, no insignificant whitespace, small integers in decimal,
big integers as hex strings.  Signatures and hashes are computed over
these exact bytes, so the encoding must be bit-stable across runs.
"""

from __future__ import annotations

import json
import re
from datetime import datetime, timezone
from fractions import Fraction

from .errors import DomainError

_HEX_RE = re.compile(r"^(0|[1-9a-f][0-9a-f]*)$")


def int_to_hex(value: int) -> str:
    if value < 0:
        raise DomainError("negative integers have no hex form in this protocol")
    return format(value, "x")


def hex_to_int(text: str) -> int:
    if not isinstance(text, str) or not _HEX_RE.match(text):
        raise DomainError(f"not a canonical hex integer: {text!r}")
    return int(text, 16)


def _reject_floats(obj: object) -> None:
    if isinstance(obj, float):
        raise DomainError("floats are not allowed in canonical JSON payloads")
    if isinstance(obj, dict):
        for key, val in obj.items():
            if not isinstance(key, str):
                raise DomainError("canonical JSON object keys must be strings")
            _reject_floats(val)
    elif isinstance(obj, (list, tuple)):
        for item in obj:
            _reject_floats(item)


def canonical_json(obj: object) -> bytes:
    """Serialize to the canonical byte form used for signing and hashing."""
    _reject_floats(obj)
    return json.dumps(obj, sort_keys=True, separators=(",", ":"),
                      ensure_ascii=True, allow_nan=False).encode("ascii")


def fraction_to_str(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def str_to_fraction(text: str) -> Fraction:
    """Parse "3/10", "0.3" or "3" into an exact rational."""
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"not a rational: {text!r}") from exc


def format_timestamp(moment: datetime) -> str:
    if moment.tzinfo is None:
        raise DomainError("timestamps must be timezone-aware")
    return moment.astimezone(timezone.utc).isoformat(timespec="seconds")


def parse_timestamp(text: str) -> datetime:
    try:
        moment = datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError as exc:
        raise DomainError(f"not an RFC-3339 timestamp: {text!r}") from exc
    if moment.tzinfo is None:
        raise DomainError(f"timestamp lacks a timezone: {text!r}")
    return moment.astimezone(timezone.utc)


def utc_now() -> datetime:
    return datetime.now(timezone.utc)
