"""Input validation helpers shared by the estimator and the command line."""

from __future__ import annotations

import math
from typing import Iterable, Sequence

from .amm.swap import SIDES
from .exceptions import ValidationError


def check_positive(name: str, value, allow_zero: bool = False) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name} must be a number, got {value!r}") from exc
    if math.isnan(v) or math.isinf(v) or v < 0 or (v == 0 and not allow_zero):
        bound = "nonnegative" if allow_zero else "positive"
        raise ValidationError(f"{name} must be finite and {bound}, got {value!r}")
    return v


def check_interval(seconds) -> int:
    if isinstance(seconds, bool) or not isinstance(seconds, int) or seconds <= 0:
        raise ValidationError(f"interval must be a positive integer number of seconds, got {seconds!r}")
    return seconds


def check_side(side: str) -> str:
    if side not in SIDES:
        raise ValidationError(f"side must be one of {', '.join(SIDES)}, got {side!r}")
    return side


def check_positive_list(name: str, values: Iterable) -> tuple:
    out = tuple(check_positive(name, v) for v in values)
    if not out:
        raise ValidationError(f"{name} must not be empty")
    if len(set(out)) != len(out):
        raise ValidationError(f"{name} must not contain duplicates")
    return out


def check_pcts(pcts: Sequence) -> tuple:
    return check_positive_list("pct", pcts)


def check_sizes(sizes: Sequence) -> tuple:
    return check_positive_list("size", sizes)


def check_cutoff(cutoff):
    if cutoff is None:
        return None
    return check_positive("outlier cutoff", cutoff, allow_zero=True)


def parse_number_list(text: str) -> list[float]:
    """``"100,500,1e3"`` -> ``[100.0, 500.0, 1000.0]``."""
    items = [t.strip() for t in text.split(",") if t.strip()]
    try:
        return [float(t) for t in items]
    except ValueError as exc:
        raise ValidationError(f"expected a comma-separated list of numbers, got {text!r}") from exc


def parse_pct_list(text: str) -> list[float]:
    """Percent list; ``"1,2,10"`` and ``"1%,2%,10%"`` both mean 1%, 2% and 10%."""
    return [v / 100 for v in parse_number_list(text.replace("%", ""))]
