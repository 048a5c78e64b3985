"""Audit report containers with a stable JSON layout."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

VERDICTS = ("pass", "indeterminate", "fail")

# relative width of the indeterminate band around a declared bound
BAND = 0.05


def _clean(x):
    """Make numpy scalars, tuples and non-finite floats JSON friendly."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if hasattr(x, "tolist"):
        return _clean(x.tolist())
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    return x


@dataclass
class Check:
    """One audited condition.

    ``value`` is the sampled quantity and ``bound`` what it is compared with.
    A failing check must name a concrete ``witness`` point.
    """

    name: str
    verdict: str
    value: Optional[float] = None
    bound: Optional[float] = None
    witness: Optional[dict] = None
    detail: str = ""
    constants: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if self.verdict == "fail" and not self.witness:
            raise ValueError(f"check {self.name!r} fails without a witness")

    def to_dict(self):
        return {
            "name": self.name,
            "verdict": self.verdict,
            "value": _clean(self.value),
            "bound": _clean(self.bound),
            "witness": _clean(self.witness),
            "constants": _clean(self.constants),
            "detail": self.detail,
        }


@dataclass
class HypothesisReport:
    subject: str
    checks: list = field(default_factory=list)
    sampling: dict = field(default_factory=dict)

    @property
    def verdict(self):
        seen = {c.verdict for c in self.checks}
        for v in ("fail", "indeterminate"):
            if v in seen:
                return v
        return "pass"

    @property
    def constants(self):
        out = {}
        for c in self.checks:
            for k, v in c.constants.items():
                out[f"{c.name}.{k}"] = v
        return out

    def check(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failures(self):
        return [c for c in self.checks if c.verdict == "fail"]

    def extend(self, other, prefix=""):
        for c in other.checks:
            self.checks.append(Check(prefix + c.name, c.verdict, c.value, c.bound,
                                     c.witness, c.detail, dict(c.constants)))

    def to_dict(self):
        return {
            "subject": self.subject,
            "verdict": self.verdict,
            "checks": [c.to_dict() for c in self.checks],
            "sampling": _clean(self.sampling),
        }

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), indent=indent)

    def summary_lines(self):
        return [f"{c.verdict:>13}  {c.name}" + (f"  ({c.detail})" if c.detail else "")
                for c in self.checks]


def compare_upper(value, bound, *, strict=True, band=BAND):
    """Verdict for ``value < bound`` (or ``<=`` when not strict) with a band.

    Values within ``band * |bound|`` below the bound (absolute ``band`` when
    the bound is 0) are indeterminate.
    """
    width = band * abs(bound) if bound != 0 else band
    if value < bound - width:
        return "pass"
    if value > bound or (strict and value == bound):
        return "fail"
    if not strict and value == bound:
        return "pass"
    return "indeterminate"


def compare_lower(value, bound, *, strict=True, band=BAND):
    """Verdict for ``value > bound``, mirrored from :func:`compare_upper`."""
    return compare_upper(-value, -bound, strict=strict, band=band)


def worst(*verdicts):
    for v in ("fail", "indeterminate"):
        if v in verdicts:
            return v
    return "pass"
