"""
Named connections and the selector grammar used by the command line:

    power:<p> | arithmetic | geometric | harmonic | mix:<w>:<name1>:<name2>

``mix:w:a:b`` is ``w f_a + (1 - w) f_b``; its measure is the same mixture of
measures when both parts carry one.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import InputError
from .loewner import (
    BorelMeasure,
    arithmetic_measure,
    check_measure_matches,
    combine,
    geometric_measure,
    harmonic_measure,
    measure_connection_eval,
)
from .means import RepresentingFunction, connection_eval, make_power_fn, mixture


@dataclass(frozen=True)
class Connection:
    f: RepresentingFunction
    measure: Optional[BorelMeasure] = None

    def __post_init__(self):
        if self.measure is not None:
            check_measure_matches(self.f, self.measure)

    @property
    def label(self):
        return self.f.label

    def __call__(self, A, B):
        return connection_eval(self.f, A, B)

    def via_measure(self, A, B):
        if self.measure is None:
            raise InputError(f"{self.label} carries no measure")
        return measure_connection_eval(self.measure, A, B)


def _power_measure(p):
    if p == 1:
        return arithmetic_measure()
    if p == -1:
        return harmonic_measure()
    if p == 0:
        return geometric_measure()
    if p == 0.5:
        # ((1 + sqrt t)/2)^2 = (f_1 + f_0)/2
        return combine([0.5, 0.5], [arithmetic_measure(), geometric_measure()])
    return None


def power_mean(p) -> Connection:
    f = make_power_fn(p)
    return Connection(f, _power_measure(float(p)))


def _split_pair(rest):
    parts = rest.split(":")
    for i in range(1, len(parts)):
        a, b = ":".join(parts[:i]), ":".join(parts[i:])
        try:
            return parse_mean(a), parse_mean(b)
        except InputError:
            continue
    raise InputError(f"cannot split mixture operands {rest!r}")


def parse_mean(selector: str) -> Connection:
    """Resolve a catalog selector string to a :class:`Connection`."""
    sel = selector.strip()
    named = {"arithmetic": 1.0, "geometric": 0.0, "harmonic": -1.0}
    if sel in named:
        return power_mean(named[sel])
    head, _, rest = sel.partition(":")
    if head == "power" and rest:
        try:
            p = float(rest)
        except ValueError:
            raise InputError(f"bad power exponent in {selector!r}") from None
        if not -1.0 <= p <= 1.0:
            raise InputError(f"power exponent {p} outside [-1, 1]")
        return power_mean(p)
    if head == "mix" and rest:
        w_str, _, operands = rest.partition(":")
        try:
            w = float(w_str)
        except ValueError:
            raise InputError(f"bad mixture weight in {selector!r}") from None
        if not 0.0 <= w <= 1.0:
            raise InputError(f"mixture weight {w} outside [0, 1]")
        c1, c2 = _split_pair(operands)
        f = mixture([w, 1.0 - w], [c1.f, c2.f], label=sel)
        m = None
        if c1.measure is not None and c2.measure is not None:
            m = combine([w, 1.0 - w], [c1.measure, c2.measure])
        return Connection(f, m)
    raise InputError(f"unknown mean selector {selector!r}")


POWER_EXPONENTS = (-1.0, -0.5, 0.0, 0.5, 1.0)
# alpha > 0 with finite / infinite interior first moment respectively
MIXTURE_2A = "mix:0.5:arithmetic:harmonic"
MIXTURE_2B = "mix:0.5:arithmetic:geometric"
SYMMETRIC_SELECTORS = tuple(f"power:{p:g}" for p in POWER_EXPONENTS) + (MIXTURE_2A, MIXTURE_2B)


def symmetric_catalog():
    return [parse_mean(s) for s in SYMMETRIC_SELECTORS]
