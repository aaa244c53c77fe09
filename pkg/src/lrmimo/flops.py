"""Flop accounting for the LLL reducer.

Operations are weighted Add=1, Mult=1, Sqrt=8, Div=8. Each algorithm step
("event") has a fixed operation mix; :class:`FlopLedger` accumulates both the
raw operation counts and how many times each event fired.
"""
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

__all__ = ["OpKind", "Event", "WEIGHTS", "weight", "event_ops", "event_cost", "FlopLedger", "merge"]


class OpKind(Enum):
    ADD = "Add"
    MULT = "Mult"
    SQRT = "Sqrt"
    DIV = "Div"


class Event(Enum):
    REDUCTION = "Reduction"
    LOVASZ = "Lovasz"
    PERMUTATION = "Permutation"
    GIVENS = "Givens"
    ROTATION = "Rotation"
    QUPDATE = "QUpdate"
    MAX = "Max"


WEIGHTS = {OpKind.ADD: 1, OpKind.MULT: 1, OpKind.SQRT: 8, OpKind.DIV: 8}


def weight(kind):
    return WEIGHTS[OpKind(kind)]


def event_ops(event, k=2, n_r=1, nonzero=None):
    """Operation mix of one event as a ``Counter`` keyed by :class:`OpKind`.

    ``k`` is the 1-based working column and ``n_r`` the complex receive
    antenna count. For ``Event.REDUCTION`` every one of the ``k - 1`` inner
    passes costs a division; ``nonzero`` of them (default: all) additionally
    apply the two multiply-adds of a column update.
    """
    event = Event(event)
    ops = Counter()
    if event is Event.REDUCTION:
        passes = k - 1
        nonzero = passes if nonzero is None else nonzero
        if not 0 <= nonzero <= passes:
            raise ValueError(f"nonzero={nonzero} outside [0, {passes}]")
        ops[OpKind.DIV] += passes
        ops[OpKind.MULT] += 2 * nonzero
        ops[OpKind.ADD] += 2 * nonzero
    elif event is Event.LOVASZ:
        ops[OpKind.MULT] += 4
        ops[OpKind.ADD] += 2
    elif event is Event.PERMUTATION:
        ops[OpKind.ADD] += 2 * n_r * 3
    elif event is Event.GIVENS:
        ops[OpKind.DIV] += 2
        ops[OpKind.MULT] += 2
        ops[OpKind.ADD] += 1
        ops[OpKind.SQRT] += 1
    elif event is Event.ROTATION:
        width = 2 * n_r - k + 2
        ops[OpKind.MULT] += 2 * 2 * width
        ops[OpKind.ADD] += 2 * 1 * width
    elif event is Event.QUPDATE:
        ops[OpKind.MULT] += 2 * 2 * 2
        ops[OpKind.ADD] += 2 * 1 * 2
    elif event is Event.MAX:
        ops[OpKind.ADD] += 2
    return ops


def _weighted(ops):
    return sum(WEIGHTS[kind] * n for kind, n in ops.items())


def event_cost(event, k=2, n_r=1, nonzero=None):
    """Weighted flop total of one event, e.g. ``event_cost("Givens") == 27``."""
    return _weighted(event_ops(event, k, n_r, nonzero))


@dataclass
class FlopLedger:
    """Running operation/event counts.

    Set ``trace=[]`` to also record every charged event as
    ``(event, k, n_r, nonzero)``; handy for cross-checking totals.
    """

    counts: Counter = field(default_factory=Counter)
    event_counts: Counter = field(default_factory=Counter)
    trace: list = None
    _total: int = 0

    def charge(self, event, k=2, n_r=1, nonzero=None):
        event = Event(event)
        ops = event_ops(event, k, n_r, nonzero)
        self.counts.update(ops)
        self.event_counts[event] += 1
        self._total += _weighted(ops)
        if self.trace is not None:
            self.trace.append((event, k, n_r, nonzero))

    @property
    def total(self):
        return self._total

    def recompute_total(self):
        return _weighted(self.counts)

    def merge(self, other):
        out = FlopLedger(self.counts + other.counts, self.event_counts + other.event_counts)
        out._total = self._total + other._total
        return out

    __add__ = merge

    def __eq__(self, other):
        if not isinstance(other, FlopLedger):
            return NotImplemented
        return (
            +self.counts == +other.counts
            and +self.event_counts == +other.event_counts
            and self._total == other._total
        )


def merge(a, b):
    return a.merge(b)
