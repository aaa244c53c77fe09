from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lrmimo.flops import Event, FlopLedger, OpKind, event_cost, event_ops, merge, weight


def test_weights():
    assert weight(OpKind.ADD) == 1
    assert weight(OpKind.MULT) == 1
    assert weight(OpKind.SQRT) == 8
    assert weight(OpKind.DIV) == 8
    assert weight("Div") == 8


def _by_hand(div=0, mult=0, add=0, sqrt=0):
    return 8 * div + 1 * mult + 1 * add + 8 * sqrt


@pytest.mark.parametrize(
    "event, kwargs, expected",
    [
        (Event.LOVASZ, {}, _by_hand(mult=4, add=2)),
        (Event.GIVENS, {}, _by_hand(div=2, mult=2, add=1, sqrt=1)),
        (Event.MAX, {}, _by_hand(add=2)),
        (Event.REDUCTION, {"k": 2}, _by_hand(div=1, mult=2, add=2)),
        (Event.QUPDATE, {}, 2 * _by_hand(mult=2, add=1) * 2),
        (Event.PERMUTATION, {"n_r": 4}, 2 * 4 * _by_hand(add=3)),
        (Event.ROTATION, {"k": 2, "n_r": 4}, 2 * _by_hand(mult=2, add=1) * (2 * 4 - 2 + 2)),
    ],
)
def test_event_cost_matches_hand_count(event, kwargs, expected):
    assert event_cost(event, **kwargs) == expected


def test_event_cost_frozen_values():
    assert event_cost("Lovasz") == 6
    assert event_cost("Givens") == 27
    assert event_cost("Max") == 2
    assert event_cost("Reduction", k=2) == 12
    assert event_cost("QUpdate") == 12
    assert event_cost("Permutation", n_r=4) == 24
    assert event_cost("Rotation", k=2, n_r=4) == 48


def test_reduction_conditional_charge():
    # 3 passes at k=4, only one multiplier non-zero: 3 divisions + 1 multiply-add pair
    assert event_ops(Event.REDUCTION, k=4, nonzero=1) == Counter({OpKind.DIV: 3, OpKind.MULT: 2, OpKind.ADD: 2})
    assert event_cost(Event.REDUCTION, k=4, nonzero=0) == 24
    assert event_cost(Event.REDUCTION, k=4) == 3 * 12
    with pytest.raises(ValueError):
        event_ops(Event.REDUCTION, k=2, nonzero=2)


def _ledger(events):
    led = FlopLedger()
    for e, k in events:
        led.charge(e, k=k, n_r=4)
    return led


events = st.lists(st.tuples(st.sampled_from(list(Event)), st.integers(2, 8)), max_size=30)


@given(events, events)
def test_merge_properties(a_ev, b_ev):
    a, b = _ledger(a_ev), _ledger(b_ev)
    assert merge(FlopLedger(), a) == a
    assert merge(a, b) == merge(b, a)
    assert merge(a, b).total == a.total + b.total
    assert (a + b).recompute_total() == a.total + b.total


@given(events)
def test_incremental_total_matches_counts(ev):
    led = _ledger(ev)
    assert led.total == led.recompute_total()
    assert sum(led.event_counts.values()) == len(ev)


def test_trace_records_events():
    led = FlopLedger(trace=[])
    led.charge(Event.REDUCTION, k=3, n_r=2, nonzero=1)
    led.charge(Event.LOVASZ, k=3, n_r=2)
    assert led.trace == [(Event.REDUCTION, 3, 2, 1), (Event.LOVASZ, 3, 2, None)]
    assert led.total == event_cost(Event.REDUCTION, 3, 2, 1) + 6
