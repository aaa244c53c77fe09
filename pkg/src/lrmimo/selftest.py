"""Quick invariant checks runnable without pytest (``lrmimo selftest``)."""
import numpy as np

from .flops import Event, event_cost
from .lattice import ReductionParams, check_unimodular, is_reduced, lll_reduce, unimodular_inverse
from .mimo import Constellation, LrZfDetector, draw_channel, qam_modulate, zf_detect


def _check(name, ok, verbose):
    if verbose:
        print(f"[{'PASS' if ok else 'FAIL'}] {name}")
    return bool(ok)


def run_selftest(verbose=True, trials=200, seed=7):
    rng = np.random.default_rng(seed)
    const = Constellation(16)
    results = []
    costs = {
        Event.LOVASZ: 6, Event.GIVENS: 27, Event.MAX: 2, Event.QUPDATE: 12,
    }
    results.append(_check(
        "flop unit costs",
        all(event_cost(e) == c for e, c in costs.items())
        and event_cost(Event.REDUCTION, k=2) == 12
        and event_cost(Event.PERMUTATION, n_r=4) == 24
        and event_cost(Event.ROTATION, k=2, n_r=4) == 48,
        verbose,
    ))

    unimodular = lattice = reduced = structure = ledger = detect = True
    for n_t in (2, 4, 8):
        for _ in range(max(1, trials // 3)):
            ch = draw_channel(n_t, n_t, rng)
            q, r = ch.qr
            m = r.shape[0]
            for k_start in sorted({2, min(3, m), min(n_t + 1, m)}):
                out = lll_reduce(q, r, ReductionParams(k_start=k_start))
                unimodular &= check_unimodular(out.t)
                t_inv = unimodular_inverse(out.t)
                rec = out.q_tilde @ out.r_tilde @ t_inv
                lattice &= np.linalg.norm(rec - ch.h_real) <= 1e-9 * np.linalg.norm(ch.h_real)
                reduced &= out.capped or is_reduced(out.r_tilde, 0.75, k_start)
                s = k_start - 2
                structure &= np.array_equal(out.t[:, :s], np.eye(m)[:, :s])
                structure &= np.array_equal(out.r_tilde[:, :s], r[:, :s])
                ledger &= out.ledger.total == out.ledger.recompute_total()
                ledger &= out.ledger.event_counts[Event.GIVENS] == out.swap_count
                bits = rng.integers(0, 2, 4 * n_t)
                sym = qam_modulate(bits, const)
                x = ch.h @ sym
                detect &= np.allclose(LrZfDetector(out, const)(x), sym)
                detect &= np.allclose(zf_detect(ch, x, const), sym)
    results.append(_check("T unimodular", unimodular, verbose))
    results.append(_check("Q~ R~ T^-1 reconstructs H", lattice, verbose))
    results.append(_check("outputs LLL-reduced from k_start", reduced, verbose))
    results.append(_check("leading columns untouched", structure, verbose))
    results.append(_check("ledger consistency", ledger, verbose))
    results.append(_check("noiseless detection exact", detect, verbose))
    return all(results)
