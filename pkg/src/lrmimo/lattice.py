"""LLL lattice reduction on a QR factorization, with an adjustable start column.

Column indices ``k`` and ``k_start`` are 1-based throughout, matching the
usual statement of the algorithm: ``k_start=2`` is the classical LLL, larger
values leave the first ``k_start - 2`` columns of the basis untouched.
"""
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .flops import Event, FlopLedger

__all__ = [
    "ReductionParams",
    "ReductionOutput",
    "IterationCapExceeded",
    "lll_reduce",
    "size_reduce_column",
    "lovasz_holds",
    "givens",
    "swap_and_rotate",
    "is_reduced",
    "check_unimodular",
    "integer_det",
    "unimodular_inverse",
    "round_half_away",
]

ITERATION_CAP_FACTOR = 50


class IterationCapExceeded(RuntimeError):
    """Raised by :meth:`ReductionOutput.raise_if_capped` for a run that hit the loop cap."""

    def __init__(self, output):
        super().__init__(f"LLL stopped after {output.iteration_count} iterations without converging")
        self.output = output


@dataclass(frozen=True)
class ReductionParams:
    delta: float = 0.75
    k_start: int = 2

    def __post_init__(self):
        if not 0.25 < self.delta <= 1.0:
            raise ValueError(f"delta must lie in (1/4, 1], got {self.delta}")
        if int(self.k_start) != self.k_start or self.k_start < 2:
            raise ValueError(f"k_start must be an integer >= 2, got {self.k_start}")


@dataclass(frozen=True)
class ReductionOutput:
    q_tilde: np.ndarray
    r_tilde: np.ndarray
    t: np.ndarray
    swap_count: int
    iteration_count: int
    ledger: FlopLedger = field(compare=False)
    params: ReductionParams = ReductionParams()
    capped: bool = False

    @property
    def reduced(self):
        return not self.capped

    def raise_if_capped(self):
        if self.capped:
            raise IterationCapExceeded(self)
        return self


def round_half_away(x):
    """Nearest integer, ties away from zero (``round_half_away(-0.5) == -1``)."""
    return math.copysign(math.floor(abs(x) + 0.5), x)


def size_reduce_column(r_tilde, t, k, ledger=None, n_r=1):
    """Size-reduce column ``k`` of ``r_tilde`` in place against columns ``k-1 .. 1``.

    ``t`` receives the same integer column operations. Returns the number of
    non-zero multipliers applied.
    """
    j = k - 1
    nonzero = 0
    for l in range(k - 2, -1, -1):
        mu = round_half_away(r_tilde[l, j] / r_tilde[l, l])
        if mu != 0.0:
            r_tilde[: l + 1, j] -= mu * r_tilde[: l + 1, l]
            t[:, j] -= mu * t[:, l]
            nonzero += 1
    if ledger is not None:
        ledger.charge(Event.REDUCTION, k, n_r, nonzero)
    return nonzero


def lovasz_holds(r_tilde, k, delta=0.75, ledger=None):
    """True unless ``delta * R[k-1,k-1]^2 > R[k,k]^2 + R[k-1,k]^2`` (i.e. no swap needed)."""
    if ledger is not None:
        ledger.charge(Event.LOVASZ, k)
    a = r_tilde[k - 2, k - 2]
    b = r_tilde[k - 1, k - 1]
    c = r_tilde[k - 2, k - 1]
    return not (delta * a * a > b * b + c * c)


def givens(a, b):
    """Return ``(alpha, beta)`` such that ``[[alpha, beta], [-beta, alpha]] @ [a, b] = [hypot(a, b), 0]``."""
    norm = math.hypot(a, b)
    return a / norm, b / norm


def swap_and_rotate(r_tilde, q_tilde, t, k, ledger=None, n_r=1):
    """Exchange columns ``k-1`` and ``k`` and restore triangularity with a Givens rotation.

    Updates ``r_tilde``, ``q_tilde`` and ``t`` in place so that
    ``q_tilde @ r_tilde`` equals the column-swapped product.
    """
    i, j = k - 2, k - 1
    r_tilde[:, [i, j]] = r_tilde[:, [j, i]]
    t[:, [i, j]] = t[:, [j, i]]
    alpha, beta = givens(r_tilde[i, i], r_tilde[j, i])
    theta = np.array([[alpha, beta], [-beta, alpha]])
    r_tilde[i : j + 1, i:] = theta @ r_tilde[i : j + 1, i:]
    r_tilde[j, i] = 0.0
    q_tilde[:, i : j + 1] = q_tilde[:, i : j + 1] @ theta.T
    if ledger is not None:
        ledger.charge(Event.PERMUTATION, k, n_r)
        ledger.charge(Event.GIVENS, k, n_r)
        ledger.charge(Event.ROTATION, k, n_r)
        ledger.charge(Event.QUPDATE, k, n_r)
    return alpha, beta


def lll_reduce(q, r, params=None, ledger=None, n_r=None):
    """Run LLL on the factorization ``H = q @ r`` starting at column ``params.k_start``.

    ``n_r`` is the complex receive antenna count used by the flop model and
    defaults to half the number of rows of ``q``. Flops are charged to
    ``ledger`` when given; the returned output always carries its own ledger
    covering this run only.
    """
    params = params or ReductionParams()
    q = np.array(q, dtype=np.float64)
    r = np.array(r, dtype=np.float64)
    m = r.shape[0]
    if r.shape != (m, m) or q.ndim != 2 or q.shape[1] != m:
        raise ValueError(f"incompatible shapes q{q.shape} r{r.shape}")
    if np.any(np.tril(r, -1) != 0.0) or np.any(np.diag(r) <= 0.0):
        raise ValueError("r must be upper triangular with a positive diagonal")
    if params.k_start > m:
        raise ValueError(f"k_start={params.k_start} exceeds the dimension {m}")
    if n_r is None:
        n_r = max(1, (q.shape[0] + 1) // 2)

    run = FlopLedger()
    t = np.eye(m)
    delta, k_start = params.delta, params.k_start
    cap = ITERATION_CAP_FACTOR * m * m
    iterations = swaps = 0
    capped = False
    k = k_start
    while k <= m:
        if iterations >= cap:
            capped = True
            break
        iterations += 1
        size_reduce_column(r, t, k, run, n_r)
        if lovasz_holds(r, k, delta, run):
            k += 1
        else:
            swap_and_rotate(r, q, t, k, run, n_r)
            swaps += 1
            k = max(k - 1, k_start)
            run.charge(Event.MAX, k, n_r)

    if ledger is not None:
        ledger.counts.update(run.counts)
        ledger.event_counts.update(run.event_counts)
        ledger._total += run.total
    for a in (q, r, t):
        a.flags.writeable = False
    return ReductionOutput(q, r, t, swaps, iterations, run, params, capped)


def is_reduced(r_tilde, delta=0.75, k_start=2, tol=1e-9):
    """Check size reduction and the Lovasz condition on columns ``>= k_start``.

    ``tol`` is a relative slack absorbing floating point rounding.
    """
    r = np.asarray(r_tilde, dtype=np.float64)
    m = r.shape[0]
    for j in range(max(k_start, 2) - 1, m):
        for i in range(j):
            if abs(r[i, j]) > 0.5 * abs(r[i, i]) * (1.0 + tol):
                return False
        lhs = delta * r[j - 1, j - 1] ** 2
        rhs = r[j, j] ** 2 + r[j - 1, j] ** 2
        if lhs > rhs * (1.0 + tol):
            return False
    return True


def _as_integer_rows(t, tol=1e-9):
    t = np.asarray(t, dtype=np.float64)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {t.shape}")
    rounded = np.rint(t)
    if np.any(np.abs(t - rounded) > tol):
        return None
    return [[int(v) for v in row] for row in rounded]


def integer_det(a):
    """Exact determinant of an integer matrix by Bareiss fraction-free elimination."""
    m = [list(map(int, row)) for row in a]
    n = len(m)
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1] if n else 1


def check_unimodular(t, tol=1e-9):
    """True iff ``t`` is integral (within ``tol``) with determinant +-1."""
    rows = _as_integer_rows(t, tol)
    return rows is not None and abs(integer_det(rows)) == 1


def _fraction_inverse(rows):
    n = len(rows)
    aug = [[Fraction(v) for v in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(rows)]
    for c in range(n):
        p = next(i for i in range(c, n) if aug[i][c] != 0)
        aug[c], aug[p] = aug[p], aug[c]
        piv = aug[c][c]
        aug[c] = [v / piv for v in aug[c]]
        for i in range(n):
            if i != c and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [vi - f * vc for vi, vc in zip(aug[i], aug[c])]
    return [row[n:] for row in aug]


def unimodular_inverse(t):
    """Exact integer inverse of a unimodular matrix, as an ``int64`` array.

    Raises ``ValueError`` if ``t`` is not unimodular.
    """
    rows = _as_integer_rows(t)
    if rows is None or abs(integer_det(rows)) != 1:
        raise ValueError("matrix is not unimodular")
    n = len(rows)
    exact = np.array(rows, dtype=object)
    guess = np.rint(np.linalg.inv(np.array(rows, dtype=np.float64)))
    cand = np.array([[int(v) for v in row] for row in guess], dtype=object)
    if not np.array_equal(exact.dot(cand), np.eye(n, dtype=int).astype(object)):
        inv = _fraction_inverse(rows)
        cand = np.array([[int(v) for v in row] for row in inv], dtype=object)
    return cand.astype(np.int64)
