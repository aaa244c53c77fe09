"""Test-only oracles kept independent of lrmimo.lattice.

``reference_lll`` follows the textbook loop on plain Python lists with a
modified Gram-Schmidt QR; ``exact_is_reduced`` checks the LLL conditions on
an integer basis in exact rational arithmetic.
"""
import math
from fractions import Fraction


def _cols(a):
    return [[float(a[i][j]) for i in range(len(a))] for j in range(len(a[0]))]


def mgs_qr(a):
    cols = _cols(a)
    n = len(cols)
    q = [c[:] for c in cols]
    r = [[0.0] * n for _ in range(n)]
    for j in range(n):
        for i in range(j):
            r[i][j] = sum(x * y for x, y in zip(q[i], q[j]))
            q[j] = [x - r[i][j] * y for x, y in zip(q[j], q[i])]
        r[j][j] = math.sqrt(sum(x * x for x in q[j]))
        q[j] = [x / r[j][j] for x in q[j]]
    return q, r


def reference_lll(a, delta=0.75):
    """Return T (list of int rows) for the basis given by the columns of ``a``."""
    q, r = mgs_qr(a)
    m = len(r)
    t = [[int(i == j) for j in range(m)] for i in range(m)]
    k = 1
    while k < m:
        for l in range(k - 1, -1, -1):
            mu = round(r[l][k] / r[l][l])
            if mu:
                for i in range(l + 1):
                    r[i][k] -= mu * r[i][l]
                for i in range(m):
                    t[i][k] -= mu * t[i][l]
        if delta * r[k - 1][k - 1] ** 2 > r[k][k] ** 2 + r[k - 1][k] ** 2:
            for row in r:
                row[k - 1], row[k] = row[k], row[k - 1]
            for row in t:
                row[k - 1], row[k] = row[k], row[k - 1]
            a_, b_ = r[k - 1][k - 1], r[k][k - 1]
            nrm = math.hypot(a_, b_)
            c, s = a_ / nrm, b_ / nrm
            for j in range(k - 1, m):
                x, y = r[k - 1][j], r[k][j]
                r[k - 1][j] = c * x + s * y
                r[k][j] = -s * x + c * y
            q[k - 1], q[k] = (
                [c * x + s * y for x, y in zip(q[k - 1], q[k])],
                [-s * x + c * y for x, y in zip(q[k - 1], q[k])],
            )
            k = max(k - 1, 1)
        else:
            k += 1
    return t


def matmul(a, b):
    return [[sum(a[i][p] * b[p][j] for p in range(len(b))) for j in range(len(b[0]))] for i in range(len(a))]


def exact_is_reduced(basis, delta=Fraction(3, 4), slack=Fraction(1, 10**9)):
    """LLL conditions via exact Gram-Schmidt on the integer columns of ``basis``."""
    cols = [[Fraction(basis[i][j]) for i in range(len(basis))] for j in range(len(basis[0]))]
    n = len(cols)
    star, norms = [], []
    mu = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        v = cols[i][:]
        for j in range(i):
            mu[i][j] = sum(x * y for x, y in zip(cols[i], star[j])) / norms[j]
            v = [x - mu[i][j] * y for x, y in zip(v, star[j])]
        star.append(v)
        norms.append(sum(x * x for x in v))
    for i in range(n):
        for j in range(i):
            if abs(mu[i][j]) > Fraction(1, 2) * (1 + slack):
                return False
    for i in range(1, n):
        lhs = delta * norms[i - 1]
        rhs = norms[i] + mu[i][i - 1] ** 2 * norms[i - 1]
        if lhs > rhs * (1 + slack):
            return False
    return True


def exact_inverse(t):
    n = len(t)
    aug = [[Fraction(v) for v in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(t)]
    for c in range(n):
        p = next(i for i in range(c, n) if aug[i][c] != 0)
        aug[c], aug[p] = aug[p], aug[c]
        aug[c] = [v / aug[c][c] for v in aug[c]]
        for i in range(n):
            if i != c:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[c])]
    return [row[n:] for row in aug]
