"""Exact rational linear algebra for small hull problems."""
from fractions import Fraction
from functools import cmp_to_key


def row_reduce(rows):
    """Reduced row echelon form over Q; returns (rows, pivot columns)."""
    m = [[Fraction(x) for x in r] for r in rows]
    pivots = []
    ncols = len(m[0]) if m else 0
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                k = m[i][c]
                m[i] = [a - k * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(vectors):
    if not vectors:
        return 0
    return len(row_reduce(vectors)[1])


def affine_dimension(points):
    if len(points) <= 1:
        return 0
    base = points[0]
    diffs = [[a - b for a, b in zip(p, base)] for p in points[1:]]
    return rank(diffs)


def affine_coordinates(points):
    """Project points onto coordinates that are injective on their affine hull."""
    if len(points) <= 1:
        return [tuple() for _ in points], []
    base = points[0]
    diffs = [[a - b for a, b in zip(p, base)] for p in points[1:]]
    _, piv = row_reduce(diffs)
    return [tuple(Fraction(p[c]) for c in piv) for p in points], piv


def feasible(A, b):
    """Is there x >= 0 with A x = b?  Phase-one simplex with Bland's rule, exact."""
    m = len(A)
    n = len(A[0]) if m else 0
    T = []
    for i in range(m):
        row = [Fraction(x) for x in A[i]]
        rhs = Fraction(b[i])
        if rhs < 0:
            row = [-x for x in row]
            rhs = -rhs
        art = [Fraction(1) if j == i else Fraction(0) for j in range(m)]
        T.append(row + art + [rhs])
    basis = [n + i for i in range(m)]
    width = n + m
    # objective: minimise the sum of artificials, written as reduced costs
    obj = [Fraction(0)] * (width + 1)
    for i in range(m):
        for j in range(width + 1):
            obj[j] -= T[i][j]
    for i in range(m):
        obj[n + i] += 1
    while True:
        enter = next((j for j in range(width) if obj[j] < 0), None)
        if enter is None:
            break
        best = None
        for i in range(m):
            if T[i][enter] > 0:
                ratio = T[i][-1] / T[i][enter]
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            break
        r = best[1]
        piv = T[r][enter]
        T[r] = [x / piv for x in T[r]]
        for i in range(m):
            if i != r and T[i][enter] != 0:
                k = T[i][enter]
                T[i] = [a - k * c for a, c in zip(T[i], T[r])]
        k = obj[enter]
        obj = [a - k * c for a, c in zip(obj, T[r])]
        basis[r] = enter
    return obj[-1] == 0


def in_hull(p, points):
    """Exact convex-hull membership."""
    if not points:
        return False
    d = len(p)
    A = [[q[i] for q in points] for i in range(d)] + [[1] * len(points)]
    b = list(p) + [1]
    return feasible(A, b)


def hull_vertices(points):
    """Extreme points of a finite set (duplicates removed), in sorted order."""
    pts = sorted(set(tuple(Fraction(x) for x in p) for p in points))
    out = []
    for i, p in enumerate(pts):
        others = pts[:i] + pts[i + 1:]
        if not others or not in_hull(p, others):
            out.append(p)
    return out


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def order_polygon(coords):
    """Indices of 2-D points in counter-clockwise order (points in convex position)."""
    n = len(coords)
    cx = sum(c[0] for c in coords) / n
    cy = sum(c[1] for c in coords) / n
    o = (cx, cy)

    def half(p):
        dx, dy = p[0] - cx, p[1] - cy
        return 0 if (dy > 0 or (dy == 0 and dx > 0)) else 1

    def cmp(i, j):
        hi, hj = half(coords[i]), half(coords[j])
        if hi != hj:
            return hi - hj
        c = _cross(o, coords[i], coords[j])
        return -1 if c > 0 else (1 if c < 0 else 0)

    return sorted(range(n), key=cmp_to_key(cmp))
