"""Randomised identity checks for the disk kernel."""
import cmath
import math

import numpy as np

from .geometry import (
    BoundaryPoint,
    Geodesic,
    Isometry,
    busemann,
    compose,
    dist,
    geodesic_of,
    mobius,
    vertex_angle,
)


def random_point(rng, max_radius=5.0):
    r = rng.uniform(0.0, max_radius)
    return math.tanh(0.5 * r) * cmath.exp(1j * rng.uniform(0.0, 2 * math.pi))


def random_geodesic(rng):
    a = rng.uniform(0.0, 2 * math.pi)
    b = a + rng.uniform(0.05, 2 * math.pi - 0.05)
    return Geodesic(BoundaryPoint(a), BoundaryPoint(b))


def random_isometry(rng, max_disp=3.0):
    return compose(
        Isometry.translation(rng.uniform(0, max_disp), rng.uniform(0, 2 * math.pi)),
        Isometry.rotation(rng.uniform(0, 2 * math.pi)),
    )


def pythagoras(rng, n):
    """Relative error of cosh d = cosh t cosh r on random right triangles."""
    worst = 0.0
    for _ in range(n):
        g = random_geodesic(rng)
        t, r = rng.uniform(-4, 4), rng.uniform(-4, 4)
        p = g.point_from_fermi(t, r)
        lhs = math.cosh(dist(g.origin, p))
        rhs = math.cosh(t) * math.cosh(r)
        worst = max(worst, abs(lhs - rhs) / rhs)
    return worst


def law_of_sines(rng, n):
    """Relative spread of sinh(side)/sin(opposite angle) on random triangles."""
    worst = 0.0
    done = 0
    while done < n:
        p, q, s = (random_point(rng, 3.0) for _ in range(3))
        angles = [vertex_angle(p, q, s), vertex_angle(q, s, p), vertex_angle(s, p, q)]
        sides = [dist(q, s), dist(s, p), dist(p, q)]
        if min(angles) < 1e-3 or min(sides) < 1e-3:
            continue
        ratios = [math.sinh(a) / math.sin(b) for a, b in zip(sides, angles)]
        worst = max(worst, (max(ratios) - min(ratios)) / max(ratios))
        done += 1
    return worst


def busemann_lipschitz(rng, n, slack=1e-12):
    """Number of 1-Lipschitz violations and the largest excess."""
    bad = 0
    excess = -math.inf
    for _ in range(n):
        xi = BoundaryPoint(rng.uniform(0, 2 * math.pi))
        base, p, q = (random_point(rng) for _ in range(3))
        e = abs(busemann(xi, p, base) - busemann(xi, q, base)) - dist(p, q)
        excess = max(excess, e)
        if e > slack:
            bad += 1
    return bad, excess


def busemann_ray(rng, n):
    """Largest |B(beta(t)) - t| along rays from the base point."""
    worst = 0.0
    for _ in range(n):
        base = random_point(rng, 3.0)
        xi = BoundaryPoint(rng.uniform(0, 2 * math.pi))
        ray = geodesic_of(base, xi, origin_hint=base)
        t = rng.uniform(0, 10)
        worst = max(worst, abs(busemann(xi, ray.point_at(t), base) - t))
    return worst


def metric_axioms(rng, n):
    """(symmetry defect, triangle-inequality excess) over random triples."""
    sym, tri = 0.0, -math.inf
    for _ in range(n):
        p, q, s = (random_point(rng) for _ in range(3))
        sym = max(sym, abs(dist(p, q) - dist(q, p)))
        tri = max(tri, dist(p, s) - dist(p, q) - dist(q, s))
    return sym, tri


def isometry_invariance(rng, n, group=None, max_len=20):
    worst = 0.0
    for _ in range(n):
        if group is None:
            g = random_isometry(rng)
        else:
            letters = rng.choice(group.letters, size=rng.integers(1, max_len + 1))
            g = group.element([int(x) for x in letters])
        p, q = random_point(rng, 3.0), random_point(rng, 3.0)
        try:
            gp, gq = mobius(g, p), mobius(g, q)
            if max(abs(gp), abs(gq)) > 1 - 1e-6:
                continue
        except ZeroDivisionError:
            continue
        d = dist(p, q)
        worst = max(worst, abs(dist(gp, gq) - d) / max(1.0, d))
    return worst


def fermi_roundtrip(rng, n):
    worst = 0.0
    for _ in range(n):
        g = random_geodesic(rng)
        t, r = rng.uniform(-4, 4), rng.uniform(-4, 4)
        f = g.fermi(g.point_from_fermi(t, r))
        worst = max(worst, abs(f.t - t), abs(f.r - r))
    return worst


def identity_residuals(rng, n):
    """Largest distance from compose(g, g^-1) to the identity."""
    worst = 0.0
    ident = Isometry.identity()
    for _ in range(n):
        g = random_isometry(rng)
        h = compose(g, g.inverse())
        worst = max(worst, abs(h.a - ident.a) + abs(h.b) + abs(h.log_scale))
    return worst


SUITE = (
    ("pythagoras", pythagoras, 1e-9),
    ("law_of_sines", law_of_sines, 1e-8),
    ("fermi_roundtrip", fermi_roundtrip, 1e-9),
    ("busemann_ray", busemann_ray, 1e-9),
    ("isometry_invariance", isometry_invariance, 1e-10),
    ("identity", identity_residuals, 1e-12),
)


def run_suite(n=10_000, seed=0):
    """Rows ``(check, n, value, tolerance, passed)``."""
    rng = np.random.default_rng(seed)
    rows = []
    for name, fn, tol in SUITE:
        v = fn(rng, n)
        rows.append((name, n, float(v), tol, bool(v <= tol)))
    bad, excess = busemann_lipschitz(rng, n)
    rows.append(("busemann_lipschitz_violations", n, float(bad), 0.0, bad == 0))
    sym, tri = metric_axioms(rng, n)
    rows.append(("metric_symmetry", n, sym, 0.0, sym == 0.0))
    rows.append(("triangle_excess", n, max(tri, 0.0), 1e-12, tri <= 1e-12))
    return rows
