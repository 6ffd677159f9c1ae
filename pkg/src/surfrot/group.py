"""Genus-g surface groups built from the regular 4g-gon."""
import math
from fractions import Fraction

import numpy as np

from .exceptions import BudgetExceeded, DimensionMismatch, GenusTooSmall, ReductionStalled
from .geometry import (
    Isometry,
    compose,
    disk_point,
    dist,
    dist_from_origin,
    mobius,
    polygon_area,
    vertex_angle,
)

MAX_WORD_LEN = 12
DEFAULT_MAX_ELEMENTS = 500_000
DECREASE_TOL = 1e-12
DOMAIN_TOL = 1e-9
MAX_STEPS = 100_000


# -- words and homology ------------------------------------------------

class Word:
    """Freely reduced word in the letters ``+-1 .. +-2g``.

    Letter ``2j+1`` is ``a_{j+1}`` and letter ``2j+2`` is ``b_{j+1}``;
    a negative letter is the inverse generator.
    """

    __slots__ = ("letters",)

    def __init__(self, letters=()):
        out = []
        for x in letters:
            x = int(x)
            if x == 0:
                raise ValueError("letter 0 is not a generator")
            if out and out[-1] == -x:
                out.pop()
            else:
                out.append(x)
        self.letters = tuple(out)

    def __mul__(self, other):
        return Word(self.letters + other.letters)

    def inverse(self):
        return Word(-x for x in reversed(self.letters))

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __eq__(self, other):
        return isinstance(other, Word) and self.letters == other.letters

    def __hash__(self):
        return hash(self.letters)

    def __repr__(self):
        return f"Word({self.format()})"

    def format(self):
        if not self.letters:
            return "1"
        return " ".join(letter_name(x) for x in self.letters)

    @classmethod
    def parse(cls, text):
        """Parse ``"a1 b1 A1"`` style text (upper case or ``^-1`` for inverses) or a list of ints."""
        if isinstance(text, (list, tuple)):
            return cls(text)
        letters = []
        for tok in str(text).replace("*", " ").split():
            if tok == "1":
                continue
            inv = tok.endswith("^-1")
            if inv:
                tok = tok[:-3]
            kind, idx = tok[0], int(tok[1:])
            base = 2 * (idx - 1) + (1 if kind.lower() == "a" else 2)
            if kind.lower() not in "ab" or idx < 1:
                raise ValueError(f"bad letter {tok!r}")
            sign = -1 if (inv or kind.isupper()) else 1
            letters.append(sign * base)
        return cls(letters)


def letter_name(x):
    k = abs(x) - 1
    name = ("a" if k % 2 == 0 else "b") + str(k // 2 + 1)
    return name if x > 0 else name.upper()


class HomologyVector:
    """Exact vector in the basis ``[a1], [b1], ..., [ag], [bg]``."""

    __slots__ = ("coords",)

    def __init__(self, coords):
        self.coords = tuple(Fraction(c) for c in coords)

    @classmethod
    def zero(cls, genus):
        return cls([0] * (2 * genus))

    @classmethod
    def basis(cls, genus, letter):
        v = [0] * (2 * genus)
        v[abs(letter) - 1] = 1 if letter > 0 else -1
        return cls(v)

    @property
    def dim(self):
        return len(self.coords)

    def _check(self, other):
        if self.dim != other.dim:
            raise DimensionMismatch(f"dimensions {self.dim} and {other.dim} differ")

    def __add__(self, other):
        self._check(other)
        return HomologyVector(a + b for a, b in zip(self.coords, other.coords))

    def __sub__(self, other):
        self._check(other)
        return HomologyVector(a - b for a, b in zip(self.coords, other.coords))

    def __neg__(self):
        return HomologyVector(-a for a in self.coords)

    def __mul__(self, k):
        k = Fraction(k)
        return HomologyVector(a * k for a in self.coords)

    __rmul__ = __mul__

    def __truediv__(self, k):
        k = Fraction(k)
        return HomologyVector(a / k for a in self.coords)

    def __eq__(self, other):
        if isinstance(other, HomologyVector):
            return self.coords == other.coords
        try:
            return self.coords == tuple(Fraction(c) for c in other)
        except TypeError:
            return NotImplemented

    def __hash__(self):
        return hash(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def __len__(self):
        return len(self.coords)

    def is_zero(self):
        return not any(self.coords)

    def to_float(self):
        return np.array([float(c) for c in self.coords])

    def norm(self):
        return float(np.linalg.norm(self.to_float()))

    def to_list(self):
        return [str(c) for c in self.coords]

    def __repr__(self):
        return "HomologyVector(" + ", ".join(str(c) for c in self.coords) + ")"


def abelianize(w, genus=None):
    """Signed letter counts of a word."""
    letters = w.letters if isinstance(w, Word) else tuple(w)
    if genus is None:
        genus = max([1] + [(abs(x) + 1) // 2 for x in letters])
    counts = [0] * (2 * genus)
    for x in letters:
        counts[abs(x) - 1] += 1 if x > 0 else -1
    return HomologyVector(counts)


def wedge(u, v):
    """Algebraic intersection number in the standard symplectic basis."""
    u = u if isinstance(u, HomologyVector) else HomologyVector(u)
    v = v if isinstance(v, HomologyVector) else HomologyVector(v)
    u._check(v)
    if u.dim % 2:
        raise DimensionMismatch("homology vectors must have even length")
    total = Fraction(0)
    for i in range(0, u.dim, 2):
        total += u[i] * v[i + 1] - u[i + 1] * v[i]
    return total


def symplectic_matrix(genus):
    m = np.zeros((2 * genus, 2 * genus), dtype=int)
    for i in range(genus):
        m[2 * i, 2 * i + 1] = 1
        m[2 * i + 1, 2 * i] = -1
    return m


# -- the group -----------------------------------------------------------

def regular_polygon_radii(n, angle):
    """(inradius, circumradius) of the regular hyperbolic n-gon with interior angle ``angle``."""
    inr = math.acosh(math.cos(0.5 * angle) / math.sin(math.pi / n))
    circ = math.acosh(1.0 / (math.tan(math.pi / n) * math.tan(0.5 * angle)))
    return inr, circ


def vertex_radius_by_bisection(n, angle, tol=1e-13):
    """Hyperbolic circumradius giving interior angle ``angle``, found by bisection."""

    def interior(R):
        r = math.tanh(0.5 * R)
        vs = [r * complex(math.cos(2 * math.pi * k / n), math.sin(2 * math.pi * k / n)) for k in range(3)]
        return vertex_angle(vs[1], vs[0], vs[2])

    lo, hi = 1e-6, 30.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if interior(mid) > angle:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _side_pairing(phi_i, phi_j, inradius):
    return compose(
        compose(Isometry.rotation(phi_i), Isometry.translation(2.0 * inradius)),
        Isometry.rotation(math.pi - phi_j),
    )


class SurfaceGroup:
    """Fuchsian group of the closed genus-g surface with Dirichlet domain about 0."""

    def __init__(self, genus):
        if int(genus) != genus or genus < 2:
            raise GenusTooSmall(f"genus must be an integer >= 2, got {genus!r}")
        self.genus = genus = int(genus)
        n = 4 * genus
        self.n_sides = n
        self.vertex_angle = 2.0 * math.pi / n
        self.circumradius = vertex_radius_by_bisection(n, self.vertex_angle)
        r = math.tanh(0.5 * self.circumradius)
        # side k faces direction 2 pi k / n; vertices sit between sides
        self.domain_vertices = [
            r * complex(math.cos(2 * math.pi * (k + 0.5) / n), math.sin(2 * math.pi * (k + 0.5) / n))
            for k in range(n)
        ]
        self.inradius = _side_distance(self.domain_vertices[-1], self.domain_vertices[0])
        phis = [2 * math.pi * k / n for k in range(n)]
        gens = {}
        for j in range(genus):
            a = _side_pairing(phis[4 * j], phis[4 * j + 2], self.inradius)
            b = _side_pairing(phis[4 * j + 3], phis[4 * j + 1], self.inradius)
            gens[2 * j + 1] = a
            gens[2 * j + 2] = b
        for k in list(gens):
            gens[-k] = gens[k].inverse()
        self.generators = gens
        self.letters = tuple(sorted(gens, key=lambda x: (abs(x), x < 0)))
        rel = []
        for j in range(genus):
            rel += [2 * j + 1, 2 * j + 2, -(2 * j + 1), -(2 * j + 2)]
        self.relator = Word(rel)
        self._center_cache = {}

    # -- elements -----------------------------------------------------
    def element(self, w):
        """Isometry of a word (or letter sequence)."""
        letters = w.letters if isinstance(w, Word) else tuple(w)
        g = Isometry.identity()
        for x in letters:
            g = compose(g, self.generators[x])
        return g

    def domain_area(self):
        return polygon_area(self.domain_vertices)

    def in_domain(self, p, tol=DOMAIN_TOL):
        d0 = dist_from_origin(p)
        return all(d0 <= dist(p, mobius(g, 0j)) + tol for g in self.generators.values())

    # -- reduction ----------------------------------------------------
    def reduce(self, p, center=None):
        """Return ``(p0, w)`` with ``p = w . p0`` and ``p0`` in the Dirichlet domain."""
        p = disk_point(p)
        cands = self._candidates(center)
        c = 0j if center is None else complex(center)
        q = p
        w = []
        dq = dist(c, q)
        for _ in range(MAX_STEPS):
            best = None
            for x, g in cands:
                nq = mobius(g, q)
                dn = dist(c, nq)
                if dn < dq - DECREASE_TOL and (best is None or dn < best[0]):
                    best = (dn, x, nq)
            if best is None:
                break
            dq, x, q = best
            # p = w . q_old = w . g^-1 . q_new
            w.extend(_invert_letters(x))
        else:
            raise ReductionStalled("reduction exceeded the step cap")
        for x, g in cands:
            if dist(c, q) > dist(c, mobius(g, q)) + DOMAIN_TOL:
                raise ReductionStalled("point is outside the domain but no move decreases distance")
        return q, Word(w)

    def _candidates(self, center):
        """Pairs (letters, isometry) tried by the greedy reduction."""
        if center is None or complex(center) == 0:
            return [((x,), self.generators[x]) for x in self.letters]
        key = complex(center)
        if key not in self._center_cache:
            c = disk_point(center)
            dc = dist_from_origin(c)
            bound = 2.0 * (self.circumradius + dc) + 1e-6
            out = []
            for w, g in enumerate_elements(self, MAX_WORD_LEN, radius=bound + 2.0 * dc):
                if len(w) and dist(c, mobius(g, c)) <= bound:
                    out.append((w.letters, g))
            self._center_cache[key] = out
        return self._center_cache[key]

    def to_dict(self):
        return {
            "genus": self.genus,
            "generators": {letter_name(x): self.generators[x].to_dict() for x in self.letters if x > 0},
            "domain_vertices": [[v.real, v.imag] for v in self.domain_vertices],
            "relator": self.relator.format(),
            "inradius": self.inradius,
            "circumradius": self.circumradius,
        }


def _invert_letters(x):
    return tuple(-y for y in reversed(x))


def _side_distance(u, v):
    """Distance from 0 to the geodesic through u and v."""
    from .geometry import geodesic_of

    return geodesic_of(u, v).distance_to(0j)


def build_group(genus):
    return SurfaceGroup(genus)


def reduce(G, p, center=None):
    return G.reduce(p, center)


def deck_cocycle(G, f, y, center=None):
    """Deck word ``a_y`` with ``a_y^-1 f(y)`` in the domain."""
    return G.reduce(f(y), center)[1]


def _element_key(g):
    z = mobius(g, 0j)
    d = g.displacement()
    if d < 1e-6:
        return (0, 0, 0)
    u = z / abs(z)
    return (round(d * 1e6), round(u.real * 1e6), round(u.imag * 1e6))


def enumerate_elements(G, max_word_len, radius=None, max_elements=DEFAULT_MAX_ELEMENTS, return_complete=False):
    """Distinct elements given by freely reduced words up to ``max_word_len``.

    With ``radius`` only elements moving 0 by at most ``radius`` are kept.
    Words are expanded while they stay within ``radius`` plus the domain's
    circumradius, which suffices because the tiles met by a segment from 0
    have centers within that distance of it.  With ``return_complete`` the
    second return value tells whether the search closed before hitting the
    length bound.
    """
    if max_word_len > MAX_WORD_LEN or max_word_len < 0:
        raise BudgetExceeded(f"max_word_len must be in [0, {MAX_WORD_LEN}]")
    ident = Isometry.identity()
    out = [(Word(), ident)]
    seen = {_element_key(ident)}
    frontier = [(Word(), ident)]
    slack = G.circumradius + 0.5
    for _ in range(max_word_len):
        nxt = []
        for w, g in frontier:
            last = w.letters[-1] if w.letters else 0
            for x in G.letters:
                if x == -last:
                    continue
                h = compose(g, G.generators[x])
                d = h.displacement()
                if radius is not None and d > radius + slack:
                    continue
                key = _element_key(h)
                if key in seen:
                    continue
                seen.add(key)
                nw = Word(w.letters + (x,))
                nxt.append((nw, h))
                if radius is None or d <= radius:
                    out.append((nw, h))
                if len(out) > max_elements or len(seen) > 4 * max_elements:
                    raise BudgetExceeded(f"more than {max_elements} elements")
        frontier = nxt
        if not frontier:
            break
    if return_complete:
        return out, not frontier
    return out
