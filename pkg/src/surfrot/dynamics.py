"""Equivariant point-push flows on the universal cover."""
import math
from fractions import Fraction
from dataclasses import dataclass, field

from .exceptions import BudgetExceeded, CatalogInsufficient, StepBlowup, UnknownScenario
from .geometry import (
    Geodesic,
    Isometry,
    axis_of,
    compose,
    dist_from_origin,
    geodesic_distance,
    mobius,
    mobius_derivative,
    same_geodesic,
)
from .group import MAX_WORD_LEN, Word, enumerate_elements

PROFILES = ("quartic",)
BLOWUP_TOL = 1e-12
GAP_PAD = 2.0
BUMP_FRACTION = 0.4


def bump(r, radius):
    """C^1 profile (1 - (r/R)^2)^2 supported in |r| < R."""
    x = r / radius
    if abs(x) >= 1.0:
        return 0.0
    y = 1.0 - x * x
    return y * y


@dataclass(frozen=True)
class PushSpec:
    core_word: Word
    speed: float
    bump_radius: float = None
    profile: str = "quartic"

    def __post_init__(self):
        if not isinstance(self.core_word, Word):
            object.__setattr__(self, "core_word", Word.parse(self.core_word))
        if not math.isfinite(self.speed):
            raise ValueError("push speed must be finite")
        if self.profile not in PROFILES:
            raise ValueError(f"unknown profile {self.profile!r}")
        if self.bump_radius is not None and not self.bump_radius > 0:
            raise ValueError("bump radius must be positive")

    def to_dict(self):
        return {
            "coreWord": self.core_word.format(),
            "speed": self.speed,
            "bumpRadius": self.bump_radius,
            "profile": self.profile,
        }


@dataclass
class Translate:
    word: Word
    element: Isometry
    geodesic: Geodesic
    push: int


@dataclass
class _Push:
    spec: PushSpec
    axis: Geodesic
    length: float
    radius: float = 0.0
    translates: list = field(default_factory=list)


class EquivariantMap:
    """Time-one map of a sum of push fields, one per :class:`PushSpec`.

    The supports of distinct translates are disjoint tubes, so near any
    point at most one term of the field is non-zero.  The flow then keeps
    the Fermi distance to that axis fixed, and integration is done in a
    chart where the axis is the real diameter.
    """

    def __init__(self, group, pushes, h=1e-2, word_len=8, pad=GAP_PAD):
        if not h > 0:
            raise ValueError("step h must be positive")
        self.group = group
        self.h = float(h)
        self.pad = float(pad)
        self.pushes = []
        for spec in pushes:
            g = group.element(spec.core_word)
            axis, length = axis_of(g)
            self.pushes.append(_Push(spec, axis, length))
        self.word_len = word_len
        self.catalog = self._build_catalog(word_len)
        self.gap = self._min_gap()
        for p in self.pushes:
            limit = 0.5 * self.gap
            if p.spec.bump_radius is None:
                p.radius = BUMP_FRACTION * limit
            elif p.spec.bump_radius >= limit:
                raise ValueError(
                    f"bump radius {p.spec.bump_radius} is not below half the translate gap {self.gap}"
                )
            else:
                p.radius = p.spec.bump_radius

    # -- catalog ------------------------------------------------------
    def _build_catalog(self, word_len):
        G = self.group
        ball = G.circumradius + self.pad
        out = []
        for k, p in enumerate(self.pushes):
            rho = ball + p.axis.distance_to(0j) + 0.5 * p.length + 1e-6
            length = word_len
            while True:
                try:
                    elems, complete = enumerate_elements(G, length, radius=rho, return_complete=True)
                except BudgetExceeded as exc:
                    raise CatalogInsufficient(str(exc)) from exc
                if complete:
                    break
                if length >= MAX_WORD_LEN:
                    raise CatalogInsufficient(
                        f"translates of {p.spec.core_word.format()} not covered at word length {MAX_WORD_LEN}"
                    )
                length += 1
            found = []
            for w, g in elems:
                geo = p.axis.transformed(g)
                if geo.distance_to(0j) > ball:
                    continue
                if any(same_geodesic(geo, t.geodesic, 1e-9) for t in found):
                    continue
                found.append(Translate(w, g, geo, k))
            p.translates = found
            out.extend(found)
        return out

    def _min_gap(self):
        best = math.inf
        cat = self.catalog
        for i in range(len(cat)):
            for j in range(i + 1, len(cat)):
                if same_geodesic(cat[i].geodesic, cat[j].geodesic, 1e-9):
                    continue
                best = min(best, geodesic_distance(cat[i].geodesic, cat[j].geodesic))
        return best if math.isfinite(best) else 2.0 * self.pad

    # -- field --------------------------------------------------------
    def active(self, p0):
        """The translate whose tube contains ``p0`` (a point near the domain), or None."""
        if dist_from_origin(p0) > self.group.circumradius + self.pad - max(
            (p.radius for p in self.pushes), default=0.0
        ):
            raise CatalogInsufficient("point lies outside the region covered by the catalog")
        hit = None
        for t in self.catalog:
            r = t.geodesic.fermi(p0).r
            if abs(r) < self.pushes[t.push].radius:
                if hit is not None:
                    raise CatalogInsufficient("overlapping supports")
                hit = t
        return hit

    def eval_field(self, p):
        """Field vector at ``p`` in disk coordinates."""
        p0, w = self.group.reduce(p)
        t = self.active(p0)
        if t is None:
            return 0j
        push = self.pushes[t.push]
        frame = t.geodesic.frame
        z = mobius(frame.inverse(), p0)
        v0 = _chart_field(z, push.spec.speed, push.radius)
        v = mobius_derivative(frame, z) * v0
        return mobius_derivative(self.group.element(w), p0) * v

    def _flow_near(self, p0, time):
        """Flow a point of the (padded) domain; result stays near the domain."""
        t = self.active(p0)
        if t is None or time == 0:
            return p0
        push = self.pushes[t.push]
        z = mobius(t.geodesic.frame.inverse(), p0)
        t0 = math.log(abs(1.0 + z)) - math.log(abs(1.0 - z))
        chart = compose(t.geodesic.frame, Isometry.translation(t0))
        z = mobius(chart.inverse(), p0)
        z = rk4(z, time, self.h, push.spec.speed, push.radius)
        return mobius(chart, z)

    def flow(self, p, time=1.0):
        """Time-``time`` map of the field (negative time flows backward)."""
        p0, w = self.group.reduce(p)
        q = self._flow_near(p0, time)
        if not w.letters:
            return q
        return mobius(self.group.element(w), q)

    def time_one_map(self, p):
        return self.flow(p, 1.0)

    __call__ = time_one_map

    def stages(self, time=1.0):
        return [(self, time)]

    def inverse(self):
        return MapSequence([(self, -1.0)])

    def push_translates(self, k=0):
        return self.pushes[k].translates


def _chart_field(z, speed, radius):
    m2 = z.real * z.real + z.imag * z.imag
    r = math.asinh(2.0 * z.imag / (1.0 - m2))
    phi = bump(r, radius)
    if phi == 0.0:
        return 0j
    return speed * phi * (1.0 - z * z) / (2.0 * math.cosh(r))


def rk4(z, time, h, speed, radius):
    """Classical Runge-Kutta integration of the chart field."""
    n = max(1, int(math.ceil(abs(time) / h - 1e-9)))
    dt = time / n
    f = _chart_field
    for _ in range(n):
        k1 = f(z, speed, radius)
        k2 = f(z + 0.5 * dt * k1, speed, radius)
        k3 = f(z + 0.5 * dt * k2, speed, radius)
        k4 = f(z + dt * k3, speed, radius)
        z = z + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if abs(z) > 1.0 - BLOWUP_TOL:
            raise StepBlowup(f"integrator left the disk; step h={h} is too large")
    return z


def exact_push(z, time, speed, radius):
    """Closed-form flow in the chart: translation along the real diameter at fixed Fermi distance."""
    m2 = abs(z) ** 2
    r = math.asinh(2.0 * z.imag / (1.0 - m2))
    d = time * speed * bump(r, radius) / math.cosh(r)
    return mobius(Isometry.translation(d), z)


class MapSequence:
    """Composition of equivariant time maps, first stage applied first."""

    def __init__(self, stages):
        self._stages = []
        for m, t in stages:
            self._stages.extend((mm, tt * t) for mm, tt in m.stages())
        self.group = self._stages[0][0].group if self._stages else None

    def stages(self, time=1.0):
        if time != 1.0:
            raise ValueError("sequences only support unit time")
        return list(self._stages)

    def inverse(self):
        return MapSequence([(m, -t) for m, t in reversed(self._stages)])

    def time_one_map(self, p):
        for m, t in self._stages:
            p = m.flow(p, t)
        return p

    __call__ = time_one_map


class IdentityMap:
    def __init__(self, group):
        self.group = group

    def stages(self, time=1.0):
        return []

    def inverse(self):
        return self

    def time_one_map(self, p):
        return complex(p)

    __call__ = time_one_map


def step(f, y, center=None):
    """One iterate on a reduced point: returns ``(y_next, a)`` with ``f(y) = a . y_next``."""
    G = f.group
    letters = []
    cur = y
    for m, t in f.stages():
        p0, w = G.reduce(cur)
        letters.extend(w.letters)
        cur = m._flow_near(p0, t)
    y1, a = G.reduce(cur, center)
    letters.extend(a.letters)
    return y1, Word(letters)


# -- scenarios -----------------------------------------------------------

SCENARIOS = ("single-push", "disjoint-pushes", "criss-cross", "trivial-homology-push")


@dataclass
class Scenario:
    name: str
    dynamics: object
    maps: list
    seeds: list
    expected: dict

    def seed_points(self):
        return [s["point"] for s in self.seeds]


def _word_length(G, word):
    return axis_of(G.element(word))[1]


def _axis_seed(axis, t=0.0):
    return axis.point_at(t)


def _free_seed(G, axis, length, others, samples=200):
    """Point on ``axis`` farthest (in Fermi distance) from every translate in ``others``."""
    best = None
    for i in range(samples):
        t = length * (i + 0.5) / samples
        p = axis.point_at(t)
        p0, _ = G.reduce(p)
        score = min((abs(tr.geodesic.fermi(p0).r) for tr in others), default=math.inf)
        if best is None or score > best[0]:
            best = (score, p0)
    return best[1]


def make_scenario(name, group, k=10, h=1e-2, bump_radius=None):
    """Configured maps, seeds and expected qualitative outcomes of a named scenario."""
    G = group
    a1, b1, a2 = Word([1]), Word([2]), Word([3])
    if name == "single-push":
        ell = _word_length(G, a1)
        m = EquivariantMap(G, [PushSpec(a1, ell / k, bump_radius)], h=h)
        axis = m.pushes[0].axis
        seeds = [
            {"label": "core-a1", "point": G.reduce(_axis_seed(axis))[0], "homology": [1, 0, 0, 0], "period": k},
            {
                "label": "off-axis",
                "point": G.reduce(axis.point_from_fermi(0.0, 0.5 * m.pushes[0].radius))[0],
                "homology": None,
            },
        ]
        expected = {"classes": [["core-a1", "off-axis"]], "kinds": ["I1"], "rotation": {"core-a1": [Fraction(1, k), 0, 0, 0]}}
        return Scenario(name, m, [m], seeds, expected)
    if name == "disjoint-pushes":
        la, l2 = _word_length(G, a1), _word_length(G, a2)
        m = EquivariantMap(G, [PushSpec(a1, la / k, bump_radius), PushSpec(a2, l2 / k, bump_radius)], h=h)
        seeds = [
            {"label": "core-a1", "point": G.reduce(_axis_seed(m.pushes[0].axis))[0], "homology": [1, 0, 0, 0], "period": k},
            {"label": "core-a2", "point": G.reduce(_axis_seed(m.pushes[1].axis))[0], "homology": [0, 0, 1, 0], "period": k},
        ]
        expected = {"classes": [["core-a1"], ["core-a2"]], "kinds": ["I1", "I1"], "cross_wedge": 0}
        return Scenario(name, m, [m], seeds, expected)
    if name == "criss-cross":
        la, lb = _word_length(G, a1), _word_length(G, b1)
        fa = EquivariantMap(G, [PushSpec(a1, la, bump_radius)], h=h)
        fb = EquivariantMap(G, [PushSpec(b1, lb, bump_radius)], h=h)
        seq = MapSequence([(fa, 1.0), (fb, 1.0)])
        seeds = [
            {
                "label": "core-a1",
                "point": _free_seed(G, fa.pushes[0].axis, la, fb.catalog),
                "homology": [1, 0, 0, 0],
                "period": 1,
            },
            {
                "label": "core-b1",
                "point": _free_seed(G, fb.pushes[0].axis, lb, fa.catalog),
                "homology": [0, 1, 0, 0],
                "period": 1,
            },
        ]
        expected = {"classes": [["core-a1", "core-b1"]], "kinds": ["Iplus"], "wedge": 1}
        return Scenario(name, seq, [fa, fb], seeds, expected)
    if name == "trivial-homology-push":
        c = Word([1, 2, -1, -2])
        ell = _word_length(G, c)
        m = EquivariantMap(G, [PushSpec(c, ell / k, bump_radius)], h=h)
        seeds = [
            {"label": "core-commutator", "point": G.reduce(_axis_seed(m.pushes[0].axis))[0], "homology": [0, 0, 0, 0], "period": k}
        ]
        expected = {"classes": [["core-commutator"]], "kinds": ["I1"], "rotation": {"core-commutator": [0, 0, 0, 0]}}
        return Scenario(name, m, [m], seeds, expected)
    raise UnknownScenario(name)

