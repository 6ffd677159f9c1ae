"""Crossing tests, class decomposition and rotation polytopes of labelled graphs."""
import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import networkx as nx
import numpy as np
from scipy.spatial import ConvexHull
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import _exact
from .exceptions import BudgetExceeded
from .geometry import Geodesic, cross_angle, same_geodesic
from .group import HomologyVector, enumerate_elements, wedge

THETA_MIN = 0.05
COINCIDENCE_TOL = 1e-3
MAX_NODES = 12
MAX_EDGES = 40
I1, IPLUS = "I1", "Iplus"


def _as_geodesic(g):
    return g if isinstance(g, Geodesic) else g.geodesic


# -- crossings ---------------------------------------------------------------

_translate_cache = {}


def _translates(G, radius, max_word_len):
    key = (id(G), round(radius, 9), max_word_len)
    if key not in _translate_cache:
        _translate_cache[key] = enumerate_elements(G, max_word_len, radius=radius)
    return _translate_cache[key]


def default_search_radius(G, g1, g2, window=4.0):
    d = max(g1.distance_to(0j), g2.distance_to(0j))
    return 2.0 * (G.circumradius + d) + window


def surface_cross(g1, g2, G, max_word_len=8, radius=None):
    """Translates ``T`` with ``T.g2`` crossing ``g1``, as ``(word, angle)`` pairs."""
    g1, g2 = _as_geodesic(g1), _as_geodesic(g2)
    if radius is None:
        radius = default_search_radius(G, g1, g2)
    out = []
    seen = []
    for w, T in _translates(G, radius, max_word_len):
        h = g2.transformed(T)
        if same_geodesic(g1, h, 1e-9):
            continue
        if any(same_geodesic(h, s, 1e-9) for s in seen):
            continue
        hit = cross_angle(g1, h)
        if hit is not None:
            seen.append(h)
            out.append((w, hit[1]))
    return out


def coincide_mod_group(g1, g2, G, tol=COINCIDENCE_TOL, max_word_len=8, radius=None):
    g1, g2 = _as_geodesic(g1), _as_geodesic(g2)
    if radius is None:
        radius = default_search_radius(G, g1, g2)
    return any(same_geodesic(g1, g2.transformed(T), tol) for _, T in _translates(G, radius, max_word_len))


@dataclass
class GeodesicSample:
    label: str
    geodesics: list
    homology: HomologyVector = None


def dynamically_transverse(s1, s2, G, theta_min=THETA_MIN, max_word_len=8):
    """``(flag, witness)``: some pair of geodesics crosses at an angle at least ``theta_min`` from 0 and pi."""
    for i, g in enumerate(s1.geodesics):
        for j, h in enumerate(s2.geodesics):
            for w, ang in surface_cross(g, h, G, max_word_len):
                if min(ang, math.pi - ang) >= theta_min:
                    return True, {"pair": (i, j), "translate": w.format(), "angle": ang}
    return False, None


def _coincident(s1, s2, G, max_word_len):
    return any(
        coincide_mod_group(g, h, G, COINCIDENCE_TOL, max_word_len) for g in s1.geodesics for h in s2.geodesics
    )


@dataclass
class ClassPartition:
    classes: list
    kinds: list
    witnesses: dict = field(default_factory=dict)

    def class_of(self, label):
        for i, c in enumerate(self.classes):
            if label in c:
                return i
        raise KeyError(label)

    def to_dict(self):
        return {
            "classes": [sorted(c) for c in self.classes],
            "kinds": list(self.kinds),
        }


def partition_classes(samples, G, theta_min=THETA_MIN, max_word_len=8):
    """Union-find closure of (dynamically transverse or coincident) over the samples."""
    labels = [s.label for s in samples]
    if len(set(labels)) != len(labels):
        raise ValueError("sample labels must be distinct")
    parent = list(range(len(samples)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    transverse = {}
    for i in range(len(samples)):
        for j in range(i, len(samples)):
            flag, wit = dynamically_transverse(samples[i], samples[j], G, theta_min, max_word_len)
            if flag:
                transverse[(i, j)] = wit
            if flag or (i != j and _coincident(samples[i], samples[j], G, max_word_len)):
                parent[find(i)] = find(j)
    groups = {}
    for i in range(len(samples)):
        groups.setdefault(find(i), []).append(i)
    order = sorted(groups.values(), key=lambda idx: min(idx))
    classes, kinds, witnesses = [], [], {}
    for idx in order:
        members = set(idx)
        pairs = [(p, w) for p, w in transverse.items() if p[0] in members and p[1] in members]
        classes.append({labels[i] for i in idx})
        kinds.append(IPLUS if pairs else I1)
        if pairs:
            (i, j), w = pairs[0]
            witnesses[len(classes) - 1] = {"labels": (labels[i], labels[j]), **w}
    return ClassPartition(classes, kinds, witnesses)


class ClassPartitioner(BaseEstimator):
    """Partition geodesic samples into transversality classes."""

    def __init__(self, group=None, theta_min=THETA_MIN, max_word_len=8):
        self.group = group
        self.theta_min = theta_min
        self.max_word_len = max_word_len

    def fit(self, X, y=None):
        if self.group is None:
            raise ValueError("a surface group is required")
        if not self.theta_min > 0:
            raise ValueError("theta_min must be positive")
        samples = list(X)
        for s in samples:
            if not isinstance(s, GeodesicSample):
                raise TypeError("expected GeodesicSample items")
        self.partition_ = partition_classes(samples, self.group, self.theta_min, self.max_word_len)
        self.classes_ = self.partition_.classes
        self.kinds_ = self.partition_.kinds
        self.labels_ = np.array([self.partition_.class_of(s.label) for s in samples])
        return self

    def predict(self, X):
        """Class index of each (already fitted) sample label."""
        check_is_fitted(self, "partition_")
        return np.array([self.partition_.class_of(s.label if isinstance(s, GeodesicSample) else s) for s in X])

    def fit_predict(self, X, y=None):
        return self.fit(X).labels_


# -- shape checks ---------------------------------------------------------------

def theorem_a_report(partition, vectors, genus):
    """Shape checks on a class partition with exact homology vectors per label."""
    vecs = {k: (v if isinstance(v, HomologyVector) else HomologyVector(v)) for k, v in vectors.items()}
    report = {}

    bad = []
    for i, j in itertools.combinations(range(len(partition.classes)), 2):
        for u in sorted(partition.classes[i]):
            for v in sorted(partition.classes[j]):
                if u in vecs and v in vecs:
                    w = wedge(vecs[u], vecs[v])
                    if w != 0:
                        bad.append({"labels": [u, v], "wedge": str(w)})
    report["cross_class_wedge"] = {"pass": not bad, "counterexamples": bad}

    n1 = sum(1 for k in partition.kinds if k == I1)
    np_ = sum(1 for k in partition.kinds if k == IPLUS)
    report["class_counts"] = {
        "pass": n1 <= 3 * genus - 3 and np_ <= 2 * genus - 2,
        "I1": n1,
        "Iplus": np_,
        "bounds": [3 * genus - 3, 2 * genus - 2],
        "counterexamples": [] if n1 <= 3 * genus - 3 and np_ <= 2 * genus - 2 else [{"I1": n1, "Iplus": np_}],
    }

    spans, lines, bad_rank, bad_rat, bad_kind = [], [], [], [], []
    for idx, (cls, kind) in enumerate(zip(partition.classes, partition.kinds)):
        vs = [vecs[l] for l in sorted(cls) if l in vecs]
        nz = [list(v.coords) for v in vs if not v.is_zero()]
        r = _exact.rank(nz)
        spans.append({"class": idx, "kind": kind, "dimension": r})
        rational = all(isinstance(c, Fraction) for v in vs for c in v.coords)
        if not rational:
            bad_rat.append(idx)
        if kind == I1:
            if r > 1:
                bad_rank.append({"class": idx, "dimension": r})
            if r == 1:
                lines.append(idx)
            internal = [
                (a, b) for a, b in itertools.combinations(sorted(cls), 2)
                if a in vecs and b in vecs and wedge(vecs[a], vecs[b]) != 0
            ]
            if internal:
                bad_kind.append({"class": idx, "pairs": internal})
    report["span"] = {"pass": not bad_rank and not bad_rat, "classes": spans, "counterexamples": bad_rank}
    report["lines"] = {"pass": len(lines) <= 3 * genus - 3, "count": len(lines), "counterexamples": []}
    report["rational"] = {"pass": not bad_rat, "counterexamples": bad_rat}
    report["internal_wedge"] = {"pass": not bad_kind, "counterexamples": bad_kind}
    report["all_pass"] = all(v["pass"] for v in report.values() if isinstance(v, dict))
    return report


# -- labelled graphs and polytopes ---------------------------------------------------

@dataclass
class LabeledGraph:
    nodes: list
    edges: list  # (src, dst, tuple of Fractions)

    @classmethod
    def from_dict(cls, d):
        nodes = list(d["nodes"])
        edges = []
        for e in d["edges"]:
            if e["from"] not in nodes or e["to"] not in nodes:
                raise ValueError(f"edge {e} references an unknown node")
            edges.append((e["from"], e["to"], tuple(Fraction(str(x)) for x in e["label"])))
        dims = {len(e[2]) for e in edges}
        if len(dims) > 1:
            raise ValueError("edge labels have different lengths")
        return cls(nodes, edges)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self):
        return {
            "nodes": list(self.nodes),
            "edges": [{"from": a, "to": b, "label": [str(x) for x in lab]} for a, b, lab in self.edges],
        }

    @property
    def dim(self):
        return len(self.edges[0][2]) if self.edges else 0

    def scaled(self, lam):
        lam = Fraction(lam)
        return LabeledGraph(list(self.nodes), [(a, b, tuple(x * lam for x in l)) for a, b, l in self.edges])


@dataclass
class RotationPolytope:
    vertices: list
    dimension: int
    facets: list
    means: list = field(default_factory=list, repr=False)

    def contains(self, p):
        return _exact.in_hull(tuple(Fraction(x) for x in p), self.vertices)

    def to_dict(self):
        return {
            "vertices": [[str(x) for x in v] for v in self.vertices],
            "dimension": self.dimension,
            "facets": [[[str(x) for x in v] for v in f] for f in self.facets],
        }


def _check_budget(graph):
    if len(graph.nodes) > MAX_NODES or len(graph.edges) > MAX_EDGES:
        raise BudgetExceeded(
            f"graph has {len(graph.nodes)} nodes and {len(graph.edges)} edges; limits are {MAX_NODES} and {MAX_EDGES}"
        )


def simple_cycles(graph):
    """All simple directed cycles as edge-index lists (parallel edges expanded)."""
    _check_budget(graph)
    D = nx.DiGraph()
    D.add_nodes_from(graph.nodes)
    par = {}
    for k, (a, b, _) in enumerate(graph.edges):
        D.add_edge(a, b)
        par.setdefault((a, b), []).append(k)
    out = []
    for cyc in nx.simple_cycles(D):
        hops = [(cyc[i], cyc[(i + 1) % len(cyc)]) for i in range(len(cyc))]
        for choice in itertools.product(*(par[h] for h in hops)):
            out.append(list(choice))
    return out


def _label_sum(graph, edge_ids):
    total = [Fraction(0)] * graph.dim
    for k in edge_ids:
        total = [a + b for a, b in zip(total, graph.edges[k][2])]
    return tuple(total)


def cycle_means(graph):
    means = set()
    for cyc in simple_cycles(graph):
        s = _label_sum(graph, cyc)
        means.add(tuple(x / len(cyc) for x in s))
    return sorted(means)


def hull_of(points):
    verts = _exact.hull_vertices(points)
    dim = _exact.affine_dimension(verts)
    facets = []
    if dim == 1:
        facets = [[verts[0]], [verts[-1]]]
    elif dim == 2:
        coords, _ = _exact.affine_coordinates(verts)
        order = _exact.order_polygon(coords)
        facets = [[verts[order[i]], verts[order[(i + 1) % len(order)]]] for i in range(len(order))]
    elif dim >= 3:
        coords, _ = _exact.affine_coordinates(verts)
        hull = ConvexHull(np.array([[float(x) for x in c] for c in coords]))
        facets = [[verts[i] for i in sorted(s)] for s in hull.simplices]
    return RotationPolytope(verts, dim, facets, list(points))


def cycle_mean_polytope(graph):
    """Exact convex hull of simple-cycle label means."""
    means = cycle_means(graph)
    if not means:
        return RotationPolytope([], -1, [], [])
    return hull_of(means)


def closed_walk_means(graph, max_len=None):
    """Means of every closed walk up to ``max_len`` edges (brute force)."""
    _check_budget(graph)
    if max_len is None:
        max_len = 2 * len(graph.nodes)
    out_edges = {n: [] for n in graph.nodes}
    for k, (a, b, _) in enumerate(graph.edges):
        out_edges[a].append(k)
    means = set()
    zero = tuple(Fraction(0) for _ in range(graph.dim))

    def walk(start, node, length, total):
        for k in out_edges[node]:
            a, b, lab = graph.edges[k]
            t = tuple(x + y for x, y in zip(total, lab))
            if b == start:
                means.add(tuple(x / (length + 1) for x in t))
            if length + 1 < max_len:
                walk(start, b, length + 1, t)

    for n in graph.nodes:
        walk(n, n, 0, zero)
    return sorted(means)


def realize_rational(graph, target, max_states=200_000):
    """Closed walk whose label mean is exactly ``target``, or None.

    Walks are concatenations of simple cycles through a common node with
    total length at most ``q * len(nodes)``, ``q`` the common denominator.
    """
    _check_budget(graph)
    target = tuple(Fraction(x) for x in target)
    if len(target) != graph.dim:
        raise ValueError("target dimension does not match the labels")
    poly = cycle_mean_polytope(graph)
    if not poly.vertices or not poly.contains(target):
        return None
    q = 1
    for x in target:
        q = q * x.denominator // math.gcd(q, x.denominator)
    limit = q * len(graph.nodes)
    cycles = simple_cycles(graph)
    for node in graph.nodes:
        through = []
        for cyc in cycles:
            starts = [i for i, k in enumerate(cyc) if graph.edges[k][0] == node]
            if starts:
                i = starts[0]
                through.append(cyc[i:] + cyc[:i])
        if not through:
            continue
        sums = [_label_sum(graph, c) for c in through]
        zero = tuple(Fraction(0) for _ in target)
        layers = [dict() for _ in range(limit + 1)]
        layers[0][zero] = None
        count = 0
        for length in range(limit + 1):
            if length > 0 and tuple(x * length for x in target) in layers[length]:
                walk = _unwind(layers, length, tuple(x * length for x in target), through, sums)
                return {
                    "node": node,
                    "period": length,
                    "edges": walk,
                    "labels": [[str(x) for x in graph.edges[k][2]] for k in walk],
                    "mean": [str(x) for x in target],
                }
            for s in list(layers[length]):
                for ci, c in enumerate(through):
                    nl = length + len(c)
                    if nl > limit:
                        continue
                    ns = tuple(a + b for a, b in zip(s, sums[ci]))
                    if ns not in layers[nl]:
                        layers[nl][ns] = (ci, s)
                        count += 1
                        if count > max_states:
                            raise BudgetExceeded("rational realization search exceeded its state budget")
    return None


def _unwind(layers, length, s, through, sums):
    parts = []
    while length > 0:
        ci, prev = layers[length][s]
        parts.append(through[ci])
        length -= len(through[ci])
        s = prev
    walk = []
    for c in reversed(parts):
        walk.extend(c)
    return walk


def walk_mean(graph, walk):
    s = _label_sum(graph, walk)
    return tuple(x / len(walk) for x in s)


def is_closed_walk(graph, walk):
    return all(graph.edges[walk[i]][1] == graph.edges[walk[(i + 1) % len(walk)]][0] for i in range(len(walk)))
