import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import linprog
from sklearn.base import clone

from surfrot.exceptions import BudgetExceeded
from surfrot.experiments import resolve_path
from surfrot.geometry import axis_of
from surfrot.group import HomologyVector, Word
from surfrot.structure import (
    I1,
    IPLUS,
    ClassPartition,
    ClassPartitioner,
    GeodesicSample,
    LabeledGraph,
    closed_walk_means,
    cycle_mean_polytope,
    dynamically_transverse,
    is_closed_walk,
    partition_classes,
    realize_rational,
    surface_cross,
    theorem_a_report,
    walk_mean,
)


@pytest.fixture(scope="module")
def axis(G):
    return lambda w: axis_of(G.element(Word.parse(w)))[0]


@pytest.fixture(scope="module")
def sample(axis):
    return lambda w: GeodesicSample(w, [axis(w)])


def _graph(edges, nodes=None):
    nodes = nodes or sorted({e[0] for e in edges} | {e[1] for e in edges})
    return LabeledGraph(nodes, [(a, b, tuple(Fraction(x) for x in l)) for a, b, l in edges])


# -- crossings -----------------------------------------------------------------

def test_surface_cross_cases(G, axis):
    hits = surface_cross(axis("a1"), axis("b1"), G)
    assert hits and all(0 < ang < math.pi for _, ang in hits)
    assert surface_cross(axis("a1"), axis("a2"), G) == []
    assert surface_cross(axis("a1"), axis("a1"), G) == []


def test_dynamically_transverse(G, sample):
    a1, b1, a2 = sample("a1"), sample("b1"), sample("a2")
    flag, wit = dynamically_transverse(a1, b1, G)
    assert flag and wit["angle"] >= 0.05
    assert dynamically_transverse(b1, a1, G)[0]
    assert dynamically_transverse(a1, a2, G) == (False, None)


def test_partition_worked_case(G, sample):
    part = partition_classes([sample(w) for w in ("a1", "b1", "a2")], G)
    assert part.classes == [{"a1", "b1"}, {"a2"}]
    assert part.kinds == [IPLUS, I1]
    assert set(part.witnesses[0]["labels"]) == {"a1", "b1"}


def test_partition_closes_chains(G, sample):
    # a1 and b2 are disjoint, but each links to the other through b1 and a1 a2
    part = partition_classes([sample(w) for w in ("a1", "b2", "a1 a2", "b1")], G)
    assert len(part.classes) == 1 and part.kinds == [IPLUS]


def test_singleton_is_one_class(G, sample):
    part = partition_classes([sample("a1")], G)
    assert part.classes == [{"a1"}] and part.kinds == [I1]


def test_partition_refines_with_theta_min(G, sample):
    xs = [sample(w) for w in ("a1", "b1", "a2")]
    counts = [len(partition_classes(xs, G, t).classes) for t in (0.05, 0.5, 1.0, math.pi / 2 + 1e-9)]
    assert counts == sorted(counts)
    assert counts[-1] == 3


def test_duplicate_labels_rejected(G, sample):
    with pytest.raises(ValueError):
        partition_classes([sample("a1"), sample("a1")], G)


def test_partitioner_api(G, sample):
    xs = [sample(w) for w in ("a1", "b1", "a2")]
    est = ClassPartitioner(group=G)
    assert set(est.get_params()) == {"group", "theta_min", "max_word_len"}
    labels = clone(est).fit_predict(xs)
    assert labels[0] == labels[1] != labels[2]
    est.fit(xs)
    assert list(est.predict(["a2", "b1"])) == [labels[2], labels[1]]
    with pytest.raises(ValueError):
        ClassPartitioner().fit(xs)
    with pytest.raises(TypeError):
        ClassPartitioner(group=G).fit([1])


# -- shape checks ---------------------------------------------------------------

def test_report_on_valid_partition():
    part = ClassPartition([{"x", "y"}, {"z"}], [IPLUS, I1])
    vecs = {"x": [1, 0, 0, 0], "y": [0, 1, 0, 0], "z": [0, 0, Fraction(1, 10), 0]}
    rep = theorem_a_report(part, vecs, 2)
    assert rep["all_pass"]
    assert rep["span"]["classes"][0]["dimension"] == 2
    assert rep["lines"]["count"] == 1


def test_report_flags_cross_class_wedge():
    part = ClassPartition([{"x"}, {"y"}], [I1, I1])
    rep = theorem_a_report(part, {"x": [1, 0, 0, 0], "y": [0, 1, 0, 0]}, 2)
    assert not rep["cross_class_wedge"]["pass"]
    assert rep["cross_class_wedge"]["counterexamples"][0]["wedge"] == "1"
    assert not rep["all_pass"]


def test_report_flags_too_many_classes():
    part = ClassPartition([{str(i)} for i in range(4)], [I1] * 4)
    vecs = {str(i): HomologyVector([0, 0, 0, 0]) for i in range(4)}
    rep = theorem_a_report(part, vecs, 2)
    assert not rep["class_counts"]["pass"] and rep["class_counts"]["I1"] == 4
    assert not rep["all_pass"]


def test_report_flags_rank_two_line_class():
    part = ClassPartition([{"x", "y"}], [I1])
    rep = theorem_a_report(part, {"x": [1, 0, 0, 0], "y": [0, 0, 1, 0]}, 2)
    assert not rep["span"]["pass"]


# -- polytopes --------------------------------------------------------------------

def _vertices(poly):
    return sorted(tuple(v) for v in poly.vertices)


def test_figure_polytopes():
    left = cycle_mean_polytope(LabeledGraph.load(resolve_path("figures/fig11-left.json")))
    right = cycle_mean_polytope(LabeledGraph.load(resolve_path("figures/fig11-right.json")))
    F = Fraction
    assert _vertices(left) == [(F(0), F(0)), (F(0), F(1)), (F(1), F(0))]
    assert _vertices(right) == [(F(0), F(0)), (F(0), F(1)), (F(1), F(1))]
    assert left.dimension == right.dimension == 2
    assert left.contains((F(1, 3), F(1, 3))) and not left.contains((F(1, 2), F(2, 3)))


def test_single_loop_graph():
    poly = cycle_mean_polytope(_graph([("v", "v", [2, -1])]))
    assert _vertices(poly) == [(Fraction(2), Fraction(-1))]
    assert poly.dimension == 0


def test_acyclic_graph_is_empty():
    poly = cycle_mean_polytope(_graph([("u", "v", [1])]))
    assert poly.vertices == [] and poly.dimension == -1


def test_realize_rational():
    g = LabeledGraph.load(resolve_path("figures/fig11-left.json"))
    hit = realize_rational(g, (Fraction(1, 3), Fraction(1, 3)))
    assert hit["period"] == 3
    assert is_closed_walk(g, hit["edges"])
    assert walk_mean(g, hit["edges"]) == (Fraction(1, 3), Fraction(1, 3))
    assert realize_rational(g, (2, 0)) is None


def test_budget():
    edges = [(str(i), str((i + 1) % 13), [0]) for i in range(13)]
    with pytest.raises(BudgetExceeded):
        cycle_mean_polytope(_graph(edges))


def test_label_scaling():
    g = LabeledGraph.load(resolve_path("figures/fig11-right.json"))
    lam = Fraction(3, 2)
    scaled = cycle_mean_polytope(g.scaled(lam))
    assert _vertices(scaled) == sorted(tuple(lam * x for x in v) for v in cycle_mean_polytope(g).vertices)


def _in_hull_lp(p, verts):
    V = np.array(verts, dtype=float).T
    A = np.vstack([V, np.ones(V.shape[1])])
    b = np.append(np.array(p, dtype=float), 1.0)
    res = linprog(np.zeros(V.shape[1]), A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    return res.status == 0


def test_polytope_matches_walk_oracle():
    # every closed walk mean lies in the hull; every hull vertex is a walk mean
    rng = np.random.default_rng(21)
    checked = 0
    for _ in range(200):
        n = int(rng.integers(1, 6))
        m = int(rng.integers(1, 11))
        nodes = [str(i) for i in range(n)]
        edges = [
            (str(rng.integers(n)), str(rng.integers(n)), [int(x) for x in rng.integers(-2, 3, size=2)])
            for _ in range(m)
        ]
        g = _graph(edges, nodes)
        poly = cycle_mean_polytope(g)
        walks = closed_walk_means(g, max_len=n + 2)
        if not poly.vertices:
            assert walks == []
            continue
        checked += 1
        assert set(poly.vertices) <= set(walks)
        for w in walks:
            assert poly.contains(w)
            assert _in_hull_lp(w, poly.vertices)
    assert checked > 50
