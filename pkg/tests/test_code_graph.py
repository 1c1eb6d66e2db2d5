import itertools
import json

import pytest
from hypothesis import given, settings, strategies as st

from arcbench.code_graph import (
    LinkGraph,
    LinkGraphError,
    auto_color,
    auto_schedule,
    bicolor_query,
    cycle_basis,
    flatten,
    is_edge_cut,
    load_link_graph,
    monochromatic_links,
    validate_schedule,
)
from arcbench.detection import DetectionEvent
from arcbench.layouts import linear_links


# -- brute-force oracles ------------------------------------------------------


def brute_regions(graph, cut):
    """All colour classes (as sets of the 0-coloured qubits) realising ``cut``."""
    qs = graph.code_qubits
    out = []
    for bits in itertools.product((0, 1), repeat=len(qs)):
        col = dict(zip(qs, bits))
        bi = {k for k, (a, _, b) in enumerate(graph.links) if col[a] != col[b]}
        if bi == set(cut):
            out.append(frozenset(q for q in qs if col[q]))
    return out


def expected_region(graph, cut):
    regions = brute_regions(graph, cut)
    if not regions:
        return None
    allq = frozenset(graph.code_qubits)
    sides = {r for r in regions} | {allq - r for r in regions}
    return min(sides, key=lambda r: (len(r), min(graph.code_qubits) not in r, sorted(r)))


@st.composite
def link_graphs(draw, max_code=7, max_extra=4):
    """Random connected link graph: a random tree plus extra chords."""
    n = draw(st.integers(2, max_code))
    pairs = []
    for v in range(1, n):
        pairs.append((draw(st.integers(0, v - 1)), v))
    candidates = [(a, b) for a in range(n) for b in range(a + 1, n) if (a, b) not in pairs]
    extra = draw(st.lists(st.sampled_from(candidates), unique=True, max_size=max_extra)) if candidates else []
    pairs += extra
    pairs = draw(st.permutations(pairs))
    # code qubits 0..n-1, auxiliaries numbered after them
    return LinkGraph(tuple((a, n + k, b) for k, (a, b) in enumerate(pairs)))


def triangle():
    return LinkGraph(((0, 1, 2), (2, 3, 4), (4, 5, 0)))


def square():
    return LinkGraph(((0, 1, 2), (2, 3, 4), (4, 5, 6), (6, 7, 0)))


# -- LinkGraph ---------------------------------------------------------------


def test_link_graph_counts(small_graph):
    assert small_graph.code_qubits == (0, 3, 6)
    assert small_graph.aux_qubits == (1, 5)
    assert small_graph.endpoints(1) == (3, 6)


@pytest.mark.parametrize(
    "links",
    [
        ((0, 1, 0),),  # self loop
        ((0, 1, 2), (2, 1, 4)),  # auxiliary shared
        ((0, 1, 2), (2, 3, 0)),  # duplicate code pair
        ((0, 1, 2), (1, 3, 4)),  # auxiliary reused as code qubit
        ((0, 1, 2), (4, 5, 6)),  # disconnected
        (),
    ],
)
def test_link_graph_rejects_invalid(links):
    with pytest.raises(LinkGraphError):
        LinkGraph(links)


def test_json_round_trip(tmp_path, small_graph):
    color = auto_color(small_graph)
    sched = auto_schedule(small_graph)
    path = tmp_path / "g.json"
    path.write_text(json.dumps(small_graph.to_json(color, sched)))
    g, c, s = load_link_graph(path)
    assert g == small_graph
    assert c == color
    assert [list(map(tuple, layer)) for layer in s] == [list(map(tuple, layer)) for layer in sched]


# -- colouring ---------------------------------------------------------------


def test_auto_color_small_example(small_graph):
    col = auto_color(small_graph, max_dist=2)
    assert col in ({0: 0, 3: 1, 6: 0}, {0: 1, 3: 0, 6: 1})


def test_auto_color_single_link():
    col = auto_color(LinkGraph(((0, 1, 2),)))
    assert col[0] != col[2]


def test_auto_color_triangle_is_optimal():
    g = triangle()
    best = min(
        monochromatic_links(g, dict(zip(g.code_qubits, bits)))
        for bits in itertools.product((0, 1), repeat=3)
    )
    assert best == 1
    assert monochromatic_links(g, auto_color(g)) == 1


@settings(max_examples=60, deadline=None)
@given(link_graphs())
def test_auto_color_total_and_locally_minimal(g):
    col = auto_color(g)
    assert set(col) == set(g.code_qubits)
    m = monochromatic_links(g, col)
    for q in g.code_qubits:
        flipped = dict(col)
        flipped[q] ^= 1
        assert monochromatic_links(g, flipped) >= m
    if not any(len(c) % 2 for c in cycle_basis(g).cycles):
        assert m == 0  # bipartite graphs get a proper colouring


# -- schedules ---------------------------------------------------------------


def test_auto_schedule_examples(small_graph):
    assert auto_schedule(small_graph) == [[(0, 1), (3, 5)], [(3, 1), (6, 5)]]
    assert auto_schedule(LinkGraph(((0, 1, 2),))) == [[(0, 1)], [(2, 1)]]


def test_auto_schedule_star():
    g = LinkGraph(((0, 1, 2), (0, 3, 4), (0, 5, 6)))
    sched = auto_schedule(g)
    assert len(sched) >= 3
    for layer in sched:
        ids = [x for pair in layer for x in pair]
        assert len(ids) == len(set(ids))


def check_schedule(g, sched):
    seen = [pair for layer in sched for pair in layer]
    expected = [(q, aux) for (a, aux, b) in g.links for q in (a, b)]
    assert sorted(seen) == sorted(expected)
    for layer in sched:
        ids = [x for pair in layer for x in pair]
        assert len(ids) == len(set(ids))
    assert len(sched) >= g.max_degree()


@settings(max_examples=80, deadline=None)
@given(link_graphs(max_code=9, max_extra=6))
def test_auto_schedule_invariants(g):
    sched = auto_schedule(g)
    check_schedule(g, sched)
    assert validate_schedule(g, sched) is not None
    assert auto_schedule(g) == sched


def test_validate_schedule_rejects_bad(small_graph):
    with pytest.raises(LinkGraphError):
        validate_schedule(small_graph, [[(0, 1), (3, 1)], [(6, 5), (3, 5)]])
    with pytest.raises(LinkGraphError):
        validate_schedule(small_graph, [[(0, 1), (3, 5)]])


# -- cycle basis -------------------------------------------------------------


def test_cycle_basis_examples():
    assert cycle_basis(linear_links(3)).cycles == ()
    tri = cycle_basis(triangle())
    assert tri.cycles == (frozenset({0, 1, 2}),)
    sq = cycle_basis(square())
    assert len(sq.cycles) == 1 and len(sq.cycles[0]) == 4


@settings(max_examples=80, deadline=None)
@given(link_graphs(max_code=9, max_extra=6))
def test_cycle_basis_invariants(g):
    basis = cycle_basis(g)
    assert len(basis.cycles) == len(g.links) - len(g.code_qubits) + 1
    for c, cyc in enumerate(basis.cycles):
        incidence = {}
        for link in cyc:
            for q in g.endpoints(link):
                incidence[q] = incidence.get(q, 0) + 1
        assert all(v % 2 == 0 for v in incidence.values())
        for link in cyc:
            assert c in basis.link_to_cycles[link]


# -- flatten -----------------------------------------------------------------


def ev(t, link):
    return DetectionEvent(t, link)


def test_flatten_examples():
    assert flatten([]) == set()
    assert flatten([ev(1, 0), ev(2, 0)]) == set()
    assert flatten([ev(1, 0), ev(1, 1), ev(2, 1), ev(3, 1)]) == {0, 1}


events_strategy = st.sets(st.builds(ev, st.integers(0, 4), st.integers(0, 5)), max_size=12)


@given(events_strategy, events_strategy)
def test_flatten_linear(a, b):
    assert flatten(a ^ b) == flatten(a) ^ flatten(b)
    assert flatten(list(a) + list(b)) == flatten(a) ^ flatten(b)


# -- edge cuts ---------------------------------------------------------------


def test_bicolor_examples():
    lin = linear_links(3)  # links (0,1,2), (2,3,4)
    basis = cycle_basis(lin)
    assert bicolor_query(lin, basis, {0}) == frozenset({0})
    assert expected_region(lin, {0}) == frozenset({0})
    assert bicolor_query(lin, basis, set()) == frozenset()
    tri = triangle()
    assert bicolor_query(tri, cycle_basis(tri), {0}) is None


@settings(max_examples=40, deadline=None)
@given(link_graphs(max_code=6, max_extra=3))
def test_bicolor_exhaustive_against_brute_force(g):
    basis = cycle_basis(g)
    for k in range(len(g.links) + 1):
        for cut in itertools.combinations(range(len(g.links)), k):
            got = bicolor_query(g, basis, cut)
            want = expected_region(g, cut)
            assert got == want
            assert is_edge_cut(basis, cut) == (want is not None)


@settings(max_examples=100, deadline=None)
@given(link_graphs(max_code=12, max_extra=6), st.data())
def test_bicolor_round_trip(g, data):
    s = data.draw(st.sets(st.sampled_from(g.code_qubits)))
    cut = g.boundary(s)
    region = bicolor_query(g, cycle_basis(g), cut)
    assert region is not None
    assert g.boundary(region) == cut
    assert len(region) <= len(g.code_qubits) - len(region)
