from __future__ import annotations

import random

import pytest

from infusql import read_penman, render_penman
from infusql.amr import AmrGraph
from infusql.errors import DuplicateVariable, UnbalancedParens, UndeclaredReference

from conftest import fixture_text


def test_single_node():
    graphs = read_penman("(x / thing)")
    assert len(graphs) == 1
    g = graphs[0]
    assert g.top == "x"
    assert g.nodes == {"x": "thing"}
    assert g.edges == []


def test_running_example_graph():
    g = read_penman(fixture_text("runex.amr"))[0]
    assert g.graph_id == "runex"
    assert g.top == "l"
    assert len(g.nodes) == 8
    assert set(g.nodes) == {"l", "a", "y", "c", "d", "e", "n", "b"}
    assert ("n", "poss", "d") in g.edges
    assert ("b", "poss", "d") in g.edges


def test_undeclared_reference():
    with pytest.raises(UndeclaredReference, match="'y'"):
        read_penman("(x / a :ARG0 y)")


def test_forward_reference_rejected():
    # references must resolve to an earlier declaration
    with pytest.raises(UndeclaredReference):
        read_penman("(x / a :ARG0 y2 :ARG1 (y2 / b))")


def test_duplicate_variable():
    with pytest.raises(DuplicateVariable, match="offset"):
        read_penman("(x / a :ARG0 (x / b))")


def test_unbalanced_parens():
    with pytest.raises(UnbalancedParens):
        read_penman("(x / a :ARG0 (y / b)")
    with pytest.raises(UnbalancedParens):
        read_penman("(x / a))")


def test_constants_and_numbers():
    g = read_penman('(d / date-entity :year 1984 :mod (s / ship :name "Titanic") :polarity -)')[0]
    targets = {role: t for _, role, t in g.edges}
    assert targets["year"] == 1984
    assert targets["name"] == '"Titanic"'
    assert targets["polarity"] == "-"


def test_multiple_blocks_with_ids():
    text = "# ::id a\n(x / thing)\n\n# ::id b\n(y / other)\n"
    graphs = read_penman(text)
    assert [g.graph_id for g in graphs] == ["a", "b"]


def test_graph_connectivity_validated():
    g = AmrGraph(top="x", nodes={"x": "a", "z": "b"}, edges=[])
    with pytest.raises(UndeclaredReference, match="not reachable"):
        g.validate()


def test_render_single_node():
    g = AmrGraph(top="x", nodes={"x": "thing"}, edges=[])
    assert render_penman(g) == "(x / thing)"


def test_render_reentrancy_as_bare_name():
    g = read_penman(fixture_text("runex.amr"))[0]
    rendered = render_penman(g)
    assert rendered.count("(d / department") == 1
    assert ":poss d)" in rendered


def _random_graph(rng: random.Random) -> AmrGraph:
    n = rng.randint(1, 7)
    names = [f"{chr(ord('a') + i)}{rng.randint(0, 9) if rng.random() < 0.3 else ''}" for i in range(n)]
    nodes = {name: rng.choice(("thing", "go-01", "want-01", "city", "and")) for name in names}
    edges = []
    for i, name in enumerate(names[1:], start=1):
        parent = names[rng.randrange(i)]
        edges.append((parent, rng.choice(("ARG0", "ARG1", "op1", "mod", "time-of")), name))
    # sprinkle re-entrancies and constants
    for _ in range(rng.randint(0, 2)):
        src = rng.choice(names)
        edges.append((src, "poss", rng.choice(names)))
    if rng.random() < 0.4:
        edges.append((rng.choice(names), "quant", rng.randint(1, 99)))
    if rng.random() < 0.3:
        edges.append((rng.choice(names), "name", '"Ada"'))
    if rng.random() < 0.2:
        edges.append((rng.choice(names), "polarity", "-"))
    return AmrGraph(top=names[0], nodes=nodes, edges=edges)


def test_roundtrip_on_random_graphs():
    rng = random.Random(11)
    checked = 0
    for _ in range(100):
        g = _random_graph(rng)
        g.validate()
        back = read_penman(render_penman(g))[0]
        assert back.structurally_equal(g), render_penman(g)
        checked += 1
    assert checked == 100


def test_parsed_graphs_have_single_component():
    for text in (fixture_text("runex.amr"), "(x / thing)", '(a / and :op1 (b / b1) :op2 (c / c1 :mod b))'):
        for g in read_penman(text):
            g.validate()  # reachability from top is part of validation
