import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _support import load_case
from taxmerge.graphs import (
    EdgeKind,
    LabelMode,
    build_icg,
    build_matching_graph,
    gen_attribute_list,
    gen_label,
)
from taxmerge.model import (
    Concept,
    Correspondence,
    CorrespondenceKind as K,
    InputMapping,
    Taxonomy,
    TaxonomyError,
    find_cycle,
)
from taxmerge.scenarios import ScenarioParams, gen_scenario


@pytest.mark.parametrize(
    "labels, expected",
    [
        (["Computer", "PC", "PC"], "Computer_PC*"),
        (["Hardware", "Hardware"], "Hardware*"),
        (["X"], "X"),
        (["Laptops HP", "Notebooks HP"], "Laptops HP_Notebooks HP"),
    ],
)
def test_gen_label(labels, expected):
    assert gen_label(labels) == expected


def test_gen_label_rejects_empty():
    with pytest.raises(ValueError):
        gen_label([])


def test_running_example_matching_graph():
    source, target, mapping, _, _ = load_case("running-base")
    mg = build_matching_graph(source, target, mapping)
    # seven correspondences, four concept pairs
    assert len(mapping.correspondences) == 7
    assert len(mg.match_edges) == 4
    assert len(mg.components()) == len(source) + len(target) - 4


def test_empty_mapping_matches_nothing():
    source, target, _, _, _ = load_case("running-base")
    mg = build_matching_graph(source, target, InputMapping())
    assert mg.match_edges == ()
    assert len(mg.nodes) == len(source) + len(target)


def test_attribute_pairs_share_one_match_edge():
    s = Taxonomy.build([Concept("a", "A", ("p", "q"))])
    t = Taxonomy.build([Concept("x", "X", ("p", "q"))])
    m = InputMapping.build([
        Correspondence(K.EQ_ATTRIBUTE, ("a", "p"), ("x", "p")),
        Correspondence(K.EQ_ATTRIBUTE, ("a", "q"), ("x", "q")),
    ])
    assert len(build_matching_graph(s, t, m).match_edges) == 1


def test_running_example_icg():
    source, target, mapping, _, _ = load_case("running-base")
    icg = build_icg(source, target, mapping)
    assert len(icg.nodes) == 17
    assert [e.label for e in icg.edges_of(EdgeKind.S)] == [f"S{i}" for i in range(1, 10)]
    assert [e.label for e in icg.edges_of(EdgeKind.T)] == [f"T{i}" for i in range(1, 11)]
    assert icg.node("t:hardware").label == "Hardware*"
    assert icg.node("t:laptops_hp").attribute_names == ("Price*", "CPU", "Display")
    assert icg.node("s:laptops").label == "Laptops"


def test_extended_icg_has_isa_and_inverse_edges():
    source, target, mapping, _, _ = load_case("running-extended")
    icg = build_icg(source, target, mapping)
    assert [(e.label, e.child, e.parent) for e in icg.edges_of(EdgeKind.ISA)] == [
        ("isa1", "s:desktops_hp", "t:computers")
    ]
    inv = icg.edges_of(EdgeKind.INVISA)
    assert [e.label for e in inv] == ["c1", "c2", "c3", "c4"]
    assert all(e.filter is not None for e in inv)
    # inverse edges run from the split source concept to the target subclass
    assert inv[0].child == "s:mouse" and inv[0].parent == "t:mouse_hp"


def test_anatomy_icg_provenance():
    source, target, mapping, _, _ = load_case("anatomy")
    icg = build_icg(source, target, mapping)
    merged = [n.label for n in icg.nodes if n.is_merged]
    target_only = [n.label for n in icg.nodes if n.from_target and not n.is_merged]
    source_only = [n.label for n in icg.nodes if not n.from_target]
    assert sorted(merged) == ["Ciliary Muscle*", "Muscle*"]
    assert sorted(target_only) == ["Body Part", "Ciliary Body", "Eye"]
    assert sorted(source_only) == ["Intrinsic Eye Muscle", "Iris Muscle", "Smooth Muscle Tissue", "Tissue"]


def test_attribute_lists():
    source, target, mapping, _, _ = load_case("running-base")
    pairs = [(c.source, c.target) for c in mapping.of_kind(K.EQ_ATTRIBUTE)]
    comp = [("T", "laptops_hp"), ("S", "laptops_hp")]
    names = [a.name for a in gen_attribute_list(comp, source, target, pairs)]
    assert names == ["Price*", "CPU", "Display"]
    assert names.count("Price*") == 1
    assert gen_attribute_list([("S", "hardware")], source, target, pairs) == ()


def test_target_preferred_labels():
    source, target, mapping, _, _ = load_case("anatomy")
    icg = build_icg(source, target, mapping, LabelMode.TARGET_PREFERRED)
    node = icg.node(icg.target_node["NCI:muscle"])
    assert node.label == "Muscle"
    concat = build_icg(source, target, mapping).node(node.id)
    assert concat.label == "Muscle*"


def test_invalid_mappings_rejected():
    s = Taxonomy.build([Concept("a", "A")])
    t = Taxonomy.build([Concept("x", "X"), Concept("y", "Y")])
    m = InputMapping.build([
        Correspondence(K.EQ_ATTRIBUTE, ("a", "p"), ("x", "p")),
    ])
    with pytest.raises(TaxonomyError):
        build_icg(s, t, m)  # dangling attribute reference
    s2 = Taxonomy.build([Concept("a", "A"), Concept("b", "B")])
    m2 = InputMapping.build([Correspondence(K.EQ_CONCEPT, "a", "x"), Correspondence(K.EQ_CONCEPT, "a", "y")])
    with pytest.raises(TaxonomyError):
        build_icg(s2, t, m2)


scenario_params = st.builds(
    ScenarioParams,
    concepts=st.integers(3, 25),
    source_concepts=st.integers(3, 25),
    depth=st.just(4),
    fanout=st.just(4),
    multi_parent_prob=st.sampled_from([0.0, 0.3]),
    overlap_ratio=st.floats(0, 1),
    isa_rate=st.sampled_from([0.0, 0.2]),
    invisa_rate=st.sampled_from([0.0, 0.3]),
)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10_000), scenario_params)
def test_icg_size_and_edge_invariants(seed, params):
    sc = gen_scenario(seed, params)
    icg = build_icg(sc.source, sc.target, sc.mapping)
    assert len(icg.nodes) == len(sc.source) + len(sc.target) - len(sc.mapping.concept_pairs())
    assert len(icg.edges_of(EdgeKind.S)) == len(sc.source.isa_edges)
    assert len(icg.edges_of(EdgeKind.T)) == len(sc.target.isa_edges)
    assert len(icg.edges_of(EdgeKind.ISA)) == len(sc.mapping.of_kind(K.ISA))
    assert len(icg.edges_of(EdgeKind.INVISA)) == len(sc.mapping.of_kind(K.INV_ISA))
    assert build_icg(sc.source, sc.target, sc.mapping) == icg


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10_000), scenario_params)
def test_single_kind_subgraphs_are_acyclic(seed, params):
    # any ICG cycle needs both an S and a T edge
    sc = gen_scenario(seed, params)
    icg = build_icg(sc.source, sc.target, sc.mapping)
    ids = [n.id for n in icg.nodes]
    for kind in (EdgeKind.S, EdgeKind.T):
        parents = {}
        for e in icg.edges_of(kind):
            parents.setdefault(e.child, []).append(e.parent)
        assert find_cycle(ids, parents) is None
