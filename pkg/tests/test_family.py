import pytest

from relim.analysis import zero_round_solvable_symmetric
from relim.core import Config, Problem, problems_isomorphic, serialize_problem
from relim.errors import PreconditionError, SequenceError
from relim.family import (
    REL_SET_NAMES,
    FamilyParams,
    build_sequence,
    expected_re_problem,
    kods_problem_statement,
    make_family_problem,
    make_mis_problem,
    make_plus_problem,
    mechanized_step_check,
    rel_coverage_target,
    step_params,
)
from relim.roundelim import re


def test_family_421_exact_constraints():
    p = make_family_problem(FamilyParams(4, 2, 1))
    assert set(p.node_constraint.serialize_lines()) == {"M^3 X", "A^2 X^2", "O^3 P"}
    assert set(p.edge_constraint.serialize_lines()) == {
        "M [A O P X]",
        "O [A M O X]",
        "P [M X]",
        "A [M O X]",
        "X [A M O P X]",
    }


def test_family_zero_exponent_drops():
    p = make_family_problem(FamilyParams(3, 3, 0))
    assert "A^3" in p.node_constraint.serialize_lines()
    assert "M^3" in p.node_constraint.serialize_lines()


def test_family_params_validation():
    with pytest.raises(PreconditionError):
        FamilyParams(3, 4, 0)
    with pytest.raises(PreconditionError):
        FamilyParams(3, 0, 4)
    with pytest.raises(PreconditionError):
        FamilyParams(1, 0, 0)


def test_family_contains_mis_behavior():
    # Any valid maximal-independent-set labeling also satisfies the family
    # problem at x = 0 (owner configurations simply unused).
    from relim.simtree import check_labeling, greedy_kods, kods_to_family_labeling, random_tree

    tree = random_tree(40, 3, seed=9)
    sol = greedy_kods(tree, 0)
    labeled = kods_to_family_labeling(tree, sol, 0, 0)
    assert check_labeling(labeled, make_mis_problem(3)).holds
    for a in range(0, 4):
        assert check_labeling(labeled, make_family_problem(FamilyParams(3, a, 0))).holds


def test_plus_430_exact_node_lines():
    p = make_plus_problem(FamilyParams(4, 3, 0))
    assert set(p.node_constraint.serialize_lines()) == {
        "M^3 X",
        "O^3 P",
        "A^2 X^2",
        "C^4",
    }


def test_plus_c_not_self_compatible():
    from relim.core import config_in_constraint

    p = make_plus_problem(FamilyParams(4, 3, 0))
    assert not config_in_constraint(Config.plain({"C": 2}), p.edge_constraint)


def test_plus_without_c_is_stepped_family():
    params = FamilyParams(4, 3, 0)
    plus = make_plus_problem(params)
    nodes = [c for c in plus.node_constraint.configs if "C" not in c.labels()]
    edges = []
    for c in plus.edge_constraint.configs:
        kept = [(tuple(l for l in g if l != "C"), m) for g, m in c.items]
        if all(g for g, _ in kept):
            edges.append(Config.of(kept))
    trimmed = Problem.build(4, nodes, edges)
    stepped = make_family_problem(FamilyParams(4, params.a - params.x - 1, params.x + 1))
    assert trimmed == stepped


def test_plus_preconditions():
    with pytest.raises(PreconditionError):
        make_plus_problem(FamilyParams(4, 0, 0))


def test_mis_definition(mis3):
    assert serialize_problem(mis3) == "delta: 3\nnodes:\nM^3\nO^2 P\nedges:\nM [O P]\nO^2\n"
    assert serialize_problem(make_mis_problem(2)) == "delta: 2\nnodes:\nM^2\nO P\nedges:\nM [O P]\nO^2\n"


def test_mis_labelings_are_exactly_relaxed_mis_sets():
    # On fragments: a subset labels validly iff it is independent and every
    # full-degree node outside it has a neighbor inside.
    from relim.simtree import adjacency, check_labeling, degree_list, random_tree

    tree = random_tree(9, 3, seed=13)
    adj = adjacency(tree)
    deg = degree_list(tree)
    p = make_mis_problem(3)
    for mask in range(1 << tree.n):
        inside = [bool(mask >> v & 1) for v in range(tree.n)]
        independent = all(
            not (inside[e.u] and inside[e.v]) for e in tree.edges
        )
        dominated_full = all(
            inside[v] or deg[v] < 3 or any(inside[u] for _, _, u, _ in adj[v])
            for v in range(tree.n)
        )
        labels = {}
        for v in range(tree.n):
            member_edges = [e for _, e, u, _ in adj[v] if inside[u]]
            for _, e, _, _ in adj[v]:
                if inside[v]:
                    labels[(v, e)] = "M"
                elif member_edges and e == member_edges[0]:
                    labels[(v, e)] = "P"
                else:
                    labels[(v, e)] = "O"
        verdict = check_labeling(tree.with_labels(labels), p)
        assert verdict.holds == (independent and dominated_full), (mask, verdict)


def test_expected_re_problem_shape():
    p = expected_re_problem(FamilyParams(5, 4, 1))
    assert len(p.edge_constraint.configs) == 4
    assert {c.serialize() for c in p.edge_constraint.configs} == {"Q X", "B O", "A U", "M P"}
    assert len(p.alphabet) == 8


def test_expected_re_requires_window():
    with pytest.raises(PreconditionError):
        expected_re_problem(FamilyParams(5, 2, 1))


@pytest.mark.parametrize("delta", [4, 5])
def test_engine_matches_expected_re(delta):
    for a in range(2, delta + 1):
        for x in range(0, a - 1):
            params = FamilyParams(delta, a, x)
            lifted = re(make_family_problem(params))
            assert problems_isomorphic(lifted.problem, expected_re_problem(params))


def test_rel_target_is_renamed_plus_problem():
    # The relaxation target and the six-label variant are the same problem
    # under the canonical set naming.
    params = FamilyParams(5, 4, 1)
    target = rel_coverage_target(params)
    nodes = [
        Config.plain(
            {REL_SET_NAMES[s]: cfg.count(s) for s in set(cfg)}
        )
        for cfg in target.node_configs
    ]
    edges = [
        Config.of(
            (tuple(REL_SET_NAMES[s] for s in group), m) for group, m in cfg
        )
        for cfg in target.edge_configs
    ]
    rebuilt = Problem.build(target.delta, nodes, edges)
    assert rebuilt == make_plus_problem(params)


def test_step_params_arithmetic():
    assert step_params(FamilyParams(12, 9, 1)) == FamilyParams(12, 3, 2)
    assert step_params(FamilyParams(64, 64, 0)) == FamilyParams(64, 31, 1)
    with pytest.raises(PreconditionError) as err:
        step_params(FamilyParams(12, 4, 2))
    assert "2x+1" in str(err.value)


def test_build_sequence_large_delta():
    cert = build_sequence(2**20, 2, 0.25)
    assert cert.t == 5
    assert [s.params.a for s in cert.steps] == [2**20, 2**17, 2**14, 2**11, 2**8]
    assert [s.params.x for s in cert.steps] == [2, 3, 4, 5, 6]
    assert cert.final_params == FamilyParams(2**20, 32, 7)
    assert not cert.final_verdict.holds
    assert all(ok for s in cert.steps for _, ok in s.checks)


def test_build_sequence_small_valid():
    cert = build_sequence(4096, 2, 0.1)
    assert cert.t == 1
    assert cert.final_params == FamilyParams(4096, 512, 3)


def test_smallest_certified_delta():
    from relim.family import smallest_certified_delta

    assert smallest_certified_delta(2, 0.25) == 16
    assert smallest_certified_delta(0, 1 / 3) == 8
    assert smallest_certified_delta(2, 0.01) is None
    cert = build_sequence(2**20, 2, 0.25)
    assert cert.smallest_delta == 16


def test_build_sequence_refuses_empty():
    with pytest.raises(SequenceError):
        build_sequence(4096, 2, 0.001)
    with pytest.raises(SequenceError):
        build_sequence(4096, 2, 0)


def test_build_sequence_degenerate_tail_aborts():
    with pytest.raises(SequenceError) as err:
        build_sequence(5, 0, 0.5)
    assert err.value.index == 1


def test_mechanized_step_check_small():
    assert mechanized_step_check(FamilyParams(4, 2, 0)).holds


@pytest.mark.parametrize(
    "params",
    [FamilyParams(6, 2, 0), FamilyParams(6, 6, 0), FamilyParams(6, 4, 1), FamilyParams(6, 6, 4)],
)
def test_mechanized_step_check_delta6_corners(params):
    # Corner tuples of the delta=6 window: smallest and largest a, a mid
    # tuple, and the a = x+2 boundary.
    assert mechanized_step_check(params).holds


def test_sequence_final_problem_not_solvable():
    cert = build_sequence(64, 0, 1 / 3)
    final = make_family_problem(cert.final_params)
    assert not zero_round_solvable_symmetric(final).holds


def test_kods_statement():
    s = kods_problem_statement(4, 0)
    assert s.is_mis and not s.is_trivial
    s = kods_problem_statement(4, 4)
    assert s.is_trivial and not s.is_mis
    with pytest.raises(PreconditionError):
        kods_problem_statement(4, 5)


def test_kods_checker_accepts_hand_built_example():
    # Ten-node tree, k=1: two adjacent members with one oriented edge.
    from relim.simtree import DSolution, LabeledTree, TreeEdge, check_kods

    edges = [
        TreeEdge(0, 1, 1, 1),
        TreeEdge(0, 2, 2, 1),
        TreeEdge(0, 3, 3, 1),
        TreeEdge(1, 4, 2, 1),
        TreeEdge(1, 5, 3, 1),
        TreeEdge(2, 6, 2, 1),
        TreeEdge(3, 7, 2, 1),
        TreeEdge(4, 8, 2, 1),
        TreeEdge(4, 9, 3, 1),
    ]
    tree = LabeledTree(4, 10, tuple(edges))
    # Members: 0, 1 and the leaves 6..9; the only internal edge is 0-1.
    in_set = (True, True, False, False, False, False, True, True, True, True)
    verdict = check_kods(tree, DSolution(in_set, ((0, 1, 0),)), 1)
    assert verdict.holds
    # Dropping node 1 leaves node 5 undominated.
    undominated = (True, False, False, False, False, False, True, True, True, True)
    verdict = check_kods(tree, DSolution(undominated, ()), 1)
    assert not verdict.holds and verdict.witness == {"node": 5}
