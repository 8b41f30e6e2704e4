import threading

import pytest

from relim.core import Config, Constraint, parse_problem, serialize_problem
from relim.errors import BlowupError, OperationCancelled
from relim.family import FamilyParams, make_family_problem
from relim.roundelim import (
    lift_exists_constraint,
    maximal_set_configs,
    re,
    rere,
    universal_membership,
)
from relim.verify import brute_re_setlevel, engine_re_setlevel, random_problem
from relim.analysis import relaxes_to

from oracles import brute_maximal_set_configs, brute_universal

TRIVIAL = "delta: 3\nnodes:\nX^3\nedges:\nX X\n"


def fs(chars):
    return frozenset(chars)


def test_universal_membership_examples(fam421):
    e = fam421.edge_constraint
    assert universal_membership([fs("MX"), fs("PAOX")], e)
    assert not universal_membership([fs("M"), fs("M")], e)


def test_universal_membership_singleton_degenerates(fam421, rng):
    from relim.core import config_in_constraint

    for a in fam421.alphabet:
        for b in fam421.alphabet:
            got = universal_membership([fs(a), fs(b)], fam421.edge_constraint)
            pair = Config.plain({a: 2}) if a == b else Config.plain({a: 1, b: 1})
            assert got == config_in_constraint(pair, fam421.edge_constraint)


def test_universal_membership_matches_brute(rng):
    for _ in range(10):
        p = random_problem(rng, rng.randint(2, 3), rng.randint(2, 4))
        labels = list(p.alphabet)
        for _ in range(8):
            slots = [
                frozenset(rng.sample(labels, rng.randint(1, len(labels))))
                for _ in range(p.delta)
            ]
            assert universal_membership(slots, p.node_constraint) == brute_universal(
                slots, p.node_constraint
            )


def test_family_maximal_edge_pairs(fam421):
    pairs = maximal_set_configs(fam421.edge_constraint, fam421.alphabet)
    want = {
        (fs("X"), fs("MPAOX")),
        (fs("MX"), fs("PAOX")),
        (fs("OX"), fs("MAOX")),
        (fs("MOX"), fs("AOX")),
    }
    assert {tuple(sorted(c, key=lambda s: (len(s), tuple(sorted(s))))) for c in pairs} == {
        tuple(sorted(c, key=lambda s: (len(s), tuple(sorted(s))))) for c in want
    }


def test_mis_maximal_pairs_match_brute(mis3):
    got = set(maximal_set_configs(mis3.edge_constraint, mis3.alphabet))
    want = brute_maximal_set_configs(mis3.edge_constraint, mis3.alphabet)
    assert got == want


def test_trivial_pair():
    p = parse_problem(TRIVIAL)
    got = maximal_set_configs(p.edge_constraint, p.alphabet)
    assert got == ((fs("X"), fs("X")),)


def test_maximal_matches_brute_on_random_problems(rng):
    for _ in range(10):
        p = random_problem(rng, 2, rng.randint(2, 5))
        got = set(maximal_set_configs(p.edge_constraint, p.alphabet))
        exhaustive = set(
            maximal_set_configs(p.edge_constraint, p.alphabet, exhaustive=True)
        )
        want = brute_maximal_set_configs(p.edge_constraint, p.alphabet)
        assert exhaustive == want
        assert got == want  # right-closed pruning loses nothing


def test_lift_matches_stated_node_constraint():
    params = FamilyParams(5, 4, 1)
    lifted = re(make_family_problem(params))
    # Under the canonical set naming, the member line lifts to the sets
    # containing M, the pointer line to those containing P and O, and the
    # owner line to those containing A.
    sets = dict(lifted.sets)
    by_members = {frozenset(m): n for n, m in lifted.sets}
    m_group = tuple(sorted(by_members[s] for s in by_members if "M" in s))
    all_group = tuple(sorted(by_members))
    lines = [c.serialize() for c in lifted.problem.node_constraint.configs]
    assert len(lines) == 3
    assert any("^4" in line for line in lines)


def test_lift_over_singletons_is_identity(mis3):
    singles = [frozenset({l}) for l in mis3.alphabet]
    lifted = lift_exists_constraint(mis3.node_constraint, singles)
    rebuilt = Constraint.of(
        mis3.delta,
        [
            Config.of((tuple(next(iter(s)) for s in group), m) for group, m in cfg)
            for cfg in lifted
        ],
    )
    assert rebuilt == mis3.node_constraint


def test_lift_drops_configs_with_uncovered_labels(mis3):
    lifted = lift_exists_constraint(mis3.node_constraint, [fs("O"), fs("P")])
    # The all-M line vanishes (no set contains M); the pointer line survives.
    assert len(lifted) == 1
    assert lift_exists_constraint(mis3.node_constraint, [fs("O")]) == ()


def test_re_fixed_point_on_trivial_problem():
    # Fixed point up to the canonical fresh renaming: {X} becomes label A.
    p = parse_problem(TRIVIAL)
    lifted = re(p)
    assert serialize_problem(lifted.problem) == "delta: 3\nnodes:\nA^3\nedges:\nA^2\n"
    assert dict(lifted.sets) == {"A": fs("X")}
    again = rere(lifted.problem)
    assert serialize_problem(again.problem) == serialize_problem(lifted.problem)


def test_re_mis_matches_brute_oracle(mis3):
    assert engine_re_setlevel(re(mis3)) == brute_re_setlevel(mis3)


def test_re_random_problems_match_brute_oracle(rng):
    for _ in range(8):
        p = random_problem(rng, rng.randint(2, 4), rng.randint(2, 5))
        assert engine_re_setlevel(re(p)) == brute_re_setlevel(p)


def _engine_rere_setlevel(lifted):
    from relim.core import expansion

    sets = dict(lifted.sets)
    sigma = frozenset(sets.values())
    node = set()
    for cfg in lifted.problem.node_constraint.configs:
        slots = []
        for l, m in cfg.counts().items():
            slots.extend([sets[l]] * m)
        node.add(tuple(sorted(slots, key=lambda s: (len(s), tuple(sorted(s))))))
    edge = set()
    for cfg in expansion(lifted.problem.edge_constraint):
        slots = []
        for l, m in cfg.counts().items():
            slots.extend([sets[l]] * m)
        edge.add(tuple(sorted(slots, key=lambda s: (len(s), tuple(sorted(s))))))
    return sigma, node, edge


def test_rere_mis_matches_brute_oracle(mis3):
    from oracles import brute_rere_setlevel

    lifted = re(mis3)
    got = _engine_rere_setlevel(rere(lifted.problem))
    want = brute_rere_setlevel(lifted.problem)
    assert got == want


def test_rere_random_problems_match_brute_oracle(rng):
    from oracles import brute_rere_setlevel

    done = 0
    while done < 4:
        p = random_problem(rng, rng.randint(2, 3), rng.randint(2, 3))
        lifted = re(p)
        if not lifted.problem.alphabet or len(lifted.problem.alphabet) > 4:
            continue
        done += 1
        got = _engine_rere_setlevel(rere(lifted.problem))
        want = brute_rere_setlevel(lifted.problem)
        assert got == want


def test_rere_output_not_dominated(mis3):
    rr = rere(re(mis3).problem)
    configs = rr.problem.node_constraint.configs
    sets = dict(rr.sets)
    as_set_configs = [
        tuple(
            sorted(
                (sets[l] for l, m in c.counts().items() for _ in range(m)),
                key=lambda s: (len(s), tuple(sorted(s))),
            )
        )
        for c in configs
    ]
    for c1 in as_set_configs:
        for c2 in as_set_configs:
            if c1 != c2:
                assert relaxes_to(c1, c2) is None or relaxes_to(c2, c1) is None
                assert relaxes_to(c1, c2) is None


def test_transform_determinism(fam421):
    outs = {serialize_problem(re(fam421).problem) for _ in range(3)}
    assert len(outs) == 1
    base = re(fam421).problem
    outs = {serialize_problem(rere(base).problem) for _ in range(3)}
    assert len(outs) == 1


def test_parallel_workers_identical(fam421):
    a = re(fam421)
    b = re(fam421, workers=4)
    assert a == b
    ra = rere(a.problem)
    rb = rere(a.problem, workers=4)
    assert ra == rb


def test_blowup_guard(fam421):
    with pytest.raises(BlowupError) as err:
        re(fam421, max_labels=3)
    assert err.value.stats["cap"] == 3


def test_blowup_guard_on_config_cap(fam421):
    with pytest.raises(BlowupError):
        rere(re(fam421).problem, max_configs=2)


def test_cancellation(fam421):
    cancel = threading.Event()
    cancel.set()
    with pytest.raises(OperationCancelled):
        rere(re(fam421).problem, cancel=cancel)


def test_progress_callback(fam421):
    calls = []
    rere(re(fam421).problem, progress=calls.append)
    # The search is small; the callback may or may not have fired, but when it
    # does it carries counters.
    for entry in calls:
        assert set(entry) == {"visited", "found"}


def test_fresh_names_sequence():
    from relim.roundelim import fresh_label_names

    names = fresh_label_names(30)
    assert names[:3] == ["A", "B", "C"]
    assert names[25] == "Z"
    assert names[26] == "AA"
    assert names[27] == "AB"


def test_lifted_sets_are_right_closed(fam421):
    from relim.diagram import build_diagram, is_right_closed

    lifted = re(fam421)
    d = build_diagram(fam421, "edge")
    for _, members in lifted.sets:
        assert is_right_closed(members, d)
