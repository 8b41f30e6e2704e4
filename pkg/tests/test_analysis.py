import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relim.analysis import (
    SetProblem,
    randomized_failure_bound,
    relaxes_to,
    simplify_subsumed,
    verify_speedup_target,
    zero_round_solvable_symmetric,
)
from relim.core import Config, Constraint, expansion, parse_problem, rename_problem
from relim.errors import PreconditionError
from relim.family import (
    LIFTED_SET_NAMES,
    FamilyParams,
    make_family_problem,
    rel_coverage_target,
)
from relim.roundelim import re
from relim.verify import random_problem


def fs(chars):
    return frozenset(chars)


def sc(*sets):
    return tuple(sorted((fs(s) for s in sets), key=lambda x: (len(x), tuple(sorted(x)))))


def test_relaxes_to_examples():
    assert relaxes_to(sc("M", "X"), sc("MX", "X")) is not None
    c = sc("AB", "C")
    r = relaxes_to(c, c)
    assert r is not None
    # Slotwise inclusion respected by the witness permutation.
    for i, j in enumerate(r.witness):
        assert c[i] <= c[j]
    assert relaxes_to(sc("M", "X"), sc("M", "M")) is None


def test_relaxes_to_arity_mismatch():
    with pytest.raises(ValueError):
        relaxes_to(sc("M"), sc("M", "X"))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_relaxes_to_is_a_preorder(seed):
    rng = random.Random(seed)
    labels = "ABCD"

    def random_config():
        return sc(
            *(
                "".join(rng.sample(labels, rng.randint(1, 4)))
                for _ in range(3)
            )
        )

    a, b, c = random_config(), random_config(), random_config()
    assert relaxes_to(a, a) is not None
    if relaxes_to(a, b) and relaxes_to(b, c):
        assert relaxes_to(a, c) is not None


def test_speedup_holds_and_detects_deleted_line():
    params = FamilyParams(4, 3, 0)
    lifted = re(make_family_problem(params))
    renamed = rename_problem(
        lifted.problem, {n: LIFTED_SET_NAMES[s] for n, s in lifted.sets}
    )
    target = rel_coverage_target(params)
    assert verify_speedup_target(renamed, target).holds
    cut = SetProblem.build(
        target.delta, target.node_configs[:-1], target.edge_configs
    )
    verdict = verify_speedup_target(renamed, cut)
    assert not verdict.holds
    # Engine-produced witness, frozen: with the new-owner line gone, the
    # all-new-owner configuration no longer relaxes anywhere.
    assert verdict.witness == {"node_config": "{B P Q U} {B P Q U} {B P Q U} {B P Q U}"}


def test_speedup_trivial_self_target():
    p = parse_problem("delta: 3\nnodes:\nX^3\nedges:\nX X\n")
    target = SetProblem.build(
        3,
        [(fs("X"), fs("X"), fs("X"))],
        [(((fs("X"),), 2),)],
    )
    assert verify_speedup_target(p, target).holds


def test_speedup_edge_side_violation():
    # A target whose node side absorbs everything but whose edge constraint
    # misses a lifted pair must fail on the edge check.
    p = parse_problem("delta: 2\nnodes:\nX^2\nX Y\nedges:\nX [X Y]\nY X\n")
    full = fs("XY")
    target = SetProblem.build(2, [(full, full)], [(((full,), 1), ((fs("Y"),), 1))], alphabet=[full])
    verdict = verify_speedup_target(p, target)
    assert not verdict.holds
    assert "edge_pair" in verdict.witness


def test_zero_round_family_false_with_witnesses():
    v = zero_round_solvable_symmetric(make_family_problem(FamilyParams(4, 2, 1)))
    assert not v.holds
    assert v.witness == {"A^2 X^2": "A", "M^3 X": "M", "O^3 P": "P"}


def test_zero_round_trivial_true():
    p = parse_problem("delta: 4\nnodes:\nX^4\nedges:\nX X\n")
    v = zero_round_solvable_symmetric(p)
    assert v.holds and v.witness == "X^4"


def test_zero_round_mis_false(mis3):
    assert not zero_round_solvable_symmetric(mis3).holds


def test_zero_round_witness_is_lexicographically_smallest():
    p = parse_problem("delta: 2\nnodes:\nZ^2\nB^2\nedges:\nZ Z\nB B\n")
    v = zero_round_solvable_symmetric(p)
    assert v.holds and v.witness == "B^2"


def test_zero_round_implies_symmetric_labeling_exists():
    from relim.simtree import check_labeling, random_tree, symmetric_zero_round_labeling

    p = parse_problem("delta: 3\nnodes:\nX^2 Y\nedges:\nX X\nY Y\nX Y\n")
    v = zero_round_solvable_symmetric(p)
    assert v.holds
    cfg = Config.of([((part.split("^")[0],), int(part.split("^")[1]) if "^" in part else 1) for part in v.witness.split()])
    tree = random_tree(30, 3, seed=5, symmetric=True)
    labeled = symmetric_zero_round_labeling(tree, cfg)
    assert check_labeling(labeled, p).holds


def test_failure_bound_family_values():
    b = randomized_failure_bound(make_family_problem(FamilyParams(4, 2, 1)))
    assert b.probability == Fraction(1, 144)
    assert b.threshold == Fraction(1, 4**8)
    assert b.meets_threshold and b.config_count == 3


def test_failure_bound_single_config_arithmetic():
    p = parse_problem("delta: 2\nnodes:\nM^2\nedges:\nM X\n")
    b = randomized_failure_bound(p)
    assert b.probability == Fraction(1, 4) and b.config_count == 1


def test_failure_bound_threshold_scan():
    # Smallest delta with (1/(3*delta))^2 >= 1/delta^8 is 2 (delta^6 >= 9).
    hits = [
        d for d in range(2, 20) if Fraction(1, (3 * d) ** 2) >= Fraction(1, d**8)
    ]
    assert hits == list(range(2, 20))
    assert Fraction(1, 9) < Fraction(1, 1)  # delta=1 would fail delta^6 >= 9


def test_failure_bound_requires_unsolvable(mis3):
    p = parse_problem("delta: 2\nnodes:\nX^2\nedges:\nX X\n")
    with pytest.raises(PreconditionError):
        randomized_failure_bound(p)


def test_failure_bound_monotone():
    prev = None
    for delta in range(2, 30):
        b = randomized_failure_bound(make_family_problem(FamilyParams(delta, 1, 1)))
        if prev is not None:
            assert b.probability <= prev
        prev = b.probability
    # More configurations lower the bound too.
    two = parse_problem("delta: 2\nnodes:\nM^2\nedges:\nM X\n")
    three = parse_problem("delta: 2\nnodes:\nM^2\nM P\nedges:\nM X\n")
    assert (
        randomized_failure_bound(three).probability
        < randomized_failure_bound(two).probability
    )


def test_simplify_subsumed_examples():
    k = Constraint.of(
        2,
        [
            Config.of([(("M",), 1), (("O", "P"), 1)]),
            Config.of([(("M",), 1), (("P",), 1)]),
        ],
    )
    out = simplify_subsumed(k)
    assert [c.serialize() for c in out.configs] == ["M [O P]"]
    assert simplify_subsumed(out) == out


def test_simplify_preserves_semantics(rng):
    for _ in range(20):
        p = random_problem(rng, rng.randint(2, 4), rng.randint(2, 5))
        for k in (p.node_constraint, p.edge_constraint):
            assert expansion(simplify_subsumed(k)) == expansion(k)
