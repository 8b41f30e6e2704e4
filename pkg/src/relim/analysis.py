"""Relaxation checks, zero-round solvability, and the mechanized speedup argument.

The zero-round criterion here is deliberately the symmetric one: ports are
assigned so that both endpoints of an edge share the same port number, which
forces every edge to carry the same label on both sides under any deterministic
zero-round algorithm.  Solvability then reduces to the existence of an allowed
node configuration whose labels are all self-compatible.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import Config, Constraint, Problem, config_in_constraint, expand_config, expansion
from .diagram import constraint_diagram, right_closed_sets
from .errors import PreconditionError
from .roundelim import (
    SetConfig,
    expand_set_condensed,
    lift_exists_constraint,
    maximal_set_configs,
    set_config_text,
    set_sort_key,
)


@dataclass(frozen=True)
class Verdict:
    """Outcome of a check; a failed verdict always carries a witness."""

    holds: bool
    witness: object
    narrative: str

    def __post_init__(self):
        if not self.holds and self.witness is None:
            raise ValueError("a failed verdict requires a witness")


@dataclass(frozen=True)
class Relaxation:
    """Witnessed slotwise-superset matching between two set configurations."""

    source: SetConfig
    target: SetConfig
    witness: tuple[int, ...]  # source slot i maps to target slot witness[i]


@dataclass(frozen=True)
class SetProblem:
    """A problem stated directly over label sets (with the sets as the dictionary).

    Node configurations are plain multisets of sets; edge configurations are
    condensed: tuples of (group-of-sets, multiplicity).
    """

    delta: int
    alphabet: tuple[frozenset, ...]
    node_configs: tuple[SetConfig, ...]
    edge_configs: tuple

    @staticmethod
    def build(delta: int, node_configs, edge_configs, alphabet=None) -> "SetProblem":
        nodes = tuple(
            sorted(
                (tuple(sorted((frozenset(s) for s in c), key=set_sort_key)) for c in node_configs),
                key=lambda c: tuple(set_sort_key(s) for s in c),
            )
        )
        edges = []
        for cfg in edge_configs:
            edges.append(
                tuple(
                    sorted(
                        ((tuple(sorted((frozenset(s) for s in g), key=set_sort_key)), m) for g, m in cfg),
                        key=lambda it: tuple(set_sort_key(s) for s in it[0]),
                    )
                )
            )
        if alphabet is None:
            used = {s for c in nodes for s in c}
            alphabet = tuple(sorted(used, key=set_sort_key))
        else:
            alphabet = tuple(sorted((frozenset(s) for s in alphabet), key=set_sort_key))
        return SetProblem(delta, alphabet, nodes, tuple(edges))


def relaxes_to(c1: SetConfig, c2: SetConfig) -> Relaxation | None:
    """A permutation matching every slot of c1 into a superset slot of c2, if any."""
    if len(c1) != len(c2):
        raise ValueError(f"arity mismatch: {len(c1)} vs {len(c2)}")
    n = len(c1)
    adj = [[j for j in range(n) if frozenset(c1[i]) <= frozenset(c2[j])] for i in range(n)]
    match_of: list[int | None] = [None] * n

    def augment(i: int, seen: set[int]) -> bool:
        for j in adj[i]:
            if j in seen:
                continue
            seen.add(j)
            if match_of[j] is None or augment(match_of[j], seen):
                match_of[j] = i
                return True
        return False

    for i in range(n):
        if not augment(i, set()):
            return None
    witness = [0] * n
    for j, i in enumerate(match_of):
        witness[i] = j
    return Relaxation(tuple(c1), tuple(c2), tuple(witness))


def verify_speedup_target(
    p: Problem,
    target: SetProblem,
    *,
    node_configs=None,
    max_configs: int = 100_000,
    cancel=None,
    progress=None,
    workers: int = 0,
) -> Verdict:
    """Check that the second transformation half collapses into ``target``.

    Every maximal node-side set configuration of ``p`` must relax into some
    node configuration of the target, and the existential lift of ``p``'s edge
    constraint over the target's sets must land inside the target's edge
    constraint.  Together these certify that any solution of the transformed
    problem can be rewritten, with no communication, into a solution of the
    target.  ``node_configs`` may carry a precomputed enumeration.
    """
    if node_configs is None:
        d = constraint_diagram(p.node_constraint, p.alphabet, "node")
        node_configs = maximal_set_configs(
            p.node_constraint,
            p.alphabet,
            candidates=right_closed_sets(d),
            max_configs=max_configs,
            cancel=cancel,
            progress=progress,
            workers=workers,
        )
    for c in node_configs:
        if not any(relaxes_to(c, t) for t in target.node_configs):
            return Verdict(
                False,
                {"node_config": set_config_text(c)},
                f"node configuration {set_config_text(c)} does not relax into any target configuration",
            )
    lifted = lift_exists_constraint(p.edge_constraint, target.alphabet)
    lifted_pairs = set()
    for cfg in lifted:
        lifted_pairs |= expand_set_condensed(cfg)
    target_pairs = set()
    for cfg in target.edge_configs:
        target_pairs |= expand_set_condensed(cfg)
    stray = sorted(lifted_pairs - target_pairs, key=lambda c: tuple(set_sort_key(s) for s in c))
    if stray:
        return Verdict(
            False,
            {"edge_pair": set_config_text(stray[0])},
            f"lifted edge pair {set_config_text(stray[0])} is outside the target edge constraint",
        )
    return Verdict(
        True,
        None,
        f"all {len(node_configs)} maximal node configurations relax into the target; "
        f"lifted edge constraint ({len(lifted_pairs)} pairs) is contained in the target's",
    )


def _self_compatible(label: str, edge: Constraint) -> bool:
    return config_in_constraint(Config.of([((label,), 2)]), edge)


def zero_round_solvable_symmetric(p: Problem) -> Verdict:
    """Deterministic zero-round solvability against the symmetric port family.

    Holds exactly when some allowed plain node configuration consists of
    self-compatible labels only.  On failure the witness names, for each
    condensed node configuration, a self-incompatible label that blocks it.
    """
    self_ok = {l: _self_compatible(l, p.edge_constraint) for l in p.alphabet}
    allowed = sorted(expansion(p.node_constraint), key=lambda c: c.serialize())
    for cfg in allowed:
        if all(self_ok[l] for l in cfg.counts()):
            return Verdict(
                True,
                cfg.serialize(),
                f"configuration {cfg.serialize()} uses only self-compatible labels, "
                "so the constant labeling by ports solves the problem in zero rounds",
            )
    witness: dict[str, str] = {}
    for cond in p.node_constraint.configs:
        expansions = [set(c.counts()) for c in expand_config(cond)]
        common = set.intersection(*({l for l in exp if not self_ok[l]} for exp in expansions))
        if common:
            witness[cond.serialize()] = min(common)
        else:
            first_bad = sorted(l for l in expansions[0] if not self_ok[l])
            witness[cond.serialize()] = first_bad[0]
    return Verdict(
        False,
        witness,
        "every allowed node configuration contains a label that is not compatible "
        "with itself; on the symmetric port family some edge then carries that label "
        "on both endpoints",
    )


@dataclass(frozen=True)
class FailureBound:
    """Zero-round failure probability bound on the symmetric randomized family."""

    probability: Fraction
    threshold: Fraction
    meets_threshold: bool
    config_count: int
    delta: int
    note: str


def randomized_failure_bound(p: Problem) -> FailureBound:
    """Lower bound (1/(c*delta))^2 on the failure probability of any randomized
    zero-round algorithm, where c is the number of condensed node configurations.

    Requires the deterministic symmetric criterion to fail; by pigeonhole some
    configuration is used with probability at least 1/c, some port then carries
    its blocking label with probability at least 1/(c*delta) on both endpoints.
    """
    verdict = zero_round_solvable_symmetric(p)
    if verdict.holds:
        raise PreconditionError(
            "failure bound is not derivable: the problem is zero-round solvable "
            f"(configuration {verdict.witness})",
            inequality="zero_round_solvable_symmetric(p) = false",
        )
    c = len(p.node_constraint.configs)
    probability = Fraction(1, (c * p.delta) ** 2)
    threshold = Fraction(1, p.delta**8)
    note = (
        "pigeonhole over the problem's condensed node configurations"
        if c == 3
        else f"constant generalized from 3 to the problem's {c} condensed node "
        "configurations; extrapolation beyond the studied family"
    )
    return FailureBound(probability, threshold, probability >= threshold, c, p.delta, note)


def simplify_subsumed(k: Constraint) -> Constraint:
    """Drop condensed configurations whose expansion is covered by the others.

    Presentation cleanup only: the expansion semantics before and after are
    asserted equal.
    """
    kept = list(k.configs)
    for cfg in sorted(k.configs, key=lambda c: c.serialize()):
        if cfg not in kept or len(kept) == 1:
            continue
        rest = [o for o in kept if o != cfg]
        covered = set()
        for o in rest:
            covered.update(expansion(Constraint.of(k.arity, [o])))
        if set(expansion(Constraint.of(k.arity, [cfg]))) <= covered:
            kept = rest
    out = Constraint.of(k.arity, kept)
    assert expansion(out) == expansion(k), "subsumption cleanup changed the semantics"
    return out
