"""One round-elimination step, split into its two halves.

``re`` rebuilds the edge constraint from maximal universally-compatible pairs
of label sets and lifts the node constraint existentially; ``rere`` does the
dual (maximal node-side set configurations, existential edge lift).  Fresh
atomic names are assigned to the surviving label sets in canonical set order,
and the name dictionary is kept so callers can re-apply their own names.

The maximality search walks multisets of candidate sets in canonical order,
carrying the set of distinct selection multisets of the partial configuration.
Extending a slot only extends those multisets, and a partial configuration is
pruned as soon as one selection cannot be covered by any allowed configuration,
which keeps the search far below the raw candidate-power bound.  Candidates
are restricted to right-closed sets of the relevant diagram; an exhaustive
mode over all nonempty subsets exists for cross-checking at small alphabets.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations_with_replacement

from .core import Config, Constraint, Problem
from .diagram import constraint_diagram, is_right_closed, right_closed_sets
from .errors import BlowupError, OperationCancelled

SetLabel = frozenset
SetConfig = tuple  # tuple of SetLabel, canonically sorted

DEFAULT_MAX_LABELS = 10_000
DEFAULT_MAX_CONFIGS = 100_000


def set_sort_key(s: frozenset) -> tuple:
    return (len(s), tuple(sorted(s)))


def set_text(s: frozenset) -> str:
    return "{" + " ".join(sorted(s)) + "}"


def set_config_text(c: SetConfig) -> str:
    return " ".join(set_text(s) for s in c)


def make_set_config(slots) -> SetConfig:
    return tuple(sorted((frozenset(s) for s in slots), key=set_sort_key))


def fresh_label_names(count: int) -> list[str]:
    """Shortest uppercase names in order: A..Z, AA, AB, ..."""
    names = []
    for i in range(count):
        n = i + 1
        s = ""
        while n:
            n, r = divmod(n - 1, 26)
            s = chr(65 + r) + s
        names.append(s)
    return names


class _CompiledConstraint:
    """A constraint compiled to bitmask groups over an indexed alphabet, with a
    memoized test for whether a partial label multiset can still be covered."""

    def __init__(self, k: Constraint, labels: tuple[str, ...]):
        self.labels = labels
        self.index = {l: i for i, l in enumerate(labels)}
        self.arity = k.arity
        self.configs = []
        for cfg in k.configs:
            groups = []
            for g, m in cfg.items:
                mask = 0
                for l in g:
                    if l in self.index:
                        mask |= 1 << self.index[l]
                groups.append((mask, m))
            self.configs.append(tuple(groups))
        self._memo: dict[tuple[int, ...], bool] = {}

    def embeddable(self, vec: tuple[int, ...]) -> bool:
        cached = self._memo.get(vec)
        if cached is not None:
            return cached
        ok = any(self._fits(vec, groups) for groups in self.configs)
        self._memo[vec] = ok
        return ok

    def _fits(self, vec: tuple[int, ...], groups) -> bool:
        caps = [m for _, m in groups]

        def place(i: int) -> bool:
            while i < len(vec) and vec[i] == 0:
                i += 1
            if i == len(vec):
                return True
            need = vec[i]
            slots = [j for j, (mask, _) in enumerate(groups) if mask >> i & 1 and caps[j] > 0]
            if sum(caps[j] for j in slots) < need:
                return False

            def distribute(si: int, left: int) -> bool:
                if left == 0:
                    return place(i + 1)
                if si == len(slots):
                    return False
                j = slots[si]
                top = min(caps[j], left)
                for take in range(top, -1, -1):
                    caps[j] -= take
                    if distribute(si + 1, left - take):
                        caps[j] += take
                        return True
                    caps[j] += take
                return False

            return distribute(0, need)

        return place(0)


def _bump(vec: tuple[int, ...], i: int) -> tuple[int, ...]:
    return vec[:i] + (vec[i] + 1,) + vec[i + 1 :]


def _extend_vectors(vecs, slot_indices, compiled) -> frozenset | None:
    """Selection multisets of the configuration extended by one slot, or None
    as soon as some selection cannot be covered."""
    out = set()
    for m in vecs:
        for i in slot_indices:
            v = _bump(m, i)
            if v in out:
                continue
            if not compiled.embeddable(v):
                return None
            out.add(v)
    return frozenset(out)


def universal_membership(slots, k: Constraint) -> bool:
    """Does every choice of one member per slot land inside the constraint?

    Semantically identical to brute force over the cross product, but distinct
    selection multisets are enumerated once and cover checks are memoized.
    """
    slots = [frozenset(s) for s in slots]
    if len(slots) != k.arity:
        raise ValueError(f"expected {k.arity} slots, got {len(slots)}")
    labels = tuple(sorted(k.labels() | frozenset().union(*slots)))
    compiled = _CompiledConstraint(k, labels)
    vecs: frozenset | None = frozenset({(0,) * len(labels)})
    for s in slots:
        idxs = [compiled.index[l] for l in sorted(s)]
        vecs = _extend_vectors(vecs, idxs, compiled)
        if vecs is None:
            return False
    return True


def _dominates(small: SetConfig, big: SetConfig) -> bool:
    """Slotwise-subset matching between equal-arity set configurations."""
    n = len(small)
    adj = [[j for j in range(n) if small[i] <= big[j]] for i in range(n)]
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

    return all(augment(i, set()) for i in range(n))


def _maximal_only(accepted: list[SetConfig]) -> list[SetConfig]:
    """Filter to configurations not dominated by any other.

    Strict domination forces a strictly larger total set size, so processing
    by descending total size means a configuration can only be dominated by
    one already kept; the frontier stays as small as the answer.
    """
    unique = sorted(set(accepted), key=lambda c: tuple(set_sort_key(s) for s in c))
    by_size = sorted(unique, key=lambda c: -sum(len(s) for s in c))
    kept: list[SetConfig] = []
    for c in by_size:
        total = sum(len(s) for s in c)
        if not any(
            sum(len(s) for s in o) > total and _dominates(c, o) for o in kept
        ):
            kept.append(c)
    return kept


def maximal_set_configs(
    k: Constraint,
    alphabet=None,
    *,
    candidates=None,
    exhaustive: bool = False,
    max_configs: int = DEFAULT_MAX_CONFIGS,
    cancel: threading.Event | None = None,
    progress=None,
    workers: int = 0,
) -> tuple[SetConfig, ...]:
    """All arity-sized multisets of label sets with universal membership in k,
    maximal under slotwise inclusion up to permutation.

    Candidates default to the right-closed sets of k's diagram; ``exhaustive``
    enumerates all nonempty subsets instead (debug cross-check at small
    alphabets).  Results are canonical and independent of worker scheduling.
    """
    labels = tuple(sorted(alphabet)) if alphabet is not None else tuple(sorted(k.labels()))
    if candidates is None:
        if exhaustive:
            candidates = [
                frozenset(labels[i] for i in range(len(labels)) if mask >> i & 1)
                for mask in range(1, 1 << len(labels))
            ]
        else:
            candidates = right_closed_sets(constraint_diagram(k, labels, "candidate"))
    cands = sorted({frozenset(c) for c in candidates}, key=set_sort_key)
    compiled = _CompiledConstraint(k, labels)
    zero = (0,) * len(labels)

    cand_idxs = []
    viable = []
    for s in cands:
        idxs = [compiled.index[l] for l in sorted(s) if l in compiled.index]
        if len(idxs) != len(s):
            continue  # a label foreign to the constraint can never be covered
        vecs = _extend_vectors(frozenset({zero}), idxs, compiled)
        if vecs is not None:
            viable.append(s)
            cand_idxs.append(idxs)
    accepted: list[SetConfig] = []
    ticker = {"nodes": 0}

    def dfs(start: int, slots: list, vecs) -> None:
        if cancel is not None and cancel.is_set():
            raise OperationCancelled("maximal configuration search cancelled")
        ticker["nodes"] += 1
        if progress is not None and ticker["nodes"] % 1000 == 0:
            progress({"visited": ticker["nodes"], "found": len(accepted)})
        if len(slots) == k.arity:
            accepted.append(tuple(slots))
            if len(accepted) > max_configs:
                raise BlowupError(
                    f"more than {max_configs} universal configurations",
                    {"cap": max_configs, "found": len(accepted)},
                )
            return
        for idx in range(start, len(viable)):
            nxt = _extend_vectors(vecs, cand_idxs[idx], compiled)
            if nxt is not None:
                dfs(idx, slots + [viable[idx]], nxt)

    if workers and workers > 1 and k.arity > 1:
        first = []
        for idx in range(len(viable)):
            vecs = _extend_vectors(frozenset({zero}), cand_idxs[idx], compiled)
            if vecs is not None:
                first.append((idx, vecs))

        def run_branch(item):
            idx, vecs = item
            local: list[SetConfig] = []

            def branch_dfs(start: int, slots: list, vv) -> None:
                if cancel is not None and cancel.is_set():
                    raise OperationCancelled("maximal configuration search cancelled")
                if len(slots) == k.arity:
                    local.append(tuple(slots))
                    return
                for j in range(start, len(viable)):
                    nv = _extend_vectors(vv, cand_idxs[j], compiled)
                    if nv is not None:
                        branch_dfs(j, slots + [viable[j]], nv)

            branch_dfs(idx, [viable[idx]], vecs)
            return local

        with ThreadPoolExecutor(max_workers=workers) as pool:
            for chunk in pool.map(run_branch, first):
                accepted.extend(chunk)
                if len(accepted) > max_configs:
                    raise BlowupError(
                        f"more than {max_configs} universal configurations",
                        {"cap": max_configs, "found": len(accepted)},
                    )
        accepted = sorted(set(accepted), key=lambda c: tuple(set_sort_key(s) for s in c))
    else:
        dfs(0, [], frozenset({zero}))

    maximal = _maximal_only(accepted)
    return tuple(sorted(maximal, key=lambda c: tuple(set_sort_key(s) for s in c)))


def lift_exists_constraint(k: Constraint, lifted_alphabet):
    """Replace every label by the disjunction of all lifted sets containing it.

    Configurations whose replacement leaves an empty group are dropped.  The
    result is a constraint over set labels, returned as canonical condensed
    configurations: tuples of (group-of-sets, multiplicity).
    """
    sigma = sorted({frozenset(s) for s in lifted_alphabet}, key=set_sort_key)
    out = []
    seen = set()
    for cfg in k.configs:
        items: dict[tuple, int] = {}
        dead = False
        for g, m in cfg.items:
            members = set(g)
            group = tuple(s for s in sigma if s & members)
            if not group:
                dead = True
                break
            items[group] = items.get(group, 0) + m
        if dead:
            continue
        lifted = tuple(
            sorted(items.items(), key=lambda it: tuple(set_sort_key(s) for s in it[0]))
        )
        if lifted not in seen:
            seen.add(lifted)
            out.append(lifted)
    return tuple(sorted(out, key=_set_condensed_key))


def _set_condensed_key(cfg) -> tuple:
    return tuple((tuple(set_sort_key(s) for s in g), m) for g, m in cfg)


def expand_set_condensed(cfg) -> set:
    """All plain set-label multisets contained in a condensed set-label configuration."""
    partial = [()]
    for group, mult in cfg:
        nxt = set()
        for base in partial:
            for combo in combinations_with_replacement(sorted(group, key=set_sort_key), mult):
                nxt.add(tuple(sorted(base + combo, key=set_sort_key)))
        partial = list(nxt)
    return set(partial)


@dataclass(frozen=True)
class LiftedProblem:
    """A transformed problem over fresh atomic names plus the set dictionary."""

    problem: Problem
    sets: tuple[tuple[str, frozenset], ...]  # (fresh name, members), in name order
    transform: str  # "re" or "rere"

    def dictionary(self) -> dict[str, frozenset]:
        return dict(self.sets)

    def set_of(self, name: str) -> frozenset:
        return self.dictionary()[name]


def _name_sets(sigma) -> tuple[dict, list[str]]:
    ordered = sorted(sigma, key=set_sort_key)
    names = fresh_label_names(len(ordered))
    return {s: names[i] for i, s in enumerate(ordered)}, names


def _configs_from_plain(pairs, name_of) -> list[Config]:
    out = []
    for c in pairs:
        counts: dict[str, int] = {}
        for s in c:
            n = name_of[s]
            counts[n] = counts.get(n, 0) + 1
        out.append(Config.plain(counts))
    return out


def _configs_from_condensed(lifted, name_of) -> list[Config]:
    out = []
    for cfg in lifted:
        out.append(Config.of((tuple(name_of[s] for s in g), m) for g, m in cfg))
    return out


def re(
    p: Problem,
    *,
    max_labels: int = DEFAULT_MAX_LABELS,
    max_configs: int = DEFAULT_MAX_CONFIGS,
    cancel: threading.Event | None = None,
    progress=None,
    workers: int = 0,
) -> LiftedProblem:
    """First half of the round-elimination step.

    The edge constraint becomes the maximal universally-compatible pairs of
    label sets; the node constraint is lifted existentially over the sets that
    occur in them; everything is renamed to fresh atomic labels.
    """
    d = constraint_diagram(p.edge_constraint, p.alphabet, "edge")
    candidates = right_closed_sets(d)
    if len(candidates) > max_labels:
        raise BlowupError(
            f"{len(candidates)} candidate label sets exceed the cap {max_labels}",
            {"cap": max_labels, "candidates": len(candidates)},
        )
    pairs = maximal_set_configs(
        p.edge_constraint,
        p.alphabet,
        candidates=candidates,
        max_configs=max_configs,
        cancel=cancel,
        progress=progress,
        workers=workers,
    )
    sigma = sorted({s for c in pairs for s in c}, key=set_sort_key)
    for s in sigma:
        assert is_right_closed(s, d), f"lifted set {set_text(s)} is not right-closed"
    name_of, names = _name_sets(sigma)
    node_lifted = lift_exists_constraint(p.node_constraint, sigma)
    problem = Problem.build(
        p.delta,
        _configs_from_condensed(node_lifted, name_of),
        _configs_from_plain(pairs, name_of),
        note=f"re({p.note})" if p.note else "re",
    )
    sets = tuple((name_of[s], s) for s in sigma)
    return LiftedProblem(problem, tuple(sorted(sets)), "re")


def rere(
    p: Problem,
    *,
    max_labels: int = DEFAULT_MAX_LABELS,
    max_configs: int = DEFAULT_MAX_CONFIGS,
    cancel: threading.Event | None = None,
    progress=None,
    workers: int = 0,
) -> LiftedProblem:
    """Second half of the step: dual of ``re``.

    Maximal set configurations are computed on the node side at full arity
    (candidates restricted to right-closed sets of the node diagram), and the
    edge constraint is lifted existentially over the sets that survive.
    """
    d = constraint_diagram(p.node_constraint, p.alphabet, "node")
    candidates = right_closed_sets(d)
    if len(candidates) > max_labels:
        raise BlowupError(
            f"{len(candidates)} candidate label sets exceed the cap {max_labels}",
            {"cap": max_labels, "candidates": len(candidates)},
        )
    node_maximal = maximal_set_configs(
        p.node_constraint,
        p.alphabet,
        candidates=candidates,
        max_configs=max_configs,
        cancel=cancel,
        progress=progress,
        workers=workers,
    )
    sigma = sorted({s for c in node_maximal for s in c}, key=set_sort_key)
    for s in sigma:
        assert is_right_closed(s, d), f"lifted set {set_text(s)} is not right-closed"
    name_of, names = _name_sets(sigma)
    edge_lifted = lift_exists_constraint(p.edge_constraint, sigma)
    problem = Problem.build(
        p.delta,
        _configs_from_plain(node_maximal, name_of),
        _configs_from_condensed(edge_lifted, name_of),
        note=f"rere({p.note})" if p.note else "rere",
    )
    sets = tuple((name_of[s], s) for s in sigma)
    return LiftedProblem(problem, tuple(sorted(sets)), "rere")
