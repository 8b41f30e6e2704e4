"""Locally checkable problems on regular trees: labels, configurations, constraints.

A problem couples a node constraint (multisets of labels of size delta, one label
per incident edge) with an edge constraint (label pairs across an edge).
Configurations are multisets written in exponent notation and may use disjunction
groups: ``M [O P]`` stands for both ``M O`` and ``M P``.  All equality is
multiset equality; parsing and construction canonicalize, so two problems with
the same semantics and presentation compare equal and serialize identically.
"""

from __future__ import annotations

import re as _rx
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations_with_replacement

from .errors import BlowupError, ParseError

_LABEL_RX = _rx.compile(r"[A-Z][A-Z0-9']*\Z")


def is_label_name(name: str) -> bool:
    return bool(_LABEL_RX.match(name))


def _check_label(name: str) -> str:
    if not is_label_name(name):
        raise ValueError(f"invalid label name {name!r}: expected uppercase identifier")
    return name


def _group_key(group: tuple[str, ...]) -> tuple:
    return (len(group), group)


@dataclass(frozen=True)
class Config:
    """A configuration: multiset of disjunction groups with multiplicities.

    ``items`` is canonical: groups are sorted tuples of distinct labels, equal
    groups merged, items ordered by (group size, members).  A plain
    configuration is one whose groups are all singletons.
    """

    items: tuple[tuple[tuple[str, ...], int], ...]

    @staticmethod
    def of(items) -> "Config":
        merged: dict[tuple[str, ...], int] = {}
        for group, mult in items:
            if mult < 0:
                raise ValueError(f"negative multiplicity {mult}")
            if mult == 0:
                continue
            g = tuple(sorted(set(group)))
            if not g:
                raise ValueError("empty disjunction group")
            merged[g] = merged.get(g, 0) + mult
        return Config(tuple(sorted(merged.items(), key=lambda it: _group_key(it[0]))))

    @staticmethod
    def plain(counts) -> "Config":
        return Config.of(((label,), mult) for label, mult in dict(counts).items())

    @property
    def arity(self) -> int:
        return sum(m for _, m in self.items)

    def labels(self) -> frozenset[str]:
        return frozenset(l for g, _ in self.items for l in g)

    def is_plain(self) -> bool:
        return all(len(g) == 1 for g, _ in self.items)

    def counts(self) -> dict[str, int]:
        if not self.is_plain():
            raise ValueError(f"configuration '{self.serialize()}' has disjunctions")
        return {g[0]: m for g, m in self.items}

    def serialize(self) -> str:
        parts = []
        for group, mult in self.items:
            text = group[0] if len(group) == 1 else "[" + " ".join(group) + "]"
            parts.append(text if mult == 1 else f"{text}^{mult}")
        return " ".join(parts)


@dataclass(frozen=True)
class Constraint:
    """A set of configurations of one arity; semantics is the union of expansions."""

    arity: int
    configs: tuple[Config, ...]

    @staticmethod
    def of(arity: int, configs) -> "Constraint":
        if arity < 1:
            raise ValueError(f"constraint arity must be positive, got {arity}")
        seen = set()
        kept = []
        for c in configs:
            if c.arity != arity:
                raise ValueError(
                    f"configuration '{c.serialize()}' has length {c.arity}, expected {arity}"
                )
            if c not in seen:
                seen.add(c)
                kept.append(c)
        return Constraint(arity, tuple(sorted(kept, key=lambda c: c.serialize())))

    def labels(self) -> frozenset[str]:
        out: set[str] = set()
        for c in self.configs:
            out |= c.labels()
        return frozenset(out)

    def serialize_lines(self) -> list[str]:
        return [c.serialize() for c in self.configs]


@dataclass(frozen=True)
class Problem:
    """A locally checkable problem at a concrete degree delta.

    The alphabet is exactly the set of labels used by the constraints (labels
    are declared by use).  ``note`` is free-text provenance and does not take
    part in equality.
    """

    delta: int
    alphabet: tuple[str, ...]
    node_constraint: Constraint
    edge_constraint: Constraint
    note: str = field(default="", compare=False)

    @staticmethod
    def build(delta: int, node_configs, edge_configs, note: str = "") -> "Problem":
        if delta < 2:
            raise ValueError(f"delta must be at least 2, got {delta}")
        nodes = Constraint.of(delta, node_configs)
        edges = Constraint.of(2, edge_configs)
        alphabet = tuple(sorted(nodes.labels() | edges.labels()))
        for name in alphabet:
            _check_label(name)
        return Problem(delta, alphabet, nodes, edges, note)


# ---------------------------------------------------------------------------
# Text format


_DELTA_RX = _rx.compile(r"delta:\s*(\d+)\s*\Z")
_SCAN_RX = _rx.compile(
    r"(?P<ws>[ \t]+)|(?P<label>[A-Z][A-Z0-9']*)|(?P<open>\[)|(?P<close>\])|(?P<exp>\^(?P<num>\d+))|(?P<bad>.)"
)


def _parse_config(line: str, lineno: int) -> Config:
    items: list[tuple[tuple[str, ...], int]] = []
    open_group: list[str] | None = None
    pending: tuple[str, ...] | None = None
    pos = 0
    while pos < len(line):
        m = _SCAN_RX.match(line, pos)
        col = pos + 1
        pos = m.end()
        if m.lastgroup == "ws":
            # Exponents attach directly to a group; whitespace ends the item.
            if open_group is None and pending is not None:
                items.append((pending, 1))
                pending = None
            continue
        if m.lastgroup == "label":
            if open_group is not None:
                open_group.append(m.group("label"))
            else:
                if pending is not None:
                    items.append((pending, 1))
                pending = (m.group("label"),)
        elif m.lastgroup == "open":
            if open_group is not None:
                raise ParseError("nested '[' is not allowed", lineno, col)
            if pending is not None:
                items.append((pending, 1))
                pending = None
            open_group = []
        elif m.lastgroup == "close":
            if open_group is None:
                raise ParseError("']' without matching '['", lineno, col)
            if not open_group:
                raise ParseError("empty disjunction group", lineno, col)
            pending = tuple(open_group)
            open_group = None
        elif m.lastgroup == "exp":
            if open_group is not None:
                raise ParseError("exponent inside a disjunction group", lineno, col)
            if pending is None:
                raise ParseError("exponent without a preceding label or group", lineno, col)
            items.append((pending, int(m.group("num"))))
            pending = None
        else:
            raise ParseError(f"unexpected character {m.group('bad')!r}", lineno, col)
    if open_group is not None:
        raise ParseError("unclosed '['", lineno, len(line))
    if pending is not None:
        items.append((pending, 1))
    return Config.of(items)


def parse_problem(text: str) -> Problem:
    """Parse the problem text format.

    Line 1 declares ``delta: <int>``; a ``nodes:`` section and an ``edges:``
    section follow, one configuration per line.  ``#`` starts a comment.
    Labels are declared by use.
    """
    delta: int | None = None
    section: str | None = None
    sections: dict[str, list[Config]] = {"nodes": [], "edges": []}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        stripped = line.strip()
        if delta is None:
            m = _DELTA_RX.match(stripped)
            if not m:
                raise ParseError("expected 'delta: <int>' as the first line", lineno, 1)
            delta = int(m.group(1))
            if delta < 2:
                raise ParseError(f"delta must be at least 2, got {delta}", lineno, 1)
            continue
        if stripped == "nodes:":
            section = "nodes"
            continue
        if stripped == "edges:":
            section = "edges"
            continue
        if section is None:
            raise ParseError("configuration before a 'nodes:' or 'edges:' header", lineno, 1)
        cfg = _parse_config(line, lineno)
        expected = delta if section == "nodes" else 2
        if cfg.arity != expected:
            raise ParseError(
                f"configuration '{cfg.serialize()}' has length {cfg.arity}, expected {expected}",
                lineno,
            )
        sections[section].append(cfg)
    if delta is None:
        raise ParseError("missing 'delta:' line", 1, 1)
    return Problem.build(delta, sections["nodes"], sections["edges"])


def serialize_problem(p: Problem) -> str:
    """Deterministic canonical text; a fixed point of parse followed by serialize."""
    lines = [f"delta: {p.delta}", "nodes:"]
    lines += p.node_constraint.serialize_lines()
    lines.append("edges:")
    lines += p.edge_constraint.serialize_lines()
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Expansion and membership


def expand_config(config: Config, cap: int | None = 1_000_000) -> tuple[Config, ...]:
    """All plain configurations obtained by fixing every disjunction choice.

    Duplicate choices that produce the same multiset are collapsed.  Groups
    that are singletons contribute no branching, so multiplicities may be
    arbitrarily large as long as the disjunctive part stays small.
    """
    partial: list[dict[str, int]] = [{}]
    for group, mult in config.items:
        if len(group) == 1:
            for d in partial:
                d[group[0]] = d.get(group[0], 0) + mult
            continue
        choices = [Counter(combo) for combo in combinations_with_replacement(group, mult)]
        nxt: dict[tuple, dict[str, int]] = {}
        for d in partial:
            for ch in choices:
                merged = dict(d)
                for label, m in ch.items():
                    merged[label] = merged.get(label, 0) + m
                nxt[tuple(sorted(merged.items()))] = merged
        partial = list(nxt.values())
        if cap is not None and len(partial) > cap:
            raise BlowupError(
                f"expansion of '{config.serialize()}' exceeds {cap} configurations",
                {"cap": cap, "partial": len(partial)},
            )
    out = {Config.plain(d) for d in partial}
    return tuple(sorted(out, key=lambda c: c.serialize()))


@lru_cache(maxsize=None)
def expansion(k: Constraint) -> frozenset[Config]:
    """The semantics of a constraint: the set of all plain configurations it allows."""
    out: set[Config] = set()
    for c in k.configs:
        out.update(expand_config(c))
    return frozenset(out)


def _flow_feasible(counts: dict[str, int], groups: list[tuple[frozenset[str], int]]) -> bool:
    """Can every unit of ``counts`` be routed into groups containing its label,
    within group capacities?  Exact transportation feasibility via max-flow;
    capacities may be arbitrarily large integers."""
    total = sum(counts.values())
    if total == 0:
        return True
    labels = [l for l, c in counts.items() if c > 0]
    members = [set(g) for g, _ in groups]
    src = {l: counts[l] for l in labels}
    snk = {j: cap for j, (_, cap) in enumerate(groups)}
    used: dict[tuple[str, int], int] = {}
    flowed = 0
    while flowed < total:
        # BFS over residual graph: source -> label -> group -> sink.
        parent: dict[tuple, tuple] = {}
        queue: list[tuple] = []
        for l in labels:
            if src[l] > 0:
                parent[("L", l)] = ("S",)
                queue.append(("L", l))
        goal = None
        qi = 0
        while qi < len(queue) and goal is None:
            node = queue[qi]
            qi += 1
            if node[0] == "L":
                l = node[1]
                for j, mem in enumerate(members):
                    if l in mem and ("G", j) not in parent:
                        parent[("G", j)] = node
                        if snk[j] > 0:
                            goal = ("G", j)
                            break
                        queue.append(("G", j))
            else:
                j = node[1]
                for (l, jj), f in used.items():
                    if jj == j and f > 0 and ("L", l) not in parent:
                        parent[("L", l)] = node
                        queue.append(("L", l))
        if goal is None:
            return False
        # Bottleneck along the path.
        path = [goal]
        while path[-1] != ("S",):
            path.append(parent[path[-1]])
        path.reverse()
        bottleneck = None
        for a, b in zip(path, path[1:]):
            if a == ("S",):
                cap = src[b[1]]
            elif a[0] == "L" and b[0] == "G":
                cap = None  # label -> group is uncapacitated
            else:  # group -> label back edge
                cap = used[(b[1], a[1])]
            if cap is not None:
                bottleneck = cap if bottleneck is None else min(bottleneck, cap)
        bottleneck = min(bottleneck, snk[goal[1]])
        # Apply.
        for a, b in zip(path, path[1:]):
            if a == ("S",):
                src[b[1]] -= bottleneck
            elif a[0] == "L" and b[0] == "G":
                used[(a[1], b[1])] = used.get((a[1], b[1]), 0) + bottleneck
            else:
                used[(b[1], a[1])] -= bottleneck
        snk[goal[1]] -= bottleneck
        flowed += bottleneck
    return True


def config_in_constraint(c: Config, k: Constraint) -> bool:
    """Multiset membership of a plain configuration in a constraint.

    Decided by matching the configuration's labels against one condensed
    configuration's groups with exact multiplicity cover, never by full
    expansion, so it works at arbitrarily large multiplicities.
    """
    if not c.is_plain():
        raise ValueError(f"membership requires a plain configuration, got '{c.serialize()}'")
    if c.arity != k.arity:
        raise ValueError(f"arity mismatch: configuration {c.arity}, constraint {k.arity}")
    counts = c.counts()
    have = set(counts)
    for cond in k.configs:
        if not have <= cond.labels():
            continue
        if _flow_feasible(counts, [(frozenset(g), m) for g, m in cond.items]):
            return True
    return False


# ---------------------------------------------------------------------------
# Renaming and isomorphism


def rename_problem(p: Problem, mapping: dict[str, str]) -> Problem:
    """Transport a problem along a bijective relabeling of its alphabet."""
    missing = [l for l in p.alphabet if l not in mapping]
    if missing:
        raise ValueError(f"renaming does not map labels: {', '.join(missing)}")
    image = [mapping[l] for l in p.alphabet]
    if len(set(image)) != len(image):
        raise ValueError("renaming is not injective on the alphabet")
    for name in image:
        _check_label(name)

    def rename_config(c: Config) -> Config:
        return Config.of((tuple(mapping[l] for l in g), m) for g, m in c.items)

    return Problem.build(
        p.delta,
        [rename_config(c) for c in p.node_constraint.configs],
        [rename_config(c) for c in p.edge_constraint.configs],
        note=p.note,
    )


def _pair(a: str, b: str) -> Config:
    return Config.of([((a,), 1), ((b,), 1)]) if a != b else Config.of([((a,), 2)])


def _occurrence_profile(k: Constraint, label: str) -> tuple:
    rows = []
    for cfg in k.configs:
        rows.append(tuple(sorted((len(g), m) for g, m in cfg.items if label in g)))
    return tuple(sorted(rows))


def _label_fingerprint(p: Problem, label: str) -> tuple:
    self_ok = config_in_constraint(_pair(label, label), p.edge_constraint)
    compat = sum(
        1 for y in p.alphabet if config_in_constraint(_pair(label, y), p.edge_constraint)
    )
    return (
        _occurrence_profile(p.node_constraint, label),
        _occurrence_profile(p.edge_constraint, label),
        self_ok,
        compat,
    )


def problems_isomorphic(p1: Problem, p2: Problem) -> dict[str, str] | None:
    """A bijective relabeling turning p1 into p2, if one exists.

    The search assigns labels in order of fewest fingerprint-compatible
    candidates; the fingerprint combines per-label occurrence statistics with
    edge-compatibility counts, which prunes almost everything at these sizes.
    """
    if p1.delta != p2.delta or len(p1.alphabet) != len(p2.alphabet):
        return None
    fp2: dict[str, tuple] = {y: _label_fingerprint(p2, y) for y in p2.alphabet}
    cands: dict[str, list[str]] = {}
    for l in p1.alphabet:
        fp = _label_fingerprint(p1, l)
        cands[l] = [y for y in p2.alphabet if fp2[y] == fp]
        if not cands[l]:
            return None
    order = sorted(p1.alphabet, key=lambda l: len(cands[l]))
    used: set[str] = set()
    mapping: dict[str, str] = {}

    def assign(i: int) -> dict[str, str] | None:
        if i == len(order):
            return dict(mapping) if rename_problem(p1, mapping) == p2 else None
        l = order[i]
        for y in cands[l]:
            if y in used:
                continue
            used.add(y)
            mapping[l] = y
            found = assign(i + 1)
            if found is not None:
                return found
            used.discard(y)
            del mapping[l]
        return None

    return assign(0)
