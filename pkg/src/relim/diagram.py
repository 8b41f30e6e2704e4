"""Strength relations between labels and their Hasse-reduced diagrams.

Label A is at least as strong as B (w.r.t. a constraint) when replacing one
occurrence of B by A in any allowed plain configuration containing B yields an
allowed configuration again.  The relation is computed on expansion semantics,
so equivalent presentations of a constraint give equal diagrams.  Mutually
as-strong labels are kept distinct and grouped into explicit equivalence
classes rather than merged.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .core import Config, Constraint, Problem, expansion
from .errors import BlowupError


def at_least_as_strong(a: str, b: str, k: Constraint) -> bool:
    """True when every allowed configuration keeps being allowed after swapping
    one occurrence of b for a."""
    if a == b:
        return True
    allowed = expansion(k)
    for cfg in allowed:
        counts = cfg.counts()
        if counts.get(b, 0) == 0:
            continue
        swapped = dict(counts)
        swapped[b] -= 1
        swapped[a] = swapped.get(a, 0) + 1
        if Config.plain(swapped) not in allowed:
            return False
    return True


@dataclass(frozen=True)
class Diagram:
    """Hasse diagram of the strict strength order, with ties as explicit classes.

    ``edges`` are (weaker, stronger) pairs between class representatives; a
    representative is the lexicographically smallest member of its class.
    """

    side: str
    labels: tuple[str, ...]
    classes: tuple[tuple[str, ...], ...]
    edges: tuple[tuple[str, str], ...]

    def class_of(self, label: str) -> tuple[str, ...]:
        for cls in self.classes:
            if label in cls:
                return cls
        raise KeyError(label)


def constraint_diagram(k: Constraint, alphabet, side: str) -> Diagram:
    labels = tuple(sorted(alphabet))
    ge = {(x, y): at_least_as_strong(x, y, k) for x in labels for y in labels}
    # Mutually as-strong labels form classes; the strict order lives on classes.
    classes: list[tuple[str, ...]] = []
    rep_of: dict[str, str] = {}
    for l in labels:
        if l in rep_of:
            continue
        mates = tuple(y for y in labels if ge[(l, y)] and ge[(y, l)])
        classes.append(mates)
        for y in mates:
            rep_of[y] = mates[0]
    reps = [cls[0] for cls in classes]
    strict = {
        (u, v)
        for u in reps
        for v in reps
        if u != v and ge[(v, u)] and not ge[(u, v)]
    }
    hasse = tuple(
        sorted(
            (u, v)
            for (u, v) in strict
            if not any((u, w) in strict and (w, v) in strict for w in reps)
        )
    )
    return Diagram(side, labels, tuple(classes), hasse)


def build_diagram(p: Problem, side: str) -> Diagram:
    if side == "node":
        return constraint_diagram(p.node_constraint, p.alphabet, side)
    if side == "edge":
        return constraint_diagram(p.edge_constraint, p.alphabet, side)
    raise ValueError(f"side must be 'node' or 'edge', got {side!r}")


@lru_cache(maxsize=None)
def _upward(d: Diagram) -> dict[str, frozenset[str]]:
    """For each label, its class mates plus everything strictly stronger."""
    succ: dict[str, set[str]] = {rep: set() for cls in d.classes for rep in [cls[0]]}
    for u, v in d.edges:
        succ[u].add(v)
    # Transitive closure over representatives (small graphs).
    changed = True
    while changed:
        changed = False
        for u in succ:
            extra = set()
            for v in succ[u]:
                extra |= succ[v]
            if not extra <= succ[u]:
                succ[u] |= extra
                changed = True
    members = {cls[0]: set(cls) for cls in d.classes}
    out: dict[str, frozenset[str]] = {}
    for cls in d.classes:
        rep = cls[0]
        up = set(cls)
        for r in succ[rep]:
            up |= members[r]
        for l in cls:
            out[l] = frozenset(up)
    return out


def is_right_closed(s, d: Diagram) -> bool:
    """Is the label set upward closed under the strength order (class mates included)?"""
    s = frozenset(s)
    if not s or not s <= set(d.labels):
        raise ValueError("expected a nonempty subset of the diagram's labels")
    up = _upward(d)
    return all(up[l] <= s for l in s)


def right_closed_sets(d: Diagram, cap: int = 200_000) -> tuple[frozenset[str], ...]:
    """All nonempty upward-closed label sets, canonically ordered."""
    if len(d.classes) > 20:
        raise BlowupError(
            f"right-closed enumeration over {len(d.classes)} classes is too large",
            {"classes": len(d.classes)},
        )
    up = _upward(d)
    reps = [cls[0] for cls in d.classes]
    rep_up = {r: up[r] for r in reps}
    members = {cls[0]: frozenset(cls) for cls in d.classes}
    out: list[frozenset[str]] = []
    for mask in range(1, 1 << len(reps)):
        chosen = [reps[i] for i in range(len(reps)) if mask >> i & 1]
        union: set[str] = set()
        for r in chosen:
            union |= members[r]
        if all(rep_up[r] <= union for r in chosen):
            out.append(frozenset(union))
            if len(out) > cap:
                raise BlowupError("too many right-closed sets", {"cap": cap})
    return tuple(sorted(out, key=lambda s: (len(s), tuple(sorted(s)))))


def diagram_to_dot(d: Diagram) -> str:
    """Graph-description text: one node per equivalence class, edges weak -> strong."""
    def node_name(cls: tuple[str, ...]) -> str:
        return " = ".join(cls)

    by_rep = {cls[0]: node_name(cls) for cls in d.classes}
    lines = [f"digraph {d.side}_strength {{"]
    for cls in d.classes:
        lines.append(f'  "{node_name(cls)}";')
    for u, v in d.edges:
        lines.append(f'  "{by_rep[u]}" -> "{by_rep[v]}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
