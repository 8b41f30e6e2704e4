"""Port-numbered tree fragments and the executable label transformations.

Trees are finite fragments, so leaves are unavoidable: the node constraint is
checked only at nodes of full degree, and validity reports list the exempt
nodes.  Edge constraints are checked everywhere.  All per-node rewrites read a
node's own labels and colors only, so their result is independent of the order
nodes are processed in.

Tie-breaking is fixed throughout: ascending edge color, then ascending port,
then ascending node index.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from itertools import combinations_with_replacement

from .analysis import Verdict
from .core import Config, Problem, config_in_constraint, expansion
from .errors import PreconditionError
from .family import FamilyParams, make_family_problem, make_plus_problem


@dataclass(frozen=True)
class TreeEdge:
    """Endpoints in edge-port order (u is side 1), with per-endpoint node ports."""

    u: int
    v: int
    pu: int
    pv: int
    color: int | None = None


@dataclass(frozen=True)
class LabeledTree:
    delta: int
    n: int
    edges: tuple[TreeEdge, ...]
    symmetric: bool = False
    labels: tuple[tuple[int, int, str], ...] | None = None  # (node, edge index, label)

    def label_map(self) -> dict[tuple[int, int], str]:
        return {(v, e): l for v, e, l in self.labels or ()}

    def with_labels(self, mapping: dict[tuple[int, int], str]) -> "LabeledTree":
        frozen = tuple(sorted((v, e, l) for (v, e), l in mapping.items()))
        return replace(self, labels=frozen)


def adjacency(t: LabeledTree) -> list[list[tuple[int, int, int, int | None]]]:
    """Per node: (port, edge index, neighbor, color), sorted by port."""
    adj: list[list[tuple[int, int, int, int | None]]] = [[] for _ in range(t.n)]
    for e, edge in enumerate(t.edges):
        adj[edge.u].append((edge.pu, e, edge.v, edge.color))
        adj[edge.v].append((edge.pv, e, edge.u, edge.color))
    for rows in adj:
        rows.sort()
    return adj


def degree_list(t: LabeledTree) -> list[int]:
    deg = [0] * t.n
    for edge in t.edges:
        deg[edge.u] += 1
        deg[edge.v] += 1
    return deg


def _validate_tree(t: LabeledTree) -> None:
    deg = degree_list(t)
    if max(deg, default=0) > t.delta:
        raise ValueError(f"maximum degree {max(deg)} exceeds delta {t.delta}")
    if len(t.edges) != t.n - 1:
        raise ValueError("not a tree: wrong edge count")
    seen_ports: set[tuple[int, int]] = set()
    for edge in t.edges:
        for node, port in ((edge.u, edge.pu), (edge.v, edge.pv)):
            if not 1 <= port <= t.delta or (node, port) in seen_ports:
                raise ValueError(f"bad port {port} at node {node}")
            seen_ports.add((node, port))
    if not t.symmetric:
        for v in range(t.n):
            ports = sorted(p for (nd, p) in seen_ports if nd == v)
            if ports != list(range(1, deg[v] + 1)):
                raise ValueError(f"ports at node {v} are not a permutation of 1..deg")
    # Connectivity: walk from node 0.
    if t.n > 1:
        adj = adjacency(t)
        stack, seen = [0], {0}
        while stack:
            v = stack.pop()
            for _, _, u, _ in adj[v]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        if len(seen) != t.n:
            raise ValueError("not a tree: disconnected")


def random_tree(n: int, delta: int, seed: int, symmetric: bool = False) -> LabeledTree:
    """Seeded random tree with maximum degree at most delta.

    In symmetric mode the tree is properly edge-colored first and every edge's
    color becomes its port number at both endpoints (ports are then distinct
    per node but need not be 1..deg at non-full-degree nodes).
    """
    if n < 1:
        raise PreconditionError(f"n must be at least 1, got {n}", "n >= 1")
    if delta < 2:
        raise PreconditionError(f"delta must be at least 2, got {delta}", "delta >= 2")
    rng = random.Random(seed)
    deg = [0] * n
    links: list[tuple[int, int]] = []
    for v in range(1, n):
        candidates = [u for u in range(v) if deg[u] < delta]
        u = rng.choice(candidates)
        deg[u] += 1
        deg[v] += 1
        links.append((u, v))
    if symmetric:
        bare = LabeledTree(delta, n, tuple(TreeEdge(u, v, 1, 1) for u, v in links))
        colors = _greedy_edge_colors(bare)
        edges = []
        for e, (u, v) in enumerate(links):
            c = colors[e]
            a, b = (u, v) if rng.random() < 0.5 else (v, u)
            edges.append(TreeEdge(a, b, c, c, c))
        tree = LabeledTree(delta, n, tuple(edges), symmetric=True)
    else:
        ports = [rng.sample(range(1, deg[v] + 1), deg[v]) for v in range(n)]
        cursor = [0] * n
        edges = []
        for u, v in links:
            pu = ports[u][cursor[u]]
            pv = ports[v][cursor[v]]
            cursor[u] += 1
            cursor[v] += 1
            if rng.random() < 0.5:
                edges.append(TreeEdge(u, v, pu, pv))
            else:
                edges.append(TreeEdge(v, u, pv, pu))
        tree = LabeledTree(delta, n, tuple(edges))
    _validate_tree(tree)
    return tree


def complete_tree(delta: int, depth: int) -> LabeledTree:
    """Rooted tree where the root has delta children and every other internal
    node has delta-1; all leaves at the given depth."""
    if delta < 2 or depth < 0:
        raise PreconditionError("need delta >= 2 and depth >= 0", "delta >= 2, depth >= 0")
    links: list[tuple[int, int]] = []
    frontier = [0]
    count = 1
    for level in range(depth):
        nxt = []
        for v in frontier:
            kids = delta if level == 0 else delta - 1
            for _ in range(kids):
                links.append((v, count))
                nxt.append(count)
                count += 1
        frontier = nxt
    used = [0] * count
    edges = []
    for u, v in links:
        used[u] += 1
        used[v] += 1
        edges.append(TreeEdge(u, v, used[u], used[v]))
    tree = LabeledTree(delta, count, tuple(edges))
    _validate_tree(tree)
    return tree


def _greedy_edge_colors(t: LabeledTree) -> list[int]:
    adj = adjacency(t)
    colors: list[int | None] = [None] * len(t.edges)
    order = [0]
    seen = {0}
    qi = 0
    while qi < len(order):
        v = order[qi]
        qi += 1
        for _, e, u, _ in adj[v]:
            if u not in seen:
                seen.add(u)
                order.append(u)
            if colors[e] is None:
                taken = {
                    colors[e2]
                    for w in (t.edges[e].u, t.edges[e].v)
                    for _, e2, _, _ in adj[w]
                    if colors[e2] is not None
                }
                c = 1
                while c in taken:
                    c += 1
                if c > t.delta:
                    raise ValueError("edge coloring exceeded delta colors")
                colors[e] = c
    return [c for c in colors]  # type: ignore[misc]


def proper_edge_coloring(t: LabeledTree) -> LabeledTree:
    """Greedy proper coloring along a root-to-leaf order; trees need at most
    delta colors."""
    colors = _greedy_edge_colors(t)
    edges = tuple(replace(e, color=colors[i]) for i, e in enumerate(t.edges))
    return replace(t, edges=edges)


def is_proper_coloring(t: LabeledTree) -> bool:
    adj = adjacency(t)
    for rows in adj:
        cs = [c for _, _, _, c in rows]
        if None in cs or len(set(cs)) != len(cs):
            return False
    return True


# ---------------------------------------------------------------------------
# Outdegree-bounded dominating sets


@dataclass(frozen=True)
class DSolution:
    """Membership plus an orientation of the set-internal edges."""

    in_set: tuple[bool, ...]
    orientation: tuple[tuple[int, int, int], ...]  # (edge index, tail, head)


def greedy_kods(t: LabeledTree, k: int) -> DSolution:
    """Sequential greedy by ascending node index: join unless more than k
    earlier neighbors already joined; set-internal edges point at the earlier
    endpoint, so each member's outdegree is its count at joining time.
    """
    if not 0 <= k <= t.delta:
        raise PreconditionError(f"k = {k} outside [0, {t.delta}]", "0 <= k <= delta")
    adj = adjacency(t)
    in_set = [False] * t.n
    for v in range(t.n):
        earlier = sum(1 for _, _, u, _ in adj[v] if in_set[u])
        if earlier <= k:
            in_set[v] = True
    orientation = []
    for e, edge in enumerate(t.edges):
        if in_set[edge.u] and in_set[edge.v]:
            tail, head = max(edge.u, edge.v), min(edge.u, edge.v)
            orientation.append((e, tail, head))
    return DSolution(tuple(in_set), tuple(orientation))


def check_kods(t: LabeledTree, sol: DSolution, k: int) -> Verdict:
    adj = adjacency(t)
    oriented = {e: (tail, head) for e, tail, head in sol.orientation}
    for v in range(t.n):
        if not sol.in_set[v] and not any(sol.in_set[u] for _, _, u, _ in adj[v]):
            return Verdict(False, {"node": v}, f"node {v} is outside the set and undominated")
    outdeg = [0] * t.n
    for e, edge in enumerate(t.edges):
        internal = sol.in_set[edge.u] and sol.in_set[edge.v]
        if internal != (e in oriented):
            return Verdict(
                False,
                {"edge": e},
                f"edge {e} orientation does not match set membership",
            )
        if internal:
            tail, head = oriented[e]
            if {tail, head} != {edge.u, edge.v}:
                return Verdict(False, {"edge": e}, f"edge {e} oriented between wrong endpoints")
            outdeg[tail] += 1
    for v in range(t.n):
        if sol.in_set[v] and outdeg[v] > k:
            return Verdict(
                False,
                {"node": v, "outdegree": outdeg[v]},
                f"node {v} has outdegree {outdeg[v]} > {k}",
            )
    members = sum(sol.in_set)
    return Verdict(True, None, f"dominating set of {members} nodes, outdegree cap {k} respected")


# ---------------------------------------------------------------------------
# Labeling checks and transformations


def check_labeling(t: LabeledTree, p: Problem) -> Verdict:
    """Node condition at full-degree nodes, edge condition everywhere.

    Nodes of degree below delta are exempt from the node condition and are
    listed in the narrative.
    """
    if t.delta != p.delta:
        raise ValueError(f"tree delta {t.delta} differs from problem delta {p.delta}")
    labels = t.label_map()
    adj = adjacency(t)
    deg = degree_list(t)
    for v in range(t.n):
        for _, e, _, _ in adj[v]:
            if (v, e) not in labels:
                raise ValueError(f"missing label at node {v}, edge {e}")
    for v in range(t.n):
        if deg[v] != t.delta:
            continue
        counts: dict[str, int] = {}
        for _, e, _, _ in adj[v]:
            l = labels[(v, e)]
            counts[l] = counts.get(l, 0) + 1
        cfg = Config.plain(counts)
        if not (cfg.labels() <= set(p.alphabet)) or not config_in_constraint(
            cfg, p.node_constraint
        ):
            return Verdict(
                False,
                {"node": v, "configuration": cfg.serialize()},
                f"node {v} uses configuration {cfg.serialize()}, not allowed by the node constraint",
            )
    for e, edge in enumerate(t.edges):
        a, b = labels[(edge.u, e)], labels[(edge.v, e)]
        pair = Config.of([((a,), 1), ((b,), 1)])
        if not (pair.labels() <= set(p.alphabet)) or not config_in_constraint(
            pair, p.edge_constraint
        ):
            return Verdict(
                False,
                {"edge": e, "pair": f"{a} {b}"},
                f"edge {e} carries {a} {b}, not allowed by the edge constraint",
            )
    exempt = [v for v in range(t.n) if deg[v] != t.delta]
    shown = ", ".join(map(str, exempt[:20])) + (", ..." if len(exempt) > 20 else "")
    narrative = (
        f"valid labeling; {len(exempt)} nodes of degree below {t.delta} exempt from the "
        f"node condition" + (f": {shown}" if exempt else "")
    )
    return Verdict(True, None, narrative)


def kods_to_family_labeling(t: LabeledTree, sol: DSolution, a: int, k: int) -> LabeledTree:
    """One-round algorithm from a dominating-set solution to a family labeling.

    Members write X on outgoing set-internal edges and M elsewhere, then
    demote M to X (ascending port) until exactly k edges carry X (capped by
    the degree); non-members point P at the lowest-port member neighbor and
    write O elsewhere.  Valid for family(delta, a, k) at every full-degree
    node, for any a.
    """
    chk = check_kods(t, sol, k)
    if not chk.holds:
        raise PreconditionError(f"invalid dominating-set solution: {chk.narrative}")
    adj = adjacency(t)
    outgoing: dict[int, set[int]] = {v: set() for v in range(t.n)}
    for e, tail, _ in sol.orientation:
        outgoing[tail].add(e)
    labels: dict[tuple[int, int], str] = {}
    for v in range(t.n):
        rows = adj[v]
        if sol.in_set[v]:
            mine = {e: ("X" if e in outgoing[v] else "M") for _, e, _, _ in rows}
            want_x = min(k, len(rows))
            have_x = sum(1 for l in mine.values() if l == "X")
            for port, e, _, _ in rows:
                if have_x >= want_x:
                    break
                if mine[e] == "M":
                    mine[e] = "X"
                    have_x += 1
            for _, e, _, _ in rows:
                labels[(v, e)] = mine[e]
        else:
            member_ports = [(port, e) for port, e, u, _ in rows if sol.in_set[u]]
            pointer = member_ports[0][1]
            for _, e, _, _ in rows:
                labels[(v, e)] = "P" if e == pointer else "O"
    return t.with_labels(labels)


def plus_to_family_transform(
    t: LabeledTree, a: int, x: int, node_order=None
) -> LabeledTree:
    """Zero-round rewrite from the six-label variant to the family problem one
    step down, consuming the proper edge coloring.

    On low colors (1..floor((a-1)/2)) owners demote A to X while new owners
    promote C to A; every other C becomes X; finally each node trims its A
    count down to floor((a-2x-1)/2) in ascending (color, port) order.  The two
    color windows cannot meet, so no edge ever carries A on both sides.
    ``node_order`` only fixes the processing order; the result is the same for
    every order.
    """
    if not 2 * x + 1 <= a:
        raise PreconditionError(f"2x+1 = {2 * x + 1} exceeds a = {a}", "2x+1 <= a")
    if not a <= t.delta:
        raise PreconditionError(f"a = {a} exceeds delta = {t.delta}", "a <= delta")
    if not is_proper_coloring(t):
        raise PreconditionError("a proper edge coloring is required", "proper coloring present")
    plus = make_plus_problem(FamilyParams(t.delta, a, x))
    chk = check_labeling(t, plus)
    if not chk.holds:
        raise PreconditionError(f"input labeling invalid: {chk.narrative}")
    low = (a - 1) // 2
    quota = (a - 2 * x - 1) // 2
    labels = t.label_map()
    adj = adjacency(t)
    new_labels = dict(labels)
    for v in node_order if node_order is not None else range(t.n):
        rewritten: dict[int, str] = {}
        for port, e, _, color in adj[v]:
            l = labels[(v, e)]
            if l == "A":
                rewritten[e] = "X" if color <= low else "A"
            elif l == "C":
                rewritten[e] = "A" if color <= low else "X"
            else:
                rewritten[e] = l
        carrying = sorted(
            (color, port, e)
            for port, e, _, color in adj[v]
            if rewritten[e] == "A"
        )
        for color, port, e in carrying[: max(0, len(carrying) - quota)]:
            rewritten[e] = "X"
        for _, e, _, _ in adj[v]:
            new_labels[(v, e)] = rewritten[e]
    out = t.with_labels(new_labels)
    for e, edge in enumerate(out.edges):
        pair = (new_labels[(edge.u, e)], new_labels[(edge.v, e)])
        assert pair != ("A", "A"), f"edge {e} came out labeled A A"
    return out


def weaken_labeling(
    t: LabeledTree, source: FamilyParams, target: FamilyParams
) -> LabeledTree:
    """Demote surplus M and A labels to X (ascending port) to turn a valid
    family(source) labeling into a valid family(target) one; requires
    target.a <= source.a and target.x >= source.x."""
    if target.delta != source.delta or target.delta != t.delta:
        raise PreconditionError("delta mismatch between tree and parameters", "equal delta")
    if target.a > source.a:
        raise PreconditionError(f"a may only decrease: {source.a} -> {target.a}", "a <= a'")
    if target.x < source.x:
        raise PreconditionError(f"x may only increase: {source.x} -> {target.x}", "x >= x'")
    chk = check_labeling(t, make_family_problem(source))
    if not chk.holds:
        raise PreconditionError(f"input labeling invalid: {chk.narrative}")
    labels = t.label_map()
    adj = adjacency(t)
    new_labels = dict(labels)
    demote_m = target.x - source.x
    demote_a = source.a - target.a
    for v in range(t.n):
        for symbol, surplus in (("M", demote_m), ("A", demote_a)):
            if surplus <= 0:
                continue
            carrying = [e for _, e, _, _ in adj[v] if new_labels[(v, e)] == symbol]
            for e in carrying[:surplus]:
                new_labels[(v, e)] = "X"
    return t.with_labels(new_labels)


# ---------------------------------------------------------------------------
# Labeling search


def generate_valid_labeling(
    t: LabeledTree, p: Problem, seed: int
) -> LabeledTree | None:
    """A valid labeling found by bottom-up feasibility plus seeded top-down
    choice, or None when no labeling exists.

    Full-degree nodes must use allowed node configurations; other nodes may
    use any label multiset (they are exempt from the node condition), subject
    to the edge constraint everywhere.
    """
    if t.delta != p.delta:
        raise ValueError(f"tree delta {t.delta} differs from problem delta {p.delta}")
    rng = random.Random(seed)
    sigma = list(p.alphabet)
    if not sigma:
        return None
    compat = {
        (y, u): config_in_constraint(Config.of([((y,), 1), ((u,), 1)]), p.edge_constraint)
        if y != u
        else config_in_constraint(Config.of([((y,), 2)]), p.edge_constraint)
        for y in sigma
        for u in sigma
    }
    adj = adjacency(t)
    deg = degree_list(t)
    # Root at 0; children ordered by port.
    parent = [-1] * t.n
    parent_edge = [-1] * t.n
    order = [0]
    seen = {0}
    qi = 0
    while qi < len(order):
        v = order[qi]
        qi += 1
        for _, e, u, _ in adj[v]:
            if u not in seen:
                seen.add(u)
                parent[u] = v
                parent_edge[u] = e
                order.append(u)
    children = [[] for _ in range(t.n)]
    for v in order[1:]:
        children[parent[v]].append(v)

    def allowed_multisets(v: int) -> list[dict[str, int]]:
        if deg[v] == t.delta:
            return [dict(c.counts()) for c in expansion(p.node_constraint)]
        return [
            {l: combo.count(l) for l in set(combo)}
            for combo in combinations_with_replacement(sigma, deg[v])
        ]

    feasible_up: list[set[str]] = [set() for _ in range(t.n)]
    accepts: list[set[str]] = [set() for _ in range(t.n)]

    def assignable(kids: list[int], counts: dict[str, int]) -> bool:
        remaining = dict(counts)

        def go(i: int) -> bool:
            if i == len(kids):
                return True
            for y in list(remaining):
                if remaining[y] > 0 and y in accepts[kids[i]]:
                    remaining[y] -= 1
                    if go(i + 1):
                        remaining[y] += 1
                        return True
                    remaining[y] += 1
            return False

        return go(0)

    for v in reversed(order):
        kids = children[v]
        if v == 0:
            break
        for m in allowed_multisets(v):
            for up in m:
                if up in feasible_up[v]:
                    continue
                rest = dict(m)
                rest[up] -= 1
                if rest[up] == 0:
                    del rest[up]
                if assignable(kids, rest):
                    feasible_up[v].add(up)
        accepts[v] = {y for y in sigma if any(compat[(y, u)] for u in feasible_up[v])}
        if not feasible_up[v]:
            return None

    root_options = [m for m in allowed_multisets(0) if assignable(children[0], m)]
    if not root_options:
        return None

    labels: dict[tuple[int, int], str] = {}

    def pick_assignment(kids: list[int], counts: dict[str, int]) -> dict[int, str] | None:
        remaining = dict(counts)
        chosen: dict[int, str] = {}

        def go(i: int) -> bool:
            if i == len(kids):
                return True
            options = [y for y in remaining if remaining[y] > 0 and y in accepts[kids[i]]]
            rng.shuffle(options)
            for y in options:
                remaining[y] -= 1
                chosen[kids[i]] = y
                if go(i + 1):
                    return True
                remaining[y] += 1
                del chosen[kids[i]]
            return False

        return chosen if go(0) else None

    def assign(v: int, up_label: str | None) -> None:
        kids = children[v]
        picked = None
        if v == 0:
            options = list(root_options)
            rng.shuffle(options)
            for m in options:
                picked = pick_assignment(kids, m)
                if picked is not None:
                    break
        else:
            candidates = []
            for m in allowed_multisets(v):
                if m.get(up_label, 0) < 1:
                    continue
                rest = dict(m)
                rest[up_label] -= 1
                if rest[up_label] == 0:
                    del rest[up_label]
                candidates.append(rest)
            rng.shuffle(candidates)
            picked = None
            for rest in candidates:
                picked = pick_assignment(kids, rest)
                if picked is not None:
                    break
            labels[(v, parent_edge[v])] = up_label
        assert picked is not None, "bottom-up feasibility promised an assignment"
        for c in kids:
            y = picked[c]
            labels[(v, _edge_between(v, c))] = y
            ups = sorted(u for u in feasible_up[c] if compat[(y, u)])
            assign(c, rng.choice(ups))

    edge_index: dict[tuple[int, int], int] = {}
    for e, edge in enumerate(t.edges):
        edge_index[(edge.u, edge.v)] = e
        edge_index[(edge.v, edge.u)] = e

    def _edge_between(u: int, v: int) -> int:
        return edge_index[(u, v)]

    assign(0, None)
    return t.with_labels(labels)


def symmetric_zero_round_labeling(t: LabeledTree, cfg: Config) -> LabeledTree:
    """Constant zero-round output on the symmetric family: the configuration's
    labels are assigned to ports 1..delta in sorted order, and each half-edge
    takes the label of its port."""
    if not t.symmetric:
        raise PreconditionError("requires a symmetric-mode tree", "symmetric ports")
    if cfg.arity != t.delta or not cfg.is_plain():
        raise PreconditionError("configuration must be plain with arity delta")
    sequence: list[str] = []
    for label, mult in sorted(cfg.counts().items()):
        sequence.extend([label] * mult)
    by_port = {i + 1: sequence[i] for i in range(t.delta)}
    labels: dict[tuple[int, int], str] = {}
    for e, edge in enumerate(t.edges):
        labels[(edge.u, e)] = by_port[edge.pu]
        labels[(edge.v, e)] = by_port[edge.pv]
    return t.with_labels(labels)
