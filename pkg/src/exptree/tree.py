"""Finite expanded trees: rooted trees with labeled splitting and a
well-order on every level.

A tree here is a finite rooted tree in which every node at a non-top level
splits into exactly ``branching`` children, each child carrying a distinct
branch label in ``0..branching-1``, and every level carries a well-order
(stored as per-node ranks).  Two total orders are derived: the ancestor
order (parent chains) and the star order (level first, then rank), the
former contained in the latter.  Meets (greatest common ancestors) always
exist because the root is unique.

Trees are immutable after construction; every operation in this module is
read-only, so instances can be shared freely across threads.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Sequence

__all__ = [
    "ExpandedTree",
    "Violation",
    "build_canonical_tree",
    "lex_level_orders",
    "reversed_level_orders",
    "shuffled_level_orders",
    "validate",
    "meet",
    "restrict",
    "lex_less",
    "is_subtree",
    "are_neighbors",
    "is_weakly_saturated",
    "store_tree",
    "load_tree",
]

TREE_MAGIC = "exptree-tree v1"


@dataclass(frozen=True)
class Violation:
    """One violated axiom clause, with the witnessing node indices."""

    clause: str
    nodes: tuple[int, ...]
    message: str

    def __str__(self) -> str:
        return f"clause ({self.clause}) at nodes {list(self.nodes)}: {self.message}"


class ExpandedTree:
    """A candidate expanded tree over dense node indices ``0..node_count-1``.

    Fields are stored raw so that arbitrary broken structures can be held
    and inspected by :func:`validate`.  The derived accessors (children,
    ancestor tables, meets) assume a structure that passes validation;
    on broken trees they may raise.

    The star order is represented implicitly: ``s <* t`` iff
    ``(level[s], level_rank[s]) < (level[t], level_rank[t])``.
    """

    __slots__ = (
        "node_count",
        "branching",
        "parent",
        "branch_label",
        "level",
        "level_rank",
        "height",
        "_children",
        "_anc",
        "_levels",
    )

    def __init__(
        self,
        parent: Sequence[int | None],
        branch_label: Sequence[int | None],
        level: Sequence[int],
        level_rank: Sequence[int],
        branching: int,
        height: int,
    ):
        n = len(parent)
        if not (len(branch_label) == len(level) == len(level_rank) == n):
            raise ValueError("field arrays must all have the same length")
        if branching < 2:
            raise ValueError(f"branching must be >= 2, got {branching}")
        self.node_count = n
        self.branching = branching
        self.parent = tuple(parent)
        self.branch_label = tuple(branch_label)
        self.level = tuple(level)
        self.level_rank = tuple(level_rank)
        self.height = height
        self._children: tuple[tuple[int, ...], ...] | None = None
        self._anc: tuple[tuple[int, ...], ...] | None = None
        self._levels: tuple[tuple[int, ...], ...] | None = None

    # -- structural equality (used by file round-trips and neighbor tests)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExpandedTree):
            return NotImplemented
        return (
            self.node_count == other.node_count
            and self.branching == other.branching
            and self.height == other.height
            and self.parent == other.parent
            and self.branch_label == other.branch_label
            and self.level == other.level
            and self.level_rank == other.level_rank
        )

    def __hash__(self) -> int:
        return hash((self.branching, self.height, self.parent, self.branch_label, self.level_rank))

    def __repr__(self) -> str:
        return f"ExpandedTree(nodes={self.node_count}, branching={self.branching}, height={self.height})"

    # -- derived structure (valid trees only)

    @property
    def children(self) -> tuple[tuple[int, ...], ...]:
        """Per node, its children sorted by branch label."""
        if self._children is None:
            buckets: list[list[int]] = [[] for _ in range(self.node_count)]
            for i, p in enumerate(self.parent):
                if p is not None and 0 <= p < self.node_count:
                    buckets[p].append(i)
            for b in buckets:
                b.sort(key=lambda c: (self.branch_label[c], c))
            self._children = tuple(tuple(b) for b in buckets)
        return self._children

    @property
    def ancestors(self) -> tuple[tuple[int, ...], ...]:
        """Per node ``i``, the tuple ``a`` with ``a[e]`` = ancestor of ``i`` at level ``e``
        (so ``a[level[i]] == i``)."""
        if self._anc is None:
            rows: list[tuple[int, ...]] = []
            for i in range(self.node_count):
                chain = [i]
                cur = i
                steps = 0
                while self.parent[cur] is not None:
                    cur = self.parent[cur]  # type: ignore[assignment]
                    chain.append(cur)
                    steps += 1
                    if steps > self.node_count:
                        raise ValueError("parent pointers contain a cycle")
                chain.reverse()
                if len(chain) != self.level[i] + 1:
                    raise ValueError(f"node {i}: stored level inconsistent with parent chain")
                rows.append(tuple(chain))
            self._anc = tuple(rows)
        return self._anc

    @property
    def levels(self) -> tuple[tuple[int, ...], ...]:
        """Per level, its nodes sorted by rank."""
        if self._levels is None:
            buckets: list[list[int]] = [[] for _ in range(self.height)]
            for i in range(self.node_count):
                if 0 <= self.level[i] < self.height:
                    buckets[self.level[i]].append(i)
            for b in buckets:
                b.sort(key=lambda s: (self.level_rank[s], s))
            self._levels = tuple(tuple(b) for b in buckets)
        return self._levels

    @property
    def root(self) -> int:
        for i, p in enumerate(self.parent):
            if p is None:
                return i
        raise ValueError("tree has no root")

    def star_key(self, s: int) -> tuple[int, int]:
        """Sort key for the star order (level, then in-level rank)."""
        return (self.level[s], self.level_rank[s])

    def star_less(self, s: int, t: int) -> bool:
        return self.star_key(s) < self.star_key(t)

    def is_ancestor(self, s: int, t: int) -> bool:
        """True iff ``s`` is a strict ancestor of ``t``."""
        return self.level[s] < self.level[t] and self.ancestors[t][self.level[s]] == s

    def child_via(self, s: int, label: int) -> int:
        """The immediate successor of ``s`` carrying the given branch label."""
        for c in self.children[s]:
            if self.branch_label[c] == label:
                return c
        raise ValueError(f"node {s} has no child with label {label}")

    def branch_toward(self, s: int, t: int) -> int:
        """The branch label of the first step on the path from ``s`` up to ``t``.

        Requires ``s`` to be a strict ancestor of ``t``.
        """
        if not self.is_ancestor(s, t):
            raise ValueError(f"node {s} is not a strict ancestor of {t}")
        step = self.ancestors[t][self.level[s] + 1]
        lab = self.branch_label[step]
        assert lab is not None
        return lab

    def in_branch_relation(self, s: int, t: int, label: int) -> bool:
        """True iff the pair (s, t) is in the labeled splitting relation for ``label``."""
        return self.is_ancestor(s, t) and self.branch_toward(s, t) == label

    def node_string(self, s: int) -> tuple[int, ...]:
        """The branch-label word spelling the path from the root to ``s``."""
        chain = self.ancestors[s]
        return tuple(self.branch_label[c] for c in chain[1:])  # type: ignore[misc]


# ---------------------------------------------------------------------------
# canonical full trees

def _level_strings(level: int, branching: int) -> list[tuple[int, ...]]:
    """All length-``level`` words over ``0..branching-1`` in lexicographic order."""
    out: list[tuple[int, ...]] = [()]
    for _ in range(level):
        out = [w + (c,) for w in out for c in range(branching)]
    return out


def lex_level_orders(height: int, branching: int) -> list[list[tuple[int, ...]]]:
    """Per-level orders listing each level's words lexicographically."""
    return [_level_strings(e, branching) for e in range(height)]


def reversed_level_orders(height: int, branching: int) -> list[list[tuple[int, ...]]]:
    """Per-level orders listing each level's words in reverse lexicographic order."""
    return [list(reversed(_level_strings(e, branching))) for e in range(height)]


def shuffled_level_orders(height: int, branching: int, seed: int) -> list[list[tuple[int, ...]]]:
    """Seeded random per-level orders; deterministic for a fixed seed."""
    rng = random.Random(seed)
    orders = []
    for e in range(height):
        words = _level_strings(e, branching)
        rng.shuffle(words)
        orders.append(words)
    return orders


def build_canonical_tree(
    height: int,
    branching: int = 2,
    level_orders: Sequence[Sequence[tuple[int, ...]]] | None = None,
) -> ExpandedTree:
    """Build the full ``branching``-ary tree of the given height.

    Nodes at level ``e`` are the length-``e`` words over ``0..branching-1``;
    the ancestor order is the strict-prefix order and the branch label of a
    node is its last symbol.  ``level_orders`` supplies, for each level, the
    full list of that level's words in the desired well-order; it defaults
    to lexicographic.  Node indices are assigned level by level in
    lexicographic word order, independently of ``level_orders``.
    """
    if height < 1:
        raise ValueError(f"height must be >= 1, got {height}")
    if branching < 2:
        raise ValueError(f"branching must be >= 2, got {branching}")
    if level_orders is None:
        level_orders = lex_level_orders(height, branching)
    if len(level_orders) != height:
        raise ValueError(f"need {height} level orders, got {len(level_orders)}")

    offsets = [0]
    for e in range(height):
        offsets.append(offsets[-1] + branching**e)
    n = offsets[-1]

    def index_of(word: tuple[int, ...]) -> int:
        pos = 0
        for c in word:
            pos = pos * branching + c
        return offsets[len(word)] + pos

    parent: list[int | None] = [None] * n
    label: list[int | None] = [None] * n
    level: list[int] = [0] * n
    rank: list[int] = [0] * n

    for e in range(height):
        expected = _level_strings(e, branching)
        given = [tuple(w) for w in level_orders[e]]
        if sorted(given) != expected:
            raise ValueError(
                f"level {e}: order is not a permutation of the {branching**e} words of length {e}"
            )
        for r, word in enumerate(given):
            i = index_of(word)
            level[i] = e
            rank[i] = r
            if word:
                parent[i] = index_of(word[:-1])
                label[i] = word[-1]

    return ExpandedTree(parent, label, level, rank, branching, height)


# ---------------------------------------------------------------------------
# axiom validation

def validate(tree: ExpandedTree, strict: bool = False) -> list[Violation]:
    """Check the expanded-tree axioms, returning one descriptor per violation.

    The finite relaxation is the default: splitting is only demanded below
    the top level, and the no-last-level axiom is skipped.  With
    ``strict=True`` both infinite-intent clauses are also reported (every
    finite tree then fails them).
    """
    out: list[Violation] = []
    n = tree.node_count
    b = tree.branching

    if n == 0:
        return [Violation("b", (), "universe is empty")]

    # (a) field shape: parent/label ranges and root-label pairing
    for i in range(n):
        p = tree.parent[i]
        lab = tree.branch_label[i]
        if p is not None and not (0 <= p < n):
            out.append(Violation("a", (i,), f"parent index {p} out of range"))
        if p is None and lab is not None:
            out.append(Violation("a", (i,), "root carries a branch label"))
        if p is not None and lab is None:
            out.append(Violation("a", (i,), "non-root node lacks a branch label"))
        if lab is not None and not (0 <= lab < b):
            out.append(Violation("a", (i,), f"branch label {lab} out of range 0..{b - 1}"))
    if out:
        return out  # shape errors make the structural checks meaningless

    roots = [i for i in range(n) if tree.parent[i] is None]
    if len(roots) != 1:
        if not roots:
            out.append(Violation("d", (), "no root: parent pointers all set (cycle)"))
        else:
            out.append(
                Violation("k", tuple(roots), "multiple roots: meets do not always exist")
            )

    # (d) tree order: acyclic parent chains, level = number of strict ancestors
    depth_ok = True
    for i in range(n):
        cur: int | None = i
        steps = 0
        while cur is not None and tree.parent[cur] is not None:
            cur = tree.parent[cur]
            steps += 1
            if steps > n:
                out.append(Violation("d", (i,), "parent chain contains a cycle"))
                depth_ok = False
                break
        else:
            if tree.level[i] != steps:
                out.append(
                    Violation(
                        "d",
                        (i,),
                        f"stored level {tree.level[i]} != ancestor count {steps}",
                    )
                )
                depth_ok = False

    # (c) ancestor order contained in star order
    for i in range(n):
        p = tree.parent[i]
        if p is not None and not tree.star_key(p) < tree.star_key(i):
            out.append(Violation("c", (p, i), "parent does not precede child in the star order"))

    # (b) per-level ranks form 0..size-1
    by_level: dict[int, list[int]] = {}
    for i in range(n):
        by_level.setdefault(tree.level[i], []).append(i)
    for e, members in sorted(by_level.items()):
        ranks = sorted(tree.level_rank[i] for i in members)
        if ranks != list(range(len(members))):
            out.append(
                Violation("b", tuple(sorted(members)), f"level {e} ranks are not 0..{len(members) - 1}")
            )

    # (f) levels form the interval 0..height-1
    present = set(by_level)
    expected = set(range(tree.height))
    if present != expected:
        out.append(
            Violation(
                "f",
                (),
                f"levels present {sorted(present)} != 0..{tree.height - 1}",
            )
        )
    if strict:
        out.append(Violation("f.gamma", (), "finite tree has a last level"))

    if not depth_ok or len(roots) != 1 or present != expected:
        return out  # descendant/child clauses would only cascade

    # (g) every node reaches every higher level; (h)/(l) splitting shape
    reach = [0] * n  # bitmask of levels with a descendant
    order = sorted(range(n), key=lambda i: -tree.level[i])
    kids: list[list[int]] = [[] for _ in range(n)]
    for i in range(n):
        p = tree.parent[i]
        if p is not None:
            kids[p].append(i)
    for i in order:
        for c in kids[i]:
            reach[i] |= reach[c] | (1 << tree.level[c])
    full = (1 << tree.height) - 1
    for i in range(n):
        want = full & ~((1 << (tree.level[i] + 1)) - 1)
        if reach[i] & want != want:
            missing = [e for e in range(tree.level[i] + 1, tree.height) if not reach[i] >> e & 1]
            out.append(Violation("g", (i,), f"no descendant at levels {missing}"))

    top = tree.height - 1
    for i in range(n):
        if tree.level[i] < top or strict:
            if len(kids[i]) != b:
                out.append(
                    Violation("h", (i,), f"{len(kids[i])} immediate successors, expected {b}")
                )
        if kids[i]:
            labels = sorted(tree.branch_label[c] for c in kids[i])
            if len(set(labels)) != len(labels):
                out.append(Violation("l", (i,), "duplicate branch labels among children"))
            elif (tree.level[i] < top or strict) and labels != list(range(b)):
                out.append(Violation("l", (i,), f"child labels {labels} != 0..{b - 1}"))

    return out


# ---------------------------------------------------------------------------
# primitive relations

def meet(tree: ExpandedTree, s: int, t: int) -> int:
    """Greatest common ancestor of ``s`` and ``t``."""
    if not (0 <= s < tree.node_count and 0 <= t < tree.node_count):
        raise ValueError(f"node index out of range: {s}, {t}")
    anc = tree.ancestors
    e = min(tree.level[s], tree.level[t])
    row_s, row_t = anc[s], anc[t]
    while row_s[e] != row_t[e]:
        e -= 1
    return row_s[e]


def restrict(tree: ExpandedTree, t: int, eps: int) -> int:
    """The ancestor of ``t`` at level ``eps`` (``t`` itself when levels agree)."""
    if not 0 <= t < tree.node_count:
        raise ValueError(f"node index out of range: {t}")
    if not 0 <= eps <= tree.level[t]:
        raise ValueError(f"level {eps} above node level {tree.level[t]}")
    return tree.ancestors[t][eps]


def lex_less(tree: ExpandedTree, s: int, t: int) -> bool:
    """In-order comparison: 0-side subtrees precede a node, higher sides follow it.

    With ``r`` the meet of ``s`` and ``t``: incomparable nodes compare by
    their branch labels at ``r``; an ancestor precedes exactly its
    descendants reached via a label >= 1.
    """
    if s == t:
        raise ValueError("lex order compares distinct nodes only")
    r = meet(tree, s, t)
    if r == s:
        return tree.branch_toward(s, t) >= 1
    if r == t:
        return tree.branch_toward(t, s) == 0
    return tree.branch_toward(r, s) < tree.branch_toward(r, t)


def is_subtree(small: ExpandedTree, big: ExpandedTree, node_map: Sequence[int] | dict[int, int]) -> bool:
    """Decide whether ``node_map`` transports ``small`` onto a substructure of ``big``.

    The image must inherit the ancestor order, meets, the labeled branch
    relations, the star order, and equality of levels.  ``node_map`` must be
    a total injective map from ``small``'s nodes; non-injective input is
    rejected with an error.
    """
    n = small.node_count
    if isinstance(node_map, dict):
        if sorted(node_map) != list(range(n)):
            raise ValueError("node map must be total on the small tree's nodes")
        img = [node_map[i] for i in range(n)]
    else:
        img = list(node_map)
        if len(img) != n:
            raise ValueError("node map must be total on the small tree's nodes")
    if len(set(img)) != n:
        raise ValueError("node map is not injective")
    if any(not 0 <= v < big.node_count for v in img):
        raise ValueError("node map image out of range")
    if small.branching != big.branching:
        return False

    for si in range(n):
        for ti in range(n):
            if si == ti:
                continue
            # (b) ancestor order restricted
            if small.is_ancestor(si, ti) != big.is_ancestor(img[si], img[ti]):
                return False
            # (e) star order restricted
            if small.star_less(si, ti) != big.star_less(img[si], img[ti]):
                return False
            # (f) equality of levels restricted
            if (small.level[si] == small.level[ti]) != (big.level[img[si]] == big.level[img[ti]]):
                return False

    # (c) meets transported
    for si in range(n):
        for ti in range(si, n):
            m_small = meet(small, si, ti)
            if meet(big, img[si], img[ti]) != img[m_small]:
                return False

    # (d) branch relations restricted
    for si in range(n):
        for ti in range(n):
            if small.is_ancestor(si, ti):
                if small.branch_toward(si, ti) != big.branch_toward(img[si], img[ti]):
                    return False
    return True


def are_neighbors(t1: ExpandedTree, t2: ExpandedTree) -> bool:
    """True iff the trees agree except possibly in their per-level well-orders."""
    return (
        t1.node_count == t2.node_count
        and t1.branching == t2.branching
        and t1.height == t2.height
        and t1.parent == t2.parent
        and t1.branch_label == t2.branch_label
        and t1.level == t2.level
    )


def is_weakly_saturated(tree: ExpandedTree, n_max: int) -> bool:
    """Check that order patterns propagate upward.

    For every non-top level ``e``, every ``n <= n_max`` and every
    star-increasing tuple of ``n`` nodes at level ``e``, some higher level
    must contain a star-increasing tuple lying nodewise above it.  Cost
    grows with ``(level size choose n_max)``; intended for desk-scale trees.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    from itertools import combinations

    for e in range(tree.height - 1):
        row = tree.levels[e]
        for size in range(1, min(n_max, len(row)) + 1):
            for combo in combinations(row, size):  # row is rank-sorted, so combos increase
                if not any(
                    _has_increasing_cover(tree, combo, z) for z in range(e + 1, tree.height)
                ):
                    return False
    return True


def _has_increasing_cover(tree: ExpandedTree, nodes: tuple[int, ...], z: int) -> bool:
    """Greedy check for a rank-increasing system above ``nodes`` at level ``z``."""
    anc = tree.ancestors
    row = tree.levels[z]
    pos = 0
    for s in nodes:
        e = tree.level[s]
        while pos < len(row) and anc[row[pos]][e] != s:
            pos += 1
        if pos == len(row):
            return False
        pos += 1
    return True


# ---------------------------------------------------------------------------
# tree file format

def store_tree(tree: ExpandedTree) -> str:
    """Canonical textual form; loading it back is field-exact."""
    lines = [
        TREE_MAGIC,
        f"height {tree.height}",
        f"branching {tree.branching}",
        f"nodes {tree.node_count}",
    ]
    for i in range(tree.node_count):
        p = "-" if tree.parent[i] is None else str(tree.parent[i])
        lab = "-" if tree.branch_label[i] is None else str(tree.branch_label[i])
        lines.append(f"node {i} {p} {lab} {tree.level[i]} {tree.level_rank[i]}")
    return "\n".join(lines) + "\n"


def load_tree(text: str) -> ExpandedTree:
    """Parse the textual tree format (comment lines starting with # are ignored)."""
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines or lines[0] != TREE_MAGIC:
        raise ValueError(f"missing header {TREE_MAGIC!r}")
    header: dict[str, int] = {}
    idx = 1
    while idx < len(lines) and not lines[idx].startswith("node "):
        key, _, val = lines[idx].partition(" ")
        header[key] = int(val)
        idx += 1
    for key in ("height", "branching", "nodes"):
        if key not in header:
            raise ValueError(f"missing header field {key!r}")
    n = header["nodes"]
    parent: list[int | None] = [None] * n
    label: list[int | None] = [None] * n
    level = [0] * n
    rank = [0] * n
    seen = [False] * n
    for ln in lines[idx:]:
        parts = ln.split()
        if parts[0] != "node" or len(parts) != 6:
            raise ValueError(f"malformed node line: {ln!r}")
        i = int(parts[1])
        if not 0 <= i < n or seen[i]:
            raise ValueError(f"bad or duplicate node index {i}")
        seen[i] = True
        parent[i] = None if parts[2] == "-" else int(parts[2])
        label[i] = None if parts[3] == "-" else int(parts[3])
        level[i] = int(parts[4])
        rank[i] = int(parts[5])
    if not all(seen):
        raise ValueError("node lines missing for some indices")
    return ExpandedTree(parent, label, level, rank, header["branching"], header["height"])


def iter_nodes_star_order(tree: ExpandedTree) -> Iterable[int]:
    """All nodes in the star order (level by level, by rank)."""
    for row in tree.levels:
        yield from row
