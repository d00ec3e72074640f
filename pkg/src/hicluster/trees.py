"""Rooted binary cluster trees over integer vertex labels.

Nodes live in flat arrays so every traversal is an explicit loop; nothing
here recurses, which keeps caterpillar trees of a few thousand leaves safe
from the interpreter stack limit.  Leaf node ids carry vertex labels,
internal nodes have exactly two children.  Trees are immutable after
construction; derived data (leaf sets, parents, depths) is cached lazily.

The canonical text form writes each internal node as ``(L,R)`` where L is
the child subtree containing the smaller minimum leaf label, so two trees
are structurally equal exactly when their serializations match.
"""

from __future__ import annotations

import numpy as np

from .errors import FormatError, PreconditionError


class ClusterTree:
    """Binary tree with ``n`` labeled leaves and ``n - 1`` internal nodes."""

    __slots__ = ("labels", "left", "right", "root", "_cache")

    def __init__(self, labels, left, right, root: int):
        self.labels = np.asarray(labels, dtype=np.int64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.root = int(root)
        self._cache: dict = {}
        self._validate()

    # ── construction helpers ──

    @staticmethod
    def leaf(label: int) -> "ClusterTree":
        return ClusterTree([int(label)], [-1], [-1], 0)

    def _validate(self):
        m = len(self.labels)
        if not (len(self.left) == len(self.right) == m):
            raise PreconditionError("label/child arrays must have equal length")
        is_leaf = self.left < 0
        if np.any(is_leaf != (self.right < 0)):
            raise PreconditionError("node must have zero or two children")
        n = int(is_leaf.sum())
        if m != 2 * n - 1:
            raise PreconditionError(f"{n} leaves require {2 * n - 1} nodes, got {m}")
        if np.any(self.labels[is_leaf] < 0):
            raise PreconditionError("leaf labels must be nonnegative")
        labels = self.labels[is_leaf]
        if len(set(labels.tolist())) != n:
            raise PreconditionError("leaf labels must be distinct")
        # single root, acyclic: every node except root has exactly one parent
        seen = np.zeros(m, dtype=bool)
        for i in range(m):
            for c in (self.left[i], self.right[i]):
                if c < 0:
                    continue
                if c >= m or seen[c]:
                    raise PreconditionError("malformed child links")
                seen[c] = True
        if not (0 <= self.root < m) or seen[self.root]:
            raise PreconditionError("bad root")
        if seen.sum() != m - 1:
            raise PreconditionError("tree is not connected")

    # ── basic queries ──

    @property
    def num_leaves(self) -> int:
        return (len(self.labels) + 1) // 2

    def is_leaf(self, node: int) -> bool:
        return self.left[node] < 0

    def leaf_labels(self) -> np.ndarray:
        """Sorted array of all leaf labels."""
        return np.sort(self.labels[self.left < 0])

    def postorder(self) -> np.ndarray:
        """Node ids, children before parents."""
        out = self._cache.get("postorder")
        if out is None:
            order = []
            stack = [(self.root, False)]
            while stack:
                node, done = stack.pop()
                if done or self.is_leaf(node):
                    order.append(node)
                else:
                    stack.append((node, True))
                    stack.append((int(self.right[node]), False))
                    stack.append((int(self.left[node]), False))
            out = np.array(order, dtype=np.int64)
            self._cache["postorder"] = out
        return out

    def internal_ids(self) -> np.ndarray:
        return np.flatnonzero(self.left >= 0)

    def parents(self) -> np.ndarray:
        """Parent node id per node, -1 at the root."""
        par = self._cache.get("parents")
        if par is None:
            par = np.full(len(self.labels), -1, dtype=np.int64)
            for i in self.internal_ids():
                par[self.left[i]] = i
                par[self.right[i]] = i
            self._cache["parents"] = par
        return par

    def depths(self) -> np.ndarray:
        dep = self._cache.get("depths")
        if dep is None:
            dep = np.zeros(len(self.labels), dtype=np.int64)
            for node in self.postorder()[::-1]:
                if node != self.root:
                    dep[node] = dep[self.parents()[node]] + 1
            self._cache["depths"] = dep
        return dep

    def subtree_leaves(self) -> list[np.ndarray]:
        """Per node id, the sorted leaf labels of its subtree."""
        sets = self._cache.get("subtree_leaves")
        if sets is None:
            sets = [None] * len(self.labels)
            for node in self.postorder():
                if self.is_leaf(node):
                    sets[node] = np.array([self.labels[node]], dtype=np.int64)
                else:
                    merged = np.concatenate(
                        [sets[self.left[node]], sets[self.right[node]]]
                    )
                    merged.sort()
                    sets[node] = merged
            self._cache["subtree_leaves"] = sets
        return sets

    def subtree_sizes(self) -> np.ndarray:
        sizes = self._cache.get("subtree_sizes")
        if sizes is None:
            sizes = np.zeros(len(self.labels), dtype=np.int64)
            for node in self.postorder():
                if self.is_leaf(node):
                    sizes[node] = 1
                else:
                    sizes[node] = sizes[self.left[node]] + sizes[self.right[node]]
            self._cache["subtree_sizes"] = sizes
        return sizes

    def leaf_node_of(self, label: int) -> int:
        idx = self._cache.get("leaf_index")
        if idx is None:
            idx = {int(self.labels[i]): int(i) for i in np.flatnonzero(self.left < 0)}
            self._cache["leaf_index"] = idx
        try:
            return idx[int(label)]
        except KeyError:
            raise PreconditionError(f"label {label} is not a leaf of this tree") from None

    def __eq__(self, other):
        if not isinstance(other, ClusterTree):
            return NotImplemented
        return serialize_tree(self) == serialize_tree(other)

    def __hash__(self):
        return hash(serialize_tree(self))

    def __repr__(self):
        s = serialize_tree(self)
        return f"ClusterTree({s if len(s) <= 60 else s[:57] + '...'})"


def lca(t: ClusterTree, u: int, v: int) -> int:
    """Node id of the lowest common ancestor of leaves labeled u and v."""
    if u == v:
        raise PreconditionError("lca requires two distinct leaves")
    a, b = t.leaf_node_of(u), t.leaf_node_of(v)
    par, dep = t.parents(), t.depths()
    while dep[a] > dep[b]:
        a = par[a]
    while dep[b] > dep[a]:
        b = par[b]
    while a != b:
        a, b = par[a], par[b]
    return int(a)


def union_tree(t1: ClusterTree, t2: ClusterTree) -> ClusterTree:
    """New tree whose root has ``t1`` and ``t2`` as child subtrees."""
    l1 = set(t1.leaf_labels().tolist())
    l2 = set(t2.leaf_labels().tolist())
    if l1 & l2:
        raise PreconditionError(f"union_tree: overlapping leaf labels {sorted(l1 & l2)}")
    off = len(t1.labels)
    labels = np.concatenate([t1.labels, t2.labels, [-1]])
    shift = lambda arr: np.where(arr >= 0, arr + off, -1)  # noqa: E731
    left = np.concatenate([t1.left, shift(t2.left), [t1.root]])
    right = np.concatenate([t1.right, shift(t2.right), [t2.root + off]])
    return ClusterTree(labels, left, right, len(labels) - 1)


def balanced_tree(labels) -> ClusterTree:
    """Balanced binary tree over ``labels`` (split order: sorted halves)."""
    labels = sorted(int(x) for x in labels)
    if not labels:
        raise PreconditionError("balanced_tree needs at least one label")
    b = TreeBuilder()
    # bottom-up by repeated pairing keeps this iterative
    level = [b.leaf(x) for x in labels]
    while len(level) > 1:
        nxt = []
        for i in range(0, len(level) - 1, 2):
            nxt.append(b.join(level[i], level[i + 1]))
        if len(level) % 2:
            nxt[-1] = b.join(nxt[-1], level[-1])
        level = nxt
    return b.build(level[0])


class TreeBuilder:
    """Incremental construction used by the agglomerative/divisive engines."""

    def __init__(self):
        self._labels: list[int] = []
        self._left: list[int] = []
        self._right: list[int] = []

    def leaf(self, label: int) -> int:
        self._labels.append(int(label))
        self._left.append(-1)
        self._right.append(-1)
        return len(self._labels) - 1

    def join(self, a: int, b: int) -> int:
        self._labels.append(-1)
        self._left.append(a)
        self._right.append(b)
        return len(self._labels) - 1

    def build(self, root: int) -> ClusterTree:
        return ClusterTree(self._labels, self._left, self._right, root)


# ── canonical text form ─────────────────────────────────────────────────────

def serialize_tree(t: ClusterTree, node_weight: dict[int, float] | None = None) -> str:
    """Canonical serialization; with ``node_weight``, appends ``:W`` per internal node."""
    from .graphs import format_weight

    minleaf = np.zeros(len(t.labels), dtype=np.int64)
    for node in t.postorder():
        if t.is_leaf(node):
            minleaf[node] = t.labels[node]
        else:
            minleaf[node] = min(minleaf[t.left[node]], minleaf[t.right[node]])

    out: list[str] = []
    stack: list[tuple[int, int]] = [(t.root, 0)]  # (node, visit state)
    while stack:
        node, state = stack.pop()
        if t.is_leaf(node):
            out.append(str(int(t.labels[node])))
            continue
        l, r = int(t.left[node]), int(t.right[node])
        if minleaf[r] < minleaf[l]:
            l, r = r, l
        if state == 0:
            out.append("(")
            stack.append((node, 1))
            stack.append((l, 0))
        elif state == 1:
            out.append(",")
            stack.append((node, 2))
            stack.append((r, 0))
        else:
            out.append(")")
            if node_weight is not None:
                out.append(":" + format_weight(node_weight[node]))
    return "".join(out)


def _parse(text: str) -> tuple[ClusterTree, dict[int, float] | None]:
    s = text.strip()
    base = text.index(s[0]) if s else 0
    b = TreeBuilder()
    weights: dict[int, float] = {}
    saw_weight = False
    pos = 0
    m = len(s)

    def fail(msg: str, at: int):
        raise FormatError(msg, base + at)

    def parse_int(at: int) -> tuple[int, int]:
        j = at
        while j < m and s[j].isdigit():
            j += 1
        if j == at:
            fail(f"expected a leaf index, found {s[at:at+1]!r}", at)
        return int(s[at:j]), j

    def parse_weight(at: int) -> tuple[float, int]:
        j = at
        while j < m and (s[j].isdigit() or s[j] in ".eE+-"):
            # '-'/'+' only as part of an exponent or leading sign
            if s[j] in "+-" and j > at and s[j - 1] not in "eE":
                break
            j += 1
        try:
            return float(s[at:j]), j
        except ValueError:
            fail(f"bad weight {s[at:j]!r}", at)

    # explicit stack of partially parsed internal nodes: [left_child or None]
    stack: list[list[int | None]] = []
    node: int | None = None
    while True:
        if pos >= m:
            fail("unexpected end of input", pos)
        ch = s[pos]
        if ch == "(":
            stack.append([None])
            pos += 1
            continue
        if ch.isdigit():
            label, pos = parse_int(pos)
            node = b.leaf(label)
        else:
            fail(f"unexpected character {ch!r}", pos)
        # reduce: attach completed node upward as far as possible
        while True:
            if not stack:
                if pos != m:
                    fail(f"trailing characters {s[pos:pos+10]!r}", pos)
                tree = b.build(node)
                return tree, (weights if saw_weight else None)
            frame = stack[-1]
            if frame[0] is None:
                if pos >= m or s[pos] != ",":
                    fail("expected ','", pos)
                pos += 1
                frame[0] = node
                break  # go parse the right child
            if pos >= m or s[pos] != ")":
                fail("expected ')'", pos)
            pos += 1
            stack.pop()
            node = b.join(frame[0], node)
            if pos < m and s[pos] == ":":
                w, pos = parse_weight(pos + 1)
                weights[node] = w
                saw_weight = True


def parse_tree(text: str) -> ClusterTree:
    """Parse the canonical format; ``:W`` annotations are accepted and ignored."""
    return _parse(text)[0]


def parse_tree_with_weights(text: str) -> tuple[ClusterTree, dict[int, float]]:
    """Parse a tree that must carry a ``:W`` annotation on every internal node."""
    tree, weights = _parse(text)
    if weights is None or len(weights) != tree.num_leaves - 1:
        raise FormatError("every internal node needs a ':W' annotation")
    return tree, weights


def canonical(t: ClusterTree) -> ClusterTree:
    """The canonically ordered and numbered copy of ``t``."""
    return parse_tree(serialize_tree(t))
