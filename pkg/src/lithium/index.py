"""Ordered index over ground literals.

Literals are keyed by their canonical text.  Two ordered backends are
available: a top-down splay tree and a sorted array searched with bisect.
Both give logarithmic lookups.
"""

from __future__ import annotations

from bisect import bisect_left
from typing import Iterable, Iterator

from .core import EQ, Literal


class _Node:
    __slots__ = ("key", "value", "left", "right")

    def __init__(self, key, value):
        self.key = key
        self.value = value
        self.left = None
        self.right = None


class SplayTree:
    """Top-down splay tree mapping comparable keys to values."""

    def __init__(self):
        self.root: _Node | None = None
        self.size = 0
        self._header = _Node(None, None)

    def __len__(self) -> int:
        return self.size

    def _splay(self, key) -> None:
        t = self.root
        if t is None:
            return
        header = self._header
        header.left = header.right = None
        l = r = header
        while True:
            if key < t.key:
                if t.left is None:
                    break
                if key < t.left.key:
                    y = t.left  # rotate right
                    t.left = y.right
                    y.right = t
                    t = y
                    if t.left is None:
                        break
                r.left = t  # link right
                r = t
                t = t.left
            elif key > t.key:
                if t.right is None:
                    break
                if key > t.right.key:
                    y = t.right  # rotate left
                    t.right = y.left
                    y.left = t
                    t = y
                    if t.right is None:
                        break
                l.right = t  # link left
                l = t
                t = t.right
            else:
                break
        l.right = t.left
        r.left = t.right
        t.left = header.right
        t.right = header.left
        self.root = t

    def insert(self, key, value=None) -> bool:
        """Insert ``key``; returns False (and keeps the old value) if present."""
        if self.root is None:
            self.root = _Node(key, value)
            self.size = 1
            return True
        self._splay(key)
        root = self.root
        if key == root.key:
            return False
        n = _Node(key, value)
        if key < root.key:
            n.left = root.left
            n.right = root
            root.left = None
        else:
            n.right = root.right
            n.left = root
            root.right = None
        self.root = n
        self.size += 1
        return True

    def find(self, key, default=None):
        if self.root is None:
            return default
        self._splay(key)
        if self.root.key == key:
            return self.root.value
        return default

    def __contains__(self, key) -> bool:
        if self.root is None:
            return False
        self._splay(key)
        return self.root.key == key

    def remove(self, key) -> bool:
        if self.root is None:
            return False
        self._splay(key)
        root = self.root
        if root.key != key:
            return False
        if root.left is None:
            self.root = root.right
        else:
            right = root.right
            self.root = root.left
            self._splay(key)
            self.root.right = right
        self.size -= 1
        return True

    def items(self) -> Iterator:
        """In-order traversal (iterative, so deep trees are fine)."""
        stack = []
        node = self.root
        while stack or node is not None:
            while node is not None:
                stack.append(node)
                node = node.left
            node = stack.pop()
            yield node.key, node.value
            node = node.right

    def keys(self) -> Iterator:
        return (k for k, _ in self.items())


class SortedArrayMap:
    """Read-mostly ordered map: a sorted key list searched with bisect."""

    def __init__(self):
        self._keys: list = []
        self._values: list = []

    @classmethod
    def from_pairs(cls, pairs: Iterable) -> "SortedArrayMap":
        m = cls()
        seen: dict = {}
        for k, v in pairs:
            seen.setdefault(k, v)
        ks = sorted(seen)
        m._keys = ks
        m._values = [seen[k] for k in ks]
        return m

    def __len__(self) -> int:
        return len(self._keys)

    def insert(self, key, value=None) -> bool:
        i = bisect_left(self._keys, key)
        if i < len(self._keys) and self._keys[i] == key:
            return False
        self._keys.insert(i, key)
        self._values.insert(i, value)
        return True

    def find(self, key, default=None):
        i = bisect_left(self._keys, key)
        if i < len(self._keys) and self._keys[i] == key:
            return self._values[i]
        return default

    def __contains__(self, key) -> bool:
        i = bisect_left(self._keys, key)
        return i < len(self._keys) and self._keys[i] == key

    def items(self) -> Iterator:
        return zip(self._keys, self._values)

    def keys(self) -> Iterator:
        return iter(self._keys)


BACKENDS = ("splay", "sorted")


def literal_key(l: Literal) -> str:
    """Canonical text of a ground literal: sign marker then atom text."""
    return ("+" if l.positive else "-") + l.atom_text


class LiteralIndex:
    """Index of ground literals supporting membership and candidate lookup.

    Besides the ordered map on canonical text, literals are bucketed by
    (sign, predicate) and by (sign, predicate, argument position, term) so
    that a partially instantiated literal can be matched without scanning
    the whole environment.
    """

    def __init__(self, literals: Iterable[Literal] = (), backend: str = "sorted"):
        if backend not in BACKENDS:
            raise ValueError(f"unknown index backend {backend!r}")
        self.backend = backend
        lits = list(dict.fromkeys(literals))
        if backend == "splay":
            self.map = SplayTree()
            for l in lits:
                self.map.insert(literal_key(l), l)
        else:
            self.map = SortedArrayMap.from_pairs((literal_key(l), l) for l in lits)
        self.literals = lits
        self.by_pred: dict[tuple[bool, str], list[Literal]] = {}
        self.by_arg: dict[tuple, list[Literal]] = {}
        for l in lits:
            self.by_pred.setdefault((l.positive, l.pred), []).append(l)
            for i, a in enumerate(l.args):
                self.by_arg.setdefault((l.positive, l.pred, i, a), []).append(l)

    def __len__(self) -> int:
        return len(self.literals)

    def __contains__(self, l: Literal) -> bool:
        return literal_key(l) in self.map

    def candidates(self, positive: bool, pred: str, bound: dict[int, object] | None = None):
        """Ground literals with this sign and predicate agreeing on ``bound`` positions."""
        best = self.by_pred.get((positive, pred), [])
        if bound:
            for i, t in bound.items():
                lst = self.by_arg.get((positive, pred, i, t), [])
                if len(lst) < len(best):
                    best = lst
                    if not best:
                        break
        return best

    def find_clash(self) -> tuple[Literal, ...] | None:
        """A literal t != t, or a complementary pair, in document order."""
        for l in self.literals:
            if l.pred == EQ and not l.positive and l.args[0] == l.args[1]:
                return (l,)
            if l.positive and literal_key(l.negate()) in self.map:
                return (l, l.negate())
        return None
