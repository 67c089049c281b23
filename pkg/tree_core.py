"""
Plane binary trees: representation, growth, enumeration and serialization

A tree is an index-based node store. Every node is either internal, with
exactly two children, or a leaf. The size of a tree is its number of
internal nodes, so a size-n tree has n + 1 leaves.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterator, List, Mapping, Optional, Tuple

import numpy as np

from config import Config
from errors import TreeError, TreeParseError

NONE = -1


@dataclass(frozen=True)
class Profile:
    """Internal sizes of the left and right subtrees of the root"""
    a: int
    b: int

    def as_tuple(self) -> Tuple[int, int]:
        return (self.a, self.b)


class PlaneBinaryTree:
    """Rooted plane binary tree with cached subtree sizes"""

    def __init__(self):
        self.left: List[int] = [NONE]
        self.right: List[int] = [NONE]
        self.parent: List[int] = [NONE]
        self.size: List[int] = [0]
        self.depth: List[int] = [0]
        self.root = 0
        self.path_length = 0
        self.height = 0

    # ------------------------------------------------------------------
    # basic queries

    @property
    def n_internal(self) -> int:
        return self.size[self.root]

    @property
    def n_nodes(self) -> int:
        return len(self.left)

    def is_leaf(self, v: int) -> bool:
        return self.left[v] == NONE

    def contains(self, v: int) -> bool:
        return 0 <= v < len(self.left)

    def children(self, v: int) -> Tuple[int, int]:
        return self.left[v], self.right[v]

    def preorder(self) -> Iterator[int]:
        """Node ids in preorder (root, left subtree, right subtree)"""
        stack = [self.root]
        while stack:
            v = stack.pop()
            yield v
            if self.left[v] != NONE:
                stack.append(self.right[v])
                stack.append(self.left[v])

    def leaves(self) -> List[int]:
        """Leaf ids in preorder, the canonical leaf order"""
        return [v for v in self.preorder() if self.left[v] == NONE]

    def ancestors(self, v: int) -> List[int]:
        """Path from the root down to v, both included"""
        path = []
        while v != NONE:
            path.append(v)
            v = self.parent[v]
        path.reverse()
        return path

    def copy(self) -> "PlaneBinaryTree":
        clone = PlaneBinaryTree.__new__(PlaneBinaryTree)
        clone.left = list(self.left)
        clone.right = list(self.right)
        clone.parent = list(self.parent)
        clone.size = list(self.size)
        clone.depth = list(self.depth)
        clone.root = self.root
        clone.path_length = self.path_length
        clone.height = self.height
        return clone

    # ------------------------------------------------------------------
    # structure

    def profile(self) -> Profile:
        if self.n_internal == 0:
            raise TreeError("no profile for leaf-only tree")
        return Profile(self.size[self.left[self.root]], self.size[self.right[self.root]])

    def grow(self, leaf: int) -> "PlaneBinaryTree":
        """
        Attach a cherry to a leaf, in place

        Args:
            leaf (int): Node id of a leaf of this tree

        Returns:
            PlaneBinaryTree: self, now one size larger
        """
        if not self.contains(leaf):
            raise TreeError(f"node {leaf} is not in the tree")
        if self.left[leaf] != NONE:
            raise TreeError(f"node {leaf} is not a leaf")

        depth = self.depth[leaf] + 1
        first = len(self.left)
        for _ in range(2):
            self.left.append(NONE)
            self.right.append(NONE)
            self.parent.append(leaf)
            self.size.append(0)
            self.depth.append(depth)
        self.left[leaf] = first
        self.right[leaf] = first + 1

        # only the root-to-leaf path changes size
        v = leaf
        while v != NONE:
            self.size[v] += 1
            v = self.parent[v]

        self.path_length += depth - 1
        if depth > self.height:
            self.height = depth
        return self

    def recompute_sizes(self) -> List[int]:
        """Subtree sizes recomputed from scratch, indexed by node id"""
        sizes = [0] * len(self.left)
        for v in reversed(list(self.preorder())):
            if self.left[v] != NONE:
                sizes[v] = 1 + sizes[self.left[v]] + sizes[self.right[v]]
        return sizes

    def _rebuild_caches(self) -> None:
        self.size = self.recompute_sizes()
        self.depth = [0] * len(self.left)
        self.path_length = 0
        self.height = 0
        for v in self.preorder():
            if self.left[v] != NONE:
                d = self.depth[v] + 1
                self.depth[self.left[v]] = d
                self.depth[self.right[v]] = d
                self.path_length += self.depth[v]
                self.height = max(self.height, d)

    def validate(self) -> None:
        """Raise TreeError if any structural invariant is broken"""
        n_nodes = len(self.left)
        if self.parent[self.root] != NONE:
            raise TreeError("root has a parent")
        seen = 0
        leaves = 0
        for v in self.preorder():
            seen += 1
            if seen > n_nodes:
                raise TreeError("cycle detected")
            lc, rc = self.left[v], self.right[v]
            if (lc == NONE) != (rc == NONE):
                raise TreeError(f"node {v} has exactly one child")
            if lc == NONE:
                leaves += 1
                if self.size[v] != 0:
                    raise TreeError(f"leaf {v} has nonzero size")
                continue
            if self.parent[lc] != v or self.parent[rc] != v:
                raise TreeError(f"parent links of node {v} are inconsistent")
            if self.size[v] != 1 + self.size[lc] + self.size[rc]:
                raise TreeError(f"cached size of node {v} is stale")
            if self.depth[lc] != self.depth[v] + 1 or self.depth[rc] != self.depth[v] + 1:
                raise TreeError(f"cached depth below node {v} is stale")
        if seen != n_nodes:
            raise TreeError("unreachable nodes in store")
        if leaves != self.n_internal + 1:
            raise TreeError("leaf count is not size + 1")

    # ------------------------------------------------------------------
    # serialization

    def encode(self) -> str:
        """Balanced-parenthesis word in preorder"""
        out = []
        stack: List[object] = [self.root]
        while stack:
            item = stack.pop()
            if item == ")":
                out.append(")")
                continue
            v = item
            out.append("(")
            if self.left[v] == NONE:
                out.append(")")
            else:
                stack.append(")")
                stack.append(self.right[v])
                stack.append(self.left[v])
        return "".join(out)

    @classmethod
    def decode(cls, text: str) -> "PlaneBinaryTree":
        """
        Parse a balanced-parenthesis word

        Args:
            text (str): "()" for a leaf, "(" + L + R + ")" for an internal node

        Returns:
            PlaneBinaryTree: the parsed tree, node ids in preorder

        Raises:
            TreeParseError: with the offending character position
        """
        word = text.strip()
        if not word:
            raise TreeParseError("empty word", 0)
        tree = cls.__new__(cls)
        tree.left, tree.right, tree.parent = [], [], []
        tree.root = 0
        # stack of [node id, children seen so far]
        stack: List[List[int]] = []
        done = False
        i = 0
        while i < len(word):
            ch = word[i]
            if done:
                raise TreeParseError("trailing characters", i)
            if ch == "(":
                v = len(tree.left)
                tree.left.append(NONE)
                tree.right.append(NONE)
                if stack:
                    top = stack[-1]
                    if top[1] == 2:
                        raise TreeParseError("node with more than two children", i)
                    tree.parent.append(top[0])
                    if top[1] == 0:
                        tree.left[top[0]] = v
                    else:
                        tree.right[top[0]] = v
                    top[1] += 1
                else:
                    tree.parent.append(NONE)
                stack.append([v, 0])
            elif ch == ")":
                if not stack:
                    raise TreeParseError("unbalanced ')'", i)
                v, count = stack.pop()
                if count == 1:
                    raise TreeParseError("node with exactly one child", i)
                if not stack:
                    done = True
            else:
                raise TreeParseError(f"unexpected character {ch!r}", i)
            i += 1
        if stack:
            raise TreeParseError("unbalanced '('", len(word))
        tree._rebuild_caches()
        return tree

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PlaneBinaryTree):
            return NotImplemented
        return self.n_internal == other.n_internal and self.encode() == other.encode()

    __hash__ = None

    def __repr__(self) -> str:
        if self.n_internal <= 8:
            return f"PlaneBinaryTree({self.encode()!r})"
        return f"PlaneBinaryTree(n={self.n_internal}, height={self.height})"


# ----------------------------------------------------------------------
# module-level operations


def profile(tree: PlaneBinaryTree) -> Profile:
    return tree.profile()


def grow(tree: PlaneBinaryTree, leaf: int) -> PlaneBinaryTree:
    """Grow a copy of the tree at the given leaf; the input is left untouched"""
    return tree.copy().grow(leaf)


def encode(tree: PlaneBinaryTree) -> str:
    return tree.encode()


def decode(text: str) -> PlaneBinaryTree:
    return PlaneBinaryTree.decode(text)


def single_leaf() -> PlaneBinaryTree:
    return PlaneBinaryTree()


@lru_cache(maxsize=None)
def _words(n: int) -> Tuple[str, ...]:
    if n == 0:
        return ("()",)
    words = []
    for a in range(n):
        for lw in _words(a):
            for rw in _words(n - 1 - a):
                words.append("(" + lw + rw + ")")
    return tuple(words)


def enumerate_words(n: int) -> Tuple[str, ...]:
    """Encodings of every tree of size n, grouped by increasing profile a"""
    Config.check_cap("n", n, "ENUMERATION_CAP")
    return _words(n)


def enumerate_all(n: int) -> List[PlaneBinaryTree]:
    """Every plane binary tree of size n"""
    return [PlaneBinaryTree.decode(word) for word in enumerate_words(n)]


def remy_sample(n: int, rng: np.random.Generator) -> PlaneBinaryTree:
    """
    Uniform tree of size n by Remy's insertion algorithm

    At step k the current tree has 2k + 1 nodes; one is chosen uniformly
    together with a side, and a new internal node is spliced above it with
    a fresh leaf on the chosen side.
    """
    tree = PlaneBinaryTree()
    if n == 0:
        return tree
    picks = rng.integers(0, np.arange(1, 2 * n, 2))
    sides = rng.integers(0, 2, size=n)
    left, right, parent = tree.left, tree.right, tree.parent
    root = 0
    for k in range(n):
        v = int(picks[k])
        w = len(left)
        u = w + 1
        up = parent[v]
        left.extend((NONE, NONE))
        right.extend((NONE, NONE))
        parent.extend((up, w))
        if up == NONE:
            root = w
        elif left[up] == v:
            left[up] = w
        else:
            right[up] = w
        parent[v] = w
        if sides[k] == 0:
            left[w], right[w] = v, u
        else:
            left[w], right[w] = u, v
    tree.root = root
    tree._rebuild_caches()
    return tree


def to_dot(tree: PlaneBinaryTree, masses: Optional[Mapping[int, float]] = None,
           name: str = "tree") -> str:
    """
    DOT export, one graph node per tree node

    Args:
        tree (PlaneBinaryTree): The tree
        masses (Mapping): Optional leaf id -> mass; annotated as "mass"
        name (str): Graph name

    Returns:
        str: DOT source
    """
    lines = [f"digraph {name} {{", "  node [shape=point];"]
    for v in tree.preorder():
        attrs: Dict[str, str] = {}
        if v == tree.root:
            attrs["root"] = "true"
        if tree.is_leaf(v):
            attrs["leaf"] = "true"
            if masses is not None:
                attrs["mass"] = format(float(masses[v]), ".12g")
        rendered = ", ".join(f'{key}="{value}"' for key, value in attrs.items())
        lines.append(f"  n{v} [{rendered}];" if rendered else f"  n{v};")
        if not tree.is_leaf(v):
            lines.append(f"  n{v} -> n{tree.left[v]};")
            lines.append(f"  n{v} -> n{tree.right[v]};")
    lines.append("}")
    return "\n".join(lines) + "\n"
