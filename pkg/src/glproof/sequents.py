"""Sequent data shapes, proof trees, cyclic derivations, and tree queries.

Multiset sides are canonicalized as tuples sorted under the fixed formula
order, so multiset equality is plain equality.  Tree sequents reuse the
labeled-sequent representation; validity is enforced by `tree_root`, which
doubles as the tree validator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from .formula import Formula, print_formula


Label = str
Address = tuple[int, ...]


def _sorted_formulas(items: Iterable[Formula]) -> tuple[Formula, ...]:
    return tuple(sorted(items, key=lambda f: f.key))


def _sorted_labeled(items: Iterable[tuple[Label, Formula]]) -> tuple[tuple[Label, Formula], ...]:
    return tuple(sorted(items, key=lambda p: (p[0], p[1].key)))


def mset_remove(mset: tuple, item) -> tuple:
    """Remove one occurrence; raises ValueError if absent."""
    lst = list(mset)
    lst.remove(item)
    return tuple(lst)


def mset_diff(mset: tuple, items: Iterable) -> tuple:
    lst = list(mset)
    for item in items:
        lst.remove(item)
    return tuple(lst)


def mset_contains(mset: tuple, items: Iterable) -> bool:
    try:
        mset_diff(mset, items)
        return True
    except ValueError:
        return False


# ---------------------------------------------------------------------------
# Gentzen sequents

class GentzenSequent:
    __slots__ = ("ante", "cons", "_hash")

    def __init__(self, ante: Iterable[Formula] = (), cons: Iterable[Formula] = ()):
        self.ante = _sorted_formulas(ante)
        self.cons = _sorted_formulas(cons)
        self._hash = hash((self.ante, self.cons))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, GentzenSequent)
            and self.ante == other.ante
            and self.cons == other.cons
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"<{self}>"

    def __str__(self) -> str:
        left = ", ".join(print_formula(f) for f in self.ante)
        right = ", ".join(print_formula(f) for f in self.cons)
        return f"{left} |- {right}".strip()

    def with_ante(self, *add: Formula) -> "GentzenSequent":
        return GentzenSequent(self.ante + add, self.cons)

    def with_cons(self, *add: Formula) -> "GentzenSequent":
        return GentzenSequent(self.ante, self.cons + add)


# ---------------------------------------------------------------------------
# Labeled sequents (tree sequents share the representation)

class LabeledSequent:
    __slots__ = ("rel", "ante", "cons", "_hash")

    def __init__(
        self,
        rel: Iterable[tuple[Label, Label]] = (),
        ante: Iterable[tuple[Label, Formula]] = (),
        cons: Iterable[tuple[Label, Formula]] = (),
    ):
        self.rel = frozenset(rel)
        self.ante = _sorted_labeled(ante)
        self.cons = _sorted_labeled(cons)
        self._hash = hash((self.rel, self.ante, self.cons))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, LabeledSequent)
            and self.rel == other.rel
            and self.ante == other.ante
            and self.cons == other.cons
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"<{self}>"

    def __str__(self) -> str:
        parts = [f"{x}R{y}; " for x, y in sorted(self.rel)]
        left = ", ".join(f"{x}: {print_formula(f)}" for x, f in self.ante)
        right = ", ".join(f"{x}: {print_formula(f)}" for x, f in self.cons)
        return f"{''.join(parts)}{left} |- {right}".strip()

    def labels(self) -> frozenset[Label]:
        labs = {x for x, _ in self.ante} | {x for x, _ in self.cons}
        for x, y in self.rel:
            labs.add(x)
            labs.add(y)
        return frozenset(labs)

    def ante_at(self, x: Label) -> tuple[Formula, ...]:
        return tuple(f for lab, f in self.ante if lab == x)

    def cons_at(self, x: Label) -> tuple[Formula, ...]:
        return tuple(f for lab, f in self.cons if lab == x)

    def flat_at(self, x: Label) -> GentzenSequent:
        return GentzenSequent(self.ante_at(x), self.cons_at(x))

    def with_rel(self, *pairs: tuple[Label, Label]) -> "LabeledSequent":
        return LabeledSequent(self.rel | set(pairs), self.ante, self.cons)

    def with_ante(self, *add: tuple[Label, Formula]) -> "LabeledSequent":
        return LabeledSequent(self.rel, self.ante + add, self.cons)

    def with_cons(self, *add: tuple[Label, Formula]) -> "LabeledSequent":
        return LabeledSequent(self.rel, self.ante, self.cons + add)

    def substitute(self, old: Label, new: Label) -> "LabeledSequent":
        """Replace every occurrence of label `old` by `new` (the (x/y) action)."""
        if old == new:
            return self
        return self.rename({old: new})

    def rename(self, mapping: dict[Label, Label]) -> "LabeledSequent":
        """Simultaneous label renaming."""
        ren = lambda z: mapping.get(z, z)
        return LabeledSequent(
            ((ren(x), ren(y)) for x, y in self.rel),
            ((ren(x), f) for x, f in self.ante),
            ((ren(x), f) for x, f in self.cons),
        )


TreeSequent = LabeledSequent


# ---------------------------------------------------------------------------
# Linear nested sequents

class LinearNestedSequent:
    __slots__ = ("components", "_hash")

    def __init__(self, components: Iterable[GentzenSequent]):
        self.components = tuple(components)
        if not self.components:
            raise ValueError("a linear nested sequent has at least one component")
        self._hash = hash(self.components)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, LinearNestedSequent)
            and self.components == other.components
        )

    def __hash__(self) -> int:
        return self._hash

    def __len__(self) -> int:
        return len(self.components)

    def __repr__(self) -> str:
        return f"<{self}>"

    def __str__(self) -> str:
        return " // ".join(str(c) for c in self.components)

    @property
    def end(self) -> GentzenSequent:
        return self.components[-1]

    def replace_end(self, *tail: GentzenSequent) -> "LinearNestedSequent":
        return LinearNestedSequent(self.components[:-1] + tail)

    def replace_at(self, i: int, comp: GentzenSequent) -> "LinearNestedSequent":
        comps = list(self.components)
        comps[i] = comp
        return LinearNestedSequent(comps)


LNS = LinearNestedSequent

Sequent = Union[GentzenSequent, LabeledSequent, LinearNestedSequent]


# ---------------------------------------------------------------------------
# Tree structure queries

class NotATree(Exception):
    """Raised when a labeled sequent fails the tree-sequent conditions."""

    def __init__(self, diagnosis: str, detail: str = ""):
        self.diagnosis = diagnosis  # cycle | disconnected | multi-root | dangling-label
        super().__init__(f"{diagnosis}{': ' + detail if detail else ''}")


class BadPath(Exception):
    pass


def tree_root(t: LabeledSequent) -> Label:
    """Return the unique root; validates the tree-sequent conditions.

    For flat sequents (no relational atoms) the shared label is the root.
    """
    if not t.rel:
        labs = t.labels()
        if len(labs) == 1:
            return next(iter(labs))
        if not labs:
            raise NotATree("dangling-label", "empty sequent has no label")
        raise NotATree("disconnected", "flat sequent with several labels")

    tree_labs: set[Label] = set()
    for x, y in t.rel:
        tree_labs.add(x)
        tree_labs.add(y)
    formula_labs = {x for x, _ in t.ante} | {x for x, _ in t.cons}
    stray = formula_labs - tree_labs
    if stray:
        raise NotATree("dangling-label", ", ".join(sorted(stray)))

    children: dict[Label, list[Label]] = {x: [] for x in tree_labs}
    indeg = {x: 0 for x in tree_labs}
    for x, y in t.rel:
        children[x].append(y)
        indeg[y] += 1

    if any(d > 1 for d in indeg.values()) or _has_directed_cycle(children):
        raise NotATree("cycle")
    roots = [x for x, d in indeg.items() if d == 0]
    if len(roots) != 1:
        raise NotATree("multi-root", ", ".join(sorted(roots)))
    root = roots[0]
    # in-degrees <= 1 and a single root: disconnection would show as a second root
    seen = set()
    stack = [root]
    while stack:
        x = stack.pop()
        seen.add(x)
        stack.extend(children[x])
    if seen != tree_labs:
        raise NotATree("disconnected")
    return root


def _has_directed_cycle(children: dict[Label, list[Label]]) -> bool:
    state: dict[Label, int] = {}

    def visit(x: Label) -> bool:
        state[x] = 1
        for y in children[x]:
            s = state.get(y, 0)
            if s == 1 or (s == 0 and visit(y)):
                return True
        state[x] = 2
        return False

    return any(state.get(x, 0) == 0 and visit(x) for x in children)


def tree_children(t: LabeledSequent) -> dict[Label, list[Label]]:
    kids: dict[Label, list[Label]] = {x: [] for x in t.labels()}
    for x, y in t.rel:
        kids[x].append(y)
    for lst in kids.values():
        lst.sort()
    return kids


def is_leaf(t: LabeledSequent, x: Label) -> bool:
    return all(a != x for a, _ in t.rel)


def is_pre_leaf(t: LabeledSequent, x: Label) -> bool:
    return all(is_leaf(t, y) for a, y in t.rel if a == x)


def root_path(t: LabeledSequent, x: Label) -> list[Label]:
    """The unique label path from the root down to x."""
    parent = {y: a for a, y in t.rel}
    path = [x]
    while path[-1] in parent:
        path.append(parent[path[-1]])
    path.reverse()
    return path


def project_chain(t: LabeledSequent, chain: list[Label]) -> LinearNestedSequent:
    return LinearNestedSequent([t.flat_at(x) for x in chain])


def path_projection(t: LabeledSequent, path: list[Label]) -> LinearNestedSequent:
    """Project a root-to-leaf path onto a linear nested sequent."""
    root = tree_root(t)
    if not path or path[0] != root:
        raise BadPath("path must start at the root")
    for a, b in zip(path, path[1:]):
        if (a, b) not in t.rel:
            raise BadPath(f"{a} -> {b} is not a relational atom")
    if not is_leaf(t, path[-1]):
        raise BadPath(f"{path[-1]} is not a leaf")
    return project_chain(t, path)


@dataclass
class TreeView:
    label: Label
    sequent: GentzenSequent
    children: tuple["TreeView", ...]

    def node_count(self) -> int:
        return 1 + sum(c.node_count() for c in self.children)


def tree_view(t: LabeledSequent) -> TreeView:
    """The recursive picture of a tree sequent as a tree of flat sequents."""
    root = tree_root(t)
    kids = tree_children(t)

    def build(x: Label) -> TreeView:
        return TreeView(x, t.flat_at(x), tuple(build(y) for y in kids[x]))

    return build(root)


# ---------------------------------------------------------------------------
# Proofs and cyclic derivations

CALCULI = ("glseq", "k4seq", "g3gl", "g3glext", "csgl", "lngl")

OPEN = "open"  # pseudo-rule for open leaves of cyclic derivations / unfoldings


@dataclass
class Proof:
    """Finite rule-application tree; `meta` pins the instance data that makes
    premise reconstruction deterministic (principals, partitions, fresh labels)."""

    calculus: str
    rule: str
    conclusion: Sequent
    premises: tuple["Proof", ...] = ()
    meta: dict = field(default_factory=dict)

    def height(self) -> int:
        if not self.premises:
            return 0
        return 1 + max(p.height() for p in self.premises)

    def node_count(self) -> int:
        return 1 + sum(p.node_count() for p in self.premises)

    def at(self, addr: Address) -> "Proof":
        node = self
        for i in addr:
            node = node.premises[i]
        return node

    def nodes(self, prefix: Address = ()) -> Iterable[tuple[Address, "Proof"]]:
        yield prefix, self
        for i, p in enumerate(self.premises):
            yield from p.nodes(prefix + (i,))

    def replace_at(self, addr: Address, new: "Proof") -> "Proof":
        if not addr:
            return new
        i = addr[0]
        prems = list(self.premises)
        prems[i] = prems[i].replace_at(addr[1:], new)
        return Proof(self.calculus, self.rule, self.conclusion, tuple(prems), dict(self.meta))

    def retag(self, calculus: str) -> "Proof":
        return Proof(
            calculus,
            self.rule,
            self.conclusion,
            tuple(p.retag(calculus) for p in self.premises),
            dict(self.meta),
        )

    def rules_used(self) -> set[str]:
        return {r for _, node in self.nodes() for r in [node.rule]}


@dataclass
class CyclicDerivation:
    """Finite K4seq derivation with open leaves plus a back-link map from
    open-leaf addresses to ancestor addresses."""

    derivation: Proof
    backlinks: dict[Address, Address]

    def open_leaves(self) -> list[Address]:
        return [addr for addr, node in self.derivation.nodes() if node.rule == OPEN]


def format_address(addr: Address) -> str:
    return "/".join(str(i) for i in addr) if addr else "."


def parse_address(text: str) -> Address:
    text = text.strip()
    if text in (".", ""):
        return ()
    return tuple(int(part) for part in text.split("/"))


def relabel_proof(proof: Proof, mapping: dict[Label, Label]) -> Proof:
    """Apply a label renaming to every sequent and every label-valued meta entry."""

    def ren_label(z):
        return mapping.get(z, z)

    def ren_seq(s):
        if isinstance(s, LabeledSequent):
            return s.rename(mapping)
        return s

    def walk(node: Proof) -> Proof:
        meta = dict(node.meta)
        for key in ("label", "aux", "fresh", "x", "y", "z"):
            if key in meta:
                meta[key] = ren_label(meta[key])
        if "added" in meta and isinstance(meta["added"], LabeledSequent):
            meta["added"] = ren_seq(meta["added"])
        return Proof(
            node.calculus,
            node.rule,
            ren_seq(node.conclusion),
            tuple(walk(p) for p in node.premises),
            meta,
        )

    return walk(proof)


def proof_labels(proof: Proof) -> set[Label]:
    labs: set[Label] = set()
    for _, node in proof.nodes():
        if isinstance(node.conclusion, LabeledSequent):
            labs |= node.conclusion.labels()
    return labs


def fresh_label(used: set[Label], stem: str = "y") -> Label:
    i = 0
    while f"{stem}{i}" in used:
        i += 1
    return f"{stem}{i}"


def reindex_labels(proof: Proof) -> Proof:
    """Canonical breadth-first renaming of labels not pinned by the root
    conclusion; keeps conclusions byte-stable while making fresh labels
    deterministic across passes."""
    if not isinstance(proof.conclusion, LabeledSequent):
        return proof
    pinned = sorted(proof.conclusion.labels())
    order: list[Label] = list(pinned)
    seen = set(pinned)
    queue = [proof]
    while queue:
        node = queue.pop(0)
        if isinstance(node.conclusion, LabeledSequent):
            for lab in sorted(node.conclusion.labels()):
                if lab not in seen:
                    seen.add(lab)
                    order.append(lab)
        queue.extend(node.premises)
    mapping: dict[Label, Label] = {}
    counter = 0
    pinned_set = set(pinned)
    for lab in order:
        if lab in pinned_set:
            mapping[lab] = lab
            continue
        while True:
            cand = f"y{counter}"
            counter += 1
            if cand not in pinned_set:
                break
        mapping[lab] = cand
    if all(k == v for k, v in mapping.items()):
        return proof
    return relabel_proof(proof, mapping)
