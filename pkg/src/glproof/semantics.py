"""Finite Kripke models for GL and the brute-force validity oracle.

The oracle enumerates rooted tree skeletons (transitive-irreflexive models
with the strict-descendant relation) in order of world count, smallest first.
Within a skeleton it computes, bottom-up and exactly, the set of reachable
truth profiles over the formula's subformula closure, so a falsifying
valuation is found (or ruled out) without scanning all valuations one by one.
Any countermodel it reports is re-verified with the plain recursive
evaluator before being returned.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Iterator, Optional

from .formula import Atom, Box, Formula, Not, Or, atoms_of, closure, conj, implies
from .sequents import GentzenSequent, LabeledSequent, LinearNestedSequent


class UnknownWorld(Exception):
    pass


class BadModel(Exception):
    pass


class Model:
    """Finite transitive irreflexive Kripke structure."""

    __slots__ = ("worlds", "rel", "valuation", "_succ")

    def __init__(self, worlds, rel, valuation):
        self.worlds = tuple(worlds)
        self.rel = frozenset(rel)
        self.valuation = {a: frozenset(ws) for a, ws in valuation.items()}
        wset = set(self.worlds)
        for x, y in self.rel:
            if x not in wset or y not in wset:
                raise BadModel(f"relation mentions unknown world {x if x not in wset else y}")
            if x == y:
                raise BadModel(f"relation is not irreflexive at {x}")
        for x, y in self.rel:
            for y2, z in self.rel:
                if y2 == y and (x, z) not in self.rel:
                    raise BadModel(f"relation is not transitive: {x}<{y}<{z}")
        for a, ws in self.valuation.items():
            if not ws <= wset:
                raise BadModel(f"valuation of {a} mentions unknown worlds")
        self._succ = {w: tuple(sorted(y for x, y in self.rel if x == w)) for w in self.worlds}

    def successors(self, w) -> tuple:
        return self._succ[w]

    def __repr__(self):
        return f"<Model worlds={self.worlds} rel={sorted(self.rel)}>"


def eval_formula(m: Model, w, f: Formula) -> bool:
    """Truth at a world per the usual clauses; box quantifies over successors."""
    if w not in m._succ:
        raise UnknownWorld(w)
    memo: dict[tuple, bool] = {}

    def go(u, g) -> bool:
        key = (u, g)
        got = memo.get(key)
        if got is not None:
            return got
        if isinstance(g, Atom):
            v = u in m.valuation.get(g.name, frozenset())
        elif isinstance(g, Not):
            v = not go(u, g.sub)
        elif isinstance(g, Or):
            v = go(u, g.left) or go(u, g.right)
        else:
            v = all(go(s, g.sub) for s in m.successors(u))
        memo[key] = v
        return v

    return go(w, f)


# ---------------------------------------------------------------------------
# Model bounds and skeleton enumeration

@dataclass(frozen=True)
class ModelBound:
    max_worlds: int
    max_depth: int
    max_branching: int

    @classmethod
    def uniform(cls, n: int) -> "ModelBound":
        return cls(n, n, n)

    def __ge__(self, other: "ModelBound") -> bool:
        return (
            self.max_worlds >= other.max_worlds
            and self.max_depth >= other.max_depth
            and self.max_branching >= other.max_branching
        )

    def __lt__(self, other: "ModelBound") -> bool:
        return not self.__ge__(other)


def default_bound(f: Formula) -> ModelBound:
    """One fresh successor per refuted boxed subformula per world gives the
    usual GL tree-model shape; the world budget keeps exhaustion tractable."""
    k = len(closure(f).boxed)
    return ModelBound(max_worlds=k + 2, max_depth=k + 1, max_branching=k + 1)


@lru_cache(maxsize=None)
def _skeletons(n: int, depth: int, branch: int) -> tuple:
    """Canonical rooted unordered trees with n nodes (nested child tuples)."""
    if depth <= 0 or n < 1:
        return ()
    if n == 1:
        return ((),)
    items = []
    for s in range(n - 1, 0, -1):
        for t in _skeletons(s, depth - 1, branch):
            items.append((s, t))
    result = []

    def extend(chosen, remaining, start, slots):
        if remaining == 0:
            result.append(tuple(t for _, t in chosen))
            return
        if slots == 0:
            return
        for i in range(start, len(items)):
            s, t = items[i]
            if s <= remaining:
                extend(chosen + [(s, t)], remaining - s, i, slots - 1)

    extend([], n - 1, 0, branch)
    return tuple(result)


def _skeleton_model(shape, atom_names, profile_assignment, atom_positions) -> tuple[Model, str]:
    """Materialize a skeleton plus per-node atom bits as a concrete model."""
    names: list[str] = []
    edges: set[tuple[str, str]] = set()
    val: dict[str, set[str]] = {a: set() for a in atom_names}

    def build(node_shape, node_bits) -> str:
        name = f"w{len(names)}"
        names.append(name)
        ab = node_bits[0]
        for a, pos in atom_positions.items():
            if (ab >> pos) & 1:
                val[a].add(name)
        for child_shape, child_bits in zip(node_shape, node_bits[1]):
            edges.add((name, build(child_shape, child_bits)))
        return name

    root = build(shape, profile_assignment)
    # transitive closure of the child edges (strict descendant)
    changed = True
    while changed:
        changed = False
        for x, y in list(edges):
            for y2, z in list(edges):
                if y2 == y and (x, z) not in edges:
                    edges.add((x, z))
                    changed = True
    return Model(names, edges, val), root


# ---------------------------------------------------------------------------
# The oracle

@dataclass
class OracleVerdict:
    valid: bool
    model: Optional[Model] = None
    world: Optional[str] = None
    bound_too_small: bool = False

    @property
    def kind(self) -> str:
        return "Valid" if self.valid else "Countermodel"


class _Profiler:
    """Bit-level truth profiles over the subformula closure of one formula."""

    def __init__(self, f: Formula):
        subs = sorted(closure(f).subformulas, key=lambda g: (g.weight, g.key))
        self.index = {g: i for i, g in enumerate(subs)}
        self.atoms = sorted({g.name for g in subs if isinstance(g, Atom)})
        self.atom_pos = {a: i for i, a in enumerate(self.atoms)}
        self.boxes = [g for g in subs if isinstance(g, Box)]
        self.box_pos = {g: i for i, g in enumerate(self.boxes)}
        self.target_bit = self.index[f]
        ops = []
        for g in subs:
            if isinstance(g, Atom):
                ops.append((0, self.atom_pos[g.name], 0))
            elif isinstance(g, Not):
                ops.append((1, self.index[g.sub], 0))
            elif isinstance(g, Or):
                ops.append((2, self.index[g.left], self.index[g.right]))
            else:
                ops.append((3, self.box_pos[g], 0))
        self.ops = ops
        # box i holds at a parent iff (sub and box) hold at every child
        self.contrib_masks = [
            (self.index[b.sub], self.index[b]) for b in self.boxes
        ]
        self._contrib_memo: dict[int, int] = {}

    def profile(self, atom_bits: int, box_bits: int) -> int:
        p = 0
        for i, (kind, a, b) in enumerate(self.ops):
            if kind == 0:
                bit = (atom_bits >> a) & 1
            elif kind == 1:
                bit = 1 - ((p >> a) & 1)
            elif kind == 2:
                bit = ((p >> a) | (p >> b)) & 1
            else:
                bit = (box_bits >> a) & 1
            p |= bit << i
        return p

    def contrib(self, profile: int) -> int:
        got = self._contrib_memo.get(profile)
        if got is not None:
            return got
        r = 0
        for i, (sub_i, box_i) in enumerate(self.contrib_masks):
            if (profile >> sub_i) & 1 and (profile >> box_i) & 1:
                r |= 1 << i
        self._contrib_memo[profile] = r
        return r


def _rebuild_bits(prof: _Profiler, shape, achmaps, chosen_profile):
    """Recover (atom_bits, children assignments) for one achieved profile."""
    ab, child_profiles = achmaps[0][chosen_profile]
    kids = [
        _rebuild_bits(prof, cshape, cach, cp)
        for cshape, cach, cp in zip(shape, achmaps[1], child_profiles)
    ]
    return (ab, tuple(kids))


def _achievable_tree(prof: _Profiler, shape):
    child_data = [_achievable_tree(prof, c) for c in shape]
    n_atoms = len(prof.atoms)
    all_boxes = (1 << len(prof.boxes)) - 1
    if not child_data:
        combos: dict[int, tuple] = {all_boxes: ()}
    else:
        combos = {}
        for p in sorted(child_data[0][0]):
            r = prof.contrib(p)
            if r not in combos:
                combos[r] = (p,)
        for cs, _ in child_data[1:]:
            nxt: dict[int, tuple] = {}
            for r in sorted(combos):
                ws = combos[r]
                for p in sorted(cs):
                    r2 = r & prof.contrib(p)
                    if r2 not in nxt:
                        nxt[r2] = ws + (p,)
            combos = nxt
    out: dict[int, tuple] = {}
    for ab in range(1 << n_atoms):
        for r in sorted(combos):
            p = prof.profile(ab, r)
            if p not in out:
                out[p] = (ab, combos[r])
    return out, child_data


def oracle_validity(f: Formula, bound: Optional[ModelBound] = None) -> OracleVerdict:
    """Brute-force decision: smallest falsifying tree model wins, else Valid.

    Soundness is unconditional (the countermodel is re-checked by
    eval_formula).  Completeness holds when the bound covers the default
    bound for f, which is validated empirically against proof search.
    """
    dflt = default_bound(f)
    if bound is None:
        bound = dflt
    prof = _Profiler(f)
    for n in range(1, bound.max_worlds + 1):
        for shape in _skeletons(n, bound.max_depth, bound.max_branching):
            ach, child_data = _achievable_tree(prof, shape)
            falsifying = [p for p in sorted(ach) if not (p >> prof.target_bit) & 1]
            if falsifying:
                chosen = falsifying[0]
                bits = _rebuild_bits(prof, shape, (ach, child_data), chosen)
                model, root = _skeleton_model(shape, prof.atoms, bits, prof.atom_pos)
                if eval_formula(model, root, f):
                    raise AssertionError("oracle self-check failed: model does not refute")
                return OracleVerdict(False, model, root)
    return OracleVerdict(True, bound_too_small=not (bound >= dflt))


# ---------------------------------------------------------------------------
# Labeled sequents and linear nested sequents, semantically

def eval_labeled_sequent(m: Model, assignment: dict[str, str], s: LabeledSequent) -> bool:
    """Satisfaction with one assignment: if all relational atoms and all
    antecedent formulas hold, some consequent formula holds."""
    for x in s.labels():
        if x not in assignment:
            raise UnknownWorld(f"assignment missing label {x}")
    for x, y in s.rel:
        if (assignment[x], assignment[y]) not in m.rel:
            return True
    for x, g in s.ante:
        if not eval_formula(m, assignment[x], g):
            return True
    return any(eval_formula(m, assignment[x], g) for x, g in s.cons)


def labeled_sequent_valid(
    s: LabeledSequent, bound: Optional[ModelBound] = None
) -> tuple[bool, Optional[tuple[Model, dict]]]:
    """Desk-scale validity of a labeled sequent: enumerate models within the
    bound and all assignments; returns a falsifying pair when one exists."""
    formulas = [g for _, g in s.ante] + [g for _, g in s.cons]
    boxed: set[Formula] = set()
    atom_names: set[str] = set()
    for g in formulas:
        cl = closure(g)
        boxed |= cl.boxed
        atom_names |= {a.name for a in cl.subformulas if isinstance(a, Atom)}
    labels = sorted(s.labels())
    k = len(boxed)
    if bound is None:
        # enough worlds to separate the labels, enough depth for the boxes
        n = min(k + len(labels) + 1, 5)
        bound = ModelBound(n, n, max(k + 1, 2))
    atoms = sorted(atom_names) or ["p0"]
    for model in enumerate_models(tuple(atoms), bound):
        for assign in product(model.worlds, repeat=len(labels)):
            assignment = dict(zip(labels, assign))
            if not eval_labeled_sequent(model, assignment, s):
                return False, (model, assignment)
    return True, None


def enumerate_models(atom_names: tuple[str, ...], bound: ModelBound) -> Iterator[Model]:
    """All tree models within the bound, explicit valuations, deterministic order."""
    a = len(atom_names)
    atom_pos = {name: i for i, name in enumerate(atom_names)}
    for n in range(1, bound.max_worlds + 1):
        for shape in _skeletons(n, bound.max_depth, bound.max_branching):
            sizes = _shape_sizes(shape)
            for bits in range(1 << (a * n)):
                assignment = _split_bits(shape, sizes, bits, a)
                model, _ = _skeleton_model(shape, atom_names, assignment, atom_pos)
                yield model


def _shape_sizes(shape) -> int:
    return 1 + sum(_shape_sizes(c) for c in shape)


def _split_bits(shape, total, bits, a):
    """Distribute a flat bitstring over the tree in preorder."""

    def take(node_shape, offset):
        ab = (bits >> (offset * a)) & ((1 << a) - 1)
        offset += 1
        kids = []
        for c in node_shape:
            kid, offset = take(c, offset)
            kids.append(kid)
        return (ab, tuple(kids)), offset

    node, _ = take(shape, 0)
    return node


# ---------------------------------------------------------------------------
# Formula interpretations of structured sequents

_TAUT = Or(Atom("p0"), Not(Atom("p0")))


def big_and(formulas) -> Formula:
    fs = list(formulas)
    if not fs:
        return _TAUT
    out = fs[-1]
    for g in reversed(fs[:-1]):
        out = conj(g, out)
    return out


def big_or(formulas) -> Formula:
    fs = list(formulas)
    if not fs:
        return Not(_TAUT)
    out = fs[-1]
    for g in reversed(fs[:-1]):
        out = Or(g, out)
    return out


def gentzen_interpretation(s: GentzenSequent) -> Formula:
    return implies(big_and(s.ante), big_or(s.cons))


def lns_interpretation(g: LinearNestedSequent) -> Formula:
    """f(Gamma |- Delta // G) = /\\Gamma -> (\\/Delta or []f(G))."""
    comp = g.components[0]
    if len(g) == 1:
        return implies(big_and(comp.ante), big_or(comp.cons))
    rest = lns_interpretation(LinearNestedSequent(g.components[1:]))
    return implies(big_and(comp.ante), Or(big_or(comp.cons), Box(rest)))


# ---------------------------------------------------------------------------
# Model text format

def parse_model(text: str) -> Model:
    """Lines: `worlds: w1 w2`, `rel: w1<w2; w2<w3`, `val p: w1 w2`.
    The transitive closure is applied on load; irreflexivity is validated."""
    worlds: list[str] = []
    rel: set[tuple[str, str]] = set()
    val: dict[str, set[str]] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("worlds:"):
            worlds.extend(line[len("worlds:"):].split())
        elif line.startswith("rel:"):
            body = line[len("rel:"):].strip()
            if body:
                for chunk in body.split(";"):
                    chunk = chunk.strip()
                    if not chunk:
                        continue
                    if "<" not in chunk:
                        raise BadModel(f"bad relational atom {chunk!r}")
                    x, y = (part.strip() for part in chunk.split("<", 1))
                    rel.add((x, y))
        elif line.startswith("val "):
            head, _, body = line[len("val "):].partition(":")
            val.setdefault(head.strip(), set()).update(body.split())
        else:
            raise BadModel(f"unrecognized model line {raw!r}")
    changed = True
    while changed:
        changed = False
        for x, y in list(rel):
            for y2, z in list(rel):
                if y2 == y and (x, z) not in rel:
                    rel.add((x, z))
                    changed = True
    return Model(worlds, rel, val)


def print_model(m: Model) -> str:
    lines = ["worlds: " + " ".join(m.worlds)]
    lines.append("rel: " + "; ".join(f"{x}<{y}" for x, y in sorted(m.rel)))
    for a in sorted(m.valuation):
        lines.append(f"val {a}: " + " ".join(sorted(m.valuation[a])))
    return "\n".join(lines) + "\n"
