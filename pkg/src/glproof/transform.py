"""Constructive proof transformations between the formalisms.

Every pass is a total function from checked proofs to checked proofs:
admissible-rule constructors (weakening, contraction, label substitution),
height-preserving rule inversion, rule permutation, end-activation,
linearization into LNGL, normalization, the translation into the Gentzen
calculus, the labeled-calculus embedding of Gentzen proofs, and the bounded
unfolder for cyclic derivations.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Optional

from .formula import Atom, Box, Formula, Not, Or
from .rules import RuleError, premises_of, LOCAL_RULES, PROPAGATION_RULES, is_initial
from .sequents import (
    OPEN,
    Address,
    CyclicDerivation,
    GentzenSequent,
    LabeledSequent,
    LinearNestedSequent,
    NotATree,
    Proof,
    fresh_label,
    is_leaf,
    mset_diff,
    mset_remove,
    project_chain,
    proof_labels,
    reindex_labels,
    relabel_proof,
    root_path,
    tree_root,
)
from .checkers import end_active_report, node_end_active, normal_form_report


class TransformError(Exception):
    pass


class NotApplicable(TransformError):
    pass


class NotPermutable(TransformError):
    pass


class ShapeViolation(TransformError):
    pass


class NotEndActive(TransformError):
    pass


class NotNormalForm(TransformError):
    pass


class InternalNonTermination(TransformError):
    pass


LABELED = ("g3gl", "g3glext", "csgl")
GENTZEN = ("glseq", "k4seq")


def _node(p: Proof, rule: str, conclusion, premises=(), **meta) -> Proof:
    return Proof(p.calculus, rule, conclusion, tuple(premises), meta)


# ---------------------------------------------------------------------------
# Generalized identity

def prove_general_id(calculus: str, goal, principal) -> Proof:
    """A proof of a sequent carrying `principal` on both sides, built by
    structural induction; id1/id2 (or Gentzen id) close the base cases."""
    if calculus in GENTZEN:
        f = principal
        if f not in goal.ante or f not in goal.cons:
            raise NotApplicable(f"{f} is not on both sides of {goal}")
        return Proof(calculus, "id", goal, (), {"principal": f})
    if calculus in LABELED:
        x, f = principal
        return _gen_id_labeled(calculus, goal, x, f)
    if calculus == "lngl":
        return _gen_id_lns(goal, principal)
    raise NotApplicable(f"unknown calculus {calculus}")


def _gen_id_labeled(calculus: str, goal: LabeledSequent, x: str, f: Formula) -> Proof:
    if (x, f) not in goal.ante or (x, f) not in goal.cons:
        raise NotApplicable(f"{x}:{f} is not on both sides of {goal}")
    meta = {"label": x, "principal": f}
    if isinstance(f, Atom):
        return Proof(calculus, "id1", goal, (), meta)
    if isinstance(f, Box):
        return Proof(calculus, "id2", goal, (), meta)
    if isinstance(f, Not):
        p1 = premises_of(calculus, "negR", meta, goal)[0]
        p2 = premises_of(calculus, "negL", meta, p1)[0]
        sub = _gen_id_labeled(calculus, p2, x, f.sub)
        inner = Proof(calculus, "negL", p1, (sub,), dict(meta))
        return Proof(calculus, "negR", goal, (inner,), dict(meta))
    p1 = premises_of(calculus, "orR", meta, goal)[0]
    pl, pr = premises_of(calculus, "orL", meta, p1)
    subl = _gen_id_labeled(calculus, pl, x, f.left)
    subr = _gen_id_labeled(calculus, pr, x, f.right)
    inner = Proof(calculus, "orL", p1, (subl, subr), dict(meta))
    return Proof(calculus, "orR", goal, (inner,), dict(meta))


def _gen_id_lns(goal: LinearNestedSequent, f: Formula) -> Proof:
    end = goal.end
    if f not in end.ante or f not in end.cons:
        raise NotApplicable(f"{f} is not on both sides of the end component")
    meta = {"principal": f}
    if isinstance(f, Atom):
        return Proof("lngl", "id1", goal, (), meta)
    if isinstance(f, Box):
        return Proof("lngl", "id2", goal, (), meta)
    if isinstance(f, Not):
        p1 = premises_of("lngl", "negR", meta, goal)[0]
        p2 = premises_of("lngl", "negL", meta, p1)[0]
        sub = _gen_id_lns(p2, f.sub)
        inner = Proof("lngl", "negL", p1, (sub,), dict(meta))
        return Proof("lngl", "negR", goal, (inner,), dict(meta))
    p1 = premises_of("lngl", "orR", meta, goal)[0]
    pl, pr = premises_of("lngl", "orL", meta, p1)
    inner = Proof(
        "lngl", "orL", p1, (_gen_id_lns(pl, f.left), _gen_id_lns(pr, f.right)), dict(meta)
    )
    return Proof("lngl", "orR", goal, (inner,), dict(meta))


# ---------------------------------------------------------------------------
# Hp-admissible weakening

def weaken(p: Proof, **adds) -> Proof:
    """Admissible weakening, dissolved into the proof (no w node appears).

    Labeled calculi:  weaken(p, added=LabeledSequent(rel', ante', cons')).
    LNGL:             weaken(p, component=i, ante=(...), cons=(...)).
    Gentzen calculi:  weaken(p, ante=(...), cons=(...)).
    """
    if p.calculus in LABELED:
        return _weaken_labeled(p, adds["added"])
    if p.calculus == "lngl":
        return _weaken_lns(p, adds.get("component", len(p.conclusion) - 1),
                           tuple(adds.get("ante", ())), tuple(adds.get("cons", ())))
    if p.calculus in GENTZEN:
        return _weaken_gentzen(p, tuple(adds.get("ante", ())), tuple(adds.get("cons", ())))
    raise NotApplicable(f"no weakening for {p.calculus}")


def _merge_labeled(s: LabeledSequent, added: LabeledSequent) -> LabeledSequent:
    return LabeledSequent(s.rel | added.rel, s.ante + added.ante, s.cons + added.cons)


def _weaken_labeled(p: Proof, added: LabeledSequent) -> Proof:
    add_labels = added.labels()
    check_tree = p.calculus == "csgl"

    def go(node: Proof) -> Proof:
        if node.rule == "boxR" and node.meta["fresh"] in add_labels:
            used = proof_labels(node) | add_labels
            z = fresh_label(used)
            meta = dict(node.meta)
            y = meta["fresh"]
            meta["fresh"] = z
            node = Proof(
                node.calculus, node.rule, node.conclusion,
                (relabel_proof(node.premises[0], {y: z}),), meta,
            )
        new_concl = _merge_labeled(node.conclusion, added)
        if check_tree:
            try:
                tree_root(new_concl)
            except NotATree as e:
                raise ShapeViolation(f"weakening breaks the tree shape: {e}") from e
        return Proof(
            node.calculus, node.rule, new_concl,
            tuple(go(q) for q in node.premises), dict(node.meta),
        )

    return go(p)


def _weaken_lns(p: Proof, i: int, add_a, add_c) -> Proof:
    if not add_a and not add_c:
        return p

    def go(node: Proof) -> Proof:
        c = node.conclusion
        comp = c.components[i]
        new_concl = c.replace_at(i, GentzenSequent(comp.ante + add_a, comp.cons + add_c))
        return Proof(
            node.calculus, node.rule, new_concl,
            tuple(go(q) for q in node.premises), dict(node.meta),
        )

    return go(p)


def _weaken_gentzen(p: Proof, add_a, add_c) -> Proof:
    if not add_a and not add_c:
        return p
    new_concl = GentzenSequent(p.conclusion.ante + add_a, p.conclusion.cons + add_c)
    if p.rule in ("id", "boxGL", "box4"):
        # contexts absorb the additions; the subtree is untouched
        return Proof(p.calculus, p.rule, new_concl, p.premises, dict(p.meta))
    return Proof(
        p.calculus, p.rule, new_concl,
        tuple(_weaken_gentzen(q, add_a, add_c) for q in p.premises), dict(p.meta),
    )


# ---------------------------------------------------------------------------
# Hp-admissible label substitution ((x/y): replace y by x)

def substitute_labels(p: Proof, x: str, y: str) -> Proof:
    if x == y:
        return p
    if p.calculus not in LABELED:
        raise NotApplicable("label substitution needs a labeled calculus")

    def clear_fresh(node: Proof) -> Proof:
        new_prems = tuple(clear_fresh(q) for q in node.premises)
        if node.rule == "boxR" and node.meta["fresh"] in (x, y):
            used = proof_labels(node) | {x, y}
            z = fresh_label(used)
            meta = dict(node.meta)
            old = meta["fresh"]
            meta["fresh"] = z
            return Proof(
                node.calculus, node.rule, node.conclusion,
                (relabel_proof(new_prems[0], {old: z}),), meta,
            )
        return Proof(node.calculus, node.rule, node.conclusion, new_prems, dict(node.meta))

    renamed = relabel_proof(clear_fresh(p), {y: x})
    if p.calculus == "csgl":
        for _, node in renamed.nodes():
            try:
                tree_root(node.conclusion)
            except NotATree as e:
                raise ShapeViolation(f"substitution breaks the tree shape: {e}") from e
    return renamed


# ---------------------------------------------------------------------------
# Hp-admissible contraction

def _contract(p: Proof, side: str, item) -> Proof:
    """Proof of p's conclusion with one occurrence of `item` removed from
    `side`; standard induction using inversion on the remaining copy."""
    c = p.conclusion
    calculus = p.calculus
    labeled = calculus in LABELED
    f = item[1] if labeled else item

    def remove(seq, which):
        if labeled:
            if which == "ante":
                return LabeledSequent(seq.rel, mset_remove(seq.ante, item), seq.cons)
            return LabeledSequent(seq.rel, seq.ante, mset_remove(seq.cons, item))
        if which == "ante":
            return GentzenSequent(mset_remove(seq.ante, item), seq.cons)
        return GentzenSequent(seq.ante, mset_remove(seq.cons, item))

    target = remove(c, side)

    if not p.premises:
        return Proof(calculus, p.rule, target, (), dict(p.meta))

    principal = p.meta.get("principal")
    plabel = p.meta.get("label")
    same = principal is not None and (
        (labeled and (plabel, principal) == item) or (not labeled and principal == item)
    )
    consuming = {
        "negL": "ante", "orL": "ante", "negR": "cons", "orR": "cons",
    }
    if same and p.rule in consuming and consuming[p.rule] == side:
        meta = {"label": plabel, "principal": f} if labeled else {"principal": f}
        if p.rule == "negL":
            inv = apply_inverse("negL", 0, p.premises[0], meta)
            sub = _contract(inv, "cons", (plabel, f.sub) if labeled else f.sub)
            return Proof(calculus, "negL", target, (sub,), dict(p.meta))
        if p.rule == "negR":
            inv = apply_inverse("negR", 0, p.premises[0], meta)
            sub = _contract(inv, "ante", (plabel, f.sub) if labeled else f.sub)
            return Proof(calculus, "negR", target, (sub,), dict(p.meta))
        if p.rule == "orL":
            invl = apply_inverse("orL", 0, p.premises[0], meta)
            subl = _contract(invl, "ante", (plabel, f.left) if labeled else f.left)
            invr = apply_inverse("orL", 1, p.premises[1], meta)
            subr = _contract(invr, "ante", (plabel, f.right) if labeled else f.right)
            return Proof(calculus, "orL", target, (subl, subr), dict(p.meta))
        inv = apply_inverse("orR", 0, p.premises[0], meta)
        sub = _contract(inv, "cons", (plabel, f.left) if labeled else f.left)
        sub = _contract(sub, "cons", (plabel, f.right) if labeled else f.right)
        return Proof(calculus, "orR", target, (sub,), dict(p.meta))

    if labeled and p.rule == "boxR" and side == "cons" and same:
        # remaining copy of x:[]f in the premise; invert it at a new label,
        # merge the two fresh labels, contract, then reapply boxR
        x = plabel
        phi = p.meta["phi"]
        y = p.meta["fresh"]
        pi1 = p.premises[0]
        z = fresh_label(proof_labels(p) | {x, y})
        pi2 = apply_inverse("boxR", 0, pi1, {"label": x, "fresh": z, "phi": phi})
        pi3 = substitute_labels(pi2, y, z)
        pi4 = _contract(pi3, "ante", (y, Box(phi)))
        pi5 = _contract(pi4, "cons", (y, phi))
        return Proof(calculus, "boxR", target, (pi5,), dict(p.meta))

    if calculus in GENTZEN and p.rule in ("boxGL", "box4"):
        gamma = tuple(p.meta["gamma"])
        if side == "ante" and isinstance(f, Box) and f.sub in gamma:
            boxes = Counter(Box(g) for g in gamma)
            if boxes[f] > Counter(target.ante)[f]:
                # both copies sat inside the box partition: contract the premise
                sub = _contract(p.premises[0], "ante", f)
                sub = _contract(sub, "ante", f.sub)
                gamma2 = mset_remove(gamma, f.sub)
                prem = premises_of(calculus, p.rule, {"gamma": gamma2, "phi": p.meta["phi"]}, target)[0]
                if sub.conclusion != prem:
                    raise NotApplicable("contraction failed to align the modal premise")
                return Proof(calculus, p.rule, target, (sub,), {"gamma": gamma2, "phi": p.meta["phi"]})
        # the copy lives in the absorbed context
        return Proof(calculus, p.rule, target, p.premises, dict(p.meta))

    # context case: the contracted pair rides through every premise
    try:
        new_targets = premises_of(calculus, p.rule, p.meta, target)
    except RuleError as e:
        raise NotApplicable(f"contraction stuck at {p.rule}: {e}") from e
    subs = []
    for q, tgt in zip(p.premises, new_targets):
        sub = _contract(q, side, item)
        if sub.conclusion != tgt:
            raise NotApplicable("contraction misaligned a premise")
        subs.append(sub)
    return Proof(calculus, p.rule, target, tuple(subs), dict(p.meta))


def admit(rule: str, p: Proof, **instance) -> Proof:
    """Realize an admitted structural rule as a real proof of its conclusion.

    rule 'w':   instance as in `weaken`.
    rule 'cL':  instance principal=f (Gentzen) or label=x, principal=f.
    rule 'cR':  likewise.
    rule 'sub': instance x=..., y=... (replace y by x).
    Height never increases.
    """
    if rule == "w":
        return weaken(p, **instance)
    if rule in ("cL", "cR"):
        if p.calculus == "lngl":
            raise NotApplicable("contraction is not among the admitted LNGL rules")
        side = "ante" if rule == "cL" else "cons"
        if p.calculus in LABELED:
            item = (instance["label"], instance["principal"])
        else:
            item = instance["principal"]
        return _contract(p, side, item)
    if rule == "sub":
        return substitute_labels(p, instance["x"], instance["y"])
    raise NotApplicable(f"admit does not handle rule {rule}")


# ---------------------------------------------------------------------------
# Hp-invertibility

_W_BACKED = {"4L", "boxL", "tr"}


def apply_inverse(rule: str, i: int, p: Proof, meta: dict) -> Proof:
    """A proof of the i-th premise of the given rule instance, whose
    conclusion is p's conclusion."""
    calculus = p.calculus
    if calculus in GENTZEN and rule in ("boxGL", "box4"):
        raise NotApplicable(f"{rule} is not invertible")
    if calculus == "lngl" and rule == "boxR":
        raise NotApplicable("boxR is not invertible in LNGL")
    try:
        target = premises_of(calculus, rule, meta, p.conclusion)[i]
    except RuleError as e:
        raise NotApplicable(str(e)) from e

    if rule in _W_BACKED:
        if calculus == "lngl":
            add = mset_diff(target.end.ante, p.conclusion.end.ante)
            return weaken(p, component=len(p.conclusion) - 1, ante=add)
        added = LabeledSequent(
            target.rel - p.conclusion.rel,
            mset_diff(target.ante, p.conclusion.ante),
            mset_diff(target.cons, p.conclusion.cons),
        )
        return weaken(p, added=added)

    if rule in LOCAL_RULES:
        return _invert_local(rule, i, p, meta, target)
    if rule == "boxR" and calculus in LABELED:
        return _invert_boxr(p, meta, target)
    raise NotApplicable(f"no inversion for {rule} in {calculus}")


def _same_instance(p: Proof, rule: str, meta: dict) -> bool:
    if p.rule != rule:
        return False
    keys = ("principal", "label") if "label" in meta else ("principal",)
    return all(p.meta.get(k) == meta.get(k) for k in keys)


def _invert_local(rule: str, i: int, p: Proof, meta: dict, target) -> Proof:
    calculus = p.calculus
    if not p.premises:
        # initial rules survive unless the witness was the inverted principal
        witness_meta = dict(p.meta)
        try:
            premises_of(calculus, p.rule, witness_meta, target)
            return Proof(calculus, p.rule, target, (), witness_meta)
        except RuleError:
            pass
        if calculus in GENTZEN and p.rule == "id":
            # general id destroyed: rebuild around the decomposed witness
            w = p.meta.get("principal") or next(iter(set(p.conclusion.ante) & set(p.conclusion.cons)))
            return _rebuild_gentzen_id(calculus, target, w)
        raise NotApplicable("inversion destroyed an initial sequent")
    if _same_instance(p, rule, meta):
        return p.premises[i]
    try:
        new_targets = premises_of(calculus, p.rule, p.meta, target)
    except RuleError as e:
        raise NotApplicable(f"inversion stuck below {p.rule}: {e}") from e
    subs = []
    for q, tgt in zip(p.premises, new_targets):
        sub = _invert_local(rule, i, q, meta,
                            premises_of(q.calculus, rule, meta, q.conclusion)[i])
        if sub.conclusion != tgt:
            raise NotApplicable("inversion misaligned a premise")
        subs.append(sub)
    return Proof(calculus, p.rule, target, tuple(subs), dict(p.meta))


def _rebuild_gentzen_id(calculus: str, target: GentzenSequent, w: Formula) -> Proof:
    shared = set(target.ante) & set(target.cons)
    if shared:
        return Proof(calculus, "id", target, (), {"principal": min(shared, key=lambda g: g.key)})
    # the witness was decomposed on one side; re-decompose the surviving copy
    if isinstance(w, Not) and w in target.cons and w.sub in target.cons:
        prem = premises_of(calculus, "negR", {"principal": w}, target)[0]
        return Proof(calculus, "negR", target,
                     (prove_general_id(calculus, prem, w.sub),), {"principal": w})
    if isinstance(w, Not) and w in target.ante and w.sub in target.ante:
        prem = premises_of(calculus, "negL", {"principal": w}, target)[0]
        return Proof(calculus, "negL", target,
                     (prove_general_id(calculus, prem, w.sub),), {"principal": w})
    if isinstance(w, Or) and w in target.cons:
        prem = premises_of(calculus, "orR", {"principal": w}, target)[0]
        side = w.left if w.left in prem.ante else w.right
        return Proof(calculus, "orR", target,
                     (prove_general_id(calculus, prem, side),), {"principal": w})
    if isinstance(w, Or) and w in target.ante:
        pl, pr = premises_of(calculus, "orL", {"principal": w}, target)
        return Proof(calculus, "orL", target,
                     (prove_general_id(calculus, pl, w.left),
                      prove_general_id(calculus, pr, w.right)), {"principal": w})
    raise NotApplicable("cannot rebuild the initial sequent after inversion")


def _invert_boxr(p: Proof, meta: dict, target: LabeledSequent) -> Proof:
    calculus = p.calculus
    x, y, phi = meta["label"], meta["fresh"], meta["phi"]
    if not p.premises:
        try:
            premises_of(calculus, p.rule, p.meta, target)
            return Proof(calculus, p.rule, target, (), dict(p.meta))
        except RuleError:
            pass
        # id2 on x:[]phi: the consequent copy is gone; use boxL + general id
        prem = target.with_ante((y, phi))
        sub = _gen_id_labeled(calculus, prem, y, phi)
        return Proof(calculus, "boxL", target, (sub,),
                     {"label": x, "aux": y, "phi": phi})
    if p.rule == "boxR" and p.meta.get("label") == x and p.meta.get("phi") == phi:
        old = p.meta["fresh"]
        if old == y:
            return p.premises[0]
        return relabel_proof(p.premises[0], {old: y})
    try:
        new_targets = premises_of(calculus, p.rule, p.meta, target)
    except RuleError as e:
        raise NotApplicable(f"boxR inversion stuck below {p.rule}: {e}") from e
    subs = []
    for q, tgt in zip(p.premises, new_targets):
        sub = _invert_boxr(q, meta, premises_of(calculus, "boxR", meta, q.conclusion)[0])
        if sub.conclusion != tgt:
            raise NotApplicable("boxR inversion misaligned a premise")
        subs.append(sub)
    return Proof(calculus, p.rule, target, tuple(subs), dict(p.meta))


# ---------------------------------------------------------------------------
# Rule permutation

def _exchange(proof: Proof, addr: Address) -> Proof:
    """Permute the rule at `addr` below its parent, per the four permutation
    shapes (inverses patch the sibling premises of a binary parent)."""
    if not addr:
        raise NotPermutable("the root has nothing below it")
    parent = proof.at(addr[:-1])
    child = proof.at(addr)
    j = addr[-1]
    calculus = parent.calculus
    r, mr = child.rule, child.meta
    rp, mrp = parent.rule, parent.meta
    final = parent.conclusion
    try:
        low_targets = premises_of(calculus, r, mr, final)
    except RuleError as e:
        raise NotPermutable(f"{r} does not apply at the lower sequent: {e}") from e
    new_uppers = []
    for i, tgt in enumerate(low_targets):
        try:
            upper_targets = premises_of(calculus, rp, mrp, tgt)
        except RuleError as e:
            raise NotPermutable(f"{rp} does not apply above: {e}") from e
        prems = []
        for k, tgt2 in enumerate(upper_targets):
            if k == j:
                sub = child.premises[i]
            else:
                sub = apply_inverse(r, i, parent.premises[k], dict(mr))
            if sub.conclusion != tgt2:
                raise NotPermutable("permutation shapes do not align")
            prems.append(sub)
        new_uppers.append(Proof(calculus, rp, tgt, tuple(prems), dict(mrp)))
    new_node = Proof(calculus, r, final, tuple(new_uppers), dict(mr))
    return proof.replace_at(addr[:-1], new_node)


def permute_down(p: Proof, addr: Address) -> Proof:
    """Permute a non-end-active local or propagation rule below the end-active
    rule immediately under it (CSGL)."""
    if p.calculus != "csgl":
        raise NotPermutable("permute_down operates on CSGL proofs")
    node = p.at(addr)
    if node.rule not in LOCAL_RULES and node.rule not in PROPAGATION_RULES:
        raise NotPermutable(f"{node.rule} is not a local or propagation rule")
    if node_end_active(node):
        raise NotPermutable("the rule is already end-active")
    if not addr:
        raise NotPermutable("the root has nothing below it")
    parent = p.at(addr[:-1])
    if is_initial(parent.rule):
        raise NotPermutable("the rule below is initial")
    if not node_end_active(parent):
        raise NotPermutable("the rule below is not end-active")
    return _exchange(p, addr)


# ---------------------------------------------------------------------------
# End-activation

def _strengthen(p: Proof, item) -> Optional[Proof]:
    """Drop an antecedent labeled formula nowhere used in the subproof;
    returns None when the formula is a witness or principal somewhere."""
    c = p.conclusion
    if item not in c.ante:
        return None
    target = LabeledSequent(c.rel, mset_remove(c.ante, item), c.cons)
    used = (p.meta.get("label"), p.meta.get("principal")) == item or (
        p.rule in PROPAGATION_RULES
        and (p.meta.get("label"), Box(p.meta.get("phi"))) == item
    )
    if used:
        return None
    if not p.premises:
        try:
            premises_of(p.calculus, p.rule, p.meta, target)
        except RuleError:
            return None
        return Proof(p.calculus, p.rule, target, (), dict(p.meta))
    try:
        new_targets = premises_of(p.calculus, p.rule, p.meta, target)
    except RuleError:
        return None
    subs = []
    for q, tgt in zip(p.premises, new_targets):
        sub = _strengthen(q, item)
        if sub is None or sub.conclusion != tgt:
            return None
        subs.append(sub)
    return Proof(p.calculus, p.rule, target, tuple(subs), dict(p.meta))


def to_end_active(p: Proof, stats: Optional[dict] = None) -> Proof:
    """Restructure a CSGL proof of |- x: f so that every rule application is
    end-active: bottom-most offenders are permuted downward, non-end-active
    initial rules are pushed down over the rules below them."""
    c = p.conclusion
    if c.rel or c.ante or len(c.cons) != 1:
        raise NotEndActive("end-activation needs a conclusion of the form |- x: f")
    proof = p
    budget = p.node_count() ** 2 * 4 + 64
    permutations = 0
    while True:
        offender = None
        for addr, node in sorted(proof.nodes(), key=lambda kv: (len(kv[0]), kv[0])):
            if not node_end_active(node):
                offender = (addr, node)
                break
        if offender is None:
            break
        budget -= 1
        if budget < 0:
            raise InternalNonTermination("end-activation exceeded its permutation budget")
        addr, node = offender
        if is_initial(node.rule):
            # push the initial rule down over the rule below it
            parent_addr = addr[:-1]
            parent = proof.at(parent_addr)
            try:
                premises_of(proof.calculus, node.rule, node.meta, parent.conclusion)
            except RuleError as e:
                raise InternalNonTermination(f"cannot push {node.rule} down: {e}") from e
            pushed = Proof(proof.calculus, node.rule, parent.conclusion, (), dict(node.meta))
            proof = proof.replace_at(parent_addr, pushed)
            permutations += 1
            continue
        try:
            proof = permute_down(proof, addr)
            permutations += 1
        except NotPermutable:
            # propagation whose auxiliary is the fresh label of the boxR right
            # below it cannot cross that boxR; drop it if its product is unused
            if node.rule in PROPAGATION_RULES:
                phi = node.meta["phi"]
                added = (node.meta["aux"], Box(phi) if node.rule == "4L" else phi)
                slim = _strengthen(node.premises[0], added)
                if slim is not None:
                    proof = proof.replace_at(addr, slim)
                    permutations += 1
                    continue
            raise InternalNonTermination(
                f"no permutation available for {node.rule} at {addr}"
            )
    report = end_active_report(proof)
    if not report.accepted:
        raise InternalNonTermination("end-activation missed an offender")
    if stats is not None:
        stats["permutations"] = permutations
    return proof


# ---------------------------------------------------------------------------
# Linearization into LNGL

def linearize(p: Proof, stats: Optional[dict] = None) -> Proof:
    """Shed the tree structure of an end-active CSGL proof, keeping one
    root-to-leaf path per branch; output is an LNGL proof of the projection."""
    if not end_active_report(p).accepted:
        raise NotEndActive("linearization needs an end-active proof")

    def lin(node: Proof):
        c = node.conclusion
        rule = node.rule
        if rule in ("id1", "id2"):
            chain = root_path(c, node.meta["label"])
            return chain, Proof("lngl", rule, project_chain(c, chain), (),
                                {"principal": node.meta["principal"]})
        if rule in ("negL", "negR", "orR"):
            chain, lp = lin(node.premises[0])
            if chain[-1] != node.meta["label"]:
                return chain, lp
            concl = project_chain(c, chain)
            return chain, Proof("lngl", rule, concl, (lp,),
                                {"principal": node.meta["principal"]})
        if rule == "orL":
            chain_l, lp_l = lin(node.premises[0])
            if chain_l[-1] != node.meta["label"]:
                return chain_l, lp_l
            chain_r, lp_r = lin(node.premises[1])
            if chain_r[-1] != node.meta["label"]:
                return chain_r, lp_r
            concl = project_chain(c, chain_l)
            return chain_l, Proof("lngl", "orL", concl, (lp_l, lp_r),
                                  {"principal": node.meta["principal"]})
        if rule in ("4L", "boxL"):
            chain, lp = lin(node.premises[0])
            if chain[-1] != node.meta["aux"]:
                return chain, lp
            concl = project_chain(c, chain)
            return chain, Proof("lngl", rule, concl, (lp,), {"phi": node.meta["phi"]})
        if rule == "boxR":
            x, y, phi = node.meta["label"], node.meta["fresh"], node.meta["phi"]
            chain, lp = lin(node.premises[0])
            if chain[-1] == y:
                new_chain = chain[:-1]
                concl = project_chain(c, new_chain)
                return new_chain, Proof("lngl", "boxR", concl, (lp,), {"phi": phi})
            if x in chain:
                i = chain.index(x)
                lp2 = weaken(lp, component=i, cons=(Box(phi),))
                return chain, lp2
            return chain, lp
        raise NotApplicable(f"linearization does not handle rule {rule}")

    chain, out = lin(p)
    if stats is not None:
        stats["path"] = list(chain)
    return out


# ---------------------------------------------------------------------------
# Normalization of LNGL proofs

def _segment_nodes(proof: Proof, boxr_addr: Address):
    """Addresses of the local/propagation nodes above a boxR, up to the next
    boxR or initial rule (the length-consistent stage)."""
    out = []

    def walk(addr):
        node = proof.at(addr)
        if node.rule == "boxR" or is_initial(node.rule):
            return
        out.append(addr)
        for i in range(len(node.premises)):
            walk(addr + (i,))

    walk(boxr_addr + (0,))
    return out


def normalize_lngl(p: Proof, stats: Optional[dict] = None) -> Proof:
    """Permute length-consistent 4L rules down into a block above each boxR,
    then the boxL rules down above that block; the complete-block shape."""
    proof = p
    budget = p.node_count() ** 2 * 8 + 64
    permutations = 0
    while True:
        move = None
        for addr, node in proof.nodes():
            if node.rule != "boxR":
                continue
            segment = _segment_nodes(proof, addr)
            # the settled 4L block directly above the boxR, then its boxL block
            block = addr + (0,)
            while proof.at(block).rule == "4L":
                block = block + (0,)
            boxl_top = block
            while proof.at(boxl_top).rule == "boxL":
                boxl_top = boxl_top + (0,)
            movers = [
                a for a in segment
                if proof.at(a).rule == "4L" and not (len(a) <= len(block) and a == block[: len(a)])
            ]
            if not movers:
                movers = [
                    a for a in segment
                    if proof.at(a).rule == "boxL"
                    and not (len(a) <= len(boxl_top) and a == boxl_top[: len(a)])
                ]
            if movers:
                move = min(movers, key=lambda a: (len(a), a))
                break
        if move is None:
            break
        budget -= 1
        if budget < 0:
            raise InternalNonTermination("normalization exceeded its permutation budget")
        proof = _exchange(proof, move)
        permutations += 1
    report = normal_form_report(proof)
    if not report.accepted:
        raise InternalNonTermination("normalization missed a block violation")
    if stats is not None:
        stats["permutations"] = permutations
    return proof


# ---------------------------------------------------------------------------
# LNGL (normal form) to GLseq

def _counter_to_sorted(c: Counter):
    out = []
    for g in sorted(c, key=lambda g: g.key):
        out.extend([g] * c[g])
    return tuple(out)


def lngl_to_glseq(p: Proof) -> Proof:
    """Translate a normal-form LNGL proof componentwise: local steps map to
    their end components, each modal block maps to weakening then boxGL."""
    if not normal_form_report(p).accepted:
        raise NotNormalForm("the proof is not in normal form")

    def trans(node: Proof) -> Proof:
        rule = node.rule
        end = node.conclusion.end
        if rule in ("id1", "id2"):
            return Proof("glseq", "id", end, (), {"principal": node.meta["principal"]})
        if rule in LOCAL_RULES:
            return Proof("glseq", rule, end,
                         tuple(trans(q) for q in node.premises),
                         {"principal": node.meta["principal"]})
        if rule == "boxR":
            phi = node.meta["phi"]
            cur = node.premises[0]
            from_4l: list[Formula] = []
            while cur.rule == "4L":
                from_4l.append(cur.meta["phi"])
                cur = cur.premises[0]
            from_boxl: list[Formula] = []
            while cur.rule == "boxL":
                from_boxl.append(cur.meta["phi"])
                cur = cur.premises[0]
            sub = trans(cur)
            a, b = Counter(from_4l), Counter(from_boxl)
            avail = Counter(g.sub for g in end.ante if isinstance(g, Box))
            # clip multiplicities to what the conclusion can supply
            sub2 = sub
            for g in sorted(set(a) | set(b), key=lambda g: g.key):
                for _ in range(a[g] - min(a[g], avail[g])):
                    sub2 = _contract(sub2, "ante", Box(g))
                for _ in range(b[g] - min(b[g], avail[g])):
                    sub2 = _contract(sub2, "ante", g)
                a[g] = min(a[g], avail[g])
                b[g] = min(b[g], avail[g])
            gamma = Counter({g: max(a[g], b[g]) for g in set(a) | set(b)})
            gamma_t = _counter_to_sorted(gamma)
            target = premises_of("glseq", "boxGL", {"gamma": gamma_t, "phi": phi}, end)[0]
            add_a = mset_diff(target.ante, sub2.conclusion.ante)
            add_c = mset_diff(target.cons, sub2.conclusion.cons)
            sub3 = weaken(sub2, ante=add_a, cons=add_c)
            return Proof("glseq", "boxGL", end, (sub3,), {"gamma": gamma_t, "phi": phi})
        raise NotNormalForm(f"unexpected {rule} outside a modal block")

    return trans(p)


# ---------------------------------------------------------------------------
# GLseq to G3GL (extended)

def glseq_to_g3gl(p: Proof, label: str = "x") -> Proof:
    """Label a Gentzen proof: Gamma |- Delta becomes x:Gamma |- x:Delta.
    Each boxGL becomes the seven-step template (w; boxL block; 4L block;
    boxR; (x/y); w) over the extended labeled calculus."""
    counter = [0]

    def fresh() -> str:
        counter[0] += 1
        return f"u{counter[0]}"

    def lab_seq(s: GentzenSequent, lab: str) -> LabeledSequent:
        return LabeledSequent((), tuple((lab, g) for g in s.ante),
                              tuple((lab, g) for g in s.cons))

    def trans(node: Proof, lab: str) -> Proof:
        goal = lab_seq(node.conclusion, lab)
        if node.rule == "id":
            w = node.meta.get("principal")
            if w is None:
                w = min(set(node.conclusion.ante) & set(node.conclusion.cons),
                        key=lambda g: g.key)
            return prove_general_id("g3glext", goal, (lab, w))
        if node.rule in LOCAL_RULES:
            return Proof("g3glext", node.rule, goal,
                         tuple(trans(q, lab) for q in node.premises),
                         {"label": lab, "principal": node.meta["principal"]})
        if node.rule == "boxGL":
            gamma = tuple(node.meta["gamma"])
            phi = node.meta["phi"]
            u = fresh()
            y = fresh()
            sub = relabel_proof(trans(node.premises[0], lab), {lab: u})
            added = LabeledSequent(((y, u),), tuple((y, Box(g)) for g in gamma), ())
            w1_concl = _merge_labeled(sub.conclusion, added)
            cur = Proof("g3glext", "w", w1_concl, (sub,), {"added": added})
            for g in gamma:
                concl = LabeledSequent(cur.conclusion.rel,
                                       mset_remove(cur.conclusion.ante, (u, g)),
                                       cur.conclusion.cons)
                cur = Proof("g3glext", "boxL", concl, (cur,),
                            {"label": y, "aux": u, "phi": g})
            for g in gamma:
                concl = LabeledSequent(cur.conclusion.rel,
                                       mset_remove(cur.conclusion.ante, (u, Box(g))),
                                       cur.conclusion.cons)
                cur = Proof("g3glext", "4L", concl, (cur,),
                            {"label": y, "aux": u, "phi": g})
            boxr_concl = LabeledSequent((), tuple((y, Box(g)) for g in gamma),
                                        ((y, Box(phi)),))
            cur = Proof("g3glext", "boxR", boxr_concl, (cur,),
                        {"label": y, "fresh": u, "phi": phi})
            sub_concl = boxr_concl.substitute(y, lab)
            cur = Proof("g3glext", "sub", sub_concl, (cur,), {"x": lab, "y": y})
            added2 = LabeledSequent(
                (), mset_diff(goal.ante, sub_concl.ante), mset_diff(goal.cons, sub_concl.cons)
            )
            return Proof("g3glext", "w", goal, (cur,), {"added": added2})
        raise NotApplicable(f"translation does not handle {node.rule}")

    return reindex_labels(trans(p, label))


def csgl_to_g3gl_embed(p: Proof) -> Proof:
    """Every CSGL rule is a rule of the extended labeled calculus."""
    return p.retag("g3glext")


# ---------------------------------------------------------------------------
# Bounded unfolding of cyclic derivations

def unfold_glcirc(d: CyclicDerivation, depth: int) -> Proof:
    """Unfold every back-link `depth` times; the remaining open leaves carry
    their (identical) back-link target sequents."""
    tree = d.derivation
    links = dict(d.backlinks)
    for _ in range(depth):
        tree, links = _graft_once(tree, links)
    # stamp the targets on what is left open
    def finish(node: Proof, addr: Address) -> Proof:
        if node.rule == OPEN:
            meta = dict(node.meta)
            meta.pop("backlink", None)
            meta["target"] = node.conclusion
            return Proof(node.calculus, OPEN, node.conclusion, (), meta)
        return Proof(node.calculus, node.rule, node.conclusion,
                     tuple(finish(q, addr + (i,)) for i, q in enumerate(node.premises)),
                     dict(node.meta))

    return finish(tree, ())


def _graft_once(tree: Proof, links: dict) -> tuple[Proof, dict]:
    new_links: dict[Address, Address] = {}

    def go(node: Proof, addr: Address) -> Proof:
        if node.rule == OPEN:
            target = links.get(addr)
            if target is None:
                return node
            sub = tree.at(target)

            def copy(n: Proof, rel: Address) -> Proof:
                here = addr + rel
                if n.rule == OPEN:
                    t2 = links[target + rel]
                    if t2[: len(target)] == target:
                        new_links[here] = addr + t2[len(target):]
                    else:
                        new_links[here] = t2
                    return Proof(n.calculus, OPEN, n.conclusion, (), dict(n.meta))
                return Proof(n.calculus, n.rule, n.conclusion,
                             tuple(copy(q, rel + (i,)) for i, q in enumerate(n.premises)),
                             dict(n.meta))

            return copy(sub, ())
        return Proof(node.calculus, node.rule, node.conclusion,
                     tuple(go(q, addr + (i,)) for i, q in enumerate(node.premises)),
                     dict(node.meta))

    return go(tree, ()), new_links


# ---------------------------------------------------------------------------
# Pipeline

@dataclass
class PassReport:
    pass_name: str
    input_conclusion: str
    output_conclusion: str
    nodes_in: int
    nodes_out: int
    height_in: int
    height_out: int
    permutations: int = 0

    def line(self) -> str:
        return (
            f"{self.pass_name}: nodes {self.nodes_in}->{self.nodes_out}, "
            f"height {self.height_in}->{self.height_out}, "
            f"permutations {self.permutations}, concludes {self.output_conclusion}"
        )


def run_pass(name: str, proof: Proof) -> tuple[Proof, PassReport]:
    stats: dict = {}
    if name == "end-active":
        out = to_end_active(proof, stats)
    elif name == "linearize":
        out = linearize(proof, stats)
    elif name == "normalize":
        out = normalize_lngl(proof, stats)
    elif name == "to-glseq":
        out = lngl_to_glseq(proof)
    elif name == "to-g3gl":
        out = glseq_to_g3gl(proof)
    elif name == "embed-g3gl":
        out = csgl_to_g3gl_embed(proof)
    else:
        raise NotApplicable(f"unknown pass {name}")
    report = PassReport(
        name, str(proof.conclusion), str(out.conclusion),
        proof.node_count(), out.node_count(), proof.height(), out.height(),
        stats.get("permutations", 0),
    )
    return out, report
