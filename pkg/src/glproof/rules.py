"""Rule schemas for all six calculi: deterministic premise reconstruction.

Every rule application carries enough metadata (principal formula, labels,
box partition, fresh label) that its premises are a function of the
conclusion.  Checking therefore never searches; it reconstructs and compares.
The lone exception is the label substitution rule `sub`, which is verified in
the premise-to-conclusion direction.
"""

from __future__ import annotations

from .formula import Atom, Box, Formula, Not, Or
from .sequents import (
    GentzenSequent,
    LabeledSequent,
    LinearNestedSequent,
    Sequent,
    mset_contains,
    mset_diff,
    mset_remove,
)

# Failure codes (stable identifiers surfaced by the CLI)
SCHEMA_MISMATCH = "SchemaMismatch"
WRONG_PREMISE_COUNT = "WrongPremiseCount"
BAD_PARTITION = "BadPartition"
FRESHNESS_VIOLATION = "FreshnessViolation"
UNKNOWN_RULE = "UnknownRule"
UNKNOWN_RULE_STRICT = "UnknownRuleInStrictMode"
NOT_A_TREE = "NotATree"
NON_END_APPLICATION = "NonEndApplication"
BAD_BACKLINK = "BadBacklink"
OPEN_LEAF = "OpenLeaf"
LINT_NO_BOX_ON_CYCLE = "LintNoBoxOnCycle"
BLOCK_VIOLATION = "BlockViolation"
CALCULUS_MISMATCH = "CalculusMismatch"


class RuleError(Exception):
    def __init__(self, code: str, message: str, detail: str = ""):
        self.code = code
        self.detail = detail
        super().__init__(message)


LOCAL_RULES = ("negL", "negR", "orL", "orR")
PROPAGATION_RULES = ("4L", "boxL")
INITIAL_RULES = ("id", "id1", "id2", "ir")

GENTZEN_RULES = ("id", "negL", "negR", "orL", "orR")
RULES_OF = {
    "glseq": GENTZEN_RULES + ("boxGL",),
    "k4seq": GENTZEN_RULES + ("box4",),
    "g3gl": ("id1", "id2", "ir", "tr", "negL", "negR", "orL", "orR", "boxL", "boxR"),
    "csgl": ("id1", "id2", "negL", "negR", "orL", "orR", "boxL", "boxR", "4L"),
    "lngl": ("id1", "id2", "negL", "negR", "orL", "orR", "boxL", "boxR", "4L"),
}
EXTENDED_EXTRA = ("4L", "w", "cL", "cR", "sub", "cut")
RULES_OF["g3glext"] = RULES_OF["g3gl"] + EXTENDED_EXTRA

ARITY = {
    "id": 0, "id1": 0, "id2": 0, "ir": 0,
    "negL": 1, "negR": 1, "orR": 1, "orL": 2,
    "boxL": 1, "boxR": 1, "4L": 1, "tr": 1,
    "boxGL": 1, "box4": 1,
    "w": 1, "cL": 1, "cR": 1, "sub": 1, "cut": 2,
}


def is_initial(rule: str) -> bool:
    return rule in INITIAL_RULES


def _need(meta: dict, key: str, rule: str):
    if key not in meta:
        raise RuleError(SCHEMA_MISMATCH, f"{rule} requires meta key '{key}'")
    return meta[key]


# ---------------------------------------------------------------------------
# Gentzen sequents (GLseq / K4seq)

def _gentzen_premises(rule: str, meta: dict, c: GentzenSequent) -> list[GentzenSequent]:
    if rule == "id":
        phi = meta.get("principal")
        if phi is not None:
            if phi not in c.ante or phi not in c.cons:
                raise RuleError(SCHEMA_MISMATCH, f"id witness {phi} not on both sides")
        elif not set(c.ante) & set(c.cons):
            raise RuleError(SCHEMA_MISMATCH, "id needs a shared formula")
        return []
    if rule == "negL":
        phi = _need(meta, "principal", rule)
        if not isinstance(phi, Not) or phi not in c.ante:
            raise RuleError(SCHEMA_MISMATCH, f"negL principal {phi} not a negation in antecedent")
        return [GentzenSequent(mset_remove(c.ante, phi), c.cons + (phi.sub,))]
    if rule == "negR":
        phi = _need(meta, "principal", rule)
        if not isinstance(phi, Not) or phi not in c.cons:
            raise RuleError(SCHEMA_MISMATCH, f"negR principal {phi} not a negation in consequent")
        return [GentzenSequent(c.ante + (phi.sub,), mset_remove(c.cons, phi))]
    if rule == "orL":
        phi = _need(meta, "principal", rule)
        if not isinstance(phi, Or) or phi not in c.ante:
            raise RuleError(SCHEMA_MISMATCH, f"orL principal {phi} not a disjunction in antecedent")
        rest = mset_remove(c.ante, phi)
        return [
            GentzenSequent(rest + (phi.left,), c.cons),
            GentzenSequent(rest + (phi.right,), c.cons),
        ]
    if rule == "orR":
        phi = _need(meta, "principal", rule)
        if not isinstance(phi, Or) or phi not in c.cons:
            raise RuleError(SCHEMA_MISMATCH, f"orR principal {phi} not a disjunction in consequent")
        return [GentzenSequent(c.ante, mset_remove(c.cons, phi) + (phi.left, phi.right))]
    if rule in ("boxGL", "box4"):
        gamma = tuple(_need(meta, "gamma", rule))
        phi = _need(meta, "phi", rule)
        boxes = tuple(Box(g) for g in gamma)
        if not mset_contains(c.ante, boxes):
            raise RuleError(BAD_PARTITION, f"{rule} partition boxes not in antecedent")
        if Box(phi) not in c.cons:
            raise RuleError(BAD_PARTITION, f"{rule} box of {phi} not in consequent")
        ante = boxes + gamma + ((Box(phi),) if rule == "boxGL" else ())
        return [GentzenSequent(ante, (phi,))]
    if rule in ("w", "cL", "cR", "cut"):
        if rule == "w":
            add_a = tuple(meta.get("ante", ()))
            add_c = tuple(meta.get("cons", ()))
            if not mset_contains(c.ante, add_a) or not mset_contains(c.cons, add_c):
                raise RuleError(SCHEMA_MISMATCH, "w additions not present in conclusion")
            return [GentzenSequent(mset_diff(c.ante, add_a), mset_diff(c.cons, add_c))]
        if rule == "cL":
            phi = _need(meta, "principal", rule)
            if phi not in c.ante:
                raise RuleError(SCHEMA_MISMATCH, "cL principal not in antecedent")
            return [GentzenSequent(c.ante + (phi,), c.cons)]
        if rule == "cR":
            phi = _need(meta, "principal", rule)
            if phi not in c.cons:
                raise RuleError(SCHEMA_MISMATCH, "cR principal not in consequent")
            return [GentzenSequent(c.ante, c.cons + (phi,))]
        phi = _need(meta, "principal", rule)
        return [
            GentzenSequent(c.ante, c.cons + (phi,)),
            GentzenSequent(c.ante + (phi,), c.cons),
        ]
    raise RuleError(UNKNOWN_RULE, f"unknown Gentzen rule {rule}")


# ---------------------------------------------------------------------------
# Labeled sequents (G3GL / G3GLext / CSGL)

def _labeled_premises(rule: str, meta: dict, c: LabeledSequent) -> list[LabeledSequent]:
    if rule in ("id1", "id2"):
        x = _need(meta, "label", rule)
        phi = _need(meta, "principal", rule)
        want = Atom if rule == "id1" else Box
        if not isinstance(phi, want):
            raise RuleError(SCHEMA_MISMATCH, f"{rule} witness must be {'an atom' if want is Atom else 'a boxed formula'}")
        if (x, phi) not in c.ante or (x, phi) not in c.cons:
            raise RuleError(SCHEMA_MISMATCH, f"{rule} witness {x}:{phi} not on both sides")
        return []
    if rule == "ir":
        x = _need(meta, "label", rule)
        if (x, x) not in c.rel:
            raise RuleError(SCHEMA_MISMATCH, f"ir needs {x}R{x} in the sequent")
        return []
    if rule == "tr":
        x, y, z = _need(meta, "x", rule), _need(meta, "y", rule), _need(meta, "z", rule)
        if (x, y) not in c.rel or (y, z) not in c.rel:
            raise RuleError(SCHEMA_MISMATCH, f"tr needs {x}R{y} and {y}R{z}")
        return [c.with_rel((x, z))]
    if rule in ("negL", "negR", "orL", "orR"):
        x = _need(meta, "label", rule)
        phi = _need(meta, "principal", rule)
        if rule == "negL":
            if not isinstance(phi, Not) or (x, phi) not in c.ante:
                raise RuleError(SCHEMA_MISMATCH, f"negL principal {x}:{phi} not in antecedent")
            return [LabeledSequent(c.rel, mset_remove(c.ante, (x, phi)), c.cons + ((x, phi.sub),))]
        if rule == "negR":
            if not isinstance(phi, Not) or (x, phi) not in c.cons:
                raise RuleError(SCHEMA_MISMATCH, f"negR principal {x}:{phi} not in consequent")
            return [LabeledSequent(c.rel, c.ante + ((x, phi.sub),), mset_remove(c.cons, (x, phi)))]
        if rule == "orL":
            if not isinstance(phi, Or) or (x, phi) not in c.ante:
                raise RuleError(SCHEMA_MISMATCH, f"orL principal {x}:{phi} not in antecedent")
            rest = mset_remove(c.ante, (x, phi))
            return [
                LabeledSequent(c.rel, rest + ((x, phi.left),), c.cons),
                LabeledSequent(c.rel, rest + ((x, phi.right),), c.cons),
            ]
        if not isinstance(phi, Or) or (x, phi) not in c.cons:
            raise RuleError(SCHEMA_MISMATCH, f"orR principal {x}:{phi} not in consequent")
        return [
            LabeledSequent(
                c.rel, c.ante, mset_remove(c.cons, (x, phi)) + ((x, phi.left), (x, phi.right))
            )
        ]
    if rule in ("boxL", "4L"):
        x, y = _need(meta, "label", rule), _need(meta, "aux", rule)
        phi = _need(meta, "phi", rule)
        if (x, y) not in c.rel:
            raise RuleError(SCHEMA_MISMATCH, f"{rule} needs {x}R{y}")
        if (x, Box(phi)) not in c.ante:
            raise RuleError(SCHEMA_MISMATCH, f"{rule} principal {x}:[]{phi} not in antecedent")
        added = phi if rule == "boxL" else Box(phi)
        return [c.with_ante((y, added))]
    if rule == "boxR":
        x, y = _need(meta, "label", rule), _need(meta, "fresh", rule)
        phi = _need(meta, "phi", rule)
        if (x, Box(phi)) not in c.cons:
            raise RuleError(SCHEMA_MISMATCH, f"boxR principal {x}:[]{phi} not in consequent")
        if y in c.labels():
            raise RuleError(FRESHNESS_VIOLATION, f"label {y} occurs in the conclusion", detail=y)
        return [
            LabeledSequent(
                c.rel | {(x, y)},
                c.ante + ((y, Box(phi)),),
                mset_remove(c.cons, (x, Box(phi))) + ((y, phi),),
            )
        ]
    if rule == "w":
        added = _need(meta, "added", rule)
        if not added.rel <= c.rel:
            raise RuleError(SCHEMA_MISMATCH, "w added relational atoms not in conclusion")
        if not mset_contains(c.ante, added.ante) or not mset_contains(c.cons, added.cons):
            raise RuleError(SCHEMA_MISMATCH, "w added formulas not in conclusion")
        return [
            LabeledSequent(
                c.rel - added.rel, mset_diff(c.ante, added.ante), mset_diff(c.cons, added.cons)
            )
        ]
    if rule in ("cL", "cR"):
        x = _need(meta, "label", rule)
        phi = _need(meta, "principal", rule)
        side = c.ante if rule == "cL" else c.cons
        if (x, phi) not in side:
            raise RuleError(SCHEMA_MISMATCH, f"{rule} principal not present")
        if rule == "cL":
            return [c.with_ante((x, phi))]
        return [c.with_cons((x, phi))]
    if rule == "cut":
        x = _need(meta, "label", rule)
        phi = _need(meta, "principal", rule)
        return [c.with_cons((x, phi)), c.with_ante((x, phi))]
    if rule == "sub":
        raise RuleError(SCHEMA_MISMATCH, "sub premises cannot be reconstructed; verify instead")
    raise RuleError(UNKNOWN_RULE, f"unknown labeled rule {rule}")


def verify_sub(meta: dict, premise: LabeledSequent, conclusion: LabeledSequent) -> None:
    """(x/y): the conclusion is the premise with label y replaced by x."""
    x, y = _need(meta, "x", "sub"), _need(meta, "y", "sub")
    if premise.substitute(y, x) != conclusion:
        raise RuleError(SCHEMA_MISMATCH, f"substitution ({x}/{y}) does not yield the conclusion")


# ---------------------------------------------------------------------------
# Linear nested sequents (LNGL)

def _lns_premises(rule: str, meta: dict, c: LinearNestedSequent) -> list[LinearNestedSequent]:
    end = c.end
    if rule in ("id1", "id2"):
        phi = _need(meta, "principal", rule)
        want = Atom if rule == "id1" else Box
        if not isinstance(phi, want):
            raise RuleError(SCHEMA_MISMATCH, f"{rule} witness has the wrong shape")
        if phi not in end.ante or phi not in end.cons:
            raise RuleError(SCHEMA_MISMATCH, f"{rule} witness {phi} not on both sides of the end component")
        return []
    if rule in ("negL", "negR", "orL", "orR"):
        phi = _need(meta, "principal", rule)
        if rule == "negL":
            if not isinstance(phi, Not) or phi not in end.ante:
                raise RuleError(SCHEMA_MISMATCH, "negL principal not in end antecedent")
            return [c.replace_end(GentzenSequent(mset_remove(end.ante, phi), end.cons + (phi.sub,)))]
        if rule == "negR":
            if not isinstance(phi, Not) or phi not in end.cons:
                raise RuleError(SCHEMA_MISMATCH, "negR principal not in end consequent")
            return [c.replace_end(GentzenSequent(end.ante + (phi.sub,), mset_remove(end.cons, phi)))]
        if rule == "orL":
            if not isinstance(phi, Or) or phi not in end.ante:
                raise RuleError(SCHEMA_MISMATCH, "orL principal not in end antecedent")
            rest = mset_remove(end.ante, phi)
            return [
                c.replace_end(GentzenSequent(rest + (phi.left,), end.cons)),
                c.replace_end(GentzenSequent(rest + (phi.right,), end.cons)),
            ]
        if not isinstance(phi, Or) or phi not in end.cons:
            raise RuleError(SCHEMA_MISMATCH, "orR principal not in end consequent")
        return [
            c.replace_end(
                GentzenSequent(end.ante, mset_remove(end.cons, phi) + (phi.left, phi.right))
            )
        ]
    if rule in ("4L", "boxL"):
        phi = _need(meta, "phi", rule)
        if len(c) < 2:
            raise RuleError(SCHEMA_MISMATCH, f"{rule} needs at least two components")
        if Box(phi) not in c.components[-2].ante:
            raise RuleError(SCHEMA_MISMATCH, f"{rule} principal []{phi} not in the previous component")
        added = Box(phi) if rule == "4L" else phi
        return [c.replace_end(GentzenSequent(end.ante + (added,), end.cons))]
    if rule == "boxR":
        phi = _need(meta, "phi", rule)
        if Box(phi) not in end.cons:
            raise RuleError(SCHEMA_MISMATCH, f"boxR principal []{phi} not in end consequent")
        return [
            c.replace_end(
                GentzenSequent(end.ante, mset_remove(end.cons, Box(phi))),
                GentzenSequent((Box(phi),), (phi,)),
            )
        ]
    if rule == "w":
        i = _need(meta, "component", rule)
        add_a = tuple(meta.get("ante", ()))
        add_c = tuple(meta.get("cons", ()))
        if not (0 <= i < len(c)):
            raise RuleError(SCHEMA_MISMATCH, "w component index out of range")
        comp = c.components[i]
        if not mset_contains(comp.ante, add_a) or not mset_contains(comp.cons, add_c):
            raise RuleError(SCHEMA_MISMATCH, "w additions not present in conclusion")
        return [c.replace_at(i, GentzenSequent(mset_diff(comp.ante, add_a), mset_diff(comp.cons, add_c)))]
    raise RuleError(UNKNOWN_RULE, f"unknown linear nested rule {rule}")


# ---------------------------------------------------------------------------
# Dispatch

def premises_of(calculus: str, rule: str, meta: dict, conclusion: Sequent) -> list[Sequent]:
    """Reconstruct the premises a rule instance must have; validates the
    conclusion-side conditions (principal present, freshness, partition)."""
    if calculus in ("glseq", "k4seq"):
        if rule in ("boxGL", "box4") and rule != ("boxGL" if calculus == "glseq" else "box4"):
            raise RuleError(UNKNOWN_RULE, f"{rule} is not a {calculus} rule")
        return _gentzen_premises(rule, meta, conclusion)
    if calculus in ("g3gl", "g3glext", "csgl"):
        return _labeled_premises(rule, meta, conclusion)
    if calculus == "lngl":
        return _lns_premises(rule, meta, conclusion)
    raise RuleError(UNKNOWN_RULE, f"unknown calculus {calculus}")


def rule_allowed(calculus: str, rule: str, extended: bool = False) -> bool:
    if calculus == "g3gl" and extended:
        calculus = "g3glext"
    return rule in RULES_OF.get(calculus, ())
