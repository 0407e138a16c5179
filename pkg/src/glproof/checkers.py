"""Deterministic proof validation for all six formalisms.

Checking reconstructs every node's premises from (rule, meta, conclusion)
and compares; it never searches.  Reports carry stable reason codes with
node addresses so the CLI can emit machine-readable failure lines.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .formula import Box
from .rules import (
    BAD_BACKLINK,
    BLOCK_VIOLATION,
    CALCULUS_MISMATCH,
    LINT_NO_BOX_ON_CYCLE,
    NON_END_APPLICATION,
    NOT_A_TREE,
    OPEN_LEAF,
    FRESHNESS_VIOLATION,
    RULES_OF,
    RuleError,
    SCHEMA_MISMATCH,
    UNKNOWN_RULE,
    UNKNOWN_RULE_STRICT,
    WRONG_PREMISE_COUNT,
    is_initial,
    premises_of,
    verify_sub,
    LOCAL_RULES,
    PROPAGATION_RULES,
)
from .sequents import (
    OPEN,
    Address,
    CyclicDerivation,
    LabeledSequent,
    LinearNestedSequent,
    NotATree,
    Proof,
    format_address,
    is_leaf,
    is_pre_leaf,
    tree_root,
)


@dataclass
class Failure:
    address: Address
    code: str
    message: str
    detail: str = ""

    def token(self) -> str:
        return f"{self.code}({self.detail})" if self.detail else self.code

    def __str__(self) -> str:
        return f"{self.token()}\t{format_address(self.address)}\t{self.message}"


@dataclass
class CheckReport:
    accepted: bool
    failures: list[Failure] = field(default_factory=list)

    @classmethod
    def from_failures(cls, failures: list[Failure]) -> "CheckReport":
        return cls(not failures, failures)

    def __bool__(self) -> bool:
        return self.accepted


# ---------------------------------------------------------------------------
# Generic node validation

def _active_prefix_len(rule: str, conclusion: LinearNestedSequent) -> int:
    # components a rule application must leave untouched
    if rule in PROPAGATION_RULES:
        return len(conclusion) - 2
    if rule == "boxR":
        return len(conclusion) - 1
    return len(conclusion) - 1


def _diagnose_lns_mismatch(
    rule: str, conclusion: LinearNestedSequent, expected, actual
) -> Failure | None:
    if not isinstance(actual, LinearNestedSequent) or not isinstance(
        expected, LinearNestedSequent
    ):
        return None
    if len(actual) != len(expected):
        return None
    keep = max(0, _active_prefix_len(rule, conclusion))
    if actual.components[:keep] != expected.components[:keep]:
        return Failure((), NON_END_APPLICATION, f"{rule} modifies a non-end component")
    return None


def _check_nodes(
    proof: Proof,
    expected_calculus: tuple[str, ...],
    allowed: tuple[str, ...],
    strict_reject: tuple[str, ...] = (),
) -> list[Failure]:
    failures: list[Failure] = []
    for addr, node in proof.nodes():
        if node.calculus not in expected_calculus:
            failures.append(
                Failure(addr, CALCULUS_MISMATCH, f"node is tagged {node.calculus}")
            )
            continue
        if node.rule == OPEN:
            failures.append(Failure(addr, OPEN_LEAF, "open leaf in a closed proof"))
            continue
        if node.rule not in allowed:
            code = UNKNOWN_RULE_STRICT if node.rule in strict_reject else UNKNOWN_RULE
            failures.append(Failure(addr, code, f"rule {node.rule} not available here"))
            continue
        if node.rule == "sub":
            if len(node.premises) != 1:
                failures.append(Failure(addr, WRONG_PREMISE_COUNT, "sub takes one premise"))
                continue
            try:
                verify_sub(node.meta, node.premises[0].conclusion, node.conclusion)
            except RuleError as e:
                failures.append(Failure(addr, e.code, str(e), e.detail))
            continue
        try:
            expected = premises_of("lngl" if node.calculus == "lngl" else node.calculus,
                                   node.rule, node.meta, node.conclusion)
        except RuleError as e:
            failures.append(Failure(addr, e.code, str(e), e.detail))
            continue
        if len(node.premises) != len(expected):
            failures.append(
                Failure(
                    addr,
                    WRONG_PREMISE_COUNT,
                    f"{node.rule} needs {len(expected)} premises, found {len(node.premises)}",
                )
            )
            continue
        for i, (want, got) in enumerate(zip(expected, [p.conclusion for p in node.premises])):
            if want != got:
                lns_diag = None
                if isinstance(node.conclusion, LinearNestedSequent):
                    lns_diag = _diagnose_lns_mismatch(node.rule, node.conclusion, want, got)
                if lns_diag is not None:
                    failures.append(
                        Failure(addr + (i,), lns_diag.code, lns_diag.message)
                    )
                else:
                    failures.append(
                        Failure(
                            addr + (i,),
                            SCHEMA_MISMATCH,
                            f"premise {i} of {node.rule} should be {want}, found {got}",
                        )
                    )
    return failures


def _freshness_lint(proof: Proof) -> list[Failure]:
    """Globally fresh labels: one fresh label per boxR application."""
    failures = []
    seen: dict[str, Address] = {}
    for addr, node in proof.nodes():
        if node.rule == "boxR" and isinstance(node.conclusion, LabeledSequent):
            y = node.meta.get("fresh")
            if y is None:
                continue
            if y in seen:
                failures.append(
                    Failure(
                        addr,
                        FRESHNESS_VIOLATION,
                        f"fresh label {y} reused (also at {format_address(seen[y])})",
                        detail=y,
                    )
                )
            else:
                seen[y] = addr
    return failures


def _tree_shape_failures(proof: Proof) -> list[Failure]:
    failures = []
    for addr, node in proof.nodes():
        try:
            tree_root(node.conclusion)
        except NotATree as e:
            failures.append(Failure(addr, NOT_A_TREE, str(e), e.diagnosis))
    return failures


# ---------------------------------------------------------------------------
# Public checkers

def check_glseq(p: Proof) -> CheckReport:
    return CheckReport.from_failures(_check_nodes(p, ("glseq",), RULES_OF["glseq"]))


def check_k4seq(p: Proof) -> CheckReport:
    return CheckReport.from_failures(_check_nodes(p, ("k4seq",), RULES_OF["k4seq"]))


def check_g3gl(p: Proof, mode: str = "strict") -> CheckReport:
    """mode: 'strict' (labeled rules only) or 'extended' (plus the admitted
    rules 4L, w, cL, cR, (x/y)=sub, cut, checkable as explicit nodes)."""
    if mode not in ("strict", "extended"):
        raise ValueError("mode must be 'strict' or 'extended'")
    if mode == "strict":
        extra = tuple(r for r in RULES_OF["g3glext"] if r not in RULES_OF["g3gl"])
        failures = _check_nodes(p, ("g3gl",), RULES_OF["g3gl"], strict_reject=extra)
    else:
        failures = _check_nodes(p, ("g3gl", "g3glext", "csgl"), RULES_OF["g3glext"])
    failures += _freshness_lint(p)
    return CheckReport.from_failures(failures)


def check_csgl(p: Proof) -> CheckReport:
    failures = _check_nodes(p, ("csgl",), RULES_OF["csgl"])
    failures += _tree_shape_failures(p)
    failures += _freshness_lint(p)
    return CheckReport.from_failures(failures)


def check_lngl(p: Proof) -> CheckReport:
    return CheckReport.from_failures(_check_nodes(p, ("lngl",), RULES_OF["lngl"]))


def check_proof(p: Proof) -> CheckReport:
    calc = p.calculus
    if calc == "glseq":
        return check_glseq(p)
    if calc == "k4seq":
        return check_k4seq(p)
    if calc == "g3gl":
        return check_g3gl(p, "strict")
    if calc == "g3glext":
        return check_g3gl(p, "extended")
    if calc == "csgl":
        return check_csgl(p)
    if calc == "lngl":
        return check_lngl(p)
    return CheckReport(False, [Failure((), UNKNOWN_RULE, f"unknown calculus {calc}")])


# ---------------------------------------------------------------------------
# Cyclic derivations

def check_glcirc(d: CyclicDerivation) -> CheckReport:
    """K4seq schemas at internal nodes, back-link conditions at open leaves,
    closure, and the box4-on-cycle lint."""
    failures: list[Failure] = []
    root = d.derivation
    nodes = dict(root.nodes())
    for addr, node in nodes.items():
        if node.rule == OPEN:
            continue
        if node.calculus != "k4seq":
            failures.append(Failure(addr, CALCULUS_MISMATCH, f"node tagged {node.calculus}"))
            continue
        if node.rule not in RULES_OF["k4seq"]:
            failures.append(Failure(addr, UNKNOWN_RULE, f"rule {node.rule} not in K4seq"))
            continue
        try:
            expected = premises_of("k4seq", node.rule, node.meta, node.conclusion)
        except RuleError as e:
            failures.append(Failure(addr, e.code, str(e), e.detail))
            continue
        if len(node.premises) != len(expected):
            failures.append(
                Failure(addr, WRONG_PREMISE_COUNT, f"{node.rule} premise count mismatch")
            )
            continue
        for i, (want, prem) in enumerate(zip(expected, node.premises)):
            if want != prem.conclusion:
                failures.append(
                    Failure(
                        addr + (i,),
                        SCHEMA_MISMATCH,
                        f"premise {i} of {node.rule} should be {want}, found {prem.conclusion}",
                    )
                )
    for addr, node in nodes.items():
        if node.rule != OPEN:
            continue
        if addr not in d.backlinks:
            failures.append(Failure(addr, OPEN_LEAF, "open leaf has no back-link"))
            continue
        target = d.backlinks[addr]
        if target == addr:
            failures.append(
                Failure(addr, BAD_BACKLINK, "back-link maps a leaf to itself", detail="self")
            )
            continue
        if target != addr[: len(target)]:
            failures.append(
                Failure(
                    addr,
                    BAD_BACKLINK,
                    f"target {format_address(target)} is not an ancestor",
                    detail="not-ancestor",
                )
            )
            continue
        if nodes[target].conclusion != node.conclusion:
            failures.append(
                Failure(
                    addr,
                    BAD_BACKLINK,
                    "leaf and back-link target carry different sequents",
                    detail="sequent-mismatch",
                )
            )
            continue
        cycle_rules = [nodes[addr[:i]].rule for i in range(len(target), len(addr))]
        if "box4" not in cycle_rules:
            failures.append(
                Failure(addr, LINT_NO_BOX_ON_CYCLE, "no box4 application on the cycle")
            )
    for addr in d.backlinks:
        if addr not in nodes or nodes[addr].rule != OPEN:
            failures.append(
                Failure(addr, BAD_BACKLINK, "back-link source is not an open leaf", detail="not-ancestor")
            )
    return CheckReport.from_failures(failures)


# ---------------------------------------------------------------------------
# Structural predicates on checked proofs

NOT_END_ACTIVE = "NotEndActive"


def node_end_active(node: Proof) -> bool:
    """End-activity of one rule application, judged in its conclusion."""
    t = node.conclusion
    rule = node.rule
    if rule == "boxR":
        return True
    if rule in ("id1", "id2") or rule in LOCAL_RULES:
        return is_leaf(t, node.meta["label"])
    if rule in PROPAGATION_RULES:
        return is_pre_leaf(t, node.meta["label"]) and is_leaf(t, node.meta["aux"])
    return True


def end_active_report(p: Proof) -> CheckReport:
    """Accepted iff every rule application in the CSGL proof is end-active."""
    failures = []
    for addr, node in p.nodes():
        if not node_end_active(node):
            failures.append(
                Failure(addr, NOT_END_ACTIVE, f"{node.rule} is not end-active here")
            )
    return CheckReport.from_failures(failures)


def normal_form_report(p: Proof) -> CheckReport:
    """Accepted iff every boxR sits under a 4L block, then a boxL block, then
    a block of local rules, with no interleaving (the complete-block shape)."""
    failures: list[Failure] = []

    def walk_segment(node: Proof, addr: Address, phase: int):
        if node.rule == "boxR" or is_initial(node.rule) or node.rule == OPEN:
            return
        if node.rule == "4L":
            if phase > 0:
                failures.append(
                    Failure(addr, BLOCK_VIOLATION, "4L above the 4L block of this modal block")
                )
            nxt = 0
        elif node.rule == "boxL":
            if phase > 1:
                failures.append(
                    Failure(addr, BLOCK_VIOLATION, "boxL above the boxL block of this modal block")
                )
            nxt = 1
        else:
            nxt = 2
        for i, prem in enumerate(node.premises):
            walk_segment(prem, addr + (i,), nxt)

    for addr, node in p.nodes():
        if node.rule == "boxR":
            walk_segment(node.premises[0], addr + (0,), 0)
    return CheckReport.from_failures(failures)


@dataclass
class Block:
    """A contiguous proof segment whose nodes all use rules from one set."""

    rule_set: frozenset[str]
    segment: tuple[Address, ...]

    def __len__(self) -> int:
        return len(self.segment)


def modal_blocks(p: Proof, boxr_addr: Address) -> tuple[Block, Block, Block]:
    """The 4L block, boxL block, and local block stacked above a normal-form
    boxR (the complete-block decomposition)."""
    addr = boxr_addr + (0,)
    four: list[Address] = []
    while p.at(addr).rule == "4L":
        four.append(addr)
        addr = addr + (0,)
    boxl: list[Address] = []
    while p.at(addr).rule == "boxL":
        boxl.append(addr)
        addr = addr + (0,)
    local: list[Address] = []

    def walk(a: Address):
        node = p.at(a)
        if node.rule == "boxR" or is_initial(node.rule) or node.rule == OPEN:
            return
        local.append(a)
        for i in range(len(node.premises)):
            walk(a + (i,))

    walk(addr)
    return (
        Block(frozenset({"4L"}), tuple(four)),
        Block(frozenset({"boxL"}), tuple(boxl)),
        Block(frozenset(LOCAL_RULES), tuple(local)),
    )


def modal_block_partition(p: Proof, boxr_addr: Address):
    """For a normal-form boxR: the multisets of box contents principal only in
    4L, in both 4L and boxL, and only in boxL (Sigma1, Sigma2, Sigma3)."""
    four, boxl, _ = modal_blocks(p, boxr_addr)
    a = [p.at(addr).meta["phi"] for addr in four.segment]
    b = [p.at(addr).meta["phi"] for addr in boxl.segment]
    both = []
    for g in list(a):
        if g in b:
            a.remove(g)
            b.remove(g)
            both.append(g)
    return tuple(a), tuple(both), tuple(b)
