import pytest

from glproof.formula import Atom, Box, Not, Or, parse_formula as pf
from glproof.proofio import (
    parse_gentzen_sequent as pgs,
    parse_labeled_sequent as pls,
    parse_lns,
    print_proof,
)
from glproof.rules import premises_of
from glproof.search import SearchConfig, prove_formula
from glproof.sequents import CyclicDerivation, LabeledSequent, Proof
from glproof.checkers import (
    check_csgl,
    check_g3gl,
    check_glcirc,
    check_glseq,
    check_lngl,
    check_proof,
    end_active_report,
    normal_form_report,
)
from glproof.transform import (
    InternalNonTermination,
    NotApplicable,
    NotEndActive,
    NotNormalForm,
    NotPermutable,
    ShapeViolation,
    admit,
    apply_inverse,
    csgl_to_g3gl_embed,
    glseq_to_g3gl,
    linearize,
    lngl_to_glseq,
    normalize_lngl,
    permute_down,
    prove_general_id,
    to_end_active,
    unfold_glcirc,
)

CFG = SearchConfig(oracle_hint=False)
P, Q = Atom("p"), Atom("q")
LOB = pf("[]([]p -> p) -> []p")
CORPUS = [LOB, pf("[](p->q)->([]p->[]q)"), pf("[]p->[][]p"), pf("p|~p"), pf("[](p|~p)")]


def csgl_proof(f):
    r = prove_formula(f, "csgl", CFG)
    assert r.proved
    return r.proof


# ---------------------------------------------------------------------------
# Generalized identity

def test_gen_id_atom_single_node():
    goal = pls("x: p |- x: p")
    p = prove_general_id("csgl", goal, ("x", P))
    assert p.rule == "id1" and p.height() == 0
    assert check_csgl(p).accepted


def test_gen_id_negation_height_two():
    f = pf("~p")
    goal = pls("x: ~p |- x: ~p")
    p = prove_general_id("csgl", goal, ("x", f))
    assert p.height() == 2
    assert [n.rule for _, n in p.nodes()] == ["negR", "negL", "id1"]
    assert check_csgl(p).accepted


def test_gen_id_disjunction_two_leaves():
    f = pf("p | q")
    goal = pls("x: p | q |- x: p | q")
    p = prove_general_id("g3gl", goal, ("x", f))
    assert check_g3gl(p, "strict").accepted
    leaves = [n for _, n in p.nodes() if not n.premises]
    assert len(leaves) == 2 and all(n.rule == "id1" for n in leaves)


def test_gen_id_with_context():
    goal = pls("xRy; x: q, y: ~(p | []q) |- y: ~(p | []q), x: []p")
    p = prove_general_id("csgl", goal, ("y", pf("~(p | []q)")))
    assert check_csgl(p).accepted


def test_gen_id_gentzen_single_id():
    goal = pgs("q, p | ~p |- p | ~p")
    p = prove_general_id("glseq", goal, pf("p | ~p"))
    assert p.rule == "id" and p.height() == 0
    assert check_glseq(p).accepted


def test_gen_id_lns():
    goal = parse_lns("p |- q // ~[]p |- ~[]p")
    p = prove_general_id("lngl", goal, pf("~[]p"))
    assert check_lngl(p).accepted


# ---------------------------------------------------------------------------
# admit: weakening

def test_admit_w_lngl_on_initial():
    g = parse_lns("p |- p // q |- q")
    base = Proof("lngl", "id1", g, (), {"principal": Q})
    out = admit("w", base, component=0, ante=(pf("[]s"),), cons=(Atom("t"),))
    assert out.height() == 0 and out.rule == "id1"
    assert out.conclusion == parse_lns("p, []s |- t, p // q |- q")
    assert check_lngl(out).accepted


def test_admit_sub_identity():
    base = csgl_proof(LOB)
    assert admit("sub", base, x="x", y="x") == base


def test_admit_w_csgl_height_preserved():
    base = csgl_proof(LOB)
    added = LabeledSequent((), (("x", Q),), (("x", pf("~~r")),))
    out = admit("w", base, added=added)
    assert out.height() == base.height()
    assert check_csgl(out).accepted
    assert set(out.conclusion.ante) >= {("x", Q)}
    assert ("x", pf("~~r")) in out.conclusion.cons


def test_admit_w_csgl_shape_violation():
    base = csgl_proof(pf("p | ~p"))
    bad = LabeledSequent((("a", "b"),), (), ())  # disconnected from x
    with pytest.raises(ShapeViolation):
        admit("w", base, added=bad)


def test_admit_w_fresh_collision_renames():
    # weakening in a formula at the proof's fresh label forces a rename;
    # done over the extended labeled calculus, where no tree shape is imposed
    base = csgl_to_g3gl_embed(csgl_proof(LOB))
    fresh_labels = {n.meta["fresh"] for _, n in base.nodes() if n.rule == "boxR"}
    clash = next(iter(fresh_labels))
    out = admit("w", base, added=LabeledSequent((), ((clash, Q),), ()))
    assert check_g3gl(out, "extended").accepted
    assert all(
        n.meta["fresh"] != clash for _, n in out.nodes() if n.rule == "boxR"
    )
    assert out.height() == base.height()


def test_admit_w_gentzen_absorbed_by_modal():
    base = prove_formula(LOB, "glseq", CFG).proof
    out = admit("w", base, ante=(Q,), cons=(pf("[]q"),))
    assert check_glseq(out).accepted
    assert out.height() == base.height()


def test_admit_contraction_cases():
    base = csgl_proof(LOB)
    conclusion_formula = pf("~[](~[]p | p) | []p")
    dup = admit("w", base, added=LabeledSequent((), (), (("x", conclusion_formula),)))
    out = admit("cR", dup, label="x", principal=conclusion_formula)
    assert out.conclusion == base.conclusion
    assert out.height() <= dup.height()
    assert check_csgl(out).accepted

    gbase = prove_formula(LOB, "glseq", CFG).proof
    gdup = admit("w", gbase, ante=(pf("[]p"),))
    gdup2 = admit("w", gdup, ante=(pf("[]p"),))
    gout = admit("cL", gdup2, principal=pf("[]p"))
    assert check_glseq(gout).accepted
    assert gout.height() <= gdup2.height()


def test_admit_contraction_through_principal():
    # contract a disjunction that the last rule decomposes
    f = pf("p | q")
    goal = pls("x: p | q, x: p | q |- x: p | q")
    p = prove_general_id("csgl", goal, ("x", f))
    out = admit("cL", p, label="x", principal=f)
    assert out.conclusion == pls("x: p | q |- x: p | q")
    assert out.height() <= p.height()
    assert check_csgl(out).accepted


def test_admit_contraction_boxr_principal():
    # duplicate boxed consequent consumed by boxR
    f = pf("[](p | ~p)")
    r = prove_formula(f, "csgl", CFG)
    dup = admit("w", r.proof, added=LabeledSequent((), (), (("x", f),)))
    out = admit("cR", dup, label="x", principal=f)
    assert out.conclusion == r.proof.conclusion
    assert out.height() <= dup.height()
    assert check_csgl(out).accepted


def test_admit_rejects_lngl_contraction():
    g = parse_lns("p, p |- p")
    base = Proof("lngl", "id1", g, (), {"principal": P})
    with pytest.raises(NotApplicable):
        admit("cL", base, principal=P)


# ---------------------------------------------------------------------------
# apply_inverse

def test_invert_orr_on_csgl():
    base = csgl_proof(LOB)
    f = pf("~[](~[]p | p) | []p")
    out = apply_inverse("orR", 0, base, {"label": "x", "principal": f})
    assert out.conclusion == pls(" |- x: ~[](~[]p | p), x: []p")
    assert out.height() <= base.height()
    assert check_csgl(out).accepted


def test_invert_4l_lngl_is_weakening():
    g = parse_lns("[]p, p |- q // p |- p")
    base = Proof("lngl", "id1", g, (), {"principal": P})
    out = apply_inverse("4L", 0, base, {"phi": P})
    assert out.conclusion == parse_lns("[]p, p |- q // p, []p |- p")
    assert out.height() == 0
    assert check_lngl(out).accepted


def test_invert_side_material_height():
    # invert negL on a proof where the negation is side material
    goal = pls("x: ~q, x: p |- x: p")
    base = Proof("csgl", "id1", goal, (), {"label": "x", "principal": P})
    out = apply_inverse("negL", 0, base, {"label": "x", "principal": pf("~q")})
    assert out.conclusion == pls("x: p |- x: p, x: q")
    assert out.height() == base.height() == 0
    assert check_csgl(out).accepted


def test_invert_not_applicable():
    base = prove_formula(LOB, "glseq", CFG).proof
    with pytest.raises(NotApplicable):
        apply_inverse("boxGL", 0, base, {"gamma": (), "phi": P})
    with pytest.raises(NotApplicable):
        apply_inverse("negL", 0, base, {"principal": P})  # p is not a negation


def test_invert_boxr_labeled():
    base = csgl_proof(pf("[](p | ~p)"))
    # conclusion |- x: [](p | ~p); invert boxR with a brand-new fresh label
    out = apply_inverse("boxR", 0, base, {"label": "x", "fresh": "w9", "phi": pf("p | ~p")})
    assert ("x", "w9") in out.conclusion.rel
    assert check_csgl(out).accepted


# ---------------------------------------------------------------------------
# permute_down: the displayed permutation cases

def _negr_above_orr():
    # negR at x (interior) above an end-active orR at leaf y
    top = pls("xRy; x: p, y: q |- y: q, y: r")
    leaf = Proof("csgl", "id1", top, (), {"label": "y", "principal": Q})
    m_neg = {"label": "x", "principal": pf("~p")}
    c_neg = pls("xRy; y: q |- x: ~p, y: q, y: r")
    n_neg = Proof("csgl", "negR", c_neg, (leaf,), m_neg)
    m_orr = {"label": "y", "principal": pf("q | r")}
    c_orr = pls("xRy; y: q |- x: ~p, y: q | r")
    return Proof("csgl", "orR", c_orr, (n_neg,), m_orr)


def test_permute_negr_below_orr():
    base = _negr_above_orr()
    assert check_csgl(base).accepted
    out = permute_down(base, (0,))
    assert out.conclusion == base.conclusion
    assert out.rule == "negR" and out.premises[0].rule == "orR"
    assert check_csgl(out).accepted
    # the exchanged orR is end-active at its new position
    from glproof.checkers import node_end_active

    assert node_end_active(out.premises[0])


def _negr_above_boxr():
    # negR at x above an end-active boxR introducing fresh y
    top = pls("xRu; xRy; u: s, x: p, y: []q |- y: q, u: s")
    leaf = Proof("csgl", "id1", top, (), {"label": "u", "principal": Atom("s")})
    m_neg = {"label": "x", "principal": pf("~p")}
    c_neg = pls("xRu; xRy; u: s, y: []q |- y: q, x: ~p, u: s")
    n_neg = Proof("csgl", "negR", c_neg, (leaf,), m_neg)
    m_boxr = {"label": "x", "fresh": "y", "phi": Q}
    c_boxr = pls("xRu; u: s |- x: []q, x: ~p, u: s")
    return Proof("csgl", "boxR", c_boxr, (n_neg,), m_boxr)


def test_permute_negr_below_boxr():
    base = _negr_above_boxr()
    assert check_csgl(base).accepted
    out = permute_down(base, (0,))
    assert out.conclusion == base.conclusion
    assert out.rule == "negR" and out.premises[0].rule == "boxR"
    assert check_csgl(out).accepted


def test_permute_preconditions():
    base = csgl_proof(LOB)
    # every rule in a search proof is already end-active
    for addr, node in base.nodes():
        if addr and node.rule in ("negL", "negR", "orL", "orR", "4L", "boxL"):
            with pytest.raises(NotPermutable):
                permute_down(base, addr)
            break


def test_permute_clash_detected():
    # a propagation into the fresh label of the boxR directly below it
    top = pls("xRy; x: []q, y: []q, y: q |- y: q")
    leaf = Proof("csgl", "id1", top, (), {"label": "y", "principal": Q})
    m_boxl = {"label": "x", "aux": "y", "phi": Q}
    c_boxl = pls("xRy; x: []q, y: []q |- y: q")
    n_boxl = Proof("csgl", "boxL", c_boxl, (leaf,), m_boxl)
    m_boxr = {"label": "x", "fresh": "y", "phi": Q}
    c_boxr = pls("x: []q |- x: []q")
    base = Proof("csgl", "boxR", c_boxr, (n_boxl,), m_boxr)
    assert check_csgl(base).accepted
    with pytest.raises(NotPermutable):
        permute_down(base, (0,))


# ---------------------------------------------------------------------------
# to_end_active

def test_end_active_fixpoint_identity():
    base = csgl_proof(LOB)
    assert end_active_report(base).accepted
    out = to_end_active(base)
    assert out == base


def test_end_active_one_permutation():
    tau = pf("p | ~p")
    # bottom-up: orR, boxR, negR(x) <- non-end-active, orR(y), negR(y), id1
    c0 = pls(" |- x: [](p | ~p) | ~~q")
    (c1,) = premises_of("csgl", "orR", {"label": "x", "principal": pf("[](p | ~p) | ~~q")}, c0)
    m_boxr = {"label": "x", "fresh": "y", "phi": tau}
    (c2,) = premises_of("csgl", "boxR", m_boxr, c1)
    m_negx = {"label": "x", "principal": pf("~~q")}
    (c3,) = premises_of("csgl", "negR", m_negx, c2)
    m_orry = {"label": "y", "principal": tau}
    (c4,) = premises_of("csgl", "orR", m_orry, c3)
    m_negy = {"label": "y", "principal": pf("~p")}
    (c5,) = premises_of("csgl", "negR", m_negy, c4)
    leaf = Proof("csgl", "id1", c5, (), {"label": "y", "principal": P})
    n4 = Proof("csgl", "negR", c4, (leaf,), m_negy)
    n3 = Proof("csgl", "orR", c3, (n4,), m_orry)
    n2 = Proof("csgl", "negR", c2, (n3,), m_negx)
    n1 = Proof("csgl", "boxR", c1, (n2,), m_boxr)
    base = Proof("csgl", "orR", c0, (n1,), {"label": "x", "principal": pf("[](p | ~p) | ~~q")})
    assert check_csgl(base).accepted
    assert not end_active_report(base).accepted

    stats = {}
    out = to_end_active(base, stats)
    assert out.conclusion == base.conclusion
    assert str(out.conclusion) == str(base.conclusion)
    assert end_active_report(out).accepted
    assert check_csgl(out).accepted
    assert stats["permutations"] == 1


def test_end_active_two_permutations():
    tau = pf("p | ~p")
    c0 = pls(" |- x: [](p | ~p) | ~~q")
    (c1,) = premises_of("csgl", "orR", {"label": "x", "principal": pf("[](p | ~p) | ~~q")}, c0)
    m_boxr = {"label": "x", "fresh": "y", "phi": tau}
    (c2,) = premises_of("csgl", "boxR", m_boxr, c1)
    m_orry = {"label": "y", "principal": tau}
    (c3,) = premises_of("csgl", "orR", m_orry, c2)
    m_negx = {"label": "x", "principal": pf("~~q")}
    (c4,) = premises_of("csgl", "negR", m_negx, c3)
    m_negy = {"label": "y", "principal": pf("~p")}
    (c5,) = premises_of("csgl", "negR", m_negy, c4)
    leaf = Proof("csgl", "id1", c5, (), {"label": "y", "principal": P})
    n4 = Proof("csgl", "negR", c4, (leaf,), m_negy)
    n3 = Proof("csgl", "negR", c3, (n4,), m_negx)
    n2 = Proof("csgl", "orR", c2, (n3,), m_orry)
    n1 = Proof("csgl", "boxR", c1, (n2,), m_boxr)
    base = Proof("csgl", "orR", c0, (n1,), {"label": "x", "principal": pf("[](p | ~p) | ~~q")})
    assert check_csgl(base).accepted

    stats = {}
    out = to_end_active(base, stats)
    assert end_active_report(out).accepted
    assert out.conclusion == base.conclusion
    assert stats["permutations"] == 2


def test_end_active_pushes_initial_rules():
    # an id2 whose witness label is not a leaf at its node is pushed down,
    # deleting the pointless boxR expansion under it
    c0 = pls(" |- x: ~[]q | ([]q | []r)")
    m_or1 = {"label": "x", "principal": pf("~[]q | ([]q | []r)")}
    (c1,) = premises_of("csgl", "orR", m_or1, c0)
    m_or2 = {"label": "x", "principal": pf("[]q | []r")}
    (c2,) = premises_of("csgl", "orR", m_or2, c1)
    m_neg = {"label": "x", "principal": pf("~[]q")}
    (c3,) = premises_of("csgl", "negR", m_neg, c2)
    # c3: x: []q |- x: []q, x: []r  -- expand boxR on []r, close by id2 above
    m_boxr = {"label": "x", "fresh": "y", "phi": Atom("r")}
    (c4,) = premises_of("csgl", "boxR", m_boxr, c3)
    leaf = Proof("csgl", "id2", c4, (), {"label": "x", "principal": pf("[]q")})
    n4 = Proof("csgl", "boxR", c3, (leaf,), m_boxr)
    n3 = Proof("csgl", "negR", c2, (n4,), m_neg)
    n2 = Proof("csgl", "orR", c1, (n3,), m_or2)
    base = Proof("csgl", "orR", c0, (n2,), m_or1)
    assert check_csgl(base).accepted
    assert not end_active_report(base).accepted  # id2 witness x has child y

    out = to_end_active(base)
    assert end_active_report(out).accepted
    assert out.conclusion == base.conclusion
    # the pointless boxR is gone
    assert "boxR" not in out.rules_used()


def test_end_active_requires_simple_conclusion():
    goal = pls("x: p |- x: p")
    p = Proof("csgl", "id1", goal, (), {"label": "x", "principal": P})
    with pytest.raises(NotEndActive):
        to_end_active(p)


def test_end_active_corpus():
    for f in CORPUS:
        base = csgl_proof(f)
        out = to_end_active(base)
        assert end_active_report(out).accepted
        assert str(out.conclusion) == str(base.conclusion)
        assert check_csgl(out).accepted


# ---------------------------------------------------------------------------
# linearize

def test_linearize_single_id():
    goal = pls("x: p |- x: p")
    p = Proof("csgl", "id1", goal, (), {"label": "x", "principal": P})
    out = linearize(p)
    assert out.conclusion == parse_lns("p |- p")
    assert out.rule == "id1" and check_lngl(out).accepted


def test_linearize_requires_end_active():
    base = _negr_above_orr()
    with pytest.raises(NotEndActive):
        linearize(base)


def test_linearize_boxr_case_three():
    base = csgl_proof(pf("[](p | ~p)"))
    out = linearize(to_end_active(base))
    assert check_lngl(out).accepted
    assert out.conclusion == parse_lns(" |- [](p | ~p)")
    rules = [n.rule for _, n in out.nodes()]
    assert "boxR" in rules


def test_linearize_four_axiom():
    base = csgl_proof(pf("[]p -> [][]p"))
    out = linearize(to_end_active(base))
    assert check_lngl(out).accepted
    assert out.conclusion == parse_lns(" |- ~[]p | [][]p")


def test_linearize_corpus_checked():
    for f in CORPUS:
        out = linearize(to_end_active(csgl_proof(f)))
        assert check_lngl(out).accepted


# ---------------------------------------------------------------------------
# normalize_lngl

def test_normalize_boxr_free_identity():
    base = linearize(to_end_active(csgl_proof(pf("p | ~p"))))
    assert "boxR" not in base.rules_used()
    assert normalize_lngl(base) == base


def _fixture_4l_above_orl():
    # appendix configuration: 4L above the left premise of orL
    tau = pf("p | p")
    concl = parse_lns("[](p | p) |- []p")
    (c1,) = premises_of("lngl", "boxR", {"phi": P}, concl)
    (c2,) = premises_of("lngl", "boxL", {"phi": tau}, c1)
    m_orl = {"principal": tau}
    c3a, c3b = premises_of("lngl", "orL", m_orl, c2)
    (c4a,) = premises_of("lngl", "4L", {"phi": tau}, c3a)
    leaf_a = Proof("lngl", "id1", c4a, (), {"principal": P})
    n4 = Proof("lngl", "4L", c3a, (leaf_a,), {"phi": tau})
    leaf_b = Proof("lngl", "id1", c3b, (), {"principal": P})
    n_orl = Proof("lngl", "orL", c2, (n4, leaf_b), m_orl)
    n_boxl = Proof("lngl", "boxL", c1, (n_orl,), {"phi": tau})
    return Proof("lngl", "boxR", concl, (n_boxl,), {"phi": P})


def test_normalize_appendix_4l_below_orl():
    base = _fixture_4l_above_orl()
    assert check_lngl(base).accepted
    assert not normal_form_report(base).accepted
    out = normalize_lngl(base)
    assert out.conclusion == base.conclusion
    assert check_lngl(out).accepted
    assert normal_form_report(out).accepted
    # the 4L now sits directly above the boxR, below the boxL and the orL
    assert out.rule == "boxR" and out.premises[0].rule == "4L"
    assert out.premises[0].premises[0].rule == "boxL"
    assert out.premises[0].premises[0].premises[0].rule == "orL"


def test_normalize_wrong_order_simple():
    concl = parse_lns("[]p |- []p")
    (c1,) = premises_of("lngl", "boxR", {"phi": P}, concl)
    (c2,) = premises_of("lngl", "boxL", {"phi": P}, c1)
    (c3,) = premises_of("lngl", "4L", {"phi": P}, c2)
    leaf = Proof("lngl", "id1", c3, (), {"principal": P})
    n4 = Proof("lngl", "4L", c2, (leaf,), {"phi": P})
    nb = Proof("lngl", "boxL", c1, (n4,), {"phi": P})
    base = Proof("lngl", "boxR", concl, (nb,), {"phi": P})
    assert check_lngl(base).accepted
    assert not normal_form_report(base).accepted
    out = normalize_lngl(base)
    assert normal_form_report(out).accepted
    assert [n.rule for _, n in out.nodes()] == ["boxR", "4L", "boxL", "id1"]


def test_normalize_corpus():
    for f in CORPUS:
        base = linearize(to_end_active(csgl_proof(f)))
        out = normalize_lngl(base)
        assert normal_form_report(out).accepted
        assert out.conclusion == base.conclusion


# ---------------------------------------------------------------------------
# lngl_to_glseq

def test_lngl_to_glseq_id_maps_to_end_component():
    g = parse_lns("p |- // q, []r |- []r, s")
    p = Proof("lngl", "id2", g, (), {"principal": pf("[]r")})
    out = lngl_to_glseq(p)
    assert out.rule == "id" and out.conclusion == pgs("q, []r |- []r, s")
    assert check_glseq(out).accepted


def test_lngl_to_glseq_modal_block_partition():
    # Sigma1 = {a} (4L only), Sigma2 = {b} (both), Sigma3 = {c} (boxL only)
    a, b, c = Atom("a"), Atom("b"), Atom("c")
    concl = parse_lns("[]a, []b, []c |- []b")
    (c1,) = premises_of("lngl", "boxR", {"phi": b}, concl)
    (c2,) = premises_of("lngl", "4L", {"phi": a}, c1)
    (c3,) = premises_of("lngl", "4L", {"phi": b}, c2)
    (c4,) = premises_of("lngl", "boxL", {"phi": b}, c3)
    (c5,) = premises_of("lngl", "boxL", {"phi": c}, c4)
    leaf = Proof("lngl", "id1", c5, (), {"principal": b})
    n5 = Proof("lngl", "boxL", c4, (leaf,), {"phi": c})
    n4 = Proof("lngl", "boxL", c3, (n5,), {"phi": b})
    n3 = Proof("lngl", "4L", c2, (n4,), {"phi": b})
    n2 = Proof("lngl", "4L", c1, (n3,), {"phi": a})
    base = Proof("lngl", "boxR", concl, (n2,), {"phi": b})
    assert check_lngl(base).accepted and normal_form_report(base).accepted
    # the block premise reads []a, []b, b, c, []phi |- phi
    assert c5.end == pgs("[]a, []b, b, c, []b |- b")

    out = lngl_to_glseq(base)
    assert check_glseq(out).accepted
    assert out.conclusion == pgs("[]a, []b, []c |- []b")
    assert out.rule == "boxGL"
    assert sorted(str(g) for g in out.meta["gamma"]) == ["a", "b", "c"]
    assert out.premises[0].conclusion == pgs("[]a, []b, []c, a, b, c, []b |- b")


def test_lngl_to_glseq_rejects_non_normal():
    base = _fixture_4l_above_orl()
    with pytest.raises(NotNormalForm):
        lngl_to_glseq(base)


def test_lngl_to_glseq_corpus():
    for f in CORPUS:
        base = normalize_lngl(linearize(to_end_active(csgl_proof(f))))
        out = lngl_to_glseq(base)
        assert check_glseq(out).accepted
        assert out.conclusion == pgs(f" |- {f}")


# ---------------------------------------------------------------------------
# glseq_to_g3gl

def test_glseq_to_g3gl_id():
    p = Proof("glseq", "id", pgs("p |- p"), (), {"principal": P})
    out = glseq_to_g3gl(p)
    assert out.rule == "id1"
    assert out.conclusion == pls("x: p |- x: p")
    assert check_g3gl(out, "extended").accepted


def test_glseq_to_g3gl_corpus():
    for f in CORPUS:
        g = lngl_to_glseq(normalize_lngl(linearize(to_end_active(csgl_proof(f)))))
        out = glseq_to_g3gl(g)
        assert check_g3gl(out, "extended").accepted
        assert out.conclusion == pls(f" |- x: {f}")


def test_embed_csgl():
    base = csgl_proof(LOB)
    out = csgl_to_g3gl_embed(base)
    assert check_g3gl(out, "extended").accepted
    # proofs with 4L are rejected in strict mode
    uses_4l = "4L" in base.rules_used()
    if uses_4l:
        assert not check_g3gl(out, "strict").accepted


# ---------------------------------------------------------------------------
# unfold_glcirc

def lob_cyclic():
    gam = (pf("~[]p | p"),)
    seqA = pgs("[](~[]p | p), ~[]p | p |- p")
    open_leaf = Proof("k4seq", "open", seqA, (), {})
    n_c1 = Proof("k4seq", "box4", pgs("[](~[]p | p) |- []p, p"), (open_leaf,),
                 {"gamma": gam, "phi": P})
    n_b1 = Proof("k4seq", "negL", pgs("[](~[]p | p), ~[]p |- p"), (n_c1,),
                 {"principal": pf("~[]p")})
    n_b2 = Proof("k4seq", "id", pgs("[](~[]p | p), p |- p"), (), {"principal": P})
    n_A = Proof("k4seq", "orL", seqA, (n_b1, n_b2), {"principal": pf("~[]p | p")})
    n_root = Proof("k4seq", "box4", pgs("[](~[]p | p) |- []p"), (n_A,),
                   {"gamma": gam, "phi": P})
    return CyclicDerivation(n_root, {(0, 0, 0, 0): (0,)})


def test_unfold_depth_zero():
    d = lob_cyclic()
    out = unfold_glcirc(d, 0)
    assert out.node_count() == d.derivation.node_count()
    opens = [n for _, n in out.nodes() if n.rule == "open"]
    assert len(opens) == 1 and opens[0].meta["target"] == opens[0].conclusion


def test_unfold_depth_one_grows_by_cycle_length():
    d = lob_cyclic()
    before = d.derivation.node_count()
    out = unfold_glcirc(d, 1)
    cycle_copy = d.derivation.at((0,)).node_count()
    assert out.node_count() == before - 1 + cycle_copy


def test_unfold_depth_two_box4_on_every_open_path():
    out = unfold_glcirc(lob_cyclic(), 2)

    def paths(n, rules=()):
        if n.rule == "open":
            yield rules
        for q in n.premises:
            yield from paths(q, rules + (n.rule,))

    found = list(paths(out))
    assert found
    for rules in found:
        assert rules.count("box4") >= 2


def test_unfold_internal_nodes_valid():
    out = unfold_glcirc(lob_cyclic(), 2)
    for addr, node in out.nodes():
        if node.rule == "open":
            continue
        expected = premises_of("k4seq", node.rule, node.meta, node.conclusion)
        assert [q.conclusion for q in node.premises] == expected
