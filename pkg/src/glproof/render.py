"""Renderers: proofs as rule trees and tree sequents as trees of flat
sequents, in text, DOT, or LaTeX (bussproofs) form."""

from __future__ import annotations

from .sequents import (
    OPEN,
    CyclicDerivation,
    LabeledSequent,
    Proof,
    TreeView,
    format_address,
    tree_view,
)
from .semantics import Model

RULE_TEX = {
    "negL": r"\neg L", "negR": r"\neg R", "orL": r"\lor L", "orR": r"\lor R",
    "boxL": r"\Box L", "boxR": r"\Box R", "boxGL": r"\Box_{GL}", "box4": r"\Box_4",
    "id": r"id", "id1": r"id_1", "id2": r"id_2", "ir": r"ir", "tr": r"tr",
    "4L": r"4L", "w": r"w", "cL": r"cL", "cR": r"cR", "cut": r"cut",
    "sub": r"(x/y)", OPEN: r"\circ",
}


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def render_proof_text(obj) -> str:
    if isinstance(obj, CyclicDerivation):
        root, backlinks = obj.derivation, obj.backlinks
    else:
        root, backlinks = obj, {}
    lines = []

    def walk(node: Proof, addr, depth):
        tag = node.rule
        if node.rule == OPEN and addr in backlinks:
            tag = f"open -> {format_address(backlinks[addr])}"
        lines.append(f"{'  ' * depth}[{tag}] {node.conclusion}")
        for i, q in enumerate(node.premises):
            walk(q, addr + (i,), depth + 1)

    walk(root, (), 0)
    return "\n".join(lines) + "\n"


def render_proof_dot(obj) -> str:
    if isinstance(obj, CyclicDerivation):
        root, backlinks = obj.derivation, obj.backlinks
    else:
        root, backlinks = obj, {}
    lines = ["digraph proof {", '  node [shape=box, fontname="monospace"];']
    ids = {}

    def walk(node: Proof, addr):
        ids[addr] = f"n{len(ids)}"
        label = f"{node.rule}\\n{_dot_escape(str(node.conclusion))}"
        lines.append(f'  {ids[addr]} [label="{label}"];')
        for i, q in enumerate(node.premises):
            child = addr + (i,)
            walk(q, child)
            lines.append(f"  {ids[addr]} -> {ids[child]};")

    walk(root, ())
    for leaf, target in backlinks.items():
        lines.append(f"  {ids[leaf]} -> {ids[target]} [style=dashed, constraint=false];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def render_proof_latex(obj) -> str:
    if isinstance(obj, CyclicDerivation):
        root, backlinks = obj.derivation, obj.backlinks
    else:
        root, backlinks = obj, {}
    lines = [r"\begin{prooftree}"]

    def tex_seq(s) -> str:
        return str(s).replace("|-", r"\vdash").replace("[]", r"\Box ").replace("~", r"\neg ")

    def walk(node: Proof, addr):
        for i, q in enumerate(node.premises):
            walk(q, addr + (i,))
        rule = RULE_TEX.get(node.rule, node.rule)
        if node.rule == OPEN:
            note = format_address(backlinks[addr]) if addr in backlinks else "open"
            lines.append(r"\AxiomC{$\cdots$}")
            lines.append(rf"\RightLabel{{$\to {note}$}}")
            lines.append(rf"\UnaryInfC{{${tex_seq(node.conclusion)}$}}")
            return
        lines.append(rf"\RightLabel{{${rule}$}}")
        if not node.premises:
            lines.append(r"\AxiomC{}")
            lines.append(rf"\UnaryInfC{{${tex_seq(node.conclusion)}$}}")
        elif len(node.premises) == 1:
            lines.append(rf"\UnaryInfC{{${tex_seq(node.conclusion)}$}}")
        else:
            lines.append(rf"\BinaryInfC{{${tex_seq(node.conclusion)}$}}")

    walk(root, ())
    lines.append(r"\end{prooftree}")
    return "\n".join(lines) + "\n"


def render_tree_sequent_dot(t: LabeledSequent) -> str:
    view = tree_view(t)
    lines = ["digraph treeseq {", '  node [shape=box, fontname="monospace"];']

    def walk(v: TreeView, path: str):
        name = f"t{path}"
        lines.append(f'  {name} [label="{v.label}: {_dot_escape(str(v.sequent))}"];')
        for i, c in enumerate(v.children):
            walk(c, f"{path}_{i}")
            lines.append(f"  {name} -> t{path}_{i};")

    walk(view, "0")
    lines.append("}")
    return "\n".join(lines) + "\n"


def render_tree_sequent_text(t: LabeledSequent) -> str:
    view = tree_view(t)
    lines = []

    def walk(v: TreeView, depth: int):
        lines.append(f"{'  ' * depth}{v.label}: {v.sequent}")
        for c in v.children:
            walk(c, depth + 1)

    walk(view, 0)
    return "\n".join(lines) + "\n"


def render_model_dot(m: Model) -> str:
    lines = ["digraph model {", "  node [shape=circle];"]
    for w in m.worlds:
        atoms = sorted(a for a, ws in m.valuation.items() if w in ws)
        label = w + (": " + " ".join(atoms) if atoms else "")
        lines.append(f'  "{w}" [label="{_dot_escape(label)}"];')
    for x, y in sorted(m.rel):
        lines.append(f'  "{x}" -> "{y}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
