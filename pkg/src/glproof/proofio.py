"""Text formats: sequents (all four shapes) and proof files.

Proof files: line 1 `calculus: <id>`, then one parenthesized term per node,
`(rule <name> (concl "<sequent>") (meta k=v ...) (prems <node> ...))`.
Open leaves of cyclic derivations serialize as
`(open (concl "...") (backlink <addr>))` with `.` denoting the root address.
"""

from __future__ import annotations

import re

from .formula import Formula, ParseError, parse_formula, print_formula
from .sequents import (
    OPEN,
    Address,
    CyclicDerivation,
    GentzenSequent,
    LabeledSequent,
    LinearNestedSequent,
    Proof,
    Sequent,
    format_address,
    parse_address,
)

_REL_ATOM_RE = re.compile(r"^\s*([a-z][a-z0-9_]*)R([a-z][a-z0-9_]*)\s*$")
_LABEL_RE = re.compile(r"^[a-z][a-z0-9_]*$")


class SequentSyntaxError(Exception):
    pass


def _split_formulas(text: str) -> list[str]:
    return [part for part in (p.strip() for p in text.split(",")) if part]


def parse_gentzen_sequent(text: str) -> GentzenSequent:
    if "|-" not in text:
        raise SequentSyntaxError(f"missing |- in {text!r}")
    left, right = text.split("|-", 1)
    return GentzenSequent(
        [parse_formula(p) for p in _split_formulas(left)],
        [parse_formula(p) for p in _split_formulas(right)],
    )


def _parse_labeled_formula(chunk: str) -> tuple[str, Formula]:
    if ":" not in chunk:
        raise SequentSyntaxError(f"labeled formula needs a colon: {chunk!r}")
    lab, _, body = chunk.partition(":")
    lab = lab.strip()
    if not _LABEL_RE.match(lab):
        raise SequentSyntaxError(f"bad label {lab!r}")
    return lab, parse_formula(body)


def parse_labeled_sequent(text: str) -> LabeledSequent:
    chunks = text.split(";")
    rel = []
    for chunk in chunks[:-1]:
        m = _REL_ATOM_RE.match(chunk)
        if not m:
            raise SequentSyntaxError(f"bad relational atom {chunk.strip()!r}")
        rel.append((m.group(1), m.group(2)))
    body = chunks[-1]
    if "|-" not in body:
        raise SequentSyntaxError(f"missing |- in {text!r}")
    left, right = body.split("|-", 1)
    return LabeledSequent(
        rel,
        [_parse_labeled_formula(p) for p in _split_formulas(left)],
        [_parse_labeled_formula(p) for p in _split_formulas(right)],
    )


def parse_lns(text: str) -> LinearNestedSequent:
    return LinearNestedSequent(
        [parse_gentzen_sequent(part) for part in text.split("//")]
    )


def parse_sequent(calculus: str, text: str) -> Sequent:
    if calculus in ("glseq", "k4seq"):
        return parse_gentzen_sequent(text)
    if calculus in ("g3gl", "g3glext", "csgl"):
        return parse_labeled_sequent(text)
    if calculus == "lngl":
        return parse_lns(text)
    raise SequentSyntaxError(f"unknown calculus {calculus}")


def print_sequent(s: Sequent) -> str:
    return str(s)


# ---------------------------------------------------------------------------
# Proof term tokenizer / parser

_PROOF_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<lpar>\()
      | (?P<rpar>\))
      | (?P<quoted>"(?:[^"\\]|\\.)*")
      | (?P<bare>[^\s()"=]+=?)
    """,
    re.VERBOSE,
)


def _tokenize_proof(text: str) -> list[str]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _PROOF_TOKEN_RE.match(text, pos)
        if m is None:
            raise SequentSyntaxError(f"bad proof token at offset {pos}")
        if m.lastgroup != "ws":
            tokens.append(m.group())
        pos = m.end()
    return tokens


def _parse_terms(tokens: list[str], i: int):
    """Parse one parenthesized term into (head, items); items are terms/strings."""
    if tokens[i] != "(":
        raise SequentSyntaxError(f"expected '(' at token {i}: {tokens[i]!r}")
    i += 1
    head = tokens[i]
    i += 1
    items = []
    while tokens[i] != ")":
        if tokens[i] == "(":
            sub, i = _parse_terms(tokens, i)
            items.append(sub)
        else:
            items.append(tokens[i])
            i += 1
    return (head, items), i + 1


def _unquote(tok: str) -> str:
    if tok.startswith('"') and tok.endswith('"'):
        return tok[1:-1].replace('\\"', '"').replace("\\\\", "\\")
    return tok


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


# meta keys and how their values serialize
_FORMULA_KEYS = ("principal", "phi")
_LABEL_KEYS = ("label", "aux", "fresh", "x", "y", "z")
_FLIST_KEYS = ("gamma",)
_INT_KEYS = ("component",)


def _encode_meta(calculus: str, meta: dict) -> str:
    parts = []
    for key in sorted(meta):
        value = meta[key]
        if key in _FORMULA_KEYS:
            parts.append(f"{key}={_quote(print_formula(value))}")
        elif key in _LABEL_KEYS:
            parts.append(f"{key}={value}")
        elif key in _FLIST_KEYS or key in ("ante", "cons"):
            parts.append(f"{key}={_quote(', '.join(print_formula(g) for g in value))}")
        elif key in _INT_KEYS:
            parts.append(f"{key}={value}")
        elif key == "added":
            parts.append(f"{key}={_quote(str(value))}")
        elif key == "backlink":
            parts.append(f"{key}={format_address(value)}")
        elif key == "target":
            parts.append(f"{key}={_quote(str(value))}")
        else:
            parts.append(f"{key}={_quote(str(value))}")
    return " ".join(parts)


def _decode_meta(calculus: str, pairs: list[str]) -> dict:
    # `key=value` arrives as one token for bare values, as `key=` followed by
    # a quoted token otherwise
    merged: list[str] = []
    i = 0
    while i < len(pairs):
        tok = pairs[i]
        if tok.endswith("=") and i + 1 < len(pairs):
            merged.append(tok + pairs[i + 1])
            i += 2
        else:
            merged.append(tok)
            i += 1
    meta: dict = {}
    for pair in merged:
        if "=" not in pair:
            raise SequentSyntaxError(f"bad meta entry {pair!r}")
        key, _, raw = pair.partition("=")
        value = _unquote(raw)
        if key in _FORMULA_KEYS:
            meta[key] = parse_formula(value)
        elif key in _LABEL_KEYS:
            meta[key] = value
        elif key in _FLIST_KEYS or key in ("ante", "cons"):
            meta[key] = tuple(parse_formula(p) for p in _split_formulas(value))
        elif key in _INT_KEYS:
            meta[key] = int(value)
        elif key == "added":
            meta[key] = parse_labeled_sequent(value)
        elif key == "backlink":
            meta[key] = parse_address(value)
        elif key == "target":
            meta[key] = parse_sequent("k4seq", value)
        else:
            meta[key] = value
    return meta


def print_proof(obj) -> str:
    """Serialize a Proof or CyclicDerivation to the proof file format."""
    if isinstance(obj, CyclicDerivation):
        header = "calculus: glcirc"
        root = obj.derivation
        backlinks = obj.backlinks
    else:
        header = f"calculus: {obj.calculus}"
        root = obj
        backlinks = {}

    lines = [header]

    def emit(node: Proof, addr: Address, indent: int):
        pad = "  " * indent
        concl = _quote(str(node.conclusion))
        if node.rule == OPEN:
            target = backlinks.get(addr, node.meta.get("backlink"))
            if target is not None:
                lines.append(f"{pad}(open (concl {concl}) (backlink {format_address(target)}))")
            else:
                extra = ""
                if "target" in node.meta:
                    extra = f" (meta target={_quote(str(node.meta['target']))})"
                lines.append(f"{pad}(open (concl {concl}){extra})")
            return
        meta = _encode_meta(node.calculus, node.meta)
        meta_part = f" (meta {meta})" if meta else ""
        if node.premises:
            lines.append(f"{pad}(rule {node.rule} (concl {concl}){meta_part} (prems")
            for i, prem in enumerate(node.premises):
                emit(prem, addr + (i,), indent + 1)
            lines.append(f"{pad}))")
        else:
            lines.append(f"{pad}(rule {node.rule} (concl {concl}){meta_part} (prems))")

    emit(root, (), 0)
    return "\n".join(lines) + "\n"


def parse_proof(text: str):
    """Parse a proof file; returns a Proof, or a CyclicDerivation for glcirc."""
    lines = text.strip().splitlines()
    if not lines or not lines[0].startswith("calculus:"):
        raise SequentSyntaxError("proof file must start with 'calculus: <id>'")
    calculus = lines[0].split(":", 1)[1].strip()
    cyclic = calculus == "glcirc"
    node_calculus = "k4seq" if cyclic else calculus
    body = "\n".join(lines[1:])
    tokens = _tokenize_proof(body)
    term, end = _parse_terms(tokens, 0)
    if end != len(tokens):
        raise SequentSyntaxError("trailing content after proof term")

    backlinks: dict[Address, Address] = {}

    def build(t, addr: Address) -> Proof:
        head, items = t
        if head == "open":
            concl = None
            meta: dict = {}
            for item in items:
                if isinstance(item, tuple) and item[0] == "concl":
                    concl = parse_sequent(node_calculus, _unquote(item[1][0]))
                elif isinstance(item, tuple) and item[0] == "backlink":
                    backlinks[addr] = parse_address(item[1][0])
                elif isinstance(item, tuple) and item[0] == "meta":
                    meta = _decode_meta(node_calculus, item[1])
            if concl is None:
                raise SequentSyntaxError("open leaf without conclusion")
            return Proof(node_calculus, OPEN, concl, (), meta)
        if head != "rule":
            raise SequentSyntaxError(f"expected rule term, got {head!r}")
        name = items[0]
        concl = None
        meta = {}
        prems: list[Proof] = []
        for item in items[1:]:
            if not isinstance(item, tuple):
                raise SequentSyntaxError(f"unexpected token {item!r} in rule term")
            if item[0] == "concl":
                concl = parse_sequent(node_calculus, _unquote(item[1][0]))
            elif item[0] == "meta":
                meta = _decode_meta(node_calculus, item[1])
            elif item[0] == "prems":
                for i, sub in enumerate(item[1]):
                    prems.append(build(sub, addr + (i,)))
        if concl is None:
            raise SequentSyntaxError(f"rule {name} without conclusion")
        return Proof(node_calculus, name, concl, tuple(prems), meta)

    root = build(term, ())
    if cyclic:
        return CyclicDerivation(root, backlinks)
    return root
