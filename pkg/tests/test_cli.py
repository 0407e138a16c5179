import io
import json
import os

import pytest

from glproof.cli import run


def invoke(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


LOB = "[]([]p->p)->[]p"


def test_decide_proved_exit_zero():
    code, out, _ = invoke("decide", "--calculus", "csgl", LOB)
    assert code == 0
    assert out.startswith("calculus: csgl")


def test_decide_not_proved_exit_one():
    code, out, _ = invoke("decide", "[]p -> p")
    assert code == 1
    assert out.startswith("NotProved\t")
    assert "countermodel" in out


def test_decide_parse_error_exit_two():
    code, _, err = invoke("decide", "p |")
    assert code == 2 and "parse error" in err


def test_unknown_calculus_exit_two():
    code, _, _ = invoke("decide", "--calculus", "nope", "p")
    assert code == 2


def test_unknown_pass_exit_two(tmp_path):
    code, _, _ = invoke("transform", "--pass", "nope", "missing.glp")
    assert code == 2


def test_check_roundtrip(tmp_path):
    code, out, _ = invoke("decide", "--calculus", "csgl", LOB)
    path = tmp_path / "lob.glp"
    path.write_text(out)
    code, out2, _ = invoke("check", str(path))
    assert code == 0 and out2.strip() == "accepted"


def test_check_rejects_with_code_lines(tmp_path):
    text = (
        'calculus: glseq\n'
        '(rule id (concl "p |- q") (meta principal="p") (prems))\n'
    )
    path = tmp_path / "bad.glp"
    path.write_text(text)
    code, out, _ = invoke("check", str(path))
    assert code == 1
    lines = out.strip().splitlines()
    assert lines[0] == "rejected"
    fields = lines[1].split("\t")
    assert fields[0] == "SchemaMismatch" and fields[1] == "."


def test_check_json(tmp_path):
    text = (
        'calculus: glseq\n'
        '(rule id (concl "p |- q") (meta principal="p") (prems))\n'
    )
    path = tmp_path / "bad.glp"
    path.write_text(text)
    code, out, _ = invoke("check", "--format", "json", str(path))
    doc = json.loads(out)
    assert code == 1 and not doc["accepted"]
    assert doc["failures"][0]["code"] == "SchemaMismatch"


def test_oracle_valid_and_countermodel():
    code, out, _ = invoke("oracle", LOB)
    assert code == 0 and out.strip() == "Valid"
    code, out, _ = invoke("oracle", "[]p -> p")
    assert code == 1 and "Countermodel" in out and "worlds:" in out


def test_oracle_bound_flag():
    code, out, _ = invoke("oracle", "--bound", "1", "[][]p")
    assert code == 0 and "bound too small" in out


def test_pipeline_emit_trace(tmp_path):
    trace = tmp_path / "trace"
    code, out, _ = invoke("pipeline", "[]p->[][]p", "--emit-trace", str(trace))
    assert code == 0
    files = sorted(os.listdir(trace))
    assert files == [
        "01-csgl.glp", "02-end-active.glp", "03-lngl.glp",
        "04-normal.glp", "05-glseq.glp", "06-g3gl.glp",
    ]
    # every stage file re-checks under `check`
    for name in files:
        code, out2, _ = invoke("check", str(trace / name))
        assert code == 0, (name, out2)


def test_pipeline_unprovable_exit_one():
    code, out, _ = invoke("pipeline", "[]p")
    assert code == 1 and out.startswith("NotProved")


def test_byte_identical_invocations(tmp_path):
    runs = [invoke("pipeline", LOB, "--emit-trace", str(tmp_path / f"t{i}")) for i in (0, 1)]
    strip = lambda text: [l for l in text.splitlines() if not l.startswith("trace written")]
    assert strip(runs[0][1]) == strip(runs[1][1])
    for name in os.listdir(tmp_path / "t0"):
        a = (tmp_path / "t0" / name).read_text()
        b = (tmp_path / "t1" / name).read_text()
        assert a == b, name


def test_render_formats(tmp_path):
    code, out, _ = invoke("decide", "--calculus", "csgl", LOB)
    path = tmp_path / "lob.glp"
    path.write_text(out)
    code, dot, _ = invoke("render", "--format", "dot", str(path))
    assert code == 0 and dot.startswith("digraph proof")
    code, tex, _ = invoke("render", "--format", "latex", str(path))
    assert code == 0 and tex.startswith(r"\begin{prooftree}")
    code, txt, _ = invoke("render", "--format", "text", str(path))
    assert code == 0 and txt.startswith("[orR]")


def test_render_model_and_sequent(tmp_path):
    model = tmp_path / "m.glm"
    model.write_text("worlds: w u\nrel: w<u\nval p: u\n")
    code, dot, _ = invoke("render", "--format", "dot", str(model))
    assert code == 0 and dot.startswith("digraph model")
    code, txt, _ = invoke("render", "--sequent", "--format", "text",
                          "xRy; xRz; x: p |- z: q")
    assert code == 0 and txt.splitlines()[0].startswith("x:")


def test_transform_pass(tmp_path):
    code, out, _ = invoke("decide", "--calculus", "csgl", LOB)
    src = tmp_path / "lob.glp"
    src.write_text(out)
    dst = tmp_path / "ea.glp"
    code, _, err = invoke("transform", "--pass", "end-active", "-o", str(dst), str(src))
    assert code == 0 and "end-active" in err
    code, out2, _ = invoke("check", str(dst))
    assert code == 0


def test_formula_from_file(tmp_path):
    f = tmp_path / "lob.glf"
    f.write_text(LOB + "\n")
    code, _, _ = invoke("oracle", f"@{f}")
    assert code == 0
