"""Command line driver: exit codes, text output, JSON payloads, the
interactive loop, and definition loading."""

import importlib.resources
import io
import json

import pytest

from basislam.cli import main


@pytest.fixture(scope="module")
def gates_path():
    return str(
        importlib.resources.files("basislam") / "corpus" / "gates.lb"
    )


class TestEval:
    def test_normal_form(self, capsys, gates_path):
        code = main(["eval", "NOT |0>", "--def", gates_path])
        out = capsys.readouterr().out
        assert code == 0
        assert "normal form: |1>" in out
        assert "steps: 2" in out
        assert "phase: 1" in out

    def test_global_phase_reported(self, capsys, gates_path):
        code = main(["eval", "Z |1>", "--def", gates_path])
        out = capsys.readouterr().out
        assert code == 0
        assert "normal form: |1>" in out
        assert "phase: -1" in out

    def test_trace_lists_rules(self, capsys, gates_path):
        code = main(["eval", "NOT |0>", "--trace", "--def", gates_path])
        out = capsys.readouterr().out
        assert code == 0
        assert "   1. Beta" in out
        assert "CaseMatch" in out

    def test_stuck_term(self, capsys):
        code = main(["eval", "|0> |1>"])
        out = capsys.readouterr().out
        assert code == 1
        assert "stuck: non-value in value position" in out
        assert "at: |0>" in out

    def test_json_normal_form(self, capsys, gates_path):
        code = main(["eval", "NOT |0>", "--json", "--def", gates_path])
        payload = json.loads(capsys.readouterr().out)
        assert code == 0
        assert payload["normal_form"] == "|1>"
        assert payload["steps"] == 2
        assert payload["phase"] == [1.0, 0.0]

    def test_json_stuck_with_trace(self, capsys):
        code = main(["eval", "|0> |1>", "--json", "--trace"])
        payload = json.loads(capsys.readouterr().out)
        assert code == 1
        assert payload["stuck"] == "non-value in value position"
        assert payload["at"] == "|0>"
        assert payload["trace"] == []


class TestCheck:
    def test_well_typed(self, capsys):
        code = main(["check", r"\x:B. x", "[B] -> [B]"])
        out = capsys.readouterr().out
        assert code == 0
        assert "well-typed: [B] -> [B]" in out
        assert "rule: UnitLam" in out

    def test_ill_typed(self, capsys):
        code = main(["check", r"\x:B. (x, x)", "#[B] -> #([B] * [B])"])
        out = capsys.readouterr().out
        assert code == 1
        assert "type error: linear variable duplicated: x" in out

    def test_json(self, capsys):
        code = main(["check", "|0>", "[B]", "--json"])
        payload = json.loads(capsys.readouterr().out)
        assert code == 0
        assert payload == {"ok": True, "rule": "Lit"}


class TestOrtho:
    def test_orthogonal(self, capsys):
        code = main(["ortho", "|0>", "|1>", "[B]"])
        assert code == 0
        assert capsys.readouterr().out.strip() == "orthogonal"

    def test_overlapping(self, capsys):
        plus = "(1/sqrt2)*|0> + (1/sqrt2)*|1>"
        code = main(["ortho", "|0>", plus, "#[B]"])
        assert code == 1
        assert capsys.readouterr().out.strip() == "not orthogonal"


class TestUnitary:
    def test_json_payload(self, capsys, gates_path):
        code = main(["unitary", "Hd", "--json", "--def", gates_path])
        payload = json.loads(capsys.readouterr().out)
        assert code == 0
        assert payload["label"] == "unitary"
        assert payload["unitary"] is True
        assert payload["square"] is True
        assert payload["basis"] == "B"
        assert payload["uncurried_over"] is None
        assert len(payload["matrix"]) == 2
        assert all(len(row) == 2 for row in payload["matrix"])
        root_half = 2.0 ** -0.5
        assert payload["matrix"][0][0] == pytest.approx([root_half, 0.0])

    def test_curried_gate_wrapped(self, capsys, gates_path):
        code = main(["unitary", "CNOT", "--def", gates_path])
        out = capsys.readouterr().out
        assert code == 0
        assert "uncurried over B x B" in out
        assert "unitary (deviation" in out

    def test_violation_reports_witness(self, capsys, gates_path):
        code = main(["unitary", "Cloner", "--def", gates_path])
        out = capsys.readouterr().out
        assert code == 1
        assert "not unitary (deviation 1)" in out
        assert "witness: gram entry (0,1)" in out

    def test_non_gate_input(self, capsys):
        code = main(["unitary", "|0>"])
        out = capsys.readouterr().out
        assert code == 1
        assert "error: matrix extraction needs a single abstraction" in out


class TestParse:
    def test_term_canonical_form(self, capsys):
        code = main(["parse", "(1/sqrt2)*|0> + (1/sqrt2)*|1>"])
        out = capsys.readouterr().out
        assert code == 0
        assert out.strip() == "(1/sqrt2)*|0> + (1/sqrt2)*|1>"

    def test_type_mode(self, capsys):
        code = main(["parse", "--type", "#[B]->#([B]*[B])"])
        assert code == 0
        assert capsys.readouterr().out.strip() == "#[B] -> #([B] * [B])"

    def test_json(self, capsys):
        code = main(["parse", "|01>", "--json"])
        assert code == 0
        assert json.loads(capsys.readouterr().out) == {"term": "|01>"}


class TestUsage:
    def test_parse_error_is_usage(self, capsys):
        code = main(["eval", "(|0>"])
        err = capsys.readouterr().err
        assert code == 2
        assert "error:" in err
        assert "expected ')'" in err

    def test_missing_definition_file(self, capsys):
        code = main(["eval", "|0>", "--def", "/nonexistent/defs.lb"])
        assert code == 2
        assert "error:" in capsys.readouterr().err

    def test_invalid_tolerance(self, capsys, eps_guard):
        code = main(["eval", "|0>", "--eps", "-1"])
        assert code == 2
        assert "error:" in capsys.readouterr().err

    def test_tolerance_applies(self, capsys, eps_guard):
        # squared coefficients sum to 0.9881: rejected at the default
        # tolerance, accepted once the tolerance absorbs the deficit
        argv = ["check", "0.8*|0> + 0.59*|1>", "#[B]"]
        assert main(argv) == 1
        capsys.readouterr()
        assert main(argv + ["--eps", "0.02"]) == 0

    def test_unknown_command_rejected(self):
        with pytest.raises(SystemExit) as e:
            main(["bogus"])
        assert e.value.code == 2


class TestCorpus:
    def test_table_passes(self, capsys):
        code = main(["corpus", "--json"])
        payload = json.loads(capsys.readouterr().out)
        assert code == 0
        assert payload["failed"] == 0
        assert payload["passed"] == len(payload["rows"]) > 0
        row = payload["rows"][0]
        assert set(row) == {"section", "name", "ok", "detail"}


class TestRepl:
    def _run(self, monkeypatch, capsys, script, argv=()):
        monkeypatch.setattr("sys.stdin", io.StringIO(script))
        code = main(["repl", *argv])
        return code, capsys.readouterr().out

    def test_session(self, monkeypatch, capsys, gates_path):
        script = "\n".join(
            [
                ":h",
                "NOT |1>",
                ":t Hd : #[B] -> #[B]",
                ":u Hd",
                ":u CNOT",
                "(|0>",
                ":q",
            ]
        )
        code, out = self._run(
            monkeypatch, capsys, script + "\n", ["--def", gates_path]
        )
        assert code == 0
        assert "commands:" in out
        assert "|0>  [steps 2, phase 1]" in out
        assert "well-typed via UnitLam" in out
        assert out.count("unitary (deviation") == 2
        assert "error:" in out

    def test_type_errors_do_not_exit(self, monkeypatch, capsys):
        script = ":t |0> : [X]\n|1>\n:q\n"
        code, out = self._run(monkeypatch, capsys, script)
        assert code == 0
        assert "type error:" in out
        assert "|1>" in out

    def test_eof_terminates(self, monkeypatch, capsys):
        code, out = self._run(monkeypatch, capsys, ":h\n")
        assert code == 0
        assert "commands:" in out
