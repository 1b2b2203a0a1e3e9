import io
import json
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from lrbac import cli, oracle
from lrbac.cli import corpus_files, run_cli

SCHEMA = json.loads((resources.files("lrbac") / "schema" / "envelope.schema.json")
                    .read_text(encoding="utf-8"))


def run_json(*argv):
    code, text = run_cli([*argv, "--json"])
    env = json.loads(text)
    jsonschema.validate(env, SCHEMA)
    return code, env


# -- the documented examples ---------------------------------------------------

def test_eval_filesystem_as_admin():
    assert run_cli(["eval", "--role", "Admin", "examples/filesystem.lr"]) == (0, '["data1"]')


def test_check_webserver_necessary():
    code, env = run_json("check", "--system", "necessary", "examples/webserver.lr")
    assert code == 0 and env["effect"] == "0"


def test_prove_amp():
    assert run_cli(["prove", "amp(A) >= A"]) == (0, "true")
    assert run_cli(["prove", "A >= amp(A)"]) == (1, "false")
    assert run_cli(["prove", "A | !A == 1"]) == (0, "true")
    assert run_cli(["prove", "A & B <= A"]) == (0, "true")


def test_prove_with_file_aliases():
    assert run_cli(["prove", "Admin >= Alice & Bob", "filesystem.lr"]) == (0, "true")


def test_check_amp_unguarded():
    code, env = run_json("check", "--amp", "examples/dte_unguarded.lr")
    assert code == 1 and env["status"] == "type_error"
    assert env["detail"]["rule"] == "t-mod-up′"
    code, text = run_cli(["check", "--amp", "examples/dte_unguarded.lr"])
    assert "t-mod-up′" in text


# -- each command ----------------------------------------------------------------

def test_check_prints_type_and_effect():
    code, text = run_cli(["check", "filesystem.lr"])
    assert code == 0
    assert text.splitlines() == ["type: [AdminAtom | Alice & Bob] Str",
                                 "effect: AdminAtom | Alice & Bob"]


def test_check_against_a_claimed_type():
    ok = ["check", "--system", "necessary", "webserver.lr",
          "--type", "Str -> [Admin & (Alice & Bob) & 0] Str"]
    bad = ["check", "--system", "necessary", "webserver.lr",
           "--type", "Str -> [Admin & (Alice & Bob) & Debug] Str"]
    assert run_cli(ok)[0] == 0
    code, env = run_json(*bad)
    assert code == 1 and env["detail"]["rule"] == "t-sub"


def test_check_definition():
    code, env = run_json("check", "booleans.lr", "--def", "tru_s")
    assert code == 0 and env["type"] == "[A] Unit -> [B] Unit -> [A | B] Unit"
    assert env["effect"] == "A | B"


def test_eval_role_error_detail():
    code, env = run_json("eval", "--role", "Charlie", "filesystem.lr")
    assert code == 1 and env["status"] == "role_error"
    assert env["detail"]["needed_role"] == "Alice & Bob | AdminAtom"
    assert env["detail"]["context_role"] == "Charlie"


def test_trace_lines():
    code, text = run_cli(["trace", "--role", "A", "dte_trace.lr"])
    lines = text.splitlines()
    assert code == 0 and len(lines) == 18 and lines[-1] == "[()]"
    assert all(line.startswith("⟨A⟩ ⊢ ") for line in lines[:-1])
    code, env = run_json("trace", "--role", "A", "dte_trace.lr")
    assert len(env["trace"]) == 18 and env["value"] == "[()]"


def test_sublang():
    assert run_cli(["sublang", "from_test.lr", "--def", "test_b"]) == (0, "true")
    assert run_cli(["sublang", "booleans.lr"]) == (1, "false")


def test_oracle_command():
    code, env = run_json("oracle", "--terms", "5", "--depth", "3")
    assert code == 0 and env["status"] == "ok"
    assert env["detail"]["checks"]["sufficiency"]["passed"] == 5


def test_oracle_failure_exit(monkeypatch):
    monkeypatch.setattr(oracle, "run_suite", lambda **kw: {
        "status": "harness_failure",
        "checks": {"progress": {"passed": 0, "failed": 1, "flagged": 0,
                                "counterexamples": [{"seed": 3, "detail": "stuck"}]}}})
    code, env = run_json("oracle")
    assert code == 1 and env["status"] == "harness_failure"


# -- error statuses and exit codes ----------------------------------------------

@pytest.mark.parametrize("argv,status,code", [
    (["eval", "--role", "1", "-"], "ok", 0),
    (["eval", "--amp", "--role", "1", "dte_trace.lr"], "amp_error", 1),
    (["eval", "--role", "1", "--fuel", "3", "dte_trace.lr"], "fuel_exhausted", 1),
    (["eval", "filesystem.lr"], "usage_error", 2),
    (["eval", "--role", "A &", "filesystem.lr"], "parse_error", 2),
    (["check", "no_such_file.lr"], "usage_error", 2),
    (["check", "filesystem.lr", "--def", "nope"], "usage_error", 2),
    (["check", "--system", "gamma", "filesystem.lr"], "usage_error", 2),
    (["prove", "A"], "usage_error", 2),
    (["frobnicate"], "usage_error", 2),
    (["eval", "--role", "1", "--fuel", "-1", "filesystem.lr"], "usage_error", 2),
])
def test_statuses(monkeypatch, argv, status, code):
    monkeypatch.setattr(sys, "stdin", io.StringIO("[1]"))
    got, env = run_json(*argv)
    assert (env["status"], got) == (status, code)


def test_stuck_and_parse_errors_from_stdin(monkeypatch):
    monkeypatch.setattr(sys, "stdin", io.StringIO("check 1"))
    assert run_json("eval", "--role", "1", "-")[1]["status"] == "stuck"
    monkeypatch.setattr(sys, "stdin", io.StringIO("let x ="))
    code, env = run_json("check", "-")
    assert (code, env["status"]) == (2, "parse_error")
    monkeypatch.setattr(sys, "stdin", io.StringIO("check 1"))
    code, env = run_json("check", "-")
    assert (code, env["status"]) == (1, "type_error")


def test_fuel_env_default(monkeypatch):
    monkeypatch.setenv("LRBAC_FUEL", "2")
    code, env = run_json("eval", "--role", "A", "dte_trace.lr")
    assert env["status"] == "fuel_exhausted"


# -- corpus-wide properties --------------------------------------------------------

CORPUS = corpus_files()


def test_corpus_is_complete():
    assert {"filesystem.lr", "webserver.lr", "dte_login.lr", "dte_guarded.lr",
            "dte_unguarded.lr", "booleans.lr", "from_test.lr"} <= set(CORPUS)


@pytest.mark.parametrize("name", CORPUS)
@pytest.mark.parametrize("system", ["sufficient", "necessary"])
def test_corpus_json_and_exit_codes(name, system):
    for amp in ([], ["--amp"]):
        code, env = run_json("check", "--system", system, *amp, name)
        assert code == cli.STATUS_EXIT[env["status"]]
        assert code in (0, 1)
        if env["status"] == "ok":
            assert env["type"] is not None


@pytest.mark.parametrize("name", CORPUS)
def test_check_then_eval_consistency(name):
    code, env = run_json("check", name)
    if code != 0 or env["effect"] is None:
        return
    code, out = run_json("eval", "--role", env["effect"], name)
    assert out["status"] != "role_error"


def test_installed_entry_point():
    proc = subprocess.run([sys.executable, "-m", "lrbac.cli", "prove", "amp(A) >= A"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "true"
    proc = subprocess.run([sys.executable, "-m", "lrbac.cli", "eval", "x.lr"],
                          capture_output=True, text=True)
    assert proc.returncode == 2 and "usage error" in proc.stderr
