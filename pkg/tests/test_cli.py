import io
import json

from app import constants
from app.cli import main
from app.services import psl2


def run(*argv):
    stdout, stderr = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=stdout, stderr=stderr)
    return code, stdout.getvalue(), stderr.getvalue()


def test_classify_diagonal():
    code, out, _ = run("classify", "--matrix", "5,0,0,1/5")
    assert code == constants.EXIT_OK
    assert out == "Hyperbolic ℓ=2, v(tr)=-1, oracle agrees\n"


def test_classify_json():
    code, out, _ = run("classify", "--matrix", "1,0,0,1", "--format", "json", "--no-oracle")
    assert code == constants.EXIT_OK
    body = json.loads(out)
    assert body["kind"] == "Elliptic"
    assert body["oracle_agrees"] is None


def test_classify_rejects_bad_determinant():
    code, out, err = run("classify", "--matrix", "1,1,1,1")
    assert code == constants.EXIT_VALIDATION_ERROR
    assert out == ""
    assert err.startswith("error: NotInSL2:")


def test_classify_needs_input():
    code, _, err = run("classify")
    assert code == constants.EXIT_VALIDATION_ERROR
    assert "ConfigValidationError" in err


def test_reduce_swaps_elliptic_forward():
    code, out, _ = run("reduce", "--matrix", "5,0,0,1/5", "--matrix", "1,0,0,1")
    assert code == constants.EXIT_OK
    assert json.loads(out)["word"] == "T 1 2"


def test_verify_word():
    pair = ("--matrix", "5,0,0,1/5", "--matrix", "1,0,0,1")
    code, out, _ = run("verify", *pair, "--word", "T 1 2", "--target", "elliptic")
    assert code == constants.EXIT_OK
    assert json.loads(out)["verified"] is True
    code, out, _ = run("verify", *pair, "--word", "")
    assert code == constants.EXIT_FAILURE
    assert json.loads(out)["verified"] is False


def test_certify_then_verify(q5, rng, tmp_path):
    entries = [psl2.encode(psl2.sample_hyperbolic(q5, rng, m=1)), psl2.encode(psl2.sample_elliptic(q5, rng))]
    tuple_args = [arg for entry in entries for arg in ("--entry", entry)]
    code, out, _ = run("certify", *tuple_args, "--word-length", "3")
    assert code == constants.EXIT_OK
    assert out.startswith("status=")
    path = tmp_path / "certificate.txt"
    path.write_text(out, encoding="utf-8")
    tuple_file = tmp_path / "tuple.txt"
    tuple_file.write_text("\n".join(entries) + "\n", encoding="utf-8")
    code, out, _ = run("verify", "--input", str(tuple_file), "--certificate", str(path))
    assert code == constants.EXIT_OK
    assert json.loads(out) == {"verified": True, "checked": "certificate"}


def test_prg_census_text_and_csv(tmp_path):
    csv_path = tmp_path / "orbits.csv"
    code, out, _ = run("prg-census", "--group", "PSL2", "--p", "5", "--k", "3", "--csv", str(csv_path))
    assert code == constants.EXIT_OK
    assert "orbits on generating tuples: 1" in out.splitlines()
    assert csv_path.read_text(encoding="utf-8").startswith("orbit_id,size,generating,trace_class,representative")


def test_prg_census_budget_refusal():
    code, _, err = run("prg-census", "--p", "13", "--k", "3")
    assert code == constants.EXIT_REFUSAL
    assert "BudgetExceeded" in err


def test_prg_census_rejects_large_prime():
    code, _, _ = run("prg-census", "--p", "101", "--k", "2")
    assert code == constants.EXIT_VALIDATION_ERROR


def test_experiment_treeaut_writes_json_lines(tmp_path):
    output = tmp_path / "treeaut.jsonl"
    code, out, _ = run(
        "experiment-treeaut", "--trials", "2", "--q", "2", "--depth", "8", "--seed", "1", "--output", str(output)
    )
    assert code == constants.EXIT_OK
    assert out == ""
    lines = output.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 3
    assert json.loads(lines[-1])["kind"] == "treeaut"


def test_normalize_experiment_to_stdout():
    code, out, _ = run("normalize", "--trials", "2", "--seed", "3")
    assert code == constants.EXIT_OK
    lines = out.splitlines()
    assert len(lines) == 3
    assert json.loads(lines[-1])["successes"] == 2


def test_experiment_density_checks_nd_level():
    code, _, err = run("experiment-density", "--trials", "1", "--nd-level", "40")
    assert code == constants.EXIT_VALIDATION_ERROR
    assert "nd_level" in err
