import json
from pathlib import Path

import jsonschema
import pytest

from ptscarf.cli import build_parser, dumps, load_config, main

SCHEMA = json.loads((Path(__file__).parents[1] / "docs" / "report.schema.json").read_text())


def _load(path):
    data = json.loads(Path(path).read_text())
    data.pop("timing")
    return data


@pytest.fixture(scope="module")
def full_report(tmp_path_factory):
    out = tmp_path_factory.mktemp("full") / "report.json"
    code = main(["full-report", "--out", str(out)], environ={})
    return code, out


class TestSerialisation:
    def test_floats_round_trip(self):
        assert dumps(0.1) == "0.10000000000000001"
        assert dumps(2.0) == "2.0"
        assert dumps(float("nan")) == "null"
        assert json.loads(dumps({"a": [1, 2.5, None, True]})) == {"a": [1, 2.5, None, True]}

    def test_rejects_unknown(self):
        with pytest.raises(TypeError):
            dumps(object())


class TestConfig:
    def test_flags_beat_file(self, tmp_path):
        cfg_file = tmp_path / "c.json"
        cfg_file.write_text(json.dumps({"alpha_im": 0.25, "n_max": 4}))
        args = build_parser().parse_args(["verify-orthonormality", "--n-max", "6"])
        cfg = load_config(args, {"PTSCARF_CONFIG": str(cfg_file)})
        assert cfg.alpha_im == 0.25 and cfg.n_max == 6

    def test_unknown_key(self, tmp_path, capsys):
        cfg_file = tmp_path / "c.json"
        cfg_file.write_text(json.dumps({"bogus": 1}))
        assert main(["verify-orthonormality"], {"PTSCARF_CONFIG": str(cfg_file)}) == 2
        assert "bogus" in capsys.readouterr().err

    def test_broken_phase_rejected(self, capsys):
        assert main(["verify-orthonormality", "--alpha-re", "0.4"], {}) == 2
        assert "Re(alpha) > 1/2" in capsys.readouterr().err

    def test_n_list(self):
        args = build_parser().parse_args(["verify-completeness", "--n-list", "3,7"])
        assert load_config(args, {}).n_list == (3, 7)

    def test_missing_directory_writes_nothing(self, tmp_path):
        out = tmp_path / "absent" / "r.json"
        assert main(["verify-completeness", "--out", str(out)], {}) == 2
        assert not out.parent.exists()
        assert list(tmp_path.iterdir()) == []


class TestRuns:
    def test_passing_suite_exits_zero(self, tmp_path):
        out = tmp_path / "r.json"
        assert main(["verify-completeness", "--out", str(out)], {}) == 0
        rep = json.loads(out.read_text())
        jsonschema.validate(rep, SCHEMA)
        assert rep["passed"] is True
        assert (tmp_path / "r_convergence.csv").read_text().startswith("function,N,sup_error")

    def test_failing_suite_exits_one(self, tmp_path):
        # the Schroedinger residual bar is not met by the 5-point stencil
        out = tmp_path / "r.json"
        assert main(["verify-orthonormality", "--out", str(out)], {}) == 1
        rep = json.loads(out.read_text())
        failed = {c["id"] for c in rep["checks"] if not c["passed"]}
        assert failed == {"schrodinger_residual"}

    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for path in (a, b):
            main(["verify-orthonormality", "--n-max", "6", "--out", str(path)], {})
        assert _load(a) == _load(b)
        text_a = json.dumps(_load(a), sort_keys=True)
        assert text_a == json.dumps(_load(b), sort_keys=True)

    def test_stdout_when_no_out(self, capsys):
        main(["verify-completeness", "--n-list", "5,10"], {})
        rep = json.loads(capsys.readouterr().out)
        assert rep["suite"] == "verify-completeness"

    def test_csv_index(self, tmp_path):
        out = tmp_path / "r.csv"
        main(["verify-completeness", "--format", "csv", "--out", str(out)], {})
        index = out.read_text().splitlines()
        assert index[0] == "suite,file,kind,passed"
        for line in index[1:]:
            assert (tmp_path / line.split(",")[1]).exists()


class TestFullReport:
    def test_schema_and_exit(self, full_report):
        code, out = full_report
        rep = json.loads(out.read_text())
        jsonschema.validate(rep, SCHEMA)
        assert code == (0 if rep["passed"] else 1)
        assert rep["timing"]["seconds"] < 300
        assert {s["suite"] for s in rep["suites"]} == {
            "verify-orthonormality", "compare-kernel", "verify-c-action", "verify-completeness"}

    def test_bit_identical(self, full_report, tmp_path):
        _, out = full_report
        again = tmp_path / "again.json"
        main(["full-report", "--parallel", "--out", str(again)], {})
        a, b = _load(out), _load(again)
        for r in a["suites"] + b["suites"]:
            r.pop("timing", None)
        assert a == b
        assert (out.with_name("report_samples.csv").read_text()
                == again.with_name("again_samples.csv").read_text())
