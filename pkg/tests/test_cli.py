import json

import pytest

from stratus.cli import (
    EXIT_INPUT,
    EXIT_NEGATIVE,
    EXIT_OK,
    dumps,
    entry_argv,
    main,
    run,
    sweep_key,
)
from stratus.stratmod import StratModule


def output(capsys, argv):
    code = main(argv)
    return code, capsys.readouterr().out


class TestPadicCommands:
    def test_lucas(self):
        code, rep = run(["lucas", "--p", "3", "--alpha", "5", "--n", "2"])
        assert code == EXIT_OK and rep["residue"] == 1 and rep["integer_check"] == 1
        assert run(["lucas", "--p", "7", "--alpha", "0", "--n", "4"])[1]["residue"] == 0

    def test_digits(self):
        code, rep = run(["digits", "--p", "5", "--alpha", "-1/2", "--k-max", "4"])
        assert code == EXIT_OK and rep["digits"] == [2, 2, 2, 2]
        assert rep["profile"] == "[](2)"

    @pytest.mark.parametrize("argv", [
        ["lucas", "--p", "4", "--alpha", "1", "--n", "1"],
        ["lucas", "--p", "3", "--alpha", "1/3", "--n", "1"],
        ["digits", "--p", "5", "--alpha", "x/2"],
        ["digits", "--p", "5"],
        ["nonsense"],
        [],
    ])
    def test_input_errors(self, argv):
        code, rep = run(argv)
        assert code == EXIT_INPUT and "error" in rep


class TestHg:
    def test_criterion_holds(self):
        code, rep = run(["hg", "--p", "3", "--alpha", "1/2", "--beta", "1/2", "--gamma", "1",
                         "--criterion"])
        assert code == EXIT_OK and "error" not in rep
        assert rep["criterion"]["holds"] and rep["criterion"]["k0"] == 1

    def test_trivial_parameters_criterion(self):
        code, rep = run(["hg", "--p", "5", "--alpha", "0", "--beta", "0", "--gamma", "1",
                         "--criterion"])
        assert code == EXIT_OK and rep["criterion"]["holds"]

    def test_negative(self):
        code, rep = run(["hg", "--p", "5", "--alpha", "-1/2", "--beta", "-1/2", "--gamma", "1/2",
                         "--criterion", "--valuations", "--precision", "30"])
        assert code == EXIT_NEGATIVE and rep["error"]["code"] == "negative"
        assert not rep["criterion"]["holds"] and rep["criterion"]["witness"]
        assert min(v for _, v in rep["valuations"] if isinstance(v, int)) < 0

    def test_full_pipeline(self):
        code, rep = run(["hg", "--p", "3", "--alpha", "1", "--beta", "0", "--gamma", "1/8"])
        assert code == EXIT_OK
        assert rep["reduction"]["ok"] and rep["verification"]["first_solution"] == "pass"

    def test_reduction_failure_is_negative(self):
        code, rep = run(["hg", "--p", "3", "--alpha", "1/2", "--beta", "1/2", "--gamma", "1",
                         "--reduce"])
        assert code == EXIT_NEGATIVE and rep["reduction"]["error"]["n"] == 3

    def test_non_integral_parameter(self):
        code, rep = run(["hg", "--p", "3", "--alpha", "1/3", "--beta", "1", "--gamma", "1"])
        assert code == EXIT_INPUT


class TestModule:
    def test_tensor(self):
        code, rep = run(["module", "tensor", "e:1/2", "e:1/2", "--p", "3", "--order", "9"])
        assert code == EXIT_OK and "error" not in rep
        assert rep["exponents"]["0"]["exact"] == ["1"]
        assert rep["group"]["kind"] == "trivial"

    def test_dual_of_trivial(self):
        code, rep = run(["module", "dual", "trivial", "--p", "5", "--order", "25"])
        assert code == EXIT_OK and rep["group"]["kind"] == "trivial"
        assert all(e == "0" for m in rep["module"]["matrices"].values() for row in m for e in row)

    def test_pullback(self):
        code, rep = run(["module", "pullback", "e:1/3", "-e", "3", "--p", "5", "--order", "25"])
        assert code == EXIT_OK and rep["exponents"]["0"]["exact"] == ["1"]
        assert rep["group"]["kind"] == "trivial"

    def test_pullback_degree_divisible_by_p(self):
        code, _ = run(["module", "pullback", "e:1/3", "-e", "5", "--p", "5", "--order", "5"])
        assert code == EXIT_INPUT

    def test_symbol_group(self):
        code, rep = run(["module", "symbol", "0=1/2", "1=1/3", "--p", "5", "--order", "25"])
        assert code == EXIT_OK and rep["group"]["name"] == "mu_6"

    def test_round_trip_through_file(self, tmp_path):
        _, rep = run(["module", "e-alpha", "2/3", "--p", "5", "--order", "25"])
        assert StratModule.from_json(rep["module"]).to_json() == rep["module"]
        path = tmp_path / "m.json"
        path.write_text(json.dumps(rep["module"]))
        code, rep2 = run(["module", "check", f"@{path}", "--p", "5"])
        assert code == EXIT_OK and rep2["iterative"]["ok"]
        code, rep3 = run(["module", "exponents", f"@{path}", "--p", "5", "--point", "0"])
        assert code == EXIT_OK and list(rep3["exponents"]) == ["0"]

    def test_broken_module_file(self, tmp_path):
        _, rep = run(["module", "e-alpha", "2/3", "--p", "5", "--order", "5"])
        rep["module"]["matrices"]["2"] = [["2/(z^2)"]]
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(rep["module"]))
        code, out = run(["module", "check", f"@{path}", "--p", "5"])
        assert code == EXIT_NEGATIVE and not out["iterative"]["ok"]
        assert run(["module", "check", "@/nonexistent.json", "--p", "5"])[0] == EXIT_INPUT
        assert run(["module", "check", f"@{path}", "--p", "3"])[0] == EXIT_INPUT


class TestProjsys:
    def test_periodic(self):
        code, rep = run(["projsys", "--p", "2", "--bits", "[](10)"])
        assert code == EXIT_OK and rep["group"]["name"] == "mu_3"
        assert rep["alpha"] == "-1/3" and rep["exponent"] == "1/3"

    def test_finite(self):
        code, rep = run(["projsys", "--p", "2", "--bits", "[101](0)", "--group"])
        assert code == EXIT_OK and rep["alpha"] == "5" and rep["group"]["kind"] == "trivial"
        assert "module" not in rep

    def test_all_zero(self):
        code, rep = run(["projsys", "--p", "7", "--bits", "[](0)", "--compile"])
        assert code == EXIT_OK and "group" not in rep
        assert all(m == [["0"]] for m in rep["module"]["matrices"].values())

    @pytest.mark.parametrize("bits", ["[](2)", "[12](0)", "nonsense"])
    def test_bad_bits(self, bits):
        assert run(["projsys", "--p", "3", "--bits", bits])[0] == EXIT_INPUT


class TestOutput:
    def test_byte_identical(self, capsys):
        argv = ["module", "symbol", "0=1/2", "1=-1/3", "--p", "5", "--order", "25"]
        c1, o1 = output(capsys, argv)
        c2, o2 = output(capsys, list(argv))
        assert c1 == c2 == EXIT_OK and o1 == o2
        assert o1 == dumps(json.loads(o1)) + "\n"

    def test_pretty(self, capsys):
        code, out = output(capsys, ["digits", "--p", "3", "--alpha", "1/2", "--pretty"])
        assert code == EXIT_OK and "digits" in out and not out.lstrip().startswith("{")

    def test_default_order_env(self, monkeypatch):
        monkeypatch.setenv("STRATUS_DEFAULT_ORDER", "4")
        _, rep = run(["module", "e-alpha", "1/2", "--p", "3"])
        assert rep["module"]["order_bound"] == 4
        monkeypatch.setenv("STRATUS_DEFAULT_ORDER", "zero")
        assert run(["module", "e-alpha", "1/2", "--p", "3"])[0] == EXIT_INPUT
        monkeypatch.delenv("STRATUS_DEFAULT_ORDER")
        assert run(["module", "e-alpha", "1/2", "--p", "3"])[1]["module"]["order_bound"] == 27


class TestSweep:
    ENTRIES = [
        {"command": "lucas", "p": 3, "alpha": "5", "n": 2},
        {"command": "hg", "p": 5, "alpha": "-1/2", "beta": "-1/2", "gamma": "1/2",
         "flags": ["criterion"]},
        {"command": "projsys", "p": 2, "bits": "[](10)", "flags": ["group"]},
        ["digits", "--p", "5", "--alpha", "-1/2", "--k-max", "4"],
        {"command": "module", "op": "tensor", "spec": ["e:1/2", "e:1/2"], "p": 3, "order": 9},
    ]

    def test_entry_argv(self):
        assert entry_argv(self.ENTRIES[0]) == ["lucas", "--alpha", "5", "--n", "2", "--p", "3"]
        assert entry_argv(self.ENTRIES[4])[:4] == ["module", "tensor", "e:1/2", "e:1/2"]

    def test_sweep(self, tmp_path, capsys):
        path = tmp_path / "sweep.json"
        path.write_text(json.dumps(self.ENTRIES))
        code, out = output(capsys, ["--sweep", str(path), "--workers", "2"])
        assert code == EXIT_OK
        res = json.loads(out)["results"]
        assert set(res) == {sweep_key(e) for e in self.ENTRIES}
        assert res[sweep_key(self.ENTRIES[1])]["exit"] == EXIT_NEGATIVE
        assert res[sweep_key(self.ENTRIES[2])]["report"]["group"]["name"] == "mu_3"
        code1, out1 = output(capsys, ["--sweep", str(path), "--workers", "1"])
        assert (code1, out1) == (code, out)

    def test_bad_sweep(self, tmp_path, capsys):
        path = tmp_path / "sweep.json"
        path.write_text('{"not": "a list"}')
        assert output(capsys, ["--sweep", str(path)])[0] == EXIT_INPUT
        path.write_text(json.dumps([{"p": 3}]))
        assert output(capsys, ["--sweep", str(path)])[0] == EXIT_INPUT
