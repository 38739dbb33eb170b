import json
import subprocess
import sys

import numpy as np
import pytest

from dualrisk import PowerUtility, PrelecWeighting, PremiumQuery, binary_spread, rdu_premium_approx, rdu_premium_exact, risk_from_json
from dualrisk.cli import main

PREMIUM = ["premium", "--model", "rdu", "--utility", "power:0.5", "--weighting", "prelec:0.65",
           "--w0", "10", "--p0", "0.3", "--eps1", "0.05", "--eps2", "1"]


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def csv_rows(text):
    lines = text.splitlines()
    header = lines[0].split(",")
    return header, np.array([[float(v) for v in line.split(",")] for line in lines[1:]])


class TestPremium:
    def test_rdu(self, capsys):
        code, out, _ = run(PREMIUM, capsys)
        assert code == 0
        d = json.loads(out)
        U, h = PowerUtility(0.5), PrelecWeighting(0.65)
        ref = rdu_premium_approx(U, h, 10.0, 0.3, binary_spread(0.05, 1.0))
        assert d["approx"] == ref.approx
        assert d["variance_term"] == ref.variance_term and d["maxiance_term"] == ref.maxiance_term
        assert d["exact"] == rdu_premium_exact(PremiumQuery(0.3, 0.05, 1.0, 10.0, U, h))

    def test_dt(self, capsys):
        code, out, _ = run(["premium", "--model", "dt", "--weighting", "pow:2", "--p0", "0.5", "--eps1", "0.1"], capsys)
        d = json.loads(out)
        assert code == 0
        assert d["exact"] == pytest.approx(-0.1, abs=1e-14) and d["approx"] == pytest.approx(-0.1, abs=1e-14)

    def test_eu(self, capsys):
        code, out, _ = run(["premium", "--model", "eu", "--utility", "power:0.5", "--w0", "4", "--p0", "0.5",
                            "--eps1", "0.5"], capsys)
        d = json.loads(out)
        assert d["approx"] == 0.0625 and d["exact"] == pytest.approx(0.0635083, abs=1e-7)

    def test_csv(self, capsys):
        code, out, _ = run(PREMIUM + ["--format", "csv"], capsys)
        assert code == 0
        header = out.splitlines()[0].split(",")
        assert "exact" in header and "moments.maxiance" in header


class TestIndex:
    def test_prelec_grid(self, capsys):
        code, out, _ = run(["index", "--weighting", "prelec:0.65", "--grid", "0.01:0.99:99"], capsys)
        assert code == 0
        header, data = csv_rows(out)
        assert header == ["p", "h", "h'", "h''", "local_index"]
        assert data.shape == (99, 5)
        h = PrelecWeighting(0.65)
        np.testing.assert_array_equal(data[:, 4], h.local_index(np.linspace(0.01, 0.99, 99)))

    def test_seventeen_digits(self, capsys):
        _, out, _ = run(["index", "--weighting", "prelec:0.65", "--grid", "0.1:0.9:3"], capsys)
        assert "0.10000000000000001" in out


class TestSurface:
    ARGS = ["surface", "--utility", "power:0.5", "--weighting", "prelec:0.65", "--w0", "0.5:10:40",
            "--p0", "0.01:0.99:50", "--m2-over-2pr", "1", "--mbar2-over-2pr", "1"]

    def test_grid(self, capsys):
        code, out, _ = run(self.ARGS, capsys)
        assert code == 0
        header, data = csv_rows(out)
        assert header == ["w0", "p0", "lambda_approx"]
        assert data.shape == (2000, 3)
        lam = data[:, 2].reshape(40, 50)
        assert np.all(np.diff(lam, axis=0) < 0)

    @pytest.mark.parametrize("ratio", ["3", "0.3333333333333333"])
    def test_ratio(self, ratio, capsys):
        _, out, _ = run(self.ARGS + ["--ratio", ratio], capsys)
        _, data = csv_rows(out)
        w, p = data[:, 0], data[:, 1]
        expected = float(ratio) * 0.5 / w + PrelecWeighting(0.65).local_index(p)
        np.testing.assert_allclose(data[:, 2], expected, rtol=1e-15, atol=1e-14)

    def test_deterministic_file(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(self.ARGS + ["--output", str(a)]) == 0
        assert main(self.ARGS + ["--output", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        assert b"\r" not in a.read_bytes()


class TestMoments:
    def test_round_trip(self, capsys, rng):
        for _ in range(20):
            n = int(rng.integers(2, 10))
            x = rng.normal(size=n)
            p = rng.dirichlet(np.ones(n))
            text = json.dumps({"atoms": [[a, b] for a, b in zip(x.tolist(), p.tolist())]})
            code, out, _ = run(["moments", "--risk", text], capsys)
            assert code == 0
            first = risk_from_json(out)
            code, again, _ = run(["moments", "--risk", out], capsys)
            assert risk_from_json(again).atoms == first.atoms
            assert again == out

    def test_binary_spread(self, capsys):
        _, out, _ = run(["moments", "--binary-spread", "0.1", "2"], capsys)
        d = json.loads(out)
        assert d["kind"] == "spread"
        assert d["variance"] == pytest.approx(0.8, abs=1e-15) and d["maxiance"] == pytest.approx(0.04, abs=1e-15)

    def test_from_file(self, capsys, tmp_path):
        f = tmp_path / "risk.json"
        f.write_text('{"atoms": [[1, 0.5], [-1, 0.5]]}')
        _, out, _ = run(["moments", "--risk", f"@{f}"], capsys)
        assert json.loads(out)["maxiance"] == 0.5


class TestOtherCommands:
    def test_gini(self, capsys):
        _, out, _ = run(["gini", "--risk", '{"atoms": [[1, 0.25], [2, 0.5], [3, 0.25]]}'], capsys)
        d = json.loads(out)
        assert d["gini"] == pytest.approx(d["maxiance"] / 2.0)

    def test_compare(self, capsys):
        code, out, _ = run(["compare", "--u1", "linear", "--h1", "identity", "--u2", "power:0.5", "--h2", "quad:0.5",
                            "--n-queries", "200", "--seed", "4"], capsys)
        assert code == 0
        d = json.loads(out)
        assert d["agree"] and d["condition_i"]["holds"] and d["condition_ii"]["holds"]
        assert d["n_queries"] == 220

    def test_compare_seeded(self, capsys):
        args = ["compare", "--u2", "power:0.5", "--h2", "prelec:0.65", "--n-queries", "100", "--seed", "11"]
        assert run(args, capsys)[1] == run(args, capsys)[1]

    def test_portfolio(self, capsys):
        code, out, _ = run(["portfolio", "--utility", "power:0.5", "--w0", "4", "--p0", "0.4", "--R0", "1",
                            "--R1", "1"], capsys)
        assert code == 0
        assert json.loads(out)["share"] == pytest.approx(20 / 13, abs=1e-10)

    def test_portfolio_contraction(self, capsys):
        _, out, _ = run(["portfolio", "--utility", "power:0.5", "--weighting", "pow:2", "--w0", "10", "--R0", "1",
                         "--R1", "3", "--zero-participation", "--eps1", "0.1"], capsys)
        d = json.loads(out)
        assert d["share"] == 0.0
        assert d["contraction_approx"] == pytest.approx(-0.1154701, abs=1e-7)

    def test_oracle_pairs(self, capsys):
        _, out, _ = run(["oracle", "maxiance-pairs", "--binary-spread", "0.1", "1"], capsys)
        d = json.loads(out)
        assert d["maxiance_pairs"] == pytest.approx(d["maxiance"], abs=1e-15)

    def test_oracle_mc_seeded(self, capsys):
        args = ["oracle", "maxiance-mc", "--risk", '{"atoms": [[-1, 0.5], [1, 0.5]]}', "--n-samples", "10000",
                "--seed", "3"]
        a, b = run(args, capsys)[1], run(args, capsys)[1]
        assert a == b and json.loads(a)["seed"] == 3

    def test_oracle_fd(self, capsys):
        _, out, _ = run(["oracle", "fd", "--weighting", "prelec:0.65", "--x", "0.5", "--order", "2"], capsys)
        d = json.loads(out)
        assert d["fd"] == pytest.approx(d["analytic"], rel=1e-5)

    def test_oracle_bisect(self, capsys):
        _, out, _ = run(["oracle", "bisect", "--utility", "linear", "--w0", "5", "--lhs-weight", "2",
                         "--rhs-value", "7", "--bracket=-10:10"], capsys)
        assert json.loads(out)["lambda"] == pytest.approx(1.5, abs=1e-12)


class TestErrors:
    @pytest.mark.parametrize(
        "argv",
        [[], ["nonsense"], ["premium", "--p0", "0.3"], ["premium", "--utility", "cubic:1", "--p0", "0.3", "--eps1", "0.1"],
         ["index", "--grid", "0:1:1"], ["moments", "--risk", "{not json"], ["surface", "--w0", "1:2", "--p0", "0.1:0.9:5"]],
    )
    def test_usage_errors(self, argv, capsys):
        code, out, err = run(argv, capsys)
        assert code == 2 and out == "" and err

    @pytest.mark.parametrize(
        "argv, name",
        [(["premium", "--utility", "power:3", "--p0", "0.3", "--eps1", "0.1", "--w0", "5"], "ParamOutOfRange"),
         (["premium", "--p0", "0.3", "--eps1", "0.4"], "ParamOutOfRange"),
         (["premium", "--utility", "power:0.5", "--w0", "0.5", "--p0", "0.5", "--eps1", "0.1"], "DomainViolation"),
         (["moments", "--risk", '{"atoms": [[1, 0.5], [2, 0.6]]}', "--kind", "lottery"], "MassNotOne"),
         (["moments", "--risk", '{"atoms": [[1, 0.1], [2, 0.1]]}'], "NotZeroMean"),
         (["gini", "--risk", '{"atoms": [[-1, 0.5], [1, 0.5]]}'], "ZeroMeanGini"),
         (["oracle", "maxiance-mc", "--risk", '{"atoms": [[-1, 0.5], [1, 0.5]]}', "--n-samples", "10"],
          "BadSampleCount"),
         (["oracle", "bisect", "--w0", "0", "--lhs-weight", "1", "--rhs-value", "1", "--bracket", "0:0.5"], "NoBracket"),
         (["portfolio", "--w0", "10", "--p0", "0.5", "--R0", "1", "--R1", "3", "--eps1", "0.1"],
          "NotAtZeroParticipation")],
    )
    def test_library_errors(self, argv, name, capsys):
        code, out, err = run(argv, capsys)
        assert code == 1 and out == ""
        assert err.strip().splitlines()[-1].startswith(name)
        assert "Traceback" not in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "dualrisk", *PREMIUM], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "maxiance_term" in json.loads(proc.stdout)
