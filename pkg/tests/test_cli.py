import math

import numpy as np
import pytest

from frachc.cli import main
from frachc.output import read_csv, write_csv
from frachc.structured import strang_skew_circulant
from frachc.frac_operator import build_operator
from frachc.model import Discretization, ModelParams


def _run(*argv):
    return main(list(argv))


class TestCsvFormat:
    def test_bit_exact_roundtrip(self, tmp_path, rng):
        values = list(rng.standard_normal(50)) + [1e-300, 1e300, -0.0, math.pi]
        path = tmp_path / "t.csv"
        write_csv(path, ["v"], [[v] for v in values])
        _, rows = read_csv(path)
        assert [r[0] for r in rows] == values

    def test_header_round_trip(self, tmp_path):
        path = tmp_path / "t.csv"
        write_csv(path, ["a", "b"], [[1, 2.5], [3, -4.5]])
        header, rows = read_csv(path)
        assert header == ["a", "b"]
        assert rows == [[1, 2.5], [3, -4.5]]


class TestSimulate:
    def test_smoke_produces_artifacts(self, tmp_path):
        out = tmp_path / "sim"
        rc = _run("simulate", "--problem", "example2", "--N", "16", "--M", "2",
                  "--T", "0.25", "--out", str(out))
        assert rc == 0
        for name in ("trace.csv", "final_state.csv", "summary.csv", "run.log"):
            assert (out / name).exists()
        header, rows = read_csv(out / "trace.csv")
        assert header[:3] == ["time", "energy", "modified_energy"]
        assert len(rows) == 2

    def test_byte_identical_reruns(self, tmp_path):
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            rc = _run("simulate", "--problem", "example2", "--N", "16",
                      "--M", "4", "--T", "0.5", "--out", str(out), "--plots")
            assert rc == 0
            outs.append(out)
        for fname in ("trace.csv", "final_state.csv", "summary.csv",
                      "energy_trace.svg", "final_profile.svg"):
            assert (outs[0] / fname).read_bytes() == (outs[1] / fname).read_bytes()

    def test_small_sigma_rejected(self, tmp_path):
        rc = _run("simulate", "--sigma", "0.01", "--N", "16", "--M", "4",
                  "--out", str(tmp_path / "x"))
        assert rc == 2

    def test_small_sigma_override(self, tmp_path):
        rc = _run("simulate", "--problem", "example2", "--sigma", "0.01",
                  "--allow-small-sigma", "--N", "16", "--M", "2",
                  "--T", "0.25", "--out", str(tmp_path / "x"))
        assert rc == 0


class TestOrderCommands:
    def test_order_time_layout(self, tmp_path):
        out = tmp_path / "ot"
        rc = _run("order-time", "--problem", "example1", "--alpha", "1.5",
                  "--N", "32", "--M", "4,8", "--out", str(out))
        assert rc == 0
        header, rows = read_csv(out / "order_time.csv")
        assert header == ["M", "tau", "err_inf", "co_inf_tau", "err_2",
                          "co_2_tau"]
        assert rows[0][3] == "" and rows[1][3] != ""

    def test_single_level_orders_blank(self, tmp_path):
        out = tmp_path / "ot1"
        rc = _run("order-time", "--problem", "example1", "--N", "32",
                  "--M", "8", "--out", str(out))
        assert rc == 0
        _, rows = read_csv(out / "order_time.csv")
        assert len(rows) == 1 and rows[0][3] == "" and rows[0][5] == ""

    def test_order_space_layout(self, tmp_path):
        out = tmp_path / "os"
        rc = _run("order-space", "--problem", "example_a", "--alpha", "1.2",
                  "--N", "8,16", "--M", "8", "--out", str(out))
        assert rc == 0
        header, rows = read_csv(out / "order_space.csv")
        assert header[0] == "N" and len(rows) == 2

    def test_example2_rejected(self, tmp_path):
        rc = _run("order-time", "--problem", "example2", "--N", "16",
                  "--M", "4,8", "--out", str(tmp_path / "bad"))
        assert rc == 2

    def test_orders_from_diagnostics_not_recomputed(self, tmp_path):
        out = tmp_path / "ot2"
        rc = _run("order-time", "--problem", "example1", "--N", "64",
                  "--M", "8,16", "--out", str(out))
        assert rc == 0
        _, rows = read_csv(out / "order_time.csv")
        (m1, t1, e1, _, e21, _), (m2, t2, e2, co, e22, co2) = rows
        assert co == pytest.approx(math.log(e1 / e2) / math.log(t1 / t2),
                                   rel=1e-12)
        assert co2 == pytest.approx(math.log(e21 / e22) / math.log(t1 / t2),
                                    rel=1e-12)


class TestSigmaSweep:
    def test_per_sigma_files(self, tmp_path):
        out = tmp_path / "sw"
        rc = _run("sigma-sweep", "--problem", "example1", "--sigma",
                  "0.0625,1", "--N", "16", "--M", "4,8", "--out", str(out),
                  "--plots")
        assert rc == 0
        assert (out / "sweep_sigma_0.0625.csv").exists()
        assert (out / "sweep_sigma_1.csv").exists()
        assert (out / "sigma_sweep.svg").exists()
        header, rows = read_csv(out / "sweep_sigma_1.csv")
        assert header == ["M", "tau", "err_inf", "err_2"]
        assert len(rows) == 2


class TestPrecondBench:
    def test_table_layout(self, tmp_path):
        out = tmp_path / "pb"
        rc = _run("precond-bench", "--problem", "example2", "--alpha", "1.2",
                  "--N", "16", "--T", "1.0", "--precond", "skew,circ",
                  "--out", str(out))
        assert rc == 0
        header, rows = read_csv(out / "precond_bench.csv")
        assert header == ["variant", "N", "M", "iter1", "iter2", "seconds"]
        assert [r[0] for r in rows] == ["skew", "circ"]
        assert all(r[1] == 16 and r[2] == 16 for r in rows)  # M defaults to N

    def test_dense_refused_above_cap(self, tmp_path):
        rc = _run("precond-bench", "--problem", "example2", "--N", "64",
                  "--T", "1.0", "--precond", "dense", "--dense-cap", "32",
                  "--out", str(tmp_path / "pb2"))
        assert rc == 2


class TestExportOperator:
    def test_exports_match_library(self, tmp_path):
        out = tmp_path / "exp"
        rc = _run("export-operator", "--problem", "example2", "--alpha",
                  "1.5", "--N", "8", "--M", "4", "--out", str(out))
        assert rc == 0
        _, rows = read_csv(out / "operator_G.csv")
        G = np.array(rows, dtype=float)
        np.testing.assert_array_equal(G, G.T)
        p = ModelParams(alpha=1.5, epsilon2=0.05, sigma=1.0 / 16.0,
                        L=math.pi, T=46.0)
        d = Discretization.build(p, N=8, M=4)
        op = build_operator(p, d)
        np.testing.assert_array_equal(G, op.dense())
        _, sk_rows = read_csv(out / "operator_sk_G.csv")
        sk = np.array(sk_rows, dtype=float)
        np.testing.assert_array_equal(sk[:, 0],
                                      strang_skew_circulant(op).first_column)
        _, j_rows = read_csv(out / "jacobian_first_newton.csv")
        assert np.array(j_rows, dtype=float).shape == (14, 14)

    def test_cap_refusal(self, tmp_path):
        rc = _run("export-operator", "--N", "64", "--dense-cap", "16",
                  "--out", str(tmp_path / "x"))
        assert rc == 2


class TestConfigFile:
    def test_toml_with_flag_override(self, tmp_path):
        cfg = tmp_path / "c.toml"
        cfg.write_text('problem = "example2"\nalpha = 1.2\nN = 16\nM = 2\n'
                       'T = 0.25\nout = "%s"\n' % (tmp_path / "from_toml"))
        rc = _run("simulate", "--config", str(cfg))
        assert rc == 0
        assert (tmp_path / "from_toml" / "summary.csv").exists()
        # flag overrides the file
        rc = _run("simulate", "--config", str(cfg), "--out",
                  str(tmp_path / "flag_wins"))
        assert rc == 0
        assert (tmp_path / "flag_wins" / "summary.csv").exists()

    def test_unknown_key_rejected(self, tmp_path):
        cfg = tmp_path / "c.toml"
        cfg.write_text("banana = 3\n")
        rc = _run("simulate", "--config", str(cfg))
        assert rc == 2

    def test_invalid_alpha_named_in_message(self, tmp_path, capsys):
        rc = _run("simulate", "--alpha", "2.5", "--N", "16", "--M", "4",
                  "--out", str(tmp_path / "x"))
        assert rc == 2
        assert "alpha" in capsys.readouterr().err
