import json

import numpy as np
import pytest

from conftest import maximally_correlated, random_product_state, random_state
from prmi.cli import (
    EXIT_INVALID,
    EXIT_NO_CERTIFICATE,
    EXIT_OK,
    ParseError,
    ValidationError,
    load_pmf,
    load_state,
    main,
    save_state,
)


@pytest.fixture
def product_file(tmp_path, rng):
    path = tmp_path / "product.json"
    save_state(random_product_state(2, 2, rng), path)
    return path


@pytest.fixture
def correlated_file(tmp_path):
    path = tmp_path / "correlated.json"
    save_state(maximally_correlated(2), path)
    return path


class TestStateIO:
    def test_round_trip(self, tmp_path, rng):
        state = random_state(2, 3, rng)
        path = tmp_path / "state.json"
        save_state(state, path)
        loaded = load_state(path)
        assert loaded.d_a == 2 and loaded.d_b == 3
        assert np.max(np.abs(loaded.op.entries - state.op.entries)) <= 1e-15

    def test_loads_maximally_mixed(self, tmp_path):
        doc = {
            "d_a": 2,
            "d_b": 2,
            "matrix": [
                [{"re": 0.25 if i == j else 0.0, "im": 0.0} for j in range(4)]
                for i in range(4)
            ],
        }
        path = tmp_path / "mixed.json"
        path.write_text(json.dumps(doc))
        state = load_state(path)
        assert np.allclose(state.op.entries, np.eye(4) / 4)

    def test_trace_violation_named(self, tmp_path):
        doc = {
            "d_a": 2,
            "d_b": 2,
            "matrix": [
                [{"re": 0.9 / 4 if i == j else 0.0, "im": 0.0} for j in range(4)]
                for i in range(4)
            ],
        }
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(ValidationError) as err:
            load_state(path)
        assert err.value.invariant == "trace"

    def test_tiny_asymmetry_accepted(self, tmp_path, rng):
        state = random_state(2, 2, rng)
        mat = state.op.entries.copy()
        mat[0, 1] += 1e-15
        doc = {
            "d_a": 2,
            "d_b": 2,
            "matrix": [
                [{"re": float(z.real), "im": float(z.imag)} for z in row] for row in mat
            ],
        }
        path = tmp_path / "noisy.json"
        path.write_text(json.dumps(doc))
        loaded = load_state(path)
        assert np.allclose(loaded.op.entries, loaded.op.entries.conj().T)

    def test_garbage_raises_parse_error(self, tmp_path):
        path = tmp_path / "garbage.json"
        path.write_text("not json {")
        with pytest.raises(ParseError):
            load_state(path)

    def test_pmf_csv(self, tmp_path):
        path = tmp_path / "pmf.csv"
        path.write_text("0.4,0.1\n0.1,0.4\n")
        pmf = load_pmf(path)
        assert np.allclose(pmf.weights, [[0.4, 0.1], [0.1, 0.4]])

    def test_pmf_normalization_named(self, tmp_path):
        path = tmp_path / "pmf.csv"
        path.write_text("0.4,0.1\n0.1,0.3\n")
        with pytest.raises(ValidationError) as err:
            load_pmf(path)
        assert err.value.invariant == "normalization"


class TestMain:
    def test_product_run_exit_zero(self, product_file, tmp_path, capsys):
        out = tmp_path / "trace.json"
        code = main([str(product_file), "--alpha", "1.5", "--trace-out", str(out)])
        assert code == EXIT_OK
        doc = json.loads(out.read_text())
        assert abs(doc["final_x"]) <= 1e-9
        assert doc["terminated_by"] == "certificate"
        record = doc["records"][-1]
        assert set(record) == {"n", "x_n", "eps_n", "q_n", "wall_ms"}
        assert "final_x" in capsys.readouterr().out or True

    def test_out_of_range_alpha_rejected(self, correlated_file, tmp_path):
        out = tmp_path / "trace.json"
        code = main([str(correlated_file), "--alpha", "0.3", "--trace-out", str(out)])
        assert code == EXIT_INVALID

    def test_uncertified_flag_allows_exploration(self, correlated_file, tmp_path):
        out = tmp_path / "trace.json"
        code = main(
            [
                str(correlated_file),
                "--alpha",
                "0.3",
                "--uncertified",
                "--max-iter",
                "20",
                "--trace-out",
                str(out),
            ]
        )
        assert code == EXIT_NO_CERTIFICATE
        doc = json.loads(out.read_text())
        assert len(doc["records"]) == 21

    def test_sweep_writes_two_files(self, product_file, tmp_path):
        out = tmp_path / "sweep.json"
        code = main(
            [
                str(product_file),
                "--alpha",
                "0.75",
                "--alpha",
                "1.5",
                "--eps",
                "1e-4",
                "--trace-out",
                str(out),
            ]
        )
        assert code == EXIT_OK
        assert (tmp_path / "sweep-alpha-0.75.json").exists()
        assert (tmp_path / "sweep-alpha-1.5.json").exists()

    def test_max_iter_exit_three(self, tmp_path, rng):
        path = tmp_path / "state.json"
        save_state(random_state(2, 2, rng), path)
        out = tmp_path / "trace.json"
        code = main(
            [
                str(path),
                "--alpha",
                "2.0",
                "--eps",
                "1e-12",
                "--max-iter",
                "2",
                "--trace-out",
                str(out),
            ]
        )
        assert code == EXIT_NO_CERTIFICATE

    def test_classical_mode(self, tmp_path):
        pmf = tmp_path / "pmf.csv"
        pmf.write_text("0.4,0.1\n0.1,0.4\n")
        out = tmp_path / "trace.json"
        code = main(
            [str(pmf), "--mode", "classical", "--alpha", "2.0", "--trace-out", str(out)]
        )
        assert code == EXIT_OK
        doc = json.loads(out.read_text())
        assert doc["alpha"] == 2.0

    def test_missing_file_exit_two(self, tmp_path):
        code = main([str(tmp_path / "nope.json"), "--alpha", "1.5"])
        assert code == EXIT_INVALID

    def test_explicit_init_from_file(self, product_file, tmp_path):
        init = tmp_path / "init.json"
        init.write_text(
            json.dumps(
                {
                    "matrix": [
                        [{"re": 0.5, "im": 0.0}, {"re": 0.0, "im": 0.0}],
                        [{"re": 0.0, "im": 0.0}, {"re": 0.5, "im": 0.0}],
                    ]
                }
            )
        )
        out = tmp_path / "trace.json"
        code = main(
            [
                str(product_file),
                "--alpha",
                "1.5",
                "--init",
                f"file:{init}",
                "--trace-out",
                str(out),
            ]
        )
        assert code == EXIT_OK

    def test_support_tol_env(self, product_file, tmp_path, monkeypatch):
        monkeypatch.setenv("PRMI_SUPPORT_TOL", "1e-10")
        out = tmp_path / "trace.json"
        code = main([str(product_file), "--alpha", "1.5", "--trace-out", str(out)])
        assert code == EXIT_OK
        monkeypatch.setenv("PRMI_SUPPORT_TOL", "banana")
        assert main([str(product_file), "--alpha", "1.5", "--trace-out", str(out)]) == EXIT_INVALID
