import numpy as np
import pytest

from bsesolve import GeneratorSpec, ValidationError, generate
from bsesolve import fileio


def _ham(seed=0, m=5):
    return generate(GeneratorSpec(m=m, seed=seed))


class TestMatrixMarket:
    def test_round_trip_is_byte_identical(self, tmp_path):
        ham = _ham(3)
        p1, p2 = tmp_path / "a1.mtx", tmp_path / "a2.mtx"
        fileio.write_matrix_market(p1, ham.a)
        back = fileio.read_matrix_market(p1)
        np.testing.assert_array_equal(back, ham.a)
        fileio.write_matrix_market(p2, back)
        assert p1.read_bytes() == p2.read_bytes()

    def test_comments_are_skipped(self, tmp_path):
        p = tmp_path / "c.mtx"
        fileio.write_matrix_market(p, np.array([[1 + 2j]]), comment="hello\nworld")
        np.testing.assert_array_equal(fileio.read_matrix_market(p), [[1 + 2j]])

    def test_bad_header_rejected(self, tmp_path):
        p = tmp_path / "bad.mtx"
        p.write_text("%%MatrixMarket matrix coordinate real general\n1 1\n1.0\n")
        with pytest.raises(ValidationError):
            fileio.read_matrix_market(p)

    def test_malformed_entry_rejected(self, tmp_path):
        p = tmp_path / "bad2.mtx"
        p.write_text("%%MatrixMarket matrix array complex general\n1 1\n1.0\n")
        with pytest.raises(ValidationError):
            fileio.read_matrix_market(p)


class TestPchb:
    def test_round_trip_bit_identical(self, tmp_path):
        ham = _ham(4)
        p = tmp_path / "h.pchb"
        fileio.write_pchb(p, ham)
        back = fileio.read_pchb(p)
        np.testing.assert_array_equal(back.a, ham.a)
        np.testing.assert_array_equal(back.b, ham.b)
        p2 = tmp_path / "h2.pchb"
        fileio.write_pchb(p2, back)
        assert p.read_bytes() == p2.read_bytes()

    def test_magic_checked(self, tmp_path):
        p = tmp_path / "x.pchb"
        p.write_bytes(b"NOPE" + b"\0" * 32)
        with pytest.raises(ValidationError):
            fileio.read_pchb(p)

    def test_digest_is_deterministic(self, tmp_path):
        ham = _ham(5)
        p1, p2 = tmp_path / "d1.pchb", tmp_path / "d2.pchb"
        fileio.write_pchb(p1, ham)
        fileio.write_pchb(p2, ham)
        assert fileio.digest64(p1) == fileio.digest64(p2)
        assert len(fileio.digest64(p1)) == 16


class TestPchv:
    def test_round_trip(self, tmp_path):
        v = np.arange(12, dtype=complex).reshape(4, 3) * (1 - 0.5j)
        p = tmp_path / "v.bin"
        fileio.write_pchv(p, v)
        np.testing.assert_array_equal(fileio.read_pchv(p), v)


class TestCsv:
    def test_eigenvalues_survive_17_digit_round_trip(self, tmp_path):
        lams = np.array([-1.9364916731037085, 1e-300, 0.1 + 2.0 / 3.0])
        res = np.array([1e-12, 0.0, 3.5e-9])
        p = tmp_path / "e.csv"
        fileio.write_eigenvalues_csv(p, lams, res, "ab" * 8)
        rows = [
            line.split(",")
            for line in p.read_text().splitlines()
            if line and not line.startswith(("#", "index"))
        ]
        back = np.array([float(r[1]) for r in rows])
        np.testing.assert_array_equal(back, lams)
        assert "# input_digest: " + "ab" * 8 in p.read_text()

    def test_trace_csv_columns(self, tmp_path):
        ham = _ham(6, m=16)
        from bsesolve import SolverConfig, solve

        result = solve(ham, SolverConfig(nev=2, seed=6))
        p = tmp_path / "t.csv"
        fileio.write_trace_csv(p, result, "00" * 8)
        lines = [l for l in p.read_text().splitlines() if not l.startswith("#")]
        assert lines[0] == (
            "iter,locked,k,max_res,min_res_unlocked,mu_nevex,variant,"
            "lambda_min_M,flops"
        )
        assert len(lines) == 1 + len(result.trace)

    def test_manifest_fields(self, tmp_path):
        import json

        p = tmp_path / "manifest.json"
        fileio.write_manifest(p, "solve", {"nev": 2}, {"a": "00" * 8}, ["x.csv"], 7)
        doc = json.loads(p.read_text())
        assert doc["command"] == "solve"
        assert doc["seed"] == 7
        assert doc["inputs"] == {"a": "00" * 8}
        assert "written_utc" in doc
