import json
import subprocess
import sys

import pytest

from binclust.cli import DEFAULTS, main
from binclust.files import NonContiguousEdges, ParseError, parse_input, read_trace_partitions, to_json, write_dataset
from binclust.oracle import simulate_mixture_dataset
from binclust.types import BinLayout, BinnedDataset, NegativeFrequency

SHORT = ["--iters", "300", "--burnin", "100"]


@pytest.fixture
def table(tmp_path):
    path = tmp_path / "table.csv"
    path.write_text("# counts\n1.0,3\n2.0,0\n3.0,5\n\n4.0,2\n")
    return path


class TestParse:
    def test_centers(self, table):
        ds = parse_input(table)
        assert ds.freqs == (3, 0, 5, 2)
        assert ds.layout.edges == (0.5, 1.5, 2.5, 3.5, 4.5)

    def test_header(self, tmp_path):
        path = tmp_path / "h.csv"
        path.write_text("center,frequency\n1,2\n2,3\n")
        assert parse_input(path, header=True).freqs == (2, 3)
        with pytest.raises(ParseError):
            parse_input(path)

    def test_edges(self, tmp_path):
        path = tmp_path / "e.csv"
        path.write_text("0,1,4\n1,3,2\n")
        ds = parse_input(path, edges_format=True)
        assert ds.layout.edges == (0.0, 1.0, 3.0) and ds.freqs == (4, 2)

    def test_non_contiguous(self, tmp_path):
        path = tmp_path / "e.csv"
        path.write_text("0,1,4\n1.5,3,2\n")
        with pytest.raises(NonContiguousEdges):
            parse_input(path, edges_format=True)

    @pytest.mark.parametrize(
        "text, line",
        [("1,2\n3,1\n2,1\n", 3), ("1,2\n2,x\n", 2), ("1,2\n2,1.5\n", 2), ("1,2,3\n", 1)],
    )
    def test_errors_carry_line(self, tmp_path, text, line):
        path = tmp_path / "bad.csv"
        path.write_text(text)
        with pytest.raises(ParseError) as info:
            parse_input(path)
        assert info.value.line == line

    def test_negative(self, tmp_path):
        path = tmp_path / "neg.csv"
        path.write_text("1,2\n2,-1\n")
        with pytest.raises((ParseError, NegativeFrequency)):
            parse_input(path)

    @pytest.mark.parametrize("edges_format", [False, True])
    def test_round_trip(self, tmp_path, edges_format):
        ds = simulate_mixture_dataset(3)
        path = tmp_path / "rt.csv"
        write_dataset(ds, path, edges_format=edges_format)
        back = parse_input(path, edges_format=edges_format)
        assert back.freqs == ds.freqs and back.layout.edges == ds.layout.edges

    def test_uneven_edges_round_trip(self, tmp_path):
        ds = BinnedDataset(BinLayout((0.1, 0.30000000000000004, 2.0)), (1, 2))
        path = tmp_path / "u.csv"
        write_dataset(ds, path)
        assert parse_input(path, edges_format=True).layout.edges == ds.layout.edges


def test_to_json_floats():
    text = to_json({"a": 0.1, "b": [1, 2.0], "c": None})
    assert json.loads(text) == {"a": 0.1, "b": [1, 2.0], "c": None}
    assert "0.10000000000000001" in text


class TestCli:
    def test_defaults(self):
        assert (DEFAULTS["c"], DEFAULTS["a"], DEFAULTS["b"]) == (1.0, 1.1, 1.0)
        assert (DEFAULTS["iters"], DEFAULTS["burnin"]) == (30000, 20000)

    def test_missing_file(self, tmp_path, capsys):
        assert main(["fit", "--input", str(tmp_path / "nope.csv"), "--out", str(tmp_path)]) == 1
        assert "not found" in capsys.readouterr().err

    def test_bad_flag(self, tmp_path):
        with pytest.raises(SystemExit) as info:
            main(["fit", "--iters", "many"])
        assert info.value.code == 1

    def test_invalid_hyper(self, table, tmp_path):
        assert main(["fit", "--input", str(table), "--c", "-1", "--out", str(tmp_path)]) == 1

    def test_burnin_not_below_iters(self, table, tmp_path):
        assert main(["fit", "--input", str(table), "--iters", "10", "--burnin", "10", "--out", str(tmp_path)]) == 1

    def test_fit_outputs(self, table, tmp_path):
        out = tmp_path / "out"
        assert main(["fit", "--input", str(table), *SHORT, "--out", str(out)]) == 0
        summary = json.loads((out / "summary_chain1.json").read_text())
        assert summary["draws"] == 200 and summary["seed"] == 0
        assert sum(g["size"] for g in summary["groups"]) == 10
        assert len(read_trace_partitions(out / "trace_chain1.csv")) == 200
        assert (out / "density_chain1.csv").read_text().startswith("x,density\n")
        assert (out / "timing_chain1.json").exists()

    def test_config_rerun(self, table, tmp_path):
        first, second = tmp_path / "a", tmp_path / "b"
        assert main(["fit", "--input", str(table), *SHORT, "--seed", "11", "--c", "2.5", "--out", str(first)]) == 0
        table.unlink()  # the config carries the data
        assert main(["fit", "--config", str(first / "summary_chain1.json"), "--out", str(second)]) == 0
        for name in ("trace_chain1.csv", "density_chain1.csv"):
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_two_chains(self, table, tmp_path):
        out = tmp_path / "multi"
        assert main(["fit", "--input", str(table), *SHORT, "--chains", "2", "--out", str(out)]) == 0
        a = (out / "trace_chain1.csv").read_bytes()
        b = (out / "trace_chain2.csv").read_bytes()
        assert a != b

    def test_simulate(self, tmp_path):
        path = tmp_path / "sim.csv"
        assert main(["simulate", "--seed", "0", "--out", str(path)]) == 0
        assert parse_input(path).freqs == simulate_mixture_dataset(0).freqs

    def test_console_script(self, tmp_path):
        path = tmp_path / "sim.csv"
        proc = subprocess.run(
            [sys.executable, "-m", "binclust.cli", "simulate", "--n", "50", "--out", str(path)],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
        assert parse_input(path).n == 50
