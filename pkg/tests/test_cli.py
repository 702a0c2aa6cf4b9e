import json

import pytest

from matmulfree import Dataflow, parse_json
from matmulfree.cli import OUTPUT_DIR_ENV, main
from matmulfree.cost import COST_FUNCTIONS, cost_os


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_usage_error(capsys, *argv):
    with pytest.raises(SystemExit) as exc:
        main(list(argv))
    _, err = capsys.readouterr()
    return exc.value.code, err


def test_models_listing(capsys):
    code, out, _ = run(capsys, "models")
    assert code == 0
    rows = [l for l in out.splitlines() if l.startswith("| ") and not l.startswith("| name")]
    assert len(rows) == 13
    opt66 = next(r for r in rows if "opt-66b" in r)
    assert "WARNING" in opt66


def test_models_json(capsys):
    code, out, _ = run(capsys, "models", "--format", "json", "--no-timestamp")
    doc = json.loads(out)
    assert code == 0 and doc["kind"] == "models" and len(doc["payload"]) == 13
    assert [m["name"] for m in doc["payload"] if m["head_dim_warning"]] == ["opt-66b"]


def test_simulate_compute(capsys):
    code, out, _ = run(capsys, "simulate", "--model", "opt-1.3b", "--seqlen", "2048", "--hw", "cloud",
                       "--format", "json")
    rep = parse_json(out)[0]
    assert code == 0
    assert abs(rep.f_compute - 0.50) <= 0.10


def test_simulate_memory(capsys):
    code, out, _ = run(capsys, "simulate", "--model", "opt-350m", "--seqlen", "2048", "--hw", "cloud",
                       "--metric", "memory")
    assert code == 0
    assert "MatMul-free memory fraction = 0.7475" in out


def test_simulate_two_seqlens_share_projection_cycles(capsys):
    _, out, _ = run(capsys, "simulate", "--model", "opt-350m", "--seqlen", "128", "--seqlen", "4096",
                    "--format", "json", "--no-timestamp")
    lo, hi = parse_json(out)
    assert lo.cycles_projection == hi.cycles_projection
    assert lo.cycles_attention < hi.cycles_attention


def test_simulate_csv_has_every_op(capsys):
    _, out, _ = run(capsys, "simulate", "--model", "gpt-125m", "--seqlen", "128", "--format", "csv")
    assert len(out.splitlines()) == 1 + 30


@pytest.mark.parametrize(
    "argv",
    [
        ("simulate", "--model", "gpt-5"),
        ("simulate", "--model", "opt-350m", "--hw", "mainframe"),
        ("simulate", "--model", "opt-350m", "--seqlen", "8192"),
        ("simulate", "--model", "opt-350m", "--seqlen", "0"),
        ("sweep", "--seqlen", "128"),
        ("amdahl", "--model", "opt-350m", "--s-max", "0"),
        ("footprint", "--precision", "fp4"),
        ("dataflows",),
        ("frobnicate",),
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    code, err = run_usage_error(capsys, *argv)
    assert code == 2
    assert "error" in err


def test_sweep_opt_cloud(capsys):
    code, out, _ = run(capsys, "sweep", "--family", "opt", "--format", "csv")
    lines = out.splitlines()
    assert code == 0 and len(lines) == 7
    cells = [float(v) for line in lines[1:] for v in line.split(",")[1:]]
    assert abs(min(cells) - 0.23) <= 0.10 and abs(max(cells) - 0.98) <= 0.10


def test_sweep_edge_cells(capsys):
    _, out, _ = run(capsys, "sweep", "--family", "opt", "--hw", "edge", "--format", "json")
    grid = parse_json(out)
    for l, row in zip(grid.seqlens, grid.cells):
        for name, v in zip(grid.models, row):
            if (name, l) != ("opt-350m", 4096):
                assert v > 0.5


def test_sweep_mixed_selectors_and_dataflow(capsys):
    _, out, _ = run(capsys, "sweep", "--model", "gpt-125m", "--family", "llama", "--seqlen", "512",
                    "--dataflow", "ws", "--format", "json")
    grid = parse_json(out)
    assert grid.models == ("gpt-125m", "llama-7b", "llama-13b")
    assert grid.hardware.dataflow is Dataflow.WS


def test_amdahl_large_model_favors_projections(capsys):
    _, out, _ = run(capsys, "amdahl", "--model", "opt-66b", "--seqlen", "2048", "--hw", "cloud",
                    "--format", "json")
    cs = parse_json(out)
    assert cs.projection.samples[-1][1] > 5 * cs.attention.samples[-1][1]


def test_amdahl_small_model_favors_attention(capsys):
    _, out, _ = run(capsys, "amdahl", "--model", "opt-350m", "--seqlen", "2048", "--format", "json")
    cs = parse_json(out)
    assert cs.attention.asymptote > cs.projection.asymptote


def test_amdahl_single_point(capsys):
    _, out, _ = run(capsys, "amdahl", "--model", "opt-6.7b", "--s-max", "1", "--format", "csv")
    assert out.splitlines()[1:] == ["1,1.000000,1.000000"]


def test_dataflows_model(capsys):
    _, out, _ = run(capsys, "dataflows", "--model", "llama-13b", "--seqlen", "4096", "--hw", "edge",
                    "--format", "json")
    payload = json.loads(out)["payload"]
    totals = {r["dataflow"]: r["total_cycles"] for r in payload["rows"]}
    assert list(totals) == ["OS", "WS", "IS"]
    assert totals["OS"] <= totals["WS"] and totals["OS"] <= totals["IS"]
    assert "OS" in payload["best"]


def test_dataflows_unit_shape(capsys):
    _, out, _ = run(capsys, "dataflows", "--shape", "1", "1", "1", "--format", "csv")
    rows = out.splitlines()[1:]
    assert len(rows) == 3
    assert all(r.split(",")[3] == "2" for r in rows)


def test_validate_passes(capsys):
    code, out, _ = run(capsys, "validate")
    assert code == 0
    assert "shapes checked: 12288" in out and "mismatches: 0" in out


def test_validate_fails_on_injected_off_by_one(capsys, monkeypatch):
    def broken(op, hw):
        c = cost_os(op, hw)
        return type(c)(c.compute_cycles + 1, c.folds, c.mac_count, c.utilization)

    monkeypatch.setitem(COST_FUNCTIONS, Dataflow.OS, broken)
    code, out, _ = run(capsys, "validate", "--max-mk", "3", "--max-n", "1", "--max-array", "2")
    assert code == 1
    listed = [l for l in out.splitlines() if l.startswith("  OS")]
    assert len(listed) == 10
    assert out.rstrip().endswith("FAIL")


def test_footprint(capsys):
    code, out, _ = run(capsys, "footprint", "--model", "opt-350m", "--layers", "24", "--format", "json")
    rows = {r["precision"]: r for r in json.loads(out)["payload"]}
    assert code == 0
    assert rows["fp16"]["bytes_per_block"] == 16 * rows["binary"]["bytes_per_block"]
    assert rows["fp16"]["bytes_per_block"] == 8 * rows["ternary"]["bytes_per_block"]
    assert rows["binary"]["bytes_24_layers"] == 24 * rows["binary"]["bytes_per_block"]


def test_out_and_output_dir(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path))
    code, out, _ = run(capsys, "sweep", "--model", "opt-350m", "--seqlen", "128", "--format", "csv",
                       "--out", "grids/one.csv")
    assert code == 0 and out == ""
    assert (tmp_path / "grids" / "one.csv").read_text().startswith("seqlen,opt-350m")
    absolute = tmp_path / "abs.md"
    run(capsys, "models", "--out", str(absolute))
    assert absolute.read_text().startswith("| name")


def test_hardware_and_model_config_files(capsys, tmp_path):
    hw = tmp_path / "mini.yaml"
    hw.write_text("rows: 64\ncols: 64\nsram_input_bytes: 1048576\nsram_output_bytes: 1048576\n"
                  "sram_weight_bytes: 2097152\n")
    model = tmp_path / "toy.yaml"
    model.write_text("name: toy\nd: 512\nh: 8\nd_ff: 2048\nseqlen_min: 64\nseqlen_max: 1024\n")
    code, out, _ = run(capsys, "simulate", "--model", str(model), "--hw", str(hw), "--seqlen", "64",
                       "--format", "json")
    rep = parse_json(out)[0]
    assert code == 0
    assert rep.model.name == "toy" and rep.hardware.rows == 64 and len(rep.per_op) == 22


def test_byte_identical_reruns(capsys):
    argv = ("sweep", "--family", "opt", "--format", "json", "--no-timestamp")
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second
    assert "generated_at" not in first
    _, stamped, _ = run(capsys, "sweep", "--family", "opt", "--format", "json")
    assert "generated_at" in json.loads(stamped)
