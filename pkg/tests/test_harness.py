import json
import math
import xml.etree.ElementTree as ET
from dataclasses import replace

import numpy as np
import pytest

from shiftfrechet.harness import (
    RECORD_HEADER,
    BoxStats,
    ErrorRecord,
    ExperimentConfig,
    cell_seed,
    emit_boxplot_svg,
    emit_csv,
    read_records_csv,
    reference_bounds,
    run_and_write,
    run_experiment,
    summarize,
)

SVG_NS = "{http://www.w3.org/2000/svg}"


@pytest.fixture(scope="module")
def sim_records():
    return run_experiment(ExperimentConfig(scenario="SIM"))


def small(**kw):
    base = dict(n_list=[64, 128], J_list=[3, 6], repetitions=3)
    base.update(kw)
    return ExperimentConfig(**base)


def record(value, rep=0, n=512, J=20):
    return ErrorRecord("SIM", n, J, rep, rep, value, value, value, True, 1.0)


class TestConfig:
    def test_defaults(self):
        c = ExperimentConfig()
        assert (c.scenario, c.density, c.lam, c.repetitions) == ("SIM", "uniform:0.2", 7, 20)
        assert c.n_list == (512, 1024) and c.J_list == (20, 40, 60, 80, 100)
        assert c.sigma == 2.0
        st = ExperimentConfig(scenario="stationary")
        assert (st.sigma, st.varsigma, st.phi) == (8.0, 4.0, 4.0)
        ns = ExperimentConfig(scenario="nonstationary")
        assert (ns.sigma, ns.varsigma) == (8.0, 4.0)

    @pytest.mark.parametrize("bad", [
        {"lam": 8, "n_list": [16]}, {"repetitions": 0}, {"J_list": [1]},
        {"scenario": "x"}, {"density": "cauchy:1"}, {"sigma": -1.0}, {"optimizer": {"nope": 1}},
    ])
    def test_invalid(self, bad):
        with pytest.raises(ValueError):
            ExperimentConfig(**bad)

    def test_unknown_key(self):
        with pytest.raises(ValueError, match="unknown"):
            ExperimentConfig.from_dict({"scenario": "SIM", "colour": "red"})

    def test_roundtrip(self, tmp_path):
        c = small(sigma=1.5, optimizer={"multistarts": 2})
        p = tmp_path / "c.json"
        p.write_text(json.dumps(c.to_dict()))
        assert ExperimentConfig.load(p) == c


class TestRun:
    def test_noiseless_recovery(self):
        recs = run_experiment(small(sigma=0.0, repetitions=1, density="uniform:0.1"))
        assert len(recs) == 4
        assert all(r.shift_err <= 1e-8 for r in recs)

    def test_full_grid_bookkeeping(self, sim_records):
        assert len(sim_records) == 200
        cell = [r for r in sim_records if r.n == 512 and r.J == 20]
        assert len(cell) == 20 and len({r.seed for r in cell}) == 20
        assert all(math.isfinite(r.shift_err) and math.isfinite(r.pattern_err) for r in cell)
        assert all(r.converged for r in sim_records)
        assert len({r.seed for r in sim_records}) == 200

    def test_seed_derivation(self):
        assert cell_seed(1, "SIM", 512, 20, 0) != cell_seed(1, "SIM", 1024, 20, 0)
        assert cell_seed(1, "SIM", 512, 20, 0) != cell_seed(1, "stationary", 512, 20, 0)
        assert cell_seed(1, "SIM", 512, 20, 0, paired=True) == cell_seed(1, "stationary", 1024, 20, 0, paired=True)

    def test_paired_shares_shifts_across_n(self):
        recs = run_experiment(small(paired=True, repetitions=1))
        by = {(r.n, r.J): r.seed for r in recs}
        assert by[(64, 3)] == by[(128, 3)]

    def test_seed_isolation(self):
        a = run_experiment(small(repetitions=4))
        b = run_experiment(small(repetitions=2))
        assert [dataclass_no_ms(r) for r in a if r.rep < 2] == [dataclass_no_ms(r) for r in b]

    def test_minimum_viable_cell(self):
        recs = run_experiment(ExperimentConfig(n_list=[3], J_list=[2], lam=1, repetitions=2))
        assert len(recs) == 2
        assert all(math.isfinite(r.shift_err) for r in recs)

    def test_parallel_matches_serial(self):
        cfg = small(repetitions=2)
        a = [dataclass_no_ms(r) for r in run_experiment(cfg)]
        b = [dataclass_no_ms(r) for r in run_experiment(cfg, workers=2)]
        assert a == b


def dataclass_no_ms(r):
    return replace(r, ms=None)


class TestSummaries:
    def test_single(self):
        b = summarize([record(2.5)])[0]["shift_err"]
        assert b.median == 2.5 and b.q3 - b.q1 == 0

    def test_one_to_five(self):
        b = BoxStats.of([5, 3, 1, 4, 2])
        assert (b.min, b.q1, b.median, b.q3, b.max) == (1, 2, 3, 4, 5)

    def test_permutation_invariant(self, rng):
        recs = [record(float(v), rep=i) for i, v in enumerate(rng.normal(size=9))]
        s1 = summarize(recs)
        s2 = summarize([recs[i] for i in rng.permutation(9)])
        assert s1 == s2

    def test_grouping(self, sim_records):
        s = summarize(sim_records)
        assert len(s) == 10 and all(c["shift_err"].count == 20 for c in s)

    def test_empty(self):
        with pytest.raises(ValueError):
            summarize([])


class TestCsv:
    def test_header_only(self, tmp_path):
        p = emit_csv([], tmp_path / "e.csv")
        assert p.read_bytes() == (",".join(RECORD_HEADER) + "\r\n").encode()

    def test_line_count_and_roundtrip(self, tmp_path, sim_records):
        p = emit_csv(sim_records, tmp_path / "r.csv")
        assert len(p.read_text().splitlines()) == 201
        assert read_records_csv(p) == sim_records

    def test_roundtrip_exact_floats(self, tmp_path):
        recs = [record(0.1 + 0.2, rep=0), record(1e-300, rep=1), record(np.nextafter(1.0, 2.0), rep=2)]
        assert read_records_csv(emit_csv(recs, tmp_path / "x.csv")) == recs

    def test_timing_column_blanked(self, tmp_path):
        p = emit_csv([record(1.0)], tmp_path / "x.csv", include_timing=False)
        assert p.read_text().splitlines()[1].endswith(",true,")

    def test_io_error_has_path(self, tmp_path):
        bad = tmp_path / "missing" / "x.csv"
        with pytest.raises(OSError, match="missing"):
            emit_csv([], bad)


def boxes(path):
    root = ET.parse(path).getroot()
    return [g for g in root.iter(f"{SVG_NS}g") if g.get("class") == "box"]


class TestSvg:
    def test_one_cell(self, tmp_path):
        p = emit_boxplot_svg(summarize([record(1.0), record(2.0, rep=1)]), "shift_err", tmp_path / "a.svg")
        assert len(boxes(p)) == 1

    def test_full_grid(self, tmp_path, sim_records):
        p = emit_boxplot_svg(summarize(sim_records), "pattern_err", tmp_path / "b.svg")
        gs = boxes(p)
        assert len(gs) == 10
        colors = {g.get("data-n"): g.get("stroke") for g in gs}
        assert colors == {"512": "#999999", "1024": "#000000"}
        assert "whiskers: min/max" in p.read_text()

    def test_unknown_metric(self, tmp_path):
        with pytest.raises(ValueError):
            emit_boxplot_svg(summarize([record(1.0)]), "bogus", tmp_path / "c.svg")

    def test_reference_lines(self, tmp_path, sim_records):
        ref = reference_bounds(ExperimentConfig())
        assert set(ref) == {512, 1024} and ref[1024] < ref[512]
        p = emit_boxplot_svg(summarize(sim_records), "shift_err", tmp_path / "d.svg", reference=ref)
        root = ET.parse(p).getroot()
        assert len([e for e in root.iter(f"{SVG_NS}line") if e.get("class") == "reference"]) == 2


def test_run_and_write(tmp_path):
    out = run_and_write(small(repetitions=2), tmp_path / "o")
    names = {p.name for p in (tmp_path / "o").iterdir()}
    assert {"sim_records.csv", "sim_summary.csv", "sim_shift_err.svg", "sim_pattern_err.svg",
            "sim_config.json", "sim_bounds.csv", "sim_timings.csv"} <= names
    assert len(out["records"]) == 8


def test_output_dir_env(tmp_path, monkeypatch):
    from shiftfrechet.harness import default_output_dir
    monkeypatch.setenv("SHIFTFRECHET_OUTPUT_DIR", str(tmp_path / "env"))
    assert default_output_dir() == tmp_path / "env"
    monkeypatch.delenv("SHIFTFRECHET_OUTPUT_DIR")
    assert default_output_dir().name == "shiftfrechet-out"
