"""Trace CSV, config, report, and plot-data file formats."""

import json
import math
import warnings

import numpy as np
import pytest

from conftest import make_sinusoid_resistor
from memsim import (
    ConfigError,
    IVTrace,
    TraceParseError,
    Tolerances,
    build_model,
    classify,
    export_fq,
    export_plot_data,
    export_report,
    export_trace,
    import_trace,
    integrate_flux_charge,
    load_config,
    make_initialization,
    make_report_document,
    make_sweep,
    prefix_offsets,
    simulate,
)
from memsim.defaults import default_sweep, resolve_family
from memsim.io import config_from_dict


@pytest.fixture()
def small_trace():
    model = build_model("drift")
    wf = make_initialization(-0.5, 0.05, 1e-2).concat(
        make_sweep(1.0, 1.0, 2.0, 1, 1e-2)
    )
    return simulate(model, wf)


def write_rows(path, rows, header="t,v,i", directives=()):
    lines = list(directives) + [header] + rows
    path.write_text("\n".join(lines) + "\n")
    return path


def sine_rows(n, dt=0.01):
    rows = []
    for k in range(n):
        t = k * dt
        rows.append(f"{t!r},{math.sin(t)!r},{0.5 * math.sin(t)!r}")
    return rows


class TestTraceRoundTrip:
    def test_export_import_identity(self, small_trace, tmp_path):
        path = tmp_path / "trace.csv"
        export_trace(small_trace, path)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            back = import_trace(path)
        assert np.array_equal(back.t, small_trace.t)
        assert np.array_equal(back.v, small_trace.v)
        assert np.array_equal(back.i, small_trace.i)
        assert back.t0_index == small_trace.t0_index

    def test_t0_marker_survives(self, small_trace, tmp_path):
        assert small_trace.t0_index > 0
        path = tmp_path / "trace.csv"
        export_trace(small_trace, path)
        assert import_trace(path).t0_index == small_trace.t0_index

    def test_small_jitter_resamples_with_warning(self, tmp_path):
        rows = []
        for k in range(20):
            t = 0.01 * k + (5e-5 if k == 7 else 0.0)
            rows.append(f"{t!r},{0.1 * k!r},{0.01 * k!r}")
        path = write_rows(tmp_path / "jitter.csv", rows)
        with pytest.warns(UserWarning, match="resampling"):
            trace = import_trace(path)
        steps = np.diff(trace.t)
        assert np.allclose(steps, steps[0], rtol=1e-12)

    def test_large_jitter_rejected_with_line(self, tmp_path):
        rows = []
        for k in range(20):
            t = 0.01 * k + (5e-4 if k == 7 else 0.0)
            rows.append(f"{t!r},{0.1 * k!r},{0.01 * k!r}")
        path = write_rows(tmp_path / "bad.csv", rows)
        with pytest.raises(TraceParseError) as err:
            import_trace(path)
        assert err.value.line is not None

    def test_blank_lines_and_comments_skipped(self, tmp_path):
        rows = sine_rows(10)
        rows.insert(4, "")
        rows.insert(2, "# a stray comment")
        path = write_rows(tmp_path / "messy.csv", rows)
        assert import_trace(path).t.size == 10


class TestTraceParseErrors:
    def test_too_few_samples(self, tmp_path):
        path = write_rows(tmp_path / "short.csv", sine_rows(2))
        with pytest.raises(TraceParseError, match="fewer than 8 samples"):
            import_trace(path)

    def test_missing_header(self, tmp_path):
        path = tmp_path / "noheader.csv"
        path.write_text("")
        with pytest.raises(TraceParseError, match="header"):
            import_trace(path)

    def test_wrong_header_names_line(self, tmp_path):
        path = write_rows(tmp_path / "hdr.csv", sine_rows(10), header="time,volt,amp")
        with pytest.raises(TraceParseError) as err:
            import_trace(path)
        assert err.value.line == 1

    def test_wrong_column_count(self, tmp_path):
        rows = sine_rows(10)
        rows[3] = "1.0,2.0"
        path = write_rows(tmp_path / "cols.csv", rows)
        with pytest.raises(TraceParseError, match="3 columns") as err:
            import_trace(path)
        assert err.value.line == 5  # header is line 1

    def test_non_numeric_value(self, tmp_path):
        rows = sine_rows(10)
        rows[6] = "0.06,spike,0.0"
        path = write_rows(tmp_path / "nan.csv", rows)
        with pytest.raises(TraceParseError, match="non-numeric") as err:
            import_trace(path)
        assert err.value.line == 8

    def test_non_monotone_time(self, tmp_path):
        rows = sine_rows(10)
        rows[5], rows[6] = rows[6], rows[5]
        path = write_rows(tmp_path / "mono.csv", rows)
        with pytest.raises(TraceParseError, match="increasing") as err:
            import_trace(path)
        assert err.value.line is not None

    def test_bad_t0_directive(self, tmp_path):
        path = write_rows(
            tmp_path / "t0.csv", sine_rows(10), directives=["# t0_index=maybe"]
        )
        with pytest.raises(TraceParseError, match="t0_index") as err:
            import_trace(path)
        assert err.value.line == 1

    def test_t0_out_of_range(self, tmp_path):
        path = write_rows(
            tmp_path / "t0range.csv", sine_rows(10), directives=["# t0_index=99"]
        )
        with pytest.raises(TraceParseError, match="t0_index"):
            import_trace(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(TraceParseError, match="cannot read"):
            import_trace(tmp_path / "nope.csv")


class TestFluxChargeExport:
    def test_columns_round_trip(self, small_trace, tmp_path):
        fq = integrate_flux_charge(small_trace, *prefix_offsets(small_trace))
        path = tmp_path / "fq.csv"
        export_fq(fq, path)
        lines = path.read_text().splitlines()
        assert lines[0].startswith("# phi0=")
        assert lines[1] == "t,v,i,phi,q"
        data = np.array(
            [[float(x) for x in line.split(",")] for line in lines[2:]]
        )
        assert data.shape == (fq.t.size, 5)
        assert np.array_equal(data[:, 3], fq.phi)
        assert np.array_equal(data[:, 4], fq.q)


class TestReports:
    def test_serialization_is_stable(self, tmp_path):
        doc = {"b": 2, "a": {"z": [1.5, 2.5], "y": True}}
        p1, p2 = tmp_path / "r1.json", tmp_path / "r2.json"
        export_report(doc, p1)
        export_report(doc, p2)
        assert p1.read_bytes() == p2.read_bytes()
        assert p1.read_text().endswith("\n")
        parsed = json.loads(p1.read_text())
        assert parsed["a"]["y"] is True

    def test_non_finite_floats_stay_valid_json(self, tmp_path):
        path = tmp_path / "inf.json"
        export_report({"t_10pct": math.inf, "gap": math.nan}, path)
        parsed = json.loads(path.read_text())
        assert parsed["t_10pct"] == "inf"

    def test_document_structure(self, family_reports, tmp_path):
        report = family_reports["barrier"]
        doc = make_report_document(
            "barrier", config_echo={"family": "barrier"}, classification=report
        )
        assert doc["tool"] == "memsim"
        assert set(doc["branch_summary"]) == {"B1", "B2", "B3", "B4"}
        path = tmp_path / "barrier.json"
        export_report(doc, path)
        text = path.read_text()
        assert '"label": "NonlinearMemristor"' in text

    def test_optional_sections_omitted(self):
        doc = make_report_document("drift")
        assert "classification" not in doc
        assert "bench" not in doc
        assert doc["config"] == {}


class TestPlotData:
    def test_per_branch_files(self, family_traces, tmp_path):
        _, trace = family_traces["barrier"]
        written = export_plot_data(trace, tmp_path, prefix="demo")
        assert len(written) == 8
        roles = {}
        for path in written:
            assert path.exists() and path.stat().st_size > 0
            tag = path.read_text().splitlines()[0]
            assert tag.startswith("# branch=B")
            branch = tag.split("branch=")[1][:2]
            roles[branch] = tag.split("role=")[1]
        # write-read alternation is visible straight from the file tags
        assert roles == {"B1": "Write", "B2": "Read", "B3": "Write", "B4": "Read"}

    def test_iv_and_fq_variants_per_branch(self, family_traces, tmp_path):
        _, trace = family_traces["drift"]
        written = export_plot_data(trace, tmp_path)
        names = sorted(p.name for p in written)
        assert names == sorted(
            [f"plot_branch{b}_{kind}.csv" for b in (1, 2, 3, 4) for kind in ("iv", "fq")]
        )
        iv = (tmp_path / "plot_branch1_iv.csv").read_text().splitlines()
        fq = (tmp_path / "plot_branch1_fq.csv").read_text().splitlines()
        assert iv[1] == "v,i"
        assert fq[1] == "q,phi"
        assert len(iv) == len(fq)


class TestRunConfig:
    def test_minimal_config(self):
        cfg = config_from_dict({"model": {"family": "drift"}})
        assert cfg.family == "drift"
        assert cfg.overrides == {}
        assert cfg.resolved_sweep() == default_sweep("drift")

    def test_family_alias(self):
        assert resolve_family("strukov") == "drift"
        cfg = config_from_dict({"model": {"family": "strukov"}})
        assert cfg.family == "drift"

    def test_partial_sweep_merges_defaults(self):
        cfg = config_from_dict(
            {"model": {"family": "barrier"}, "sweep": {"cycles": 5}}
        )
        base = default_sweep("barrier")
        sweep = cfg.resolved_sweep()
        assert sweep.cycles == 5
        assert sweep.dt == base.dt and sweep.period == base.period

    def test_unknown_top_level_key(self):
        with pytest.raises(ConfigError, match="mystery"):
            config_from_dict({"model": {"family": "drift"}, "mystery": {}})

    def test_unknown_sweep_key(self):
        with pytest.raises(ConfigError, match="ramp"):
            config_from_dict(
                {"model": {"family": "drift"}, "sweep": {"ramp": 1.0}}
            )

    def test_unknown_model_override(self):
        with pytest.raises(ConfigError, match="squish"):
            config_from_dict({"model": {"family": "drift", "squish": 2.0}})

    def test_unknown_tolerance_key(self):
        with pytest.raises(ConfigError, match="eps_typo"):
            config_from_dict(
                {"model": {"family": "drift"}, "tolerances": {"eps_typo": 0.1}}
            )

    def test_missing_model_section(self):
        with pytest.raises(ConfigError, match="family"):
            config_from_dict({})

    def test_init_needs_voltage_and_duration(self):
        with pytest.raises(ConfigError, match="init"):
            config_from_dict(
                {"model": {"family": "drift"}, "init": {"v": -1.0}}
            )

    def test_init_inherits_sweep_dt(self):
        cfg = config_from_dict(
            {"model": {"family": "drift"}, "init": {"v": -1.0, "duration": 0.5}}
        )
        assert cfg.init == (-1.0, 0.5, default_sweep("drift").dt)

    def test_tolerance_override(self):
        cfg = config_from_dict(
            {"model": {"family": "drift"}, "tolerances": {"eps_hys": 0.5}}
        )
        assert cfg.tolerances.eps_hys == 0.5
        assert cfg.tolerances.r_tol == Tolerances().r_tol

    def test_echo_reflects_settings(self):
        cfg = config_from_dict(
            {
                "model": {"family": "barrier", "k_up": 250.0},
                "sweep": {"cycles": 2},
                "init": {"v": -1.2, "duration": 0.1},
            }
        )
        echo = cfg.echo()
        assert echo["overrides"] == {"k_up": 250.0}
        assert echo["sweep"]["cycles"] == 2
        assert echo["init"] == {"v": -1.2, "duration": 0.1, "dt": 2e-4}

    def test_load_config_file(self, tmp_path):
        path = tmp_path / "run.toml"
        path.write_text(
            "\n".join(
                [
                    "[model]",
                    'family = "filamentary"',
                    "k_set = 2000.0",
                    "[sweep]",
                    "cycles = 2",
                    "[output]",
                    'report = "out.json"',
                ]
            )
        )
        cfg = load_config(path)
        assert cfg.family == "filamentary"
        assert cfg.overrides == {"k_set": 2000.0}
        assert cfg.output == {"report": "out.json"}

    def test_malformed_toml(self, tmp_path):
        path = tmp_path / "broken.toml"
        path.write_text("[model\nfamily=")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_missing_config_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(tmp_path / "absent.toml")

    def test_waveform_prepends_initialization(self):
        cfg = config_from_dict(
            {"model": {"family": "drift"}, "init": {"v": -0.8, "duration": 0.2}}
        )
        wf = cfg.build_waveform()
        assert wf.markers and wf.markers[0][1] == "end_of_initialization"
        assert wf.v[0] == -0.8


class TestEndToEnd:
    def test_resistor_file_classifies_as_non_memristive(self, tmp_path):
        # data written by an independent closed-form script, not the exporter
        t, v, i, _, _, _ = make_sinusoid_resistor(r=220.0, n=4000, cycles=3.0)
        rows = [
            f"{float(tk)!r},{float(vk)!r},{float(ik)!r}"
            for tk, vk, ik in zip(t, v, i)
        ]
        path = write_rows(tmp_path / "resistor.csv", rows)
        trace = import_trace(path)
        assert classify(trace).label == "NonMemristive"

    def test_imported_trace_equals_original_analysis(self, small_trace, tmp_path):
        path = tmp_path / "round.csv"
        export_trace(small_trace, path)
        back = import_trace(path)
        a = classify(small_trace)
        b = classify(back)
        assert a.label == b.label
        assert a.fq_areas[-1].area_norm == b.fq_areas[-1].area_norm
