"""Bar ingestion, the interpolation pipeline, and the command-line surface."""

import io
import json
import subprocess
import sys

import numpy as np
import pytest

from ohlcbridge.bars import OhlcBar, emit, ingest
from ohlcbridge.cli import main
from ohlcbridge.errors import DataError, DomainError
from ohlcbridge.interpolate import emit_results, interpolate_bars
from ohlcbridge.volatility import VolTimeMap

CSV = """date,open,high,low,close
2024-01-02,100.0,103.0,98.5,101.2
2024-01-03,101.2,102.8,99.9,100.1
2024-01-04,100.1,104.4,100.0,104.0
"""


def make_bars():
    return ingest(io.StringIO(CSV))


class TestOhlcBar:
    def test_normalization(self):
        bar = OhlcBar.from_prices("d", 100.0, 103.0, 98.5, 101.2)
        assert bar.high_log == pytest.approx(np.log(1.03))
        assert bar.low_log == pytest.approx(np.log(0.985))
        assert bar.close_log == pytest.approx(np.log(1.012))
        assert bar.high_log >= max(0.0, bar.close_log)
        assert bar.low_log <= min(0.0, bar.close_log)

    def test_lenient_clamps_ordering(self, caplog):
        with caplog.at_level("WARNING"):
            bar = OhlcBar.from_prices("d", 100.0, 100.9, 99.0, 101.0)
        assert "clamped" in caplog.text
        assert bar.high == 101.0  # lifted to the close
        assert bar.high_log == pytest.approx(bar.close_log)

    def test_strict_raises_with_line(self):
        with pytest.raises(DataError) as exc_info:
            OhlcBar.from_prices("d", 100.0, 100.9, 99.0, 101.0, mode="strict", line=7)
        assert exc_info.value.line == 7

    def test_nonpositive_price(self):
        with pytest.raises(DataError, match="not a positive number"):
            OhlcBar.from_prices("d", 100.0, 103.0, -1.0, 101.0)

    def test_flat_bar_has_no_statistic(self):
        bar = OhlcBar.from_prices("d", 100.0, 100.0, 100.0, 100.0)
        assert bar.is_flat
        with pytest.raises(DataError):
            bar.stat()

    def test_stat_roundtrip(self):
        stat = OhlcBar.from_prices("d", 100.0, 103.0, 98.5, 101.2).stat()
        assert stat.high == pytest.approx(np.log(1.03))


class TestIngest:
    def test_auto_header(self):
        bars = make_bars()
        assert [b.bar_id for b in bars] == ["2024-01-02", "2024-01-03", "2024-01-04"]

    def test_case_insensitive_and_extra_columns(self):
        text = "Date,OPEN,High,low,Close,volume\na,100,101,99,100.5,123\n"
        (bar,) = ingest(io.StringIO(text))
        assert bar.bar_id == "a"
        assert bar.close == 100.5

    def test_explicit_column_list(self):
        text = "day,o,h,l,c\nx,100,101,99,100.5\n"
        (bar,) = ingest(io.StringIO(text), format_spec="day,o,h,l,c")
        assert bar.bar_id == "x"
        (bar,) = ingest(io.StringIO(text), format_spec="o,h,l,c")
        assert bar.bar_id == "0"  # synthesized id

    def test_unknown_column(self):
        with pytest.raises(DataError, match="not in header"):
            ingest(io.StringIO(CSV), format_spec="date,open,high,low,settle")

    def test_missing_required_column(self):
        with pytest.raises(DataError, match="lacks required columns"):
            ingest(io.StringIO("date,open,high,low\na,1,2,0.5\n"))

    def test_unparseable_price_carries_line(self):
        text = CSV.replace("99.9", "n/a")
        with pytest.raises(DataError) as exc_info:
            ingest(io.StringIO(text))
        assert exc_info.value.line == 3

    def test_strict_ordering_carries_line(self):
        text = "date,open,high,low,close\na,100,103,98,101\nb,100,100.9,99,101\n"
        with pytest.raises(DataError) as exc_info:
            ingest(io.StringIO(text), mode="strict")
        assert exc_info.value.line == 3

    def test_empty_inputs(self):
        with pytest.raises(DataError, match="no header"):
            ingest(io.StringIO(""))
        with pytest.raises(DataError, match="no data rows"):
            ingest(io.StringIO("date,open,high,low,close\n"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="cannot read"):
            ingest(tmp_path / "nope.csv")


class TestEmit:
    def test_csv_roundtrip(self):
        bars = make_bars()
        again = ingest(io.StringIO(emit(bars)))
        for a, b in zip(bars, again):
            assert a == b

    def test_json(self):
        payload = json.loads(emit(make_bars(), kind="json"))
        assert payload[0]["date"] == "2024-01-02"
        assert payload[0]["high"] == 103.0

    def test_to_path_and_stream(self, tmp_path):
        path = tmp_path / "bars.csv"
        assert emit(make_bars(), target=path) is None
        buf = io.StringIO()
        emit(make_bars(), target=buf)
        with open(path, newline="") as fh:  # keep the CSV CRLF endings
            assert buf.getvalue() == fh.read()

    def test_unknown_kind(self):
        with pytest.raises(DataError):
            emit(make_bars(), kind="parquet")


class TestInterpolateBars:
    def test_curves_respect_bar_bounds(self):
        bars = make_bars()
        for method in ("bridge", "ch", "chl"):
            for r, bar in zip(interpolate_bars(bars, method=method, grid=41), bars):
                assert r.ok
                assert np.all(r.curve.mean <= bar.high_log + 1e-12)
                assert np.all(r.curve.mean >= bar.low_log - 1e-12)
                assert r.curve.mean[0] == pytest.approx(0.0, abs=1e-12)
                assert r.curve.mean[-1] == pytest.approx(bar.close_log, abs=1e-9)
                assert r.curve.variance[0] == pytest.approx(0.0, abs=1e-12)

    def test_conditioning_tightens_variance(self):
        bars = make_bars()
        by_method = {
            m: interpolate_bars(bars, method=m, grid=41) for m in ("bridge", "chl")
        }
        for i in range(len(bars)):
            v_bridge = by_method["bridge"][i].curve.time_average_variance()
            v_chl = by_method["chl"][i].curve.time_average_variance()
            assert v_chl < v_bridge

    def test_vol_time_bends_the_clock(self):
        clock = VolTimeMap(
            times=np.array([0.0, 0.5, 1.0]), tau=np.array([0.0, 0.85, 1.0])
        )
        (r,) = interpolate_bars(make_bars()[:1], grid=21, vol_time=clock)
        np.testing.assert_allclose(r.tau, clock.tau_of(r.times))
        # most of the variance budget is spent by mid-bar
        mid = r.curve.variance[10]
        assert mid > 0.5 * r.curve.variance.max()

    def test_sigma_const_shares_the_window_estimate(self):
        results = interpolate_bars(make_bars(), sigma="const", grid=11)
        estimates = {r.estimate.sigma_sq for r in results}
        assert len(estimates) == 1

    def test_flat_bar_gets_zero_curve(self):
        bars = make_bars() + [OhlcBar.from_prices("flat", 50.0, 50.0, 50.0, 50.0)]
        results = interpolate_bars(bars, grid=11)
        flat = results[-1]
        assert flat.ok
        assert np.all(flat.curve.mean == 0.0)
        assert np.all(flat.curve.variance == 0.0)
        assert flat.estimate.method == "const"  # window fallback

    def test_pathological_bar_is_annotated_not_fatal(self):
        bars = make_bars() + [
            OhlcBar.from_prices("tiny", 100.0, 100.0001, 99.9999, 100.00005)
        ]
        results = interpolate_bars(bars, method="chl", sigma="const", grid=11)
        assert [r.ok for r in results] == [True, True, True, False]
        assert results[-1].curve is None
        assert "Error" in results[-1].error

    def test_validation(self):
        with pytest.raises(DomainError):
            interpolate_bars([])
        with pytest.raises(DomainError):
            interpolate_bars(make_bars(), method="spline")
        with pytest.raises(DomainError):
            interpolate_bars(make_bars(), sigma="yang_zhang")

    def test_emit_results_csv(self):
        bars = make_bars() + [
            OhlcBar.from_prices("tiny", 100.0, 100.0001, 99.9999, 100.00005)
        ]
        results = interpolate_bars(bars, sigma="const", grid=11)
        text = emit_results(results)
        lines = text.strip().splitlines()
        assert lines[0] == "bar_id,t,tau,mean,variance,sigma_sq,method"
        data = [ln for ln in lines[1:] if not ln.startswith("#")]
        assert len(data) == 3 * 11
        assert any(ln.startswith("# error bar_id=tiny") for ln in lines)

    def test_emit_results_json(self):
        results = interpolate_bars(make_bars(), grid=5)
        payload = json.loads(emit_results(results, kind="json"))
        assert len(payload["rows"]) == 3 * 5
        assert payload["errors"] == []
        row = payload["rows"][0]
        assert row["method"] == "chl"
        assert float(row["variance"]) == pytest.approx(0.0, abs=1e-12)

    def test_deterministic_output(self):
        a = emit_results(interpolate_bars(make_bars(), grid=7))
        b = emit_results(interpolate_bars(make_bars(), grid=7))
        assert a == b


class TestCli:
    @pytest.fixture()
    def bars_csv(self, tmp_path):
        path = tmp_path / "bars.csv"
        path.write_text(CSV)
        return path

    def test_interpolate_stdout(self, bars_csv, capsys):
        assert main(["interpolate", "--input", str(bars_csv), "--grid", "9"]) == 0
        out = capsys.readouterr().out
        lines = out.strip().splitlines()
        assert lines[0].startswith("bar_id,")
        assert len(lines) == 1 + 3 * 9

    def test_interpolate_to_file_json(self, bars_csv, tmp_path):
        out = tmp_path / "curves.json"
        argv = [
            "interpolate", "--input", str(bars_csv), "--grid", "5",
            "--method", "bridge", "--sigma", "ml", "--emit", "json",
            "--output", str(out),
        ]
        assert main(argv) == 0
        payload = json.loads(out.read_text())
        assert len(payload["rows"]) == 15

    def test_interpolate_with_clock(self, bars_csv, tmp_path, capsys):
        clock = tmp_path / "clock.csv"
        clock.write_text("0.0,0.0\n0.5,0.9\n1.0,1.0\n")
        argv = ["interpolate", "--input", str(bars_csv), "--grid", "5",
                "--voltime", str(clock)]
        assert main(argv) == 0
        tau_mid = capsys.readouterr().out.strip().splitlines()[3].split(",")[2]
        assert float(tau_mid) == pytest.approx(0.9)

    def test_bad_clock_is_a_data_error(self, bars_csv, tmp_path, capsys):
        clock = tmp_path / "clock.csv"
        clock.write_text("0.0,0.0,1\n1.0,1.0,2\n")
        argv = ["interpolate", "--input", str(bars_csv), "--voltime", str(clock)]
        assert main(argv) == 2
        assert "two columns" in capsys.readouterr().err

    def test_missing_input_exits_2(self, tmp_path, capsys):
        assert main(["interpolate", "--input", str(tmp_path / "nope.csv")]) == 2
        assert "data error" in capsys.readouterr().err

    def test_strict_rejects_dirty_file(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("date,open,high,low,close\na,100,100.9,99,101\n")
        assert main(["interpolate", "--input", str(path)]) == 0
        capsys.readouterr()
        assert main(["interpolate", "--input", str(path), "--strict"]) == 2
        assert "line 2" in capsys.readouterr().err

    def test_usage_errors_exit_1(self, bars_csv):
        with pytest.raises(SystemExit) as exc_info:
            main(["interpolate", "--input", str(bars_csv), "--method", "spline"])
        assert exc_info.value.code == 1
        with pytest.raises(SystemExit) as exc_info:
            main([])
        assert exc_info.value.code == 1

    def test_verify_quick(self, capsys):
        assert main(["verify", "--level", "quick"]) == 0
        out = capsys.readouterr().out
        assert "checks passed" in out
        assert "FAIL" not in out

    def test_feller_table(self, tmp_path):
        out = tmp_path / "feller.csv"
        argv = ["feller", "--xmin", "0.4", "--xmax", "2.4", "--points", "6",
                "--output", str(out)]
        assert main(argv) == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "x,density,terms"
        assert len(lines) == 7
        by_x = {ln.split(",")[0]: ln.split(",")[1] for ln in lines[1:]}
        assert by_x["1.6"] == "0.811361003396"

    def test_feller_rejects_bad_range(self, capsys):
        assert main(["feller", "--xmin", "-1.0"]) == 2
        assert "xmin" in capsys.readouterr().err

    def test_simulate_smoke(self, capsys):
        argv = ["simulate", "--paths", "2000", "--steps", "50", "--bins", "8",
                "--condition", "close"]
        assert main(argv) == 0
        out = capsys.readouterr().out
        assert "time_averaged_variance=" in out
        value = float(out.strip().rsplit("=", 1)[1])
        assert 0.1 < value < 0.2  # near the 1/6 bridge level at 8 bins

    def test_python_fallback_env(self):
        code = (
            "import ohlcbridge._speed as s; print(s.BACKEND)"
        )
        res = subprocess.run(
            [sys.executable, "-c", code],
            capture_output=True, text=True,
            env={"PATH": "/usr/bin:/bin", "OHLCBRIDGE_FORCE_PYTHON": "1"},
        )
        assert res.stdout.strip() == "python"
