import csv
import json

import numpy as np
import pytest

from hurstmodes import DataError, HurstDistribution, Panel, gen_panel, read_panel_csv, standardize
from hurstmodes.cli import main


def write_panel_csv(path, data, names=None, time_index=None):
    """columns = series, rows = time"""
    p, n = data.shape
    names = names or [f"s{i}" for i in range(p)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        header = (["date"] if time_index is not None else []) + list(names)
        w.writerow(header)
        for t in range(n):
            row = ([time_index[t]] if time_index is not None else []) + [repr(float(x)) for x in data[:, t]]
            w.writerow(row)


@pytest.fixture
def fbm_csv(tmp_path):
    panel, _ = gen_panel(HurstDistribution.point(0.5), 16, 2**14, seed=42)
    path = tmp_path / "panel.csv"
    write_panel_csv(path, panel.data)
    return path


class TestStandardize:
    def test_unit_diff_variance_unchanged(self, rng):
        x = np.cumsum(rng.standard_normal((2, 500)), axis=1)
        x = x / np.diff(x, axis=1).std(axis=1, ddof=1)[:, None]
        p = standardize(Panel(x))
        assert np.allclose(p.data, x, atol=1e-12)

    def test_scale_equivariance(self, rng):
        x = np.cumsum(rng.standard_normal((3, 300)), axis=1)
        a = standardize(Panel(x))
        b = standardize(Panel(10.0 * x))
        assert np.allclose(a.data, b.data, atol=1e-12)

    def test_diff_sd_is_one_after(self, rng):
        x = np.cumsum(rng.standard_normal((5, 400)), axis=1) * rng.uniform(0.1, 50, (5, 1))
        out = standardize(Panel(x))
        sd = np.diff(out.data, axis=1).std(axis=1, ddof=1)
        assert np.allclose(sd, 1.0, atol=1e-12)

    def test_constant_series_named(self):
        x = np.vstack([np.arange(10.0) * 0 + 3.0, np.arange(10.0)])
        with pytest.raises(DataError, match="flat"):
            standardize(Panel(x, series=("flat", "ramp")))


class TestReadPanelCsv:
    def test_time_column_auto_dropped(self, tmp_path, rng):
        data = rng.standard_normal((3, 8))
        path = tmp_path / "a.csv"
        write_panel_csv(path, data, time_index=[f"1/{i}/59" for i in range(8)])
        panel = read_panel_csv(path)
        assert panel.series == ("s0", "s1", "s2")
        assert np.allclose(panel.data, data, atol=0)

    def test_no_time_column(self, tmp_path, rng):
        data = rng.standard_normal((2, 6))
        path = tmp_path / "b.csv"
        write_panel_csv(path, data)
        panel = read_panel_csv(path)
        assert panel.data.shape == (2, 6)

    def test_missing_cell_rejected(self, tmp_path):
        path = tmp_path / "c.csv"
        path.write_text("x,y\n1.0,2.0\n,3.0\n4.0,5.0\n")
        with pytest.raises(DataError, match="missing"):
            read_panel_csv(path)

    def test_non_rectangular_rejected(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("x,y\n1.0,2.0\n1.0\n2.0,3.0\n")
        with pytest.raises(DataError, match="rectangular"):
            read_panel_csv(path)

    def test_non_numeric_cell_rejected(self, tmp_path):
        path = tmp_path / "e.csv"
        path.write_text("x,y\n1.0,2.0\n1.0,oops\n3.0,4.0\n")
        with pytest.raises(DataError, match="not numeric"):
            read_panel_csv(path)


class TestCliEstimate:
    def test_single_mode_end_to_end(self, fbm_csv, tmp_path, capsys):
        out = tmp_path / "est.json"
        code = main([
            "estimate", "--input", str(fbm_csv), "--j1", "2", "--j2", "5",
            "--seed", "3", "--output", str(out),
        ])
        assert code == 0
        result = json.loads(out.read_text())
        assert result["schema"] == "wrmsm/1"
        assert result["r_hat"] == 1
        assert abs(result["modes"][0] - 0.5) < 0.1
        assert len(result["probs"]) == result["r_hat"]
        assert sum(result["histogram"]["counts"]) == 16

    def test_byte_identical_reruns(self, fbm_csv, tmp_path):
        out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
        for out in (out1, out2):
            assert main(["estimate", "--input", str(fbm_csv), "--seed", "9",
                         "--output", str(out)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_json_roundtrip_lossless(self, fbm_csv, tmp_path):
        out = tmp_path / "rt.json"
        main(["estimate", "--input", str(fbm_csv), "--seed", "4", "--output", str(out)])
        first = json.loads(out.read_text())
        # serialize the parsed object again: identical text means the float
        # representation survives a parse/emit cycle exactly
        assert json.loads(json.dumps(first)) == first

    def test_macro_panel_schema(self, tmp_path):
        # stand-in panel with the real-data analysis geometry (p=14, n=709,
        # octaves 2..5); output schema carries r_hat plus matched-length
        # modes and probs, values not asserted
        panel, _ = gen_panel(HurstDistribution.uniform([0.2, 0.4, 0.6]), 14, 709, seed=8)
        path = tmp_path / "macro.csv"
        write_panel_csv(path, panel.data, time_index=[f"m{t}" for t in range(709)])
        out = tmp_path / "macro.json"
        code = main(["estimate", "--input", str(path), "--j1", "2", "--j2", "5",
                     "--seed", "1", "--output", str(out)])
        assert code == 0
        result = json.loads(out.read_text())
        assert result["p"] == 14 and result["n"] == 709
        assert result["mode"] == {"kind": "multiscale", "j1": 2, "j2": 5}
        assert len(result["modes"]) == result["r_hat"] == len(result["probs"])
        assert abs(sum(result["probs"]) - 1.0) < 1e-12
        assert len(result["trace"]["grid"]) == 10

    def test_empty_input_exit_3(self, tmp_path, capsys):
        empty = tmp_path / "empty.csv"
        empty.write_text("")
        assert main(["estimate", "--input", str(empty)]) == 3
        err = capsys.readouterr().err
        assert json.loads(err.strip())["error"] == "data"

    def test_missing_file_exit_3(self, tmp_path):
        assert main(["estimate", "--input", str(tmp_path / "nope.csv")]) == 3

    def test_bad_scale_exit_2(self, fbm_csv):
        assert main(["estimate", "--input", str(fbm_csv), "--j", "1", "--a", "12"]) == 2

    def test_octaves_too_deep_exit_2(self, tmp_path, rng):
        path = tmp_path / "short.csv"
        write_panel_csv(path, np.cumsum(rng.standard_normal((3, 64)), axis=1))
        assert main(["estimate", "--input", str(path), "--j1", "2", "--j2", "6"]) == 2

    def test_rank_deficient_exit_4(self, tmp_path, rng):
        # more series than coarse-octave coefficients: degenerate spectrum
        path = tmp_path / "wide.csv"
        write_panel_csv(path, np.cumsum(rng.standard_normal((24, 680)), axis=1))
        with pytest.warns(RuntimeWarning):
            code = main(["estimate", "--input", str(path), "--j1", "2", "--j2", "5"])
        assert code == 4

    def test_bad_m_exit_2(self, fbm_csv):
        assert main(["estimate", "--input", str(fbm_csv), "--M", "-1"]) == 2
        assert main(["estimate", "--input", str(fbm_csv), "--M", "bogus"]) == 2


class TestCliSpectrum:
    def test_histogram_counts_sum_to_p(self, fbm_csv, tmp_path):
        out = tmp_path / "spec.json"
        assert main(["spectrum", "--input", str(fbm_csv), "--bins", "12",
                     "--output", str(out)]) == 0
        result = json.loads(out.read_text())
        hist = result["histogram"]
        assert sum(hist["counts"]) == 16
        assert len(hist["bin_edges"]) == 13

    def test_esd_affine_scale(self, fbm_csv, tmp_path):
        out_h = tmp_path / "h.json"
        out_e = tmp_path / "e.json"
        main(["spectrum", "--input", str(fbm_csv), "--output", str(out_h)])
        main(["spectrum", "--input", str(fbm_csv), "--affine", "esd", "--output", str(out_e)])
        h = json.loads(out_h.read_text())
        e = json.loads(out_e.read_text())
        np.testing.assert_allclose(
            np.array(e["histogram"]["bin_edges"]),
            2 * np.array(h["histogram"]["bin_edges"]) + 1, atol=1e-12,
        )


class TestCliSweep:
    def test_end_to_end(self, tmp_path):
        spec = tmp_path / "sweep.txt"
        spec.write_text(
            "# tiny smoke sweep\n"
            "family = bimodal\n"
            "base = 0.3\n"
            "deltas = 0,0.3\n"
            "n = 2048\n"
            "p = 8\n"
            "j1 = 2\n"
            "j2 = 4\n"
            "reps = 2\n"
            "m = 5\n"
            "M = auto\n"
            "methods = spectral,gmm\n"
            "seed = 5\n"
        )
        base = tmp_path / "out"
        assert main(["sweep", "--spec", str(spec), "--output", str(base)]) == 0
        with open(str(base) + ".csv") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 4  # 2 configs x 2 methods
        assert {r["method"] for r in rows} == {"spectral", "gmm"}
        assert all(0.0 <= float(r["proportion_correct"]) <= 1.0 for r in rows)
        payload = json.loads((tmp_path / "out.json").read_text())
        assert payload["schema"] == "wrmsm/1"
        assert len(payload["records"]) == 4  # 2 configs x 2 reps

    def test_unknown_key_exit_2(self, tmp_path):
        spec = tmp_path / "bad.txt"
        spec.write_text("family = bimodal\nwat = 1\n")
        assert main(["sweep", "--spec", str(spec)]) == 2

    def test_custom_family(self, tmp_path):
        spec = tmp_path / "custom.txt"
        spec.write_text(
            "family = custom\n"
            "modes = 0.2,0.8\n"
            "n = 2048\np = 8\nj1 = 2\nj2 = 4\nreps = 1\nmethods = spectral\nseed = 2\n"
        )
        base = tmp_path / "c"
        assert main(["sweep", "--spec", str(spec), "--output", str(base),
                     "--format", "csv"]) == 0
        with open(str(base) + ".csv") as fh:
            rows = list(csv.DictReader(fh))
        assert rows[0]["true_r"] == "2"
