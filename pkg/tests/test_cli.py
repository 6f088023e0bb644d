import io
import subprocess
import sys

import numpy as np
import pytest

from triladder import ModelParams, eigenvalues_at, wkb_levels
from triladder.cli import ConfigError, load_config, main, render_levels, render_wkb

MODEL = """\
[model]
e1 = 0
e2 = 11
e3 = 24
g1 = 0.5
g2 = 0.5
n0 = 100000000
"""


def write_config(tmp_path, body, name="cfg.ini"):
    path = tmp_path / name
    path.write_text(body)
    return str(path)


class TestConfig:
    def test_couplings_given_both_ways(self):
        cfg = load_config(io.StringIO(MODEL + "[run]\n"))
        assert cfg.params.g1 == pytest.approx(0.5)
        direct = MODEL.replace("g1 = 0.5", "u = 0.00055")
        cfg2 = load_config(io.StringIO(direct + "[run]\n"))
        assert cfg2.params.u == pytest.approx(0.00055)

    def test_derived_quantities_echoed(self):
        cfg = load_config(io.StringIO(MODEL + "[run]\n"))
        keys = [k for k, _ in cfg.echo]
        for needed in ("e1", "u", "v", "g1", "g2", "n0"):
            assert needed in keys

    @pytest.mark.parametrize("mutation,fragment", [
        (lambda s: s.replace("g1 = 0.5\n", ""), "exactly one"),
        (lambda s: s + "u = 0.1\n", "exactly one"),
        (lambda s: s.replace("n0 = 100000000\n", ""), "n0"),
        (lambda s: s.replace("e2 = 11", "e2 = eleven"), "not a number"),
        (lambda s: s.replace("e2 = 11", "e2 = -3"), "rejected"),
    ])
    def test_bad_model_reported(self, mutation, fragment):
        with pytest.raises(ConfigError, match=fragment):
            load_config(io.StringIO(mutation(MODEL) + "[run]\n"))

    def test_missing_run_key_reported(self):
        cfg = load_config(io.StringIO(MODEL + "[run]\ny_min = -1\n"))
        with pytest.raises(ConfigError, match="y_max"):
            render_levels(cfg)


class TestLevelsCommand:
    RUN = MODEL + "[run]\ny_min = -2e4\ny_max = 2e4\ny_points = 41\n"

    def test_byte_identical_reruns(self):
        first = render_levels(load_config(io.StringIO(self.RUN)))
        second = render_levels(load_config(io.StringIO(self.RUN)))
        assert first == second

    def test_values_match_library(self):
        text = render_levels(load_config(io.StringIO(self.RUN)))
        rows = [line.split(",") for line in text.splitlines()
                if line and not line.startswith("#")][1:]
        assert len(rows) == 41
        p = ModelParams.from_dimensionless(0.0, 11.0, 24.0, 0.5, 0.5, 10**8)
        for row in rows[::10]:
            y = float(row[0])
            expect = eigenvalues_at(p, y)
            got = np.array([float(v) for v in row[1:]])
            np.testing.assert_allclose(got, expect, rtol=1e-12, atol=1e-12)

    def test_command_writes_file(self, tmp_path):
        cfg = write_config(tmp_path, self.RUN)
        assert main(["levels", "--config", cfg, "--out", str(tmp_path)]) == 0
        text = (tmp_path / "levels.csv").read_text()
        assert text.startswith("# e1 = 0")
        assert "y,E1,E2,E3" in text
        assert text.endswith("\n")


class TestOtherCommands:
    def test_wkb_grid(self):
        body = MODEL + ("[run]\ng1_min = 0\ng1_max = 0.4\ng1_points = 2\n"
                        "g2_min = 0.1\ng2_max = 0.1\ng2_points = 1\n")
        text = render_wkb(load_config(io.StringIO(body)))
        rows = [line.split(",") for line in text.splitlines()
                if line and not line.startswith("#")][1:]
        assert len(rows) == 2
        tpl = ModelParams(0.0, 11.0, 24.0, 0.0, 0.0, 10**8)
        expect = wkb_levels(tpl.with_couplings(0.4, 0.1))
        got = np.array([float(v) for v in rows[1][2:]])
        np.testing.assert_allclose(got, expect, rtol=1e-12)

    def test_contours_rejects_even_exchange(self, tmp_path):
        body = MODEL + "[run]\ntransition = 1,2\ndelta_n_list = 12\nrays = 5\n"
        cfg = write_config(tmp_path, body)
        assert main(["contours", "--config", cfg, "--out", str(tmp_path)]) == 1

    def test_contours_csv(self, tmp_path):
        body = MODEL + ("[run]\ntransition = 1,2\ndelta_n_list = 13\n"
                        "rays = 7\nscan_points = 60\n")
        cfg = write_config(tmp_path, body)
        assert main(["contours", "--config", cfg, "--out", str(tmp_path)]) == 0
        lines = (tmp_path / "contours.csv").read_text().splitlines()
        header = [l for l in lines if not l.startswith("#")][0]
        assert header == "j,k,delta_n,angle,g1,g2,residual,multiple"
        data = [l.split(",") for l in lines if not l.startswith("#")][1:]
        assert all(abs(float(r[6])) <= 1e-6 for r in data)

    def test_resonance_map_small_grid(self, tmp_path):
        body = MODEL + ("[run]\ntransition = 1,2\ng1_min = 0\ng1_max = 0.2\n"
                        "g1_points = 5\ng2_min = 0\ng2_max = 0.1\ng2_points = 2\n"
                        "half_width = 60\n")
        cfg = write_config(tmp_path, body)
        assert main(["resonance-map", "--config", cfg, "--out", str(tmp_path)]) == 0
        lines = (tmp_path / "resonance-map.csv").read_text().splitlines()
        data = [l.split(",") for l in lines if not l.startswith("#")][1:]
        assert len(data) == 10
        first = data[0]
        assert float(first[2]) == pytest.approx(11.0, abs=1e-8)
        assert int(first[3]) == 11

    def test_validate_command_passes(self, capsys):
        assert main(["validate"]) == 0
        out = capsys.readouterr().out
        assert "7/7 checks passed" in out
        assert " s " in out  # per-check timing present

    def test_config_error_exit_code(self, tmp_path):
        cfg = write_config(tmp_path, "[model]\ne1 = 0\n")
        assert main(["levels", "--config", cfg]) == 2

    def test_console_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "triladder.cli", "--version"],
                              capture_output=True, text=True)
        assert proc.returncode == 0
