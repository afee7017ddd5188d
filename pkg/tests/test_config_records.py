import numpy as np
import pytest

from tonksqsl.config import ExperimentConfig, load_config, parse_config
from tonksqsl.errors import ConfigError, InvalidArgumentError
from tonksqsl.records import format_value, read_csv, read_ramp, write_csv, write_ramp
from tonksqsl.sta import design_ramp


class TestParse:
    def test_full_example(self):
        cfg = parse_config(
            "[experiment]\nkind = tf-scan\nn_particles = 6\nt_f_list = 0.5:1:0.25\n"
            "ramps = n0, linear\n[grid]\nhalf_width = 5\nn_points = 128\n"
            "[propagation]\ndt = 2e-4\nspeed_method = record\n[output]\nsvg = no\n")
        assert cfg.kind == "tf-scan" and cfg.n_particles == 6
        assert cfg.t_f_list == (0.5, 0.75, 1.0)
        assert cfg.ramps == ("n0", "linear")
        assert cfg.half_width == 5.0 and cfg.n_points == 128
        assert cfg.dt == 2e-4 and cfg.speed_method == "record"
        assert cfg.svg is False

    def test_inclusive_range_no_drift(self):
        cfg = parse_config("[experiment]\nt_f_list = 0.5:3:0.05\n")
        assert len(cfg.t_f_list) == 51
        assert cfg.t_f_list[-1] == 3.0 and cfg.t_f_list[19] == 1.45

    def test_integer_list(self):
        assert parse_config("[experiment]\nn_list = 1:5:2\n").n_list == (1, 3, 5)
        with pytest.raises(ConfigError):
            parse_config("[experiment]\nn_list = 1.5, 2\n")

    def test_defaults_resolve(self):
        cfg = ExperimentConfig(kind="infidelity-scan").resolved()
        assert cfg.n_list == tuple(range(1, 51)) and cfg.q == 2
        assert ExperimentConfig(kind="coherence-scan").resolved().q == 1
        assert ExperimentConfig(kind="quench").resolved().t_f == 10.0

    def test_base_overrides_kept(self):
        base = ExperimentConfig(n_particles=50)
        assert parse_config("[grid]\nn_points = 64\n", base).n_particles == 50

    @pytest.mark.parametrize("text, line", [
        ("[experiment]\nkind = quench\nbogus = 1\n", 3),
        ("[experiment]\n\nn_particles = many\n", 3),
        ("[experiment]\nkind = quench\n[extras]\nx = 1\n", 3),
        ("[grid]\nn_points = 64\nhalf_width = -2\n", 3),
        ("[propagation]\nspeed_method = guess\n", 2),
        ("[experiment]\nkind = dance\n", 2),
    ])
    def test_errors_carry_line(self, text, line):
        with pytest.raises(ConfigError) as info:
            parse_config(text)
        assert info.value.lineno == line
        assert f"line {line}" in str(info.value)

    def test_malformed(self):
        with pytest.raises(ConfigError):
            parse_config("[experiment]\nthis is not ini\n")
        with pytest.raises(ConfigError):
            parse_config("[experiment]\nkind = quench\nkind = eigens\n")

    @pytest.mark.parametrize("text", [
        "[experiment]\nn_particles = 0\n",
        "[grid]\nn_points = 8\n",
        "[experiment]\nramps = n0, cubic\n",
        "[experiment]\nstatistics = anyon\n",
        "[experiment]\nt_f_list = 3:1:0.5\n",
        "[experiment]\nramp_file = missing.csv\n",
        "[output]\nsvg = maybe\n",
    ])
    def test_rejects(self, text):
        with pytest.raises(ConfigError):
            parse_config(text)

    def test_ramp_file_relative_to_config(self, tmp_path):
        write_ramp(tmp_path / "r.csv", design_ramp(0, 2, 1.0, 8.0, 1.0))
        (tmp_path / "c.ini").write_text("[experiment]\nkind = sta-run\nramp_file = r.csv\n")
        cfg = load_config(tmp_path / "c.ini")
        assert cfg.ramp_file == str(tmp_path / "r.csv")
        with pytest.raises(ConfigError):
            load_config(tmp_path / "absent.ini")

    def test_echo(self):
        text = ExperimentConfig(kind="quench", t_f=1.5).echo()
        assert "kind=quench" in text and "t_f=1.5" in text and "half_width=auto" in text
        assert "\n" not in text and "out_dir" not in text


class TestCSV:
    def test_format(self):
        assert format_value(1 / 3) == "0.333333333333"
        assert format_value(12345678901234.0) == "1.23456789012e+13"
        assert format_value(3) == "3" and format_value(True) == "1"
        assert format_value(float("nan")) == "nan"
        with pytest.raises(InvalidArgumentError):
            format_value("a,b")

    def test_layout_and_roundtrip(self, tmp_path):
        path = write_csv(tmp_path / "x.csv", ["t", "F"], [(0.0, 1.0), (0.5, 2 / 3)],
                         comment="kind=quench")
        raw = path.read_bytes()
        assert b"\r" not in raw and raw.endswith(b"\n")
        lines = raw.decode().splitlines()
        assert lines[0] == "# kind=quench" and lines[1] == "t,F"
        assert lines[3] == "0.5,0.666666666667"
        cols, data = read_csv(path)
        assert cols == ["t", "F"]
        np.testing.assert_allclose(data, [[0, 1], [0.5, 2 / 3]], rtol=1e-12)

    def test_time_series_checked(self, tmp_path):
        with pytest.raises(InvalidArgumentError):
            write_csv(tmp_path / "x.csv", ["t"], [(1.0,), (1.0,)], time_series=True)
        with pytest.raises(InvalidArgumentError):
            write_csv(tmp_path / "x.csv", ["t", "F"], [(1.0,)])

    def test_ramp_roundtrip(self, tmp_path):
        ramp = design_ramp(9, 2, 1.0, 8.0, 2.0)
        path = write_ramp(tmp_path / "ramp.csv", ramp, comment="kind=sta-design")
        back = read_ramp(path)
        assert (back.n, back.q) == (9, 2)
        assert back.t_f == pytest.approx(2.0) and back.lam_f == pytest.approx(8.0, rel=1e-11)
        np.testing.assert_allclose(back.values, ramp.values, rtol=1e-11)
