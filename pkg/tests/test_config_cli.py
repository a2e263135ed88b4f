"""Config parsing, validation, echo round-trip, and the CLI surface."""

from __future__ import annotations

import pytest

from sectrack.cli import main
from sectrack.config import (
    ConfigError,
    ScenarioConfig,
    echo_config,
    parse_config,
)


class TestParseConfig:
    def test_empty_file_gives_defaults(self, tmp_path):
        p = tmp_path / "empty.cfg"
        p.write_text("")
        cfg = parse_config(p)
        assert cfg == ScenarioConfig()

    def test_defaults_match_reference_deployment(self):
        cfg = ScenarioConfig()
        assert cfg.area_side == 400.0
        assert cfg.node_count == 60
        assert cfg.range_limit == 250.0
        assert cfg.duration == 500.0
        assert cfg.sample_interval == 5.0
        assert cfg.sectors == 4

    def test_sections_and_values(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text(
            "[sim]\n"
            "node_count = 30\n"
            "master_seed = 99\n"
            "# comment line\n"
            "[channel]\n"
            "sigma_t = 1e-8\n"
            "[mobility]\n"
            "v_min = 2\n"
            "v_max = 9\n"
        )
        cfg = parse_config(p)
        assert cfg.node_count == 30
        assert cfg.master_seed == 99
        assert cfg.sigma_t == 1e-8
        assert (cfg.v_min, cfg.v_max) == (2.0, 9.0)

    def test_unknown_key_reports_location(self, tmp_path):
        p = tmp_path / "bad.cfg"
        p.write_text("[sim]\nnode_cnt = 30\n")
        with pytest.raises(ConfigError, match=r"bad.cfg:2.*node_cnt"):
            parse_config(p)

    def test_unknown_section_rejected(self, tmp_path):
        p = tmp_path / "bad.cfg"
        p.write_text("[simulation]\n")
        with pytest.raises(ConfigError, match="simulation"):
            parse_config(p)

    def test_key_before_section_rejected(self, tmp_path):
        p = tmp_path / "bad.cfg"
        p.write_text("node_count = 30\n")
        with pytest.raises(ConfigError, match="before any"):
            parse_config(p)

    def test_speed_bound_violation_names_both_keys(self, tmp_path):
        p = tmp_path / "bad.cfg"
        p.write_text("[mobility]\nv_max = 2\nv_min = 5\n")
        with pytest.raises(ConfigError, match=r"v_min.*v_max"):
            parse_config(p)

    def test_probability_bounds(self):
        with pytest.raises(ConfigError, match="p_wh"):
            parse_config(None, {"sfv.p_wh": "1.5"})

    def test_overrides_win_over_file(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("[sim]\nduration = 100\n")
        cfg = parse_config(p, {"sim.duration": "250"})
        assert cfg.duration == 250.0

    def test_unknown_override_rejected(self):
        with pytest.raises(ConfigError, match="sim.bogus"):
            parse_config(None, {"sim.bogus": "1"})

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            parse_config(tmp_path / "nope.cfg")

    def test_echo_roundtrip_exact(self, tmp_path):
        cfg = parse_config(
            None,
            {
                "sim.master_seed": "123456789",
                "channel.sigma_t": "7.25e-9",
                "sfv.p_i": "0.125",
                "mobility.v_max": "17.5",
            },
        )
        path = echo_config(cfg, tmp_path / "effective.cfg")
        assert parse_config(path) == cfg


class TestCli:
    def test_energy_scenario(self, tmp_path):
        out = tmp_path / "energy"
        assert main(["--scenario", "energy", "--out", str(out)]) == 0
        rows = (out / "energy.csv").read_text().splitlines()
        assert rows[0] == "m_beams,energy"
        assert len(rows) == 9
        energies = [float(r.split(",")[1]) for r in rows[1:]]
        assert all(a > b for a, b in zip(energies, energies[1:]))
        assert (out / "effective.cfg").exists()

    def test_detection_scenario_against_bound(self, tmp_path):
        import math

        out = tmp_path / "detection"
        assert main([
            "--scenario", "detection", "--out", str(out),
            "--trials", "20000", "--master-seed", "5",
        ]) == 0
        rows = (out / "detection.csv").read_text().splitlines()[1:]
        assert len(rows) == 125 * 4
        for row in rows:
            p_wh, p_i, p_r, n, closed, mc = row.split(",")
            closed, mc = float(closed), float(mc)
            bound = 4.0 * math.sqrt(closed * (1.0 - closed) / 20000)
            assert abs(closed - mc) <= max(bound, 1e-12)

    def test_friendliness_scenario_writes_events(self, tmp_path):
        out = tmp_path / "friend"
        assert main(["--scenario", "friendliness", "--out", str(out)]) == 0
        body = (out / "friendliness.csv").read_text()
        assert "reauth_fail" in body and "track_resume" in body

    def test_config_file_via_flag(self, tmp_path):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text("[sim]\nscenario = energy\n[channel]\nbeta = 0.1\n")
        out = tmp_path / "out"
        assert main(["--config", str(cfg_file), "--out", str(out)]) == 0
        row2 = (out / "energy.csv").read_text().splitlines()[2]
        assert row2 == "2,0.45"  # (1/2) * (1 - 0.1)

    def test_unknown_scenario_rejected(self, tmp_path):
        with pytest.raises(SystemExit):
            main(["--scenario", "bogus", "--out", str(tmp_path)])

    def test_bad_set_flag(self, tmp_path):
        assert main(["--set", "nonsense", "--out", str(tmp_path)]) == 2

    def test_set_flag_validation_error(self, tmp_path):
        assert main([
            "--scenario", "energy", "--out", str(tmp_path),
            "--set", "mobility.v_min=9", "--set", "mobility.v_max=2",
        ]) == 2
