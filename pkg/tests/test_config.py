"""Config ingestion: dBm conversion, validation, error reporting."""

import json

import pytest

from cranspar.channel import Estimator, PilotKind
from cranspar.config import dbm_to_mw, load_config, parse_config
from cranspar.defaults import DESK_CONFIG, FULL_SCALE_CONFIG
from cranspar.errors import ConfigurationError
from cranspar.geometry import PdfKind


class TestParseConfig:
    def test_desk_defaults_resolve(self):
        rc = parse_config(DESK_CONFIG)
        net = rc.network
        assert net.num_rrh == 100 and net.num_ue == 80
        assert net.data_power == (pytest.approx(10**2.3),) * 80
        assert net.noise_power == pytest.approx(10**-7.85)
        assert rc.estimator is Estimator.LS
        assert rc.pilot_kind is PilotKind.ORTHOGONAL
        assert rc.pdf.kind is PdfKind.DISC_APPROX

    def test_per_user_power_list(self):
        raw = dict(DESK_CONFIG)
        raw["num_ue"] = 3
        raw["training_length"] = 3
        raw["num_rrh"] = 4
        raw["data_power_dbm"] = [20.0, 23.0, 26.0]
        rc = parse_config(raw)
        assert rc.network.data_power == tuple(
            pytest.approx(dbm_to_mw(p)) for p in (20.0, 23.0, 26.0)
        )

    def test_unknown_key_rejected(self):
        raw = dict(DESK_CONFIG)
        raw["radiu_m"] = 1.0
        with pytest.raises(ConfigurationError, match="unknown key"):
            parse_config(raw)

    def test_missing_keys_all_reported(self):
        with pytest.raises(ConfigurationError) as err:
            parse_config({"radius_m": 5000.0})
        missing = [v for v in err.value.violations if v.startswith("missing")]
        assert len(missing) == 8

    def test_violations_accumulate(self):
        raw = dict(DESK_CONFIG)
        raw["pdf"] = "nope"
        raw["estimator"] = "zf"
        with pytest.raises(ConfigurationError) as err:
            parse_config(raw)
        assert len(err.value.violations) >= 2

    def test_ppp_density_defaults_to_one_point_per_disc(self):
        raw = dict(DESK_CONFIG)
        raw["pdf"] = "ppp"
        rc = parse_config(raw)
        assert rc.pdf.ppp_density == pytest.approx(1.0 / (3.141592653589793 * 5000.0**2))

    def test_network_invariants_surface_as_config_errors(self):
        raw = dict(DESK_CONFIG)
        raw["pathloss_exponent"] = 1.5
        with pytest.raises(ConfigurationError, match="exceed 2"):
            parse_config(raw)

    def test_estimation_error_variance_knob(self):
        raw = dict(DESK_CONFIG)
        raw["estimation_error_variance"] = 0.0
        rc = parse_config(raw)
        assert rc.network.est_error_variance == 0.0


class TestLoadConfig:
    def test_repo_config_files_parse(self, tmp_path):
        for payload in (DESK_CONFIG, FULL_SCALE_CONFIG):
            path = tmp_path / "cfg.json"
            path.write_text(json.dumps(payload))
            rc = load_config(path)
            assert rc.network.radius_m == 5000.0

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError, match="cannot read"):
            load_config(tmp_path / "absent.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ConfigurationError, match="not valid JSON"):
            load_config(path)

    def test_shipped_configs_match_builtins(self):
        from pathlib import Path

        repo = Path(__file__).resolve().parents[1] / "configs"
        assert json.loads((repo / "desk.json").read_text()) == DESK_CONFIG
        assert json.loads((repo / "table1.json").read_text()) == FULL_SCALE_CONFIG
