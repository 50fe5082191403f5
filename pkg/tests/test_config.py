import math

import pytest

import _toycity
from dhforge.config import load_config
from dhforge.errors import InputError


@pytest.fixture()
def city(tmp_path):
    _toycity.write_inputs(tmp_path)
    return tmp_path


class TestLoadConfig:
    def test_defaults_applied(self, city):
        config = load_config(_toycity.config_yaml(city))
        assert config.seed == _toycity.SEED
        assert config.buffer_threshold == 100.0
        assert config.plant_attach_max == 200.0
        assert config.delta_t == 30.0
        assert config.r_max == 250.0
        assert config.v_max == 3.0
        assert config.snap_tolerance == 1.0
        assert config.demand.calendar_year == 2023
        assert config.demand.specific_demand["residential"] == 120.0
        assert config.cluster is None

    def test_paths_resolve_relative_to_config(self, city):
        config = load_config(_toycity.config_yaml(city))
        assert config.buildings == city / "buildings.geojson"
        assert config.network_kml == city / "network.kml"

    def test_flag_overrides_win(self, city):
        config = load_config(_toycity.config_yaml(city), seed=7, output_dir=str(city / "elsewhere"))
        assert config.seed == 7
        assert config.output_dir == city / "elsewhere"

    def test_missing_seed_rejected(self, city):
        path = city / "c.yml"
        path.write_text("network:\n  kml: network.kml\n")
        with pytest.raises(InputError, match="seed"):
            load_config(path)

    def test_network_source_exclusivity(self, city):
        path = city / "c.yml"
        path.write_text("seed: 1\nnetwork: {}\n")
        with pytest.raises(InputError, match="exactly one network source"):
            load_config(path)
        path.write_text("seed: 1\nnetwork:\n  kml: a.kml\n  graph_json: b.json\n")
        with pytest.raises(InputError, match="exactly one network source"):
            load_config(path)

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(InputError, match="not found"):
            load_config(tmp_path / "absent.yml")

    def test_invalid_yaml_rejected(self, city):
        path = city / "c.yml"
        path.write_text("seed: [unclosed\n")
        with pytest.raises(InputError, match="invalid YAML"):
            load_config(path)

    def test_sizing_and_assembly_overrides(self, city):
        extra = (
            "assembly:\n  buffer_m: 80\n  plant_attach_max_m: 50\n"
            "sizing:\n  delta_t_k: 20\n  r_max_pa_m: 100\n  v_max_m_s: 2.5\n"
            "snap_tolerance_m: 0.5\n"
        )
        config = load_config(_toycity.config_yaml(city, extra=extra))
        assert config.buffer_threshold == 80.0
        assert config.plant_attach_max == 50.0
        assert config.delta_t == 20.0
        assert config.r_max == 100.0
        assert config.v_max == 2.5
        assert config.snap_tolerance == 0.5

    def test_slp_override_merges_over_defaults(self, city):
        extra = "  slp:\n    residential:\n      a: 2.5\n      d: 0.2\n"
        config = load_config(_toycity.config_yaml(city, extra=extra))
        res = config.demand.slp_params["residential"]
        assert res.a == 2.5
        assert res.d == 0.2
        assert res.b == -37.2  # default untouched
        assert config.demand.slp_params["office"].a == 3.5

    def test_slp_override_unknown_usage_rejected(self, city):
        extra = "  slp:\n    castle:\n      a: 2.5\n"
        with pytest.raises(InputError, match="castle"):
            load_config(_toycity.config_yaml(city, extra=extra))

    def test_specific_demand_override(self, city):
        extra = "  specific_demand_kwh_m2a:\n    office: 95.0\n"
        config = load_config(_toycity.config_yaml(city, extra=extra))
        assert config.demand.specific_demand["office"] == 95.0
        assert config.demand.specific_demand["residential"] == 120.0

    def test_cluster_settings(self, city):
        config = load_config(_toycity.config_yaml(city, cluster_k=4))
        assert config.cluster.k == 4
        assert config.cluster.contract_degree2 is True
        cc = config.cluster.to_cluster_config(config.seed)
        assert cc.seed == config.seed

    def test_cluster_without_k_rejected(self, city):
        extra = "cluster:\n  max_iter: 5\n"
        with pytest.raises(InputError, match="cluster.k"):
            load_config(_toycity.config_yaml(city, extra=extra))


class TestConfigHash:
    def test_stable_across_output_dir(self, city):
        a = load_config(_toycity.config_yaml(city), output_dir=str(city / "x"))
        b = load_config(_toycity.config_yaml(city), output_dir=str(city / "y"))
        assert a.config_hash == b.config_hash

    def test_changes_with_seed(self, city):
        a = load_config(_toycity.config_yaml(city), seed=1)
        b = load_config(_toycity.config_yaml(city), seed=2)
        assert a.config_hash != b.config_hash
