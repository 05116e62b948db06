"""Configuration types, validation and JSON round-tripping."""

import json

import pytest

from saginsim.scenario import (
    AlgoParams,
    ConfigError,
    RangeError,
    Scenario,
    SchemeError,
    SchemeId,
    apply_overrides,
    default_scenario,
    load_config,
    save_config,
    scenario_from_dict,
    scenario_to_dict,
    validate,
)


def test_default_scenario_reference_values():
    s = default_scenario()
    assert s.area_side_m == 500.0
    assert s.n_sbs == 4
    assert s.n_satellites == 22
    assert s.satellite_altitude_m == 550e3
    assert s.n_channels == 4
    assert s.access_bandwidth_hz == 56e6
    assert s.backhaul_bandwidth_hz == 100e6
    assert s.noise_psd_dbm_hz == -174.0
    assert s.tx_power_dbm == 24.0
    assert s.demand_bps == 1.8e6
    assert s.n_steps == 5740
    assert s.step_seconds == 1.0
    assert s.n_montecarlo == 100
    assert s.fp_iterations == 500
    assert s.user_speed_range_mps == (0.0, 1.3)
    assert s.uav_speed_mps == 10.0
    assert s.uav_alt_range_m == (22.5, 121.9)
    assert s.user_height_m == 1.5
    assert s.sbs_height_m == 15.0
    assert s.reward_weights == (0.5, 0.5)
    assert s.algo_params.pso_population == 20
    assert s.algo_params.pso_inertia == 0.9
    assert s.algo_params.satisfaction_delta == 0.2
    assert s.algo_params.satisfaction_tau == 200
    assert s.algo_params.dqn_batch == 64
    assert s.algo_params.dqn_replay == 600
    assert s.algo_params.dqn_hidden == 200


def test_validate_is_idempotent():
    s = default_scenario()
    assert validate(validate(s)) == validate(s)


def test_altitude_range_inverted_rejected():
    with pytest.raises(RangeError):
        validate(Scenario(uav_alt_range_m=(121.9, 22.5)))


def test_zero_channels_rejected():
    with pytest.raises(RangeError):
        validate(Scenario(n_channels=0))


def test_epsilon_out_of_range_rejected():
    with pytest.raises(RangeError):
        validate(Scenario(algo_params=AlgoParams(epsilon=1.5)))


def test_negative_users_rejected():
    with pytest.raises(RangeError):
        validate(Scenario(n_users=-1))


def test_zero_reward_weights_rejected():
    with pytest.raises(RangeError):
        validate(Scenario(reward_weights=(0.0, 0.0)))


def test_unknown_key_named_in_error():
    with pytest.raises(ConfigError, match="n_userz"):
        scenario_from_dict({"n_userz": 10})


def test_unknown_algo_key_named_in_error():
    with pytest.raises(ConfigError, match="epsilonn"):
        scenario_from_dict({"algo_params": {"epsilonn": 0.3}})


def test_unknown_scheme_lists_valid_names():
    with pytest.raises(SchemeError, match="sat3d_ca"):
        scenario_from_dict({"scheme": "nope"})


def test_dqn_scheme_requires_dqn_params():
    with pytest.raises(SchemeError, match="dqn_lr"):
        scenario_from_dict({"scheme": "dqn_ca3d", "algo_params": {"dqn_lr": None}})


def test_null_dqn_params_fine_for_other_schemes():
    s = scenario_from_dict({"scheme": "sat2d", "algo_params": {"dqn_lr": None}})
    assert s.algo_params.dqn_lr is None


def test_batch_larger_than_replay_rejected():
    with pytest.raises(SchemeError, match="dqn_batch"):
        scenario_from_dict(
            {"scheme": "dqn_ca3d", "algo_params": {"dqn_batch": 700, "dqn_replay": 600}}
        )


def test_json_round_trip_exact(tmp_path):
    s = scenario_from_dict(
        {
            "n_users": 77,
            "scheme": "mab3d_ca",
            "seed": 42,
            "user_speed_range_mps": [0.1, 0.9],
            "algo_params": {"epsilon": 0.25, "q_alpha": 0.5},
        }
    )
    path = tmp_path / "config.json"
    save_config(s, path)
    loaded = load_config(path)
    assert loaded == s
    # and the dict form round-trips too
    assert scenario_from_dict(scenario_to_dict(s)) == s


def test_load_config_missing_file():
    with pytest.raises(ConfigError, match="no/such/file"):
        load_config("no/such/file.json")


def test_load_config_bad_json(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError, match="invalid JSON"):
        load_config(p)


def test_pair_field_requires_two_numbers():
    with pytest.raises(ConfigError):
        scenario_from_dict({"reward_weights": [0.5]})
    with pytest.raises(ConfigError):
        scenario_from_dict({"reward_weights": ["a", "b"]})


def test_apply_overrides_nested():
    s = default_scenario()
    s2 = apply_overrides(s, {"n_steps": 10, "algo_params.epsilon": 0.3})
    assert s2.n_steps == 10
    assert s2.algo_params.epsilon == 0.3
    assert s2.n_users == s.n_users


def test_scheme_properties():
    assert SchemeId.SAT_3D_CA.is_3d and SchemeId.SAT_3D_CA.learned_ca
    assert not SchemeId.SAT_2D.is_3d and not SchemeId.SAT_2D.learned_ca
    assert SchemeId.PSO_3D.is_3d and not SchemeId.PSO_3D.learned_ca
    assert SchemeId.DQN_CA_3D.family == "dqn"
    assert SchemeId.Q_LEARNING_2D.family == "qlearn"
    assert {m.family for m in SchemeId} == {"sat", "mab", "pso", "qlearn", "dqn"}
