import math

import pytest

import rlfep


def test_trim_is_level_and_converged():
    t = rlfep.trim()
    assert 0.0 < t["alpha_deg"] < 15.0
    assert max(abs(r) for r in t["residuals"]) < 1e-8


def test_reward_terms():
    assert rlfep.r_tracking(10.0, 10.0) == 0.0
    assert rlfep.r_alpha(20.0, 25.0) == 0.0
    assert rlfep.r_nz(12.0, 9.0) == pytest.approx(-(1.0 / 3.0) ** 2, rel=1e-12)
    assert rlfep.r_q(-40.0, -10.0) < 0.0


def test_config_round_trip_and_overrides():
    cfg = rlfep.default_config()
    assert {"simulation", "limits", "reward", "agent", "training", "sweep", "scenarios"} <= set(cfg)
    text = rlfep.config_json({"sweep": {"increment": 5.0}})
    assert '"increment": 5.0' in text
    with pytest.raises(rlfep.ConfigError):
        rlfep.normalize_config_json('{"agent": {"batch_size": 0}}')


def test_env_steps_and_terminates():
    env = rlfep.Env(mode="rl", q_cmd=5.0, seed=3)
    obs = env.reset()
    assert len(obs) == rlfep.OBS_DIM
    assert env.apply_action(-1.0) == -20.0
    steps = 0
    done = False
    while not done:
        obs, reward, done, info = env.step(-0.2)
        assert all(math.isfinite(x) for x in obs)
        steps += 1
    assert steps == 1000
    assert info["truncated"]


def test_classical_scenarios():
    one = rlfep.run_scenario("1", "classical")
    assert not one["summary"]["failed"]
    assert len(one["columns"]["t"]) == 1000
    three = rlfep.run_scenario("3", "classical")
    assert three["summary"]["q_min"] < -10.0


def test_rl_without_policy_is_rejected():
    with pytest.raises(rlfep.ConfigError):
        rlfep.run_scenario("1", "rl")


def test_short_training_and_policy(tmp_path):
    cfg = rlfep.config_json({"agent": {"warmup": 200}})
    res = rlfep.train(str(tmp_path), episodes=2, seed=4, config_json=cfg)
    assert res["episodes"] == 2
    policy = rlfep.Policy(res["checkpoint"])
    a = policy([1.0, 0.02, 0.0, 0.0, 0.0, 0.0, 30000.0])
    assert -1.0 <= a <= 1.0
    rows = rlfep.sweep("rl", res["checkpoint"], config_json=rlfep.config_json({"sweep": {"increment": 17.5}}))
    assert [r["q_cmd"] for r in rows] == [-10.0, 7.5, 25.0]
    assert 0.0 <= rlfep.pass_rate(rows) <= 1.0
    with pytest.raises(rlfep.CheckpointError):
        rlfep.Policy(str(tmp_path / "missing.bin"))
