import math

import pytest

import hrfi


def test_bias_model_and_map():
    p = hrfi.BiasParameters(1.0, -0.5)
    assert hrfi.implicit_equilibrium(p) == pytest.approx(1.0)
    assert hrfi.implicit_gain(p, 0.5) == pytest.approx(0.41421356237309515)
    assert hrfi.reproduce(p, 4.0) == pytest.approx(2.0)
    assert hrfi.step(p, 4.0) == pytest.approx(2.0)
    assert hrfi.bias(p, 4.0) < 0 < hrfi.bias(p, 0.25)


def test_simulate_converges_in_log_space():
    p = hrfi.BiasParameters(1.006, -0.625)
    gamma = hrfi.implicit_equilibrium(p)
    trace = hrfi.simulate(p, 10 * gamma, 40)
    assert len(trace["human"]) == 40
    assert abs(trace["human"][-1] - gamma) < 0.01 * gamma
    flat = hrfi.simulate(p, 3.0, 5, bias=False)
    assert flat["human"] == [3.0] * 5


def test_invalid_parameters_raise_value_error():
    with pytest.raises(ValueError):
        hrfi.BiasParameters(1.0, 0.5)
    with pytest.raises(ValueError):
        hrfi.reproduce(hrfi.BiasParameters(1.0, -0.5), -1.0)


def test_lyapunov_routes_agree():
    p = hrfi.BiasParameters(1.3, -0.7)
    gamma = hrfi.implicit_equilibrium(p)
    for r in (0.2, 0.9, 1.7, 6.0):
        delta = hrfi.implicit_gain(p, r)
        sign = (gamma > r) - (gamma < r)
        closed = hrfi.delta_v_closed_form(gamma, r, delta, sign)
        direct = hrfi.delta_v_direct(gamma, r, hrfi.step(p, r))
        assert direct == pytest.approx(closed, rel=1e-9)
        assert hrfi.evaluation_value(gamma, r, delta) < 0


def test_fit_recovers_noiseless_parameters():
    p = hrfi.BiasParameters(1.006, -0.625)
    stimuli = [float(r) for r in range(1, 11)]
    responses = [hrfi.reproduce(p, r) for r in stimuli]
    fit = hrfi.fit_power_law(stimuli, responses)
    assert fit.converged
    assert fit.status == hrfi.FitStatus.converged
    assert fit.params.alpha == pytest.approx(1.006, abs=1e-8)
    assert fit.params.beta == pytest.approx(-0.625, abs=1e-8)
    with pytest.raises(hrfi.DegenerateError):
        hrfi.fit_power_law([2.0, 2.0, 2.0], [1.0, 1.1, 0.9])


def test_stats():
    assert hrfi.stats.t_cdf(0.0, 3) == 0.5
    r = hrfi.stats.one_sample_t([-2, -1, -3, -2, -2])
    assert r.statistic == pytest.approx(-6.324555320336759)
    assert r.p_value == pytest.approx(0.0015991010761676533, rel=1e-9)
    assert r.significant()
    paired = hrfi.stats.paired_t([0.9, 0.8, 1.0], [0.2, 0.3, 0.25], "greater")
    assert paired.dof == 2 and paired.p_value < 0.05
    with pytest.raises(ValueError):
        hrfi.stats.paired_t([1, 2], [0, 1], "sideways")
    assert hrfi.stats.outlier_flag([[0.2], [0.25], [0.3], [8.0]]) == {3}


def test_region_from_significance_pattern():
    sig = [-2, -1, -3, -2, -2]
    nonsig = [0.5, -0.4, 0.3, -0.2, 0.1]
    est = hrfi.estimate_unstable_region(
        {0.746: sig, 0.800: nonsig, 1.201: nonsig, 1.260: sig})
    region = est["region"]
    assert region["lower"] == pytest.approx(0.773, abs=1e-12)
    assert region["upper"] == pytest.approx(1.2305, abs=1e-12)
    assert region["reported"] == pytest.approx((0.773, 1.231, 0.229), abs=1e-12)


def test_cohort_is_deterministic():
    cfg = hrfi.CohortConfig()
    cfg.agents = 6
    cfg.noise_sigma = 0.2
    cfg.seed = 3
    a = hrfi.run_cohort(cfg)
    cfg.threads = 1
    b = hrfi.run_cohort(cfg)
    assert [x["gamma_hat"] for x in a["agents"]] == [
        x["gamma_hat"] for x in b["agents"]]
    assert a["divergence_rate"] == b["divergence_rate"]
    assert len(a["agents"][0]["traces"]) == 10


def test_servo_step_settles():
    ctrl = hrfi.servo.ControllerParams()
    plant = hrfi.servo.PlantParams()
    plant.load_stiffness = 100.0
    plant.load_damping = 2.0
    out = hrfi.servo.run("force", ctrl, plant, torque_cmd=1.0, seconds=1.0)
    assert out["reaction_estimate"][-1] == pytest.approx(1.0, abs=0.01)
    rest = hrfi.servo.run("position", ctrl, hrfi.servo.PlantParams())
    assert max(abs(x) for x in rest["theta"]) == 0.0
    ctrl.dt = 0.01
    with pytest.raises(ValueError):
        hrfi.servo.run("force", ctrl, plant, 1.0, 1.0)
    assert math.isfinite(out["theta"][-1])
