import math
import pickle
import warnings

import pytest
import numpy as np

from src.core.errors import ReachingMarginWarning
from src.core.models import ApfGains, Scenario, SwarmConfig, Variant
from src.services.simulation import RolloutOptions, fitness, rollout
from src.engines.world import read_bundle
from src.services.tuning import RolloutFitness, compare, tune, winner

from .test_world import PRESETS

OPTIONS = RolloutOptions(dt=0.05)


@pytest.fixture
def quick_hop():
    return Scenario(name="quick-hop", start_quad_position=(0.0, 0.0, -2.0),
                    target_load_position=(1.0, 0.0, -1.25), horizon=4.0, control_timestep=0.01)


def small_swarm(variant=Variant.SAPSO, seed=5):
    return SwarmConfig(particles=4, iterations=2, variant=variant, seed=seed)


def test_objective_survives_pickling(quick_hop, reference_model, smc_gains, stiff_pid):
    objective = RolloutFitness(quick_hop, reference_model, smc_gains, stiff_pid, 5.0, 1.0, OPTIONS)
    clone = pickle.loads(pickle.dumps(objective))
    vector = np.full(6, 0.05)
    assert clone(vector) == objective(vector)


def test_objective_is_finite_and_positive(quick_hop, reference_model, smc_gains, stiff_pid):
    objective = RolloutFitness(quick_hop, reference_model, smc_gains, stiff_pid, 5.0, 1.0, OPTIONS)
    value = objective(np.full(6, 0.1))
    assert math.isfinite(value)
    assert value > 0.0


def test_tune_returns_gains_inside_box(quick_hop, reference_model, smc_gains, stiff_pid):
    tuned = tune(quick_hop, reference_model, smc_gains, stiff_pid, small_swarm(), options=OPTIONS)
    vector = np.array(tuned.gains.k_m + tuned.gains.k_t)
    assert np.all(vector >= 0.001) and np.all(vector <= 1.0)
    assert tuned.gains.rho0 == ApfGains().rho0
    assert tuned.result.evaluations == 8
    assert len(tuned.result.history) == 2
    assert tuned.result.history[1] <= tuned.result.history[0]


def test_tune_keeps_fixed_shape_parameters(quick_hop, reference_model, smc_gains, stiff_pid):
    base = ApfGains(rho0=3.0, n_exp=2.0)
    tuned = tune(quick_hop, reference_model, smc_gains, stiff_pid, small_swarm(), base=base, options=OPTIONS)
    assert (tuned.gains.rho0, tuned.gains.n_exp) == (3.0, 2.0)


def test_tune_rejects_wrong_dimension(quick_hop, reference_model, smc_gains, stiff_pid):
    cfg = SwarmConfig(particles=4, iterations=1, lower=(0.001,) * 3, upper=(1.0,) * 3)
    with pytest.raises(ValueError, match="6 dimensions"):
        tune(quick_hop, reference_model, smc_gains, stiff_pid, cfg, options=OPTIONS)


def test_tune_rejects_box_outside_gain_range(quick_hop, reference_model, smc_gains, stiff_pid):
    cfg = SwarmConfig(particles=4, iterations=1, lower=(0.0,) * 6, upper=(2.0,) * 6)
    with pytest.raises(ValueError, match="gain bounds"):
        tune(quick_hop, reference_model, smc_gains, stiff_pid, cfg, options=OPTIONS)


def test_compare_runs_every_variant_on_the_same_seed(quick_hop, reference_model, smc_gains, stiff_pid):
    results = compare(quick_hop, reference_model, smc_gains, stiff_pid, small_swarm(), options=OPTIONS)
    assert list(results) == ["classic", "tviw", "sapso"]
    assert all(r.result.variant == name for name, r in results.items())
    # shared seed means a shared initial swarm, so the first iteration agrees
    first = {r.result.history[0] for r in results.values()}
    assert len(first) == 1
    name, best = winner(results)
    assert best == min(r.result.gbest_f for r in results.values())
    assert results[name].result.gbest_f == best


def test_winner_ties_go_to_earlier_variant():
    class Stub:
        def __init__(self, value):
            self.result = type("R", (), {"gbest_f": value})()

    assert winner({"classic": Stub(1.0), "tviw": Stub(1.0), "sapso": Stub(2.0)}) == ("classic", 1.0)


@pytest.mark.slow
def test_process_pool_matches_sequential(quick_hop, reference_model, smc_gains, stiff_pid):
    sequential = tune(quick_hop, reference_model, smc_gains, stiff_pid, small_swarm(), options=OPTIONS)
    pooled = tune(quick_hop, reference_model, smc_gains, stiff_pid, small_swarm(), options=OPTIONS, workers=2)
    np.testing.assert_array_equal(sequential.result.gbest_x, pooled.result.gbest_x)
    assert sequential.result.history == pooled.result.history


def test_degenerate_mission_is_flat(reference_model, smc_gains, stiff_pid):
    hover = Scenario(start_quad_position=(0.0, 0.0, -2.0), target_load_position=(0.0, 0.0, -1.25),
                     horizon=4.0, control_timestep=0.01)
    tuned = tune(hover, reference_model, smc_gains, stiff_pid, small_swarm(), options=OPTIONS)
    assert all(value < 1e-6 for value in tuned.result.history)


@pytest.mark.slow
def test_tuned_gains_beat_box_midpoint(short_hop, reference_model, smc_gains, stiff_pid):
    options = RolloutOptions(dt=0.01)
    cfg = SwarmConfig(particles=10, iterations=10, seed=11)
    tuned = tune(short_hop, reference_model, smc_gains, stiff_pid, cfg, options=options)
    midpoint = RolloutFitness(short_hop, reference_model, smc_gains, stiff_pid, 5.0, 1.0, options)
    assert tuned.result.gbest_f < midpoint(np.full(6, 0.5005))


@pytest.mark.slow
def test_variant_ranking_on_reference_mission():
    bundle = read_bundle(PRESETS / "reference_mission")
    options = RolloutOptions(dt=0.01, leader=bundle.leader)
    wins = 0
    for seed in range(4):
        cfg = SwarmConfig(particles=20, iterations=30, seed=seed)
        results = compare(bundle.scenario, bundle.model, bundle.smc, bundle.pid, cfg, bundle.apf, options)
        best = {name: r.result.gbest_f for name, r in results.items()}
        wins += (best["sapso"] <= 1.05 * best["tviw"]
                 and best["sapso"] <= best["classic"] and best["tviw"] <= best["classic"])
    assert wins >= 3


@pytest.fixture(scope="module")
def reference_tuning():
    bundle = read_bundle(PRESETS / "reference_mission")
    cfg = bundle.swarm.model_copy(update={"particles": 20, "iterations": 30})
    options = RolloutOptions(dt=0.01, leader=bundle.leader)
    tuned = tune(bundle.scenario, bundle.model, bundle.smc, bundle.pid, cfg, bundle.apf, options)
    return bundle, tuned


@pytest.mark.slow
def test_tuned_reference_gains_are_plausible(reference_tuning):
    _, tuned = reference_tuning
    vector = np.array(tuned.gains.k_m + tuned.gains.k_t)
    assert np.all(vector >= 0.001) and np.all(vector <= 1.0)
    for k_m, k_t in zip(tuned.gains.k_m, tuned.gains.k_t):
        assert k_m > k_t


@pytest.mark.slow
def test_reference_mission_succeeds_with_tuned_gains(reference_tuning):
    bundle, tuned = reference_tuning
    with warnings.catch_warnings():
        warnings.simplefilter("error", ReachingMarginWarning)
        log = rollout(bundle.scenario, tuned.gains, bundle.smc, bundle.pid, bundle.model,
                      RolloutOptions(leader=bundle.leader))
    report = fitness(log, bundle.scenario.target)
    assert not report.collided and not report.faulted
    assert report.min_clearance > 0
    assert report.final_error < 0.5
    x, y, z = report.settle_time_axis
    assert z is not None
    assert all(other is None or z <= other for other in (x, y))
