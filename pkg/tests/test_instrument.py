import numpy as np
import pytest

from landscape_rover.instrument import (MEASUREMENT_COST, BudgetExhausted, LabClock,
                                        NoiseModel, Spectrometer)
from landscape_rover.spin import dc_optimum

X_MID = np.array([5.0, -3.0, 8.0, 1.0, 12.0, 20.0, 15.0, 9.0])


def test_noiseless_optimum_is_exact():
    inst = Spectrometer(noise=NoiseModel(sigma=0.0))
    assert inst.measure(dc_optimum()).value == inst.true_value(dc_optimum())
    assert inst.measure(dc_optimum()).value == pytest.approx(1.0, abs=1e-15)


def test_sample_std_of_100_repeats():
    inst = Spectrometer(noise=NoiseModel(sigma=1e-3, seed=7))
    values = [inst.measure(X_MID).value for _ in range(100)]
    assert 0.7e-3 <= np.std(values, ddof=1) <= 1.3e-3


def test_same_seed_same_stream():
    a = Spectrometer(noise=NoiseModel(1e-3, seed=99))
    b = Spectrometer(noise=NoiseModel(1e-3, seed=99))
    va = [a.measure(X_MID).value for _ in range(20)]
    vb = [b.measure(X_MID).value for _ in range(20)]
    assert va == vb


def test_different_seeds_are_independent():
    a = Spectrometer(noise=NoiseModel(1.0, seed=1))
    b = Spectrometer(noise=NoiseModel(1.0, seed=2))
    na = np.array([a.measure(X_MID).value for _ in range(2000)])
    nb = np.array([b.measure(X_MID).value for _ in range(2000)])
    assert not np.array_equal(na, nb)
    # correlation of independent N(0,1) streams: |r| < 5/sqrt(n)
    assert abs(np.corrcoef(na, nb)[0, 1]) < 5 / np.sqrt(2000)


def test_noise_is_additive_gaussian():
    sigma, n = 1e-3, 10_000
    inst = Spectrometer(noise=NoiseModel(sigma, seed=5))
    resid = np.array([inst.measure(X_MID).value for _ in range(n)]) - inst.true_value(X_MID)
    assert abs(resid.mean()) < 5 * sigma / np.sqrt(n)
    # var of the sample variance is 2 sigma^4 / (n - 1)
    assert abs(resid.var(ddof=1) - sigma**2) < 5 * sigma**2 * np.sqrt(2 / (n - 1))


def test_repeated_single_shot_is_degenerate():
    inst = Spectrometer()
    rep = inst.measure_repeated(X_MID, 1)
    assert rep.std == 0.0 and rep.degenerate and rep.n == 1


def test_repeated_mean_within_band():
    sigma = 1e-3
    inst = Spectrometer(noise=NoiseModel(sigma, seed=3))
    rep = inst.measure_repeated(X_MID, 5)
    assert abs(rep.mean - inst.true_value(X_MID)) <= 4 * sigma / np.sqrt(5)
    assert not rep.degenerate


def test_repeated_noiseless_std_is_zero():
    inst = Spectrometer(noise=NoiseModel(0.0))
    assert inst.measure_repeated(X_MID, 100).std == 0.0


def test_repeated_rejects_zero():
    with pytest.raises(ValueError):
        Spectrometer().measure_repeated(X_MID, 0)


def test_clock_accounting_and_ticks():
    inst = Spectrometer()
    ticks, times = [], []
    for _ in range(5):
        ticks.append(inst.measure(X_MID).tick)
        times.append(inst.clock.total_lab_time)
    inst.measure_repeated(X_MID, 4)
    assert ticks == [1, 2, 3, 4, 5]
    assert times == sorted(times)
    assert inst.clock.measurement_count == 9
    assert inst.clock.total_lab_time == pytest.approx(9 * 3.0)
    assert MEASUREMENT_COST == 3.0


def test_budget_exhaustion():
    inst = Spectrometer(budget=3)
    for _ in range(3):
        inst.measure(X_MID)
    with pytest.raises(BudgetExhausted):
        inst.measure(X_MID)
    assert inst.clock.measurement_count == 3
    assert inst.clock.remaining == 0


def test_lab_clock_tick():
    clock = LabClock(budget=1)
    assert clock.tick() == 1
    with pytest.raises(BudgetExhausted):
        clock.tick()


def test_invalid_noise_model():
    with pytest.raises(ValueError):
        NoiseModel(sigma=-1.0)


def test_custom_objective_needs_dim():
    with pytest.raises(ValueError):
        Spectrometer(objective=lambda x: 0.0)
    inst = Spectrometer(objective=lambda x: float(x.sum()), dim=3, noise=NoiseModel(0.0))
    assert inst.measure([1, 2, 3]).value == 6.0
    with pytest.raises(ValueError):
        inst.measure([1, 2])


def test_derived_rng_is_deterministic_and_label_specific():
    inst = Spectrometer(noise=NoiseModel(seed=4))
    a = inst.derived_rng("x").standard_normal(3)
    b = inst.derived_rng("x").standard_normal(3)
    c = inst.derived_rng("y").standard_normal(3)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
