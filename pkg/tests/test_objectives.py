import numpy as np
import pytest

from conftest import random_density
from tqoc.errors import NotDensityMatrixError
from tqoc.model import embed_diagonal, realify
from tqoc.objectives import (MAXIMIZE_OVERLAP, MINIMIZE_OVERLAP,
                             SMOOTHED_DEVIATION, SQUARED_DEVIATION,
                             ObjectiveSpec, evaluate, overlap, overlap_bounds,
                             transversality)


def spec_min(target):
    return ObjectiveSpec(MINIMIZE_OVERLAP, target)


def test_overlap_pure_state_with_itself():
    x = embed_diagonal((1, 0, 0, 0))
    assert overlap(x, spec_min(x)) == 1.0


def test_overlap_reference_values():
    x = embed_diagonal((1, 0, 0, 0))
    target = embed_diagonal((0.2, 0.2, 0.2, 0.4))
    assert overlap(x, spec_min(target)) == pytest.approx(0.2, abs=1e-15)
    mixed = embed_diagonal((0.25,) * 4)
    target2 = embed_diagonal((0.7, 0.1, 0.1, 0.1))
    assert overlap(mixed, spec_min(target2)) == pytest.approx(0.25, abs=1e-15)


def test_overlap_equals_trace_inner_product():
    rng = np.random.default_rng(12)
    for _ in range(50):
        rho, sigma = random_density(rng), random_density(rng)
        via_weights = overlap(realify(rho), spec_min(realify(sigma)))
        direct = float(np.trace(rho @ sigma).real)
        assert abs(via_weights - direct) < 1e-12


def test_evaluate_all_kinds():
    x = embed_diagonal((0.37, 0.63, 0.0, 0.0))
    target = embed_diagonal((1, 0, 0, 0))  # overlap = 0.37
    assert evaluate(x, ObjectiveSpec(MAXIMIZE_OVERLAP, target,
                                     upper_bound=1.0)) == pytest.approx(0.63)
    assert evaluate(x, spec_min(target)) == pytest.approx(0.37)
    assert evaluate(x, ObjectiveSpec(SQUARED_DEVIATION, target,
                                     setpoint=0.5)) == pytest.approx(0.0169)


def test_smoothed_branches_and_continuity():
    target = embed_diagonal((1, 0, 0, 0))
    theta = 1e-3

    def value(f):
        x = embed_diagonal((f, 1 - f, 0, 0))
        return evaluate(x, ObjectiveSpec(SMOOTHED_DEVIATION, target,
                                         setpoint=0.5, smoothing=theta))

    assert value(0.5) == pytest.approx(theta / 2)
    assert value(0.5 + theta) == pytest.approx(theta)     # both branches agree
    assert value(0.5 - theta) == pytest.approx(theta)
    assert value(0.5 + 2 * theta) == pytest.approx(2 * theta)
    assert value(0.5 - 2 * theta) == pytest.approx(2 * theta)
    # one-sided slopes at the seams are +-1
    h = 1e-7
    up = (value(0.5 + theta + h) - value(0.5 + theta)) / h
    down = (value(0.5 + theta) - value(0.5 + theta - h)) / h
    assert up == pytest.approx(1.0, abs=1e-4)
    assert down == pytest.approx(1.0, abs=1e-4)


def test_transversality_values():
    target = embed_diagonal((0.7, 0.1, 0.1, 0.1))
    x = embed_diagonal((0.25,) * 4)  # overlap 0.25
    w = ObjectiveSpec(MINIMIZE_OVERLAP, target).weighted_target

    p_max = transversality(x, ObjectiveSpec(MAXIMIZE_OVERLAP, target,
                                            upper_bound=0.7))
    assert np.array_equal(p_max, w)          # diagonal target: w == target
    assert np.array_equal(p_max, target)
    p_min = transversality(x, spec_min(target))
    assert np.array_equal(p_min, -w)

    p_sq = transversality(x, ObjectiveSpec(SQUARED_DEVIATION, target,
                                           setpoint=0.25))
    assert np.max(np.abs(p_sq)) == 0.0
    p_sq2 = transversality(x, ObjectiveSpec(SQUARED_DEVIATION, target,
                                            setpoint=0.5))
    assert np.allclose(p_sq2, -2.0 * (0.25 - 0.5) * w)


def test_transversality_smoothed_branches():
    target = embed_diagonal((1, 0, 0, 0))
    theta = 1e-3
    w = spec_min(target).weighted_target

    def p_at(f):
        x = embed_diagonal((f, 1 - f, 0, 0))
        return transversality(x, ObjectiveSpec(SMOOTHED_DEVIATION, target,
                                               setpoint=0.5, smoothing=theta))

    assert np.array_equal(p_at(0.3), w)       # far below: push overlap up
    assert np.array_equal(p_at(0.7), -w)      # far above: push it down
    assert np.max(np.abs(p_at(0.5))) == 0.0   # on target: stationary
    # inner branch is continuous with the outer ones
    assert np.allclose(p_at(0.5 - theta), w, atol=1e-9)
    assert np.allclose(p_at(0.5 + theta), -w, atol=1e-9)


def test_overlap_bounds_reference_values():
    lo, hi = overlap_bounds(np.diag([0.2, 0.2, 0.2, 0.4]).astype(complex))
    assert lo == pytest.approx(0.2, abs=1e-12)
    assert hi == pytest.approx(0.4, abs=1e-12)
    assert overlap_bounds(np.diag([0.7, 0.1, 0.1, 0.1]).astype(complex)).upper \
        == pytest.approx(0.7, abs=1e-12)
    assert overlap_bounds(np.diag([1.0, 0, 0, 0]).astype(complex)).upper \
        == pytest.approx(1.0, abs=1e-12)


def test_overlap_bounds_unitary_invariance():
    rng = np.random.default_rng(13)
    for _ in range(20):
        rho = random_density(rng)
        q, _ = np.linalg.qr(rng.normal(size=(4, 4))
                            + 1j * rng.normal(size=(4, 4)))
        rotated = q @ rho @ q.conj().T
        a = overlap_bounds(rho)
        b = overlap_bounds(rotated)
        assert a.lower == pytest.approx(b.lower, abs=1e-10)
        assert a.upper == pytest.approx(b.upper, abs=1e-10)


def test_overlap_bounds_contain_trajectory_overlaps(matrices):
    from tqoc.controls import ControlGrid
    from tqoc.dynamics import propagate_forward
    rng = np.random.default_rng(14)
    target_rho = random_density(rng)
    spec = spec_min(realify(target_rho))
    lo, hi = overlap_bounds(target_rho)
    grid = ControlGrid(2.0, 10, rng.uniform(-1, 1, 10),
                       rng.uniform(0, 2, 10), rng.uniform(0, 2, 10))
    traj = propagate_forward(matrices, grid, realify(random_density(rng)))
    for x in traj.states:
        f = overlap(x, spec)
        assert lo - 1e-9 <= f <= hi + 1e-9


def test_overlap_bounds_rejects_bad_input():
    with pytest.raises(NotDensityMatrixError):
        overlap_bounds(np.diag([0.9, 0.4, -0.2, -0.1]).astype(complex))
    with pytest.raises(NotDensityMatrixError):
        overlap_bounds(np.diag([0.5, 0.2, 0.2, 0.2]).astype(complex))


def test_spec_validation():
    target = embed_diagonal((1, 0, 0, 0))
    with pytest.raises(ValueError):
        ObjectiveSpec(MAXIMIZE_OVERLAP, target)  # missing upper_bound
    with pytest.raises(ValueError):
        ObjectiveSpec(SQUARED_DEVIATION, target, setpoint=1.5)
    with pytest.raises(ValueError):
        ObjectiveSpec(SMOOTHED_DEVIATION, target, setpoint=0.5, smoothing=0.0)
    with pytest.raises(ValueError):
        ObjectiveSpec("overlap", target)
    with pytest.raises(ValueError):
        ObjectiveSpec(MINIMIZE_OVERLAP, 2.0 * target)
