import math
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracvar.grid import GridFunction, MemoryWindow, interior_mask
from fracvar.lagrangian import REGISTRY, ZERO, Lagrangian, get_lagrangian
from fracvar.solver import (
    ProblemSpec,
    SolveResult,
    discretize_functional,
    functional_gradient,
    solve_direct,
    verify_extremal,
)

from oracles import mittag_leffler

ML_HALF = mittag_leffler(0.5, 1.0)
UNIT = MemoryWindow.classical(0.0, 1.0)


def custom(value, d_u, d_p, **kw):
    return Lagrangian(value, d_u, d_p, **kw)


def ml_spec(n, alpha=0.5, **kw):
    L, kind = get_lagrangian("caputo-eigen", alpha)
    return ProblemSpec(L, UNIT, alpha, kind=kind, left=1.0, n=n, lagrangian_id="caputo-eigen", **kw)


def test_oracle_value():
    # E_{1/2}(1) = e erfc(-1)
    from scipy.special import erfc

    assert ML_HALF == pytest.approx(math.e * erfc(-1.0), rel=1e-14)
    assert ML_HALF == pytest.approx(5.00898, abs=5e-6)


# {{{ functional


@pytest.mark.parametrize("window", [UNIT, MemoryWindow(-0.5, 0.0, 1.0, 1.0), MemoryWindow(0.0, 0.25, 0.75, 1.0)])
@pytest.mark.parametrize("right_singular", [False, True])
def test_constant_lagrangian_integrates_to_window_length(window, right_singular):
    L = custom(
        lambda t, u, p: 1.0 + 0 * (t + u + p),
        lambda t, u, p: 0 * (t + u + p),
        lambda t, u, p: 0 * (t + u + p),
        domain=(-0.5, 1.0),
        right_singular=right_singular,
    )
    spec = ProblemSpec(L, window, 0.5, n=60)
    u = spec.initial_guess()
    assert discretize_functional(spec, u) == pytest.approx(window.B - window.A, rel=1e-14)


def test_u_squared_integral():
    L = custom(lambda t, u, p: u**2 + 0 * p, lambda t, u, p: 2 * u + 0 * p, lambda t, u, p: 0 * (t + u + p))
    for n in (16, 64, 256):
        spec = ProblemSpec(L, UNIT, 0.5, left=0.0, right=1.0, n=n)
        u = GridFunction.from_callable(lambda t: t, 0.0, 1.0, n)
        assert abs(discretize_functional(spec, u) - 1.0 / 3.0) <= spec.h**2


def test_exact_solution_has_small_objective():
    vals = []
    for n in (128, 512):
        spec = ml_spec(n)
        u = GridFunction(0.0, 1.0, [mittag_leffler(0.5, s**0.5) for s in spec.t])
        vals.append(discretize_functional(spec, u))
        # first-order in h: the solution has a square-root term at t = 0
        assert vals[-1] <= 0.25 * spec.h
    assert vals[1] < 0.3 * vals[0]


def test_boundary_mismatch():
    spec = ml_spec(32)
    with pytest.raises(ValueError, match="pinned"):
        discretize_functional(spec, GridFunction(0.0, 1.0, np.zeros(33)))
    with pytest.raises(ValueError, match="n ="):
        discretize_functional(spec, GridFunction(0.0, 1.0, np.ones(17)))
    pinned = ProblemSpec(spec.lagrangian, UNIT, 0.5, kind="caputo", left=1.0, right=2.0, n=32)
    with pytest.raises(ValueError, match="u\\(B\\)"):
        solve_direct(pinned, GridFunction(0.0, 1.0, np.ones(33)))


def test_problem_validation():
    L, _ = get_lagrangian("quadratic", 0.5)
    with pytest.raises(ValueError):
        ProblemSpec(L, UNIT, 1.5)
    with pytest.raises(ValueError):
        ProblemSpec(L, UNIT, 0.5, kind="hadamard")
    with pytest.raises(ValueError):
        ProblemSpec(L, UNIT, 0.5, n=2)
    with pytest.raises(ValueError):
        ProblemSpec(L, MemoryWindow(0.0, 0.3, 1.0, 1.0), 0.5, n=8)
    with pytest.raises(ValueError):
        ProblemSpec(L, MemoryWindow(-1.0, 0.0, 1.0, 1.0), 0.5, kind="riesz-caputo", n=8)
    with pytest.raises(ValueError):
        ProblemSpec(L, UNIT, 0.5, left=math.nan)


def _fd_gradient(spec, u, eps=1e-4):
    fd = np.zeros(u.values.size)
    for k in np.flatnonzero(spec.free_mask()):
        up, um = u.values.copy(), u.values.copy()
        up[k] += eps
        um[k] -= eps
        fd[k] = (
            discretize_functional(spec, u.with_values(up)) - discretize_functional(spec, u.with_values(um))
        ) / (2 * eps)
    return fd


@pytest.mark.parametrize("name", sorted(REGISTRY))
@settings(max_examples=5)
@given(seed=st.integers(0, 2**32 - 1), alpha=st.sampled_from([0.25, 0.5, 0.75]))
def test_gradient_matches_central_differences(name, seed, alpha):
    rng = np.random.default_rng(seed)
    L, kind = get_lagrangian(name, alpha)
    spec = ProblemSpec(L, UNIT, alpha, kind=kind, left=1.0, n=24)
    u = spec.initial_guess()
    vals = u.values + rng.uniform(-1, 1, u.values.size) * spec.free_mask()
    u = u.with_values(vals)
    g = functional_gradient(spec, u)
    fd = _fd_gradient(spec, u)
    free = spec.free_mask()
    assert np.max(np.abs(g - fd)[free]) <= 1e-6 * np.max(np.abs(g[free]))


def test_gradient_with_memory_window():
    L, kind = get_lagrangian("quadratic", 0.5)
    spec = ProblemSpec(L, MemoryWindow(-0.5, 0.0, 1.0, 1.25), 0.5, left=0.3, right=-1.0, n=28)
    rng = np.random.default_rng(3)
    u = spec.initial_guess()
    u = u.with_values(u.values + rng.normal(size=29) * spec.free_mask())
    g = functional_gradient(spec, u)
    fd = _fd_gradient(spec, u)
    free = spec.free_mask()
    assert np.max(np.abs(g - fd)[free]) <= 1e-6 * np.max(np.abs(g[free]))
    # nodes past B never influence the action
    assert not np.any(g[spec.indices[1] + 1 :])


def test_nan_in_lagrangian_aborts():
    L = custom(
        lambda t, u, p: np.log(u) + 0 * p,
        lambda t, u, p: 1.0 / u + 0 * p,
        lambda t, u, p: 0 * (t + u + p),
        check=False,
    )
    spec = ProblemSpec(L, UNIT, 0.5, left=1.0, right=-1.0, n=10)
    with pytest.raises(FloatingPointError, match="not finite at t ="):
        discretize_functional(spec, spec.initial_guess())


# }}}

# {{{ solve


def test_mittag_leffler_problem():
    errors, sups = [], []
    for n in (128, 256, 512):
        start = time.perf_counter()
        res = solve_direct(ml_spec(n))
        assert time.perf_counter() - start < 60
        assert res.converged and res.objective <= 1e-4
        errors.append(abs(res.u.values[-1] - ML_HALF))
        sups.append(res.el_check.interior_sup)
        assert np.all(np.diff(res.history) <= 1e-15 * (1 + abs(res.history[0])))
        assert res.objective == discretize_functional(ml_spec(n), res.u)
    assert errors[1] <= 0.02 * ML_HALF
    assert errors[0] > errors[1] > errors[2]
    assert sups[0] > sups[1] > sups[2]


def test_near_classical_limit():
    spec = ml_spec(256, alpha=0.999)
    res = solve_direct(spec, gtol=1e-6)
    err = np.max(np.abs(res.u.values - np.exp(spec.t)) / np.exp(spec.t))
    assert err <= 0.05


def test_rl_problem_has_positive_floor():
    objectives = []
    for n in (128, 256, 512):
        L, kind = get_lagrangian("rl-eigen", 0.5)
        spec = ProblemSpec(L, UNIT, 0.5, kind=kind, left=1.0, right=1.0, n=n)
        res = solve_direct(spec, el_check=False)
        objectives.append(res.objective)
    assert min(objectives) > 1e-3
    assert objectives[2] >= 0.5 * objectives[0]


def test_pinned_quadratic_problem_converges_and_never_worsens():
    L, kind = get_lagrangian("quadratic", 0.5)
    spec = ProblemSpec(L, UNIT, 0.5, left=0.0, right=1.0, n=64)
    start = spec.initial_guess()
    res = solve_direct(spec)
    assert res.converged
    assert res.objective <= discretize_functional(spec, start)
    assert res.u.values[0] == 0.0 and res.u.values[-1] == 1.0
    assert np.all(np.diff(res.history) <= 0.0)


@settings(max_examples=10)
@given(seed=st.integers(0, 2**32 - 1))
def test_objective_never_exceeds_initial(seed):
    rng = np.random.default_rng(seed)
    L, kind = get_lagrangian("riesz-eigen", 0.5)
    spec = ProblemSpec(L, UNIT, 0.5, kind=kind, left=1.0, n=32, maxiter=3)
    init = spec.initial_guess()
    init = init.with_values(init.values + rng.normal(size=33) * spec.free_mask())
    res = solve_direct(spec, init, el_check=False)
    assert res.objective <= discretize_functional(spec, init)
    assert res.iterations <= 3


def test_non_convergence_is_flagged():
    res = solve_direct(ml_spec(64), maxiter=1, gtol=1e-14, el_check=False)
    assert not res.converged
    assert res.gradient_norm > 1e-14


def test_zero_lagrangian():
    spec = ProblemSpec(ZERO, UNIT, 0.5, left=2.0, n=16)
    res = solve_direct(spec)
    assert res.iterations == 0 and res.converged and res.objective == 0.0
    assert verify_extremal(spec, res).interior_sup == 0.0


def test_example1_constant_is_nearly_stationary():
    # the discrete gradient at u = 1 is a discretization error that shrinks with h
    grads, devs = [], []
    for n in (64, 256, 1024):
        L, kind = get_lagrangian("example1", 0.5)
        spec = ProblemSpec(L, UNIT, 0.5, kind=kind, left=1.0, n=n)
        g = functional_gradient(spec, spec.initial_guess())
        m = interior_mask(n)
        grads.append(np.max(np.abs(g[m])) / spec.h)
        res = solve_direct(spec, el_check=False)
        devs.append(np.max(np.abs(res.u.values - 1.0)[m]))
    assert grads[0] > grads[1] > grads[2]
    assert devs[0] > devs[1] > devs[2]
    assert devs[2] <= 1e-3


def test_solution_json_round_trip(tmp_path):
    spec = ml_spec(32)
    res = solve_direct(spec)
    back = SolveResult.from_json(res.to_json())
    assert back.to_json() == res.to_json()
    np.testing.assert_array_equal(back.u.values, res.u.values)
    js, csv = res.write(tmp_path)
    assert GridFunction.from_csv(csv.read_text()).values.tolist() == res.u.values.tolist()
    assert SolveResult.from_json(js.read_text()).objective == res.objective

    s2 = ProblemSpec.from_json(spec.to_json())
    assert s2.to_json() == spec.to_json()
    assert solve_direct(s2).u.values.tolist() == res.u.values.tolist()


def test_problem_from_dict_defaults_and_errors():
    spec = ProblemSpec.from_dict({"lagrangian": "example1", "alpha": 0.5, "boundary": {"left": 1.0}})
    assert spec.kind == "riemann-liouville" and spec.right is None and spec.n == 256
    with pytest.raises(ValueError, match="malformed"):
        ProblemSpec.from_dict({"alpha": 0.5})
    with pytest.raises(ValueError, match="unknown"):
        ProblemSpec.from_dict({"lagrangian": "nope", "alpha": 0.5, "boundary": {"left": 1.0}})
    custom_spec = ProblemSpec(ZERO, UNIT, 0.5)
    with pytest.raises(ValueError, match="registry"):
        custom_spec.to_json()


def test_solve_is_deterministic():
    a = solve_direct(ml_spec(64))
    b = solve_direct(ml_spec(64))
    assert a.to_json() == b.to_json()


# }}}
