import numpy as np
import pytest

from subspace_descent.benchmarks import make_benchmark, nesterov_worst, quadratic, rankdef_least_squares
from subspace_descent.dual import directional_derivative
from subspace_descent.oracles import ObjectiveOracle
from subspace_descent.optimizer import FixedStep, OptimizerConfig, gradient_descent_baseline
from subspace_descent.rng import RngStream


def all_benchmarks():
    return [
        nesterov_worst(100, 20, 8.0),
        nesterov_worst(10, 1, 2.0),
        quadratic(30, 0.1, 10.0),
        quadratic(5, 1.0, 1.0),
        quadratic(7, 0.5, 2.0, spectrum="linear"),
        rankdef_least_squares(40, 30, 10, rng=3),
    ]


def test_nesterov_origin():
    b = nesterov_worst(100, 20, 8.0)
    x0 = np.zeros(100)
    assert b.fun(x0) == 0.0
    assert b.relative_error(b.fun(x0)) == 1.0
    expected = np.zeros(100)
    expected[0] = -8.0 / 4
    assert np.array_equal(b.grad(x0), expected)


def test_nesterov_minimum():
    b = nesterov_worst(100, 20, 8.0)
    assert b.f_star == pytest.approx(-20 / 21)
    assert b.f_star == pytest.approx(-0.952381, abs=1e-6)
    assert b.fun(b.x_star) == pytest.approx(b.f_star, rel=1e-14)
    assert np.linalg.norm(b.grad(b.x_star)) < 1e-14


def test_nesterov_minimum_is_lower_bound():
    # brute-force oracle: the first r coordinates of the minimiser solve the tridiagonal system
    b = nesterov_worst(30, 12, 3.0)
    H = np.column_stack([b.grad(e) - b.grad(np.zeros(30)) for e in np.eye(30)])
    xs = np.linalg.lstsq(H, -b.grad(np.zeros(30)), rcond=None)[0]
    assert b.fun(xs) == pytest.approx(b.f_star, rel=1e-12)
    assert np.linalg.eigvalsh(H).min() > -1e-12
    assert np.linalg.eigvalsh(H).max() <= b.lam


def test_nesterov_low_intrinsic_dimension():
    b = nesterov_worst(50, 20, 8.0)
    x = np.zeros(50)
    x[:21] = RngStream(1).standard_normal(21)
    assert np.all(b.grad(x)[21:] == 0)


def test_nesterov_bad_params():
    with pytest.raises(ValueError):
        nesterov_worst(10, 10, 1.0)
    with pytest.raises(ValueError):
        nesterov_worst(10, 3, 0.0)


def test_quadratic_unit():
    b = quadratic(6, 1.0, 1.0)
    x = RngStream(4).standard_normal(6)
    assert b.fun(x) == pytest.approx(x @ x / 2)
    assert np.array_equal(b.grad(x), x)


def test_quadratic_spectrum_and_gradient():
    b = quadratic(10, 0.1, 10.0)
    eig = b.params["eigenvalues"]
    assert eig[0] == pytest.approx(0.1) and eig[-1] == pytest.approx(10.0)
    assert np.allclose(np.diff(np.log(eig)), np.log(100) / 9)
    x = np.arange(10.0)
    assert np.array_equal(b.grad(x), eig * x)
    with pytest.raises(ValueError):
        quadratic(3, 2.0, 1.0)


def test_gd_one_step_on_isotropic_quadratic():
    b = quadratic(8, 2.0, 2.0)
    tr = gradient_descent_baseline(
        OptimizerConfig(ell=1, step=FixedStep(), max_iter=1), ObjectiveOracle(b, "analytic"), np.ones(8)
    )
    assert np.allclose(tr.x, 0.0)


def test_least_squares_null_direction():
    b = rankdef_least_squares(40, 30, 10, rng=3)
    x = RngStream(8).standard_normal(30)
    N = b.params["null_basis"]
    assert N.shape == (30, 20)
    assert b.fun(x + 5.0 * N[:, 0]) == pytest.approx(b.fun(x), rel=1e-10)


def test_least_squares_affine_minimisers():
    b = rankdef_least_squares(40, 30, 10, rng=3)
    A, rhs = b.params["A"], b.params["b"]
    x1 = np.linalg.lstsq(A, rhs, rcond=None)[0]
    x2 = x1 + b.params["null_basis"] @ np.ones(20)
    assert b.fun(x1) < 1e-20 and b.fun(x2) < 1e-20
    assert np.linalg.norm(x1 - x2) > 1
    sv = np.linalg.svd(A, compute_uv=False)
    assert b.gamma == pytest.approx(2 * sv[9] ** 2)
    assert b.lam == pytest.approx(2 * sv[0] ** 2)


@pytest.mark.parametrize("bench", all_benchmarks(), ids=lambda b: f"{b.name}-{b.dim}")
def test_gradients_match_ad_and_central_differences(bench):
    rng = RngStream(21)
    h = 1e-6
    for _ in range(100):
        x, p = rng.standard_normal(bench.dim), rng.standard_normal(bench.dim)
        exact = p @ bench.grad(x)
        assert directional_derivative(bench.fun, x, p) == pytest.approx(exact, rel=1e-10, abs=1e-12)
        central = (bench.fun(x + h * p) - bench.fun(x - h * p)) / (2 * h)
        assert central == pytest.approx(exact, rel=1e-6, abs=1e-8)


def test_make_benchmark():
    b = make_benchmark({"name": "nesterov_worst", "d": 40, "r": 5, "lam": 1.0})
    assert b.dim == 40
    with pytest.raises(KeyError):
        make_benchmark({"name": "rosenbrock"})


def test_relative_error_conventions():
    q = quadratic(3, 1.0, 1.0)
    assert q.relative_error(0.25) == 0.25
    n = nesterov_worst(10, 4, 8.0)
    assert n.relative_error(n.f_star) == 0.0
