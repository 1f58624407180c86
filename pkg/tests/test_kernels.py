"""Kernel backend contract: the compiled and Python backends are bit-identical,
and the fused replay equals a loop of single steps."""

import numpy as np
import pytest

from it2garch.kernels import available_backends

BACKENDS = available_backends()
Q_LOW = 0.00098206911707166
Q_HIGH = 5.02388618731311


def random_problem(rng, n_rules=None):
    w = int(rng.integers(1, 8))
    m = int(rng.integers(1, 5))
    r = n_rules or int(rng.integers(1, 40))
    n = w + int(rng.integers(2, 80))
    x = np.ascontiguousarray(rng.normal(0.0, 1.0, n))
    centers = np.ascontiguousarray([x[i:i + w].mean() for i in range(n - w)])
    ant = np.ascontiguousarray(rng.integers(0, m, (r, w)), dtype=np.int64)
    coeffs = np.ascontiguousarray(rng.normal(0.0, 1.0, (r, w + 1)))
    params = dict(
        omega=float(rng.uniform(1e-5, 0.5)),
        alpha=float(rng.uniform(0.0, 1.0)),
        beta=float(rng.uniform(0.0, 1.0)),
    )
    return x, w, m, centers, ant, coeffs, params


def test_python_backend_always_available():
    assert "python" in BACKENDS


def test_replay_equals_looped_steps(rng):
    # the fused training replay must match composing single-step calls
    ker = BACKENDS["python"]
    for _ in range(10):
        x, w, m, centers, ant, coeffs, p = random_problem(rng)
        preds, fh, zh, eps_out, var_out = ker.replay_train(
            x, w, m, centers, ant, coeffs, p["omega"], p["alpha"], p["beta"],
            Q_LOW, Q_HIGH, 1e-8, 0.3, 0.25)
        eps, var = 0.3, 0.25
        fh2 = zh2 = 0
        for i in range(len(centers)):
            out = ker.step_detail(x[i:i + w], float(centers[i]), var, eps * eps,
                                  ant, coeffs, m, p["omega"], p["alpha"],
                                  p["beta"], Q_LOW, Q_HIGH, 1e-8)
            pred, v_point = out[0], out[4]
            fh2 += out[10]
            zh2 += out[11]
            assert preds[i] == pred  # bitwise
            sig = max(np.sqrt(v_point), 1e-8)
            eps = (x[i + w] - pred) / sig
            var = v_point
        assert (fh, zh) == (fh2, zh2)
        assert eps_out == eps and var_out == var


@pytest.mark.skipif("compiled" not in BACKENDS, reason="compiled kernel not built")
class TestCompiledMatchesReference:
    def test_replay_train_bitwise(self, rng):
        ref, fast = BACKENDS["python"], BACKENDS["compiled"]
        for _ in range(30):
            x, w, m, centers, ant, coeffs, p = random_problem(rng)
            eps0 = float(rng.normal())
            var0 = float(rng.uniform(0, 1))
            a = ref.replay_train(x, w, m, centers, ant, coeffs, p["omega"],
                                 p["alpha"], p["beta"], Q_LOW, Q_HIGH, 1e-8,
                                 eps0, var0)
            b = fast.replay_train(x, w, m, centers, ant, coeffs, p["omega"],
                                  p["alpha"], p["beta"], Q_LOW, Q_HIGH, 1e-8,
                                  eps0, var0)
            assert np.array_equal(a[0], b[0])
            assert a[1:] == b[1:]

    def test_replay_static_bitwise(self, rng):
        ref, fast = BACKENDS["python"], BACKENDS["compiled"]
        for _ in range(20):
            x, w, m, centers, ant, coeffs, _ = random_problem(rng)
            s2 = float(rng.uniform(1e-6, 2.0))
            a = ref.replay_static(x, w, m, centers, ant, coeffs, s2, 1e-8, 0.1, 0.0)
            b = fast.replay_static(x, w, m, centers, ant, coeffs, s2, 1e-8, 0.1, 0.0)
            assert np.array_equal(a[0], b[0])
            assert a[1:] == b[1:]

    def test_step_detail_bitwise(self, rng):
        ref, fast = BACKENDS["python"], BACKENDS["compiled"]
        for _ in range(200):
            x, w, m, _, ant, coeffs, p = random_problem(rng)
            xw = np.ascontiguousarray(x[:w])
            args = (xw, float(x[0]), float(rng.uniform(0, 2)),
                    float(rng.uniform(0, 4)), ant, coeffs, m,
                    p["omega"], p["alpha"], p["beta"], Q_LOW, Q_HIGH, 1e-8)
            assert ref.step_detail(*args) == fast.step_detail(*args)


@pytest.mark.skipif("compiled" not in BACKENDS, reason="compiled kernel not built")
def test_trained_models_identical_across_backends():
    from it2garch.garch import GarchParams, simulate_garch
    from it2garch.kernels import backend_name, use_backend
    from it2garch.model import ModelConfig, train

    series = simulate_garch(GarchParams(0.05, 0.3, 0.6), 5.0, 250, seed=2)
    cfg = ModelConfig(window=4, steps=2, iterations=80, seed=3)
    saved = backend_name()
    models = {}
    try:
        for name in BACKENDS:
            use_backend(name)
            models[name] = train(series, cfg)
    finally:
        use_backend(saved)
    assert models["python"].to_json() == models["compiled"].to_json()


def test_use_backend_rejects_unknown():
    from it2garch.kernels import use_backend

    with pytest.raises(ValueError):
        use_backend("fortran")


def test_static_equals_pinned_recursion(rng):
    # alpha = beta = 0 collapses the recursion to the constant track exactly
    for name, ker in BACKENDS.items():
        for _ in range(10):
            x, w, m, centers, ant, coeffs, _ = random_problem(rng)
            s2 = float(rng.uniform(1e-6, 2.0))
            eps0 = float(rng.normal())
            a = ker.replay_static(x, w, m, centers, ant, coeffs, s2, 1e-8, eps0, 0.0)
            b = ker.replay_train(x, w, m, centers, ant, coeffs, s2, 0.0, 0.0,
                                 Q_LOW, Q_HIGH, 1e-8, eps0, 0.0)
            assert np.array_equal(a[0], b[0]), name
