import math

import numpy as np
import pytest

import apkinetic as apk


def test_small_run():
    out = apk.run(overrides=["eps=1e-2", "n_x=40", "n_v=16", "t_final=0.2", "n_t=40", "snapshot_times=0.1,0.2"])
    assert list(out["times"]) == pytest.approx([0.1, 0.2])
    phi = out["phi"][-1]
    assert phi.shape == (40,)
    assert np.all(np.isfinite(phi))
    # x^2 data relaxes downward and stays nonnegative
    assert phi.max() < 0.995**2
    assert phi.min() >= 0.0
    assert out["stats"]["max_iterations"] >= 1


def test_limit_solver_and_errors():
    out = apk.run(overrides=["solver=hj_limit", "n_x=40", "n_v=16", "t_final=0.2", "n_t=40"])
    assert out["rho"] == []
    with pytest.raises(apk.ConfigError):
        apk.run(overrides=["n_x=41"])
    with pytest.raises(ValueError, match="epsilon"):
        apk.run(overrides=["epsilon=1"])
    with pytest.raises(ValueError, match="front_speed"):
        apk.experiment("unknown_study")


def test_hamiltonian():
    value, branch = apk.hamiltonian(0.0, 0.0, r=1.0)
    assert value == pytest.approx(0.0, abs=1e-13)
    assert branch == "implicit"
    value, branch = apk.hamiltonian(10.0, 10.0, equilibrium="singular_parabolic", n_v=40)
    assert branch == "singular_boundary"
    assert value == pytest.approx(0.975 * 10.0 - 1.0, abs=1e-12)
    with pytest.raises(NotImplementedError):
        apk.hamiltonian(10.0, 10.0, r=1.0, equilibrium="singular_parabolic", n_v=40)


def test_speed_oracle():
    c, p = apk.speed_oracle(1.0)
    assert c == pytest.approx(0.7713868739, rel=1e-8)
    assert (apk.hamiltonian(p, p, r=1.0)[0] + 1.0) / p == pytest.approx(c, rel=1e-12)
    assert math.isfinite(p)


def test_experiment_names():
    names = apk.experiment_names()
    assert "singular_hamiltonian" in names
    rep = apk.experiment("singular_hamiltonian")
    assert rep["metrics"]["branch_mismatches"] == 0
