import math

import numpy as np
import pytest

import qplab

X_MIN, X_MAX, N = -8.0, 8.0, 1601
X = np.linspace(X_MIN, X_MAX, N)


def gaussian(sigma=1.0, mean=0.0):
    return np.exp(-((X - mean) ** 2) / (2 * sigma**2)) / math.sqrt(2 * math.pi * sigma**2)


def test_gaussian_functionals():
    r = qplab.functionals(gaussian(0.8), X_MIN, X_MAX)
    assert r["S"] == pytest.approx(0.5 * math.log(2 * math.pi * math.e * 0.64), abs=1e-6)
    assert r["F"] == pytest.approx(1 / 0.64, rel=1e-5)
    assert abs(r["cramer_rao_slack"]) < 1e-5
    assert not r["violation"]


def test_hydro_fields_mask_tails():
    f = qplab.hydro_fields(gaussian(0.5), X_MIN, X_MAX)
    mid = N // 2 + 20
    assert f["u"][mid] == pytest.approx(-0.5 * X[mid] / 0.25, rel=1e-4)
    assert np.isnan(f["u"][0])


def test_kernels():
    assert qplab.mehler_kernel(0.3, -0.2, 0.7) == pytest.approx(qplab.mehler_kernel(-0.2, 0.3, 0.7))
    row = qplab.kernel_row("heat", X_MIN, X_MAX, N, 0.0, 0.5)
    assert np.trapezoid(row.real, X) == pytest.approx(1.0, abs=1e-8)
    assert qplab.ou_covariance(0.0, 1.0) == pytest.approx(0.5 * math.exp(-1.0), rel=1e-6)
    assert isinstance(qplab.free_propagator(0.1, 0.0, 1.0), complex)
    with pytest.raises(qplab.DomainError):
        qplab.kernel_row("nope", X_MIN, X_MAX, N, 0.0, 0.5)


def test_quantum_ground_state_is_stationary():
    v = 0.5 * (X**2 - 1)
    psi0 = np.sqrt(np.exp(-(X**2)) / math.sqrt(math.pi)).astype(complex)
    t, psi, h = qplab.evolve_quantum(psi0, v, X_MIN, X_MAX, 1e-3, 200, 100)
    assert t.tolist() == pytest.approx([0.0, 0.1, 0.2])
    assert psi.shape == (3, N)
    assert np.max(np.abs(h - h[0])) < 1e-10
    with pytest.raises(qplab.NumericalError):
        qplab.evolve_quantum(psi0, v, X_MIN, X_MAX, 0.5, 2)


def test_fokker_planck_conserves_mass():
    drift = -X
    t, rho = qplab.evolve_fokker_planck(gaussian(1.3), drift, X_MIN, X_MAX, 1e-3, 500, 250)
    assert rho.shape == (3, N)
    m0 = np.trapezoid(rho[0], X)
    for row in rho:
        assert np.trapezoid(row, X) == pytest.approx(m0, abs=1e-12)
    assert np.trapezoid(X**2 * rho[-1], X) < np.trapezoid(X**2 * rho[0], X)


def test_sde_is_reproducible():
    x0 = qplab.sample_density(gaussian(), X_MIN, X_MAX, 2000, 11)
    a = qplab.simulate_sde(x0, -X, X_MIN, X_MAX, 1e-2, 50, 5, 25)
    b = qplab.simulate_sde(x0, -X, X_MIN, X_MAX, 1e-2, 50, 5, 25)
    c = qplab.simulate_sde(x0, -X, X_MIN, X_MAX, 1e-2, 50, 6, 25)
    assert np.array_equal(a[1], b[1])
    assert not np.array_equal(a[1], c[1])
    assert a[1].shape == (3, 2000)
    assert np.var(a[1][-1]) == pytest.approx(0.5 + 0.5 * math.exp(-1.0), rel=0.1)


def test_variational_solvers():
    xs = np.linspace(-10, 10, 2001)
    s = qplab.max_entropy_pdf(xs**2, -10, 10, 0.5)
    assert s["multiplier"] == pytest.approx(-1.0, abs=1e-6)
    assert abs(s["constraint_residual"]) < 1e-8
    with pytest.raises(qplab.DomainError):
        qplab.max_entropy_pdf(xs**2, -10, 10, -1.0)


def test_recoil_and_kinetic():
    xs = np.linspace(-8, 8, 161)
    rho = np.exp(-(xs**2) / 2) / math.sqrt(2 * math.pi)
    r = qplab.recoil_trajectory(rho, np.zeros_like(xs), np.zeros_like(xs), -8, 8, 1e-3, 20, 10)
    assert r["rho"].shape == (3, 161)
    assert len(r["mass_drift"]) == 20
    k = qplab.large_friction_moments(2.0, n_points=2001)
    assert k["kbt"] == pytest.approx(0.5)
    with pytest.raises(qplab.DomainError):
        qplab.large_friction_moments(0.3)


def test_run_and_verify(tmp_path):
    cfg = tmp_path / "scenario.ini"
    cfg.write_text("[run]\ndt = -1\n")
    code, _, err = qplab.run("evolve-quantum", str(cfg), str(tmp_path / "out"))
    assert code == 2 and "dt must be positive" in err
    code, log, _ = qplab.run("kernels", None, str(tmp_path / "k"))
    assert code == 0
    assert (tmp_path / "k" / "manifest.json").exists()
    results = qplab.verify(only=[1, 4])
    assert [r["id"] for r in results] == [1, 4]
    assert all(r["pass"] for r in results)
    assert qplab.git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a"
