import math

import pytest

try:
    import dbsde
except ImportError:
    import _dbsde as dbsde


def test_grid_fields():
    g = dbsde.make_grid(100, T=1.0, lam=5.0)
    assert g.n == 100
    assert g.delta == pytest.approx(0.01, abs=1e-15)
    assert g.kappa == pytest.approx(math.exp(-0.05), abs=1e-15)


def test_grid_rejects_bad_input():
    with pytest.raises(ValueError):
        dbsde.make_grid(0)


def test_increment_moments():
    g = dbsde.make_grid(50)
    m = dbsde.increment_moments(g)
    k1k = g.kappa * (1.0 - g.kappa)
    assert m["e"] == pytest.approx(0.0, abs=1e-14)
    assert m["eta"] == pytest.approx(0.0, abs=1e-14)
    assert m["e_sq"] == pytest.approx(1.0, abs=1e-14)
    assert m["eta_sq"] == pytest.approx(k1k, abs=1e-14)
    assert m["mu_sq"] == pytest.approx(k1k, abs=1e-14)


def test_solve_example1_and_determinism():
    a = dbsde.solve(example=1, n=50, p=100.0)
    b = dbsde.solve(example=1, n=50, p=100.0, threads=2)
    assert 1.0 < a.y0 < 3.0
    assert a.y0 == b.y0
    assert a.max_fixed_point_resid <= 1e-12
    assert not a.stability_ok  # table-scale parameters violate the smallness bound


def test_solve_matches_oracle_at_small_n():
    for scheme in ("explicit", "implicit"):
        lattice = dbsde.solve(example=1, n=6, p=100.0, scheme=scheme).y0
        oracle = dbsde.oracle_root(example=1, n=6, p=100.0, scheme=scheme)
        assert abs(lattice - oracle) <= 1e-12


def test_sample_path():
    sol = dbsde.solve(example=1, n=40, p=500.0, full_storage=True)
    seed = dbsde.derive_stream_seed(0, 0)
    path_a = dbsde.sample_path(sol, seed=seed)
    path_b = dbsde.sample_path(sol, seed=seed)
    assert path_a["y"] == path_b["y"]
    assert len(path_a["t"]) == 41
    assert path_a["y"][-1] == path_a["xi"][-1] == path_a["zeta"][-1]
    A = path_a["A"]
    assert all(A[i + 1] >= A[i] for i in range(len(A) - 1))


def test_sample_path_requires_full_storage():
    sol = dbsde.solve(example=1, n=10, p=100.0)
    with pytest.raises(ValueError):
        dbsde.sample_path(sol, seed=1)


def test_run_table_single_cell():
    grid = dbsde.run_table(example=1, n_list=[50], p_list=[100.0])
    direct = dbsde.solve(example=1, n=50, p=100.0)
    assert grid[0][0] == direct.y0


def test_run_comparison():
    out = dbsde.run_comparison(example=1, n_list=[25, 50], p=100.0)
    assert out["root_gap"][1] < out["root_gap"][0]
