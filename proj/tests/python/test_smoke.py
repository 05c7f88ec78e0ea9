import math

import numpy as np
import pytest

import hexfem


def test_quadrature_rules():
    points, weights = hexfem.quadrature("gauss", 5)
    assert len(points) == 5
    assert weights.sum() == pytest.approx(2.0, abs=1e-14)
    # degree-9 exactness
    for k in range(10):
        exact = 2.0 / (k + 1) if k % 2 == 0 else 0.0
        assert (weights * points**k).sum() == pytest.approx(exact, abs=1e-13)

    points, weights = hexfem.quadrature("gll", 4)
    assert points[0] == -1.0
    assert points[-1] == 1.0
    assert weights[0] == pytest.approx(1.0 / 6.0, abs=1e-15)


def test_collocated_basis_is_identity():
    b = hexfem.basis(4, "gll", 5)
    assert b.collocated
    assert np.array_equal(b.interp1d, np.eye(5))
    # partition of unity at non-collocated points
    g = hexfem.basis(4, "gauss", 6)
    assert np.allclose(g.interp1d.sum(axis=1), 1.0, atol=1e-13)
    assert np.allclose(g.grad1d.sum(axis=1), 0.0, atol=1e-12)


def test_mass_solve_identity():
    p = hexfem.setup("bp1", degree=2, dims=(2, 2, 2))
    x, report = p.solve(tol=1e-10)
    assert report["converged"]
    assert np.max(np.abs(x - p.exact)) <= 1e-9


def test_operator_is_symmetric_and_matches_assembly():
    p = hexfem.setup("bp3", degree=2, dims=(2, 2, 2), deform="sine")
    rng = np.random.default_rng(3)
    x = rng.uniform(-1, 1, p.num_nodes * p.components)
    y = rng.uniform(-1, 1, p.num_nodes * p.components)
    ax = p.apply(x)
    ay = p.apply(y)
    assert ax @ y == pytest.approx(x @ ay, rel=1e-12)

    dense = p.assemble()
    assert np.max(np.abs(dense @ x - ax)) <= 1e-12 * np.max(np.abs(ax))
    assert np.max(np.abs(np.diag(dense) - p.diagonal())) <= 1e-12


def test_poisson_converges():
    coarse = hexfem.setup("bp3", degree=2, dims=(2, 2, 2))
    fine = hexfem.setup("bp3", degree=2, dims=(4, 4, 4))
    errs = []
    for prob in (coarse, fine):
        x, report = prob.solve(tol=1e-10)
        assert report["converged"]
        errs.append(prob.l2_error(x))
    ratio = errs[0] / errs[1]
    assert 0.7 * 8 <= ratio <= 1.3 * 8


def test_bench_record():
    rec = hexfem.run_bench("bp5", degree=3, dims=(2, 2, 2), iters=5)
    assert rec["bp"] == "bp5"
    assert rec["q"] == 4
    assert rec["E"] == 8
    assert rec["iterations"] == 5
    assert rec["dofs_rate"] == rec["n"] * rec["iterations"] / rec["seconds"]
    assert math.isfinite(rec["seconds"]) and rec["seconds"] > 0
