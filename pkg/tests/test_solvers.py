import math

import numpy as np
import pytest

from nncp.divergence import DivergenceKind, distance
from nncp.kruskal import KruskalModel, random_model, reconstruct
from nncp.pathologies import bclr_limit, w_sequence
from nncp.solvers import (
    TRACE_HEADER,
    FitConfig,
    FitTrace,
    Loss,
    TraceRow,
    fit_cp_unconstrained,
    fit_nncp,
    objective,
)
from nncp.tensor import DenseTensor, norm


def rank1_target(seed, shape=(4, 5, 3), e_norm=5.0):
    return reconstruct(random_model(shape, 1, seed=seed, nonneg=True, e_norm=e_norm))


def assert_monotone(trace, slack=1e-10):
    objs = [r.objective for r in trace.rows]
    for prev, cur in zip(objs, objs[1:]):
        assert cur <= prev + slack


def assert_coercivity(trace, a, loss=Loss.FROBENIUS, reg_rho=0.0):
    a_e = norm(a, "E")
    root_n = math.sqrt(a.size)
    for row in trace.rows:
        cap_e = a_e + row.residual_E
        assert row.delta_l1 <= cap_e + 1e-9 * (1.0 + cap_e)
        if loss is Loss.FROBENIUS and reg_rho == 0.0:
            res_f = math.sqrt(row.objective)
            cap_f = a_e + root_n * res_f
            assert row.delta_l1 <= cap_f + 1e-9 * (1.0 + cap_f)


# --- FitConfig / FitTrace plumbing -------------------------------------------


def test_config_validation():
    with pytest.raises(ValueError):
        FitConfig(rank=0)
    with pytest.raises(ValueError):
        FitConfig(rank=1, max_iters=0)
    with pytest.raises(ValueError):
        FitConfig(rank=1, tol=-1e-3)
    with pytest.raises(ValueError):
        FitConfig(rank=1, reg_rho=-1.0)
    with pytest.raises(ValueError):
        FitConfig(rank=1, loss=Loss.KL, reg_rho=0.5)
    with pytest.raises(ValueError):
        FitConfig(rank=1, trace_every=0)
    FitConfig(rank=1, tol=0.0)  # tol = 0 turns the convergence stop off


def test_trace_invariants():
    trace = FitTrace()
    trace.append(TraceRow(0, 5.0, 1.0, 1.0, 1.0))
    with pytest.raises(ValueError):
        trace.append(TraceRow(0, 4.0, 1.0, 1.0, 1.0))
    with pytest.raises(ValueError):
        trace.append(TraceRow(1, math.inf, 1.0, 1.0, 1.0))
    trace.append(TraceRow(1, 4.0, 1.0, 1.0, 1.0))
    csv = trace.to_csv()
    lines = csv.strip().split("\n")
    assert lines[0] == TRACE_HEADER
    assert len(lines) == 3
    assert lines[1].startswith("0,5.0,")


# --- objective ----------------------------------------------------------------


def test_objective_zero_on_exact_model():
    m = random_model((3, 4, 3), 2, seed=5, nonneg=True, e_norm=2.0)
    a = reconstruct(m)
    assert objective(a, m, Loss.FROBENIUS) <= 1e-28
    assert objective(a, m, Loss.KL) <= 1e-13


def test_objective_unit_l2_columns_against_zero_tensor():
    col = np.array([[1.0], [0.0]])
    m = KruskalModel((2, 2, 2), [1.0], [col, col, col])
    zero = DenseTensor.zeros([2, 2, 2])
    assert objective(zero, m, Loss.FROBENIUS) == pytest.approx(1.0, abs=1e-15)


def test_objective_regularizer_worked_example():
    col = np.array([[1.0], [0.0]])
    m = KruskalModel((2, 2, 2), [1.0], [col, col, col])
    a = reconstruct(m)
    assert objective(a, m, Loss.FROBENIUS, reg_rho=1.0) == pytest.approx(3.0, abs=1e-15)


def test_objective_gauge_invariance_without_reg():
    m = random_model((3, 2, 4), 3, seed=11, nonneg=False)
    a = reconstruct(random_model((3, 2, 4), 2, seed=12, nonneg=False))
    factors = [f.copy() for f in m.factors]
    factors[0][:, 1] *= 2.0
    factors[1][:, 1] /= 2.0
    rescaled = KruskalModel(m.shape, m.delta, factors)
    v0 = objective(a, m, Loss.FROBENIUS)
    v1 = objective(a, rescaled, Loss.FROBENIUS)
    assert abs(v0 - v1) <= 1e-12 * (1 + abs(v0))
    # the rho > 0 objective deliberately breaks this gauge
    r0 = objective(a, m, Loss.FROBENIUS, reg_rho=1.0)
    r1 = objective(a, rescaled, Loss.FROBENIUS, reg_rho=1.0)
    assert abs(r0 - r1) > 1e-6


def test_objective_kl_rejects_signed_model():
    m = random_model((2, 2), 2, seed=1, nonneg=False)
    a = reconstruct(random_model((2, 2), 1, seed=2, nonneg=True, e_norm=1.0))
    with pytest.raises(ValueError):
        objective(a, m, Loss.KL)


def test_objective_shape_mismatch():
    m = random_model((2, 2), 1, seed=1, nonneg=True)
    with pytest.raises(ValueError):
        objective(DenseTensor.zeros([3, 3]), m, Loss.FROBENIUS)


# --- fit_nncp -----------------------------------------------------------------


def test_fit_nncp_rank1_recovery():
    a = rank1_target(seed=42)
    res = fit_nncp(a, FitConfig(rank=1, max_iters=2000, tol=1e-14))
    assert res.trace.rows[-1].residual_E <= 1e-6 * norm(a, "E")
    assert res.converged
    assert res.model.nonneg and res.model.normalized
    diff = reconstruct(res.model).as_array() - a.as_array()
    assert np.max(np.abs(diff)) <= 1e-6


def test_fit_nncp_requires_nonneg_input_and_flag():
    a = DenseTensor([2, 2], [1.0, -1.0, 0.0, 2.0])
    with pytest.raises(ValueError):
        fit_nncp(a, FitConfig(rank=1))
    good = DenseTensor([2, 2], [1.0, 1.0, 0.0, 2.0])
    with pytest.raises(ValueError):
        fit_nncp(good, FitConfig(rank=1, nonneg=False))


def test_fit_nncp_determinism():
    a = rank1_target(seed=3)
    cfg = FitConfig(rank=2, max_iters=50, tol=0.0, seed=9)
    t1 = fit_nncp(a, cfg).trace.to_csv()
    t2 = fit_nncp(a, cfg).trace.to_csv()
    assert t1 == t2


def test_fit_nncp_monotone_and_coercive_frobenius():
    a = reconstruct(random_model((4, 3, 3), 3, seed=21, nonneg=True, e_norm=9.0))
    res = fit_nncp(a, FitConfig(rank=2, max_iters=400, tol=0.0, seed=4))
    assert_monotone(res.trace)
    assert_coercivity(res.trace, a)


def test_fit_nncp_monotone_and_coercive_kl():
    a = reconstruct(random_model((3, 3, 4), 2, seed=22, nonneg=True, e_norm=1.0))
    res = fit_nncp(a, FitConfig(rank=2, loss=Loss.KL, max_iters=400, tol=0.0, seed=5))
    assert_monotone(res.trace)
    assert_coercivity(res.trace, a, loss=Loss.KL)
    assert all(np.isfinite(r.objective) for r in res.trace.rows)


def test_fit_nncp_kl_with_zero_entries_in_target():
    a = bclr_limit(4)
    res = fit_nncp(a, FitConfig(rank=5, loss=Loss.KL, max_iters=150, tol=0.0, seed=2))
    assert_monotone(res.trace)
    assert all(np.isfinite(r.objective) for r in res.trace.rows)


def test_fit_nncp_bclr_limit_residual_floor():
    a = bclr_limit(4)
    for seed in range(3):
        res = fit_nncp(a, FitConfig(rank=5, max_iters=2000, tol=0.0, seed=seed))
        assert res.trace.rows[-1].residual_E > 1e-3
        assert_coercivity(res.trace, a)


def test_fit_nncp_naive_bayes_recovery_kl():
    m = random_model((3, 4, 5), 2, seed=101, nonneg=True, e_norm=1.0)
    a = reconstruct(m)
    res = fit_nncp(a, FitConfig(rank=2, loss=Loss.KL, max_iters=30000, tol=1e-13, seed=1))
    assert res.final_objective <= 1e-8


def test_fit_nncp_regularized_monotone():
    a = reconstruct(random_model((3, 4, 3), 2, seed=17, nonneg=True, e_norm=4.0))
    res = fit_nncp(a, FitConfig(rank=2, max_iters=300, tol=0.0, reg_rho=0.5, seed=3))
    assert_monotone(res.trace)
    assert_coercivity(res.trace, a, reg_rho=0.5)


def test_fit_nncp_zero_tensor():
    res = fit_nncp(DenseTensor.zeros([3, 3, 3]), FitConfig(rank=2, max_iters=5, tol=0.0))
    assert res.final_objective == 0.0
    assert res.model.r == 0


def test_fit_nncp_output_sorted_and_final_traced():
    a = reconstruct(random_model((3, 3, 3), 3, seed=30, nonneg=True, e_norm=5.0))
    res = fit_nncp(a, FitConfig(rank=3, max_iters=73, tol=0.0, seed=6, trace_every=10))
    deltas = res.model.delta
    assert all(x >= y for x, y in zip(deltas, deltas[1:]))
    iters = [r.iter for r in res.trace.rows]
    assert iters[0] == 0
    assert iters[-1] == 73  # final row present despite trace_every=10
    assert all(b > a for a, b in zip(iters, iters[1:]))
    assert res.final_objective == res.trace.rows[-1].objective


def test_fit_nncp_trace_every_thins_rows():
    a = rank1_target(seed=8)
    res = fit_nncp(a, FitConfig(rank=1, max_iters=40, tol=0.0, trace_every=10))
    assert [r.iter for r in res.trace.rows] == [0, 10, 20, 30, 40]


# --- fit_cp_unconstrained -------------------------------------------------------


def test_fit_als_exact_rank2_recovery():
    m = random_model((3, 4, 5), 2, seed=301, nonneg=False)
    a = reconstruct(m)
    res = fit_cp_unconstrained(a, FitConfig(rank=2, nonneg=False, max_iters=3000, tol=1e-14))
    res_f = math.sqrt(res.final_objective)
    assert res_f <= 1e-6 * norm(a, "F")
    # output convention: unit-l2 columns, magnitudes and signs in the weights
    for f in res.model.factors:
        assert np.max(np.abs(np.linalg.norm(f, axis=0) - 1.0)) <= 1e-12
    mags = np.abs(res.model.delta)
    assert all(x >= y for x, y in zip(mags, mags[1:]))


def test_fit_als_validation():
    a = rank1_target(seed=1)
    with pytest.raises(ValueError):
        fit_cp_unconstrained(a, FitConfig(rank=1, nonneg=True))
    with pytest.raises(ValueError):
        fit_cp_unconstrained(a, FitConfig(rank=1, nonneg=False, loss=Loss.KL))


def test_fit_als_determinism():
    a = rank1_target(seed=2)
    cfg = FitConfig(rank=2, nonneg=False, max_iters=40, tol=0.0, seed=7)
    t1 = fit_cp_unconstrained(a, cfg).trace.to_csv()
    t2 = fit_cp_unconstrained(a, cfg).trace.to_csv()
    assert t1 == t2


def test_fit_als_bclr_degenerate_path():
    a = bclr_limit(4)
    res = fit_cp_unconstrained(
        a, FitConfig(rank=5, nonneg=False, max_iters=2000, tol=0.0, seed=0)
    )
    objs = [r.objective for r in res.trace.rows]
    assert all(cur < prev for prev, cur in zip(objs, objs[1:]))  # strictly decreasing
    assert res.trace.rows[-1].delta_l1 > 10 * norm(a, "F")


def test_fit_als_w_limit_degenerate_signature():
    _, a, _, _ = w_sequence([1])
    res = fit_cp_unconstrained(
        a, FitConfig(rank=2, nonneg=False, max_iters=2000, tol=0.0, seed=0)
    )
    assert_monotone(res.trace)
    first, last = res.trace.rows[0], res.trace.rows[-1]
    assert last.residual_E <= first.residual_E / 2
    assert last.max_component_F > 2.5 * norm(a, "F")  # slow blow-up, small budget


def test_fit_als_zero_tensor_ridge_path():
    res = fit_cp_unconstrained(
        DenseTensor.zeros([3, 3, 3]),
        FitConfig(rank=2, nonneg=False, max_iters=5, tol=0.0, seed=1),
    )
    assert res.final_objective == 0.0
    assert res.model.r == 0
    assert res.trace.notes  # singular normal equations were ridge-jittered


def test_final_residuals_match_model():
    a = reconstruct(random_model((3, 3, 3), 2, seed=77, nonneg=True, e_norm=3.0))
    res = fit_nncp(a, FitConfig(rank=2, max_iters=200, tol=0.0, seed=3))
    recon = reconstruct(res.model)
    assert distance(a, recon, DivergenceKind.E_NORM) == pytest.approx(
        res.trace.rows[-1].residual_E, rel=1e-9, abs=1e-12
    )
