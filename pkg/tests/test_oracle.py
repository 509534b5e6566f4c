import math

import numpy as np
import pytest
import scipy.linalg as sla

from gapeig import BlockOperator, assemble_block, dense_spectrum, gap_eigs_bruteforce

SQRT2 = math.sqrt(2.0)


def test_dense_canonical(canonical):
    values = dense_spectrum(canonical).values
    assert values == pytest.approx([-SQRT2, SQRT2], abs=1e-14)


def test_dense_diagonal():
    op = assemble_block(np.diag([2.0, 3.0, -1.0]), 2)
    assert dense_spectrum(op).values == pytest.approx([-1.0, 2.0, 3.0])


def test_dense_cross_eigensolver_agreement():
    rng = np.random.default_rng(42)
    m = rng.standard_normal((6, 6))
    full = (m + m.T) / 2.0
    op = assemble_block(full, 3)
    ours = dense_spectrum(op).values
    other = sla.eigh(full, eigvals_only=True, driver="ev")
    assert ours == pytest.approx(other, abs=1e-12)


def test_dense_sorted_and_sized(campaign_ops):
    for op in campaign_ops[:8]:
        values = dense_spectrum(op).values
        assert len(values) == op.dim
        assert (np.diff(values) >= 0).all()


def test_gap_eigs_canonical(canonical):
    out = gap_eigs_bruteforce(canonical, -1.0, 10.0)
    assert len(out) == 1
    value, mult = out[0]
    assert value == pytest.approx(SQRT2, abs=1e-14)
    assert mult == 1


def test_gap_eigs_multiplicity():
    op = assemble_block(np.diag([2.0, 2.0, -1.0]), 2)
    assert gap_eigs_bruteforce(op, -1.0, 10.0) == [(2.0, 2)]


def test_gap_eigs_empty_window(canonical):
    assert gap_eigs_bruteforce(canonical, 2.0, 3.0) == []


def test_gap_eigs_needs_ordered_window(canonical):
    with pytest.raises(ValueError):
        gap_eigs_bruteforce(canonical, 3.0, 2.0)


def test_orthogonal_conjugation_invariance(campaign_ops):
    rng = np.random.default_rng(5)
    for op in campaign_ops[:5]:
        q_plus, _ = np.linalg.qr(rng.standard_normal((op.n_plus, op.n_plus)))
        q_minus, _ = np.linalg.qr(rng.standard_normal((op.n_minus, op.n_minus)))
        conj = BlockOperator(
            p=q_plus.T @ op.p @ q_plus,
            c=q_minus.T @ op.c @ q_plus,
            amm=q_minus.T @ op.amm @ q_minus,
        )
        before = dense_spectrum(op).values
        after = dense_spectrum(conj).values
        assert after == pytest.approx(before, abs=1e-10)


def test_trace_identity(campaign_ops):
    for op in campaign_ops[:8]:
        full = op.assembled()
        values = dense_spectrum(op).values
        bound = 1e-10 * np.linalg.norm(full) * op.dim
        assert abs(values.sum() - np.trace(full)) <= bound
