"""Block-operator data model: the 2x2 block split, the gap endpoints, and validation.

A block operator is the symmetric matrix

    A = [[p, c.T],
         [c, amm]]

with p acting on the upper coordinate block (dimension n_plus), amm on the
lower block (dimension n_minus), and c coupling upper into lower. The lower
block is stored as amm = -b, so b = -amm is positive definite shifted by any
energy above lambda0 = max eig(amm). Everything downstream (Schur systems,
min-max levels, verification residuals) consumes this type.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadSplit, EigFailure, NonSymmetric

SYMMETRY_RTOL = 1e-13
INPUT_SYMMETRY_RTOL = 1e-12


def _check_symmetric(m: np.ndarray, rtol: float, what: str) -> np.ndarray:
    """Return the symmetrized copy of m, rejecting asymmetry beyond rtol*||m||."""
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NonSymmetric(f"{what} must be square, got shape {m.shape}")
    scale = np.linalg.norm(m)
    defect = np.linalg.norm(m - m.T)
    if defect > rtol * scale:
        raise NonSymmetric(
            f"{what} asymmetry {defect:.3e} exceeds {rtol:g}*norm ({rtol * scale:.3e})"
        )
    return (m + m.T) / 2.0


@dataclass(frozen=True, eq=False)
class BlockOperator:
    """Immutable 2x2 block realization of a symmetric operator with a gap.

    Construction symmetrizes p and amm (inputs within 1e-13 relative asymmetry
    are accepted, anything worse is rejected) and freezes all three arrays, so
    instances are safe to share read-only across parallel workers.
    """

    p: np.ndarray
    c: np.ndarray
    amm: np.ndarray
    n_plus: int = field(init=False)
    n_minus: int = field(init=False)

    SIZE_CAP = 5000  # per block; guards accidental dense O(N^3) blowups

    def __post_init__(self) -> None:
        p = _check_symmetric(np.asarray(self.p, dtype=float), SYMMETRY_RTOL, "p")
        amm = _check_symmetric(np.asarray(self.amm, dtype=float), SYMMETRY_RTOL, "amm")
        c = np.asarray(self.c, dtype=float)
        n_plus, n_minus = p.shape[0], amm.shape[0]
        if n_plus < 1 or n_minus < 1:
            raise BadSplit("both blocks must be at least 1x1")
        if c.shape != (n_minus, n_plus):
            raise BadSplit(f"coupling block must be {n_minus}x{n_plus}, got {c.shape}")
        if max(n_plus, n_minus) > self.SIZE_CAP:
            raise BadSplit(f"block size exceeds cap {self.SIZE_CAP}")
        for arr in (p, c, amm):
            arr.setflags(write=False)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "amm", amm)
        object.__setattr__(self, "n_plus", n_plus)
        object.__setattr__(self, "n_minus", n_minus)

    @property
    def dim(self) -> int:
        return self.n_plus + self.n_minus

    def assembled(self) -> np.ndarray:
        """Dense (n_plus+n_minus)^2 matrix [[p, c.T], [c, amm]]; exactly symmetric."""
        full = np.block([[self.p, self.c.T], [self.c, self.amm]])
        assert (full == full.T).all()
        return full


@dataclass(frozen=True)
class GapData:
    """Gap endpoints and their validity certificate.

    valid is true exactly when lambda0 sits strictly below lambda1 with a
    1e-12 relative margin. diagnostic carries the failure reason when the
    lambda1 root search could not certify a gap (lambda1 is NaN then).
    """

    lambda0: float
    lambda1: float
    valid: bool
    diagnostic: str = ""

    def __post_init__(self) -> None:
        margin = 1e-12 * max(1.0, abs(self.lambda1))
        expect = bool(self.lambda0 < self.lambda1 - margin)
        if self.valid != expect:
            object.__setattr__(self, "valid", expect)


def assemble_block(full: np.ndarray, n_plus: int) -> BlockOperator:
    """Split a dense symmetric matrix into a BlockOperator at row/column n_plus.

    The leading n_plus x n_plus principal block becomes p, the trailing block
    amm, and the lower-left rectangle c. Input asymmetry beyond 1e-12 relative
    is rejected; within tolerance the matrix is symmetrized first.
    """
    full = np.asarray(full, dtype=float)
    if full.ndim != 2 or full.shape[0] != full.shape[1] or full.shape[0] < 2:
        raise NonSymmetric(f"need a square matrix of size >= 2, got shape {full.shape}")
    full = _check_symmetric(full, INPUT_SYMMETRY_RTOL, "input matrix")
    size = full.shape[0]
    if not 1 <= n_plus < size:
        raise BadSplit(f"n_plus must lie in [1, {size - 1}], got {n_plus}")
    return BlockOperator(
        p=full[:n_plus, :n_plus],
        c=full[n_plus:, :n_plus],
        amm=full[n_plus:, n_plus:],
    )


def lambda0(op: BlockOperator) -> float:
    """Largest eigenvalue of the lower block amm; the left gap endpoint."""
    try:
        return float(np.linalg.eigvalsh(op.amm)[-1])
    except np.linalg.LinAlgError as exc:
        raise EigFailure(f"eigensolve on amm failed: {exc}") from exc


def b_matrix(op: BlockOperator) -> np.ndarray:
    """The positive-direction lower block b = -amm."""
    return -op.amm
