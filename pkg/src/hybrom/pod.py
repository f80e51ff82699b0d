"""POD bases via the method of snapshots, sliding snapshot windows, and DEIM.

The window keeps the w most recent states together with their E- and
A-images so a fresh reduced model can be assembled without touching the
sparse matrices: with S^T S V = V Lambda and W = V Lambda^{-1/2},

    Phi = S W,    E Phi = S_E W,    A Phi = S_A W.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as sla

__all__ = [
    "SnapshotWindow",
    "PodBasis",
    "DeimOperator",
    "pod_mos",
    "window_push",
    "deim_select",
    "deim_project",
]

# Eigenvalues below this fraction of the largest are treated as numerical
# rank deficiency regardless of the energy criterion (guards Lambda^{-1/2}).
EIG_FLOOR = 1e-14


@dataclass
class PodBasis:
    """Orthonormal POD basis with its Gram eigenvalues.

    ``weights`` is the snapshot-mixing matrix W with Phi = S @ W; it maps
    any columnwise image of the snapshots to the corresponding image of
    the basis (E Phi = S_E @ W), which is what makes window-based reduced
    operator assembly cheap.
    """

    Phi: np.ndarray
    eigenvalues: np.ndarray
    r: int
    weights: Optional[np.ndarray] = field(default=None, repr=False)


def pod_mos(
    S: np.ndarray,
    energy_tol: float = 1e-8,
    r_max: Optional[int] = None,
) -> PodBasis:
    """POD basis of the columns of S by the method of snapshots.

    The eigendecomposition of the small Gram matrix S^T S replaces the SVD
    of the tall snapshot matrix.  The rank r is the smallest with relative
    residual energy 1 - sum_{i<=r} lambda_i / sum lambda_i <= energy_tol,
    after dropping eigenvalues below EIG_FLOOR * lambda_1 and capping at
    ``r_max``.

    The raw basis S V Lambda^{-1/2} loses orthogonality when the window is
    nearly rank deficient, so a thin-QR polish is applied and folded into
    the mixing matrix; the span and the snapshot-mixing identity survive.

    Raises
    ------
    ValueError
        If S is zero (an empty window has no basis).
    """
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[1] == 0:
        raise ValueError("snapshot matrix must be a nonempty 2-D array")
    gram = S.T @ S
    gram = 0.5 * (gram + gram.T)  # enforce symmetry lost to round-off
    lam, V = sla.eigh(gram, check_finite=False)
    lam = np.maximum(lam[::-1], 0.0)
    V = V[:, ::-1]
    cum = np.cumsum(lam)
    if not cum[-1] > 0.0:
        raise ValueError("snapshot matrix is zero: no basis can be extracted")
    residual = 1.0 - cum / cum[-1]
    above = np.nonzero(residual <= energy_tol)[0]
    r = int(above[0]) + 1 if above.size else lam.size
    r = min(r, int(np.sum(lam > EIG_FLOOR * lam[0])))
    if r_max is not None:
        r = min(r, int(r_max))
    r = max(r, 1)

    lam_r = lam[:r].copy()
    W = V[:, :r] / np.sqrt(lam_r)
    Phi = S @ W
    # Thin-QR polish folded into W; R ~ I for well-conditioned windows so
    # the polished columns track S V Lambda^{-1/2} closely.
    Q, R = np.linalg.qr(Phi)
    signs = np.sign(np.diag(R))
    signs[signs == 0.0] = 1.0
    Q = Q * signs
    R = R * signs[:, None]
    W = sla.solve_triangular(R.T, W.T, lower=True, check_finite=False).T
    # Deterministic sign convention: the dominant entry of each column is
    # positive (eigensolver signs are otherwise arbitrary).
    flips = np.sign(Q[np.argmax(np.abs(Q), axis=0), np.arange(r)])
    flips[flips == 0.0] = 1.0
    Q = Q * flips
    W = W * flips
    return PodBasis(Phi=Q, eigenvalues=lam_r, r=r, weights=W)


class SnapshotWindow:
    """Fixed-width FIFO of states with their E- and A-images.

    Columns are ordered oldest to newest; during warmup fewer than w
    columns are valid.  Internally a ring buffer is used so a push is
    three column writes; the ordered matrices are materialized on access.
    """

    def __init__(self, n: int, w: int):
        if w < 1:
            raise ValueError(f"window width must be >= 1, got {w}")
        self.n = n
        self.w = w
        self.count = 0
        self._head = 0  # ring slot of the next write
        self._S = np.zeros((n, w))
        self._SE = np.zeros((n, w))
        self._SA = np.zeros((n, w))

    def push(self, x_new: np.ndarray, Ex_new: np.ndarray, Ax_new: np.ndarray):
        """Append a state and its images, dropping the oldest at capacity."""
        for v in (x_new, Ex_new, Ax_new):
            if v.shape != (self.n,):
                raise ValueError(f"expected vectors of shape ({self.n},), got {v.shape}")
        j = self._head
        self._S[:, j] = x_new
        self._SE[:, j] = Ex_new
        self._SA[:, j] = Ax_new
        self._head = (j + 1) % self.w
        if self.count < self.w:
            self.count += 1

    def _order(self) -> np.ndarray:
        if self.count < self.w:
            return np.arange(self.count)
        return (np.arange(self.w) + self._head) % self.w

    @property
    def S(self) -> np.ndarray:
        return self._S[:, self._order()]

    @property
    def S_E(self) -> np.ndarray:
        return self._SE[:, self._order()]

    @property
    def S_A(self) -> np.ndarray:
        return self._SA[:, self._order()]

    def matrices(self):
        """Ordered (S, S_E, S_A) materialized in one pass."""
        idx = self._order()
        return self._S[:, idx], self._SE[:, idx], self._SA[:, idx]


def window_push(
    window: SnapshotWindow,
    x_new: np.ndarray,
    Ex_new: np.ndarray,
    Ax_new: np.ndarray,
) -> SnapshotWindow:
    """Push a state and its caller-supplied E-/A-images; returns the window."""
    window.push(x_new, Ex_new, Ax_new)
    return window


@dataclass
class DeimOperator:
    """DEIM basis with interpolation points and the cached point-row solve.

    The interpolatory projector is P = Phi_f (P^T Phi_f)^{-1} P^T; only the
    ell point rows of f are ever needed to apply it.
    """

    Phi_f: np.ndarray
    points: np.ndarray
    solve_data: tuple = field(repr=False)

    @property
    def ell(self) -> int:
        return self.Phi_f.shape[1]

    def coefficients(self, f_at_points: np.ndarray) -> np.ndarray:
        return sla.lu_solve(self.solve_data, f_at_points, check_finite=False)

    def interpolate(self, f_at_points: np.ndarray) -> np.ndarray:
        """Lift point values to the full space: Phi_f (P^T Phi_f)^{-1} f|_points."""
        return self.Phi_f @ self.coefficients(f_at_points)


def deim_select(F: np.ndarray, ell: int) -> DeimOperator:
    """Standard DEIM greedy point selection on the leading POD modes of F.

    The first point maximizes |Phi_f(:, 1)|; each subsequent point
    maximizes the residual of interpolating the next mode on the points
    chosen so far.  Ties resolve to the smallest index (np.argmax).

    Raises
    ------
    ValueError
        If F has numerical rank below ``ell`` (the message names the
        achievable ell).
    """
    if ell < 1:
        raise ValueError(f"need at least one interpolation point, got ell={ell}")
    basis = pod_mos(F, energy_tol=0.0, r_max=ell)
    if basis.r < ell:
        raise ValueError(
            f"snapshot matrix has numerical rank {basis.r} < ell={ell}; "
            f"achievable ell is {basis.r}"
        )
    U = basis.Phi
    points = np.empty(ell, dtype=np.intp)
    points[0] = np.argmax(np.abs(U[:, 0]))
    for j in range(1, ell):
        rows = points[:j]
        c = np.linalg.solve(U[rows, :j], U[rows, j])
        res = U[:, j] - U[:, :j] @ c
        points[j] = np.argmax(np.abs(res))
    if len(set(points.tolist())) != ell:
        raise ValueError("DEIM selected duplicate interpolation points; "
                         "snapshot set is degenerate")
    lu = sla.lu_factor(U[points, :], check_finite=False)
    return DeimOperator(Phi_f=U, points=points, solve_data=lu)


def deim_project(deim: DeimOperator, f_at_points: np.ndarray) -> np.ndarray:
    """Interpolation coefficients (P^T Phi_f)^{-1} f|_points."""
    return deim.coefficients(np.asarray(f_at_points, dtype=float))
