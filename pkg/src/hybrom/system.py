"""Discrete input/output dynamical systems and reusable sparse factorizations.

The canonical system is

    E x^{k+1} = A x^k + f(x^k) + B u^k,      y^{k+1} = C x^{k+1},

with constant sparse E, A, dense B, C and a state-space nonlinearity f.
E is factorized once per simulation and the factorization is reused for
every step and every residual-free solve.
"""

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

__all__ = [
    "DiscreteSystem",
    "LinearSolveHandle",
    "StepRecord",
    "factorize",
    "step_fom",
    "output",
    "estimate_inv_norm",
]

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class DiscreteSystem:
    """Time-invariant discrete system E x' = A x + f(x) + B u, y = C x.

    Parameters
    ----------
    n : int
        State dimension.
    E, A : scipy sparse matrices, shape (n, n)
        Constant coefficient matrices; E must be nonsingular.
    B : ndarray of shape (n, m) or None
        Input matrix. ``None`` means the system has no input (m = 0).
    C : ndarray of shape (n,)
        Output row; y = C @ x is the scalar quantity of interest.
    f : callable
        Nonlinear map from an n-vector to an n-vector.
    f_description : str
        Human-readable label for f.
    f_at : callable or None
        Optional sampled evaluator ``f_at(x, idx) -> f(x)[idx]`` used by
        hyper-reduction to evaluate f only at interpolation points.
    """

    n: int
    E: sp.spmatrix
    A: sp.spmatrix
    B: Optional[np.ndarray]
    C: np.ndarray
    f: Callable[[np.ndarray], np.ndarray]
    f_description: str = ""
    f_at: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if self.n <= 0:
            raise ValueError(f"state dimension must be positive, got {self.n}")
        for name in ("E", "A"):
            mat = getattr(self, name)
            if mat.shape != (self.n, self.n):
                raise ValueError(f"{name} must be {self.n}x{self.n}, got {mat.shape}")
        object.__setattr__(self, "E", sp.csr_matrix(self.E))
        object.__setattr__(self, "A", sp.csr_matrix(self.A))
        self.E.sort_indices()
        self.A.sort_indices()
        C = np.asarray(self.C, dtype=float).reshape(-1)
        if C.shape != (self.n,):
            raise ValueError(f"C must have length {self.n}, got {C.shape}")
        object.__setattr__(self, "C", C)
        if self.B is not None:
            B = np.asarray(self.B, dtype=float)
            if B.ndim == 1:
                B = B.reshape(-1, 1)
            if B.shape[0] != self.n:
                raise ValueError(f"B must have {self.n} rows, got {B.shape}")
            object.__setattr__(self, "B", B)

    @property
    def m(self) -> int:
        """Number of inputs (0 when B is absent)."""
        return 0 if self.B is None else self.B.shape[1]


@dataclass(frozen=True)
class LinearSolveHandle:
    """Cached sparse LU factorization of E, reusable across all solves.

    ``solve(b)`` solves E z = b, or E^T z = b when the handle was created
    with ``transpose=True``.  The orientation can be overridden per call,
    which lets one factorization serve both the primal and the dual solve.
    """

    lu: spla.SuperLU = field(repr=False)
    transpose: bool
    n: int

    def solve(self, b: np.ndarray, transpose: Optional[bool] = None) -> np.ndarray:
        flip = self.transpose if transpose is None else transpose
        return self.lu.solve(b, trans="T" if flip else "N")


@dataclass(frozen=True)
class StepRecord:
    """One simulated step: index, time, state and scalar output."""

    k: int
    t: float
    x: np.ndarray
    y: float


def factorize(system: DiscreteSystem, transpose: bool = False) -> LinearSolveHandle:
    """Factorize E (sparse LU) once; the handle is reused for every solve.

    Raises a ``RuntimeError`` when E is singular, which signals an
    ill-posed model.
    """
    try:
        lu = spla.splu(system.E.tocsc())
    except RuntimeError as exc:
        raise RuntimeError(f"E is singular or could not be factorized: {exc}") from exc
    # SuperLU can succeed on some exactly singular inputs; a zero pivot
    # would otherwise surface only as NaNs during solves.
    diag = lu.U.diagonal()
    if not np.all(np.isfinite(diag)) or np.any(diag == 0.0):
        raise RuntimeError("E is singular (zero pivot in LU factorization)")
    return LinearSolveHandle(lu=lu, transpose=transpose, n=system.n)


def _step_rhs(system: DiscreteSystem, x_k: np.ndarray, u_k) -> np.ndarray:
    """Right-hand side A x + f(x) + B u of one step.

    Kept as the single implementation so that every code path (reference
    FOM run, hybrid fallback, oracles) performs bit-identical arithmetic.
    """
    rhs = system.A @ x_k
    rhs += system.f(x_k)
    if system.B is not None and u_k is not None:
        u = np.atleast_1d(np.asarray(u_k, dtype=float))
        rhs += system.B @ u
    return rhs


def step_fom(
    system: DiscreteSystem,
    handle: LinearSolveHandle,
    x_k: np.ndarray,
    u_k=None,
) -> np.ndarray:
    """Advance the full-order model one step: solve E x^{k+1} = A x^k + f(x^k) + B u^k."""
    if x_k.shape != (system.n,):
        raise ValueError(f"state must have shape ({system.n},), got {x_k.shape}")
    if handle.transpose:
        raise ValueError("step_fom requires a non-transposed factorization of E")
    return handle.solve(_step_rhs(system, x_k, u_k))


def output(system: DiscreteSystem, x: np.ndarray) -> float:
    """Scalar output y = C @ x."""
    if x.shape != (system.n,):
        raise ValueError(f"state must have shape ({system.n},), got {x.shape}")
    return float(system.C @ x)


def estimate_inv_norm(
    handle: LinearSolveHandle,
    rtol: float = 1e-6,
    max_iter: int = 200,
) -> float:
    """Estimate the spectral norm of E^{-1}, i.e. 1 / sigma_min(E).

    Inverse power iteration on E^T E: each sweep applies E^{-1} E^{-T}
    through the cached factorization.  Stops when the eigenvalue estimate
    changes by less than ``rtol`` relative, capped at ``max_iter`` sweeps;
    a non-converged estimate is returned with a warning.
    """
    n = handle.n
    # Fixed-seed start vector keeps the estimate deterministic across runs.
    v = np.random.default_rng(1707).standard_normal(n)
    v /= math.sqrt(v @ v)
    lam = 0.0
    for _ in range(max_iter):
        z = handle.solve(v, transpose=True)
        w = handle.solve(z, transpose=False)
        lam_new = math.sqrt(w @ w)
        if lam_new == 0.0:
            raise RuntimeError("inverse power iteration collapsed to zero")
        v = w / lam_new
        if abs(lam_new - lam) <= rtol * lam_new:
            return math.sqrt(lam_new)
        lam = lam_new
    warnings.warn(
        f"estimate_inv_norm: no convergence to rtol={rtol:g} within "
        f"{max_iter} iterations; returning last iterate",
        RuntimeWarning,
        stacklevel=2,
    )
    return math.sqrt(lam)
