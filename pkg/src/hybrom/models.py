"""Benchmark model builders in canonical DiscreteSystem form.

Three families are provided: a 1D viscous Burgers discretization (also
used parametrically in the viscosity), and a nonlinear RC diode ladder
driven by a step current.  Both use a semi-implicit Euler scheme: the
linear part is folded into E (implicit), the nonlinearity is evaluated
at the previous state (explicit).
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .system import DiscreteSystem

__all__ = [
    "BurgersConfig",
    "CircuitConfig",
    "build_burgers",
    "build_circuit",
    "step_input",
    "circuit_nodal_rhs",
]


@dataclass(frozen=True)
class BurgersConfig:
    """Grid/viscosity parameters for the 1D Burgers benchmark.

    The unit interval is partitioned by n = 2^p - 1 interior points and
    [0, 1] in time by N_t = 2^{p+1} uniform steps.
    """

    p: int = 10
    nu: float = 1e-3

    def __post_init__(self):
        if self.p < 3:
            raise ValueError(f"grid exponent p must be >= 3, got {self.p}")
        if self.nu <= 0:
            raise ValueError(f"viscosity must be positive, got {self.nu}")

    @property
    def n(self) -> int:
        return 2**self.p - 1

    @property
    def n_t(self) -> int:
        return 2 ** (self.p + 1)

    @property
    def h(self) -> float:
        return 1.0 / (self.n + 1)

    @property
    def dt(self) -> float:
        return 1.0 / self.n_t


@dataclass(frozen=True)
class CircuitConfig:
    """Node count and time grid for the RC diode ladder benchmark."""

    n_bar: int = 401
    t_final: float = 10.0
    n_t: int = 400
    diode_slope: float = 40.0

    def __post_init__(self):
        if self.n_bar < 2:
            raise ValueError(f"need at least 2 nodes, got {self.n_bar}")
        if self.n_t < 1 or self.t_final <= 0:
            raise ValueError("invalid time grid")

    @property
    def dt(self) -> float:
        return self.t_final / self.n_t


def build_burgers(cfg: BurgersConfig):
    """Semi-implicit Burgers system: E = I - dt*nu*L, A = I, f(Q) = -dt*Q*(D_x Q).

    L is the (1, -2, 1)/h^2 Dirichlet Laplacian and D_x the central
    difference with zero ghost values at both ends.  The output row
    averages the state, C = ones/n, and the initial profile is the
    indicator of 0.1 <= x <= 0.2 on the interior grid.

    Returns
    -------
    (system, x0, input_signal)
        ``input_signal`` is None: the model has no input.
    """
    n, h, dt, nu = cfg.n, cfg.h, cfg.dt, cfg.nu
    lap = sp.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(n, n), format="csr") / h**2
    E = (sp.identity(n, format="csr") - (dt * nu) * lap).tocsr()
    A = sp.identity(n, format="csr")
    C = np.full(n, 1.0 / n)

    scale = dt / (2.0 * h)

    def f(q: np.ndarray) -> np.ndarray:
        # -dt * q_i * (q_{i+1} - q_{i-1}) / (2h), ghost values zero.
        dq = np.empty_like(q)
        dq[1:-1] = q[2:] - q[:-2]
        dq[0] = q[1]
        dq[-1] = -q[-2]
        dq *= q
        dq *= -scale
        return dq

    def f_at(q: np.ndarray, idx: np.ndarray) -> np.ndarray:
        up = np.where(idx + 1 < n, q[np.minimum(idx + 1, n - 1)], 0.0)
        dn = np.where(idx - 1 >= 0, q[np.maximum(idx - 1, 0)], 0.0)
        return -scale * q[idx] * (up - dn)

    x_grid = np.arange(1, n + 1) * h
    x0 = np.where((x_grid >= 0.1) & (x_grid <= 0.2), 1.0, 0.0)

    system = DiscreteSystem(
        n=n, E=E, A=A, B=None, C=C, f=f,
        f_description=f"burgers advection, nu={nu:g}, p={cfg.p}", f_at=f_at,
    )
    return system, x0, None


def circuit_nodal_rhs(v: np.ndarray, slope: float = 40.0) -> np.ndarray:
    """Nodal current balance G(v) of the diode ladder, g(v) = exp(slope*v) - 1.

    Node 1 carries a grounded diode plus the diode to node 2; interior
    nodes see the two neighboring diodes; the last node only the one
    behind it.
    """
    g = lambda s: np.exp(slope * s) - 1.0
    n = v.shape[0]
    out = np.empty(n)
    d = g(v[:-1] - v[1:])
    out[0] = -g(v[0]) - d[0]
    out[1:] = d
    out[1:-1] -= d[1:]
    return out


def build_circuit(cfg: CircuitConfig):
    """RC diode ladder in canonical form via Taylor splitting at v = 0.

    The continuous model v' = G(v) + b*u is split as G(v) = A_c v + f_c(v)
    with A_c the Jacobian of G at the origin (tridiagonal: -2*slope on the
    diagonal except -slope at the last node, +slope off-diagonal).  The
    semi-implicit step gives E = I - dt*A_c, A = I, f = dt*f_c, B = dt*b,
    C = e_1 with b = c^T = e_1.

    Returns
    -------
    (system, x0, input_signal)
        x0 = 0 and ``input_signal`` is the step function of step_input.
    """
    n, dt, slope = cfg.n_bar, cfg.dt, cfg.diode_slope

    main = np.full(n, -2.0 * slope)
    main[-1] = -slope
    A_c = sp.diags([np.full(n - 1, slope), main, np.full(n - 1, slope)],
                   [-1, 0, 1], format="csr")
    E = (sp.identity(n, format="csr") - dt * A_c).tocsr()
    A = sp.identity(n, format="csr")
    B = np.zeros((n, 1))
    B[0, 0] = dt
    C = np.zeros(n)
    C[0] = 1.0

    def f(v: np.ndarray) -> np.ndarray:
        # dt * f_c with f_c = G - A_c v.  Writing phi(s) = g(s) - slope*s
        # makes the remainder local: interior entries are
        # phi(v_{i-1} - v_i) - phi(v_i - v_{i+1}).
        s = v[:-1] - v[1:]
        ph = np.exp(slope * s)
        ph -= 1.0
        ph -= slope * s
        out = np.empty_like(v)
        out[1:] = ph
        out[1:-1] -= ph[1:]
        out[0] = -(math.exp(slope * v[0]) - 1.0 - slope * v[0]) - ph[0]
        out *= dt
        return out

    def f_at(v: np.ndarray, idx: np.ndarray) -> np.ndarray:
        phi = lambda s: np.exp(slope * s) - 1.0 - slope * s
        left = np.where(idx > 0, phi(v[np.maximum(idx - 1, 0)] - v[idx]), 0.0)
        right = np.where(idx + 1 < n, phi(v[idx] - v[np.minimum(idx + 1, n - 1)]), 0.0)
        vals = left - right
        at0 = idx == 0
        if np.any(at0):
            vals[at0] = -phi(v[0]) - phi(v[0] - v[1])
        return dt * vals

    system = DiscreteSystem(
        n=n, E=E, A=A, B=B, C=C, f=f,
        f_description=f"diode ladder remainder, slope={slope:g}", f_at=f_at,
    )
    x0 = np.zeros(n)
    signal = lambda t: step_input(cfg, t)
    return system, x0, signal


def step_input(cfg: CircuitConfig, t: float) -> float:
    """Step current source: 0 for t <= 3, 1 afterwards."""
    return 0.0 if t <= 3.0 else 1.0
