"""Linear stability of steady fronts.

L[v] xi = eps xi'' - v xi' + (1 - v') xi   (slope equation about v, Dirichlet)
M[v] xi = eps xi'' - v xi' + I(xi)         (MS front equation about v, Neumann)
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import eigh_tridiagonal

from .evolution import Equation, linear_symbol
from .phase_plane import Q_FLOOR, RsSteadyState, w_from_log_gap
from .spectral import GridSpec, SpectralField, cos_forward, derivative, product


class Kind(str, enum.Enum):
    RS_ABOUT_V = "RS_ABOUT_V"
    MS_ABOUT_V = "MS_ABOUT_V"
    TRIVIAL_RS = "TRIVIAL_RS"
    TRIVIAL_MS = "TRIVIAL_MS"


STABLE = "STABLE"
UNSTABLE = "UNSTABLE"


@dataclass(frozen=True)
class LinearizedOperator:
    """``state`` is an RsSteadyState for RS_ABOUT_V and a PoleSet,
    RescaledProfile or odd SpectralField for MS_ABOUT_V."""

    kind: Kind
    epsilon: float
    state: object = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.kind in (Kind.RS_ABOUT_V, Kind.MS_ABOUT_V) and self.state is None:
            raise ValueError(f"{self.kind.value} needs a steady state")


@dataclass(frozen=True)
class ComparisonVerdict:
    x: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    first_zero: float | None
    verdict: str


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray
    n_grid: int
    weight_used: bool
    kind: str = ""
    epsilon: float = 0.0
    translational: float | None = None

    def to_json(self) -> dict:
        return {"kind": self.kind, "epsilon": self.epsilon,
                "eigenvalues": [float(e) for e in self.eigenvalues], "n_grid": self.n_grid}


@dataclass(frozen=True)
class ChiReport:
    c: float
    residual: float
    min_chi: float
    chi_prime0: float
    squared_slope_gap: float
    x: np.ndarray = field(repr=False)
    chi: np.ndarray = field(repr=False)


def trivial_spectrum(equation, epsilon: float, n_max: int) -> SpectrumReport:
    """lambda_n = 1 - eps n^2 (RS) or eta_n = n - eps n^2 (MS), n = 1..n_max, descending."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    n = np.arange(1, n_max + 1)
    ev = np.sort(linear_symbol(Equation(equation), epsilon, n))[::-1]
    return SpectrumReport(ev, n_max, False, f"TRIVIAL_{Equation(equation).value}", epsilon, 0.0)


# ---------------------------------------------------------------------------
# comparison theorem
# ---------------------------------------------------------------------------

def _comparison_rhs(x, y, eps):
    q, p, phi, dphi = y
    gap = math.exp(-max(q, Q_FLOOR))
    return [-p / eps, 1.0 - gap, dphi, (p * dphi - gap * phi) / eps]


def _phi_zero(x, y, eps):
    return y[2]


_phi_zero.direction = -1


def comparison_test(state: RsSteadyState, x=None) -> ComparisonVerdict:
    """Solve L[v] phi = 0, phi(0) = 0, phi'(0) = 1 and look for a zero in (0, pi).

    v is regenerated alongside phi from the orbit's starting point, so no
    interpolation of the steady profile is involved.
    """
    eps = state.epsilon
    sol = solve_ivp(_comparison_rhs, (0.0, math.pi), [state.start_log_gap, 0.0, 0.0, 1.0],
                    args=(eps,), method="DOP853", rtol=1e-12, atol=1e-14,
                    events=_phi_zero, dense_output=True)
    if not sol.success:
        raise RuntimeError(f"comparison integration failed: {sol.message}")
    zeros = [t for t in sol.t_events[0] if 1e-10 < t < math.pi - 1e-10]
    first = float(zeros[0]) if zeros else None
    x = state.x if x is None else np.asarray(x, dtype=float)
    phi = sol.sol(x)[2]
    return ComparisonVerdict(x, phi, first, STABLE if first is None else UNSTABLE)


def chi_witness(state: RsSteadyState, margin: float = 1e-3) -> ChiReport:
    """Positive witness chi = c (2 v - v'') with chi'(0) = 1.

    Differentiating the steady equation gives L[v] v = -v v' and
    L[v] v'' = 2 v' v'', hence L[v] chi = -2 c v' (v + v'').  ``residual``
    measures that identity with spectral derivatives of the sampled chi;
    ``squared_slope_gap`` is max |L[v] chi + 2 c v'^2 v|, which does not vanish.
    """
    if state.orbit is None:
        raise ValueError("chi witness needs a nontrivial steady state")
    eps = state.epsilon
    x = state.x
    p, w, _ = state.evaluate(x)
    if np.any(p[1:-1] <= 0):
        raise ValueError("chi witness requires v > 0 on (0, pi) (branch j = 1, sign +)")
    q0 = state.start_log_gap
    w0 = float(w_from_log_gap(q0))
    c = 1.0 / (2.0 * w0 + w0 * math.exp(-q0) / eps)
    # v'' = v (v' - 1) / eps, so chi = c v (2 + (1 - v') / eps)
    vxx = p * (w - 1.0) / eps
    chi_vals = c * (2.0 * p - vxx)
    chi = SpectralField.from_values(state.v.grid, chi_vals, "odd")
    v = state.v
    dv = derivative(v, 1)
    dchi = derivative(chi, 1)
    lchi = (eps * derivative(chi, 2).values - product(v, dchi).values
            + chi.values - product(dv, chi).values)
    expected = -2.0 * c * w * (p + vxx)
    inner = (x > margin) & (x < math.pi - margin)
    return ChiReport(
        c=c,
        residual=float(np.max(np.abs(lchi - expected))),
        min_chi=float(chi_vals[inner].min()),
        chi_prime0=float(dchi.values[0]),
        squared_slope_gap=float(np.max(np.abs(lchi + 2.0 * c * w * w * p))),
        x=x,
        chi=chi_vals,
    )


def _resolving_grid(state: RsSteadyState, tail: float = 1e-13) -> GridSpec:
    """Smallest of 128/256/512 modes whose dealiasing band holds no visible energy.

    Third derivatives amplify sample noise by k^3, so over-resolving hurts.
    """
    for n in (128, 256, 512):
        grid = GridSpec(n)
        coeffs = SpectralField.from_values(grid, state.evaluate(grid.x)[0], "odd").coeffs
        band = np.abs(coeffs[grid.cutoff - 8:grid.cutoff])
        if band.max() < tail * np.abs(coeffs).max():
            return grid
    return GridSpec(512)


def translational_residual(state: RsSteadyState, grid: GridSpec | None = None) -> float:
    """max |L[v] v'| over interior points (the identity behind instability of j >= 2).

    v' is not an eigenfunction: it does not vanish at the walls.
    """
    if state.orbit is None:
        return 0.0
    grid = grid or _resolving_grid(state)
    v = SpectralField.from_values(grid, state.evaluate(grid.x)[0], "odd", dealias=True)
    eps = state.epsilon
    dv = derivative(v, 1)
    d2v = derivative(v, 2)
    d3v = derivative(d2v, 1)
    r = eps * d3v.values - product(v, d2v).values + dv.values - product(dv, dv).values
    return float(np.max(np.abs(r[1:-1])))


# ---------------------------------------------------------------------------
# discrete spectra
# ---------------------------------------------------------------------------

def _rs_fd_eigenvalues(state: RsSteadyState, n_grid: int) -> np.ndarray:
    """Second-order conservative differences for eps rho^-1 (rho xi')' + (1 - v') xi.

    The weight rho = exp(-theta / eps) enters only through ratios, taken in
    log form, after the symmetric similarity transform by rho^(1/2).
    """
    eps = state.epsilon
    h = math.pi / n_grid
    nodes = np.arange(n_grid + 1) * h
    mids = (np.arange(n_grid) + 0.5) * h
    _, w_nodes, th_nodes = state.evaluate(nodes)
    th_mid = state.evaluate(mids)[2]
    th_i = th_nodes[1:-1]
    # rho_{m}/sqrt(rho_i rho_{i+1}) and rho_{m}/rho_i in log form
    off = eps / h ** 2 * np.exp(-(th_mid[1:-1] - 0.5 * (th_nodes[1:-2] + th_nodes[2:-1])) / eps)
    diag = (-eps / h ** 2 * (np.exp(-(th_mid[1:] - th_i) / eps) + np.exp(-(th_mid[:-1] - th_i) / eps))
            + 1.0 - w_nodes[1:-1])
    ev = eigh_tridiagonal(diag, off, eigvals_only=True)
    return np.sort(ev)[::-1]


def _galerkin_matrix(n_modes: int, epsilon: float, v: SpectralField | None, rs: bool) -> np.ndarray:
    """Cosine-Galerkin matrix of eps xi'' - v xi' + (xi - mean xi | I(xi))."""
    grid = GridSpec(n_modes)
    k = grid.wavenumbers
    lin = -epsilon * k * k + (np.where(k > 0, 1.0, 0.0) if rs else k)
    a = np.diag(lin)
    if v is not None:
        x = grid.x
        # column m: -v * d/dx cos(m x) = m v sin(m x)
        cols = k[None, :] * v.values[:, None] * np.sin(np.outer(x, k))
        a = a + cos_forward(cols.T, n_modes).T
    return a


def _ms_profile(op: LinearizedOperator, n_grid: int) -> SpectralField:
    from .poles import PoleSet, RescaledProfile, profile_from_poles

    grid = GridSpec(n_grid)
    s = op.state
    if isinstance(s, PoleSet):
        return profile_from_poles(s, grid)
    if isinstance(s, RescaledProfile):
        return s.field(grid)
    if isinstance(s, SpectralField):
        return SpectralField.from_values(grid, np.interp(grid.x, s.x, s.values), "odd")
    raise TypeError(f"unsupported MS steady state {type(s).__name__}")


def discrete_spectrum(op: LinearizedOperator, n_grid: int = 512) -> SpectrumReport:
    """Eigenvalues of a discretized linearization, descending (real parts for MS).

    RS_ABOUT_V: symmetric finite differences on the n_grid - 1 interior points.
    Other kinds: cosine Galerkin with n_grid modes; the vertical-translation
    mode (constant, eigenvalue of smallest magnitude) is split off.
    """
    if n_grid < 64:
        raise ValueError("n_grid must be >= 64")
    if op.kind is Kind.RS_ABOUT_V:
        ev = _rs_fd_eigenvalues(op.state, n_grid)
        return SpectrumReport(ev, n_grid, True, op.kind.value, op.epsilon)
    if op.kind is Kind.MS_ABOUT_V:
        v = _ms_profile(op, n_grid)
        mat = _galerkin_matrix(n_grid, op.epsilon, v, rs=False)
    else:
        mat = _galerkin_matrix(n_grid, op.epsilon, None, rs=op.kind is Kind.TRIVIAL_RS)
    ev = np.linalg.eigvals(mat)
    idx = int(np.argmin(np.abs(ev)))
    translational = float(ev[idx].real)
    rest = np.delete(ev, idx).real
    return SpectrumReport(np.sort(rest)[::-1], n_grid, False, op.kind.value, op.epsilon, translational)


def top_eigenvalue_with_error(op: LinearizedOperator, n_grid: int = 512):
    """Largest eigenvalue at n_grid and 2 n_grid plus a Richardson error estimate
    (second-order scheme: error ~ |l_n - l_2n| * 4/3 for the coarse value)."""
    coarse = discrete_spectrum(op, n_grid).eigenvalues[0]
    fine = discrete_spectrum(op, 2 * n_grid).eigenvalues[0]
    extrapolated = fine + (fine - coarse) / 3.0
    return float(coarse), float(fine), float(abs(coarse - extrapolated)), float(extrapolated)
