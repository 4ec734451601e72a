"""Time integration of the RS, MS and slope (u-form) flame-front equations.

    RS:     phi_t = eps phi_xx - phi_x^2 / 2 + phi - mean(phi)
    MS:     phi_t = eps phi_xx - phi_x^2 / 2 + I(phi)
    UFORM:  u_t   = eps u_xx   - u u_x       + u,   u(0) = u(pi) = 0

The linear part is diagonal in mode space and is propagated exactly by a
fourth-order exponential time-differencing Runge-Kutta scheme (ETDRK4,
Cox & Matthews 2002 with the contour-integral coefficients of Kassam &
Trefethen 2005).  The quadratic nonlinearity is evaluated on the grid and
truncated by the 2/3 rule.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import BlowUpError, GridMismatchError
from .spectral import (
    GridSpec,
    SpectralField,
    antiderivative,
    cos_forward,
    cos_inverse,
    derivative,
    grid_mean,
    sin_inverse,
)

BLOWUP_LIMIT = 1e8
LOG_MARGIN = 1e-6


class Equation(str, enum.Enum):
    RS = "RS"
    MS = "MS"
    UFORM = "UFORM"


@dataclass(frozen=True)
class EvolutionProblem:
    equation: Equation
    epsilon: float
    grid: GridSpec
    t_end: float
    dt: float = 1e-3
    sample_every: int = 1

    def __post_init__(self):
        object.__setattr__(self, "equation", Equation(self.equation))
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not (self.dt > 0 and self.t_end > 0):
            raise ValueError("dt and t_end must be positive")
        if self.sample_every < 1:
            raise ValueError("sample_every must be a positive integer")

    @property
    def parity(self) -> str:
        return "odd" if self.equation is Equation.UFORM else "even"


@dataclass(frozen=True)
class FrontState:
    time: float
    field: SpectralField


@dataclass(frozen=True)
class FrontMetrics:
    mean_position: float
    tip_x: float
    cusp_xs: list = field(default_factory=list)
    delta_phi: float = 0.0


@dataclass(frozen=True)
class LiapunovSample:
    time: float
    value: float | None
    defined: bool


@dataclass(frozen=True)
class LiapunovReport:
    samples: list
    max_increase: float
    worst_relative_increase: float
    monotone: bool
    direction: str = "nonincreasing"


def linear_symbol(equation, epsilon: float, k):
    """Growth rate of mode k under the linear part (k = 0 gives 0)."""
    equation = Equation(equation)
    k = np.asarray(k, dtype=float)
    if equation is Equation.MS:
        rate = k - epsilon * k * k
    else:
        rate = 1.0 - epsilon * k * k
    rate = np.where(k == 0, 0.0, rate)
    return float(rate) if rate.ndim == 0 else rate


def _etdrk4_coefficients(lin: np.ndarray, dt: float, n_contour: int = 32):
    roots = np.exp(1j * np.pi * (np.arange(1, n_contour + 1) - 0.5) / n_contour)
    lr = dt * lin[:, None] + roots[None, :]
    e_lr = np.exp(lr)
    e_half = np.exp(lr / 2)
    q = dt * np.mean((e_half - 1.0) / lr, axis=1).real
    f1 = dt * np.mean((-4.0 - lr + e_lr * (4.0 - 3.0 * lr + lr ** 2)) / lr ** 3, axis=1).real
    f2 = dt * np.mean((2.0 + lr + e_lr * (lr - 2.0)) / lr ** 3, axis=1).real
    f3 = dt * np.mean((-4.0 - 3.0 * lr - lr ** 2 + e_lr * (4.0 - lr)) / lr ** 3, axis=1).real
    return np.exp(dt * lin), np.exp(dt * lin / 2), q, f1, f2, f3


def _nonlinear(problem: EvolutionProblem):
    grid = problem.grid
    n_modes, n_points, cutoff = grid.n_modes, grid.n_points, grid.cutoff
    k = grid.wavenumbers

    if problem.equation is Equation.UFORM:
        def nonlinear(b):
            u = sin_inverse(b, n_points)
            c = cos_forward(u * u, n_modes)
            out = 0.5 * k * c
            out[0] = 0.0
            out[cutoff:] = 0.0
            return out
    else:
        def nonlinear(a):
            slope = sin_inverse(-k * a, n_points)
            out = cos_forward(-0.5 * slope * slope, n_modes)
            out[cutoff:] = 0.0
            return out
    return nonlinear


def integrate(problem: EvolutionProblem, initial: SpectralField) -> list[FrontState]:
    """Advance ``initial`` to ``problem.t_end``; returns the sampled trajectory.

    The first sample is the (dealiased) initial state at t = 0 and the last
    one is at t_end.  Raises BlowUpError on non-finite or runaway samples.
    """
    grid = problem.grid
    if initial.grid != grid:
        raise GridMismatchError("initial field is not on the problem grid")
    if initial.parity != problem.parity:
        raise ValueError(f"{problem.equation.value} needs a {problem.parity} field")

    lin = linear_symbol(problem.equation, problem.epsilon, grid.wavenumbers)
    if problem.equation is Equation.UFORM:
        lin[0] = 0.0
    n_steps = max(1, int(round(problem.t_end / problem.dt)))
    dt = problem.t_end / n_steps
    e_full, e_half, q, f1, f2, f3 = _etdrk4_coefficients(lin, dt)
    nonlinear = _nonlinear(problem)

    v = initial.coeffs.copy()
    v[grid.cutoff:] = 0.0
    parity = problem.parity

    def snapshot(step, coeffs):
        return FrontState(step * dt, SpectralField.from_coeffs(grid, coeffs, parity))

    trajectory = [snapshot(0, v)]
    with np.errstate(over="ignore", invalid="ignore"):  # blow-up is reported below
        for step in range(1, n_steps + 1):
            nv = nonlinear(v)
            a = e_half * v + q * nv
            na = nonlinear(a)
            b = e_half * v + q * na
            nb = nonlinear(b)
            c = e_half * a + q * (2.0 * nb - nv)
            nc = nonlinear(c)
            v = e_full * v + f1 * nv + 2.0 * f2 * (na + nb) + f3 * nc
            if not np.all(np.isfinite(v)):
                raise BlowUpError(f"non-finite coefficients at t={step * dt:.6g}", trajectory[-1])
            if step % problem.sample_every == 0 or step == n_steps:
                state = snapshot(step, v)
                if np.max(np.abs(state.field.values)) > BLOWUP_LIMIT:
                    raise BlowUpError(f"sample exceeded {BLOWUP_LIMIT:g} at t={state.time:.6g}", state)
                trajectory.append(state)
    return trajectory


def random_initial(grid: GridSpec, seed: int = 0, n_active: int = 10,
                   amplitude: float = 1e-2) -> SpectralField:
    """Seeded band-limited cosine noise on modes 1..n_active."""
    rng = np.random.default_rng(seed)
    coeffs = np.zeros(grid.n_modes)
    coeffs[1:n_active + 1] = amplitude * rng.standard_normal(n_active)
    return SpectralField.from_coeffs(grid, coeffs, "even")


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------

def front_metrics(state: FrontState) -> FrontMetrics:
    """Tip is the minimum of phi (fronts travel toward negative y); cusps are the local maxima."""
    phi = state.field.values
    x = state.field.x
    delta = float(phi.max() - phi.min())
    tip = float(x[int(np.argmin(phi))])
    cusps = []
    if delta > 0:
        scale = 1e-12 * max(1.0, float(np.abs(phi).max()))
        padded = np.concatenate([[phi[1]], phi, [phi[-2]]])  # even reflection at the walls
        for i in range(phi.size):
            left, mid, right = padded[i], padded[i + 1], padded[i + 2]
            if mid > left + scale and mid >= right - scale:
                cusps.append(float(x[i]))
    return FrontMetrics(float(state.field.mean()), tip, cusps, delta)


def measured_speed(trajectory, window) -> float:
    """Least-squares slope of the mean front position over ``window = (t0, t1)``."""
    t0, t1 = window
    pts = [(s.time, s.field.mean()) for s in trajectory if t0 <= s.time <= t1]
    if len(pts) < 2:
        raise ValueError(f"need at least two samples in window {window}, found {len(pts)}")
    t, m = np.array(pts).T
    slope, _ = np.polyfit(t, m, 1)
    return float(slope)


def theta_from_u(u: SpectralField) -> SpectralField:
    """theta(x) = int_0^x u, as a cosine field."""
    return SpectralField.from_values(u.grid, antiderivative(u), "even")


def phi_from_uform(trajectory, epsilon: float) -> list[FrontState]:
    """Map a u-form trajectory to RS fronts phi = theta + c(t).

    c(t) = -int_0^t (mean(theta) - eps theta_xx(tau, 0)) dtau, integrated with
    the trapezoid rule over the sample times, so phi(0, 0) = 0.
    """
    out = []
    c = 0.0
    prev = None
    for s in trajectory:
        theta = theta_from_u(s.field)
        k = s.field.grid.wavenumbers
        rate = -(theta.mean() - epsilon * float(np.sum(k * s.field.coeffs)))
        if prev is not None:
            c += 0.5 * (rate + prev[1]) * (s.time - prev[0])
        prev = (s.time, rate)
        coeffs = theta.coeffs.copy()
        coeffs[0] += c
        out.append(FrontState(s.time, SpectralField.from_coeffs(theta.grid, coeffs, "even")))
    return out


def _phi_density(p, w, epsilon):
    """Phi(p, w) = -p^2/(2 eps) + (1-w) ln(1-w) + w, with a series near w = 0."""
    w = np.asarray(w, dtype=float)
    out = np.empty_like(w)
    small = np.abs(w) < 0.1
    ws = w[small]
    acc = np.zeros_like(ws)
    power = ws * ws
    for n in range(2, 24):
        acc += power / (n * (n - 1))
        power = power * ws
    out[small] = acc
    wl = w[~small]
    out[~small] = (1.0 - wl) * np.log1p(-wl) + wl
    return -np.asarray(p) ** 2 / (2.0 * epsilon) + out


def rs_liapunov(u: SpectralField, epsilon: float, time: float = 0.0,
                margin: float = LOG_MARGIN) -> LiapunovSample:
    """U(u) = int_0^pi Phi(u, u_x) dx; undefined once max u_x >= 1 - margin."""
    if u.parity != "odd":
        raise ValueError("rs_liapunov needs a slope field u vanishing at the walls")
    ux = derivative(u, 1).values
    if ux.max() >= 1.0 - margin:
        return LiapunovSample(time, None, False)
    dens = _phi_density(u.values, ux, epsilon)
    return LiapunovSample(time, float(np.pi * grid_mean(dens)), True)


def liapunov_monotone_report(trajectory, epsilon: float, rtol: float = 1e-10) -> LiapunovReport:
    """Check that U(u(t)) is nonincreasing along a u-form trajectory.

    Only the defined subsequence is compared; each step may rise by at most
    ``rtol * max(|U_i|, |U_i+1|)``.
    """
    samples = [rs_liapunov(s.field, epsilon, s.time) for s in trajectory]
    vals = np.array([s.value for s in samples if s.defined], dtype=float)
    if vals.size < 2:
        return LiapunovReport(samples, 0.0, 0.0, True)
    inc = np.diff(vals)
    scale = np.maximum(np.maximum(np.abs(vals[:-1]), np.abs(vals[1:])), np.finfo(float).tiny)
    rel = inc / scale
    return LiapunovReport(
        samples,
        max_increase=float(max(inc.max(), 0.0)),
        worst_relative_increase=float(max(rel.max(), 0.0)),
        monotone=bool(np.all(inc <= rtol * scale)),
    )
