"""Steady states of the slope equation eps v'' - v v' + v = 0, v(0) = v(pi) = 0.

With p = v and w = v' the steady equation is the planar system

    w' = p (w - 1) / eps,    p' = w,

whose orbits through (w0, 0), 0 < w0 < 1, are closed.  Steady states are
orbits whose period T(eps, w0) equals 2 pi / j.

Branches with small eps have w0 extremely close to 1 (g_1(0.12) = 1 - 2e-16),
so orbits are integrated in the log-gap variable q = -ln(1 - w):

    q' = -p / eps,    p' = 1 - exp(-q),

and shooting is done in q0 = -ln(1 - w0).
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import NoBranchError, OpenOrbitError, UnsupportedParameterError
from .spectral import GridSpec, SpectralField, derivative, product

ODE_RTOL = 3e-14
ODE_ATOL = 1e-16
EPS_MIN = 0.02
STEADY_GRID = GridSpec(512)


def log_gap(w0: float) -> float:
    return -math.log1p(-w0)


def w_from_log_gap(q):
    return -np.expm1(-np.asarray(q, dtype=float))


Q_FLOOR = -700.0  # keeps exp(-q) finite at rejected trial steps


def _orbit_rhs(x, y, eps):
    q, p = y[0], y[1]
    return [-p / eps, -math.expm1(-max(q, Q_FLOOR))]


def _steady_rhs(x, y, eps):
    # (q, p, theta, int theta, int p^2)
    q, p, theta = y[0], y[1], y[2]
    return [-p / eps, -math.expm1(-max(q, Q_FLOOR)), p, theta, p * p]


def _half_period(x, y, eps):
    return y[1]


_half_period.terminal = True
_half_period.direction = -1


def _w_zero(x, y, eps):
    return y[0]


_w_zero.direction = -1


@dataclass(frozen=True)
class OrbitSample:
    s: float
    w: float
    p: float


@dataclass(frozen=True)
class PeriodResult:
    epsilon: float
    w0: float
    period: float
    log_gap: float
    quarter_times: tuple = ()
    w_turn: float = 0.0


def _check_eps(epsilon):
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")


def orbit_period(epsilon: float, w0: float | None = None, *, log_gap: float | None = None) -> PeriodResult:
    """Period of the closed orbit through (w0, 0).

    The orbit is symmetric under (p, x) -> (-p, -x), so the upper semi-orbit
    (w0, 0) -> (w=0, p_max) -> (w1, 0) is integrated and the period is the
    sum q1 + q2 + q2 + q1 of its two quarter times, mirrored.
    """
    _check_eps(epsilon)
    if log_gap is None:
        if w0 is None:
            raise TypeError("give w0 or log_gap")
        if w0 >= 1.0:
            raise OpenOrbitError(f"orbit through w0={w0} is open (w0 >= 1)")
        if w0 <= 0.0:
            raise ValueError(f"w0={w0} must be positive")
        q0 = -math.log1p(-w0)
    else:
        q0 = float(log_gap)
        if not q0 > 0:
            raise ValueError(f"log_gap={q0} must be positive")
        if not math.isfinite(q0):
            raise OpenOrbitError("infinite log gap is the open orbit w0 = 1")
        w0 = -math.expm1(-q0)
    sol = solve_ivp(_orbit_rhs, (0.0, 1e5), [q0, 0.0], args=(epsilon,), method="DOP853",
                    rtol=ODE_RTOL, atol=ODE_ATOL, events=(_half_period, _w_zero))
    if sol.t_events[0].size == 0:
        raise RuntimeError(f"no half-period found for eps={epsilon}, log_gap={q0}")
    half = float(sol.t_events[0][0])
    quarter = float(sol.t_events[1][0]) if sol.t_events[1].size else float("nan")
    q1 = float(sol.y_events[0][0][0])
    quarters = (quarter, half - quarter, half - quarter, quarter)
    return PeriodResult(epsilon, w0, float(sum(quarters)), q0, quarters, float(w_from_log_gap(q1)))


def steady_count(epsilon: float) -> int:
    """Number 2k of nontrivial steady states: 1/(k+1)^2 <= eps < 1/k^2."""
    _check_eps(epsilon)
    k = 0
    while (k + 1) ** 2 * epsilon < 1.0:
        k += 1
    return 2 * k


def branch_log_gap(j: int, epsilon: float) -> float:
    """Log gap q0 of g_j(eps): root of T(eps, q0) = 2 pi / j."""
    _check_eps(epsilon)
    if j < 1:
        raise ValueError("branch index j must be >= 1")
    if epsilon * j * j >= 1.0:
        raise NoBranchError(f"branch j={j} exists only for eps < 1/j^2 = {1.0 / j ** 2:g}")
    if epsilon < EPS_MIN:
        raise UnsupportedParameterError(f"eps={epsilon} below supported minimum {EPS_MIN}")
    target = 2.0 * math.pi / j

    def excess(q):
        return orbit_period(epsilon, log_gap=q).period - target

    lo = -math.log1p(-1e-8)
    if excess(lo) >= 0:
        raise NoBranchError(f"eps={epsilon} too close to the bifurcation point 1/j^2 to resolve")
    hi = 1.0
    while excess(hi) < 0:
        hi *= 2.0
        if hi > 1e4:
            raise RuntimeError("period root not bracketed")
    return float(brentq(excess, lo, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps, maxiter=200))


def branch_solve(j: int, epsilon: float) -> float:
    """g_j(eps) = v_j'(0), the orbit label with period 2 pi / j."""
    return float(w_from_log_gap(branch_log_gap(j, epsilon)))


@dataclass(frozen=True)
class RsSteadyState:
    """Nontrivial equilibrium v_j^{+-} of the slope equation and its front data."""

    j: int
    sign: str
    epsilon: float
    w0: float
    log_gap: float
    v: SpectralField
    theta: np.ndarray = field(repr=False)
    V: float = 0.0
    velocity_gap: float = 0.0
    wall_values: tuple = (0.0, 0.0)
    start_log_gap: float = 0.0
    shift: float = 0.0
    orbit: object = field(default=None, repr=False, compare=False)

    @property
    def x(self) -> np.ndarray:
        return self.v.x

    @property
    def delta_phi(self) -> float:
        return float(self.theta.max() - self.theta.min())

    def evaluate(self, x):
        """(v, v', theta) at arbitrary points of [0, pi]."""
        x = np.asarray(x, dtype=float)
        if self.orbit is None:
            z = np.zeros_like(x)
            return z, z.copy(), z.copy()
        y = self.orbit(x + self.shift)
        y0 = self.orbit(self.shift)
        return y[1], w_from_log_gap(y[0]), y[2] - y0[2]

    @property
    def residual(self) -> float:
        return rs_residual(self.v, self.epsilon)

    def zero_count(self) -> int:
        return count_sign_changes(self.evaluate(self.x[1:-1])[0])


def count_sign_changes(values, floor: float = 1e-12) -> int:
    v = np.asarray(values, dtype=float)
    v = v[np.abs(v) > floor * max(1.0, float(np.abs(v).max(initial=0.0)))]
    return int(np.count_nonzero(np.signbit(v[1:]) != np.signbit(v[:-1])))


def rs_residual(v: SpectralField, epsilon: float) -> float:
    """max |eps v'' - v v' + v| over the grid (product dealiased)."""
    r = epsilon * derivative(v, 2).values - product(v, derivative(v, 1)).values + v.values
    return float(np.max(np.abs(r)))


def trivial_state(epsilon: float, grid: GridSpec = STEADY_GRID) -> RsSteadyState:
    zero = SpectralField.from_coeffs(grid, np.zeros(grid.n_modes), "odd")
    return RsSteadyState(0, "+", epsilon, 0.0, 0.0, zero, np.zeros(grid.n_points))


def steady_solution(j: int, sign: str, epsilon: float, grid: GridSpec | None = None) -> RsSteadyState:
    """Construct v_j^{+-} by integrating the orbit through (g_j(eps), 0).

    v_j^- is the half-period translate v_j^+(x + pi/j), which for odd j equals
    -v_j^+(pi - x).
    """
    if sign not in ("+", "-"):
        raise ValueError("sign must be '+' or '-'")
    grid = grid or STEADY_GRID
    q0 = branch_log_gap(j, epsilon)
    shift = 0.0 if sign == "+" else math.pi / j
    sol = solve_ivp(_steady_rhs, (0.0, math.pi + math.pi / j), [q0, 0.0, 0.0, 0.0, 0.0],
                    args=(epsilon,), method="DOP853", rtol=ODE_RTOL, atol=ODE_ATOL,
                    dense_output=True)
    orbit = sol.sol
    x = grid.x
    y = orbit(x + shift)
    start, end = orbit(shift), orbit(math.pi + shift)
    v_raw = y[1]
    theta = y[2] - start[2]
    v = SpectralField.from_values(grid, v_raw, "odd", dealias=True)
    theta_mean = (end[3] - start[3]) / math.pi - start[2]
    v2_mean = (end[4] - start[4]) / math.pi
    slope0 = float(w_from_log_gap(start[0]))
    V = epsilon * slope0 - theta_mean
    return RsSteadyState(
        j=j, sign=sign, epsilon=epsilon, w0=float(w_from_log_gap(q0)), log_gap=q0,
        v=v, theta=theta, V=float(V), velocity_gap=float(abs(V + 0.5 * v2_mean)),
        wall_values=(float(start[1]), float(end[1])), start_log_gap=float(start[0]),
        shift=shift, orbit=orbit,
    )


def orbit_samples(epsilon: float, w0: float, n: int = 400, x_max: float = 10.0) -> list[OrbitSample]:
    """Points along the orbit through (w0, 0) for phase portraits.

    Closed orbits (0 <= w0 < 1) are sampled over one period; open ones over
    |x| <= x_max or until |w| exceeds 50.
    """
    _check_eps(epsilon)
    if 0.0 < w0 < 1.0:
        period = orbit_period(epsilon, w0).period
        s = np.linspace(0.0, period, n)
        sol = solve_ivp(_orbit_rhs, (0.0, period), [log_gap(w0), 0.0], args=(epsilon,),
                        method="DOP853", rtol=1e-10, atol=1e-12, dense_output=True)
        y = sol.sol(s)
        return [OrbitSample(float(a), float(b), float(c)) for a, b, c in zip(s, w_from_log_gap(y[0]), y[1])]
    if w0 == 0.0:
        return [OrbitSample(0.0, 0.0, 0.0)]

    def rhs(x, y):
        return [y[1] * (y[0] - 1.0) / epsilon, y[0]]

    def escape(x, y):
        return 50.0 - abs(y[0])

    escape.terminal = True
    out = []
    for direction in (-1.0, 1.0):
        sol = solve_ivp(rhs, (0.0, direction * x_max), [w0, 0.0], method="DOP853",
                        rtol=1e-10, atol=1e-12, events=escape, dense_output=True)
        s = np.linspace(0.0, sol.t[-1], n // 2)
        y = sol.sol(s)
        pts = [OrbitSample(float(a), float(b), float(c)) for a, b, c in zip(s, y[0], y[1])]
        out.extend(pts[::-1] if direction < 0 else pts[1:])
    return out


@dataclass(frozen=True)
class DiagramRow:
    epsilon: float
    j: int
    sign: str
    w0: float
    delta_phi: float
    V: float
    verdict: str


def _diagram_rows(args):
    from .stability import comparison_test

    epsilon, j, grid = args
    rows = []
    for sign in ("+", "-"):
        state = steady_solution(j, sign, epsilon, grid)
        verdict = comparison_test(state).verdict
        rows.append(DiagramRow(epsilon, j, sign, state.w0, state.delta_phi, state.V, verdict))
    return rows


def bifurcation_diagram(epsilon_grid, j_max: int, grid: GridSpec | None = None,
                        jobs: int = 1) -> list[DiagramRow]:
    """Rows (eps, j, sign, w0, delta_phi, V, verdict) for every live branch j <= j_max."""
    grid = grid or GridSpec(256)
    tasks = []
    for eps in epsilon_grid:
        if not 0.0 < eps < 1.0:
            raise ValueError(f"diagram epsilon {eps} outside (0, 1)")
        k = steady_count(eps) // 2
        tasks.extend((float(eps), j, grid) for j in range(1, min(j_max, k) + 1))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_diagram_rows, tasks))
    else:
        chunks = [_diagram_rows(t) for t in tasks]
    rows = [r for chunk in chunks for r in chunk]
    rows.sort(key=lambda r: (r.epsilon, r.j, r.sign != "+"))
    return rows
