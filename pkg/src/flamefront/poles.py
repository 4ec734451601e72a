"""Pole decomposition of steady Michelson-Sivashinsky fronts.

A steady slope profile is v(x) = -eps * sum_k cot((x - z_k) / 2) over a
conjugate-closed set of poles z = a +- i y.  Poles restricted to the lines
a = 0 and a = pi keep their real parts under the flow, and the heights of
the n upper poles obey the gradient system dy_j/dt = F_j(y).
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import CollisionError, DivergenceError, WindowError
from .spectral import GridSpec, SpectralField, derivative, dl_operator, grid_mean, product

H_MIN = 1e-8
SEPARATION = 1e-10
Y_MAX = 50.0
CATALOG_EPS_MIN = 0.05
CATALOG_GRID = GridSpec(512)

MAXIMUM = "MAXIMUM"
SADDLE = "SADDLE"
INCONCLUSIVE = "INCONCLUSIVE_BY_GERSHGORIN"


def _on_two_lines(lines) -> bool:
    return all(abs(a) < 1e-14 or abs(a - math.pi) < 1e-14 for a in lines)


@dataclass(frozen=True)
class PoleSet:
    """n conjugate pairs line +- i height."""

    epsilon: float
    pairs: tuple

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        pairs = tuple((float(a), float(y)) for a, y in self.pairs)
        if not pairs:
            raise ValueError("a pole set needs at least one pair")
        object.__setattr__(self, "pairs", pairs)
        for a, y in pairs:
            if not y > H_MIN:
                raise ValueError(f"pole height {y} must exceed {H_MIN}")
        by_line: dict = {}
        for a, y in pairs:
            by_line.setdefault(round(a, 12), []).append(y)
        for ys in by_line.values():
            ys = np.sort(ys)
            if ys.size > 1 and np.min(np.diff(ys)) < SEPARATION:
                raise CollisionError("two poles on one line closer than the separation floor")

    @classmethod
    def from_arrays(cls, epsilon, lines, heights):
        return cls(epsilon, tuple(zip(np.asarray(lines, float), np.asarray(heights, float))))

    @property
    def n(self) -> int:
        return len(self.pairs)

    @property
    def lines(self) -> np.ndarray:
        return np.array([a for a, _ in self.pairs])

    @property
    def heights(self) -> np.ndarray:
        return np.array([y for _, y in self.pairs])

    def with_heights(self, heights) -> "PoleSet":
        return PoleSet.from_arrays(self.epsilon, self.lines, heights)

    def poles(self) -> np.ndarray:
        """All 2n poles, upper ones first."""
        z = self.lines + 1j * self.heights
        return np.concatenate([z, z.conj()])


def _require_two_lines(poles: PoleSet):
    if not _on_two_lines(poles.lines):
        raise ValueError("flow operations need every pole on the lines 0 or pi")


def _eta(lines) -> np.ndarray:
    return np.rint(np.cos(lines[:, None] - lines[None, :]))


def _force(heights, lines, eps) -> np.ndarray:
    y = np.asarray(heights, dtype=float)
    same = _eta(lines) > 0
    dm = 0.5 * (y[:, None] - y[None, :])
    dp = 0.5 * (y[:, None] + y[None, :])
    off = ~np.eye(y.size, dtype=bool)
    with np.errstate(divide="ignore"):
        terms = np.where(same, 1.0 / np.tanh(np.where(off, dm, 1.0)) + 1.0 / np.tanh(dp),
                         np.tanh(dm) + np.tanh(dp))
    total = np.where(off, terms, 0.0).sum(axis=1) + 1.0 / np.tanh(y)
    return eps * total - 1.0


def _force_jacobian(heights, lines, eps) -> np.ndarray:
    y = np.asarray(heights, dtype=float)
    n = y.size
    same = _eta(lines) > 0
    off = ~np.eye(n, dtype=bool)
    dm = 0.5 * (y[:, None] - y[None, :])
    dp = 0.5 * (y[:, None] + y[None, :])
    safe_dm = np.where(off & same, dm, 1.0)
    csch2_m = 1.0 / np.sinh(safe_dm) ** 2
    csch2_p = 1.0 / np.sinh(dp) ** 2
    sech2_m = 1.0 / np.cosh(dm) ** 2
    sech2_p = 1.0 / np.cosh(dp) ** 2
    # d/dy_j of the l-th pair terms, and d/dy_l of the same
    d_self = np.where(same, -0.5 * (csch2_m + csch2_p), 0.5 * (sech2_m + sech2_p))
    d_other = np.where(same, 0.5 * (csch2_m - csch2_p), 0.5 * (sech2_p - sech2_m))
    jac = np.where(off, d_other, 0.0)
    diag = np.where(off, d_self, 0.0).sum(axis=1) - 1.0 / np.sinh(y) ** 2
    jac[np.diag_indices(n)] = diag
    return eps * jac


def force_F(poles: PoleSet) -> np.ndarray:
    """Vertical velocity F_j of each upper pole."""
    _require_two_lines(poles)
    return _force(poles.heights, poles.lines, poles.epsilon)


def force_jacobian(poles: PoleSet) -> np.ndarray:
    """dF_i/dy_j in the n representative heights (symmetric)."""
    _require_two_lines(poles)
    return _force_jacobian(poles.heights, poles.lines, poles.epsilon)


def complex_velocity(z, epsilon: float) -> np.ndarray:
    """dz_j/dt = -eps sum_{l != j} cot((z_j - z_l)/2) - i sign(Im z_j)."""
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z.imag) <= 0):
        raise ValueError("poles must lie off the real axis")
    diff = z[:, None] - z[None, :]
    off = ~np.eye(z.size, dtype=bool)
    if np.any(np.abs(diff[off]) < SEPARATION):
        raise CollisionError("coincident poles")
    cot = np.where(off, 1.0 / np.tan(0.5 * np.where(off, diff, 1.0)), 0.0)
    return -epsilon * cot.sum(axis=1) - 1j * np.sign(z.imag)


def pole_liapunov_full(heights, lines, epsilon: float) -> float:
    """U over all poles given individually (ordered pairs j != l).

    dU/dy_j equals the vertical velocity of pole j, so U increases along the flow.
    """
    y = np.asarray(heights, dtype=float)
    lines = np.asarray(lines, dtype=float)
    eta = _eta(lines)
    d = 0.5 * (y[:, None] - y[None, :])
    off = ~np.eye(y.size, dtype=bool)
    # same line: |sinh(d/2)|, opposite lines: cosh(d/2)
    with np.errstate(divide="ignore"):
        val = np.where(eta > 0, np.log(np.abs(np.sinh(d))), np.log(np.cosh(d)))
    return float(epsilon * np.where(off, val, 0.0).sum() - np.abs(y).sum())


def pole_liapunov(poles: PoleSet) -> float:
    _require_two_lines(poles)
    y = poles.heights
    return pole_liapunov_full(np.concatenate([y, -y]), np.concatenate([poles.lines] * 2),
                              poles.epsilon)


# ---------------------------------------------------------------------------
# flows and steady states
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PoleFlowReport:
    times: np.ndarray = field(repr=False)
    trajectory: np.ndarray = field(repr=False)
    liapunov_values: np.ndarray = field(repr=False)
    final_force_norm: float = math.inf
    converged: bool = False
    start: tuple = ()


@dataclass(frozen=True)
class HessianReport:
    matrix: np.ndarray
    eigenvalues: np.ndarray
    gershgorin: list
    classification: str
    certified: bool


def _min_separation(y, lines):
    sep = math.inf
    for line in np.unique(np.round(lines, 12)):
        ys = np.sort(y[np.isclose(lines, line)])
        if ys.size > 1:
            sep = min(sep, float(np.min(np.diff(ys))))
    return sep


def newton_polish(poles: PoleSet, tol: float = 1e-12, max_iter: int = 50) -> PoleSet:
    """Newton iteration on F = 0 with the analytic Jacobian."""
    y = poles.heights.copy()
    lines, eps = poles.lines, poles.epsilon
    for _ in range(max_iter):
        f = _force(y, lines, eps)
        if np.max(np.abs(f)) < tol:
            break
        step = np.linalg.solve(_force_jacobian(y, lines, eps), f)
        y = y - step
        if np.any(y <= H_MIN):
            raise CollisionError("Newton step pushed a pole onto the real axis")
        if np.max(np.abs(step)) < 1e-15 * max(1.0, np.max(np.abs(y))):
            break
    return poles.with_heights(y)


def flow_to_steady(poles: PoleSet, t_max: float = 1e4, tol: float = 1e-8,
                   n_samples: int = 400) -> tuple[PoleSet, PoleFlowReport]:
    """Follow dy/dt = F(y) until |F| < tol, then polish with Newton to 1e-12."""
    _require_two_lines(poles)
    eps, lines = poles.epsilon, poles.lines

    def rhs(t, y):
        return _force(y, lines, eps)

    def jac(t, y):
        return _force_jacobian(y, lines, eps)

    def settled(t, y):
        return np.max(np.abs(_force(y, lines, eps))) - tol

    def collision(t, y):
        return min(_min_separation(y, lines), float(np.min(y)) - H_MIN) - SEPARATION

    def divergence(t, y):
        return Y_MAX - float(np.max(y))

    for ev in (settled, collision, divergence):
        ev.terminal = True
    settled.direction = -1

    y0 = poles.heights
    if np.max(np.abs(rhs(0.0, y0))) < tol:
        sol_t, sol_y = np.array([0.0]), y0[:, None]
        status = "settled"
    else:
        sol = solve_ivp(rhs, (0.0, t_max), y0, method="Radau", jac=jac, rtol=1e-10, atol=1e-12,
                        events=(settled, collision, divergence), dense_output=True)
        if sol.t_events[1].size:
            raise CollisionError(f"poles collided at t={sol.t_events[1][0]:.6g}")
        if sol.t_events[2].size:
            raise DivergenceError(f"a pole escaped beyond height {Y_MAX} at t={sol.t_events[2][0]:.6g}")
        t_end = sol.t[-1]
        sol_t = np.unique(np.concatenate([np.linspace(0.0, t_end, n_samples), sol.t]))
        sol_y = sol.sol(sol_t)
        status = "settled" if sol.t_events[0].size else "timeout"

    final = poles.with_heights(sol_y[:, -1])
    fnorm = float(np.max(np.abs(_force(final.heights, lines, eps))))
    if status == "settled" or fnorm < 1e-6:
        final = newton_polish(final)
        fnorm = float(np.max(np.abs(_force(final.heights, lines, eps))))
    u = np.array([pole_liapunov(poles.with_heights(col)) for col in sol_y.T])
    report = PoleFlowReport(sol_t, sol_y.T.copy(), u, fnorm, fnorm < 1e-12,
                            tuple(float(v) for v in y0))
    return final, report


def _ladder(n: int) -> np.ndarray:
    return 0.5 * np.arange(1, n + 1)


def coalescent_steady(n_pairs: int, epsilon: float, line: float = 0.0,
                      init_heights=None) -> PoleSet:
    """The unique steady state with all n_pairs upper poles on one line."""
    if n_pairs < 1:
        raise ValueError("n_pairs must be >= 1")
    if not epsilon * (2 * n_pairs - 1) < 1.0:
        raise WindowError(f"{n_pairs} coalescent pairs need eps*(2n-1) < 1, got eps={epsilon}")
    heights = _ladder(n_pairs) if init_heights is None else np.asarray(init_heights, float)
    start = PoleSet.from_arrays(epsilon, [line] * n_pairs, heights)
    final, report = flow_to_steady(start)
    if not report.converged:
        raise RuntimeError(f"coalescent flow did not converge (|F| = {report.final_force_norm:.3g})")
    return final.with_heights(np.sort(final.heights))


def coalescent_uniqueness_gap(n_pairs: int, epsilon: float, seed: int = 1) -> float:
    """max height difference between the ladder start and a random start."""
    rng = np.random.default_rng(seed)
    a = coalescent_steady(n_pairs, epsilon)
    init = np.sort(rng.uniform(0.05, 3.0, n_pairs))
    b = coalescent_steady(n_pairs, epsilon, init_heights=init)
    return float(np.max(np.abs(a.heights - b.heights)))


def bicoalescent_steady(n0: int, n_pi: int, epsilon: float,
                        init_heights=None) -> tuple[PoleSet, HessianReport]:
    """Steady state reached from ``init_heights`` (line-0 heights first)."""
    if n0 < 1 or n_pi < 1:
        raise ValueError("both lines need at least one pair")
    if init_heights is None:
        init_heights = np.concatenate([_ladder(n0), _ladder(n_pi)])
    lines = [0.0] * n0 + [math.pi] * n_pi
    final, report = flow_to_steady(PoleSet.from_arrays(epsilon, lines, init_heights))
    if not report.converged:
        raise RuntimeError(f"bi-coalescent flow did not converge (|F| = {report.final_force_norm:.3g})")
    return final, hessian_classify(final)


def hessian_classify(poles: PoleSet, zero_tol: float = 1e-10) -> HessianReport:
    """Sign structure of dF_i/dy_j at a steady configuration."""
    f = force_F(poles)
    if np.max(np.abs(f)) >= 1e-10:
        raise ValueError(f"not a steady configuration: |F| = {np.max(np.abs(f)):.3g}")
    h = force_jacobian(poles)
    ev = np.linalg.eigvalsh(h)
    radius = np.abs(h).sum(axis=1) - np.abs(np.diag(h))
    discs = [(float(c), float(r)) for c, r in zip(np.diag(h), radius)]
    if np.all(ev < -zero_tol):
        label = MAXIMUM
    elif ev.min() < -zero_tol and ev.max() > zero_tol:
        label = SADDLE
    else:
        label = INCONCLUSIVE
    certified = bool(all(c + r < 0 for c, r in discs))
    return HessianReport(h, ev, discs, label, certified)


# ---------------------------------------------------------------------------
# profiles
# ---------------------------------------------------------------------------

def _pair_terms(x, a, y):
    """(2 sinh^2(y/2) + 2 sin^2((x-a)/2)) = cosh y - cos(x-a), computed without cancellation."""
    s = x - a
    return 2.0 * np.sinh(0.5 * y) ** 2 + 2.0 * np.sin(0.5 * s) ** 2, s


def pole_profile_values(poles: PoleSet, x) -> np.ndarray:
    """v(x) = -eps sum cot((x - z)/2); each pair adds -2 eps sin(x-a)/(cosh y - cos(x-a))."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for a, y in poles.pairs:
        den, s = _pair_terms(x, a, y)
        out -= 2.0 * poles.epsilon * np.sin(s) / den
    return out


def pole_theta_values(poles: PoleSet, x) -> np.ndarray:
    """theta(x) = int_0^x v in closed form."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for a, y in poles.pairs:
        den, _ = _pair_terms(x, a, y)
        den0, _ = _pair_terms(0.0, a, y)
        out -= 2.0 * poles.epsilon * np.log(den / den0)
    return out


def profile_from_poles(poles: PoleSet, grid: GridSpec) -> SpectralField:
    return SpectralField.from_values(grid, pole_profile_values(poles, grid.x), "odd")


def ms_residual(v: SpectralField, epsilon: float) -> float:
    """max |eps v'' - v v' + I(v)| over interior points, product dealiased."""
    if v.parity != "odd":
        raise ValueError("ms_residual expects a slope field vanishing at the walls")
    r = (epsilon * derivative(v, 2).values - product(v, derivative(v, 1)).values
         + dl_operator(v).values)
    return float(np.max(np.abs(r[1:-1])))


def ms_velocity(v_values) -> float:
    """Front speed V = -mean(v^2)/2 of a steady MS profile."""
    return -0.5 * grid_mean(np.asarray(v_values) ** 2)


@dataclass(frozen=True)
class RescaledProfile:
    """v(x) = v_base(k x) with the base steady at k * eps; theta(x) = theta_base(k x) / k."""

    k: int
    base: PoleSet

    @property
    def epsilon(self) -> float:
        return self.base.epsilon / self.k

    def values(self, x) -> np.ndarray:
        return pole_profile_values(self.base, self.k * np.asarray(x, dtype=float))

    def theta(self, x) -> np.ndarray:
        return pole_theta_values(self.base, self.k * np.asarray(x, dtype=float)) / self.k

    def field(self, grid: GridSpec) -> SpectralField:
        return SpectralField.from_values(grid, self.values(grid.x), "odd")

    def poles(self) -> PoleSet:
        """Explicit pole set z/k + 2 pi m/k of the rescaled profile."""
        pairs = []
        for m in range(self.k):
            for a, y in self.base.pairs:
                pairs.append(((a + 2.0 * math.pi * m) / self.k % (2.0 * math.pi), y / self.k))
        return PoleSet(self.epsilon, tuple(pairs))


def rescale_solution(base: PoleSet, k: int) -> RescaledProfile:
    if k < 1 or int(k) != k:
        raise ValueError("k must be a positive integer")
    if np.max(np.abs(force_F(base))) >= 1e-10:
        raise ValueError("base pole set is not steady")
    return RescaledProfile(int(k), base)


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CatalogEntry:
    j: int
    k: int
    sign: str
    n_poles: int
    heights: tuple
    delta_phi: float
    V: float
    residual: float
    classification: str
    profile: RescaledProfile = field(repr=False, compare=False, default=None)


def counting_formula(n: int) -> int:
    """2 sum_{m=1}^{n} floor(2n / (2m - 1))."""
    return 2 * sum((2 * n) // (2 * m - 1) for m in range(1, n + 1))


def family_members(epsilon: float) -> list[tuple[int, int]]:
    """(j, k) pairs: k eps lies in the window of some m and j = 1..m."""
    out = []
    k = 1
    while k * epsilon < 1.0:
        m = 1
        while (2 * m + 1) * k * epsilon < 1.0:
            m += 1
        out.extend((j, k) for j in range(1, m + 1))
        k += 1
    return out


def _classify_entry(base: PoleSet, k: int) -> str:
    if k == 1:
        return hessian_classify(base).classification
    if k == 2:
        # the doubled coalescent is the equal-height bi-coalescent on lines 0 and pi
        y = np.sort(base.heights) / 2.0
        lines = [0.0] * y.size + [math.pi] * y.size
        bi = newton_polish(PoleSet.from_arrays(base.epsilon / 2.0, lines, np.concatenate([y, y])))
        return hessian_classify(bi).classification
    return "UNCLASSIFIED"


def _catalog_entries(args) -> list[CatalogEntry]:
    j, k, epsilon, grid = args
    out = []
    base_plus = coalescent_steady(j, k * epsilon, 0.0)
    label = _classify_entry(base_plus, k)
    for sign, line in (("+", 0.0), ("-", math.pi)):
        base = base_plus if sign == "+" else coalescent_steady(j, k * epsilon, line)
        prof = rescale_solution(base, k)
        v = prof.field(grid)
        theta = prof.theta(grid.x)
        out.append(CatalogEntry(
            j=j, k=k, sign=sign, n_poles=2 * j * k,
            heights=tuple(float(h) / k for h in np.sort(base.heights)),
            delta_phi=float(theta.max() - theta.min()),
            V=ms_velocity(v.values),
            residual=ms_residual(v, epsilon),
            classification=label,
            profile=prof,
        ))
    return out


def enumerate_family(epsilon: float, grid: GridSpec = CATALOG_GRID, jobs: int = 1) -> list[CatalogEntry]:
    """All coalescent and rescaled (multi-coalescent) steady solutions at epsilon."""
    if not CATALOG_EPS_MIN < epsilon < 1.0:
        raise ValueError(f"catalog epsilon must lie in ({CATALOG_EPS_MIN}, 1)")
    tasks = [(j, k, float(epsilon), grid) for j, k in family_members(epsilon)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_catalog_entries, tasks))
    else:
        chunks = [_catalog_entries(t) for t in tasks]
    rows = [e for chunk in chunks for e in chunk]
    rows.sort(key=lambda e: (e.k, e.j, e.sign != "+"))
    return rows
