"""Integrators for the three cooperative model families, plus reductions.

The linear family is integrated exactly: on every maximal interval where
all connection weights are constant the propagator is a matrix
exponential, so certificate validation is never confounded by solver
error. The nonlinear and second-order families use classical RK4 with
steps aligned to schedule breakpoints (shortened, never lengthened), so
the time-discontinuous weights are constant within every step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.linalg import expm

from .errors import (
    ConfigurationError,
    DomainError,
    NumericalError,
    PreconditionError,
)
from .serialize import format_float
from .signals import Schedule, Signal, as_fraction

FIRST_ORDER_LINEAR = "first_order_linear"
FIRST_ORDER_NONLINEAR = "first_order_nonlinear"
SECOND_ORDER = "second_order"
_FAMILIES = (FIRST_ORDER_LINEAR, FIRST_ORDER_NONLINEAR, SECOND_ORDER)

_MIN_SEGMENT = 1e-12


@dataclass(frozen=True)
class RadialKernel:
    """Named interaction kernel phi(r); serializable, no code callbacks.

    form "constant": phi(r) = scale.
    form "power_law": phi(r) = scale / (1 + r^2)^beta  (Cucker-Smale).
    Both are Lipschitz, strictly positive, and nonincreasing for beta >= 0.
    """

    form: str = "constant"
    beta: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if self.form not in ("constant", "power_law"):
            raise ConfigurationError(f"unknown kernel form {self.form!r}")
        if self.scale <= 0:
            raise ConfigurationError("kernel scale must be positive")
        if self.beta < 0:
            raise ConfigurationError("power-law exponent beta must be >= 0")

    def phi(self, r):
        r = np.asarray(r, dtype=float)
        if self.form == "constant" or self.beta == 0.0:
            return np.full_like(r, self.scale, dtype=float)
        return self.scale * (1.0 + r * r) ** (-self.beta)

    def phi_of_r2(self, r2):
        r2 = np.asarray(r2, dtype=float)
        if self.form == "constant" or self.beta == 0.0:
            return np.full_like(r2, self.scale, dtype=float)
        return self.scale * (1.0 + r2) ** (-self.beta)

    def phi0(self) -> float:
        return self.scale

    def is_identity(self) -> bool:
        return (self.form == "constant" or self.beta == 0.0) and self.scale == 1.0

    def to_dict(self) -> dict:
        return {"form": self.form, "beta": self.beta, "scale": self.scale}

    @staticmethod
    def from_dict(d: dict) -> "RadialKernel":
        return RadialKernel(
            form=d.get("form", "constant"),
            beta=float(d.get("beta", 0.0)),
            scale=float(d.get("scale", 1.0)),
        )


@dataclass(frozen=True)
class LambdaWeight:
    """Per-agent scaling weight lambda_i(x).

    form "constant": lambda_i = value.
    form "degree_normalized": lambda_i = value * N / sum_l phi(|x_i - x_l|),
    the normalized-influence variant.
    """

    form: str = "constant"
    value: float = 1.0

    def __post_init__(self):
        if self.form not in ("constant", "degree_normalized"):
            raise ConfigurationError(f"unknown lambda form {self.form!r}")
        if self.value <= 0:
            raise ConfigurationError("lambda value must be positive")

    def evaluate(self, phi_matrix: np.ndarray) -> np.ndarray:
        n = phi_matrix.shape[0]
        if self.form == "constant":
            return np.full(n, self.value)
        return self.value * n / phi_matrix.sum(axis=1)

    def is_identity(self) -> bool:
        return self.form == "constant" and self.value == 1.0

    def to_dict(self) -> dict:
        return {"form": self.form, "value": self.value}

    @staticmethod
    def from_dict(d: dict) -> "LambdaWeight":
        return LambdaWeight(form=d.get("form", "constant"), value=float(d.get("value", 1.0)))


@dataclass(frozen=True)
class SystemSpec:
    """Model family, sizes, coupling gain, and kernel parameters.

    coupling_gain None means the classic 1/N normalization; the
    single-chain reproduction uses the unit-rate variant g = 1.
    """

    family: str
    n_agents: int
    dim: int = 1
    coupling_gain: float | None = None
    kernel: RadialKernel = field(default_factory=RadialKernel)
    lam: LambdaWeight = field(default_factory=LambdaWeight)

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ConfigurationError(f"unknown model family {self.family!r}")
        if self.n_agents < 2:
            raise DomainError("need at least two agents")
        if self.dim < 1:
            raise DomainError("dimension must be >= 1")
        if self.coupling_gain is not None and self.coupling_gain <= 0:
            raise DomainError("coupling gain must be positive")

    @property
    def gain(self) -> float:
        return 1.0 / self.n_agents if self.coupling_gain is None else self.coupling_gain

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "n_agents": self.n_agents,
            "dim": self.dim,
            "coupling_gain": self.coupling_gain,
            "kernel": self.kernel.to_dict(),
            "lambda": self.lam.to_dict(),
        }

    @staticmethod
    def from_dict(d: dict) -> "SystemSpec":
        return SystemSpec(
            family=d["family"],
            n_agents=int(d["n_agents"]),
            dim=int(d.get("dim", 1)),
            coupling_gain=(None if d.get("coupling_gain") is None else float(d["coupling_gain"])),
            kernel=RadialKernel.from_dict(d.get("kernel", {})),
            lam=LambdaWeight.from_dict(d.get("lambda", {})),
        )


@dataclass(frozen=True)
class Trajectory:
    """Time grid plus per-agent states (and velocities for second order)."""

    times: np.ndarray
    states: np.ndarray            # (n_times, N, d)
    velocities: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def n_agents(self) -> int:
        return self.states.shape[1]

    @property
    def dim(self) -> int:
        return self.states.shape[2]

    def index_of_time(self, t: float, tol: float = 1e-9) -> int:
        idx = int(np.searchsorted(self.times, t))
        for k in (idx - 1, idx, idx + 1):
            if 0 <= k < len(self.times) and abs(self.times[k] - t) <= tol * max(1.0, abs(t)):
                return k
        raise PreconditionError(f"time {t} is not on the trajectory grid")

    def _diameters(self, arr: np.ndarray) -> np.ndarray:
        n, N, d = arr.shape
        if d == 1:
            flat = arr[:, :, 0]
            return flat.max(axis=1) - flat.min(axis=1)
        out = np.empty(n)
        chunk = max(1, 2_000_000 // (N * N * d))
        for start in range(0, n, chunk):
            block = arr[start : start + chunk]
            diff = block[:, :, None, :] - block[:, None, :, :]
            out[start : start + chunk] = np.sqrt((diff * diff).sum(axis=-1)).max(axis=(1, 2))
        return out

    def position_diameters(self) -> np.ndarray:
        return self._diameters(self.states)

    def velocity_diameters(self) -> np.ndarray:
        if self.velocities is None:
            raise PreconditionError("trajectory has no velocity data")
        return self._diameters(self.velocities)

    # -- serialization -------------------------------------------------------

    def csv_header(self) -> str:
        cols = ["t"]
        for i in range(1, self.n_agents + 1):
            for k in range(1, self.dim + 1):
                cols.append(f"x{i}_{k}")
        if self.velocities is not None:
            for i in range(1, self.n_agents + 1):
                for k in range(1, self.dim + 1):
                    cols.append(f"v{i}_{k}")
        return ",".join(cols)

    def to_csv(self) -> str:
        lines = [self.csv_header()]
        vel = self.velocities
        for row in range(len(self.times)):
            vals = [format_float(self.times[row])]
            vals.extend(format_float(v) for v in self.states[row].reshape(-1))
            if vel is not None:
                vals.extend(format_float(v) for v in vel[row].reshape(-1))
            lines.append(",".join(vals))
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        out = {
            "metadata": self.metadata,
            "times": [float(t) for t in self.times],
            "states": self.states.tolist(),
        }
        if self.velocities is not None:
            out["velocities"] = self.velocities.tolist()
        return out


def diameter(points) -> float:
    """Maximum pairwise Euclidean distance, exact O(N^2) scan."""
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.shape[0] < 2:
        raise DomainError("diameter needs at least two agents")
    diff = arr[:, None, :] - arr[None, :, :]
    return float(np.sqrt((diff * diff).sum(axis=-1)).max())


def _as_states(x0, n_agents: int) -> np.ndarray:
    arr = np.asarray(x0, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] != n_agents:
        raise DomainError(f"initial state must have shape ({n_agents},) or ({n_agents}, d)")
    if not np.all(np.isfinite(arr)):
        raise DomainError("initial state contains non-finite values")
    return arr


def _matrix_at(sched: Schedule, t: Fraction) -> np.ndarray:
    m = np.zeros((sched.n_agents, sched.n_agents))
    for (i, j), sig in sched.entries.items():
        m[i - 1, j - 1] = float(sig.value_at_exact(t))
    return m


def _grid(sched: Schedule, t_end: float, extra_times=None, sample_dt: float | None = None):
    points = {0.0, float(t_end)}
    points.update(b for b in sched.breakpoints(0, t_end) if 0.0 < b < t_end)
    if extra_times is not None:
        points.update(float(t) for t in extra_times if 0.0 <= float(t) <= t_end)
    if sample_dt is not None:
        if sample_dt <= 0:
            raise DomainError("sample_dt must be positive")
        points.update(np.arange(0.0, t_end, sample_dt).tolist())
    grid = np.array(sorted(points))
    return grid


def integrate_linear(
    sched: Schedule,
    x0,
    g: float | None = None,
    t_end: float = 1.0,
    extra_times=None,
    sample_dt: float | None = None,
) -> Trajectory:
    """Exact switched-linear integration via per-piece matrix exponentials.

    The generator on each constant piece has off-diagonal entries g*M_ij
    and zero row sums; multi-dimensional states integrate coordinate-wise.
    The returned grid holds every schedule breakpoint plus any requested
    extra or equally-spaced sample times.
    """
    if t_end <= 0:
        raise DomainError("t_end must be positive")
    n = sched.n_agents
    gain = 1.0 / n if g is None else float(g)
    if gain <= 0:
        raise DomainError("coupling gain must be positive")
    x = _as_states(x0, n)
    grid = _grid(sched, t_end, extra_times, sample_dt)
    states = np.empty((len(grid), n, x.shape[1]))
    states[0] = x
    cache: dict = {}
    for k in range(len(grid) - 1):
        a, b = grid[k], grid[k + 1]
        dt = b - a
        if dt <= 0:
            states[k + 1] = states[k]
            continue
        mid = (as_fraction(a) + as_fraction(b)) / 2
        m = _matrix_at(sched, mid)
        key = (m.tobytes(), dt)
        prop = cache.get(key)
        if prop is None:
            gen = gain * m
            np.fill_diagonal(gen, -gain * m.sum(axis=1))
            prop = expm(gen * dt)
            cache[key] = prop
        states[k + 1] = prop @ states[k]
    if not np.all(np.isfinite(states)):
        raise NumericalError("linear integration produced non-finite states")
    return Trajectory(
        times=grid,
        states=states,
        metadata={
            "integrator": "piecewise-expm",
            "coupling_gain": gain,
            "t_end": float(t_end),
            "schedule_digest": sched.digest(),
        },
    )


def _segments(sched: Schedule, t_end: float, h: float):
    """Breakpoint-aligned step plan: (start, dt, n_steps) per smooth piece."""
    if h <= 0:
        raise DomainError("step size h must be positive")
    edges = _grid(sched, t_end)
    plan = []
    for a, b in zip(edges[:-1], edges[1:]):
        length = b - a
        if length <= 0:
            continue
        if length < _MIN_SEGMENT:
            raise ConfigurationError(
                f"schedule breakpoints denser than {_MIN_SEGMENT} near t={a}"
            )
        n_steps = max(1, int(np.ceil(length / h - 1e-12)))
        plan.append((a, length / n_steps, n_steps))
    return plan


def _pair_kernel(spec: SystemSpec, x: np.ndarray) -> np.ndarray:
    diff = x[:, None, :] - x[None, :, :]
    r2 = (diff * diff).sum(axis=-1)
    return spec.kernel.phi_of_r2(r2)


def integrate_nonlinear(
    spec: SystemSpec, sched: Schedule, x0, t_end: float, h: float
) -> Trajectory:
    """RK4 for the first-order nonlinear family with breakpoint-aligned steps."""
    if spec.family != FIRST_ORDER_NONLINEAR:
        raise PreconditionError("spec.family must be first_order_nonlinear")
    if t_end <= 0:
        raise DomainError("t_end must be positive")
    n = spec.n_agents
    if sched.n_agents != n:
        raise PreconditionError("schedule and system sizes disagree")
    x = _as_states(x0, n)
    gain = spec.gain

    def rhs(xx: np.ndarray, m: np.ndarray) -> np.ndarray:
        phi = _pair_kernel(spec, xx)
        lam = spec.lam.evaluate(phi)
        w = m * phi
        diff = xx[None, :, :] - xx[:, None, :]
        force = np.einsum("ij,ijd->id", w, diff)
        return gain * lam[:, None] * force

    times = [0.0]
    states = [x.copy()]
    for a, dt, n_steps in _segments(sched, t_end, h):
        mid = as_fraction(a) + as_fraction(dt) / 2
        m = _matrix_at(sched, mid)
        t = a
        for _ in range(n_steps):
            k1 = rhs(x, m)
            k2 = rhs(x + 0.5 * dt * k1, m)
            k3 = rhs(x + 0.5 * dt * k2, m)
            k4 = rhs(x + dt * k3, m)
            x = x + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            t += dt
            times.append(t)
            states.append(x.copy())
    arr = np.array(states)
    if not np.all(np.isfinite(arr)):
        raise NumericalError("nonlinear integration produced non-finite states")
    return Trajectory(
        times=np.array(times),
        states=arr,
        metadata={
            "integrator": "rk4-aligned",
            "step": float(h),
            "coupling_gain": gain,
            "t_end": float(t_end),
            "schedule_digest": sched.digest(),
            "system": spec.to_dict(),
        },
    )


def integrate_second_order(
    spec: SystemSpec, sched: Schedule, x0, v0, t_end: float, h: float
) -> Trajectory:
    """RK4 on the stacked (x, v) system; the kernel weights velocity coupling."""
    if spec.family != SECOND_ORDER:
        raise PreconditionError("spec.family must be second_order")
    if t_end <= 0:
        raise DomainError("t_end must be positive")
    n = spec.n_agents
    if sched.n_agents != n:
        raise PreconditionError("schedule and system sizes disagree")
    x = _as_states(x0, n)
    v = _as_states(v0, n)
    if v.shape != x.shape:
        raise DomainError("x0 and v0 must have identical shapes")
    gain = spec.gain

    def accel(xx: np.ndarray, vv: np.ndarray, m: np.ndarray) -> np.ndarray:
        phi = _pair_kernel(spec, xx)
        w = m * phi
        diff = vv[None, :, :] - vv[:, None, :]
        return gain * np.einsum("ij,ijd->id", w, diff)

    times = [0.0]
    xs = [x.copy()]
    vs = [v.copy()]
    for a, dt, n_steps in _segments(sched, t_end, h):
        mid = as_fraction(a) + as_fraction(dt) / 2
        m = _matrix_at(sched, mid)
        t = a
        for _ in range(n_steps):
            k1x, k1v = v, accel(x, v, m)
            x2, v2 = x + 0.5 * dt * k1x, v + 0.5 * dt * k1v
            k2x, k2v = v2, accel(x2, v2, m)
            x3, v3 = x + 0.5 * dt * k2x, v + 0.5 * dt * k2v
            k3x, k3v = v3, accel(x3, v3, m)
            x4, v4 = x + dt * k3x, v + dt * k3v
            k4x, k4v = v4, accel(x4, v4, m)
            x = x + (dt / 6.0) * (k1x + 2 * k2x + 2 * k3x + k4x)
            v = v + (dt / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v)
            t += dt
            times.append(t)
            xs.append(x.copy())
            vs.append(v.copy())
    sarr, varr = np.array(xs), np.array(vs)
    if not (np.all(np.isfinite(sarr)) and np.all(np.isfinite(varr))):
        raise NumericalError("second-order integration produced non-finite states")
    return Trajectory(
        times=np.array(times),
        states=sarr,
        velocities=varr,
        metadata={
            "integrator": "rk4-aligned",
            "step": float(h),
            "coupling_gain": gain,
            "t_end": float(t_end),
            "schedule_digest": sched.digest(),
            "system": spec.to_dict(),
        },
    )


def linearize(spec: SystemSpec, traj: Trajectory, sched: Schedule) -> Schedule:
    """Fold the state-dependent kernel into a piecewise-constant schedule.

    Per grid interval the value lambda_i * phi(|x_i - x_j|) * M_ij is
    sampled at the interval midpoint (states averaged from the endpoints);
    re-integrating the linear system with the result reproduces the
    nonlinear trajectory to second order in the grid spacing.
    """
    if traj.metadata.get("schedule_digest") not in (None, sched.digest()):
        raise PreconditionError("trajectory was not produced from this schedule")
    if traj.n_agents != sched.n_agents:
        raise PreconditionError("trajectory and schedule sizes disagree")
    if spec.kernel.is_identity() and spec.lam.is_identity():
        return sched
    times = traj.times
    pieces: dict[tuple[int, int], list] = {key: [] for key in sched.entries}
    cap = Fraction(1)
    for k in range(len(times) - 1):
        a, b = times[k], times[k + 1]
        if b - a <= 0:
            continue
        xm = 0.5 * (traj.states[k] + traj.states[k + 1])
        phi = _pair_kernel(spec, xm)
        lam = spec.lam.evaluate(phi)
        mid = (as_fraction(float(a)) + as_fraction(float(b))) / 2
        fa, fb = as_fraction(float(a)), as_fraction(float(b))
        for (i, j), sig in sched.entries.items():
            m_val = sig.value_at_exact(mid)
            if m_val == 0:
                continue
            value = as_fraction(float(lam[i - 1] * phi[i - 1, j - 1])) * m_val
            cap = max(cap, value)
            plist = pieces[(i, j)]
            if plist and plist[-1][1] == fa and plist[-1][2] == value:
                plist[-1] = (plist[-1][0], fb, value)
            else:
                plist.append((fa, fb, value))
    entries = {}
    for key, plist in pieces.items():
        if plist:
            entries[key] = Signal(pieces=tuple(plist), max_value=cap)
    return Schedule(sched.n_agents, entries)


def project_trajectory(traj: Trajectory, v, m_bar: float) -> Trajectory:
    """Scalar projection along a unit direction on the m_bar-rescaled grid.

    y_i(t) = x_i(t / m_bar) . v, so the new grid is the old one stretched
    by m_bar; the result solves the one-dimensional linear system driven by
    the value-shrunk, time-stretched schedule.
    """
    direction = np.asarray(v, dtype=float).reshape(-1)
    if direction.shape[0] != traj.dim:
        raise DomainError("projection direction has wrong dimension")
    if abs(np.linalg.norm(direction) - 1.0) > 1e-12:
        raise DomainError("projection direction must be a unit vector")
    if m_bar <= 0:
        raise DomainError("m_bar must be positive")
    projected = traj.states @ direction
    return Trajectory(
        times=traj.times * m_bar,
        states=projected[:, :, None],
        metadata={
            "integrator": traj.metadata.get("integrator", "unknown"),
            "projected_from_dim": traj.dim,
            "time_rescale": float(m_bar),
            "schedule_digest": traj.metadata.get("schedule_digest"),
        },
    )


def left_barrier(x_bar: float, alpha: float, n_agents: int, t: float) -> float:
    """Decreasing exponential barrier alpha + exp(-t (N-1)/N) (x_bar - alpha)."""
    if n_agents < 2:
        raise DomainError("need at least two agents")
    if x_bar < alpha:
        raise DomainError("barrier level x_bar must be >= alpha")
    if t < 0:
        raise DomainError("barrier time must be >= 0")
    rate = (n_agents - 1) / n_agents
    return alpha + np.exp(-rate * t) * (x_bar - alpha)


def extremal_index_sets(states, tol: float):
    """Agents within tol of the max (resp. min), for one-dimensional states."""
    arr = np.asarray(states, dtype=float).reshape(-1)
    if tol < 0:
        raise DomainError("tolerance must be nonnegative")
    hi, lo = arr.max(), arr.min()
    i_plus = frozenset(int(i) + 1 for i in np.flatnonzero(arr >= hi - tol))
    i_minus = frozenset(int(i) + 1 for i in np.flatnonzero(arr <= lo + tol))
    return i_plus, i_minus


# -- invariant checkers (shared by the property suites and acceptance) -------


def max_diameter_increase(traj: Trajectory, which: str = "position") -> float:
    """Largest single-step increase of the diameter series (should be <= tol)."""
    series = traj.position_diameters() if which == "position" else traj.velocity_diameters()
    if len(series) < 2:
        return 0.0
    return float(np.max(np.diff(series)))

def support_violation_1d(traj: Trajectory) -> float:
    """Worst growth of max_i x_i or shrink of min_i x_i along a 1-d trajectory."""
    if traj.dim != 1:
        raise PreconditionError("support endpoints are one-dimensional only")
    flat = traj.states[:, :, 0]
    hi, lo = flat.max(axis=1), flat.min(axis=1)
    worst_hi = float(np.max(np.diff(hi))) if len(hi) > 1 else 0.0
    worst_lo = float(np.max(-np.diff(lo))) if len(lo) > 1 else 0.0
    return max(worst_hi, worst_lo, 0.0)


def directional_support_violation(traj: Trajectory, n_dirs: int = 20, seed: int = 0) -> float:
    """Projection surrogate for convex-hull contraction in dimension > 1."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_dirs):
        u = rng.normal(size=traj.dim)
        u /= np.linalg.norm(u)
        proj = traj.states @ u
        hi = proj.max(axis=1)
        if len(hi) > 1:
            worst = max(worst, float(np.max(np.diff(hi))))
    return worst


def extremal_set_violations(traj: Trajectory, tol: float = 1e-9) -> int:
    """Count grid steps where an extremal index set gains a member while the
    corresponding extremal value stays constant (it must be non-increasing)."""
    if traj.dim != 1:
        raise PreconditionError("extremal sets are one-dimensional only")
    flat = traj.states[:, :, 0]
    hi, lo = flat.max(axis=1), flat.min(axis=1)
    scale = max(1.0, float(np.abs(flat).max()))
    violations = 0
    prev_plus, prev_minus = None, None
    for k in range(len(flat)):
        i_plus, i_minus = extremal_index_sets(flat[k], tol)
        if k > 0:
            if abs(hi[k] - hi[k - 1]) <= tol * scale and not i_plus <= prev_plus:
                violations += 1
            if abs(lo[k] - lo[k - 1]) <= tol * scale and not i_minus <= prev_minus:
                violations += 1
        prev_plus, prev_minus = i_plus, i_minus
    return violations


def position_growth_violation(traj: Trajectory, max_anchors: int = 400) -> float:
    """Worst excess of D_X(t0 + t) over D_X(t0) + t * D_V(t0)."""
    if traj.velocities is None:
        raise PreconditionError("needs a second-order trajectory")
    dx = traj.position_diameters()
    dv = traj.velocity_diameters()
    t = traj.times
    n = len(t)
    stride = max(1, n // max_anchors)
    worst = -np.inf
    for k in range(0, n, stride):
        bound = dx[k] + (t[k:] - t[k]) * dv[k]
        worst = max(worst, float(np.max(dx[k:] - bound)))
    return worst


def barrier_dominance_violation(
    traj: Trajectory, x_bar: float, alpha: float, crossing_window: float
) -> float:
    """Worst barrier deficit after each agent's first crossing inside the window.

    For every agent that satisfies x_I(tau) >= barrier(tau) at some grid
    point tau within [0, crossing_window], the barrier must stay dominated
    at all later grid points; returns the largest violation found.
    """
    if traj.dim != 1:
        raise PreconditionError("barrier checks are one-dimensional only")
    n_agents = traj.n_agents
    barrier = np.array([left_barrier(x_bar, alpha, n_agents, t) for t in traj.times])
    worst = 0.0
    flat = traj.states[:, :, 0]
    in_window = traj.times <= crossing_window + 1e-12
    for i in range(n_agents):
        above = flat[:, i] >= barrier
        candidates = np.flatnonzero(above & in_window)
        if len(candidates) == 0:
            continue
        first = candidates[0]
        deficit = barrier[first:] - flat[first:, i]
        worst = max(worst, float(np.max(deficit)))
    return worst
