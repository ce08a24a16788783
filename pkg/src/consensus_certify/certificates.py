"""Explicit convergence-rate constants and flocking classification.

Every constant is computed from the closed-form expressions: the one-step
gain eta = mu*T/(N + mu*T), the per-block contraction

    C = 1 - (1/2) * (m_lower*mu*T / (N + m_lower*mu*T))^d* * exp(-2 d* T m_upper),

its persistent-excitation and integral-scrambling variants, the
second-order block sequence C(n tau), and the power-law alignment /
flocking criterion 2*beta*d* vs 1. Arithmetic is carried out in log space
wherever 1 - C can underflow (the reference table reaches 3e-88), and a
certificate whose 1 - C falls below machine epsilon is flagged vacuous
rather than silently reported as C = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError
from .dynamics import RadialKernel, SystemSpec

_EPS = float(np.finfo(float).eps)

FAMILY_LINEAR = "first_order_linear"
FAMILY_NONLINEAR = "first_order_nonlinear"
FAMILY_SECOND_ORDER = "second_order"


def eta(n_agents: int, T: float, mu: float) -> float:
    """One-step propagation gain mu*T / (N + mu*T), always in (0, 1)."""
    if n_agents < 2:
        raise DomainError("need at least two agents")
    if T <= 0 or mu <= 0:
        raise DomainError("T and mu must be positive")
    return mu * T / (n_agents + mu * T)


@dataclass(frozen=True)
class RateCertificate:
    """All constants of one exponential-contraction certificate.

    tau is the block length d* T / m_upper for the Moreau and PE kinds;
    for the ISC kind the verification blocks are block_periods * T long
    (see horizon_note) while tau keeps its definitional value.
    """

    family: str
    condition: str                # moreau | pe | isc
    n_agents: int
    T: float
    mu: float
    d_star: int
    eta: float
    C: float
    one_minus_C: float
    log10_one_minus_C: float
    tau: float
    delta: float
    m_lower: float
    m_upper: float
    vacuous: bool
    horizon_note: str | None = None
    block_periods: int | None = None
    derivation: tuple[str, ...] = ()

    def __post_init__(self):
        if self.n_agents < 2:
            raise DomainError("need at least two agents")
        if not (0 < self.eta < 1):
            raise DomainError(f"eta must lie in (0,1), got {self.eta}")
        if not (1 <= self.d_star <= self.n_agents - 1):
            raise DomainError(f"d_star must lie in 1..N-1, got {self.d_star}")
        if not (0 < self.m_lower <= self.m_upper):
            raise DomainError("need 0 < m_lower <= m_upper")
        if self.one_minus_C < 0 or self.one_minus_C > 0.5 + 1e-12:
            raise DomainError(f"1 - C = {self.one_minus_C} outside [0, 1/2]")
        if self.one_minus_C == 0.0 and not self.vacuous:
            raise DomainError("an exactly-one contraction factor must be flagged vacuous")
        if self.delta < 0:
            raise DomainError("delta must be nonnegative")

    @property
    def block_seconds(self) -> float:
        """Length of one verification block in trajectory time."""
        if self.block_periods is not None:
            return float(self.block_periods) * self.T
        return self.tau

    def to_json_dict(self) -> dict:
        return {
            "family": self.family,
            "condition": self.condition,
            "N": self.n_agents,
            "T": self.T,
            "mu": self.mu,
            "d_star": self.d_star,
            "eta": self.eta,
            "C": self.C,
            "one_minus_C": self.one_minus_C,
            "log10_one_minus_C": self.log10_one_minus_C,
            "tau": self.tau,
            "delta": self.delta,
            "m_lower": self.m_lower,
            "m_upper": self.m_upper,
            "vacuous": self.vacuous,
            "horizon_note": self.horizon_note,
            "block_periods": self.block_periods,
            "derivation": list(self.derivation),
        }


def _certificate(
    family: str,
    condition: str,
    n_agents: int,
    T: float,
    mu: float,
    d_star: int,
    m_lower: float,
    m_upper: float,
    eta_power: int,
    exponent: float,
    half_factor: bool,
    horizon_note: str | None = None,
    block_periods: int | None = None,
    extra_trace: tuple[str, ...] = (),
) -> RateCertificate:
    eta_tilde = m_lower * mu * T / (n_agents + m_lower * mu * T)
    ln_term = eta_power * math.log(eta_tilde) + exponent
    if half_factor:
        ln_term += math.log(0.5)
    one_minus_c = math.exp(ln_term) if ln_term > -745.0 else 0.0
    log10_omc = ln_term / math.log(10.0) if math.isfinite(ln_term) else float("-inf")
    vacuous = one_minus_c < _EPS
    c = 1.0 - one_minus_c
    tau = d_star * T / m_upper
    delta = -n_agents / (2.0 * (n_agents - 1) * m_upper) * math.log1p(-one_minus_c)
    trace = (
        f"eta_tilde = m_lower*mu*T/(N + m_lower*mu*T) = {eta_tilde!r}",
        f"ln(1-C) = {'ln(1/2) + ' if half_factor else ''}{eta_power}*ln(eta_tilde) + ({exponent!r})"
        f" = {ln_term!r}",
        f"1-C = {one_minus_c!r} (log10 = {log10_omc!r})",
        f"tau = d_star*T/m_upper = {tau!r}",
        f"delta = -N/(2(N-1) m_upper) * ln(C) = {delta!r}",
    ) + extra_trace
    return RateCertificate(
        family=family,
        condition=condition,
        n_agents=n_agents,
        T=float(T),
        mu=float(mu),
        d_star=d_star,
        eta=eta(n_agents, T, mu),
        C=c,
        one_minus_C=one_minus_c,
        log10_one_minus_C=log10_omc,
        tau=tau,
        delta=delta,
        m_lower=float(m_lower),
        m_upper=float(m_upper),
        vacuous=vacuous,
        horizon_note=horizon_note,
        block_periods=block_periods,
        derivation=trace,
    )


def rate_nonlinear(
    n_agents: int,
    T: float,
    mu: float,
    d_star: int,
    m_lower: float,
    m_upper: float,
    proof_constant: bool = False,
) -> RateCertificate:
    """Contraction certificate for kernel-weighted first-order systems.

    Uses the stated exponential exp(-2 d* T m_upper); proof_constant opts
    into the sharper exp(-2 ((N-1)/N) d* T m_upper) that the derivation
    actually yields.
    """
    if n_agents < 2:
        raise DomainError("need at least two agents")
    if T <= 0 or mu <= 0:
        raise DomainError("T and mu must be positive")
    if not (1 <= d_star <= n_agents - 1):
        raise DomainError(f"d_star must lie in 1..{n_agents - 1}")
    if not (0 < m_lower <= m_upper):
        raise DomainError("need 0 < m_lower <= m_upper")
    factor = 2.0 * (n_agents - 1) / n_agents if proof_constant else 2.0
    exponent = -factor * d_star * T * m_upper
    extra = ("sharper (N-1)/N exponent factor enabled",) if proof_constant else ()
    family = FAMILY_LINEAR if (m_lower == 1.0 and m_upper == 1.0) else FAMILY_NONLINEAR
    return _certificate(
        family, "moreau", n_agents, T, mu, d_star, m_lower, m_upper,
        eta_power=d_star, exponent=exponent, half_factor=True, extra_trace=extra,
    )


def rate_linear(
    n_agents: int, T: float, mu: float, d_star: int, proof_constant: bool = False
) -> RateCertificate:
    """Certificate for the plain linear family (m_lower = m_upper = 1)."""
    return rate_nonlinear(n_agents, T, mu, d_star, 1.0, 1.0, proof_constant=proof_constant)


def rate_PE(
    n_agents: int, T: float, mu: float, m_lower: float, m_upper: float
) -> RateCertificate:
    """Persistent-excitation certificate: complete graph, d* = 1.

    The exponential carries the (N-1)/N factor exactly as stated for this
    condition; no cross-formula comparison with the Moreau certificate is
    implied.
    """
    if n_agents < 2:
        raise DomainError("need at least two agents")
    if T <= 0 or not (0 < mu <= 1):
        raise DomainError("need T > 0 and mu in (0, 1]")
    if not (0 < m_lower <= m_upper):
        raise DomainError("need 0 < m_lower <= m_upper")
    exponent = -2.0 * (n_agents - 1) / n_agents * T * m_upper
    return _certificate(
        FAMILY_NONLINEAR, "pe", n_agents, T, mu, 1, m_lower, m_upper,
        eta_power=1, exponent=exponent, half_factor=True,
        horizon_note="stated block length is T",
    )


def isc_block_periods(n_agents: int) -> int:
    """Exact number of base periods per ISC verification block."""
    if n_agents < 2:
        raise DomainError("need at least two agents")
    return (n_agents - 1) * 2 ** (n_agents * (n_agents - 1))


def rate_ISC(
    n_agents: int, T: float, mu: float, m_lower: float, m_upper: float
) -> RateCertificate:
    """Integral-scrambling certificate over blocks of (N-1) 2^(N(N-1)) periods.

    The contraction uses the (N-1)-th power of eta_tilde, no 1/2 factor,
    and the tower exponent (N-1)^(2^(N(N-1))); it is evaluated in log
    space and flagged vacuous once 1 - C underflows (any N > 3 at double
    precision).
    """
    if n_agents < 2:
        raise DomainError("need at least two agents")
    if T <= 0 or not (0 < mu <= 1):
        raise DomainError("need T > 0 and mu in (0, 1]")
    if not (0 < m_lower <= m_upper):
        raise DomainError("need 0 < m_lower <= m_upper")
    n = n_agents
    periods = isc_block_periods(n)
    block_seconds_note = f"validity block length = (N-1)*2^(N(N-1))*T = {periods}*T"
    # (N-1)^(2^(N(N-1))) in log space; overflow means the certificate is vacuous.
    tower_log = (2.0 ** (n * (n - 1))) * math.log(max(n - 1, 1))
    if n == 2:
        tower = 1.0
    elif tower_log > 700.0:
        tower = float("inf")
    else:
        tower = math.exp(tower_log)
    exponent = -2.0 * (n - 1) / n * tower * T * m_upper
    extra = (f"log(exponent tower (N-1)^(2^(N(N-1)))) = {tower_log!r}",)
    return _certificate(
        FAMILY_NONLINEAR, "isc", n, T, mu, n - 1, m_lower, m_upper,
        eta_power=n - 1, exponent=exponent, half_factor=False,
        horizon_note=block_seconds_note, block_periods=periods, extra_trace=extra,
    )


def phi_envelope(cert: RateCertificate, t: float) -> float:
    """Intra-block envelope: 1 until tau - delta, then the exponential ramp
    C * exp(2 ((N-1)/N) m_upper (tau - t)); continuous by construction of delta."""
    if t < -1e-12 or t > cert.tau * (1 + 1e-12) + 1e-12:
        raise DomainError(f"envelope time {t} outside [0, tau = {cert.tau}]")
    if t <= cert.tau - cert.delta:
        return 1.0
    rate = 2.0 * (cert.n_agents - 1) / cert.n_agents * cert.m_upper
    return cert.C * math.exp(rate * (cert.tau - t))


@dataclass(frozen=True)
class MBounds:
    """Extremal kernel products over the invariant ball of the initial data."""

    m_lower: float
    m_upper: float
    sampled: bool           # True when m_lower is a best-found sampled value


def bounds_m(spec: SystemSpec, x0, n_samples: int = 10_000, seed: int = 0) -> MBounds:
    """Extremal values of lambda_i(x) * phi(|x_i - x_j|) over the invariant ball.

    For a constant lambda and a radial nonincreasing kernel the bounds are
    closed-form: the maximum is phi(0), the minimum phi(2R) with R the
    largest initial norm (two points in a ball of radius R are at most 2R
    apart). Otherwise the maximum uses an analytic envelope and the
    minimum is sampled (flagged).
    """
    arr = np.asarray(x0, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    radius = float(np.linalg.norm(arr, axis=1).max())
    kern = spec.kernel
    if spec.lam.form == "constant":
        lam = spec.lam.value
        m_upper = lam * float(kern.phi(0.0))
        m_lower = lam * float(kern.phi(2.0 * radius))
        return MBounds(m_lower=m_lower, m_upper=m_upper, sampled=False)
    if spec.lam.form == "degree_normalized":
        v = spec.lam.value
        phi0 = float(kern.phi(0.0))
        phi2r = float(kern.phi(2.0 * radius))
        m_upper = v * phi0 / phi2r          # lambda_i <= v / phi(2R), phi <= phi(0)
        rng = np.random.default_rng(seed)
        n, d = spec.n_agents, arr.shape[1]
        directions = rng.normal(size=(n_samples, n, d))
        directions /= np.maximum(np.linalg.norm(directions, axis=2, keepdims=True), 1e-300)
        radii = radius * rng.uniform(0.0, 1.0, size=(n_samples, n, 1)) ** (1.0 / d)
        configs = np.concatenate([directions * radii, arr[None, :, :]], axis=0)
        diff = configs[:, :, None, :] - configs[:, None, :, :]
        phi = kern.phi_of_r2((diff * diff).sum(axis=-1))
        lam_vec = v * n / phi.sum(axis=2)
        prod = lam_vec[:, :, None] * phi
        mask = ~np.eye(n, dtype=bool)
        best = float(prod[:, mask].min())
        return MBounds(m_lower=best, m_upper=m_upper, sampled=True)
    raise ConfigurationError(f"no bound rule for lambda form {spec.lam.form!r}")


def rate_second_order(
    n_agents: int,
    T: float,
    mu: float,
    d_star: int,
    kernel: RadialKernel,
    d_x0: float,
    d_v0: float,
    n: int,
) -> float:
    """Block contraction factor C(n tau) for the velocity diameters.

    tau = d* T / phi(0); the kernel is frozen at the worst spread the
    positions can reach by the end of block n + 1.
    """
    if n < 0:
        raise DomainError("block index must be >= 0")
    if not (1 <= d_star <= n_agents - 1):
        raise DomainError(f"d_star must lie in 1..{n_agents - 1}")
    if T <= 0 or mu <= 0:
        raise DomainError("T and mu must be positive")
    phi0 = kernel.phi0()
    tau = d_star * T / phi0
    reach = d_x0 + (n + 1) * tau * d_v0
    phi_r = float(kernel.phi(reach))
    eta_n = phi_r * mu * T / (n_agents + phi_r * mu * T)
    ln_term = math.log(0.5) + d_star * math.log(eta_n) \
        - 2.0 * (n_agents - 1) / n_agents * d_star * T * phi0
    return 1.0 - (math.exp(ln_term) if ln_term > -745.0 else 0.0)


def second_order_tau(T: float, d_star: int, kernel: RadialKernel) -> float:
    return d_star * T / kernel.phi0()


def contraction_sequence(
    n_agents: int, T: float, mu: float, d_star: int,
    kernel: RadialKernel, d_x0: float, d_v0: float, n_blocks: int,
) -> np.ndarray:
    """C(0), C(tau), ..., C((n_blocks-1) tau)."""
    return np.array([
        rate_second_order(n_agents, T, mu, d_star, kernel, d_x0, d_v0, n)
        for n in range(n_blocks)
    ])


def position_bound(
    n_agents: int, T: float, mu: float, d_star: int,
    kernel: RadialKernel, d_x0: float, d_v0: float, n_blocks: int,
) -> float:
    """Upper bound on D_X after n_blocks blocks via the cumulative products."""
    seq = contraction_sequence(n_agents, T, mu, d_star, kernel, d_x0, d_v0, n_blocks)
    tau = second_order_tau(T, d_star, kernel)
    total = 1.0
    running = 1.0
    for c in seq[1:]:
        running *= c
        total += running
    return d_x0 + tau * d_v0 * total


@dataclass(frozen=True)
class FlockingVerdict:
    """Certificate-level long-time classification for second-order systems."""

    alignment_guaranteed: bool
    flocking_guaranteed: bool
    boundary_case: bool
    criterion_value: float | None        # 2 * beta * d_star for power laws
    raabe_log10: float | None = None     # evidence only, never the verdict
    raabe_trend: str | None = None
    d_star: int | None = None
    notes: str = ""

    def __post_init__(self):
        if self.flocking_guaranteed and not self.alignment_guaranteed:
            raise DomainError("flocking implies alignment")

    def to_json_dict(self) -> dict:
        return {
            "alignment_guaranteed": self.alignment_guaranteed,
            "flocking_guaranteed": self.flocking_guaranteed,
            "boundary_case": self.boundary_case,
            "criterion_value": self.criterion_value,
            "raabe_log10": self.raabe_log10,
            "raabe_trend": self.raabe_trend,
            "d_star": self.d_star,
            "notes": self.notes,
        }


def _raabe_evidence(
    n_agents: int, T: float, mu: float, d_star: int,
    kernel: RadialKernel, d_v0: float,
) -> tuple[float, str]:
    """Sampled log10 of n * (phi(n tau D_V0) mu T / N)^d* * exp(-2 (N-1)/N d* T phi(0))."""
    tau = second_order_tau(T, d_star, kernel)
    const = -2.0 * (n_agents - 1) / n_agents * d_star * T * kernel.phi0()
    values = []
    for n in (10 ** 4, 10 ** 6, 10 ** 8):
        phi_n = float(kernel.phi(n * tau * d_v0))
        log10 = (math.log(n) + d_star * math.log(phi_n * mu * T / n_agents) + const) / math.log(10)
        values.append(log10)
    if values[-1] > values[0] + 1e-9:
        trend = "increasing"
    elif values[-1] < values[0] - 1e-9:
        trend = "decreasing"
    else:
        trend = "flat"
    return values[-1], trend


def classify_flocking(
    kernel: RadialKernel,
    d_star: int,
    n_agents: int,
    T: float,
    mu: float,
    declared_facts: dict | None = None,
    d_v0: float = 1.0,
) -> FlockingVerdict:
    """Alignment / flocking verdict from the kernel tail and the graph length.

    Power laws are closed-form: alignment is guaranteed iff 2 beta d* <= 1
    and flocking iff 2 beta d* < 1 (the equality case guarantees alignment
    only). Other kernels consume declared integrability facts. The
    Raabe-style limit is evaluated numerically and attached as evidence.
    """
    if d_star < 1:
        raise DomainError("d_star must be >= 1")
    raabe_log10, trend = _raabe_evidence(n_agents, T, mu, d_star, kernel, d_v0)
    if declared_facts is not None:
        nonintegrable = bool(declared_facts.get("phi_power_nonintegrable", False))
        trigger = bool(declared_facts.get("flocking_trigger", False))
        return FlockingVerdict(
            alignment_guaranteed=nonintegrable,
            flocking_guaranteed=nonintegrable and trigger,
            boundary_case=bool(declared_facts.get("boundary_case", False)),
            criterion_value=None,
            raabe_log10=raabe_log10,
            raabe_trend=trend,
            d_star=d_star,
            notes="declared integrability facts",
        )
    if kernel.form == "power_law" and kernel.beta > 0.0:
        crit = 2.0 * kernel.beta * d_star
        alignment = crit <= 1.0
        flocking = crit < 1.0
        boundary = crit == 1.0
        return FlockingVerdict(
            alignment_guaranteed=alignment,
            flocking_guaranteed=flocking,
            boundary_case=boundary,
            criterion_value=crit,
            raabe_log10=raabe_log10,
            raabe_trend=trend,
            d_star=d_star,
            notes="power-law closed form",
        )
    if kernel.form == "constant" or kernel.beta == 0.0:
        return FlockingVerdict(
            alignment_guaranteed=True,
            flocking_guaranteed=True,
            boundary_case=False,
            criterion_value=0.0,
            raabe_log10=raabe_log10,
            raabe_trend=trend,
            d_star=d_star,
            notes="constant kernel: tail bounded below",
        )
    raise ConfigurationError(
        "unknown kernel tail: declare phi_power_nonintegrable / flocking_trigger"
    )


def bounds_for_system(spec: SystemSpec, x0) -> MBounds:
    """Convenience passthrough used by the CLI certify path."""
    if spec.family == FAMILY_LINEAR:
        return MBounds(1.0, 1.0, sampled=False)
    return bounds_m(spec, x0)
