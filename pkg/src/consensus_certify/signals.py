"""Piecewise-constant connection-weight signals with exact integration.

A Signal models one connection weight as a function of time: a finite list
of constant pieces over half-open intervals [t0, t1), a default value
outside them, and an optional period that replicates the piece layout
analytically. Breakpoints and values are stored as exact rationals
(floats convert losslessly, being dyadic), so integrals, windowed
averages, and threshold comparisons are bit-reproducible: a window
average that equals the connectivity threshold exactly is never lost to
rounding. A Schedule is the N x N matrix of such signals, indexed by
(listener, listened) agent pairs; entry (i, j) multiplies (x_j - x_i) in
agent i's equation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import DomainError
from .serialize import sha256_digest

RationalLike = int | float | str | Fraction


def as_fraction(x: RationalLike) -> Fraction:
    """Exact conversion; floats are dyadic rationals and convert losslessly."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str)):
        return Fraction(x)
    if isinstance(x, float):
        if x != x or x in (float("inf"), float("-inf")):
            raise DomainError(f"non-finite value {x!r}")
        return Fraction(x)
    raise DomainError(f"cannot interpret {x!r} as a rational number")


@dataclass(frozen=True)
class Signal:
    """One weight function t -> [0, 1] (or [0, max_value] for derived signals)."""

    pieces: tuple[tuple[Fraction, Fraction, Fraction], ...]
    default: Fraction = Fraction(0)
    period: Fraction | None = None
    max_value: Fraction = Fraction(1)

    def __post_init__(self):
        prev_end = None
        for t0, t1, v in self.pieces:
            if not t0 < t1:
                raise DomainError(f"piece [{t0}, {t1}) is empty or reversed")
            if t0 < 0:
                raise DomainError(f"piece start {t0} is negative")
            if prev_end is not None and t0 < prev_end:
                raise DomainError("pieces overlap or are unsorted")
            if not (0 <= v <= self.max_value):
                raise DomainError(f"piece value {v} outside [0, {self.max_value}]")
            prev_end = t1
        if not (0 <= self.default <= self.max_value):
            raise DomainError(f"default value {self.default} outside [0, {self.max_value}]")
        if self.period is not None:
            if self.period <= 0:
                raise DomainError("period must be positive")
            if self.pieces and self.pieces[-1][1] > self.period:
                raise DomainError("pieces must lie within [0, period)")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def from_pieces(
        pieces: Iterable[tuple[RationalLike, RationalLike, RationalLike]],
        default: RationalLike = 0,
        period: RationalLike | None = None,
        max_value: RationalLike = 1,
    ) -> "Signal":
        converted = sorted(
            (as_fraction(t0), as_fraction(t1), as_fraction(v)) for t0, t1, v in pieces
        )
        return Signal(
            pieces=tuple(converted),
            default=as_fraction(default),
            period=None if period is None else as_fraction(period),
            max_value=as_fraction(max_value),
        )

    @staticmethod
    def zero() -> "Signal":
        return Signal(pieces=())

    @staticmethod
    def constant(value: RationalLike) -> "Signal":
        return Signal(pieces=(), default=as_fraction(value))

    # -- evaluation --------------------------------------------------------

    def value_at_exact(self, t: Fraction) -> Fraction:
        if t < 0:
            raise DomainError("signals are defined on t >= 0")
        if self.period is not None:
            t = t - (t // self.period) * self.period
        for t0, t1, v in self.pieces:
            if t0 <= t < t1:
                return v
            if t < t0:
                break
        return self.default

    def value_at(self, t: RationalLike) -> float:
        return float(self.value_at_exact(as_fraction(t)))

    def _integral_one_period(self) -> Fraction:
        assert self.period is not None
        covered = Fraction(0)
        total = Fraction(0)
        for t0, t1, v in self.pieces:
            total += v * (t1 - t0)
            covered += t1 - t0
        return total + self.default * (self.period - covered)

    def _integral_from_zero(self, t: Fraction) -> Fraction:
        """Exact integral of the signal over [0, t]."""
        if t <= 0:
            return Fraction(0)
        if self.period is None:
            total = Fraction(0)
            covered = Fraction(0)
            for t0, t1, v in self.pieces:
                lo, hi = t0, min(t1, t)
                if hi > lo:
                    total += v * (hi - lo)
                    covered += hi - lo
            return total + self.default * (t - covered)
        k = t // self.period
        rem = t - k * self.period
        total = k * self._integral_one_period()
        covered = Fraction(0)
        for t0, t1, v in self.pieces:
            lo, hi = t0, min(t1, rem)
            if hi > lo:
                total += v * (hi - lo)
                covered += hi - lo
        return total + self.default * (rem - covered)

    def integrate_exact(self, a: RationalLike, b: RationalLike) -> Fraction:
        fa, fb = as_fraction(a), as_fraction(b)
        if fa < 0:
            raise DomainError("integration bound a must be >= 0")
        if fa > fb:
            raise DomainError("integration requires a <= b")
        return self._integral_from_zero(fb) - self._integral_from_zero(fa)

    def integrate(self, a: RationalLike, b: RationalLike) -> float:
        """Integral over [a, b], exact up to the final float conversion."""
        return float(self.integrate_exact(a, b))

    def window_average_exact(self, t: RationalLike, T: RationalLike) -> Fraction:
        ft, fT = as_fraction(t), as_fraction(T)
        if fT <= 0:
            raise DomainError("window length T must be positive")
        if ft < 0:
            raise DomainError("window start t must be >= 0")
        return self.integrate_exact(ft, ft + fT) / fT

    def window_average(self, t: RationalLike, T: RationalLike) -> float:
        return float(self.window_average_exact(t, T))

    # -- transforms --------------------------------------------------------

    def scale_values(self, c: RationalLike) -> "Signal":
        """Multiply every piece value (and the default) by c >= 0."""
        fc = as_fraction(c)
        if fc < 0:
            raise DomainError("scale factor must be nonnegative")
        values = [v * fc for _, _, v in self.pieces] + [self.default * fc]
        cap = max([Fraction(1)] + values)
        return Signal(
            pieces=tuple((t0, t1, v * fc) for t0, t1, v in self.pieces),
            default=self.default * fc,
            period=self.period,
            max_value=cap,
        )

    def stretch_time(self, factor: Fraction) -> "Signal":
        if factor <= 0:
            raise DomainError("time stretch factor must be positive")
        return Signal(
            pieces=tuple((t0 * factor, t1 * factor, v) for t0, t1, v in self.pieces),
            default=self.default,
            period=None if self.period is None else self.period * factor,
            max_value=self.max_value,
        )

    def breakpoints_exact(self, a: Fraction, b: Fraction) -> list[Fraction]:
        """All piece boundaries (and period seams) inside [a, b]."""
        if not self.pieces:
            return []
        out: set[Fraction] = set()
        if self.period is None:
            for t0, t1, _ in self.pieces:
                for t in (t0, t1):
                    if a <= t <= b:
                        out.add(t)
            return sorted(out)
        k0 = a // self.period
        k1 = b // self.period
        k = k0
        while k <= k1:
            base = k * self.period
            if a <= base <= b:
                out.add(base)
            for t0, t1, _ in self.pieces:
                for t in (base + t0, base + t1):
                    if a <= t <= b:
                        out.add(t)
            k += 1
        return sorted(out)

    def max_piece_value(self) -> Fraction:
        return max([self.default] + [v for _, _, v in self.pieces], default=self.default)


@dataclass(frozen=True)
class Schedule:
    """N x N matrix of connection signals; missing entries are the zero signal."""

    n_agents: int
    entries: Mapping[tuple[int, int], Signal] = field(default_factory=dict)

    def __post_init__(self):
        if self.n_agents < 2:
            raise DomainError("a schedule needs at least two agents")
        for (i, j) in self.entries:
            if i == j:
                raise DomainError(f"diagonal entry ({i},{j}) is not allowed")
            if not (1 <= i <= self.n_agents and 1 <= j <= self.n_agents):
                raise DomainError(f"entry ({i},{j}) outside 1..{self.n_agents}")

    def entry(self, i: int, j: int) -> Signal:
        return self.entries.get((i, j), _ZERO)

    def pairs(self):
        """All ordered (i, j) pairs with i != j, stored or not."""
        for i in range(1, self.n_agents + 1):
            for j in range(1, self.n_agents + 1):
                if i != j:
                    yield (i, j)

    def transpose(self) -> "Schedule":
        return Schedule(self.n_agents, {(j, i): s for (i, j), s in self.entries.items()})

    def common_period(self) -> Fraction | None:
        """The shared period if every stored signal is periodic with one period."""
        periods = {s.period for s in self.entries.values() if s.pieces or s.default != 0}
        if len(periods) == 1:
            return next(iter(periods))
        return None

    def breakpoints_exact(self, a: RationalLike, b: RationalLike) -> list[Fraction]:
        fa, fb = as_fraction(a), as_fraction(b)
        out: set[Fraction] = set()
        for sig in self.entries.values():
            out.update(sig.breakpoints_exact(fa, fb))
        return sorted(out)

    def breakpoints(self, a: RationalLike, b: RationalLike) -> list[float]:
        return [float(t) for t in self.breakpoints_exact(a, b)]

    def max_value(self) -> Fraction:
        return max((s.max_piece_value() for s in self.entries.values()), default=Fraction(0))

    # -- JSON wire format ---------------------------------------------------

    def to_json_dict(self) -> dict:
        entries = []
        for (i, j) in sorted(self.entries):
            sig = self.entries[(i, j)]
            entries.append(
                {
                    "i": i,
                    "j": j,
                    "default": float(sig.default),
                    "period": None if sig.period is None else float(sig.period),
                    "pieces": [[float(t0), float(t1), float(v)] for t0, t1, v in sig.pieces],
                }
            )
        return {"n_agents": self.n_agents, "entries": entries}

    @staticmethod
    def from_json_dict(data: dict) -> "Schedule":
        try:
            n = int(data["n_agents"])
            entries = {}
            for ent in data.get("entries", []):
                sig = Signal.from_pieces(
                    [(p[0], p[1], p[2]) for p in ent.get("pieces", [])],
                    default=ent.get("default", 0),
                    period=ent.get("period"),
                )
                entries[(int(ent["i"]), int(ent["j"]))] = sig
        except (KeyError, IndexError, TypeError) as exc:
            raise DomainError(f"malformed schedule JSON: {exc}") from exc
        return Schedule(n, entries)

    def digest(self) -> str:
        return sha256_digest(self.to_json_dict())


_ZERO = Signal.zero()


def integrate(sig: Signal, a: RationalLike, b: RationalLike) -> float:
    """Exact integral of sig over [a, b] as a sum of piece overlaps."""
    return sig.integrate(a, b)


def window_average(sig: Signal, t: RationalLike, T: RationalLike) -> float:
    """(1/T) * integral of sig over [t, t+T]; always lies in [0, 1]."""
    return sig.window_average(t, T)


def scale_values(sig: Signal, c: RationalLike) -> Signal:
    return sig.scale_values(c)


def rescale_time(sched: Schedule, m_bar: RationalLike) -> Schedule:
    """Build the slowed-down, value-shrunk schedule t -> M(t / m_bar) / m_bar.

    Window averages transform exactly: the new average over (t, T) equals
    1/m_bar times the old average over (t/m_bar, T/m_bar). Every original
    value divided by m_bar must stay in [0, 1].
    """
    fm = as_fraction(m_bar)
    if fm <= 0:
        raise DomainError("m_bar must be positive")
    out = {}
    for key, sig in sched.entries.items():
        if sig.max_piece_value() / fm > 1:
            raise DomainError(
                f"entry {key}: value {float(sig.max_piece_value())} / m_bar out of [0, 1]"
            )
        scaled = sig.scale_values(Fraction(1) / fm).stretch_time(fm)
        out[key] = Signal(
            pieces=scaled.pieces,
            default=scaled.default,
            period=scaled.period,
            max_value=Fraction(1),
        )
    return Schedule(sched.n_agents, out)
