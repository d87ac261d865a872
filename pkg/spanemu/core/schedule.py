#!/usr/bin/env python3

"""Per-phase parameters and stretch budgets for the three constructions."""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

from ..errors import InfeasibleScheduleError, InvalidConfigError, InvariantError

CENTRALIZED = "centralized"
DISTRIBUTED = "distributed"
SPANNER = "spanner"
SCHEDULE_KINDS = (CENTRALIZED, DISTRIBUTED, SPANNER)

Number = Union[int, float, str, Fraction]
Exponent = Union[Fraction, float]


def as_fraction(value: Number, name: str = "value") -> Fraction:
    """Convert user input to an exact rational; floats go through their decimal repr"""
    if isinstance(value, bool):
        raise InvalidConfigError(f"{name} must be a number, got {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            raise InvalidConfigError(f"{name} must be finite, got {value!r}")
        return Fraction(repr(value))
    try:
        return Fraction(value)
    except (TypeError, ValueError, ZeroDivisionError):
        raise InvalidConfigError(f"{name} must be a number, got {value!r}")


@dataclass(frozen=True)
class Power:
    """The real number base ** exponent

    Comparisons against integer counts are exact whenever the exponent is
    rational: count >= n^(p/q) iff count^q * n^(-p) >= 1.
    """

    base: int
    exponent: Exponent

    @property
    def exact(self) -> bool:
        return isinstance(self.exponent, Fraction)

    @property
    def value(self) -> float:
        return float(self.base) ** float(self.exponent)

    def _compare(self, count: int) -> int:
        """Sign of count - base ** exponent"""
        if self.exact:
            p, q = self.exponent.numerator, self.exponent.denominator
            if self.base == 0:
                target = 0 if p > 0 else 1
                return (count > target) - (count < target)
            lhs = count ** q * self.base ** max(0, -p)
            rhs = self.base ** max(0, p)
            return (lhs > rhs) - (lhs < rhs)
        value = self.value
        return (count > value) - (count < value)

    def reached_by(self, count: int) -> bool:
        """count >= base ** exponent"""
        return self._compare(count) >= 0

    def bounds(self, count: int) -> bool:
        """count <= base ** exponent"""
        return self._compare(count) <= 0

    def ceil(self) -> int:
        """Smallest integer D with D >= base ** exponent"""
        if not self.exact:
            return math.ceil(self.value)
        d = max(0, math.ceil(self.value))
        while d > 0 and self._compare(d - 1) >= 0:
            d -= 1
        while self._compare(d) < 0:
            d += 1
        return d

    def at_most(self, other: "Power") -> bool:
        """self <= other for powers of the same base"""
        if self.base != other.base:
            raise InvariantError("comparing powers of different bases")
        if self.base <= 1:
            return True
        return self.exponent <= other.exponent

    def squared(self) -> "Power":
        return Power(self.base, self.exponent * 2)

    def __float__(self) -> float:
        return self.value

    def __str__(self) -> str:
        return f"{self.base}^({self.exponent})"


@dataclass(frozen=True)
class Config:
    """User-facing parameters; eps_user and rho are kept as exact rationals"""

    n: int
    eps_user: Fraction
    kappa: int
    rho: Optional[Fraction] = None
    delta_cap: Optional[int] = None
    allow_infeasible: bool = False

    def __post_init__(self):
        object.__setattr__(self, "eps_user", as_fraction(self.eps_user, "eps"))
        if self.rho is not None:
            object.__setattr__(self, "rho", as_fraction(self.rho, "rho"))
        if not isinstance(self.n, int) or self.n < 1:
            raise InvalidConfigError(f"n must be a positive integer, got {self.n!r}")
        if not 0 < self.eps_user < 1:
            raise InvalidConfigError(f"eps must lie in (0, 1), got {self.eps_user}")
        if isinstance(self.kappa, bool) or not isinstance(self.kappa, int) or self.kappa < 2:
            raise InvalidConfigError(f"kappa must be an integer >= 2, got {self.kappa!r}")
        if self.rho is not None and not Fraction(1, self.kappa) < self.rho < Fraction(1, 2):
            raise InvalidConfigError(
                f"rho must lie in (1/kappa, 1/2) = ({1 / self.kappa:.4g}, 0.5), got {float(self.rho):.4g}"
            )
        if self.delta_cap is not None and self.delta_cap < 1:
            raise InvalidConfigError(f"delta_cap must be positive, got {self.delta_cap}")

    def require_rho(self) -> Fraction:
        if self.rho is None:
            raise InvalidConfigError("rho is required for the distributed and spanner constructions")
        return self.rho


@dataclass(frozen=True)
class Schedule:
    """All per-phase parameters of one construction"""

    kind: str
    n: int
    kappa: int
    eps_user: Fraction
    eps_internal: Fraction
    ell: int
    deg: Tuple[Power, ...]
    delta: Tuple[int, ...]
    radius: Tuple[int, ...]
    sep: Tuple[int, ...] = ()
    rul: Tuple[int, ...] = ()
    rho: Optional[Fraction] = None
    i0: Optional[int] = None
    gamma: Optional[Union[int, float]] = None
    feasible: bool = True
    infeasibility: str = ""

    def phases(self) -> range:
        return range(self.ell + 1)

    def degree_ceil(self, i: int) -> int:
        """D_i, the integer degree used for round budgets and hub thresholds"""
        return self.deg[i].ceil()

    def forest_depth(self, i: int) -> int:
        return self.rul[i] + self.delta[i]

    @property
    def ruling_stages(self) -> int:
        """Number of ID digits processed by the ruling-set computation"""
        return math.floor(1 / self.rho)

    def report_lines(self) -> List[str]:
        """One human-readable line per phase"""
        lines = []
        for i in self.phases():
            line = (
                f"phase {i}: deg={self.deg[i]} (~{self.deg[i].value:.4g}, D={self.degree_ceil(i)}) "
                f"delta={self.delta[i]} R={self.radius[i]}"
            )
            if self.sep:
                line += f" sep={self.sep[i]} rul={self.rul[i]}"
            lines.append(line)
        return lines

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "n": self.n,
            "kappa": self.kappa,
            "eps_user": str(self.eps_user),
            "rho": None if self.rho is None else str(self.rho),
            "eps_internal": str(self.eps_internal),
            "ell": self.ell,
            "i0": self.i0,
            "gamma": self.gamma,
            "feasible": self.feasible,
            "infeasibility": self.infeasibility,
            "phases": [
                {
                    "i": i,
                    "deg_exponent": str(self.deg[i].exponent),
                    "deg": self.deg[i].value,
                    "deg_ceil": self.degree_ceil(i),
                    "delta": self.delta[i],
                    "radius": self.radius[i],
                    "sep": self.sep[i] if self.sep else None,
                    "rul": self.rul[i] if self.rul else None,
                }
                for i in self.phases()
            ],
        }


@dataclass(frozen=True)
class StretchBudget:
    """Recursive stretch bounds: d_H <= alpha * d_G + beta"""

    alpha: Tuple[Fraction, ...]
    beta: Tuple[int, ...]

    @property
    def alpha_final(self) -> Fraction:
        return self.alpha[-1]

    @property
    def beta_final(self) -> int:
        return self.beta[-1]

    def allows(self, d_g: int, d_h: int) -> bool:
        return d_h <= self.alpha_final * d_g + self.beta_final

    def to_dict(self) -> Dict[str, Any]:
        return {
            "alpha": [float(a) for a in self.alpha],
            "beta": list(self.beta),
            "alpha_final": float(self.alpha_final),
            "beta_final": self.beta_final,
        }


def _thresholds(
    eps: Fraction, ell: int, growth: Callable[[int, int], int]
) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """delta_i = ceil(eps^-i) + 2 R_i, R_0 = 0, R_{i+1} = R_i + growth(i, delta_i)"""
    deltas: List[int] = []
    radii = [0]
    for i in range(ell + 1):
        delta = math.ceil((1 / eps) ** i) + 2 * radii[i]
        deltas.append(delta)
        if i < ell:
            radii.append(radii[i] + growth(i, delta))
    return tuple(deltas), tuple(radii)


def _check_delta_cap(cfg: Config, deltas: Tuple[int, ...]) -> None:
    if cfg.delta_cap is not None and deltas[-1] > cfg.delta_cap:
        raise InfeasibleScheduleError(
            f"delta_ell = {deltas[-1]} exceeds the configured cap {cfg.delta_cap}"
        )


def centralized_schedule(cfg: Config) -> Schedule:
    """Parameters of the sequential superclustering-and-interconnection build"""
    ell = cfg.kappa.bit_length() - 1
    eps = cfg.eps_user / (34 * ell) if ell >= 1 else cfg.eps_user
    deg = tuple(Power(cfg.n, Fraction(2 ** i, cfg.kappa)) for i in range(ell + 1))
    deltas, radii = _thresholds(eps, ell, lambda i, delta: 2 * delta)
    _check_delta_cap(cfg, deltas)
    schedule = Schedule(
        kind=CENTRALIZED,
        n=cfg.n,
        kappa=cfg.kappa,
        eps_user=cfg.eps_user,
        eps_internal=eps,
        ell=ell,
        deg=deg,
        delta=deltas,
        radius=radii,
    )
    check_schedule(schedule)
    return schedule


def _ruling_thresholds(
    eps: Fraction, ell: int, rho: Fraction
) -> Tuple[Tuple[int, ...], Tuple[int, ...], Tuple[int, ...], Tuple[int, ...]]:
    def ruling_radius(delta: int) -> int:
        return math.ceil(2 * delta / rho)

    deltas, radii = _thresholds(eps, ell, lambda i, delta: 2 * (ruling_radius(delta) + delta))
    seps = tuple(2 * d + 1 for d in deltas)
    ruls = tuple(ruling_radius(d) for d in deltas)
    return deltas, radii, seps, ruls


def distributed_schedule(cfg: Config) -> Schedule:
    """Two-stage (exponential, then fixed n^rho) degree schedule of the CONGEST build"""
    rho = cfg.require_rho()
    kappa_rho = cfg.kappa * rho
    i0 = math.floor(kappa_rho).bit_length() - 1
    ell = i0 + math.ceil(Fraction(cfg.kappa + 1) / kappa_rho) - 1
    eps = cfg.eps_user * rho / (90 * ell)
    if 25 * eps > rho:
        raise InvariantError(f"internal eps {eps} violates rho >= 25 eps")
    deg = tuple(
        Power(cfg.n, Fraction(2 ** i, cfg.kappa)) if i <= i0 else Power(cfg.n, rho)
        for i in range(ell + 1)
    )
    deltas, radii, seps, ruls = _ruling_thresholds(eps, ell, rho)
    _check_delta_cap(cfg, deltas)
    schedule = Schedule(
        kind=DISTRIBUTED,
        n=cfg.n,
        kappa=cfg.kappa,
        eps_user=cfg.eps_user,
        eps_internal=eps,
        ell=ell,
        deg=deg,
        delta=deltas,
        radius=radii,
        sep=seps,
        rul=ruls,
        rho=rho,
        i0=i0,
    )
    check_schedule(schedule)
    return schedule


def spanner_gamma(kappa: int) -> Union[int, float]:
    """max{2, log log kappa}; exactly 2 up to kappa = 16"""
    if kappa <= 16:
        return 2
    return max(2.0, math.log2(math.log2(kappa)))


def spanner_schedule(cfg: Config, strict: Optional[bool] = None) -> Schedule:
    """
    Three-stage degree schedule of the spanner build

    Args:
        cfg: configuration with rho set
        strict: raise on a violated feasibility inequality; defaults to
            not cfg.allow_infeasible. A non-strict schedule is marked
            infeasible instead and the size guarantee no longer applies.
    """
    rho = cfg.require_rho()
    kappa = cfg.kappa
    gamma = spanner_gamma(kappa)
    if isinstance(gamma, int):
        gkr = gamma * kappa * rho
        first = math.floor(gkr).bit_length() - 1
    else:
        first = math.floor(math.log2(gamma * kappa * float(rho)))
    i0 = min(first, math.floor(kappa * rho))
    ell = i0 + math.ceil(1 / rho - Fraction(1, 2))

    def exponent(i: int) -> Exponent:
        if i <= i0:
            if isinstance(gamma, int):
                return Fraction(2 ** i - 1, gamma * kappa) + Fraction(1, kappa)
            return (2 ** i - 1) / (gamma * kappa) + 1 / kappa
        if i == i0 + 1:
            return rho / 2
        return rho

    deg = tuple(Power(cfg.n, exponent(i)) for i in range(ell + 1))
    eps = cfg.eps_user * rho / (90 * ell)
    deltas, radii, seps, ruls = _ruling_thresholds(eps, ell, rho)
    _check_delta_cap(cfg, deltas)

    # 90 ell' / (rho eps) <= n^(1/(2 kappa)) / 2  iff  (180 ell' / (rho eps))^(2 kappa) <= n
    lhs = 90 * ell / (rho * eps)
    feasible = (2 * lhs) ** (2 * kappa) <= cfg.n
    infeasibility = ""
    if not feasible:
        infeasibility = (
            f"90*ell'/(rho*eps) = {float(lhs):.6g} exceeds n^(1/(2*kappa))/2 = "
            f"{cfg.n ** (1 / (2 * kappa)) / 2:.6g} (n={cfg.n}, kappa={kappa}, rho={float(rho):.4g}, "
            f"eps={float(cfg.eps_user):.4g})"
        )
        if strict is None:
            strict = not cfg.allow_infeasible
        if strict:
            raise InfeasibleScheduleError(f"infeasible spanner schedule: {infeasibility}")

    schedule = Schedule(
        kind=SPANNER,
        n=cfg.n,
        kappa=kappa,
        eps_user=cfg.eps_user,
        eps_internal=eps,
        ell=ell,
        deg=deg,
        delta=deltas,
        radius=radii,
        sep=seps,
        rul=ruls,
        rho=rho,
        i0=i0,
        gamma=gamma,
        feasible=feasible,
        infeasibility=infeasibility,
    )
    check_schedule(schedule)
    return schedule


def make_schedule(kind: str, cfg: Config) -> Schedule:
    if kind == CENTRALIZED:
        return centralized_schedule(cfg)
    if kind == DISTRIBUTED:
        return distributed_schedule(cfg)
    if kind == SPANNER:
        return spanner_schedule(cfg)
    raise InvalidConfigError(f"unknown construction: {kind}")


def check_schedule(s: Schedule) -> None:
    """Raise InvariantError if a schedule breaks a property the analysis relies on"""
    count = s.ell + 1
    if not (len(s.deg) == len(s.delta) == len(s.radius) == count):
        raise InvariantError("schedule sequences have inconsistent lengths")
    if s.delta[0] < 1 or any(a >= b for a, b in zip(s.delta, s.delta[1:])):
        raise InvariantError(f"delta must be positive and strictly increasing: {s.delta}")
    if s.radius[0] != 0 or any(a >= b for a, b in zip(s.radius[1:], s.radius[2:])):
        raise InvariantError(f"R must start at 0 and increase strictly: {s.radius}")
    if s.kind == SPANNER:
        return
    for prev, nxt in zip(s.deg, s.deg[1:]):
        if not prev.at_most(nxt):
            raise InvariantError(f"degree thresholds decrease: {prev} > {nxt}")
        if not nxt.at_most(prev.squared()):
            raise InvariantError(f"deg_(i+1) = {nxt} exceeds deg_i^2 = {prev.squared()}")
    if s.kind == CENTRALIZED:
        remaining = Power(s.n, 1 - Fraction(2 ** s.ell - 1, s.kappa))
        if not remaining.at_most(s.deg[s.ell]):
            raise InvariantError("the last phase's cluster bound exceeds deg_ell")
    if s.kind == DISTRIBUTED:
        cap = Power(s.n, s.rho)
        if not all(d.at_most(cap) for d in s.deg):
            raise InvariantError("a degree threshold exceeds n^rho")


def stretch_budget(s: Schedule) -> StretchBudget:
    """alpha_0 = 1, beta_0 = 0, beta_i = 2 beta_(i-1) + 6 R_i, alpha_i = alpha_(i-1) + eps^i/(1-eps^i) beta_i"""
    alpha = [Fraction(1)]
    beta = [0]
    eps = s.eps_internal
    for i in range(1, s.ell + 1):
        b = 2 * beta[-1] + 6 * s.radius[i]
        e = eps ** i
        alpha.append(alpha[-1] + e / (1 - e) * b)
        beta.append(b)
    return StretchBudget(tuple(alpha), tuple(beta))


def ultra_sparse_kappa(n: int) -> int:
    """kappa = ceil(log n * log log n), the n + o(n) regime"""
    if n < 4:
        raise InvalidConfigError("the ultra-sparse regime needs n >= 4")
    return max(2, math.ceil(math.log2(n) * math.log2(math.log2(n))))


def schedule_from_dict(data: Dict[str, Any], delta_cap: Optional[int] = None) -> Schedule:
    """Recompute a schedule from its serialized configuration and check it matches"""
    try:
        cfg = Config(
            n=int(data["n"]),
            eps_user=Fraction(data["eps_user"]),
            kappa=int(data["kappa"]),
            rho=None if data.get("rho") is None else Fraction(data["rho"]),
            delta_cap=delta_cap,
            allow_infeasible=not data.get("feasible", True),
        )
        kind = data["kind"]
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidConfigError(f"malformed schedule document: {e}")
    schedule = make_schedule(kind, cfg)
    stored = [(p["delta"], p["radius"]) for p in data.get("phases", [])]
    if stored and stored != list(zip(schedule.delta, schedule.radius)):
        raise InvalidConfigError("schedule document does not match its own configuration")
    return schedule
