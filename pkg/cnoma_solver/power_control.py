"""
Closed-form feasibility tests and optimal power control for a single pair.

Every QoS constraint is a bound on the power split alpha as a function of the relay
power p_d:

* ``A(p)``: the strong user must decode the weak user's message (lower bound),
* ``B(p)``: the weak user must reach its rate with relay help (lower bound),
* ``C(p)``: the strong user must reach its own rate (upper bound).

A pair is feasible iff ``max(A, B) <= C`` for some ``0 <= p <= p_d_max``. The HD
bounds use the two-slot threshold ``delta_h``, the FD bounds the single-slot
``delta_f`` and carry the relay self-interference in ``A`` and ``C``.
"""

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from cnoma_solver.exceptions import DegenerateChannelError, DomainError, InfeasiblePairError
from cnoma_solver.models.channels import PairChannels, PowerDecision, RatePair
from cnoma_solver.models.config import Mode, QosSpec, SystemConfig
from cnoma_solver.models.solutions import FdFeasParams, FeasibilityReport, PairSolution
from cnoma_solver.rates import fd_rates, hd_rates, noma_rates


logger = logging.getLogger(__name__)

QOS_TOLERANCE = 1e-9
GEOMETRY_TOLERANCE = 1e-9
_IMPROVEMENT = 1e-12

Interval = Tuple[float, float]


def _strong_snr(ch: PairChannels, p_bs: float, delta: float) -> float:
    if p_bs <= 0.0:
        raise DomainError(f"p_bs must be positive, got {p_bs}")
    snr = p_bs * ch.gamma_m
    if snr == 0.0 and delta > 0.0:
        raise DomainError("gamma_m = 0: the strong user can never meet a positive rate threshold")
    return snr


def _relay_bound(ch: PairChannels, p_bs: float, delta: float, p_d: float) -> float:
    """Smallest alpha that lets the weak user reach SINR ``delta`` with relay power ``p_d``."""
    x = p_d * ch.gamma_d
    weak = p_bs * ch.gamma_n
    if weak == 0.0:
        # a virtual weak user is served by the relay alone
        return 0.0 if x >= delta * (1.0 - 1e-12) else math.inf
    if x >= delta:
        return 0.0
    return (weak + 1.0) * (delta - x) / (weak * (delta + 1.0 - x))


def _quadratic_roots(a: float, b: float, c: float) -> List[float]:
    """Real roots of a p^2 + b p + c, ascending, computed without cancellation."""
    if a == 0.0:
        return [] if b == 0.0 else [-c / b]
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return []
    q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
    if q == 0.0:
        return [0.0]
    return sorted((q / a, c / q))


def _real_roots(coefficients: Sequence[float]) -> List[float]:
    """Real roots of a polynomial given highest degree first."""
    roots = np.roots(np.asarray(coefficients, dtype=float))
    real = roots[np.abs(roots.imag) <= 1e-9 * np.maximum(1.0, np.abs(roots.real))].real
    return sorted(float(r) for r in real)


def _relative_gap(x: float, y: float) -> float:
    return abs(x - y) / max(1.0, abs(x), abs(y))


# HD bounds


def hd_bound_a(ch: PairChannels, p_bs: float, qos: QosSpec) -> float:
    """Lower alpha bound from SIC decoding of the weak message at the strong user."""
    d = qos.delta_h
    m = _strong_snr(ch, p_bs, d)
    if d == 0.0:
        return 0.0
    return d * (m + 1.0) / (m * (d + 1.0))


def hd_bound_b(ch: PairChannels, p_bs: float, qos: QosSpec, p_d: float) -> float:
    """Lower alpha bound from repetition decoding at the weak user, clamped at 0."""
    return _relay_bound(ch, p_bs, qos.delta_h, p_d)


def hd_bound_c(ch: PairChannels, p_bs: float, qos: QosSpec) -> float:
    """Upper alpha bound from the strong user's own rate."""
    d = qos.delta_h
    m = _strong_snr(ch, p_bs, d)
    if d == 0.0:
        return 1.0
    return 1.0 - d / m


def hd_min_relay_power(ch: PairChannels, p_bs: float, qos: QosSpec) -> float:
    """
    Relay power at which B^H drops to C^H.

    Below it no alpha serves both users. A negative crossing is clamped to 0 (the
    direct link suffices); with no D2D link the result is 0 or infinite.
    """
    d = qos.delta_h
    m = _strong_snr(ch, p_bs, d)
    y = p_bs * ch.gamma_n
    if d == 0.0:
        return 0.0
    x = (y * d * d + y * d + m * d - y * m) / (y * d + m)
    if x <= 0.0:
        return 0.0
    return x / ch.gamma_d if ch.gamma_d > 0.0 else math.inf


def hd_intersection_power(ch: PairChannels, p_bs: float, qos: QosSpec) -> float:
    """Relay power at which B^H drops to A^H; more relay power cannot raise the sum rate."""
    d = qos.delta_h
    m = _strong_snr(ch, p_bs, d)
    y = p_bs * ch.gamma_n
    x = d * (d + 1.0) * (m - y) / (m * (d + y + 1.0) - d * y) if d > 0.0 else 0.0
    if x <= 0.0:
        return 0.0
    return x / ch.gamma_d if ch.gamma_d > 0.0 else math.inf


def hd_feasible(
    ch: PairChannels, p_bs: float, p_d_max: float, qos: QosSpec
) -> FeasibilityReport:
    """
    Test whether some (alpha, p_d) meets both QoS constraints in HD mode.

    Args:
        ch: Channels of the pair
        p_bs: BS power budget
        p_d_max: Relay power budget
        qos: Rate threshold

    Returns:
        Report naming the failed conditions: ``bs_budget`` (A^H > C^H) and/or
        ``relay_budget`` (p_d_max below the minimum relay power)
    """
    d = qos.delta_h
    m = _strong_snr(ch, p_bs, d)
    failed = []
    if m < d * (d + 2.0):
        failed.append("bs_budget")
    p_min = hd_min_relay_power(ch, p_bs, qos)
    if p_d_max < p_min:
        failed.append("relay_budget")
    detail = (
        f"p_bs*gamma_m={m:.6g} (needs {d * (d + 2.0):.6g}), "
        f"p_d_max={p_d_max:.6g} (needs {p_min:.6g})"
    )
    return FeasibilityReport(feasible=not failed, failed=failed, detail=detail)


def hd_optimal(ch: PairChannels, p_bs: float, p_d_max: float, qos: QosSpec) -> PairSolution:
    """
    Optimal HD power control.

    The relay transmits at ``min(p_d_max, P_int)``; alpha is the smallest feasible
    split at that relay power, i.e. ``B^H(p_d_max)`` below ``P_int`` and ``A^H`` beyond.

    Raises:
        InfeasiblePairError: If the pair fails ``hd_feasible``
    """
    report = hd_feasible(ch, p_bs, p_d_max, qos)
    if not report.feasible:
        raise InfeasiblePairError(report.failed, f"HD infeasible ({', '.join(report.failed)})")

    a = hd_bound_a(ch, p_bs, qos)
    c = hd_bound_c(ch, p_bs, qos)
    if ch.gamma_d == 0.0:
        p_d = 0.0
        alpha = max(a, hd_bound_b(ch, p_bs, qos, 0.0))
    else:
        p_int = hd_intersection_power(ch, p_bs, qos)
        if p_d_max >= p_int:
            p_d, alpha = p_int, a
            if __debug__ and ch.gamma_n > 0.0:
                _check_identity("B^H(P_int) = A^H", hd_bound_b(ch, p_bs, qos, p_int), a, ch)
        else:
            p_d, alpha = p_d_max, max(a, hd_bound_b(ch, p_bs, qos, p_d_max))
    alpha = min(max(alpha, 0.0), c, 1.0)

    decision = PowerDecision(alpha=alpha, p_d=p_d)
    rates = hd_rates(ch, decision, p_bs)
    _audit_qos(rates, qos, Mode.HD)
    return PairSolution.solved(decision, rates, Mode.HD)


# FD geometry


class _FdGeometry(BaseModel):
    """FD bounds in normalized form: m = p_bs*gamma_m, y = p_bs*gamma_n, x = p*gamma_d."""

    m: float
    y: float
    g: float
    sigma: float
    d: float

    model_config = ConfigDict(frozen=True)

    @classmethod
    def of(cls, ch: PairChannels, p_bs: float, qos: QosSpec) -> "_FdGeometry":
        m = _strong_snr(ch, p_bs, qos.delta_f)
        return cls(m=m, y=p_bs * ch.gamma_n, g=ch.gamma_d, sigma=ch.gamma_si, d=qos.delta_f)

    def a(self, p: float) -> float:
        if self.d == 0.0:
            return 0.0
        return self.d * (self.m + self.sigma * p + 1.0) / (self.m * (self.d + 1.0))

    def b(self, p: float) -> float:
        x = self.g * p
        if self.y == 0.0:
            return 0.0 if x >= self.d * (1.0 - 1e-12) else math.inf
        if x >= self.d:
            return 0.0
        return (self.y + 1.0) * (self.d - x) / (self.y * (self.d + 1.0 - x))

    def c(self, p: float) -> float:
        if self.d == 0.0:
            return 1.0
        return 1.0 - self.d * (self.sigma * p + 1.0) / self.m

    def ac_limit(self) -> float:
        """Largest relay power with A <= C; -inf if none."""
        if self.d == 0.0:
            return math.inf
        slack = self.m - self.d * (self.d + 2.0)
        if self.sigma == 0.0:
            return math.inf if slack >= 0.0 else -math.inf
        if slack < 0.0:
            return -math.inf
        return slack / (self.d * self.sigma * (self.d + 2.0))

    def crossing_quadratic(self) -> Tuple[float, float, float]:
        """Coefficients of a parabola whose sign is that of C - B below the pole of B."""
        m, y, g, s, d = self.m, self.y, self.g, self.sigma, self.d
        return (
            y * d * s * g,
            g * (m + y * d) - y * d * s * (d + 1.0),
            y * m - y * d * (d + 1.0) - m * d,
        )

    def relay_quadratic(self) -> Tuple[float, float, float]:
        """Coefficients of a parabola whose sign is that of B - A below the pole of B."""
        m, y, g, s, d = self.m, self.y, self.g, self.sigma, self.d
        return (
            d * y * s * g,
            -m * (d + 1.0) * (y + 1.0) * g + d * y * (m + 1.0) * g - d * y * s * (d + 1.0),
            d * (d + 1.0) * (m - y),
        )

    def crossing_roots(self) -> Optional[Interval]:
        """Open interval where the crossing parabola is negative, before the pole check."""
        qa, qb, qc = self.crossing_quadratic()
        if qa > 0.0:
            roots = _quadratic_roots(qa, qb, qc)
            if not roots:
                return None
            return roots[0], roots[-1]
        if qb > 0.0:
            return -math.inf, -qc / qb
        if qb < 0.0:
            return -qc / qb, math.inf
        return (-math.inf, math.inf) if qc < 0.0 else None

    def blocked(self) -> Optional[Interval]:
        """Relay powers where B exceeds C."""
        roots = self.crossing_roots()
        if roots is None:
            return None
        # past the pole B is clamped to zero, so roots there do not bound alpha
        if self.g > 0.0 and roots[0] >= self.d / self.g:
            return None
        return roots

    def relay_breakpoint(self) -> float:
        """First nonnegative relay power where A reaches B."""
        roots = [r for r in _quadratic_roots(*self.relay_quadratic()) if r >= 0.0]
        return roots[0] if roots else math.inf

    def feasible_intervals(self, p_d_max: float) -> List[Interval]:
        hi = min(p_d_max, self.ac_limit())
        if hi < 0.0:
            return []
        blocked = self.blocked()
        if blocked is None:
            return [(0.0, hi)]
        lo_b, hi_b = blocked
        pieces = []
        if lo_b >= 0.0:
            pieces.append((0.0, min(hi, lo_b)))
        if hi_b <= hi:
            pieces.append((max(0.0, hi_b), hi))
        return pieces

    def stationary_powers(self) -> List[float]:
        """Critical points of the sum rate along alpha = B(p)."""
        y, g, s, d = self.y, self.g, self.sigma, self.d
        return _real_roots(
            [s * g * g, 2.0 * s * g * (y - d), g * (y + 1.0) - s * (y - d) * (d + 1.0)]
        )

    def rate_crossings(self) -> List[float]:
        """Relay powers where the weak user's SIC and MRC rates meet along alpha = C(p)."""
        m, y, g, s, d = self.m, self.y, self.g, self.sigma, self.d
        e = d * y + m
        return _real_roots(
            [
                -g * (d + 1.0) * d * y * s * s,
                d * y * s * s - g * (d + 1.0) * s * (e + d * y),
                -s * ((m - d) * y + d * (m - y)) - g * (d + 1.0) * e,
                (m - d) * (m - y),
            ]
        )


def _fd_params(geom: _FdGeometry) -> FdFeasParams:
    qa, qb, qc = geom.crossing_quadratic()
    ha, hb, hc = geom.relay_quadratic()
    roots = geom.crossing_roots()
    b1, b3 = roots if roots is not None else (None, None)
    return FdFeasParams(
        delta1=qb * qb - 4.0 * qa * qc,
        delta2=hb * hb - 4.0 * ha * hc,
        b1=b1,
        b2=geom.relay_breakpoint(),
        b3=b3,
    )


def fd_bound_a(ch: PairChannels, p_bs: float, qos: QosSpec, p_d: float) -> float:
    """Lower alpha bound from SIC decoding at the strong user under self-interference."""
    return _FdGeometry.of(ch, p_bs, qos).a(p_d)


def fd_bound_b(ch: PairChannels, p_bs: float, qos: QosSpec, p_d: float) -> float:
    """Lower alpha bound from MRC at the weak user, clamped at 0."""
    return _relay_bound(ch, p_bs, qos.delta_f, p_d)


def fd_bound_c(ch: PairChannels, p_bs: float, qos: QosSpec, p_d: float) -> float:
    """Upper alpha bound from the strong user's rate under self-interference."""
    return _FdGeometry.of(ch, p_bs, qos).c(p_d)


def fd_feas_params(ch: PairChannels, p_bs: float, qos: QosSpec) -> FdFeasParams:
    """
    Discriminants and breakpoints of the FD feasible region.

    ``b1 <= b3`` are the roots of ``B^F(p) = C^F(p)`` (absent when ``delta1 < 0``) and
    ``b2`` is the relay power where ``A^F`` meets ``B^F``.

    Raises:
        DegenerateChannelError: If gamma_si = 0 or gamma_d = 0
        DomainError: If gamma_m = 0 with a positive rate threshold
    """
    if ch.gamma_si == 0.0:
        raise DegenerateChannelError("no_self_interference")
    if ch.gamma_d == 0.0:
        raise DegenerateChannelError("no_d2d_link")
    return _fd_params(_FdGeometry.of(ch, p_bs, qos))


def _fd_condition(params: FdFeasParams) -> int:
    if params.b1 is None:
        return 3
    return 2 if params.b1 >= 0.0 else 1


def _fd_breakpoint_flag(geom: _FdGeometry, params: FdFeasParams, p_d_max: float) -> bool:
    if geom.m < geom.d * (geom.d + 2.0):
        return False
    if params.b1 is None or params.b1 >= 0.0:
        return True
    assert params.b3 is not None
    return params.b3 <= params.b2 and p_d_max >= params.b3


def fd_feasible(
    ch: PairChannels, p_bs: float, p_d_max: float, qos: QosSpec
) -> FeasibilityReport:
    """
    Test whether some (alpha, p_d) meets both QoS constraints in FD mode.

    The matched case is reported in ``condition``: 3 when B^F and C^F never cross,
    2 when they first cross at a nonnegative relay power, 1 otherwise. Channels
    without SI or D2D link are solved in their limit geometry.
    """
    geom = _FdGeometry.of(ch, p_bs, qos)
    params = _fd_params(geom)
    intervals = geom.feasible_intervals(p_d_max)
    feasible = bool(intervals)

    failed = []
    if not feasible:
        if geom.m < geom.d * (geom.d + 2.0):
            failed.append("bs_budget")
        elif geom.feasible_intervals(math.inf):
            failed.append("relay_budget")
        else:
            failed.append("relay_region")
    if __debug__ and ch.gamma_si > 0.0 and ch.gamma_d > 0.0:
        if _fd_breakpoint_flag(geom, params, p_d_max) != feasible:
            logger.warning(f"FD feasibility conditions disagree with bound geometry for {ch!r}")

    return FeasibilityReport(
        feasible=feasible,
        failed=failed,
        condition=_fd_condition(params) if feasible else None,
        detail=f"relay intervals {intervals}",
    )


def fd_policy_power(params: FdFeasParams, p_d_max: float) -> Optional[float]:
    """
    Piecewise relay-power rule keyed on the breakpoints.

    Returns:
        The relay power of the matched case, or None when no case applies
    """
    b2 = params.b2
    if params.b1 is None:
        return p_d_max if p_d_max <= b2 else b2
    if params.b1 >= 0.0:
        cap = max(params.b1, b2)
        return p_d_max if p_d_max <= cap else cap
    assert params.b3 is not None
    if params.b3 <= b2:
        if p_d_max < max(0.0, params.b3):
            return None
        return p_d_max if p_d_max <= b2 else b2
    return None


class _Candidate(BaseModel):
    sum_rate: float
    decision: PowerDecision
    rates: RatePair

    model_config = ConfigDict(frozen=True)


def _fd_evaluate(
    ch: PairChannels, p_bs: float, qos: QosSpec, geom: _FdGeometry, p: float, alphas: str
) -> Optional[_Candidate]:
    """Best of alpha = max(A, B) and (if ``alphas == "both"``) alpha = C at relay power p."""
    floor = max(geom.a(p), geom.b(p), 0.0)
    ceiling = min(geom.c(p), 1.0)
    if not math.isfinite(floor) or floor > ceiling + GEOMETRY_TOLERANCE:
        return None
    options = [min(floor, ceiling)] if alphas == "floor" else [min(floor, ceiling), ceiling]
    best = None
    for alpha in options:
        decision = PowerDecision(alpha=max(alpha, 0.0), p_d=p)
        rates = fd_rates(ch, decision, p_bs)
        if not rates.meets(qos.r_th, QOS_TOLERANCE):
            continue
        if best is None or rates.sum_rate > best.sum_rate:
            best = _Candidate(sum_rate=rates.sum_rate, decision=decision, rates=rates)
    return best


def fd_optimal(ch: PairChannels, p_bs: float, p_d_max: float, qos: QosSpec) -> PairSolution:
    """
    Optimal FD power control.

    The breakpoint rule of ``fd_policy_power`` with alpha = max(A^F, B^F) is the
    starting point. Strong self-interference can make the sum rate peak inside the
    feasible region instead, so the rule is compared against the finite set of
    relay powers that contains the optimum: region endpoints, ``b2``, the critical
    points along alpha = B^F and the weak-rate crossings along alpha = C^F. The rule's
    point is kept unless another candidate is strictly better.

    Raises:
        InfeasiblePairError: If the pair fails ``fd_feasible``
    """
    report = fd_feasible(ch, p_bs, p_d_max, qos)
    if not report.feasible:
        raise InfeasiblePairError(report.failed, f"FD infeasible ({', '.join(report.failed)})")

    geom = _FdGeometry.of(ch, p_bs, qos)
    intervals = geom.feasible_intervals(p_d_max)

    if ch.gamma_d == 0.0:
        policy_p: Optional[float] = 0.0
    else:
        params = _fd_params(geom)
        policy_p = fd_policy_power(params, p_d_max)
        if __debug__ and ch.gamma_si > 0.0:
            b2 = params.b2
            if geom.y > 0.0 and math.isfinite(b2) and geom.g * b2 < geom.d:
                _check_identity("A^F(b2) = B^F(b2)", geom.a(b2), geom.b(b2), ch)

    best = None
    if policy_p is not None:
        best = _fd_evaluate(ch, p_bs, qos, geom, policy_p, "floor")

    candidates = {p for interval in intervals for p in interval}
    extra = [geom.relay_breakpoint(), *geom.stationary_powers(), *geom.rate_crossings()]
    for p in extra:
        if math.isfinite(p) and any(lo <= p <= hi for lo, hi in intervals):
            candidates.add(p)

    improved = False
    for p in sorted(candidates):
        candidate = _fd_evaluate(ch, p_bs, qos, geom, p, "both")
        if candidate is None:
            continue
        if best is None or candidate.sum_rate > best.sum_rate + _IMPROVEMENT * max(
            1.0, best.sum_rate
        ):
            best, improved = candidate, True

    if best is None:
        raise InfeasiblePairError(["relay_region"], "FD region too thin to hold a QoS point")
    logger.debug(
        f"FD optimum alpha={best.decision.alpha:.6g} p_d={best.decision.p_d:.6g} "
        f"({'interior candidate' if improved else 'breakpoint rule'})"
    )
    return PairSolution.solved(best.decision, best.rates, Mode.FD)


def mode_select(ch: PairChannels, p_bs: float, p_d_max: float, qos: QosSpec) -> PairSolution:
    """Best of the FD and HD optima; FD wins ties, infeasibility is returned as a value."""
    solutions = []
    reasons = []
    for mode, solver in ((Mode.FD, fd_optimal), (Mode.HD, hd_optimal)):
        try:
            solutions.append(solver(ch, p_bs, p_d_max, qos))
        except (InfeasiblePairError, DomainError) as e:
            reasons.append(f"{mode.value}: {e}")
    if not solutions:
        return PairSolution.infeasible(None, "; ".join(reasons))
    return max(solutions, key=lambda s: s.sum_rate)


def noma_optimal(ch: PairChannels, p_bs: float, qos: QosSpec) -> PairSolution:
    """
    Optimal power split of conventional NOMA (no relaying).

    Identical to FD with a zero relay budget: alpha is the smallest split that
    lets both the weak user and the strong user's SIC decode the weak message.

    Raises:
        InfeasiblePairError: If no split meets both rates
    """
    a = fd_bound_a(ch, p_bs, qos, 0.0)
    b = fd_bound_b(ch, p_bs, qos, 0.0)
    c = fd_bound_c(ch, p_bs, qos, 0.0)
    alpha = max(a, b, 0.0)
    if alpha > c:
        d = qos.delta_f
        failed = ["bs_budget"] if p_bs * ch.gamma_m < d * (d + 2.0) else ["weak_link"]
        raise InfeasiblePairError(failed, f"NOMA infeasible ({failed[0]})")
    rates = noma_rates(ch, alpha, p_bs)
    _audit_qos(rates, qos, Mode.NOMA)
    return PairSolution.solved(PowerDecision(alpha=alpha, p_d=0.0), rates, Mode.NOMA)


def solve_pair(ch: PairChannels, config: SystemConfig) -> PairSolution:
    """Adaptive optimum of one pair under ``config.mode``; infeasibility is a value."""
    qos = config.qos
    try:
        if config.mode is Mode.MODE_SELECT:
            return mode_select(ch, config.p_bs, config.p_d_max, qos)
        if config.mode is Mode.HD:
            return hd_optimal(ch, config.p_bs, config.p_d_max, qos)
        if config.mode is Mode.FD:
            return fd_optimal(ch, config.p_bs, config.p_d_max, qos)
        return noma_optimal(ch, config.p_bs, qos)
    except (InfeasiblePairError, DomainError) as e:
        mode = None if config.mode is Mode.MODE_SELECT else config.mode
        return PairSolution.infeasible(mode, str(e))


def _check_identity(name: str, lhs: float, rhs: float, ch: PairChannels) -> None:
    if _relative_gap(lhs, rhs) > GEOMETRY_TOLERANCE:
        logger.warning(f"Geometry identity {name} off by {lhs - rhs:.3g} for {ch!r}")


def _audit_qos(rates: RatePair, qos: QosSpec, mode: Mode) -> None:
    if not rates.meets(qos.r_th, QOS_TOLERANCE):
        logger.warning(
            f"{mode.value} solution misses QoS: r_strong={rates.r_strong:.12g}, "
            f"r_weak={rates.r_weak:.12g}, r_th={qos.r_th}"
        )
