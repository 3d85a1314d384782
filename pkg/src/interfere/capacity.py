"""Degraded Gaussian broadcast ladders and capacity certificates.

A ladder places users at strictly increasing noise levels N_1 < ... < N_L so
that every level's rate constraint holds with equality, users on lower
(quieter) levels act as noise for higher ones, and all higher-level users
remain strictly decodable by lower levels.  Appending the intended user and
its joint-decoding partners at the channel's own noise level turns the
achievable rate into a boundary point of a broadcast capacity region, which
certifies that it is the capacity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .achievable import DecodeDecomposition, achievable_rate
from .errors import ConsistencyError
from .setfn import TOL, GaussianReceiverView, RateVector, UserSet, gamma, gamma_inverse, submasks

LADDER_LIMIT = 20
# relative width within which two candidate noise levels count as tied
BIND_RTOL = 1e-9


class LadderError(ValueError):
    """The rate vector admits no positive noise level."""

    def __init__(self, msg: str, binding: UserSet):
        super().__init__(msg)
        self.binding = binding


@dataclass(frozen=True)
class Level:
    noise: float
    users: UserSet


@dataclass(frozen=True)
class BroadcastLadder:
    powers: tuple[float, ...]
    rates: RateVector
    levels: tuple[Level, ...]

    def _sum(self, values: Sequence[float], s: UserSet) -> float:
        return math.fsum(values[i - 1] for i in s)

    def power(self, s: UserSet) -> float:
        return self._sum(self.powers, s)

    def below(self, k: int) -> UserSet:
        """Users on levels 0..k-1 (0-based)."""
        out = UserSet(0, len(self.powers))
        for lv in self.levels[:k]:
            out = out | lv.users
        return out

    def constraints(self, tol: float = TOL) -> list["Check"]:
        """Every ladder equality and inequality with its slack."""
        out: list[Check] = []
        size = len(self.powers)
        for k, lv in enumerate(self.levels):
            n = k + 1
            if k:
                prev = self.levels[k - 1].noise
                out.append(Check(f"order[N_{k}<N_{n}]", prev, lv.noise, "<", tol))
            q = self.power(self.below(k))
            eq_rhs = gamma(self.power(lv.users) / (lv.noise + q))
            out.append(Check(f"level_eq[{n}]", self.rates.total(lv.users), eq_rhs, "=", tol))
            for m in submasks(lv.users.mask)[1:-1]:
                T = UserSet(m, size)
                out.append(Check(f"level_le[{n},T={T.render()}]", self.rates.total(T),
                                 gamma(self.power(T) / (lv.noise + q)), "<=", tol))
            above = self.below(len(self.levels)) - self.below(k + 1)
            q_in = q + self.power(lv.users)
            for m in submasks(above.mask)[1:]:
                T = UserSet(m, size)
                out.append(Check(f"upper_lt[{n},T={T.render()}]", self.rates.total(T),
                                 gamma(self.power(T) / (lv.noise + q_in)), "<", tol))
        return out


@dataclass(frozen=True)
class Check:
    name: str
    lhs: float
    rhs: float
    relation: str
    tol: float = TOL

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        if self.relation == "=":
            return abs(self.slack) <= self.tol * max(1.0, abs(self.rhs))
        if self.relation == "<=":
            return self.slack >= -self.tol
        return self.slack > 0.0


def _binding_noise(power: float, rate: float, decoded: float) -> float:
    """Largest noise at which ``rate`` is still achievable with ``decoded``
    power acting as extra noise."""
    try:
        return power / gamma_inverse(rate) - decoded
    except OverflowError:
        # 2^(2R) beyond float range: no positive noise supports the rate
        return -decoded


def build_ladder(powers: Sequence[float], rates: Sequence[float] | RateVector) -> BroadcastLadder:
    """Place users on a degraded broadcast ladder.

    At each step the next noise level is the largest one keeping every
    remaining subset's rate achievable; the union of all subsets that bind
    there forms the level.
    """
    powers = tuple(float(p) for p in powers)
    rv = rates if isinstance(rates, RateVector) else RateVector(tuple(rates))
    K = len(powers)
    if rv.size != K:
        raise ValueError(f"{K} powers but {rv.size} rates")
    if K > LADDER_LIMIT:
        raise ValueError(f"at most {LADDER_LIMIT} users supported")
    for i in range(1, K + 1):
        if not powers[i - 1] > 0:
            raise ValueError(f"power of user {i} must be positive")
        if not rv[i] > 0:
            raise ValueError(f"rate of user {i} must be positive")
    levels: list[Level] = []
    remaining = UserSet.full(K)
    decoded = 0.0
    while remaining:
        cand = []
        for m in submasks(remaining.mask)[1:]:
            T = UserSet(m, K)
            p = math.fsum(powers[i - 1] for i in T)
            cand.append((_binding_noise(p, rv.total(T), decoded), T))
        n_min, worst = min(cand, key=lambda c: c[0])
        if n_min <= 0 or (levels and n_min <= levels[-1].noise):
            raise LadderError(
                f"subset {worst.render()} binds at nonpositive noise {n_min:.6g}", worst)
        width = BIND_RTOL * max(abs(n_min), 1.0)
        U = UserSet(0, K)
        for n, T in cand:
            if n <= n_min + width:
                U = U | T
        p_u = math.fsum(powers[i - 1] for i in U)
        levels.append(Level(_binding_noise(p_u, rv.total(U), decoded), U))
        decoded += p_u
        remaining = remaining - U
    return BroadcastLadder(powers, rv, tuple(levels))


@dataclass(frozen=True)
class Certificate:
    decomposition: DecodeDecomposition
    ladder: BroadcastLadder | None
    checks: tuple[Check, ...] = field(default=())

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]


def _restrict(values: Sequence[float], users: UserSet) -> tuple[float, ...]:
    return tuple(values[i - 1] for i in users)


def verify_capacity(view: GaussianReceiverView, rates: RateVector, tol: float = TOL,
                    solver: str = "auto") -> Certificate:
    """Certify that the achievable rate is the channel capacity.

    Builds the broadcast ladder on the noise users V, checks that its top
    noise level lies below the receiver's unit noise, appends the intended
    user with its joint-decoding partners U at unit noise and re-validates
    every ladder constraint.  Noise levels are in units of the receiver noise.
    """
    if not isinstance(view, GaussianReceiverView):
        raise TypeError("capacity certificates are defined for Gaussian views")
    d = achievable_rate(view, rates, tol, solver)
    me = d.intended
    rates = rates.replace(me, d.rate)
    p = view.effective_powers
    V, top = list(d.V_noise), d.U_joint.add(me)

    # local labels: V users first, then U + {intended}
    order = V + list(top)
    local_p = tuple(p[i - 1] for i in order)
    local_r = RateVector(tuple(rates[i] for i in order))
    n = len(order)
    checks: list[Check] = []
    levels: list[Level] = []
    ladder_v = None
    if V:
        try:
            ladder_v = build_ladder(local_p[:len(V)], local_r.rates[:len(V)])
        except LadderError as exc:
            raise ConsistencyError(f"no ladder for noise users {d.V_noise.render()}: {exc}") from exc
        levels = [Level(lv.noise, UserSet(lv.users.mask, n)) for lv in ladder_v.levels]
        checks.append(Check(f"top_below_noise[N_{len(levels)}<N]", levels[-1].noise, 1.0, "<", tol))
    levels.append(Level(1.0, UserSet(((1 << n) - 1) & ~((1 << len(V)) - 1), n)))
    full = BroadcastLadder(local_p, local_r, tuple(levels))
    checks.extend(full.constraints(tol))
    # the rate identity C + R(U) = gamma((P_1 + P(U)) / (N + P(V)))
    cap_rhs = gamma((p[me - 1] + view.power(d.U_joint)) / (1.0 + view.power(d.V_noise)))
    checks.append(Check("capacity_identity", d.rate + rates.total(d.U_joint), cap_rhs, "=", tol))
    # relabel set names back to the caller's user indices
    names = {k + 1: order[k] for k in range(n)}
    checks = [Check(_rename(c.name, names), c.lhs, c.rhs, c.relation, c.tol) for c in checks]
    return Certificate(d, ladder_v, tuple(checks))


def _rename(name: str, names: dict[int, int]) -> str:
    if "T={" not in name:
        return name
    head, rest = name.split("T={", 1)
    inner, tail = rest.split("}", 1)
    users = sorted(names[int(i)] for i in inner.split(",") if i)
    return head + "T={" + ",".join(map(str, users)) + "}" + tail
