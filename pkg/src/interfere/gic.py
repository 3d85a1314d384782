"""M-user Gaussian interference networks.

Gains follow the receiver-by-transmitter convention: ``gains[i][j]`` is the
gain from transmitter j to receiver i (0-based storage, 1-based users in the
public API).  Every computation goes through the per-receiver standard-form
views, whose effective powers are h_ij^2 P_j / N_i.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .achievable import joint_rate_oracle
from .decodable import max_decodable_subset
from .setfn import TOL, GaussianReceiverView, RateVector, UserSet, gamma, sigma, submasks
from .sfm import minimize


@dataclass(frozen=True)
class InterferenceNetwork:
    gains: tuple[tuple[float, ...], ...]
    powers: tuple[float, ...]
    noises: tuple[float, ...]

    def __post_init__(self):
        H = np.asarray(self.gains, dtype=float)
        M = len(self.powers)
        if H.shape != (M, M):
            raise ValueError(f"gain matrix must be {M}x{M}, got shape {H.shape}")
        if len(self.noises) != M:
            raise ValueError(f"need {M} noise variances, got {len(self.noises)}")
        if not np.all(np.isfinite(H)):
            raise ValueError("gains must be finite")
        for i in range(M):
            if H[i, i] == 0:
                raise ValueError(f"diagonal gain h_{i + 1}{i + 1} must be nonzero")
            if not self.powers[i] > 0:
                raise ValueError(f"power of user {i + 1} must be positive")
            if not self.noises[i] > 0:
                raise ValueError(f"noise of receiver {i + 1} must be positive")
        object.__setattr__(self, "gains", tuple(tuple(float(x) for x in row) for row in H))
        object.__setattr__(self, "powers", tuple(float(p) for p in self.powers))
        object.__setattr__(self, "noises", tuple(float(n) for n in self.noises))

    @classmethod
    def standard(cls, gains: Sequence[Sequence[float]], powers: Sequence[float] | None = None):
        """Unit noises, unit powers unless given."""
        M = len(gains)
        return cls(tuple(map(tuple, gains)), tuple(powers or [1.0] * M), (1.0,) * M)

    @property
    def size(self) -> int:
        return len(self.powers)

    def audible(self, i: int) -> UserSet:
        """Transmitters with nonzero gain at receiver ``i``."""
        return UserSet.of(self.size, [j for j in range(1, self.size + 1) if self.gains[i - 1][j - 1] != 0])

    def relabel(self, order: Sequence[int]) -> "InterferenceNetwork":
        """Network whose user k is this network's user ``order[k-1]``."""
        idx = [o - 1 for o in order]
        H = np.asarray(self.gains)[np.ix_(idx, idx)]
        return InterferenceNetwork(tuple(map(tuple, H)), tuple(self.powers[i] for i in idx),
                                   tuple(self.noises[i] for i in idx))


def receiver_view(net: InterferenceNetwork, i: int) -> GaussianReceiverView:
    """Standard-form view of receiver ``i``: powers h_ij^2 P_j / N_i."""
    if not 1 <= i <= net.size:
        raise ValueError(f"receiver {i} outside 1..{net.size}")
    row = net.gains[i - 1]
    n = net.noises[i - 1]
    return GaussianReceiverView(tuple(h * h * p / n for h, p in zip(row, net.powers)), i)


@dataclass(frozen=True)
class Strategy:
    """Per-receiver sets of users each receiver jointly decodes."""

    decode_sets: tuple[UserSet, ...]

    def __post_init__(self):
        for i, s in enumerate(self.decode_sets, 1):
            if i not in s:
                raise ValueError(f"receiver {i} must decode its own user")

    def render(self) -> str:
        return ";".join(s.render() for s in self.decode_sets)


@dataclass(frozen=True)
class ExtremePoint:
    rates: RateVector
    strategy: Strategy
    ordering: tuple[int, ...]


def _check_perm(ordering: Sequence[int], M: int) -> tuple[int, ...]:
    ordering = tuple(int(o) for o in ordering)
    if sorted(ordering) != list(range(1, M + 1)):
        raise ValueError(f"ordering {ordering} is not a permutation of 1..{M}")
    return ordering


def successive_maximize(net: InterferenceNetwork, ordering: Sequence[int] | None = None,
                        tol: float = TOL, solver: str = "auto") -> ExtremePoint:
    """Maximise users' rates one at a time in ``ordering``.

    Each new user i gets the largest rate that every receiver hearing it can
    support: receiver i uses its maximum decodable subset of earlier users,
    earlier receivers keep their decode sets.  Later users are assumed decoded
    and cancelled.  Receivers that do not hear user i impose no constraint and
    do not add it to their decode set.
    """
    M = net.size
    ordering = _check_perm(ordering if ordering is not None else range(1, M + 1), M)
    work = net.relabel(ordering)
    views = [receiver_view(work, i) for i in range(1, M + 1)]
    rates = [0.0] * M
    rates[0] = gamma(views[0].effective_powers[0])
    decode = [UserSet.of(M, [1])]
    for i in range(2, M + 1):
        later = UserSet.of(M, range(i + 1, M + 1))
        prev = UserSet.of(M, range(1, i))
        me = UserSet.of(M, [i])
        rv = RateVector(tuple(rates))
        # receiver i: which earlier users can it decode once its own is known
        view_i = views[i - 1].without(later)
        decode.append(max_decodable_subset(view_i.without(me), prev, rv, tol, solver))
        bounds = []
        for j in range(1, i + 1):
            if work.gains[j - 1][i - 1] == 0:
                continue
            view_j = GaussianReceiverView(views[j - 1].without(later).effective_powers, i)
            res = minimize(joint_rate_oracle(view_j, i, decode[j - 1], rv), solver, tol)
            bounds.append(res.min_value)
        rates[i - 1] = max(0.0, min(bounds))
        for j in range(1, i + 1):
            if work.gains[j - 1][i - 1] != 0:
                decode[j - 1] = decode[j - 1] | me

    # back to the caller's labels: working user k is original user ordering[k-1]
    back = {k + 1: o for k, o in enumerate(ordering)}
    out_rates = [0.0] * M
    out_sets: list[UserSet] = [UserSet(0, M)] * M
    for k in range(1, M + 1):
        out_rates[back[k] - 1] = rates[k - 1]
        out_sets[back[k] - 1] = UserSet.of(M, [back[j] for j in decode[k - 1]])
    return ExtremePoint(RateVector(tuple(out_rates)), Strategy(tuple(out_sets)), ordering)


def all_orderings(net: InterferenceNetwork, tol: float = TOL, solver: str = "auto") -> list[ExtremePoint]:
    """Successive maximisation for every ordering (duplicates kept)."""
    return [successive_maximize(net, p, tol, solver)
            for p in itertools.permutations(range(1, net.size + 1))]


def strategy_constraints(net: InterferenceNetwork, rates: RateVector, strategy: Strategy):
    """(receiver, T, R(T), bound) for every MAC constraint of ``strategy``."""
    for i, S in enumerate(strategy.decode_sets, 1):
        view = receiver_view(net, i)
        for T in S.subsets(nonempty=True):
            yield i, T, rates.total(T), sigma(view, S, T)


def strategy_achievable(net: InterferenceNetwork, rates: RateVector, strategy: Strategy,
                        tol: float = TOL) -> bool:
    """Can every receiver decode its set, other users being noise?"""
    return all(lhs <= rhs + tol for _, _, lhs, rhs in strategy_constraints(net, rates, strategy))


def all_strategies(M: int):
    """Every strategy: receiver i decodes {i} plus any subset of the others."""
    per = []
    for i in range(1, M + 1):
        others = UserSet.of(M, [j for j in range(1, M + 1) if j != i])
        per.append([UserSet(m | 1 << (i - 1), M) for m in submasks(others.mask)])
    for combo in itertools.product(*per):
        yield Strategy(tuple(combo))


def is_generalized_one_sided(net: InterferenceNetwork) -> list[int] | None:
    """Relabelling (new user k = old user ``order[k-1]``) that makes the gain
    matrix lower triangular, or None if the interference graph has a cycle.

    Kahn's algorithm, smallest index first, so a matrix that is already lower
    triangular keeps the identity labelling.
    """
    M = net.size
    succ: list[list[int]] = [[] for _ in range(M)]
    indeg = [0] * M
    for i in range(M):
        for j in range(M):
            if i != j and net.gains[i][j] != 0:
                succ[j].append(i)  # transmitter j interferes at receiver i
                indeg[i] += 1
    ready = [k for k in range(M) if indeg[k] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        k = heapq.heappop(ready)
        order.append(k + 1)
        for i in succ[k]:
            indeg[i] -= 1
            if indeg[i] == 0:
                heapq.heappush(ready, i)
    return order if len(order) == M else None


def _normalized_sq_gains(net: InterferenceNetwork) -> np.ndarray:
    H = np.asarray(net.gains)
    return H * H / np.asarray(net.noises)[:, None]


def is_strong_one_sided(net: InterferenceNetwork) -> bool:
    """Triangular after relabelling, and within every column the (noise
    normalised) squared gain never decreases going down the rows."""
    order = is_generalized_one_sided(net)
    if order is None:
        raise ValueError("network is not generalized one-sided")
    G = _normalized_sq_gains(net.relabel(order))
    return bool(np.all(np.diff(G, axis=0) >= 0))


def strong_one_sided_membership(net: InterferenceNetwork, rates: RateVector,
                                tol: float = TOL) -> tuple[bool, tuple[int, UserSet] | None]:
    """Is ``rates`` inside every receiver's MAC region over the users it hears?

    Returns (True, None) or (False, (receiver, violating set)).
    """
    if not is_strong_one_sided(net):
        raise ValueError("network is not strong one-sided")
    if rates.size != net.size:
        raise ValueError(f"need {net.size} rates, got {rates.size}")
    for i in range(1, net.size + 1):
        view = receiver_view(net, i)
        for T in net.audible(i).subsets(nonempty=True):
            if rates.total(T) > gamma(view.power(T)) + tol:
                return False, (i, T)
    return True, None
