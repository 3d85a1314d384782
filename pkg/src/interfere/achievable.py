"""Maximum achievable rate of an intended user among interferers.

The receiver first finds the maximum decodable subset S of interferers
(assuming its own signal is known), then jointly decodes its own message
with a subset U of S after cancelling W = S \\ U.  Users in V = E \\ (S + {1})
stay noise.  The rate is a submodular minimum over U in S.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .decodable import max_decodable_subset
from .setfn import (TOL, GaussianReceiverView, RateVector, SetFunctionOracle, UserSet, View,
                    gamma, sigma)
from .sfm import minimize


@dataclass(frozen=True)
class DecodeDecomposition:
    intended: int
    V_noise: UserSet
    U_joint: UserSet
    W_first: UserSet
    rate: float

    @property
    def region(self) -> UserSet:
        """Maximum decodable subset of the interferers."""
        return self.U_joint | self.W_first


def _intended(view: View) -> int:
    return view.intended_user if view.intended_user is not None else 1


def joint_rate_oracle(view: View, intended: int, S: UserSet, rates: RateVector) -> SetFunctionOracle:
    """U -> I(X_1, X_U; Y | X_{S \\ U}) - R(U) over subsets U of S."""
    me = UserSet.of(view.size, [intended])
    context = S | me
    return SetFunctionOracle(lambda U: sigma(view, context, U | me) - rates.total(U), S, "joint_rate")


def achievable_rate(view: View, rates: RateVector, tol: float = TOL,
                    solver: str = "auto") -> DecodeDecomposition:
    """Largest rate of the intended user given the interferers' rates.

    ``rates`` covers all users; the intended user's own entry is ignored.
    """
    if rates.size != view.size:
        raise ValueError(f"rates cover {rates.size} users, view has {view.size}")
    me_idx = _intended(view)
    me = UserSet.of(view.size, [me_idx])
    rates = rates.replace(me_idx, 0.0)
    interferers = me.complement()
    S = max_decodable_subset(view.without(me), interferers, rates, tol, solver)
    res = minimize(joint_rate_oracle(view, me_idx, S, rates), solver, tol)
    U = res.minimal_minimizer
    rate = res.min_value
    if rate < 0:
        # round-off only: U = {} always gives a nonnegative value
        rate = 0.0
    return DecodeDecomposition(me_idx, interferers - S, U, S - U, rate)


def lower_upper_bounds(view: GaussianReceiverView) -> tuple[float, float]:
    """(treat all interference as noise, interference-free) rates."""
    if not isinstance(view, GaussianReceiverView):
        raise TypeError("bounds are defined for Gaussian views")
    i = _intended(view)
    me = UserSet.of(view.size, [i])
    own = view.effective_powers[i - 1]
    return gamma(own / (1.0 + view.power(me.complement()))), gamma(own)


@dataclass(frozen=True)
class SurfacePoint:
    index: tuple[int, ...]
    interferer_rates: tuple[float, ...]
    rate: float
    region: UserSet
    active: UserSet

    @property
    def piece(self) -> tuple[int, int]:
        return self.region.mask, self.active.mask


def grid_axis(start: float, stop: float, step: float) -> np.ndarray:
    """Points start, start + step, ... up to ``stop`` inclusive."""
    if step <= 0 or stop < start:
        raise ValueError(f"bad grid axis {start}:{stop}:{step}")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(n)


def sample_rate_surface(view: View, grid: Sequence[tuple[float, float, float]], tol: float = TOL,
                        solver: str = "auto", workers: int | None = None) -> list[SurfacePoint]:
    """Evaluate the achievable rate on a product grid of interferer rates.

    ``grid`` holds one (start, stop, step) per interferer in index order.
    Points come back in row-major grid order whatever ``workers`` is.
    """
    me = _intended(view)
    others = [j for j in range(1, view.size + 1) if j != me]
    if len(grid) != len(others):
        raise ValueError(f"need {len(others)} grid axes, got {len(grid)}")
    axes = [grid_axis(*g) for g in grid]
    if not axes or any(len(a) == 0 for a in axes):
        raise ValueError("empty grid")
    shape = tuple(len(a) for a in axes)
    indices = list(np.ndindex(*shape))

    def point(idx: tuple[int, ...]) -> SurfacePoint:
        vals = tuple(float(axes[k][i]) for k, i in enumerate(idx))
        d = achievable_rate(view, RateVector.for_interferers(view.size, me, vals), tol, solver)
        return SurfacePoint(tuple(int(i) for i in idx), vals, d.rate, d.region, d.U_joint)

    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            return list(ex.map(point, indices))
    return [point(i) for i in indices]


def count_pieces(points: Sequence[SurfacePoint]) -> int:
    """Number of distinct (region, active set) labels, one per affine piece."""
    return len({p.piece for p in points})
