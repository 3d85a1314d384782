"""Maximum decodable subset of transmitters at one receiver.

A rate vector on the boundary of a decodability constraint counts as
decodable: ``R(V) <= bound + tol`` passes and non-decodability needs
``R(U) > bound + tol``.  The same threshold is used everywhere so that the
regions D^S partition the nonnegative orthant under floating point.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConsistencyError
from .setfn import TOL, RateVector, UserSet, View, decode_gap_oracle, rho, sigma, submasks
from .sfm import minimize

CLASSIFY_LIMIT = 12


@dataclass(frozen=True)
class Constraint:
    """One inequality of the decodability characterisation.

    ``kind`` is ``decode`` (R(V) <= bound) or ``noise`` (R(U) > bound).
    """

    kind: str
    users: UserSet
    lhs: float
    rhs: float
    tol: float = TOL

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def holds(self) -> bool:
        if self.kind == "decode":
            return self.lhs <= self.rhs + self.tol
        return self.lhs > self.rhs + self.tol


def _check_args(view: View, context: UserSet, rates: RateVector) -> None:
    if context.size != view.size or rates.size != view.size:
        raise ValueError(f"context, rates and view must all cover {view.size} users")


def max_decodable_subset(view: View, context: UserSet, rates: RateVector,
                         tol: float = TOL, solver: str = "auto") -> UserSet:
    """Largest subset of ``context`` the receiver can jointly decode.

    Users outside ``context`` are noise.  Repeatedly minimises the decode gap
    over the current candidate set and drops its minimal minimiser, which can
    never be decoded, until the minimiser is empty.
    """
    _check_args(view, context, rates)
    S = context
    while S:
        W = minimize(decode_gap_oracle(view, S, rates), solver, tol).minimal_minimizer
        if not W:
            break
        S = S - W
    return S


def decode_constraints(view: View, S: UserSet, rates: RateVector, tol: float = TOL):
    """R(V) <= I(X_V; Y | X_{S \\ V}) for nonempty V in S."""
    for V in S.subsets(nonempty=True):
        yield Constraint("decode", V, rates.total(V), sigma(view, S, V), tol)


def noise_constraints(view: View, context: UserSet, S: UserSet, rates: RateVector, tol: float = TOL):
    """R(U) > I(X_U; Y | X_S) for nonempty U in context \\ S."""
    rest = context - S
    cond = view.without(S)
    for U in rest.subsets(nonempty=True):
        yield Constraint("noise", U, rates.total(U), rho(cond, rest, U), tol)


def region_constraints(view: View, context: UserSet, S: UserSet, rates: RateVector,
                       tol: float = TOL) -> list[Constraint]:
    """Every inequality that places ``rates`` in the region D^S."""
    return list(decode_constraints(view, S, rates, tol)) + \
        list(noise_constraints(view, context, S, rates, tol))


def in_region(view: View, context: UserSet, S: UserSet, rates: RateVector, tol: float = TOL) -> bool:
    size = S.size
    for m in submasks(S.mask)[1:]:
        V = UserSet(m, size)
        if rates.total(V) > sigma(view, S, V) + tol:
            return False
    rest = context - S
    cond = view.without(S)
    for m in submasks(rest.mask)[1:]:
        U = UserSet(m, size)
        if rates.total(U) <= rho(cond, rest, U) + tol:
            return False
    return True


def matching_regions(view: View, context: UserSet, rates: RateVector, tol: float = TOL) -> list[UserSet]:
    """Every S in context whose region inequalities hold.  Exponential."""
    _check_args(view, context, rates)
    if len(context) > CLASSIFY_LIMIT:
        raise ValueError(f"exhaustive classification supports at most {CLASSIFY_LIMIT} users")
    return [S for m in submasks(context.mask)
            if in_region(view, context, S := UserSet(m, context.size), rates, tol)]


def classify_region_exhaustive(view: View, context: UserSet, rates: RateVector,
                               tol: float = TOL) -> UserSet:
    """The unique S with ``rates`` in D^S, by scanning all candidates.

    Exponential in ``|context|``; intended as a reference oracle.
    """
    found = matching_regions(view, context, rates, tol)
    if len(found) != 1:
        raise ConsistencyError(
            f"rates {rates.rates} match {len(found)} regions "
            f"({', '.join(s.render() for s in found) or 'none'}); expected exactly one")
    return found[0]


def is_fully_nondecodable(view: View, context: UserSet, rates: RateVector,
                          tol: float = TOL, solver: str = "auto") -> bool:
    """True iff no user in ``context`` can be decoded, i.e. R(U) > I(X_U; Y)
    for every nonempty U."""
    return not max_decodable_subset(view, context, rates, tol, solver)


def is_decodable(view: View, D: UserSet, rates: RateVector, tol: float = TOL) -> bool:
    """Can ``D`` be jointly decoded treating every other user as noise?"""
    return all(c.holds for c in decode_constraints(view, D, rates, tol))
