"""Submodular function minimisation.

Two solvers with a common result type:

* :func:`minimize_exhaustive` scans every subset of the ground set; it is the
  ground truth and the default for small ground sets.
* :func:`minimize_min_norm` is the Fujishige-Wolfe minimum-norm-point method:
  Wolfe's nearest-point algorithm over the base polytope with Edmonds' greedy
  algorithm as the linear optimisation oracle.

Both report the minimal (lattice-smallest) minimiser, which is what the
decodability algorithms need.  A minimum within ``tol`` of f(empty) is
reported as the empty set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .setfn import TOL, SetFunctionOracle, UserSet, submasks

EXHAUSTIVE_LIMIT = 24
AUTO_EXHAUSTIVE_MAX = 16
MAX_MAJOR_CYCLES = 10_000


class GroundSetTooLarge(ValueError):
    pass


class NotSubmodularError(ValueError):
    """The oracle produced a certificate that it is not submodular."""


class SolverError(RuntimeError):
    """Wolfe's algorithm hit its iteration cap."""

    def __init__(self, msg: str, best_iterate: np.ndarray):
        super().__init__(msg)
        self.best_iterate = best_iterate


@dataclass(frozen=True)
class SfmResult:
    min_value: float
    minimal_minimizer: UserSet
    maximal_minimizer: UserSet
    method: str
    # squared norms of the Wolfe iterate after each major cycle
    norm_history: tuple[float, ...] = ()


def minimize_exhaustive(f: SetFunctionOracle, tol: float = TOL) -> SfmResult:
    ground = f.ground
    n = len(ground)
    if n > EXHAUSTIVE_LIMIT:
        raise GroundSetTooLarge(f"exhaustive scan supports at most {EXHAUSTIVE_LIMIT} elements, got {n}")
    size = ground.size
    masks = submasks(ground.mask)
    values = [f(UserSet(m, size)) for m in masks]
    best = min(values)
    lo, hi = ground.mask, 0
    for m, v in zip(masks, values):
        if v <= best + tol:
            lo &= m
            hi |= m
    minimal = UserSet(lo, size)
    return SfmResult(f(minimal), minimal, UserSet(hi, size), "exhaustive")


def _greedy(order: np.ndarray, elems: list[int], g, size: int) -> tuple[np.ndarray, list[float]]:
    """Edmonds' greedy vertex of B(g) for the given element order.

    Returns the vertex and g evaluated on every prefix of ``order``.
    """
    x = np.empty(len(elems))
    prefix = [0.0]
    mask = 0
    for k in order:
        mask |= 1 << (elems[k] - 1)
        prefix.append(g(UserSet(mask, size)))
        x[k] = prefix[-1] - prefix[-2]
    return x, prefix


def _affine_minimizer(B: np.ndarray) -> np.ndarray:
    """Weights a (sum 1) minimising |a @ B| over the affine hull of B's rows."""
    m = B.shape[0]
    K = np.zeros((m + 1, m + 1))
    K[:m, :m] = B @ B.T
    K[:m, m] = 1.0
    K[m, :m] = 1.0
    rhs = np.zeros(m + 1)
    rhs[m] = 1.0
    sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
    return sol[:m]


def minimize_min_norm(f: SetFunctionOracle, tol: float = TOL,
                      max_cycles: int = MAX_MAJOR_CYCLES) -> SfmResult:
    if tol <= 0:
        raise ValueError("tol must be positive")
    ground = f.ground
    size = ground.size
    elems = list(ground)
    n = len(elems)
    empty = UserSet(0, size)
    f0 = f(empty)
    if n == 0:
        return SfmResult(f0, empty, empty, "min-norm")

    def g(s: UserSet) -> float:
        return f(s) - f0

    # vertices are points of B(g); x = lam @ B is the current iterate
    x, _ = _greedy(np.arange(n), elems, g, size)
    scale = max(1.0, float(np.max(np.abs(x))))
    eps = 1e-12 * scale * scale
    B = x[None, :].copy()
    lam = np.array([1.0])
    norms = [float(x @ x)]
    converged = False
    for _ in range(max_cycles):
        q, _ = _greedy(np.argsort(x, kind="stable"), elems, g, size)
        if x @ x - x @ q <= eps:
            converged = True
            break
        if np.any(np.all(np.abs(B - q) <= 1e-15 * scale, axis=1)):
            converged = True
            break
        B = np.vstack([B, q])
        lam = np.append(lam, 0.0)
        while True:
            alpha = _affine_minimizer(B)
            if np.all(alpha > 1e-14):
                lam = alpha
                x = lam @ B
                break
            neg = np.flatnonzero(alpha <= 1e-14)
            denom = lam[neg] - alpha[neg]
            ratios = np.where(denom > 0, lam[neg] / np.where(denom > 0, denom, 1.0), 0.0)
            block = neg[np.argmin(ratios)]
            theta = min(1.0, float(ratios.min()))
            lam = theta * alpha + (1.0 - theta) * lam
            keep = lam > 1e-14
            keep[block] = False
            B, lam = B[keep], lam[keep]
            lam = lam / lam.sum()
            x = lam @ B
        norms.append(float(x @ x))
    if not converged:
        raise SolverError(f"min-norm point did not converge in {max_cycles} major cycles", x)

    # minimisers of g are prefixes of the ascending order of the min-norm point
    order = np.argsort(x, kind="stable")
    _, prefix = _greedy(order, elems, g, size)
    best = min(prefix)
    lower_bound = float(np.minimum(x, 0.0).sum())
    if best < lower_bound - max(tol, 1e-9 * scale):
        raise NotSubmodularError(
            f"set {best:.3g} below base-polytope dual bound {lower_bound:.3g}; f is not submodular")
    near = [k for k, v in enumerate(prefix) if v <= best + tol]
    masks = [0]
    for k in order:
        masks.append(masks[-1] | 1 << (elems[k] - 1))
    minimal = UserSet(masks[near[0]], size)
    maximal = UserSet(masks[near[-1]], size)
    return SfmResult(f(minimal), minimal, maximal, "min-norm", tuple(norms))


def minimize(f: SetFunctionOracle, solver: str = "auto", tol: float = TOL) -> SfmResult:
    """Dispatch on ``solver``: ``exhaustive``, ``minnorm`` or ``auto``."""
    if solver == "auto":
        solver = "exhaustive" if len(f.ground) <= AUTO_EXHAUSTIVE_MAX else "minnorm"
    if solver == "exhaustive":
        return minimize_exhaustive(f, tol)
    if solver in ("minnorm", "min-norm"):
        return minimize_min_norm(f, tol)
    raise ValueError(f"unknown solver {solver!r}")
