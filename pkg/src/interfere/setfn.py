"""Ground sets, receiver views and the information set functions.

Users are labelled 1..M.  A :class:`UserSet` is a bitmask over that ground
set (bit ``i - 1`` holds user ``i``).  All mutual informations are in bits.

Two channel families are supported:

* :class:`GaussianReceiverView` - additive Gaussian channel, stored with unit
  noise so that each user is described by its effective SNR h^2 P / N.
* :class:`BinaryAdderView` - modulo-2 adder with uniform binary inputs.

Both expose ``without(users)`` which conditions users out of the view
(their signals are known and subtracted at the receiver).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Iterator, Sequence, Union

TOL = 1e-9
MAX_USERS = 63

# subset-sum tables are materialised up to this many users
_TABLE_LIMIT = 16


class UserSet:
    """Immutable subset of the ground set {1..M}."""

    __slots__ = ("mask", "size")

    def __init__(self, mask: int, size: int):
        self.mask = mask
        self.size = size

    @classmethod
    def of(cls, size: int, members: Iterable[int] = ()) -> "UserSet":
        if not 0 <= size <= MAX_USERS:
            raise ValueError(f"ground size must be in 0..{MAX_USERS}, got {size}")
        mask = 0
        for i in members:
            if not 1 <= i <= size:
                raise ValueError(f"user {i} outside ground set 1..{size}")
            mask |= 1 << (i - 1)
        return cls(mask, size)

    @classmethod
    def full(cls, size: int) -> "UserSet":
        return cls.of(size, range(1, size + 1))

    @classmethod
    def empty(cls, size: int) -> "UserSet":
        return cls.of(size)

    def _check(self, other: "UserSet") -> None:
        if other.size != self.size:
            raise ValueError(f"ground size mismatch: {self.size} vs {other.size}")

    def __or__(self, other: "UserSet") -> "UserSet":
        self._check(other)
        return UserSet(self.mask | other.mask, self.size)

    def __and__(self, other: "UserSet") -> "UserSet":
        self._check(other)
        return UserSet(self.mask & other.mask, self.size)

    def __sub__(self, other: "UserSet") -> "UserSet":
        self._check(other)
        return UserSet(self.mask & ~other.mask, self.size)

    def complement(self) -> "UserSet":
        return UserSet(((1 << self.size) - 1) & ~self.mask, self.size)

    def issubset(self, other: "UserSet") -> bool:
        self._check(other)
        return self.mask & ~other.mask == 0

    __le__ = issubset

    def __contains__(self, i: int) -> bool:
        return 1 <= i <= self.size and bool(self.mask >> (i - 1) & 1)

    def __iter__(self) -> Iterator[int]:
        m, i = self.mask, 1
        while m:
            if m & 1:
                yield i
            m >>= 1
            i += 1

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    def __bool__(self) -> bool:
        return self.mask != 0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, UserSet):
            return NotImplemented
        return self.mask == other.mask and self.size == other.size

    def __hash__(self) -> int:
        return hash((self.mask, self.size))

    def __repr__(self) -> str:
        return f"UserSet({self.render()}, M={self.size})"

    def render(self) -> str:
        """Sorted index list, e.g. ``{2,3}``; the empty set is ``{}``."""
        return "{" + ",".join(str(i) for i in self) + "}"

    def add(self, i: int) -> "UserSet":
        return self | UserSet.of(self.size, [i])

    def discard(self, i: int) -> "UserSet":
        return self - UserSet.of(self.size, [i])

    def subsets(self, nonempty: bool = False) -> Iterator["UserSet"]:
        """All subsets in increasing mask order."""
        for sub in submasks(self.mask):
            if sub or not nonempty:
                yield UserSet(sub, self.size)


def submasks(mask: int) -> list[int]:
    """Submasks of ``mask`` in increasing numeric order (including 0)."""
    out = []
    sub = 0
    while True:
        out.append(sub)
        if sub == mask:
            return out
        sub = (sub - mask) & mask


def subset_sums(values: Sequence[float]) -> list[float]:
    """Table t with t[mask] = sum of values[i] over bits i of mask."""
    t = [0.0]
    for v in values:
        t += [x + v for x in t]
    return t


def _masked_sum(values: Sequence[float], mask: int) -> float:
    s = 0.0
    i = 0
    while mask:
        if mask & 1:
            s += values[i]
        mask >>= 1
        i += 1
    return s


def gamma(x: float) -> float:
    """Gaussian capacity 0.5 log2(1 + x) in bits per channel use."""
    if x < 0:
        raise ValueError(f"gamma is defined for x >= 0, got {x}")
    return 0.5 * math.log2(1.0 + x)


def gamma_inverse(r: float) -> float:
    """SNR needed for rate ``r``: 2^(2r) - 1."""
    return math.expm1(2.0 * r * math.log(2.0))


@dataclass(frozen=True)
class RateVector:
    """Nonnegative per-user rates (bits/channel use), users 1..M."""

    rates: tuple[float, ...]

    def __post_init__(self):
        rates = tuple(float(r) for r in self.rates)
        for i, r in enumerate(rates, 1):
            if not r >= 0 or math.isinf(r):
                raise ValueError(f"rate of user {i} must be finite and nonnegative, got {r}")
        object.__setattr__(self, "rates", rates)

    @classmethod
    def zeros(cls, size: int) -> "RateVector":
        return cls((0.0,) * size)

    @classmethod
    def for_interferers(cls, size: int, intended: int, values: Sequence[float]) -> "RateVector":
        """Full-length vector from interferer rates listed in index order; the
        intended user's own entry is 0."""
        values = list(values)
        if len(values) != size - 1:
            raise ValueError(f"expected {size - 1} interferer rates, got {len(values)}")
        values.insert(intended - 1, 0.0)
        return cls(tuple(values))

    @property
    def size(self) -> int:
        return len(self.rates)

    def __getitem__(self, i: int) -> float:
        """Rate of user ``i`` (1-based)."""
        if not 1 <= i <= len(self.rates):
            raise IndexError(f"user {i} outside 1..{len(self.rates)}")
        return self.rates[i - 1]

    @cached_property
    def _table(self) -> list[float] | None:
        return subset_sums(self.rates) if len(self.rates) <= _TABLE_LIMIT else None

    def total(self, users: UserSet) -> float:
        """R(U), the modular sum over ``users``."""
        if users.size != len(self.rates):
            raise ValueError(f"set over {users.size} users used with {len(self.rates)} rates")
        t = self._table
        return t[users.mask] if t is not None else _masked_sum(self.rates, users.mask)

    def replace(self, i: int, value: float) -> "RateVector":
        r = list(self.rates)
        r[i - 1] = value
        return RateVector(tuple(r))


@dataclass(frozen=True)
class GaussianReceiverView:
    """One receiver's view: effective powers h^2 P / N with noise normalised to 1."""

    effective_powers: tuple[float, ...]
    intended_user: int | None = None

    def __post_init__(self):
        p = tuple(float(x) for x in self.effective_powers)
        if len(p) > MAX_USERS:
            raise ValueError(f"at most {MAX_USERS} users supported")
        for i, x in enumerate(p, 1):
            if not x >= 0 or math.isinf(x):
                raise ValueError(f"effective power of user {i} must be finite and >= 0, got {x}")
        if self.intended_user is not None and not 1 <= self.intended_user <= len(p):
            raise ValueError(f"intended user {self.intended_user} outside 1..{len(p)}")
        object.__setattr__(self, "effective_powers", p)

    @classmethod
    def from_powers(cls, powers: Sequence[float], noise: float = 1.0,
                    intended_user: int | None = None) -> "GaussianReceiverView":
        if noise <= 0:
            raise ValueError(f"noise must be positive, got {noise}")
        return cls(tuple(p / noise for p in powers), intended_user)

    @property
    def size(self) -> int:
        return len(self.effective_powers)

    @property
    def ground(self) -> UserSet:
        return UserSet.full(self.size)

    @cached_property
    def _table(self) -> list[float] | None:
        if self.size <= _TABLE_LIMIT:
            return subset_sums(self.effective_powers)
        return None

    def power(self, users: UserSet) -> float:
        t = self._table
        return t[users.mask] if t is not None else _masked_sum(self.effective_powers, users.mask)

    def without(self, users: UserSet) -> "GaussianReceiverView":
        """Condition ``users`` out: their signals are known and removed."""
        p = tuple(0.0 if i in users else x for i, x in enumerate(self.effective_powers, 1))
        return GaussianReceiverView(p, self.intended_user)


@dataclass(frozen=True)
class BinaryAdderView:
    """y = x_1 xor ... xor x_M with uniform binary inputs.

    ``removed`` holds users already decoded and cancelled at the receiver.
    """

    ground_size: int
    intended_user: int | None = None
    removed: int = 0

    def __post_init__(self):
        if not 1 <= self.ground_size <= MAX_USERS:
            raise ValueError(f"ground size must be in 1..{MAX_USERS}")
        if self.intended_user is not None and not 1 <= self.intended_user <= self.ground_size:
            raise ValueError(f"intended user {self.intended_user} outside 1..{self.ground_size}")

    @property
    def size(self) -> int:
        return self.ground_size

    @property
    def ground(self) -> UserSet:
        return UserSet.full(self.size)

    @property
    def active(self) -> UserSet:
        return UserSet(self.ground.mask & ~self.removed, self.size)

    def without(self, users: UserSet) -> "BinaryAdderView":
        return BinaryAdderView(self.ground_size, self.intended_user, self.removed | users.mask)


View = Union[GaussianReceiverView, BinaryAdderView]


def _validate(view: View, context: UserSet, sub: UserSet) -> None:
    if context.size != view.size or sub.size != view.size:
        raise ValueError(f"sets must be over the view's {view.size} users")
    if sub.mask & ~context.mask:
        raise ValueError(f"{sub.render()} is not contained in context {context.render()}")


def sigma(view: View, context: UserSet, V: UserSet) -> float:
    """I(X_V; Y | X_{context \\ V}), users outside ``context`` acting as noise."""
    _validate(view, context, V)
    if not V.mask:
        return 0.0
    if isinstance(view, GaussianReceiverView):
        noise = view.power(context.complement())
        return gamma(view.power(V) / (1.0 + noise))
    active = view.active.mask
    if not V.mask & active:
        return 0.0
    # an undecoded uniform bit makes the output independent of X_V
    return 0.0 if active & ~context.mask else 1.0


def rho(view: View, context: UserSet, U: UserSet) -> float:
    """I(X_U; Y) with the rest of ``context`` undecoded and the outside as noise."""
    _validate(view, context, U)
    if not U.mask:
        return 0.0
    if isinstance(view, GaussianReceiverView):
        return gamma(view.power(U) / (1.0 + view.power(U.complement())))
    active = view.active.mask
    if not U.mask & active:
        return 0.0
    return 0.0 if active & ~U.mask else 1.0


def decode_gap(view: View, context: UserSet, rates: RateVector, V: UserSet) -> float:
    """sigma(V) - R(V): negative iff the MAC constraint on V is violated."""
    return sigma(view, context, V) - rates.total(V)


@dataclass(frozen=True)
class SetFunctionOracle:
    """A set function over the subsets of ``ground``."""

    evaluate: Callable[[UserSet], float]
    ground: UserSet
    name: str = field(default="", compare=False)

    def __call__(self, s: UserSet) -> float:
        return self.evaluate(s)


def decode_gap_oracle(view: View, context: UserSet, rates: RateVector) -> SetFunctionOracle:
    return SetFunctionOracle(lambda V: decode_gap(view, context, rates, V), context, "decode_gap")
