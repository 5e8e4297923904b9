r"""Discrete fractional calculus on the uniform grid :math:`a + h\mathbb{N}_0`.

Scalar gamma-ratio functions, difference/sum operators on finite sampled
sequences, the Caputo h-difference, and the two binomial kernel families

.. math::

    \varphi_{k,s}(nh) = \binom{n-k+\mu}{n-k} h^{\mu}\ (n \ge k), \qquad
    \tilde\varphi_{k,s}(mh) = \binom{m+\mu-1}{m} h^{\mu}\ (m \ge 0),

with :math:`\mu = k\alpha + s\beta`.

Isolated evaluations use log-gamma differences (a Stirling-series
difference for large arguments, which keeps full relative accuracy where
two nearly equal ``lgamma`` values would cancel); tables and sum weights
are built from the multiplicative recurrence in the grid index. The two
routes are kept apart on purpose so they can check each other.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np

from seqfrac.errors import (
    FracDomainError,
    FracOverflowError,
    KernelBudgetError,
    SequenceLengthError,
)

POLE_TOL = 1e-9
_LOG_MAX = math.log(np.finfo(float).max)


# --------------------------------------------------------------------------
# grid and sequence containers


@dataclass(frozen=True)
class StepGrid:
    """Grid points ``a + n*h`` for ``n = 0..N``."""

    h: float
    a: float = 0.0
    N: int = 0

    def __post_init__(self) -> None:
        if not self.h > 0:
            raise FracDomainError(f"step h must be positive, got {self.h}")
        if self.N < 0:
            raise FracDomainError(f"horizon N must be nonnegative, got {self.N}")

    def times(self) -> np.ndarray:
        return self.a + self.h * np.arange(self.N + 1)

    def sigma(self, t: float) -> float:
        """Forward jump ``t -> t + h``."""
        return t + self.h


@dataclass(frozen=True)
class FracOrderPair:
    """Orders ``alpha`` and ``beta`` of the two sequential Caputo differences."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise FracDomainError(f"{name} must lie in (0, 1], got {v}")

    def offsets(self, h: float) -> tuple[float, float]:
        """Grid offsets ``a = (alpha-1) h`` and ``b = (beta-1) h``."""
        return (self.alpha - 1.0) * h, (self.beta - 1.0) * h

    def mu(self, k: int, s: int) -> float:
        return k * self.alpha + s * self.beta


@dataclass(frozen=True)
class SampledSequence:
    """Values of a (scalar or vector) function on a :class:`StepGrid`.

    ``values`` has shape ``(N+1,)`` or ``(N+1, dim)``.
    """

    grid: StepGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.ndim not in (1, 2):
            raise ValueError("values must be 1-d or 2-d")
        if values.shape[0] != self.grid.N + 1:
            raise SequenceLengthError(
                f"expected {self.grid.N + 1} samples, got {values.shape[0]}"
            )
        object.__setattr__(self, "values", values)

    @classmethod
    def from_values(cls, values, h: float, a: float = 0.0) -> SampledSequence:
        values = np.asarray(values, dtype=float)
        if values.shape[0] == 0:
            raise SequenceLengthError("a sampled sequence needs at least one value")
        return cls(StepGrid(h=h, a=a, N=values.shape[0] - 1), values)

    @property
    def h(self) -> float:
        return self.grid.h

    def __len__(self) -> int:
        return self.values.shape[0]


# --------------------------------------------------------------------------
# gamma-ratio functions


def _nonpositive_integer(x: float) -> bool:
    r = round(x)
    return r <= 0 and abs(x - r) < POLE_TOL


def _gamma_sign(x: float) -> float:
    if x > 0:
        return 1.0
    return -1.0 if math.ceil(-x) % 2 else 1.0


def _exp_checked(logv: float, what: str) -> float:
    if logv > _LOG_MAX:
        raise FracOverflowError(f"{what} overflows double precision (log = {logv:.1f})")
    return math.exp(logv)


def _stirling_tail(z: float) -> float:
    z2 = z * z
    return (
        1.0 / 12.0
        - (1.0 / 360.0 - (1.0 / 1260.0 - (1.0 / 1680.0 - 1.0 / (1188.0 * z2)) / z2) / z2) / z2
    ) / z


def log_gamma_ratio(base: float, shift: float) -> float:
    """``lnGamma(base + shift) - lnGamma(base)`` for positive arguments.

    Large arguments use the Stirling form of the difference, which avoids
    subtracting two nearly equal log-gamma values.
    """
    top = base + shift
    if min(base, top) < 20.0:
        return math.lgamma(top) - math.lgamma(base)
    return (
        (top - 0.5) * math.log1p(shift / base)
        + shift * (math.log(base) - 1.0)
        + (_stirling_tail(top) - _stirling_tail(base))
    )


def h_factorial(t: float, order: float, h: float) -> float:
    r"""h-factorial power :math:`t^{(\nu)}_h = h^\nu \Gamma(t/h+1)/\Gamma(t/h+1-\nu)`.

    A pole in the denominator gamma yields exactly 0. A pole in the
    numerator (``t/h`` a negative integer) raises :class:`FracDomainError`.
    """
    if not h > 0:
        raise FracDomainError(f"h must be positive, got {h}")
    x = t / h
    num = x + 1.0
    den = x + 1.0 - order
    if _nonpositive_integer(num):
        raise FracDomainError(f"t/h = {x} is a negative integer")
    if _nonpositive_integer(den):
        return 0.0
    if order == 0:
        return 1.0
    if den > 0:
        logv = order * math.log(h) + log_gamma_ratio(den, order)
    else:
        logv = order * math.log(h) + math.lgamma(num) - math.lgamma(den)
    return _gamma_sign(num) * _gamma_sign(den) * _exp_checked(logv, "h_factorial")


def gen_binomial(a: float, b: float) -> float:
    """Generalized binomial ``Gamma(a+1) / (Gamma(b+1) Gamma(a-b+1))``.

    Returns 0 when either denominator gamma sits at a pole.
    """
    num = a + 1.0
    d1 = b + 1.0
    d2 = a - b + 1.0
    if _nonpositive_integer(num):
        raise FracDomainError(f"gen_binomial: a = {a} puts the numerator at a pole")
    if _nonpositive_integer(d1) or _nonpositive_integer(d2):
        return 0.0
    if d1 > 0 and d2 > 0:
        # pair the numerator with the larger denominator argument
        big, small = (d1, d2) if d1 >= d2 else (d2, d1)
        logv = log_gamma_ratio(big, num - big) - math.lgamma(small)
    else:
        logv = math.lgamma(num) - math.lgamma(d1) - math.lgamma(d2)
    sign = _gamma_sign(num) * _gamma_sign(d1) * _gamma_sign(d2)
    return sign * _exp_checked(logv, "gen_binomial")


# --------------------------------------------------------------------------
# sequence operators


def forward_diff(x: SampledSequence) -> SampledSequence:
    """Forward h-difference ``(x(t+h) - x(t)) / h``; one sample shorter."""
    if len(x) < 2:
        raise SequenceLengthError("forward difference needs at least 2 samples")
    g = x.grid
    return SampledSequence(StepGrid(g.h, g.a, g.N - 1), np.diff(x.values, axis=0) / g.h)


def h_sum(x: SampledSequence, n: int):
    """h-difference sum ``h * sum_{k<n} x(a+kh)``, the value at ``t = a + n h``."""
    if n < 0 or n > len(x):
        raise IndexError(f"h_sum index n={n} outside 0..{len(x)}")
    return x.h * x.values[:n].sum(axis=0)


def sum_weights(order: float, length: int) -> np.ndarray:
    """Weights ``binom(j+order-1, j)`` for ``j = 0..length-1`` by recurrence."""
    if length <= 0:
        return np.empty(0)
    j = np.arange(1, length, dtype=float)
    w = np.empty(length)
    w[0] = 1.0
    w[1:] = np.cumprod((j - 1.0 + order) / j)
    return w


def _check_order(order: float) -> None:
    if not order > 0:
        raise FracDomainError(
            f"fractional sum order must be positive, got {order}; order 0 is the identity"
        )


def frac_sum(x: SampledSequence, order: float, n: int):
    r"""Fractional h-sum of positive ``order``.

    Returns the value at ``t = a + (order + n) h``:
    :math:`h^\nu \sum_{k=0}^{n} \binom{n-k+\nu-1}{n-k} x(a+kh)`.
    """
    _check_order(order)
    if n < 0 or n > x.grid.N:
        raise IndexError(f"frac_sum index n={n} outside 0..{x.grid.N}")
    w = sum_weights(order, n + 1)[::-1]
    return x.h**order * np.tensordot(w, x.values[: n + 1], axes=(0, 0))


def frac_sum_all(values, order: float, h: float) -> np.ndarray:
    """All values of the order-``order`` sum, index ``n = 0..len-1``.

    ``values`` may be 1-d or ``(len, dim)``; the result has the same shape.
    """
    _check_order(order)
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    w = sum_weights(order, n) * h**order
    if values.ndim == 1:
        return np.convolve(w, values)[:n]
    return np.stack([np.convolve(w, values[:, d])[:n] for d in range(values.shape[1])], axis=1)


def caputo_diff(x: SampledSequence, order: float, n: int):
    """Caputo h-difference of ``order`` in (0, 1] at ``t = a + (1-order) h + n h``."""
    if not 0.0 < order <= 1.0:
        raise FracDomainError(f"Caputo order must lie in (0, 1], got {order}")
    if len(x) < n + 2:
        raise SequenceLengthError(f"caputo_diff at n={n} needs {n + 2} samples, got {len(x)}")
    g = x.grid
    dx = SampledSequence(StepGrid(g.h, g.a, n), np.diff(x.values[: n + 2], axis=0) / g.h)
    if order == 1.0:
        return dx.values[n]
    return frac_sum(dx, 1.0 - order, n)


def caputo_diff_all(values, order: float, h: float) -> np.ndarray:
    """Caputo h-difference at every admissible index (one fewer than samples)."""
    if not 0.0 < order <= 1.0:
        raise FracDomainError(f"Caputo order must lie in (0, 1], got {order}")
    values = np.asarray(values, dtype=float)
    if values.shape[0] < 2:
        raise SequenceLengthError("Caputo difference needs at least 2 samples")
    dx = np.diff(values, axis=0) / h
    if order == 1.0:
        return dx
    return frac_sum_all(dx, 1.0 - order, h)


# --------------------------------------------------------------------------
# kernel families


def phi(k: int, s: int, n: int, orders: FracOrderPair, h: float) -> float:
    """Homogeneous-response kernel; zero for ``n < k``."""
    if k < 0 or s < 0:
        raise FracDomainError("phi needs k, s >= 0")
    if n < k:
        return 0.0
    mu = orders.mu(k, s)
    j = n - k
    logv = log_gamma_ratio(j + 1.0, mu) - math.lgamma(mu + 1.0)
    return _exp_checked(logv + mu * math.log(h), "phi")


def phi_tilde(k: int, s: int, m: int, orders: FracOrderPair, h: float) -> float:
    """Convolution kernel; zero for ``m < 0``. Undefined for ``k = s = 0``."""
    if k < 0 or s < 0 or k + s == 0:
        raise FracDomainError("phi_tilde needs k, s >= 0 with k + s >= 1")
    if m < 0:
        return 0.0
    mu = orders.mu(k, s)
    logv = log_gamma_ratio(m + 1.0, mu - 1.0) - math.lgamma(mu)
    return _exp_checked(logv + mu * math.log(h), "phi_tilde")


def _ratio_row(mu: float, shift: float, length: int, h: float) -> np.ndarray:
    # row[j] = h^mu * prod_{i=1..j} (i - 1 + shift + mu) / i
    seed = h**mu
    row = np.empty(length)
    if length == 0:
        return row
    row[0] = seed
    if length > 1:
        i = np.arange(1, length, dtype=float)
        with np.errstate(over="ignore", invalid="ignore"):
            row[1:] = seed * np.cumprod((i - 1.0 + shift + mu) / i)
    if not np.all(np.isfinite(row)):
        raise FracOverflowError(f"kernel row with mu={mu} overflows")
    return row


@dataclass(frozen=True, eq=False)
class KernelTable:
    """Memoized ``phi`` and ``phi_tilde`` rows on ``n = 0..max_n``.

    Rows are built on first access from the ratio recurrence and are
    read-only afterwards. ``max_k`` bounds both ``k`` and ``s``.
    """

    orders: FracOrderPair
    h: float
    max_k: int
    max_n: int
    budget: int = 1 << 25
    _rows: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __post_init__(self) -> None:
        if self.max_k < 0 or self.max_n < 0:
            raise FracDomainError("max_k and max_n must be nonnegative")
        if not self.h > 0:
            raise FracDomainError(f"h must be positive, got {self.h}")

    def _row(self, kind: str, k: int, s: int) -> np.ndarray:
        if not (0 <= k <= self.max_k and 0 <= s <= self.max_k):
            raise IndexError(f"(k, s) = ({k}, {s}) outside table bound {self.max_k}")
        key = (kind, k, s)
        row = self._rows.get(key)
        if row is not None:
            return row
        with self._lock:
            row = self._rows.get(key)
            if row is not None:
                return row
            if (len(self._rows) + 1) * (self.max_n + 1) > self.budget:
                raise KernelBudgetError(
                    f"kernel table would exceed {self.budget} entries"
                )
            mu = self.orders.mu(k, s)
            n = self.max_n + 1
            if kind == "phi":
                row = np.zeros(n)
                if k < n:
                    row[k:] = _ratio_row(mu, 1.0, n - k, self.h)
            else:
                if k + s == 0:
                    raise FracDomainError("phi_tilde needs k + s >= 1")
                row = _ratio_row(mu, 0.0, n, self.h)
            row.setflags(write=False)
            self._rows[key] = row
            return row

    def phi_row(self, k: int, s: int) -> np.ndarray:
        return self._row("phi", k, s)

    def phi_tilde_row(self, k: int, s: int) -> np.ndarray:
        return self._row("phi_tilde", k, s)

    def phi(self, k: int, s: int, n: int) -> float:
        if n < 0:
            return 0.0
        return float(self.phi_row(k, s)[n])

    def phi_tilde(self, k: int, s: int, m: int) -> float:
        if m < 0:
            return 0.0
        return float(self.phi_tilde_row(k, s)[m])


def kernel_table(orders: FracOrderPair, h: float, max_k: int, max_n: int, **kw) -> KernelTable:
    return KernelTable(orders, h, max_k, max_n, **kw)
