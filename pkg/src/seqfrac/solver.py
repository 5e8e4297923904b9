r"""Initial-value problems for sequential Caputo h-difference systems.

The system is

.. math::

    ({}_a\Delta^\alpha_{h,*} x)(nh) = y(nh+b), \qquad
    ({}_b\Delta^\beta_{h,*} y)(nh) = f(nh, x(nh+a)),

with ``x(a) = x_a`` and ``(Delta^alpha x)(0) = x_0``, ``a = (alpha-1)h``,
``b = (beta-1)h``. Three solution routes are provided: the explicit
memory recursion (any right-hand side), the finite matrix-power series for
``f = A x``, and the series with a forced part for ``f = A x + gamma``.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Union

import numba
import numpy as np

from seqfrac.errors import (
    FracDomainError,
    NonFiniteStateError,
    SeriesOverflowError,
    TruncationNotConvergedError,
)
from seqfrac import _ddarith as dd
from seqfrac.frac_core import FracOrderPair, KernelTable, frac_sum_all


class SeriesDivergenceWarning(RuntimeWarning):
    """Spectral radius of ``A h^(alpha+beta)`` is at least 1."""


# --------------------------------------------------------------------------
# problem description


@dataclass(frozen=True)
class Linear:
    A: np.ndarray


@dataclass(frozen=True)
class Semilinear:
    A: np.ndarray
    gamma: np.ndarray  # shape (>= N+1, dim), samples gamma(nh)


@dataclass(frozen=True)
class General:
    f: Callable[[float, np.ndarray], np.ndarray]


Rhs = Union[Linear, Semilinear, General]


@dataclass(frozen=True)
class SystemSpec:
    dim: int
    orders: FracOrderPair
    h: float
    horizon: int
    rhs: Rhs
    x_a: np.ndarray
    x_0: np.ndarray

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if not self.h > 0:
            raise FracDomainError(f"h must be positive, got {self.h}")
        if self.horizon < 0:
            raise ValueError("horizon must be nonnegative")
        x_a = np.array(self.x_a, dtype=float).reshape(-1)
        x_0 = np.array(self.x_0, dtype=float).reshape(-1)
        if x_a.shape != (self.dim,) or x_0.shape != (self.dim,):
            raise ValueError(f"x_a and x_0 must have length {self.dim}")
        object.__setattr__(self, "x_a", x_a)
        object.__setattr__(self, "x_0", x_0)
        rhs = self.rhs
        if isinstance(rhs, (Linear, Semilinear)):
            A = np.array(rhs.A, dtype=float)
            if A.shape != (self.dim, self.dim):
                raise ValueError(f"A must be {self.dim}x{self.dim}, got {A.shape}")
            if isinstance(rhs, Linear):
                rhs = Linear(A)
            else:
                gamma = _sample_gamma(rhs.gamma, self.dim, self.horizon)
                rhs = Semilinear(A, gamma)
            object.__setattr__(self, "rhs", rhs)
        elif not isinstance(rhs, General):
            raise TypeError(f"unsupported right-hand side {type(rhs).__name__}")

    @property
    def offsets(self) -> tuple[float, float]:
        return self.orders.offsets(self.h)

    def f(self, n: int, x: np.ndarray) -> np.ndarray:
        """Right-hand side at grid index ``n`` (time ``n h``)."""
        rhs = self.rhs
        if isinstance(rhs, Linear):
            return rhs.A @ x
        if isinstance(rhs, Semilinear):
            return rhs.A @ x + rhs.gamma[n]
        return np.asarray(rhs.f(n * self.h, x), dtype=float).reshape(self.dim)


def _sample_gamma(gamma, dim: int, horizon: int) -> np.ndarray:
    g = np.array(gamma, dtype=float)
    if g.ndim == 0 or (g.ndim == 1 and g.shape[0] == 1):
        g = np.full((horizon + 1, dim), float(g.reshape(-1)[0]))
    elif g.ndim == 1 and dim == 1:
        g = g.reshape(-1, 1)
    elif g.ndim == 1 and g.shape[0] == dim:
        g = np.tile(g, (horizon + 1, 1))
    if g.ndim != 2 or g.shape[1] != dim:
        raise ValueError(f"gamma must be a constant, a length-{dim} vector or (N+1, {dim}) samples")
    if g.shape[0] < horizon + 1:
        raise ValueError(f"gamma has {g.shape[0]} samples, need at least {horizon + 1}")
    g = g[: horizon + 1].copy()
    g.setflags(write=False)
    return g


@dataclass
class Trajectory:
    alpha: float
    beta: float
    h: float
    states: np.ndarray  # (N+1, dim), x(nh + a)
    aux: np.ndarray | None = None  # (N+1, dim), y(nh + b)

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @property
    def horizon(self) -> int:
        return self.states.shape[0] - 1

    @property
    def n(self) -> np.ndarray:
        return np.arange(self.states.shape[0])

    @property
    def times(self) -> np.ndarray:
        a = (self.alpha - 1.0) * self.h
        return self.n * self.h + a

    @property
    def aux_times(self) -> np.ndarray:
        b = (self.beta - 1.0) * self.h
        return self.n * self.h + b


def _trajectory(spec: SystemSpec, states: np.ndarray) -> Trajectory:
    return Trajectory(spec.orders.alpha, spec.orders.beta, spec.h, states)


class KernelVariant(enum.Enum):
    CORRECTED = "corrected"
    LITERAL = "literal"


@dataclass(frozen=True)
class SeriesOptions:
    kernel_variant: KernelVariant = KernelVariant.CORRECTED
    truncation_tol: float = 1e-12
    max_terms: int | None = None  # default 10 N + 50
    compensated: bool = True  # double-double summation of the matrix-power series

    def __post_init__(self) -> None:
        if not self.truncation_tol > 0:
            raise ValueError("truncation_tol must be positive")
        if self.max_terms is not None and self.max_terms < 1:
            raise ValueError("max_terms must be positive")

    def terms_for(self, horizon: int) -> int:
        return self.max_terms if self.max_terms is not None else 10 * horizon + 50


def _table(spec: SystemSpec, max_k: int) -> KernelTable:
    return KernelTable(spec.orders, spec.h, max_k, spec.horizon)


# --------------------------------------------------------------------------
# explicit recursion


def solve_recursive(
    spec: SystemSpec, table: KernelTable | None = None, forcing_lag: int = 1
) -> Trajectory:
    r"""Explicit memory recursion

    .. math::

        x(nh+a) = x_a + \varphi_{1,0}(nh) x_0
            + \sum_{r} \tilde\varphi_{1,1}((n-r-\ell)h) f(rh, x(rh+a)),

    with forcing lag :math:`\ell`. The default ``forcing_lag=1`` is the
    classical form, whose first step is
    ``x(h+a) = x_a + h^alpha x_0 + h^(alpha+beta) f(0, x_a)``.
    ``forcing_lag=2`` delays the forcing one more step; that trajectory
    keeps ``(Delta^alpha x)(0) = x_0`` exactly and reduces to the explicit
    Euler pair ``x += h y; y += h f`` when ``alpha = beta = 1``.

    Each ``f`` value is computed once and cached; cost is ``O(N^2 dim)``.
    """
    if forcing_lag not in (1, 2):
        raise ValueError("forcing_lag must be 1 or 2")
    N, dim = spec.horizon, spec.dim
    if table is None:
        table = _table(spec, 1)
    phi10 = table.phi_row(1, 0)[: N + 1]
    rker = table.phi_tilde_row(1, 1)[: N + 1][::-1].copy()  # rker[N - m] = phi~(m)

    if isinstance(spec.rhs, (Linear, Semilinear)):
        A = spec.rhs.A
        gamma = spec.rhs.gamma if isinstance(spec.rhs, Semilinear) else np.zeros((N + 1, dim))
        states = np.empty((N + 1, dim))
        bad = _affine_recursion(A, gamma, spec.x_a, spec.x_0, phi10, rker, forcing_lag, states)
        if bad >= 0:
            raise NonFiniteStateError(bad)
        return _trajectory(spec, states)

    states = np.empty((N + 1, dim))
    forcing = np.empty((N + 1, dim))
    states[0] = spec.x_a
    forcing[0] = _checked_f(spec, 0, states[0])
    for n in range(1, N + 1):
        m = n - forcing_lag + 1  # number of forcing samples that enter
        x = spec.x_a + phi10[n] * spec.x_0
        if m > 0:
            x = x + rker[N + 1 - m :] @ forcing[:m]
        if not np.all(np.isfinite(x)):
            raise NonFiniteStateError(n)
        states[n] = x
        forcing[n] = _checked_f(spec, n, x)
    return _trajectory(spec, states)


@numba.njit(cache=True)
def _affine_recursion(A, gamma, x_a, x_0, phi10, rker, lag, states):
    # f(nh, x) = A x + gamma(n); returns first non-finite step or -1
    N = states.shape[0] - 1
    dim = states.shape[1]
    forcing = np.empty((N + 1, dim))
    acc = np.empty(dim)
    for n in range(N + 1):
        if n == 0:
            for d in range(dim):
                states[0, d] = x_a[d]
        else:
            for d in range(dim):
                acc[d] = 0.0
            m = n - lag + 1
            off = N + 1 - m
            for r in range(m):
                w = rker[off + r]
                for d in range(dim):
                    acc[d] += w * forcing[r, d]
            for d in range(dim):
                v = x_a[d] + phi10[n] * x_0[d] + acc[d]
                if not np.isfinite(v):
                    return n
                states[n, d] = v
        for i in range(dim):
            v = gamma[n, i]
            for j in range(dim):
                v += A[i, j] * states[n, j]
            if not np.isfinite(v):
                return n
            forcing[n, i] = v
    return -1


def _checked_f(spec: SystemSpec, n: int, x: np.ndarray) -> np.ndarray:
    v = spec.f(n, x)
    if not np.all(np.isfinite(v)):
        raise NonFiniteStateError(n, "right-hand side")
    return v


# --------------------------------------------------------------------------
# series solutions


def _matrix_powers(A: np.ndarray, count: int):
    P = np.eye(A.shape[0])
    for k in range(count):
        if k > 0:
            P = A @ P
            if not np.all(np.isfinite(P)):
                raise SeriesOverflowError(k)
        yield k, P


def _homogeneous(spec: SystemSpec, A: np.ndarray, table: KernelTable) -> np.ndarray:
    # phi(k,k,n) = 0 for k > n and phi(k+1,k,n) = 0 for k >= n: exact finite sum
    N = spec.horizon
    out = np.zeros((N + 1, spec.dim))
    for k, P in _matrix_powers(A, N + 1):
        out += np.outer(table.phi_row(k, k), P @ spec.x_a)
        out += np.outer(table.phi_row(k + 1, k), P @ spec.x_0)
    return out


# Compensated evaluation. The monomial series alternates in sign and its
# terms outgrow the solution by many orders of magnitude, so it is summed in
# double-double. Kernel parameters are taken bit-for-bit from the values the
# recursion uses (h^alpha, h^(alpha+beta), alpha+beta), so both routes solve
# the same discrete problem.


class _SeriesTerms:
    """Matrix powers of ``h^(alpha+beta) A`` and binomial rows, in double-double."""

    def __init__(self, spec: SystemSpec, A: np.ndarray) -> None:
        o = spec.orders
        self.N = spec.horizon
        self.dim = spec.dim
        self.alpha = o.mu(1, 0)
        self.s = o.mu(1, 1)
        self.c = spec.h**self.s
        self.h_alpha = spec.h**self.alpha
        B = dd.two_prod(self.c, np.asarray(A, dtype=float))
        self.powers = [dd.from_float(np.eye(self.dim))]
        for k in range(1, self.N + 1):
            P = dd.matmul(B, self.powers[-1])
            if not np.all(np.isfinite(P[0])):
                raise SeriesOverflowError(k)
            self.powers.append(P)

    def _mu(self, offset_k: int, plus_alpha: bool):
        k = np.arange(self.N + 1, dtype=float) + offset_k
        mu = dd.two_prod(k, self.s)
        if plus_alpha:
            mu = dd.add(mu, dd.from_float(np.full(k.shape, self.alpha)))
        return mu

    def binomial_rows(self, mu, shift: float):
        """``T[k, j] = binom(j + shift - 1 + mu_k, j)`` for ``j = 0..N``."""
        K, L = mu[0].shape[0], self.N + 1
        hi, lo = np.ones((K, L)), np.zeros((K, L))
        row = dd.from_float(np.ones(K))
        for j in range(1, L):
            num = dd.add(mu, dd.from_float(np.full(K, j - 1.0 + shift)))
            row = dd.div_scalar(dd.mul(row, num), float(j))
            hi[:, j], lo[:, j] = row
        return hi, lo

    def accumulate(self, rows, lag: int):
        """``M[n] = sum_k rows[k, n - k - lag] P_k`` as a dd array ``(N+1, d, d)``."""
        N, d = self.N, self.dim
        acc = dd.from_float(np.zeros((N + 1, d, d)))
        for k in range(N + 1 - lag):
            span = N + 1 - k - lag
            coef = (rows[0][k, :span, None, None], rows[1][k, :span, None, None])
            P = self.powers[k]
            term = dd.mul(coef, (P[0][None], P[1][None]))
            part = dd.add((acc[0][k + lag :], acc[1][k + lag :]), term)
            acc[0][k + lag :], acc[1][k + lag :] = part
        return acc

    def homogeneous(self, x_a: np.ndarray, x_0: np.ndarray) -> np.ndarray:
        Ha = self.accumulate(self.binomial_rows(self._mu(0, False), 1.0), 0)
        H0 = self.accumulate(self.binomial_rows(self._mu(0, True), 1.0), 1)
        H0 = dd.mul(H0, dd.from_float(self.h_alpha))
        return dd.to_float(dd.add(_dd_matvec(Ha, x_a), _dd_matvec(H0, x_0)))

    def forced_kernel(self) -> np.ndarray:
        """Matrix impulse response ``G(m) = sum_k A^k phi~_(k+1)(k+1)((m-k-1)h)``."""
        G = self.accumulate(self.binomial_rows(self._mu(1, False), 0.0), 1)
        return dd.to_float(dd.mul(G, dd.from_float(self.c)))


def _dd_matvec(M, v: np.ndarray):
    acc = dd.from_float(np.zeros(M[0].shape[:2]))
    for j in range(v.shape[0]):
        acc = dd.add(acc, dd.mul((M[0][:, :, j], M[1][:, :, j]), dd.from_float(v[j])))
    return acc


def _forced_from_kernel(G: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    N = G.shape[0] - 1
    out = np.zeros((N + 1, G.shape[1]))
    for r in range(N):
        out[r + 1 :] += G[1 : N + 1 - r] @ gamma[r]
    return out


def solve_linear_series(
    spec: SystemSpec, table: KernelTable | None = None, compensated: bool = True
) -> Trajectory:
    """Matrix-power series ``sum_k A^k (phi_kk x_a + phi_(k+1)k x_0)`` for ``f = A x``.

    ``compensated=False`` sums the terms in plain double precision, which
    loses all accuracy once the terms dwarf the solution.
    """
    if not isinstance(spec.rhs, Linear):
        raise TypeError("solve_linear_series needs a Linear right-hand side")
    A = spec.rhs.A
    if compensated:
        states = _SeriesTerms(spec, A).homogeneous(spec.x_a, spec.x_0)
    else:
        if table is None:
            table = _table(spec, spec.horizon + 1)
        states = _homogeneous(spec, A, table)
    states[0] = spec.x_a
    return _trajectory(spec, states)


def _causal_conv(kernel: np.ndarray, gamma: np.ndarray, shift: int) -> np.ndarray:
    """``out[n] = sum_r kernel[n - shift - r] gamma[r]`` over ``n = 0..len-1``."""
    length, dim = gamma.shape
    out = np.zeros((length, dim))
    if shift >= length:
        return out
    span = length - shift
    for d in range(dim):
        out[shift:, d] = np.convolve(kernel[:span], gamma[:span, d])[:span]
    return out


def spectral_radius(M: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(M)))) if M.size else 0.0


def _forced_corrected(spec: SystemSpec, A, gamma, table: KernelTable) -> np.ndarray:
    N = spec.horizon
    out = np.zeros((N + 1, spec.dim))
    for k, P in _matrix_powers(A, N):
        conv = _causal_conv(table.phi_tilde_row(k + 1, k + 1), gamma, k + 1)
        out += conv @ P.T
    return out


def _forced_literal(spec: SystemSpec, A, gamma, opts: SeriesOptions) -> np.ndarray:
    N = spec.horizon
    max_terms = opts.terms_for(N)
    rho = spectral_radius(A * spec.h ** (spec.orders.alpha + spec.orders.beta))
    if rho >= 1.0:
        warnings.warn(
            f"spectral radius of A h^(alpha+beta) is {rho:.3g} >= 1; "
            "the forced series is not expected to converge",
            SeriesDivergenceWarning,
            stacklevel=3,
        )
    table = KernelTable(spec.orders, spec.h, max_terms + 1, N)
    out = np.zeros((N + 1, spec.dim))
    for k, P in _matrix_powers(A, max_terms + 1):
        conv = _causal_conv(table.phi_tilde_row(k + 1, k + 1), gamma, 1)
        term = conv @ P.T
        out += term
        scale = max(1.0, float(np.max(np.abs(out))))
        if float(np.max(np.abs(term))) <= opts.truncation_tol * scale:
            return out
    raise TruncationNotConvergedError(
        f"forced series did not reach tol {opts.truncation_tol} in {max_terms} terms"
    )


def solve_semilinear_series(
    spec: SystemSpec, opts: SeriesOptions | None = None, table: KernelTable | None = None
) -> Trajectory:
    """Series solution for ``f = A x + gamma``.

    The homogeneous part matches :func:`solve_linear_series`. With the
    ``CORRECTED`` kernel the forced part is the finite sum
    ``sum_r sum_k A^k phi~_(k+1)(k+1)((n-k-1-r)h) gamma(rh)``, which agrees
    with the recursion. ``LITERAL`` uses the lag ``n-1-r`` for every ``k``
    and truncates the resulting infinite sum in ``k``.
    """
    if not isinstance(spec.rhs, Semilinear):
        raise TypeError("solve_semilinear_series needs a Semilinear right-hand side")
    opts = opts or SeriesOptions()
    A, gamma = spec.rhs.A, spec.rhs.gamma
    corrected = opts.kernel_variant is KernelVariant.CORRECTED
    if opts.compensated:
        terms = _SeriesTerms(spec, A)
        states = terms.homogeneous(spec.x_a, spec.x_0)
        if corrected:
            states += _forced_from_kernel(terms.forced_kernel(), gamma)
    else:
        if table is None:
            table = _table(spec, spec.horizon + 1)
        states = _homogeneous(spec, A, table)
        if corrected:
            states += _forced_corrected(spec, A, gamma, table)
    if not corrected:
        states += _forced_literal(spec, A, gamma, opts)
    if not np.all(np.isfinite(states)):
        raise NonFiniteStateError(int(np.argmin(np.all(np.isfinite(states), axis=1))))
    states[0] = spec.x_a
    return _trajectory(spec, states)


# --------------------------------------------------------------------------
# auxiliary variable and cross-checks


def forcing_samples(spec: SystemSpec, traj: Trajectory) -> np.ndarray:
    return np.stack([spec.f(n, traj.states[n]) for n in range(traj.states.shape[0])])


def reconstruct_y(spec: SystemSpec, traj: Trajectory) -> Trajectory:
    """Fill ``traj.aux`` with ``y(nh+b) = x_0 + (Delta^-beta f~)(nh+b)``.

    ``aux[0] = x_0``; for ``n >= 1`` the fractional sum covers the forcing
    samples ``0..n-1``.
    """
    ft = forcing_samples(spec, traj)
    N = traj.horizon
    aux = np.tile(spec.x_0, (N + 1, 1))
    if N >= 1:
        aux[1:] += frac_sum_all(ft[:N], spec.orders.beta, spec.h)
    return replace(traj, aux=aux)


@dataclass
class DiscrepancyReport:
    solver: str
    errors: np.ndarray  # per step, inf-norm relative to max(1, |x_rec|)
    threshold: float = 1e-9
    flagged: list[int] = field(default_factory=list)

    @property
    def max_error(self) -> float:
        return float(np.max(self.errors)) if self.errors.size else 0.0

    @property
    def ok(self) -> bool:
        return not self.flagged


def step_errors(states: np.ndarray, reference: np.ndarray) -> np.ndarray:
    diff = np.max(np.abs(states - reference), axis=1)
    return diff / np.maximum(1.0, np.max(np.abs(reference), axis=1))


def compare_solvers(
    spec: SystemSpec, opts: SeriesOptions | None = None, threshold: float = 1e-9
) -> DiscrepancyReport:
    """Per-step discrepancy between the recursion and the matching series solver."""
    opts = opts or SeriesOptions()
    ref = solve_recursive(spec).states
    if isinstance(spec.rhs, Linear):
        name, series = "linear-series", solve_linear_series(spec)
    elif isinstance(spec.rhs, Semilinear):
        name = f"semilinear-series[{opts.kernel_variant.value}]"
        series = solve_semilinear_series(spec, opts)
    else:
        raise TypeError("compare_solvers needs a Linear or Semilinear right-hand side")
    errs = step_errors(series.states, ref)
    flagged = [int(i) for i in np.flatnonzero(errs > threshold)]
    return DiscrepancyReport(name, errs, threshold, flagged)
