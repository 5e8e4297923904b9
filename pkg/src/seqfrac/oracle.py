"""Brute-force reference implementations and identity checks.

Everything here evaluates sums term by term through :func:`h_factorial`
(direct log-gamma) and never touches the ratio recurrences used by
:mod:`seqfrac.frac_core` tables and weights, so agreement between the two
is evidence rather than a tautology.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterable

import numpy as np

from seqfrac.frac_core import (
    FracOrderPair,
    KernelTable,
    SampledSequence,
    caputo_diff_all,
    frac_sum_all,
    h_factorial,
)

DEFAULT_SEED = 20240611
ORDERS = (0.3, 0.5, 0.7, 1.0)
STEPS = (0.5, 1.0, 2.0)


@dataclass
class IdentityCheckResult:
    identity_name: str
    tolerance: float
    max_abs_error: float = 0.0
    max_rel_error: float = 0.0
    worst_case: dict = field(default_factory=dict)
    checked: int = 0

    @property
    def passed(self) -> bool:
        return self.max_rel_error <= self.tolerance

    def update(self, got, ref, **case) -> None:
        got = np.asarray(got, dtype=float)
        ref = np.asarray(ref, dtype=float)
        abs_err = np.abs(got - ref)
        rel_err = abs_err / np.maximum(1.0, np.abs(ref))
        self.checked += int(rel_err.size)
        if rel_err.size == 0:
            return
        i = int(np.argmax(rel_err))
        self.max_abs_error = max(self.max_abs_error, float(np.max(abs_err)))
        if rel_err.flat[i] > self.max_rel_error or not self.worst_case:
            self.max_rel_error = max(self.max_rel_error, float(rel_err.flat[i]))
            self.worst_case = {**case, "index": i}

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


# --------------------------------------------------------------------------
# definitional operators


def definitional_weights(order: float, h: float, length: int) -> np.ndarray:
    """``h / Gamma(order) * ((order + j - 1) h)^(order-1)_h`` for ``j = 0..length-1``."""
    g = math.gamma(order)
    return np.array(
        [h / g * h_factorial((order + j - 1.0) * h, order - 1.0, h) for j in range(length)]
    )


def frac_sum_definitional_all(values, order: float, h: float) -> np.ndarray:
    """Fractional h-sum at every index, summed term by term."""
    if not order > 0:
        raise ValueError("order must be positive")
    values = np.asarray(values, dtype=float)
    n_pts = values.shape[0]
    w = definitional_weights(order, h, n_pts)
    out = np.empty_like(values)
    for n in range(n_pts):
        out[n] = w[n::-1] @ values[: n + 1]
    return out


def frac_sum_definitional(x: SampledSequence, order: float, n: int):
    """Value at ``t = a + (order + n) h`` straight from the h-factorial form."""
    if not order > 0:
        raise ValueError("order must be positive")
    if n < 0 or n > x.grid.N:
        raise IndexError(f"index n={n} outside 0..{x.grid.N}")
    h, a = x.grid.h, x.grid.a
    t = a + (order + n) * h
    total = 0.0
    for k in range(n + 1):
        s_k = a + k * h + h  # sigma(a + k h)
        total = total + h_factorial(t - s_k, order - 1.0, h) * x.values[k]
    return h / math.gamma(order) * total


def caputo_definitional_all(values, order: float, h: float) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    dx = np.diff(values, axis=0) / h
    if order == 1.0:
        return dx
    return frac_sum_definitional_all(dx, 1.0 - order, h)


# --------------------------------------------------------------------------
# kernel table with an optional deliberate error (negative control)


@dataclass(frozen=True, eq=False)
class _PerturbedTable(KernelTable):
    eps: float = 0.0

    def _row(self, kind: str, k: int, s: int) -> np.ndarray:
        row = super()._row(kind, k, s)
        return row * (1.0 + self.eps * (k + s))


def _table(orders, h, max_k, max_n, perturbation: float) -> KernelTable:
    if perturbation:
        return _PerturbedTable(orders, h, max_k, max_n, eps=perturbation)
    return KernelTable(orders, h, max_k, max_n)


def _order_pairs(values: Iterable[float]):
    values = tuple(values)
    return [FracOrderPair(a, b) for a in values for b in values]


# --------------------------------------------------------------------------
# verifiers


def verify_power_rule(
    alphas=ORDERS, hs=STEPS, max_mu: float = 6.0, max_n: int = 200, tol: float = 1e-10
) -> IdentityCheckResult:
    """Fractional sum of an h-factorial power against its closed form."""
    res = IdentityCheckResult("power_rule", tol)
    mus = np.arange(0.0, max_mu + 1e-12, 0.5)
    n = np.arange(max_n + 1)
    for h in hs:
        for mu in mus:
            psi = np.array([h_factorial((k + mu) * h, mu, h) for k in n])
            for alpha in alphas:
                c = math.exp(math.lgamma(mu + 1.0) - math.lgamma(mu + alpha + 1.0))
                ref = np.array(
                    [c * h_factorial((j + alpha + mu) * h, mu + alpha, h) for j in n]
                )
                res.update(frac_sum_definitional_all(psi, alpha, h), ref, h=h, mu=mu, alpha=alpha, route="definitional")
                res.update(frac_sum_all(psi, alpha, h), ref, h=h, mu=mu, alpha=alpha, route="recurrence")
    return res


def verify_composition(
    max_n: int = 200, seed: int = DEFAULT_SEED, orders=ORDERS, hs=STEPS, tol: float = 1e-10
) -> IdentityCheckResult:
    """Order-beta sum followed by order-alpha sum equals the order-(alpha+beta) sum."""
    rng = np.random.default_rng(seed)
    res = IdentityCheckResult("composition", tol)
    for h in hs:
        for pair in _order_pairs(orders):
            x = rng.uniform(-1.0, 1.0, max_n + 1)
            direct = frac_sum_all(x, pair.alpha + pair.beta, h)
            for first, second in ((pair.beta, pair.alpha), (pair.alpha, pair.beta)):
                inner = frac_sum_definitional_all(x, first, h)
                outer = frac_sum_definitional_all(inner, second, h)
                res.update(outer, direct, h=h, first=first, second=second)
    return res


def verify_caputo_inversion(
    max_n: int = 200, seed: int = DEFAULT_SEED, orders=ORDERS, hs=STEPS, tol: float = 1e-10
) -> IdentityCheckResult:
    """Order-alpha sum of the Caputo difference recovers ``x(nh+a) - x(a)``."""
    rng = np.random.default_rng(seed)
    res = IdentityCheckResult("caputo_inversion", tol)
    for h in hs:
        for alpha in orders:
            x = rng.uniform(-1.0, 1.0, max_n + 1)
            ref = x[1:] - x[0]
            for route, cap in (
                ("recurrence", caputo_diff_all(x, alpha, h)),
                ("definitional", caputo_definitional_all(x, alpha, h)),
            ):
                # value at nh + a is index n - 1 of a sum starting at 0
                got = frac_sum_definitional_all(cap, alpha, h)
                res.update(got, ref, h=h, alpha=alpha, route=route)
    return res


def verify_phi_recurrence(
    max_k: int = 5,
    max_s: int = 5,
    max_n: int = 200,
    orders=((0.4, 0.9), (0.5, 0.5), (1.0, 0.3), (0.7, 1.0)),
    hs=STEPS,
    tol: float = 1e-10,
    perturbation: float = 0.0,
) -> IdentityCheckResult:
    """Summing ``phi_{k,s}`` with order alpha (beta) raises ``k`` (``s``) by one.

    The alpha sum is read at ``nh + a`` (index ``n-1``); the beta sum at
    ``nh + beta h`` (index ``n``), where the identity holds for this kernel.
    """
    res = IdentityCheckResult("phi_recurrence", tol)
    for h in hs:
        for a, b in orders:
            o = FracOrderPair(a, b)
            table = _table(o, h, max(max_k, max_s) + 1, max_n, perturbation)
            for k in range(max_k + 1):
                for s in range(max_s + 1):
                    seq = table.phi_row(k, s)
                    up_k = frac_sum_definitional_all(seq, o.alpha, h)
                    res.update(up_k[:-1], table.phi_row(k + 1, s)[1:], h=h, alpha=a, beta=b, k=k, s=s, order="alpha")
                    up_s = frac_sum_definitional_all(seq, o.beta, h)
                    res.update(up_s, table.phi_row(k, s + 1), h=h, alpha=a, beta=b, k=k, s=s, order="beta")
    return res


def verify_convolution_form(
    max_k: int = 3,
    max_s: int = 3,
    max_n: int = 200,
    seed: int = DEFAULT_SEED,
    orders=((0.4, 0.9), (0.5, 0.5), (1.0, 0.3)),
    hs=STEPS,
    max_mu: float = 6.0,
    tol: float = 1e-10,
    perturbation: float = 0.0,
) -> IdentityCheckResult:
    """Order-mu sums as ``phi~`` convolutions, and iterated single-order sums."""
    rng = np.random.default_rng(seed)
    res = IdentityCheckResult("convolution_form", tol)
    for h in hs:
        for a, b in orders:
            o = FracOrderPair(a, b)
            table = _table(o, h, max(max_k, max_s) + 1, max_n, perturbation)
            gamma = rng.uniform(-1.0, 1.0, max_n + 1)
            for k in range(max_k + 1):
                for s in range(max_s + 1):
                    mu = o.mu(k, s)
                    if k + s == 0 or mu > max_mu:
                        continue
                    ref = frac_sum_definitional_all(gamma, mu, h)
                    got = np.convolve(table.phi_tilde_row(k, s), gamma)[: max_n + 1]
                    res.update(got, ref, h=h, alpha=a, beta=b, k=k, s=s, check="kernel")
            # iterated shift: k+1 single alpha sums against one (k+1) alpha sum
            g = frac_sum_definitional_all(gamma, o.alpha, h)
            for k in range(1, max_k + 1):
                if (k + 1) * o.alpha > max_mu:
                    break
                g = frac_sum_definitional_all(g, o.alpha, h)
                direct = np.convolve(table.phi_tilde_row(k + 1, 0), gamma)[: max_n + 1]
                res.update(g, direct, h=h, alpha=a, k=k, check="iterated")
    return res


VERIFIERS = (
    "verify_power_rule",
    "verify_composition",
    "verify_caputo_inversion",
    "verify_phi_recurrence",
    "verify_convolution_form",
)


def run_identity_suite(seed: int = DEFAULT_SEED, perturbation: float = 0.0) -> list[IdentityCheckResult]:
    """Every verifier on its default grid. ``perturbation`` corrupts kernel tables."""
    return [
        verify_power_rule(),
        verify_composition(seed=seed),
        verify_caputo_inversion(seed=seed),
        verify_phi_recurrence(perturbation=perturbation),
        verify_convolution_form(seed=seed, perturbation=perturbation),
    ]
