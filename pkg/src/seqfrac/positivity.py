"""Positivity checks for sequential fractional systems.

Two kinds of evidence are offered. The one-step entrywise test on
``I + A h^(alpha+beta)`` is exact for the first step. Trajectory scans and
randomized sampling can only refute positivity over a horizon, never prove
it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from seqfrac.frac_core import FracOrderPair
from seqfrac.solver import (
    General,
    Semilinear,
    SystemSpec,
    Trajectory,
    forcing_samples,
    solve_recursive,
)


class Verdict(enum.Enum):
    POSITIVE_ON_HORIZON = "PositiveOnHorizon"
    VIOLATED_AT = "ViolatedAt"
    LOCAL_CRITERION_HOLDS = "LocalCriterionHolds"
    LOCAL_CRITERION_FAILS = "LocalCriterionFails"


@dataclass(frozen=True)
class PositivityReport:
    verdict: Verdict
    horizon: int = 0
    tolerance: float = 0.0
    step: int | None = None  # ViolatedAt
    coord: int | None = None  # ViolatedAt
    row: int | None = None  # LocalCriterionFails
    col: int | None = None  # LocalCriterionFails
    value: float | None = None
    # for sampled checks: did f >= 0 hold on every step feeding the violation?
    hypothesis_held: bool | None = None
    samples: int = 0

    @property
    def ok(self) -> bool:
        return self.verdict in (Verdict.POSITIVE_ON_HORIZON, Verdict.LOCAL_CRITERION_HOLDS)

    def to_dict(self) -> dict:
        out = {"verdict": self.verdict.value, "horizon": self.horizon, "tolerance": self.tolerance}
        for key in ("step", "coord", "row", "col", "value", "hypothesis_held"):
            v = getattr(self, key)
            if v is not None:
                out[key] = v
        if self.samples:
            out["samples"] = self.samples
        return out

    def __str__(self) -> str:
        v = self.verdict
        if v is Verdict.VIOLATED_AT:
            return f"ViolatedAt(n={self.step}, coord={self.coord}, {self.value!r})"
        if v is Verdict.LOCAL_CRITERION_FAILS:
            return f"LocalCriterionFails({self.row}, {self.col}, {self.value!r})"
        return v.value


def one_step_matrix(A, orders: FracOrderPair, h: float) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    return np.eye(A.shape[0]) + A * h ** orders.mu(1, 1)


def local_positivity_criterion(
    A, orders: FracOrderPair, h: float, strict: bool = False
) -> PositivityReport:
    """Entrywise sign test on ``I + A h^(alpha+beta)``.

    ``strict=True`` demands strictly positive entries. The first offending
    entry in row-major order is reported.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("A must be square")
    M = one_step_matrix(A, orders, h)
    bad = M <= 0 if strict else M < 0
    if not bad.any():
        return PositivityReport(Verdict.LOCAL_CRITERION_HOLDS, horizon=1)
    i, j = (int(v) for v in np.argwhere(bad)[0])
    return PositivityReport(
        Verdict.LOCAL_CRITERION_FAILS, horizon=1, row=i, col=j, value=float(M[i, j])
    )


def first_violation(states: np.ndarray, tolerance: float = 0.0, tau: int | None = None):
    """``(n, coord, value)`` of the first entry below ``-tolerance``, or None."""
    states = np.asarray(states, dtype=float)
    if tau is not None:
        states = states[: tau + 1]
    bad = states < -tolerance
    if not bad.any():
        return None
    n, i = (int(v) for v in np.argwhere(bad)[0])
    return n, i, float(states[n, i])


def check_trajectory_positivity(
    traj: Trajectory, tolerance: float = 0.0, tau: int | None = None
) -> PositivityReport:
    """Scan states in step order (only ``n <= tau`` when given)."""
    if tolerance < 0:
        raise ValueError("tolerance must be nonnegative")
    horizon = traj.horizon if tau is None else min(tau, traj.horizon)
    hit = first_violation(traj.states, tolerance, tau)
    if hit is None:
        return PositivityReport(Verdict.POSITIVE_ON_HORIZON, horizon, tolerance)
    n, i, v = hit
    return PositivityReport(Verdict.VIOLATED_AT, horizon, tolerance, step=n, coord=i, value=v)


def nonneg_rhs_positivity_check(
    spec: SystemSpec,
    samples: int = 32,
    horizon: int | None = None,
    tolerance: float = 0.0,
    seed: int = 0,
    include_spec_ics: bool = True,
) -> PositivityReport:
    """Randomized falsification of positivity under ``f >= 0``.

    Each sample solves the recursion from nonnegative initial data (the
    spec's own data first, when nonnegative and ``include_spec_ics``), then
    looks for a negative state. A violation at step ``n`` only contradicts
    the nonnegative-forcing argument if ``f >= -tolerance`` held at every
    step ``r < n``; that is recorded in ``hypothesis_held``. A violation
    with the hypothesis intact is preferred; otherwise the first violation
    seen is returned.
    """
    if not isinstance(spec.rhs, (General, Semilinear)):
        raise TypeError("nonneg_rhs_positivity_check needs a General or Semilinear rhs")
    if samples < 1:
        raise ValueError("samples must be positive")
    N = spec.horizon if horizon is None else horizon
    if N != spec.horizon:
        spec = _with_horizon(spec, N)
    rng = np.random.default_rng(seed)
    ics = []
    if include_spec_ics and np.all(spec.x_a >= 0) and np.all(spec.x_0 >= 0):
        ics.append((spec.x_a, spec.x_0))
    while len(ics) < samples:
        ics.append((rng.uniform(0.0, 1.0, spec.dim), rng.uniform(0.0, 1.0, spec.dim)))

    fallback = None
    for x_a, x_0 in ics:
        trial = replace(spec, x_a=x_a, x_0=x_0)
        traj = solve_recursive(trial)
        hit = first_violation(traj.states, tolerance)
        if hit is None:
            continue
        n, i, v = hit
        f_vals = forcing_samples(trial, traj)
        held = bool(np.all(f_vals[:n] >= -tolerance))
        report = PositivityReport(
            Verdict.VIOLATED_AT, N, tolerance, step=n, coord=i, value=v,
            hypothesis_held=held, samples=len(ics),
        )
        if held:
            return report
        if fallback is None:
            fallback = report
    if fallback is not None:
        return fallback
    return PositivityReport(Verdict.POSITIVE_ON_HORIZON, N, tolerance, samples=len(ics))


def necessity_witness(A, orders: FracOrderPair, h: float):
    """Initial data ``x_a = e_j, x_0 = 0`` for the first negative entry ``(i, j)``.

    Returns ``(i, j, x_a)`` or None when the local criterion holds.
    """
    report = local_positivity_criterion(A, orders, h)
    if report.ok:
        return None
    e = np.zeros(np.asarray(A).shape[0])
    e[report.col] = 1.0
    return report.row, report.col, e


def _with_horizon(spec: SystemSpec, N: int) -> SystemSpec:
    rhs = spec.rhs
    if isinstance(rhs, Semilinear) and rhs.gamma.shape[0] < N + 1:
        raise ValueError(f"gamma has {rhs.gamma.shape[0]} samples, horizon {N} needs {N + 1}")
    return replace(spec, horizon=N)
