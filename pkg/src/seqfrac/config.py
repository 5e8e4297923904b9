"""Run configuration documents (JSON) for the command-line front end.

A document is a flat JSON object::

    {
      "alpha": 0.5, "beta": 0.7, "h": 0.5, "N": 40, "dim": 2,
      "A": [[-0.2, 0.1], [0.0, -0.3]],
      "x_a": [1.0, 0.5], "x_0": [0.0, 0.2],
      "gamma": "zero",
      "solver": "recursive",
      "kernel": "corrected",
      "outputs": {"trajectory": "traj.csv", "report": "report.json"},
      "checks": {"positivity": true, "compare_solvers": false,
                 "reconstruct_y": true, "identities": false},
      "positivity": {"tau": null, "samples": 32, "tolerance": 0.0, "strict": false},
      "seed": 0
    }

``gamma`` is ``"zero"``, a constant vector of length ``dim``, or a path
(relative to the config file) to a sample file with one whitespace
separated vector per line and at least ``N + 1`` lines. Only the problem
keys are required; unknown keys are rejected.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from seqfrac.errors import ConfigError
from seqfrac.frac_core import FracOrderPair
from seqfrac.solver import KernelVariant, Linear, SeriesOptions, Semilinear, SystemSpec

SOLVERS = ("recursive", "linear-series", "semilinear-series")
KERNELS = ("corrected", "literal")
REQUIRED = ("alpha", "beta", "h", "N", "dim", "A", "x_a", "x_0", "gamma")


@dataclass(frozen=True)
class Outputs:
    trajectory: str | None = None
    report: str | None = None


@dataclass(frozen=True)
class Checks:
    positivity: bool = False
    compare_solvers: bool = False
    reconstruct_y: bool = False
    identities: bool = False


@dataclass(frozen=True)
class PositivityOptions:
    tau: int | None = None
    samples: int = 32
    tolerance: float = 0.0
    strict: bool = False


@dataclass(frozen=True)
class RunConfig:
    alpha: float
    beta: float
    h: float
    N: int
    dim: int
    A: tuple
    x_a: tuple
    x_0: tuple
    gamma: object  # "zero", tuple of floats, or a file path
    solver: str = "recursive"
    kernel: str = "corrected"
    outputs: Outputs = field(default_factory=Outputs)
    checks: Checks = field(default_factory=Checks)
    positivity: PositivityOptions = field(default_factory=PositivityOptions)
    seed: int = 0
    base_dir: str = field(default=".", compare=False)

    @property
    def orders(self) -> FracOrderPair:
        return FracOrderPair(self.alpha, self.beta)

    @property
    def a(self) -> float:
        return (self.alpha - 1.0) * self.h

    def gamma_is_zero(self) -> bool:
        if isinstance(self.gamma, str):
            return self.gamma == "zero"
        return all(v == 0.0 for v in self.gamma)

    def gamma_samples(self) -> np.ndarray:
        if self.gamma == "zero":
            return np.zeros((self.N + 1, self.dim))
        if isinstance(self.gamma, str):
            return load_gamma_file(self.gamma_path(), self.dim, self.N)
        return np.tile(np.asarray(self.gamma, dtype=float), (self.N + 1, 1))

    def gamma_path(self) -> Path:
        return Path(self.base_dir) / self.gamma

    def to_spec(self) -> SystemSpec:
        A = np.asarray(self.A, dtype=float)
        if self.solver == "linear-series" or (
            self.solver == "recursive" and self.gamma_is_zero()
        ):
            rhs = Linear(A)
        else:
            rhs = Semilinear(A, self.gamma_samples())
        return SystemSpec(self.dim, self.orders, self.h, self.N, rhs, self.x_a, self.x_0)

    def semilinear_spec(self) -> SystemSpec:
        """The problem with an explicit forcing term, even when it is zero."""
        rhs = Semilinear(np.asarray(self.A, dtype=float), self.gamma_samples())
        return SystemSpec(self.dim, self.orders, self.h, self.N, rhs, self.x_a, self.x_0)

    def series_options(self) -> SeriesOptions:
        return SeriesOptions(kernel_variant=KernelVariant(self.kernel))

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("base_dir")
        d["A"] = [list(row) for row in self.A]
        d["x_a"] = list(self.x_a)
        d["x_0"] = list(self.x_0)
        if not isinstance(self.gamma, str):
            d["gamma"] = list(self.gamma)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def load_gamma_file(path: Path, dim: int, N: int) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"gamma sample file not found: {path}")
    rows = [line.split() for line in path.read_text().splitlines() if line.strip()]
    if len(rows) < N + 1:
        raise ConfigError([("gamma", f"{path} has {len(rows)} lines, need at least {N + 1}")])
    out = np.empty((N + 1, dim))
    for i, row in enumerate(rows[: N + 1]):
        if len(row) != dim:
            raise ConfigError([("gamma", f"{path} line {i + 1} has {len(row)} values, expected {dim}")])
        try:
            out[i] = [float(v) for v in row]
        except ValueError as exc:
            raise ConfigError([("gamma", f"{path} line {i + 1}: {exc}")]) from None
    if not np.all(np.isfinite(out)):
        raise ConfigError([("gamma", f"{path} contains non-finite values")])
    return out


# --------------------------------------------------------------------------
# validation


class _Collector:
    def __init__(self) -> None:
        self.problems: list[tuple[str, str]] = []

    def add(self, path: str, reason: str) -> None:
        self.problems.append((path, reason))

    def number(self, doc: dict, key: str, path: str | None = None):
        path = path or key
        v = doc.get(key)
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            self.add(path, f"expected a finite number, got {v!r}")
            return None
        return float(v)

    def integer(self, doc: dict, key: str, path: str | None = None):
        path = path or key
        v = doc.get(key)
        if isinstance(v, bool) or not isinstance(v, int):
            self.add(path, f"expected an integer, got {v!r}")
            return None
        return v

    def boolean(self, doc: dict, key: str, path: str):
        v = doc.get(key)
        if not isinstance(v, bool):
            self.add(path, f"expected true or false, got {v!r}")
            return None
        return v

    def vector(self, v, path: str, length: int | None):
        if not isinstance(v, list) or any(
            isinstance(e, bool) or not isinstance(e, (int, float)) or not math.isfinite(e)
            for e in v
        ):
            self.add(path, "expected a list of finite numbers")
            return None
        if length is not None and len(v) != length:
            self.add(path, f"expected {length} entries (dim), got {len(v)}")
            return None
        return tuple(float(e) for e in v)

    def unknown(self, doc: dict, allowed, prefix: str = "") -> None:
        for key in doc:
            if key not in allowed:
                self.add(prefix + key, "unknown key")


def _section(col: _Collector, doc: dict, name: str, cls):
    raw = doc.get(name, {})
    if not isinstance(raw, dict):
        col.add(name, "expected an object")
        return cls()
    names = [f for f in cls.__dataclass_fields__]
    col.unknown(raw, names, prefix=name + ".")
    values = {}
    for key in names:
        if key not in raw:
            continue
        path = f"{name}.{key}"
        default = getattr(cls(), key)
        v = raw[key]
        if isinstance(default, bool):
            values[key] = col.boolean(raw, key, path)
        elif key in ("trajectory", "report"):
            if v is not None and not isinstance(v, str):
                col.add(path, "expected a path string or null")
            values[key] = v
        elif key == "tau":
            if v is not None and (isinstance(v, bool) or not isinstance(v, int) or v < 1):
                col.add(path, "expected a positive integer or null")
            values[key] = v
        elif key == "samples":
            iv = col.integer(raw, key, path)
            if iv is not None and iv < 1:
                col.add(path, "must be at least 1")
            values[key] = iv
        elif key == "tolerance":
            fv = col.number(raw, key, path)
            if fv is not None and fv < 0:
                col.add(path, "must be nonnegative")
            values[key] = fv
    return cls(**{k: v for k, v in values.items() if v is not None})


def parse_config(text: str, base_dir: str | os.PathLike = ".") -> RunConfig:
    """Parse and validate a JSON run configuration.

    Raises :class:`ConfigError` listing every problem found, or
    :class:`FileNotFoundError` for a missing gamma sample file.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([("<document>", f"malformed JSON: {exc}")]) from None
    if not isinstance(doc, dict):
        raise ConfigError([("<document>", "top level must be an object")])

    col = _Collector()
    allowed = set(RunConfig.__dataclass_fields__) - {"base_dir"}
    col.unknown(doc, allowed)
    for key in REQUIRED:
        if key not in doc:
            col.add(key, "missing required key")
    if col.problems:
        raise ConfigError(col.problems)

    alpha = col.number(doc, "alpha")
    beta = col.number(doc, "beta")
    for name, v in (("alpha", alpha), ("beta", beta)):
        if v is not None and not 0.0 < v <= 1.0:
            col.add(name, f"must lie in (0, 1], got {v}")
    h = col.number(doc, "h")
    if h is not None and not h > 0:
        col.add("h", f"must be positive, got {h}")
    N = col.integer(doc, "N")
    if N is not None and N < 0:
        col.add("N", f"must be nonnegative, got {N}")
    dim = col.integer(doc, "dim")
    if dim is not None and dim < 1:
        col.add("dim", f"must be positive, got {dim}")
        dim = None

    A = None
    rawA = doc["A"]
    if not isinstance(rawA, list):
        col.add("A", "expected a list of rows")
    else:
        if dim is not None and len(rawA) != dim:
            col.add("A", f"expected {dim} rows (dim), got {len(rawA)}")
        rows = [col.vector(row, f"A[{i}]", dim) for i, row in enumerate(rawA)]
        if all(r is not None for r in rows) and (dim is None or len(rows) == dim):
            A = tuple(rows)
    x_a = col.vector(doc["x_a"], "x_a", dim)
    x_0 = col.vector(doc["x_0"], "x_0", dim)

    gamma = doc["gamma"]
    if isinstance(gamma, list):
        gamma = col.vector(gamma, "gamma", dim)
    elif not isinstance(gamma, str) or not gamma:
        col.add("gamma", 'expected "zero", a constant vector or a sample file path')
        gamma = None

    solver = doc.get("solver", "recursive")
    if solver not in SOLVERS:
        col.add("solver", f"expected one of {', '.join(SOLVERS)}, got {solver!r}")
    kernel = doc.get("kernel", "corrected")
    if kernel not in KERNELS:
        col.add("kernel", f"expected one of {', '.join(KERNELS)}, got {kernel!r}")
    seed = col.integer(doc, "seed") if "seed" in doc else 0

    outputs = _section(col, doc, "outputs", Outputs)
    checks = _section(col, doc, "checks", Checks)
    positivity = _section(col, doc, "positivity", PositivityOptions)

    if col.problems:
        raise ConfigError(col.problems)

    cfg = RunConfig(
        alpha=alpha, beta=beta, h=h, N=N, dim=dim, A=A, x_a=x_a, x_0=x_0, gamma=gamma,
        solver=solver, kernel=kernel, outputs=outputs, checks=checks,
        positivity=positivity, seed=seed, base_dir=str(base_dir),
    )
    if solver == "linear-series" and not cfg.gamma_is_zero():
        raise ConfigError([("solver", 'linear-series requires gamma = "zero"')])
    if isinstance(gamma, str) and gamma != "zero":
        load_gamma_file(cfg.gamma_path(), dim, N)
    return cfg


def read_config(path: str | os.PathLike) -> RunConfig:
    path = Path(path)
    return parse_config(path.read_text(), base_dir=path.parent)
