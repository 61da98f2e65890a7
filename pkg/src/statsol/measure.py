"""Discrete probability measures as weighted Dirac ensembles.

Observables and state maps act on *batches*: an observable takes an array of
shape ``(n, dim)`` and returns ``(n,)``; a map returns ``(n, dim_out)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

Observable = Callable[[np.ndarray], np.ndarray]
StateMap = Callable[[np.ndarray], np.ndarray]

DROP_THRESHOLD = 1e-15
NORMALIZATION_TOL = 1e-12
JSON_VERSION = 1


class MeasureError(ValueError):
    """Invalid ensemble construction or operation."""


class EvaluationError(ArithmeticError):
    """An observable or map produced a non-finite value on some atom."""

    def __init__(self, message: str, index: int):
        super().__init__(message)
        self.index = index


class SamplerError(RuntimeError):
    def __init__(self, message: str, draw: int):
        super().__init__(message)
        self.draw = draw


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DiracEnsemble:
    """Finite convex combination of Dirac masses.

    Use :func:`ensemble_new` to build one from raw data; the constructor
    assumes the arrays are already normalized.
    """

    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "atoms", _frozen(self.atoms))
        object.__setattr__(self, "weights", _frozen(self.weights))
        if self.atoms.ndim != 2 or self.atoms.shape[0] == 0:
            raise MeasureError("atoms must be a nonempty (n, dim) array")
        if self.weights.shape != (self.atoms.shape[0],):
            raise MeasureError("weights and atoms differ in length")
        if np.any(self.weights < 0):
            raise MeasureError("negative weight")
        if abs(math.fsum(self.weights) - 1.0) > NORMALIZATION_TOL:
            raise MeasureError("weights do not sum to 1")

    @property
    def dim(self) -> int:
        return self.atoms.shape[1]

    def __len__(self) -> int:
        return self.atoms.shape[0]

    def same_as(self, other: "DiracEnsemble") -> bool:
        """Atomwise and weightwise bit equality."""
        return (
            self.atoms.shape == other.atoms.shape
            and np.array_equal(self.atoms, other.atoms)
            and np.array_equal(self.weights, other.weights)
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "version": JSON_VERSION,
                "dim": self.dim,
                "atoms": self.atoms.tolist(),
                "weights": self.weights.tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "DiracEnsemble":
        doc = json.loads(text)
        if doc.get("version", JSON_VERSION) != JSON_VERSION:
            raise MeasureError(f"unsupported ensemble version {doc['version']}")
        atoms = np.asarray(doc["atoms"], dtype=float).reshape(-1, doc["dim"])
        return cls(atoms, np.asarray(doc["weights"], dtype=float))


def _as_atoms(atoms) -> np.ndarray:
    a = np.asarray(atoms, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        # a list of scalars is a list of one-dimensional states
        a = a[:, None]
    if a.ndim != 2:
        raise MeasureError("atoms must all have the same dimension")
    return a


def ensemble_new(atoms, weights: Sequence[float] | np.ndarray | None = None) -> DiracEnsemble:
    """Build a normalized ensemble, dropping atoms with negligible weight."""
    try:
        a = _as_atoms(atoms)
    except ValueError as exc:  # ragged input
        raise MeasureError("atoms must all have the same dimension") from exc
    if a.shape[0] == 0:
        raise MeasureError("empty atom list")
    if weights is None:
        w = np.ones(a.shape[0])
    else:
        w = np.asarray(weights, dtype=float).ravel()
    if w.shape[0] != a.shape[0]:
        raise MeasureError("weights and atoms differ in length")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise MeasureError("weights must be finite and nonnegative")
    total = math.fsum(w)
    if total <= 0:
        raise MeasureError("all weights are zero")
    w = w / total
    keep = w >= DROP_THRESHOLD
    if not np.all(keep):
        a, w = a[keep], w[keep]
        w = w / math.fsum(w)
    return DiracEnsemble(a, w)


def dirac(state) -> DiracEnsemble:
    return ensemble_new(np.asarray(state, dtype=float).reshape(1, -1), [1.0])


def _evaluate(f: Callable, atoms: np.ndarray, what: str) -> np.ndarray:
    values = np.asarray(f(atoms), dtype=float)
    bad = ~np.isfinite(values)
    if bad.any():
        idx = int(np.argwhere(bad)[0][0])
        raise EvaluationError(f"{what} is not finite on atom {idx}", idx)
    return values


def expectation(mu: DiracEnsemble, phi: Observable) -> float:
    """Integral of ``phi`` against ``mu``.

    Summation uses ``math.fsum`` so the result does not depend on atom order
    or on how the work is split.
    """
    values = _evaluate(phi, mu.atoms, "observable").reshape(len(mu))
    return math.fsum(mu.weights * values)


def pushforward(mu: DiracEnsemble, F: StateMap) -> DiracEnsemble:
    mapped = _evaluate(F, mu.atoms, "map")
    mapped = mapped.reshape(len(mu), -1)
    return DiracEnsemble(mapped, mu.weights)


Sampler = Callable[[np.random.Generator], np.ndarray]


def discretize(sampler: Sampler, n: int, seed: int) -> DiracEnsemble:
    """Equal-weight ensemble of ``n`` i.i.d. draws from ``sampler``.

    The sampler receives a ``numpy.random.Generator`` seeded from ``seed``;
    draws are taken sequentially so the result is a pure function of
    ``(sampler, n, seed)``.
    """
    if n < 1:
        raise MeasureError("n must be at least 1")
    rng = np.random.default_rng(seed)
    draws = []
    for i in range(n):
        try:
            x = np.asarray(sampler(rng), dtype=float).ravel()
        except Exception as exc:
            raise SamplerError(f"sampler failed on draw {i}: {exc}", i) from exc
        if not np.all(np.isfinite(x)):
            raise SamplerError(f"sampler returned non-finite state on draw {i}", i)
        draws.append(x)
    try:
        atoms = np.stack(draws)
    except ValueError as exc:
        raise MeasureError("sampler returned states of varying dimension") from exc
    return DiracEnsemble(atoms, np.full(n, 1.0 / n))


# -- samplers -------------------------------------------------------------


def constant_sampler(state) -> Sampler:
    s = np.asarray(state, dtype=float).ravel()
    return lambda rng: s.copy()


def choice_sampler(states, probs=None) -> Sampler:
    s = np.asarray(states, dtype=float)
    if s.ndim == 1:
        s = s[:, None]
    p = None if probs is None else np.asarray(probs, dtype=float)

    def draw(rng):
        return s[rng.choice(len(s), p=p)]

    return draw


def gaussian_sampler(mean, std) -> Sampler:
    """Independent normal coordinates; ``std`` may be a scalar or per-coordinate."""
    m = np.asarray(mean, dtype=float).ravel()
    sd = np.broadcast_to(np.asarray(std, dtype=float), m.shape).copy()

    def draw(rng):
        return m + sd * rng.standard_normal(m.shape)

    return draw


# -- weak-star proxy ------------------------------------------------------


@dataclass(frozen=True)
class TestFunction:
    name: str
    f: Observable
    bound: float

    def __call__(self, x):
        return self.f(x)


@dataclass(frozen=True)
class TestDictionary:
    """Finite family of bounded continuous observables."""

    functions: tuple[TestFunction, ...] = field(default_factory=tuple)

    __test__ = False  # not a pytest class

    def __post_init__(self):
        object.__setattr__(self, "functions", tuple(self.functions))

    def __iter__(self):
        return iter(self.functions)

    def __len__(self):
        return len(self.functions)

    def names(self) -> list[str]:
        return [f.name for f in self.functions]


TestFunction.__test__ = False


def default_dictionary(dim: int) -> TestDictionary:
    """``tanh`` of every coordinate plus a Gaussian bump at the origin."""
    fns = [
        TestFunction(f"tanh[{i}]", (lambda x, i=i: np.tanh(x[:, i])), 1.0)
        for i in range(dim)
    ]
    fns.append(TestFunction("gauss", lambda x: np.exp(-0.5 * np.sum(x * x, axis=1)), 1.0))
    return TestDictionary(tuple(fns))


def discrepancy(mu1: DiracEnsemble, mu2: DiracEnsemble, dictionary: TestDictionary) -> float:
    """Largest gap in expectations over the dictionary."""
    if len(dictionary) == 0:
        raise MeasureError("empty test dictionary")
    if mu1.dim != mu2.dim:
        raise MeasureError(f"dimension mismatch: {mu1.dim} vs {mu2.dim}")
    return max(abs(expectation(mu1, f) - expectation(mu2, f)) for f in dictionary)


def tightness_truncate(mu: DiracEnsemble, radius: float) -> tuple[DiracEnsemble, float]:
    """Restrict to the closed ball of given radius and renormalize.

    Returns the truncated ensemble and the discarded mass.
    """
    if radius <= 0:
        raise MeasureError("radius must be positive")
    inside = np.linalg.norm(mu.atoms, axis=1) <= radius
    if not inside.any():
        raise MeasureError("no atom inside the truncation ball")
    if inside.all():
        return mu, 0.0
    defect = math.fsum(mu.weights[~inside])
    w = mu.weights[inside]
    return DiracEnsemble(mu.atoms[inside], w / math.fsum(w)), defect
