"""Flat torus experiments: the Oxtoby analytic flow and Sturmian cutting sequences."""
import math
from dataclasses import dataclass

import numba
import numpy as np

from .exceptions import DegenerateSlope, StepBlowup

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
MAX_STEPS = 10**8


@dataclass
class TorusPoint:
    lift_x: float
    lift_y: float

    @property
    def x(self):
        return self.lift_x % 1.0

    @property
    def y(self):
        return self.lift_y % 1.0


@dataclass(frozen=True)
class OxtobyField:
    alpha: float = GOLDEN

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")

    def __call__(self, x, y=None):
        return oxtoby_eval(self, x, y)


def oxtoby_eval(F, x, y=None):
    """Field value (X, Y); accepts a TorusPoint or coordinates (scalars or arrays)."""
    if isinstance(x, TorusPoint):
        x, y = x.lift_x, x.lift_y
    a = F.alpha
    c = 1.0 - np.cos(2.0 * np.pi * (np.asarray(x) - np.asarray(y)))
    X = a * c + (1.0 - a) * (1.0 - np.cos(2.0 * np.pi * np.asarray(y)))
    Y = a * c
    if np.ndim(X) == 0:
        return float(X), float(Y)
    return X, Y


def divergence(F, x, y, eps=1e-5):
    """Central-difference divergence X_x + Y_y."""
    Xp, _ = oxtoby_eval(F, x + eps, y)
    Xm, _ = oxtoby_eval(F, x - eps, y)
    _, Yp = oxtoby_eval(F, x, y + eps)
    _, Ym = oxtoby_eval(F, x, y - eps)
    return (np.asarray(Xp) - Xm) / (2 * eps) + (np.asarray(Yp) - Ym) / (2 * eps)


@numba.njit(cache=True)
def _field(a, x, y):
    c = 1.0 - math.cos(2.0 * math.pi * (x - y))
    return a * c + (1.0 - a) * (1.0 - math.cos(2.0 * math.pi * y)), a * c


@numba.njit(cache=True)
def _integrate(a, x, y, h, n, every):
    m = n // every
    xs = np.empty(m)
    ys = np.empty(m)
    for i in range(n):
        k1x, k1y = _field(a, x, y)
        k2x, k2y = _field(a, x + 0.5 * h * k1x, y + 0.5 * h * k1y)
        k3x, k3y = _field(a, x + 0.5 * h * k2x, y + 0.5 * h * k2y)
        k4x, k4y = _field(a, x + h * k3x, y + h * k3y)
        x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        if not (math.isfinite(x) and math.isfinite(y)):
            return x, y, xs, ys, i
        if (i + 1) % every == 0:
            xs[(i + 1) // every - 1] = x
            ys[(i + 1) // every - 1] = y
    return x, y, xs, ys, n


def flow(F, seed, T, h=1e-3):
    """RK4 lift of the flow after time ``T``."""
    n = int(round(T / h))
    x, y, _, _, done = _integrate(F.alpha, seed.lift_x, seed.lift_y, h, n, max(n, 1))
    if done < n:
        raise StepBlowup(f"integration diverged at step {done}")
    return TorusPoint(x, y)


def torus_rotation_vector(F, seed, T=1e4, h=1e-3, samples=1000):
    """Mean displacement per unit time and the running estimates."""
    n = int(round(T / h))
    if n > MAX_STEPS:
        raise ValueError(f"T/h = {n} exceeds {MAX_STEPS}")
    if n < 1:
        raise ValueError("T must be at least one step")
    every = max(1, n // samples)
    x, y, xs, ys, done = _integrate(F.alpha, seed.lift_x, seed.lift_y, h, n, every)
    if done < n:
        raise StepBlowup(f"integration diverged at step {done}")
    times = h * every * np.arange(1, len(xs) + 1)
    v1 = (xs - seed.lift_x) / times
    v2 = (ys - seed.lift_y) / times
    v = ((x - seed.lift_x) / (n * h), (y - seed.lift_y) / (n * h))
    slope = v[1] / v[0] if v[0] != 0 else math.nan
    tail = max(1, len(times) // 10)
    diag = {
        "times": times,
        "v1": v1,
        "v2": v2,
        "slope": slope,
        "cauchy_tail": float(max(np.ptp(v1[-tail:]), np.ptp(v2[-tail:]))) if len(times) else 0.0,
        "end": TorusPoint(x, y),
    }
    return v, diag


def cutting_sequence(slope, length, start=None):
    """Symbols of grid crossings of the line of given slope: ``b`` for x in Z, ``a`` for y in Z.

    A line through a lattice point crosses both at once and emits ``ab``.
    Returns the word (as a string) and the density of ``b``.
    """
    if not (math.isfinite(slope) and slope > 0):
        raise DegenerateSlope(f"slope must be positive and finite, got {slope!r}")
    if length < 1:
        return "", 0.0
    if start is None:
        start = TorusPoint(0.0, 0.0)
    x0, y0 = start.lift_x, start.lift_y
    # the first `length` symbols contain at most `length` of each kind
    kx = np.floor(x0) + np.arange(1, length + 1, dtype=float)
    ky = np.floor(y0) + np.arange(1, length + 1, dtype=float)
    xa = x0 + (ky - y0) / slope
    params = np.concatenate([xa, kx])
    symbols = np.concatenate([np.zeros(len(xa), dtype=np.int8), np.ones(len(kx), dtype=np.int8)])
    order = np.argsort(params, kind="stable")
    word = symbols[order][:length]
    text = "".join("b" if s else "a" for s in word)
    return text, float(word.mean())


def is_balanced(word, max_len=None):
    """Counts of ``b`` in any two factors of equal length differ by at most one."""
    arr = np.frombuffer(word.encode(), dtype=np.uint8) == ord("b")
    c = np.concatenate([[0], np.cumsum(arr)])
    n = len(arr)
    top = n if max_len is None else min(n, max_len)
    for k in range(1, top + 1):
        w = c[k:] - c[:-k]
        if w.max() - w.min() > 1:
            return False
    return True
