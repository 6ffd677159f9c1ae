"""Finite-time estimators over sampled orbits.

An orbit is stored in the quotient: reduced points ``y_n`` in the
Dirichlet domain together with the deck words ``a_n`` such that
``f(y_n) = a_n . y_{n+1}``.  Lifted quantities are recovered from the
scaled cumulative products ``V_n = a_0 ... a_{n-1}`` or, for geodesic
tracking, from per-step local frames that never leave the domain's
neighbourhood.
"""
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .dynamics import step
from .exceptions import CoincidentLimits, NoEscape
from .geometry import (
    BoundaryPoint,
    Geodesic,
    Isometry,
    angle_diff,
    compose,
    dist_to_image,
    geodesic_of,
    mobius,
    mobius_derivative,
)
from .group import HomologyVector, abelianize

SPEED_FLOOR = 1e-3
GAP_FLOOR = 1e-2
TRACKED, NO_SPEED, COINCIDENT = "Tracked", "NoSpeed", "CoincidentLimits"


@dataclass
class OrbitRecord:
    """Sampled orbit of an equivariant map."""

    seed: complex
    seed_word: object
    points: np.ndarray
    step_a: np.ndarray
    step_b: np.ndarray
    step_s: np.ndarray
    cum_a: np.ndarray
    cum_b: np.ndarray
    cum_s: np.ndarray
    increments: np.ndarray
    L: np.ndarray
    genus: int
    group: object = field(repr=False, default=None)
    center: complex = None
    backward: "OrbitRecord" = None

    @property
    def N(self):
        return len(self.points) - 1

    def step_isometry(self, n):
        return Isometry(self.step_a[n], self.step_b[n], self.step_s[n], normalize=False)

    def cumulative(self, n):
        return Isometry(self.cum_a[n], self.cum_b[n], self.cum_s[n], normalize=False)

    def homology_partials(self):
        """Running sums of the abelianized cocycle, shape (N+1, 2g)."""
        out = np.zeros((self.N + 1, 2 * self.genus), dtype=np.int64)
        np.cumsum(self.increments, axis=0, out=out[1:])
        return out

    def to_dict(self):
        d = {
            "seed": [self.seed.real, self.seed.imag],
            "seed_word": self.seed_word.format(),
            "N": self.N,
            "L_final": float(self.L[-1]),
            "homology_sum": [int(x) for x in self.increments.sum(axis=0)],
            "final_point": [self.points[-1].real, self.points[-1].imag],
        }
        if self.backward is not None:
            d["backward"] = self.backward.to_dict()
        return d


def run_orbit(f, seed, N, with_backward=False, center=None):
    """Iterate ``f`` from ``seed`` for ``N`` steps, reducing and accumulating deck words."""
    if N < 0 or N > 10**7:
        raise ValueError("N must lie in [0, 1e7]")
    G = f.group
    y0, w0 = G.reduce(seed, center)
    points = np.empty(N + 1, dtype=complex)
    sa = np.empty(N, dtype=complex)
    sb = np.empty(N, dtype=complex)
    ss = np.empty(N)
    ca = np.empty(N + 1, dtype=complex)
    cb = np.empty(N + 1, dtype=complex)
    cs = np.empty(N + 1)
    inc = np.zeros((N, 2 * G.genus), dtype=np.int64)
    L = np.zeros(N + 1)
    points[0] = y0
    V = Isometry.identity()
    ca[0], cb[0], cs[0] = V.a, V.b, V.log_scale
    y = y0
    elems, homs = {}, {}
    for n in range(N):
        try:
            y, w = step(f, y, center)
        except Exception as exc:
            exc.args = (f"step {n}: {exc}",) + exc.args[1:]
            raise
        g = elems.get(w.letters)
        if g is None:
            g = elems[w.letters] = G.element(w)
            homs[w.letters] = [int(c) for c in abelianize(w, G.genus).coords]
        V = compose(V, g)
        points[n + 1] = y
        sa[n], sb[n], ss[n] = g.a, g.b, g.log_scale
        ca[n + 1], cb[n + 1], cs[n + 1] = V.a, V.b, V.log_scale
        inc[n] = homs[w.letters]
        L[n + 1] = dist_to_image(y0, V, y)
    rec = OrbitRecord(complex(seed), w0, points, sa, sb, ss, ca, cb, cs, inc, L, G.genus, G, center)
    if with_backward:
        rec.backward = run_orbit(f.inverse(), seed, N, False, center)
    return rec


# -- speed and limits -----------------------------------------------------

def rotation_speed(rec):
    """``(theta_forward, theta_backward, diagnostics)`` from ``L_N / N``."""
    if rec.N < 100:
        raise ValueError("rotation speed needs N >= 100")
    n = np.arange(1, rec.N + 1)
    series = rec.L[1:] / n
    fwd = float(series[-1])
    bwd = float(rec.backward.L[-1] / rec.N) if rec.backward is not None else None
    diag = {
        "series": series,
        "cesaro_tail": float(series[-max(1, rec.N // 10):].mean()),
        "subadditivity_violations": _subadditivity_violations(rec.L),
        "max_step": float(np.max(np.diff(rec.L))) if rec.N else 0.0,
    }
    return fwd, bwd, diag


def _subadditivity_violations(L, slack=1e-9):
    N = len(L) - 1
    if N < 1:
        return 0
    l1 = float(np.max(np.abs(np.diff(L))))
    grid = np.unique(np.geomspace(1, N, num=min(N, 60)).astype(int))
    bad = 0
    for m in grid:
        for k in grid:
            if m + k <= N and L[m + k] > L[m] + l1 * k + slack:
                bad += 1
    return bad


def _direction_series(rec):
    return np.array(
        [math.atan2(*reversed(_dir_xy(rec.cumulative(n), rec.points[n]))) for n in range(rec.N + 1)]
    )


def _dir_xy(V, y):
    w = mobius(V, y)
    return w.real, w.imag


def _final_frame_limit(rec):
    """Forward endpoint seen from ``y_N`` in frame N."""
    VN = rec.cumulative(rec.N)
    y0, yN = rec.points[0], rec.points[-1]
    inv = VN.inverse()
    if VN.displacement() < 30.0:
        back = mobius(inv, y0)
        if abs(back - yN) < 1e-12:
            raise NoEscape("orbit did not move")
        return geodesic_of(back, yN).omega
    return geodesic_of(BoundaryPoint.from_complex(mobius(inv, y0)), yN).omega


def limit_frames(rec):
    """Forward limit expressed in every frame: ``omega_n`` with ``omega_n = a_n omega_{n+1}``."""
    out = [None] * (rec.N + 1)
    om = _final_frame_limit(rec)
    out[rec.N] = om
    z = om.z
    for n in range(rec.N - 1, -1, -1):
        g = rec.step_isometry(n)
        z = mobius(g, z)
        z /= abs(z)
        out[n] = BoundaryPoint.from_complex(z)
    return out


def boundary_limits(rec, speed_floor=SPEED_FLOOR):
    """``(alpha_hat, omega_hat, convergence_gap)`` as seen from the seed."""
    fwd, bwd, _ = rotation_speed(rec)
    if fwd <= speed_floor:
        raise NoEscape(f"forward speed {fwd:.3g} is below the floor {speed_floor}")
    omega = limit_frames(rec)[0]
    alpha = None
    if rec.backward is not None:
        if bwd <= speed_floor:
            raise NoEscape(f"backward speed {bwd:.3g} is below the floor {speed_floor}")
        alpha = limit_frames(rec.backward)[0]
    dirs = _direction_series(rec)
    tail = dirs[-max(2, rec.N // 10):]
    gap = float(max(abs(angle_diff(t, omega.theta)) for t in tail))
    if rec.seed_word.letters:
        # report in the frame of the seed itself rather than its reduced copy
        w = rec.group.element(rec.seed_word)
        omega = _boundary_image(w, omega)
        alpha = None if alpha is None else _boundary_image(w, alpha)
    return alpha, omega, gap


def _boundary_image(g, xi):
    z = mobius(g, xi.z)
    return BoundaryPoint.from_complex(z / abs(z))


def direction_increments(rec):
    """Angular increments of the direction of the lifted orbit seen from the seed."""
    dirs = _direction_series(rec)
    return np.abs([angle_diff(dirs[n + 1], dirs[n]) for n in range(rec.N)])


@dataclass
class TrackingEstimate:
    theta_forward: float
    theta_backward: float
    alpha_hat: BoundaryPoint
    omega_hat: BoundaryPoint
    geodesic: Geodesic
    residuals: np.ndarray
    status: str
    times: np.ndarray = None
    offsets: np.ndarray = None
    distances: np.ndarray = None
    frames: list = field(default=None, repr=False)
    origins: np.ndarray = None

    def trend_decreasing(self, atol=1e-9):
        return residual_trend(self.residuals, atol)

    def to_dict(self):
        d = {
            "status": self.status,
            "theta_forward": self.theta_forward,
            "theta_backward": self.theta_backward,
        }
        if self.status == TRACKED:
            d.update(
                alpha=self.alpha_hat.theta,
                omega=self.omega_hat.theta,
                final_residual=float(self.residuals[-1]),
                trend_decreasing=bool(self.trend_decreasing()),
            )
        return d


def residual_trend(res, atol=1e-9):
    """True when the mean of the last decade does not exceed the mean of the first."""
    k = max(1, len(res) // 10)
    return float(np.mean(res[-k:])) <= float(np.mean(res[:k])) + atol


def tracking_geodesic(rec, speed_floor=SPEED_FLOOR, gap_floor=GAP_FLOOR):
    """Normalised tracking geodesic with residuals ``dist(f^n x, gamma(n theta)) / n``."""
    if rec.backward is None:
        raise ValueError("tracking needs a record with backward samples")
    fwd, bwd, _ = rotation_speed(rec)
    if fwd <= speed_floor or bwd <= speed_floor:
        return TrackingEstimate(fwd, bwd, None, None, None, np.zeros(0), NO_SPEED)
    omegas = limit_frames(rec)
    alpha0 = limit_frames(rec.backward)[0]
    omega0 = omegas[0]
    if alpha0.distance(omega0) < gap_floor:
        raise CoincidentLimits(
            f"limit points {alpha0.theta:.6f} and {omega0.theta:.6f} are closer than {gap_floor}"
        )
    N = rec.N
    y0 = rec.points[0]
    frames = [None] * (N + 1)
    origins = np.empty(N + 1)
    times = np.empty(N + 1)
    offsets = np.empty(N + 1)
    al = alpha0.z
    G0 = Geodesic(alpha0, omega0)
    frames[0] = G0
    f0 = G0.fermi(y0)
    origins[0] = -f0.t
    times[0], offsets[0] = 0.0, f0.r
    for n in range(N):
        g = rec.step_isometry(n)
        al = mobius(g.inverse(), al)
        al /= abs(al)
        Gn1 = Geodesic(BoundaryPoint.from_complex(al), omegas[n + 1])
        frames[n + 1] = Gn1
        c = frames[n].fermi(mobius(g, Gn1.origin)).t
        origins[n + 1] = origins[n] + c
        fc = Gn1.fermi(rec.points[n + 1])
        times[n + 1] = origins[n + 1] + fc.t
        offsets[n + 1] = fc.r
    ns = np.arange(1, N + 1)
    d = np.arccosh(np.cosh(offsets[1:]) * np.cosh(times[1:] - ns * fwd))
    geo = Geodesic(alpha0, omega0, y0)
    seed_geo = geo.transformed(rec.group.element(rec.seed_word))
    return TrackingEstimate(
        fwd, bwd, seed_geo.alpha, seed_geo.omega, seed_geo, d / ns, TRACKED,
        times=times, offsets=offsets, distances=d, frames=frames, origins=origins,
    )


def homology_rotation(rec):
    """Exact mean of the abelianized cocycle and its running series."""
    total = rec.increments.sum(axis=0)
    vec = HomologyVector(Fraction(int(x), max(rec.N, 1)) for x in total)
    partial = rec.homology_partials()
    ns = np.maximum(np.arange(rec.N + 1), 1)[:, None]
    return vec, partial / ns


def time_cocycle_mean(rec, est):
    """Mean of the time cocycle: Fermi time gained per step along the tracking geodesic."""
    if est.status != TRACKED:
        raise ValueError("time cocycle needs a tracked estimate")
    T = est.times
    inc = np.diff(T)
    mean = float(T[-1] / rec.N)
    series = T[1:] / np.arange(1, rec.N + 1)
    return mean, {"series": series, "increments": inc, "max_increment": float(inc.max()) if len(inc) else 0.0}


# -- equidistribution -------------------------------------------------------

@dataclass
class EmpiricalMeasure:
    bins: dict
    cells: int
    sectors: int
    box: float

    @property
    def total_mass(self):
        return float(sum(self.bins.values()))

    def to_array(self):
        out = np.zeros((self.cells, self.cells, self.sectors))
        for (i, j, k), m in self.bins.items():
            out[i, j, k] = m
        return out

    def total_variation(self, other):
        keys = set(self.bins) | set(other.bins)
        return 0.5 * sum(abs(self.bins.get(k, 0.0) - other.bins.get(k, 0.0)) for k in keys)

    def support(self, tol=0.0):
        return {k for k, m in self.bins.items() if m > tol}


def bin_index(p0, angle, cells, sectors, box):
    i = min(cells - 1, max(0, int((p0.real + box) / (2 * box) * cells)))
    j = min(cells - 1, max(0, int((p0.imag + box) / (2 * box) * cells)))
    k = int((angle % (2 * math.pi)) / (2 * math.pi) * sectors) % sectors
    return i, j, k


def unit_tangent_bin(G, p, angle, cells=32, sectors=24):
    """Bin of the unit vector at ``p`` with Euclidean direction ``angle`` after reduction."""
    p0, w = G.reduce(p)
    if w.letters:
        winv = G.element(w).inverse()
        angle = angle + math.atan2(*reversed(_complex_xy(mobius_derivative(winv, p))))
    box = abs(G.domain_vertices[0])
    return bin_index(p0, angle, cells, sectors, box)


def _complex_xy(z):
    return z.real, z.imag


def equidistribute(rec, est, cells=32, sectors=24, ds=0.125):
    """Arclength measure of the tracking segment pushed to the unit tangent bundle of the surface."""
    if est.status != TRACKED:
        raise ValueError("equidistribution needs a tracked estimate")
    G = rec.group
    T = est.times
    end = float(T[-1])
    n_samples = max(1, int(math.ceil(abs(end) / ds)))
    s_vals = (np.arange(n_samples) + 0.5) * (end / n_samples)
    order = np.argsort(T, kind="stable")
    Ts = T[order]
    counts = {}
    for s in s_vals:
        k = int(np.searchsorted(Ts, s))
        cand = [order[j] for j in (k - 1, k) if 0 <= j < len(Ts)]
        n = min(cand, key=lambda j: abs(T[j] - s))
        Gn = est.frames[n]
        local = s - est.origins[n]
        p = Gn.point_at(local)
        ang = Gn.tangent_angle(local)
        key = unit_tangent_bin(G, p, ang, cells, sectors)
        counts[key] = counts.get(key, 0) + 1
    total = float(n_samples)
    bins = {k: v / total for k, v in counts.items()}
    return EmpiricalMeasure(bins, cells, sectors, abs(G.domain_vertices[0]))


def axis_measure(G, geodesic, length, cells=32, sectors=24, ds=0.125):
    """Arclength histogram of a closed geodesic's lift over one period."""
    n = max(1, int(math.ceil(length / ds)))
    counts = {}
    for i in range(n):
        t = (i + 0.5) * length / n
        key = unit_tangent_bin(G, geodesic.point_at(t), geodesic.tangent_angle(t), cells, sectors)
        counts[key] = counts.get(key, 0) + 1
    return EmpiricalMeasure({k: v / n for k, v in counts.items()}, cells, sectors, abs(G.domain_vertices[0]))


# -- scikit-learn style wrappers -----------------------------------------------

def _check_record(rec, backward=False):
    if not isinstance(rec, OrbitRecord):
        raise TypeError(f"expected an OrbitRecord, got {type(rec).__name__}")
    if backward and rec.backward is None:
        raise ValueError("record has no backward samples")
    return rec


class TrackingEstimator(BaseEstimator):
    """Fit a normalised tracking geodesic to an orbit record."""

    def __init__(self, speed_floor=SPEED_FLOOR, gap_floor=GAP_FLOOR):
        self.speed_floor = speed_floor
        self.gap_floor = gap_floor

    def fit(self, X, y=None):
        rec = _check_record(X, backward=True)
        if not (self.speed_floor > 0 and self.gap_floor > 0):
            raise ValueError("floors must be positive")
        try:
            est = tracking_geodesic(rec, self.speed_floor, self.gap_floor)
        except CoincidentLimits:
            fwd, bwd, _ = rotation_speed(rec)
            est = TrackingEstimate(fwd, bwd, None, None, None, np.zeros(0), COINCIDENT)
        self.estimate_ = est
        self.status_ = est.status
        self.theta_ = est.theta_forward
        self.theta_backward_ = est.theta_backward
        self.geodesic_ = est.geodesic
        self.residuals_ = est.residuals
        self.record_ = rec
        return self

    def predict(self, X):
        """Points ``gamma(n theta)`` for the step indices in ``X``."""
        check_is_fitted(self, "estimate_")
        if self.status_ != TRACKED:
            raise ValueError(f"no tracking geodesic (status {self.status_})")
        ns = np.asarray(X, dtype=float).ravel()
        return np.array([self.geodesic_.point_at(n * self.theta_) for n in ns])

    def score(self, X=None, y=None):
        """Negative final normalised residual."""
        check_is_fitted(self, "estimate_")
        return -float(self.residuals_[-1]) if len(self.residuals_) else -math.inf


class EquidistributionTransformer(TransformerMixin, BaseEstimator):
    """Map tracked orbits to flattened unit-tangent histograms."""

    def __init__(self, cells=32, sectors=24, ds=0.125):
        self.cells = cells
        self.sectors = sectors
        self.ds = ds

    def fit(self, X, y=None):
        self.n_features_out_ = self.cells * self.cells * self.sectors
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_out_")
        rows = []
        for rec, est in X:
            _check_record(rec)
            m = equidistribute(rec, est, self.cells, self.sectors, self.ds)
            rows.append(m.to_array().ravel())
        return np.vstack(rows) if rows else np.zeros((0, self.n_features_out_))


class HomologyRotation(BaseEstimator):
    """Homological rotation vector of an orbit record."""

    def fit(self, X, y=None):
        rec = _check_record(X)
        self.vector_, self.series_ = homology_rotation(rec)
        return self

    def predict(self, X=None):
        check_is_fitted(self, "vector_")
        return self.vector_.to_float()


__all__ = [
    "OrbitRecord",
    "TrackingEstimate",
    "EmpiricalMeasure",
    "run_orbit",
    "rotation_speed",
    "boundary_limits",
    "tracking_geodesic",
    "homology_rotation",
    "time_cocycle_mean",
    "equidistribute",
    "TrackingEstimator",
    "EquidistributionTransformer",
    "HomologyRotation",
]
