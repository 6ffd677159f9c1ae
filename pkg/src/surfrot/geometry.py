"""Poincare disk kernel.

Interior points are plain ``complex`` numbers validated by :func:`disk_point`;
ideal points are :class:`BoundaryPoint`.  Isometries are stored in a
scale-factored form so that products of many letters keep finite entries.
"""
import cmath
import math
from dataclasses import dataclass

from .exceptions import (
    DegenerateEndpoints,
    NotLoxodromic,
    NumericalOverflow,
    OutsideDisk,
)

TWO_PI = 2.0 * math.pi
BOUNDARY_TOL = 1e-15
ANGLE_TOL = 1e-12
# below this stored log-scale the ratio |b|/|a| carries the magnitude
_RATIO_REGIME = 1.0 - 1e-4


def disk_point(z):
    """Validate and return ``z`` as a point of the open unit disk."""
    z = complex(z)
    if not (abs(z) < 1.0 - BOUNDARY_TOL):
        raise OutsideDisk(f"|z| = {abs(z)!r} is not inside the unit disk")
    return z


def _wrap(theta):
    theta = math.fmod(theta, TWO_PI)
    if theta < 0.0:
        theta += TWO_PI
    if theta >= TWO_PI:
        theta = 0.0
    return theta


def angle_diff(t1, t2):
    """Signed difference ``t1 - t2`` wrapped into (-pi, pi]."""
    d = math.fmod(t1 - t2, TWO_PI)
    if d > math.pi:
        d -= TWO_PI
    elif d <= -math.pi:
        d += TWO_PI
    return d


@dataclass(frozen=True)
class BoundaryPoint:
    """Ideal point ``exp(i theta)`` with theta normalised to [0, 2 pi)."""

    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", _wrap(float(self.theta)))

    @classmethod
    def from_complex(cls, z):
        return cls(cmath.phase(z))

    @property
    def z(self):
        return cmath.exp(1j * self.theta)

    def distance(self, other):
        """Angular distance on the circle."""
        return abs(angle_diff(self.theta, other.theta))


@dataclass(frozen=True)
class FermiCoords:
    t: float
    r: float


def _normalized(A, B, s0):
    """Project the effective matrix ``e^s0 [[A, B], [conj B, conj A]]`` to SU(1,1)."""
    mA = abs(A)
    if mA == 0.0 or not math.isfinite(mA) or not math.isfinite(s0):
        raise NumericalOverflow("isometry entries left the representable range")
    a = A / mA
    q = abs(B) / mA
    if q * q < _RATIO_REGIME:
        s = -0.5 * math.log1p(-q * q)
        b = B / mA
    else:
        s = s0 + math.log(mA)
        if not math.isfinite(s):
            raise NumericalOverflow("log-scale is not finite")
        b = (B / abs(B)) * math.sqrt(-math.expm1(-2.0 * s))
    return a, b, s


class Isometry:
    """Orientation preserving isometry of the disk.

    The effective matrix is ``e^log_scale * [[a, b], [conj(b), conj(a)]]``
    with ``|a| = 1`` and ``|b|^2 = 1 - e^(-2 log_scale)``, so the effective
    determinant is one by construction.
    """

    __slots__ = ("a", "b", "log_scale")

    def __init__(self, a, b, log_scale=0.0, *, normalize=True):
        if normalize:
            a, b, log_scale = _normalized(complex(a), complex(b), float(log_scale))
        self.a = a
        self.b = b
        self.log_scale = log_scale

    # -- constructors -------------------------------------------------
    @classmethod
    def identity(cls):
        return cls(1.0 + 0j, 0j, 0.0, normalize=False)

    @classmethod
    def rotation(cls, phi):
        """Rotation ``z -> e^{i phi} z`` about the origin."""
        return cls(cmath.exp(0.5j * phi), 0j, 0.0, normalize=False)

    @classmethod
    def translation(cls, d, direction=0.0):
        """Translation by ``d`` along the diameter pointing at angle ``direction``."""
        half = 0.5 * d
        return cls(math.cosh(half), math.sinh(half) * cmath.exp(1j * direction))

    @classmethod
    def moving(cls, p):
        """The transvection taking 0 to ``p`` along the diameter through ``p``."""
        p = complex(p)
        return cls(1.0 + 0j, p, -0.5 * math.log1p(-abs(p) ** 2), normalize=False)

    @classmethod
    def from_matrix(cls, m):
        """Build from a 2x2 complex matrix of SU(1,1) shape (any positive scale)."""
        A, B = complex(m[0][0]), complex(m[0][1])
        det = abs(A) ** 2 - abs(B) ** 2
        if det <= 0.0:
            raise ValueError("matrix does not preserve the disk")
        return cls(A, B, -0.5 * math.log(det))

    # -- group structure ----------------------------------------------
    def __matmul__(self, other):
        return compose(self, other)

    def inverse(self):
        return Isometry(self.a.conjugate(), -self.b, self.log_scale, normalize=False)

    def __call__(self, p):
        return apply(self, p)

    # -- invariants ---------------------------------------------------
    @property
    def trace(self):
        """Absolute value of the effective trace (sign is not defined in PSU(1,1))."""
        return 2.0 * math.exp(self.log_scale) * abs(self.a.real)

    def log_half_trace(self):
        re = abs(self.a.real)
        if re == 0.0:
            return -math.inf
        return self.log_scale + math.log(re)

    def is_loxodromic(self, margin=1e-9):
        return self.log_half_trace() > math.log1p(0.5 * margin)

    def translation_length(self):
        u = self.log_half_trace()
        if u <= 0.0:
            return 0.0
        return 2.0 * _acosh_exp(u)

    def displacement(self):
        """Hyperbolic distance from 0 to its image."""
        return 2.0 * _acosh_exp(self.log_scale)

    def det_defect(self):
        """``|b|^2 + e^{-2 log_scale} - 1``: zero exactly when the effective determinant is one."""
        return abs(self.b) ** 2 + math.exp(-2.0 * self.log_scale) - 1.0

    def matrix(self):
        """Effective 2x2 matrix; overflows for large log-scale."""
        k = math.exp(self.log_scale)
        a, b = self.a * k, self.b * k
        return [[a, b], [b.conjugate(), a.conjugate()]]

    def isclose(self, other, tol=1e-9):
        """Equality as Mobius maps (``g`` and ``-g`` agree)."""
        if abs(self.log_scale - other.log_scale) > tol:
            return False
        same = abs(self.a - other.a) + abs(self.b - other.b)
        flip = abs(self.a + other.a) + abs(self.b + other.b)
        return min(same, flip) <= tol

    def to_dict(self):
        return {
            "a": [self.a.real, self.a.imag],
            "b": [self.b.real, self.b.imag],
            "log_scale": self.log_scale,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(complex(*d["a"]), complex(*d["b"]), d["log_scale"])

    def __repr__(self):
        return f"Isometry(a={self.a:.6g}, b={self.b:.6g}, log_scale={self.log_scale:.6g})"


def _acosh_exp(u):
    """acosh(e^u) for u >= 0 without overflow."""
    if u <= 0.0:
        return 0.0
    return u + math.log1p(math.sqrt(-math.expm1(-2.0 * u)))


def compose(g, h):
    """The isometry ``g o h``."""
    A = g.a * h.a + g.b * h.b.conjugate()
    B = g.a * h.b + g.b * h.a.conjugate()
    a, b, s = _normalized(A, B, g.log_scale + h.log_scale)
    return Isometry(a, b, s, normalize=False)


def mobius(g, z):
    """Raw action on a complex number; no validation."""
    return (g.a * z + g.b) / (g.b.conjugate() * z + g.a.conjugate())


def mobius_derivative(g, z):
    """Complex derivative of the action at ``z``."""
    den = g.b.conjugate() * z + g.a.conjugate()
    return math.exp(-2.0 * g.log_scale) / (den * den)


def apply(g, p):
    """Act on a disk point (complex) or a :class:`BoundaryPoint`."""
    if isinstance(p, BoundaryPoint):
        w = mobius(g, p.z)
        if not cmath.isfinite(w):
            raise NumericalOverflow("boundary image is not finite")
        return BoundaryPoint.from_complex(w)
    w = mobius(g, complex(p))
    if not (abs(w) < 1.0 - BOUNDARY_TOL):
        raise NumericalOverflow("image is too close to the boundary to be represented")
    return w


def direction_of(g, z):
    """Euclidean direction angle of ``g(z)``; valid even when the image rounds onto the circle."""
    return _wrap(cmath.phase(mobius(g, z)))


# -- distances ----------------------------------------------------------

def dist(p, q):
    """Hyperbolic distance ``2 artanh |p - q| / |1 - conj(p) q|``."""
    num = abs(p - q)
    if num == 0.0:
        return 0.0
    den = abs(1.0 - p.conjugate() * q)
    return 2.0 * math.atanh(min(num / den, 1.0 - 1e-17))


def dist_from_origin(z):
    return 2.0 * math.atanh(abs(z))


def dist_to_image(p, g, q):
    """``dist(p, g(q))`` computed through the scaled representation."""
    m = compose(compose(Isometry.moving(p).inverse(), g), Isometry.moving(q))
    return m.displacement()


def vertex_angle(v, p, q):
    """Interior angle at ``v`` of the geodesic triangle ``v, p, q``."""
    m = Isometry.moving(v).inverse()
    return abs(angle_diff(cmath.phase(mobius(m, q)), cmath.phase(mobius(m, p))))


def polygon_area(vertices):
    """Area of a convex geodesic polygon from its angle defect."""
    n = len(vertices)
    total = 0.0
    for k in range(n):
        total += vertex_angle(vertices[k], vertices[k - 1], vertices[(k + 1) % n])
    return (n - 2) * math.pi - total


def busemann(xi, p, base=0j):
    """Busemann function toward ``xi`` normalised to vanish at ``base``."""
    return _poisson_log(xi.z, p) - _poisson_log(xi.z, base)


def _poisson_log(xz, z):
    return math.log1p(-abs(z) ** 2) - 2.0 * math.log(abs(xz - z))


# -- geodesics ----------------------------------------------------------

class Geodesic:
    """Oriented unit-speed geodesic from ``alpha`` to ``omega``.

    ``frame`` maps the real diameter (oriented from -1 to 1, with 0 at time
    zero) onto this geodesic; ``origin`` is the point at time zero.
    """

    __slots__ = ("alpha", "omega", "frame")

    def __init__(self, alpha, omega, origin=None, *, frame=None):
        if alpha.distance(omega) <= ANGLE_TOL:
            raise DegenerateEndpoints("geodesic endpoints coincide")
        self.alpha = alpha
        self.omega = omega
        if frame is None:
            frame = _standard_frame(alpha, omega)
            if origin is not None:
                t = _fermi_in_frame(mobius(frame.inverse(), complex(origin)))[0]
                frame = compose(frame, Isometry.translation(t))
        self.frame = frame

    @property
    def origin(self):
        return mobius(self.frame, 0j)

    def point_at(self, t):
        return mobius(compose(self.frame, Isometry.translation(t)), 0j)

    def tangent_angle(self, t):
        """Euclidean angle of the unit tangent vector at time ``t``."""
        x = math.tanh(0.5 * t)
        g = self.frame
        return _wrap(cmath.phase(mobius_derivative(g, x)))

    def fermi(self, p):
        t, r = _fermi_in_frame(mobius(self.frame.inverse(), complex(p)))
        return FermiCoords(t, r)

    def point_from_fermi(self, t, r):
        w = Isometry.translation(t)
        return mobius(compose(self.frame, w), 1j * math.tanh(0.5 * r))

    def transformed(self, g):
        """Image geodesic ``g(self)`` with the origin carried along."""
        frame = compose(g, self.frame)
        return Geodesic(apply(g, self.alpha), apply(g, self.omega), frame=frame)

    def reparametrized(self, origin):
        return Geodesic(self.alpha, self.omega, origin)

    def reversed(self):
        return Geodesic(self.omega, self.alpha, frame=compose(self.frame, Isometry.rotation(math.pi)))

    def distance_to(self, p):
        return abs(self.fermi(p).r)

    def __repr__(self):
        return f"Geodesic(alpha={self.alpha.theta:.9f}, omega={self.omega.theta:.9f})"


def _standard_frame(alpha, omega):
    # midpoint of the shorter boundary arc; stays accurate for near-antipodal ends
    d = angle_diff(omega.theta, alpha.theta)
    psi = alpha.theta + 0.5 * d
    beta = 0.5 * d
    delta = abs(beta)
    h = -math.log(math.tan(0.5 * delta))
    turn = 0.5 * math.pi if beta > 0 else -0.5 * math.pi
    return compose(
        compose(Isometry.rotation(psi), Isometry.translation(h)), Isometry.rotation(turn)
    )


def _fermi_in_frame(z):
    """Fermi coordinates with respect to the real diameter."""
    t = math.log(abs(1.0 + z)) - math.log(abs(1.0 - z))
    m = abs(z)
    r = math.asinh(2.0 * z.imag / ((1.0 - m) * (1.0 + m)))
    return t, r


def geodesic_of(a, b, origin_hint=None):
    """Geodesic through or toward ``a`` then ``b`` (disk points or boundary points)."""
    if isinstance(a, BoundaryPoint) and isinstance(b, BoundaryPoint):
        g = Geodesic(a, b)
    else:
        pivot = a if not isinstance(a, BoundaryPoint) else b
        m = Isometry.moving(pivot)
        mi = m.inverse()
        other = b if pivot is a else a
        if isinstance(other, BoundaryPoint):
            w = mobius(mi, other.z)
        else:
            w = mobius(mi, complex(other))
            if abs(w) < 1e-15:
                raise DegenerateEndpoints("points coincide")
        phi = cmath.phase(w)
        if pivot is a:
            ends = (BoundaryPoint(phi + math.pi), BoundaryPoint(phi))
        else:
            ends = (BoundaryPoint(phi), BoundaryPoint(phi + math.pi))
        g = Geodesic(apply(m, ends[0]), apply(m, ends[1]))
    if origin_hint is not None:
        g = g.reparametrized(origin_hint)
    return g


def fermi_project(g, p):
    return g.fermi(p)


def point_from_fermi(g, t, r):
    return g.point_from_fermi(t, r)


def fixed_points(g):
    """(repelling, attracting) boundary fixed points of a loxodromic isometry."""
    if not g.is_loxodromic():
        raise NotLoxodromic(f"|trace| = {g.trace!r} does not exceed 2")
    disc = math.sqrt(max(g.a.real ** 2 - math.exp(-2.0 * g.log_scale), 0.0))
    bc = g.b.conjugate()
    z1 = (1j * g.a.imag + disc) / bc
    z2 = (1j * g.a.imag - disc) / bc
    ac = g.a.conjugate()
    if abs(bc * z1 + ac) > abs(bc * z2 + ac):
        z1, z2 = z2, z1
    return BoundaryPoint.from_complex(z1), BoundaryPoint.from_complex(z2)


def axis_of(g):
    """Invariant geodesic oriented toward the attracting fixed point, and translation length."""
    rep, att = fixed_points(g)
    return Geodesic(rep, att), g.translation_length()


def separates(g, x, y):
    """True when boundary points ``x`` and ``y`` lie on opposite sides of ``g``."""
    return _side(g, x) * _side(g, y) < 0


def _side(g, x):
    a, w = g.alpha.theta, g.omega.theta
    if x.distance(g.alpha) <= ANGLE_TOL or x.distance(g.omega) <= ANGLE_TOL:
        return 0
    span = _wrap(w - a)
    return 1 if _wrap(x.theta - a) < span else -1


def cross_angle(g1, g2):
    """Intersection point and angle in (0, pi) of two geodesics, or None."""
    if not separates(g1, g2.alpha, g2.omega):
        return None
    inv = g1.frame.inverse()
    w_alpha = _cayley_boundary(apply(inv, g2.alpha).theta)
    w_omega = _cayley_boundary(apply(inv, g2.omega).theta)
    y = math.sqrt(-w_alpha * w_omega)
    c = 0.5 * (w_alpha + w_omega)
    rho = 0.5 * abs(w_omega - w_alpha)
    cosang = c / rho if w_omega > 0 else -c / rho
    angle = math.acos(max(-1.0, min(1.0, cosang)))
    point = mobius(g1.frame, (y - 1.0) / (y + 1.0))
    return point, angle


def _cayley_boundary(theta):
    # boundary point e^{i theta} in the upper half plane where the real diameter is the imaginary axis
    return -1.0 / math.tan(0.5 * theta)


def geodesic_distance(g1, g2):
    """Distance between two geodesics; zero when they cross or share an endpoint."""
    if separates(g1, g2.alpha, g2.omega):
        return 0.0
    x1, x2, y1, y2 = g1.alpha.z, g1.omega.z, g2.alpha.z, g2.omega.z
    den = (x1 - y2) * (x2 - y1)
    if abs(den) == 0.0:
        return 0.0
    c = (((x1 - y1) * (x2 - y2)) / den).real
    if c <= 0.0:
        return 0.0
    c = min(c, 1.0 / c)
    if c >= 1.0:
        return 0.0
    return math.acosh((1.0 + c) / (1.0 - c))


def same_geodesic(g1, g2, tol=1e-3):
    """Unoriented endpoint-set coincidence within ``tol`` radians."""
    direct = max(g1.alpha.distance(g2.alpha), g1.omega.distance(g2.omega))
    flipped = max(g1.alpha.distance(g2.omega), g1.omega.distance(g2.alpha))
    return min(direct, flipped) <= tol
