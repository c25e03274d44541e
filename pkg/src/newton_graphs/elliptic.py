"""Weierstrass sigma/zeta evaluation and sigma-quotient elliptic functions.

Everything is evaluated through the Jacobi theta function ``theta_1`` with
nome ``q = exp(i*pi*tau)``, ``tau = omega2/omega1``.  Arguments are first
reduced into the period cell centred at the origin using the quasi-periodicity
of sigma, so the theta series only ever sees ``|Im v| <= pi*Im(tau)/2``.

Periods are *full* periods: ``f(z + omega_k) = f(z)`` and
``zeta(z + omega_k) = zeta(z) + eta_k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    ConstraintUnsatisfiable,
    DegenerateFunction,
    InvalidLattice,
    PoleAtLattice,
    TooCloseToSingularity,
    ZeroPoleCollision,
)

# relative size below which theta terms are dropped
_SERIES_EPS = 1e-18


@dataclass(frozen=True)
class Lattice:
    """Period lattice spanned by ``omega1`` and ``omega2`` (Im(omega2/omega1) > 0)."""

    omega1: complex = 1.0
    omega2: complex = 1j

    def __post_init__(self):
        object.__setattr__(self, "omega1", complex(self.omega1))
        object.__setattr__(self, "omega2", complex(self.omega2))
        if self.omega1 == 0 or not (self.omega2 / self.omega1).imag > 0:
            raise InvalidLattice(
                f"need Im(omega2/omega1) > 0, got omega1={self.omega1}, omega2={self.omega2}"
            )

    @classmethod
    def from_tau(cls, tau) -> "Lattice":
        return cls(1.0, complex(tau))

    @property
    def tau(self) -> complex:
        return self.omega2 / self.omega1

    @property
    def nome(self) -> complex:
        return np.exp(1j * np.pi * self.tau)

    @cached_property
    def _n_terms(self) -> int:
        # term n is bounded by |q|^(n^2 - 1/4) after reduction
        lq = -math.log(abs(self.nome))
        n = 1
        while lq * (n * n - 0.25) < -math.log(_SERIES_EPS):
            n += 1
        return n + 1

    @cached_property
    def _coeffs(self):
        n = np.arange(self._n_terms)
        k = 2 * n + 1
        # (-1)^n q^((n+1/2)^2), with q^x = exp(i*pi*tau*x)
        c = (-1.0) ** n * np.exp(1j * np.pi * self.tau * (n + 0.5) ** 2)
        return k.astype(float), c

    @cached_property
    def _theta1_prime0(self) -> complex:
        k, c = self._coeffs
        return complex(2 * np.sum(c * k))

    @cached_property
    def eta1(self) -> complex:
        k, c = self._coeffs
        t3 = -2 * np.sum(c * k**3)
        return complex(-(np.pi**2) * t3 / (3 * self.omega1 * self._theta1_prime0))

    @cached_property
    def eta2(self) -> complex:
        # 2*zeta(omega2/2) straight from the series, so the Legendre relation
        # remains an independent check of the evaluator
        return complex(2 * _zeta_reduced(self, np.asarray(self.omega2 / 2)))

    def legendre_residual(self) -> float:
        """Relative residual of ``eta1*omega2 - eta2*omega1 = 2*pi*i``."""
        lhs = self.eta1 * self.omega2 - self.eta2 * self.omega1
        return abs(lhs - 2j * np.pi) / (2 * np.pi)

    # -- coordinates -------------------------------------------------------

    def coordinates(self, z):
        """Real coordinates (s, t) with ``z = s*omega1 + t*omega2``."""
        u = np.asarray(z, dtype=complex) / self.omega1
        t = u.imag / self.tau.imag
        s = u.real - t * self.tau.real
        return s, t

    def split(self, z):
        """Return ``(z0, m, n)`` with ``z = z0 + m*omega1 + n*omega2``, z0 centred."""
        s, t = self.coordinates(z)
        m = np.round(s)
        n = np.round(t)
        z0 = np.asarray(z, dtype=complex) - m * self.omega1 - n * self.omega2
        return z0, m, n

    def reduce(self, z):
        """Representative of ``z`` mod the lattice in the half-open cell ``[0,1)^2``."""
        s, t = self.coordinates(z)
        m = np.floor(s)
        n = np.floor(t)
        return np.asarray(z, dtype=complex) - m * self.omega1 - n * self.omega2

    def torus_distance(self, z, w):
        """Distance between ``z`` and ``w`` on the torus (nearest lattice image)."""
        d0, _, _ = self.split(np.asarray(z, dtype=complex) - np.asarray(w, dtype=complex))
        best = np.abs(d0)
        for i in (-1, 0, 1):
            for j in (-1, 0, 1):
                if i or j:
                    best = np.minimum(best, np.abs(d0 + i * self.omega1 + j * self.omega2))
        return best

    def nearest_image(self, point, z):
        """Lattice image of ``point`` closest to ``z``."""
        d0, _, _ = self.split(np.asarray(z, dtype=complex) - complex(point))
        best = d0
        for i in (-1, 0, 1):
            for j in (-1, 0, 1):
                cand = d0 + i * self.omega1 + j * self.omega2
                best = np.where(np.abs(cand) < np.abs(best), cand, best)
        return np.asarray(z, dtype=complex) - best

    def congruent(self, z, w, tol=1e-9) -> bool:
        return bool(self.torus_distance(z, w) <= tol)

    def to_dict(self):
        return {"omega1": [self.omega1.real, self.omega1.imag],
                "omega2": [self.omega2.real, self.omega2.imag]}


def _theta_parts(lat: Lattice, v):
    """theta_1 and its first two derivatives at ``v`` (arrays)."""
    k, c = lat._coeffs
    v = np.asarray(v, dtype=complex)[..., None]
    kv = k * v
    s = np.sin(kv)
    co = np.cos(kv)
    th = 2 * np.sum(c * s, axis=-1)
    th1 = 2 * np.sum(c * k * co, axis=-1)
    th2 = -2 * np.sum(c * k * k * s, axis=-1)
    return th, th1, th2


def _zeta_reduced(lat: Lattice, z0):
    w1 = lat.omega1
    v = np.pi * z0 / w1
    th, th1, _ = _theta_parts(lat, v)
    return lat.eta1 * z0 / w1 + (np.pi / w1) * th1 / th


def log_sigma(z, lattice: Lattice):
    """Branch of ``log sigma(z)``; only ``exp`` and the real part are meaningful."""
    z = np.asarray(z, dtype=complex)
    z0, m, n = lattice.split(z)
    w1 = lattice.omega1
    v = np.pi * z0 / w1
    th, _, _ = _theta_parts(lattice, v)
    with np.errstate(divide="ignore"):
        base = (np.log(w1 / np.pi) + lattice.eta1 * z0**2 / (2 * w1)
                + np.log(th) - np.log(lattice._theta1_prime0))
    w = m * lattice.omega1 + n * lattice.omega2
    eta_w = m * lattice.eta1 + n * lattice.eta2
    parity = (m + n + m * n) % 2
    return base + eta_w * (z0 + w / 2) + 1j * np.pi * parity


def sigma(z, lattice: Lattice):
    """Weierstrass sigma function for ``lattice``."""
    z = np.asarray(z, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.exp(log_sigma(z, lattice))
    z0, _, _ = lattice.split(z)
    out = np.where(z0 == 0, 0.0, out)
    return out if out.ndim else complex(out)


def zeta(z, lattice: Lattice):
    """Weierstrass zeta function ``sigma'/sigma``."""
    z = np.asarray(z, dtype=complex)
    z0, m, n = lattice.split(z)
    if np.any(z0 == 0):
        raise PoleAtLattice("zeta has a pole at every lattice point")
    out = _zeta_reduced(lattice, z0) + m * lattice.eta1 + n * lattice.eta2
    return out if out.ndim else complex(out)


def wp(z, lattice: Lattice):
    """Weierstrass p-function ``-zeta'``."""
    z = np.asarray(z, dtype=complex)
    z0, _, _ = lattice.split(z)
    if np.any(z0 == 0):
        raise PoleAtLattice("wp has a pole at every lattice point")
    w1 = lattice.omega1
    th, th1, th2 = _theta_parts(lattice, np.pi * z0 / w1)
    out = -lattice.eta1 / w1 - (np.pi / w1) ** 2 * (th2 * th - th1**2) / th**2
    return out if out.ndim else complex(out)


# -- elliptic functions from zero/pole data --------------------------------

@dataclass(frozen=True)
class ZeroPoleData:
    """Zeros ``a_1..a_r`` and poles ``b_1..b_r``; ``poles[-1]`` may be ``None`` (auto)."""

    zeros: tuple
    poles: tuple

    def __post_init__(self):
        zs = tuple(complex(a) for a in self.zeros)
        ps = tuple(None if b is None else complex(b) for b in self.poles)
        object.__setattr__(self, "zeros", zs)
        object.__setattr__(self, "poles", ps)
        if len(zs) != len(ps):
            raise ConstraintUnsatisfiable("need as many poles as zeros")
        if len(zs) < 2:
            raise ConstraintUnsatisfiable("order must be at least 2")
        if any(b is None for b in ps[:-1]):
            raise ConstraintUnsatisfiable("only the last pole may be left automatic")

    @property
    def order(self) -> int:
        return len(self.zeros)


@dataclass(frozen=True)
class EllipticFunction:
    """``scale * prod sigma(z - a_i) / prod sigma(z - b_j)`` with ``sum a = sum b`` exactly.

    ``sigma_poles`` are the poles as they enter the quotient (the last one is
    the closing point, possibly outside the cell); ``poles`` are their
    representatives in the cell.
    """

    lattice: Lattice
    zeros: tuple
    sigma_poles: tuple
    scale: complex = 1.0
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def order(self) -> int:
        return len(self.zeros)

    @property
    def poles(self) -> tuple:
        return tuple(complex(self.lattice.reduce(b)) for b in self.sigma_poles)

    @property
    def zeros_reduced(self) -> tuple:
        return tuple(complex(self.lattice.reduce(a)) for a in self.zeros)

    def log_abs(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.full(z.shape, math.log(abs(self.scale)))
        for a in self.zeros:
            out = out + log_sigma(z - a, self.lattice).real
        for b in self.sigma_poles:
            out = out - log_sigma(z - b, self.lattice).real
        return out

    def log_value(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.full(z.shape, complex(np.log(complex(self.scale))))
        for a in self.zeros:
            out = out + log_sigma(z - a, self.lattice)
        for b in self.sigma_poles:
            out = out - log_sigma(z - b, self.lattice)
        return out

    def __call__(self, z):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = np.exp(self.log_value(z))
        return out if out.ndim else complex(out)

    def logderiv(self, z):
        """``f'/f`` without the proximity check (used inside the flow)."""
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.zeros(z.shape, dtype=complex)
            for a in self.zeros:
                out = out + _zeta_any(z - a, self.lattice)
            for b in self.sigma_poles:
                out = out - _zeta_any(z - b, self.lattice)
        return out

    def logderiv_prime(self, z):
        """Derivative of ``f'/f``."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        for a in self.zeros:
            out = out - wp(z - a, self.lattice)
        for b in self.sigma_poles:
            out = out + wp(z - b, self.lattice)
        return out

    def derivative(self, z):
        return self(z) * self.logderiv(z)

    def reciprocal(self) -> "EllipticFunction":
        """``1/f`` as a sigma quotient (zeros and poles swapped)."""
        return EllipticFunction(self.lattice, tuple(self.sigma_poles), tuple(self.zeros),
                                1.0 / complex(self.scale))

    def rescaled(self, factor) -> "EllipticFunction":
        return EllipticFunction(self.lattice, self.zeros, self.sigma_poles,
                                complex(self.scale) * complex(factor))

    def translated(self, w) -> "EllipticFunction":
        """``z -> f(z - w)``: every zero and pole moved by ``w``."""
        w = complex(w)
        return EllipticFunction(self.lattice, tuple(a + w for a in self.zeros),
                                tuple(b + w for b in self.sigma_poles), self.scale)

    def periodicity_residual(self, samples) -> float:
        """Largest ``|f(z+omega_k) - f(z)| / (1 + |f(z)|)`` over the samples."""
        z = np.asarray(samples, dtype=complex)
        fz = self(z)
        worst = 0.0
        for w in (self.lattice.omega1, self.lattice.omega2):
            worst = max(worst, float(np.max(np.abs(self(z + w) - fz) / (1 + np.abs(fz)))))
        return worst


def _zeta_any(z, lattice):
    z0, m, n = lattice.split(z)
    return _zeta_reduced(lattice, z0) + m * lattice.eta1 + n * lattice.eta2


def canonical(data: ZeroPoleData, lattice: Lattice, scale=1.0, tol=1e-9,
              n_check=20, seed=0) -> EllipticFunction:
    """Sigma-quotient with the given zeros and poles.

    The last pole is replaced by the closing point
    ``sum(zeros) - sum(poles[:-1])`` so that the quotient is doubly periodic;
    an explicitly given last pole must be congruent to it.
    """
    zeros = data.zeros
    fixed = data.poles[:-1]
    closing = sum(zeros) - sum(fixed)
    last = data.poles[-1]
    if last is not None and not lattice.congruent(last, closing, tol):
        raise ConstraintUnsatisfiable(
            "sum of zeros and sum of poles differ mod the lattice "
            f"(last pole {last} vs closing point {closing})"
        )
    for i, a in enumerate(zeros):
        for j, b in enumerate(fixed):
            if lattice.congruent(a, b, tol):
                raise ZeroPoleCollision(f"zero {i} coincides with pole {j} mod the lattice")
        if lattice.congruent(a, closing, tol):
            if last is None:
                raise ConstraintUnsatisfiable(f"closing point {closing} collides with zero {i}")
            raise ZeroPoleCollision(f"zero {i} coincides with the last pole mod the lattice")
    if complex(scale) == 0:
        raise ConstraintUnsatisfiable("scale must be nonzero")
    f = EllipticFunction(lattice, tuple(zeros), tuple(fixed) + (complex(closing),), complex(scale))
    rng = np.random.default_rng(seed)
    s, t = rng.uniform(0.05, 0.95, (2, n_check))
    samples = s * lattice.omega1 + t * lattice.omega2
    # keep samples away from singularities so the check measures periodicity only
    sing = list(f.zeros) + list(f.sigma_poles)
    good = np.ones(n_check, bool)
    for p in sing:
        good &= lattice.torus_distance(samples, p) > 1e-2
    res = f.periodicity_residual(samples[good])
    if not res <= 1e-8:
        raise ConstraintUnsatisfiable(f"quotient is not doubly periodic (residual {res:.3g})")
    return f


def log_derivative(f: EllipticFunction, z, min_distance=1e-9):
    """``f'(z)/f(z) = sum zeta(z - a_i) - sum zeta(z - b_j)``."""
    z = np.asarray(z, dtype=complex)
    for p in list(f.zeros) + list(f.sigma_poles):
        if np.any(f.lattice.torus_distance(z, p) <= min_distance):
            raise TooCloseToSingularity(f"point within {min_distance} of a zero or pole")
    out = f.logderiv(z)
    return out if out.ndim else complex(out)


@dataclass(frozen=True)
class CriticalSet:
    points: tuple
    values: tuple

    @property
    def moduli(self):
        return tuple(abs(v) for v in self.values)

    def log_modulus_spread(self) -> float:
        lm = [math.log(m) for m in self.moduli]
        return max(lm) - min(lm)


def _dedupe(lattice, pts, tol):
    order = np.lexsort((pts.imag, pts.real))
    kept = []
    for p in pts[order]:
        if all(lattice.torus_distance(p, q) > tol for q in kept):
            kept.append(p)
    return kept


def _logderiv_pair(f: EllipticFunction, z):
    """``f'/f`` and its derivative, sharing one theta evaluation per point."""
    lat = f.lattice
    w1 = lat.omega1
    L = np.zeros(z.shape, dtype=complex)
    dL = np.zeros(z.shape, dtype=complex)
    pts = [(a, 1) for a in f.zeros] + [(b, -1) for b in f.sigma_poles]
    with np.errstate(divide="ignore", invalid="ignore"):
        for p, sgn in pts:
            z0, m, n = lat.split(z - p)
            th, th1, th2 = _theta_parts(lat, np.pi * z0 / w1)
            ze = lat.eta1 * z0 / w1 + (np.pi / w1) * th1 / th + m * lat.eta1 + n * lat.eta2
            pe = -lat.eta1 / w1 - (np.pi / w1) ** 2 * (th2 * th - th1**2) / th**2
            L += sgn * ze
            dL -= sgn * pe
    return L, dL


def critical_points(f: EllipticFunction, density=40, max_iter=80, sep_tol=1e-6) -> CriticalSet:
    """All ``2r`` critical points of ``f`` in the period cell.

    Damped Newton iteration on ``f'/f`` started from a uniform grid of
    ``density*r`` points per axis; the grid is doubled once if the count of
    distinct roots is not ``2r``.
    """
    lat = f.lattice
    r = f.order
    scale = max(abs(lat.omega1), abs(lat.omega2))
    for attempt in range(2):
        n = density * r * (2 ** attempt)
        s, t = np.meshgrid((np.arange(n) + 0.5) / n, (np.arange(n) + 0.5) / n)
        z = (s * lat.omega1 + t * lat.omega2).ravel()
        active = np.ones(z.shape, bool)
        for _ in range(max_iter):
            if not active.any():
                break
            za = z[active]
            L, dL = _logderiv_pair(f, za)
            with np.errstate(divide="ignore", invalid="ignore"):
                step = L / dL
            step = np.where(np.isfinite(step), step, 0)
            big = np.abs(step) > 0.05 * scale
            step = np.where(big, step * (0.05 * scale / np.abs(np.where(big, step, 1))), step)
            z[active] = lat.reduce(za - step)
            idx = np.flatnonzero(active)
            active[idx[np.abs(step) < 1e-15 * scale]] = False
        L = f.logderiv(z)
        ok = np.isfinite(L) & (np.abs(L) < 1e-9)
        for p in list(f.zeros) + list(f.sigma_poles):
            ok &= lat.torus_distance(z, p) > 1e-4
        cand = z[ok]
        if cand.size == 0:
            continue
        roots = _dedupe(lat, cand, 1e-7)
        # polish
        polished = []
        for c in roots:
            for _ in range(5):
                c = c - complex(f.logderiv(np.asarray(c))) / complex(f.logderiv_prime(np.asarray(c)))
            polished.append(complex(lat.reduce(c)))
        roots = _dedupe(lat, np.asarray(polished), 1e-7)
        if len(roots) == 2 * r:
            break
    if len(roots) != 2 * r:
        raise DegenerateFunction(f"found {len(roots)} critical points, expected {2 * r}")
    roots = [complex(c) for c in roots]
    for i, c in enumerate(roots):
        for d in roots[:i]:
            if lat.torus_distance(c, d) <= sep_tol:
                raise DegenerateFunction("critical points not separated")
        if abs(complex(f.logderiv_prime(np.asarray(c)))) < 1e-8:
            raise DegenerateFunction(f"multiple critical point near {c}")
    values = tuple(complex(f(c)) for c in roots)
    for c, v in zip(roots, values):
        fp = abs(v * complex(f.logderiv(np.asarray(c))))
        if fp > 1e-10 * max(1.0, abs(v)):
            raise DegenerateFunction(f"critical point {c} not converged (|f'|={fp:.3g})")
    return CriticalSet(tuple(roots), values)


def scalar_evaluator(f: EllipticFunction):
    """Fast pure-Python ``z -> (log f(z), f'(z)/f(z))`` for a single complex ``z``.

    Same formulas as the vectorised path; used inside ODE right-hand sides
    where per-call numpy overhead dominates.
    """
    import cmath

    lat = f.lattice
    w1, w2 = lat.omega1, lat.omega2
    tau = lat.tau
    eta1, eta2 = lat.eta1, lat.eta2
    k, c = lat._coeffs
    terms = [(float(kk), complex(cc)) for kk, cc in zip(k, c)]
    log_const = cmath.log(w1 / math.pi) - cmath.log(lat._theta1_prime0)
    pts = [(complex(a), 1) for a in f.zeros] + [(complex(b), -1) for b in f.sigma_poles]
    log_scale = cmath.log(complex(f.scale))
    pi = math.pi
    ti = tau.imag
    tr = tau.real
    sin, cos, log = cmath.sin, cmath.cos, cmath.log

    def evaluate(z):
        logf = log_scale
        L = 0j
        for p, sgn in pts:
            w = z - p
            u = w / w1
            t = u.imag / ti
            s = u.real - t * tr
            m = round(s)
            n = round(t)
            w0 = w - m * w1 - n * w2
            v = pi * w0 / w1
            th = 0j
            th1 = 0j
            for kk, cc in terms:
                kv = kk * v
                th += cc * sin(kv)
                th1 += cc * kk * cos(kv)
            th *= 2
            th1 *= 2
            if th == 0:
                return complex("-inf") if sgn > 0 else complex("inf"), complex("nan")
            W = m * w1 + n * w2
            eta_w = m * eta1 + n * eta2
            ls = (log_const + eta1 * w0 * w0 / (2 * w1) + log(th)
                  + eta_w * (w0 + W / 2) + 1j * pi * ((m + n + m * n) % 2))
            ze = eta1 * w0 / w1 + (pi / w1) * th1 / th + eta_w
            logf += sgn * ls
            L += sgn * ze
        return logf, L

    return evaluate


def random_data(order: int, lattice: Lattice, seed=0, min_separation=0.1,
                max_tries=10_000) -> ZeroPoleData:
    """Seeded random zeros and poles (last pole automatic), mutually separated."""
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        s, t = rng.uniform(0, 1, (2, 2 * order - 1))
        pts = [complex(a) for a in s * lattice.omega1 + t * lattice.omega2]
        closing = sum(pts[:order]) - sum(pts[order:])
        allp = pts + [complex(lattice.reduce(closing))]
        ok = all(lattice.torus_distance(allp[i], allp[j]) > min_separation
                 for i in range(len(allp)) for j in range(i))
        if ok:
            return ZeroPoleData(tuple(pts[:order]), tuple(pts[order:]) + (None,))
    raise ConstraintUnsatisfiable("could not place separated zeros and poles")
