"""Desingularized elliptic Newton flow, separatrix tracing and graph extraction.

The Newton field ``-f/f'`` is multiplied by ``|f'|^2 / (1 + |f|^4)``, which
gives ``-|f|^2 conj(f'/f) / (1 + |f|^4)``: smooth on the torus, vanishing
exactly at zeros, poles and critical points.  The rotated variant is the
same field times ``i``; its trajectories follow level lines of ``|f|``.

Each trajectory also integrates the "raw time" ``s`` of the undamped flow
(``ds/dt = |f'|^2 / (1 + |f|^4)``), in which ``log f`` moves at unit speed.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.integrate import DOP853

from .elliptic import EllipticFunction, critical_points, scalar_evaluator
from .errors import (
    AngleCollision,
    DegenerateFunction,
    GraphError,
    NonConvergence,
    SaddleConnection,
    StepSizeUnderflow,
)
from .torus_graph import EmbeddedGraph, build, dual, equivalent, self_dual_check

NEWTON = "newton"
ROTATED = "rotated"
FORWARD = 1
REVERSED = -1

RTOL = 1e-9
ATOL = 1e-12
# level-line trajectories wind many times around zeros and poles; the looser
# pair lets |f| drift by ~1e-7 over ten time units
TOLERANCES = {NEWTON: (RTOL, ATOL), ROTATED: (1e-12, 1e-14)}
SEED_OFFSET = 1e-6
ARRIVAL_RADIUS = 1e-3
CONNECTION_TOL = 1e-5
ANGLE_TOL = 1e-4
JACOBIAN_STEP = 1e-6
STAR_TOL = 1e-3
MAX_STEPS = 10**6


# -- the vector field ---------------------------------------------------------

def _damping(log_abs):
    # |f|^2 / (1 + |f|^4) written to stay finite for huge or tiny |f|
    return 0.5 / np.cosh(2.0 * np.asarray(log_abs, dtype=float))


def velocity(f: EllipticFunction, z, variant=NEWTON, sign=FORWARD, desingularized=True):
    """Velocity of the flow at ``z`` (vectorised)."""
    z = np.asarray(z, dtype=complex)
    with np.errstate(all="ignore"):
        L = f.logderiv(z)
        if desingularized:
            v = -_damping(f.log_abs(z)) * np.conj(L)
        else:
            v = -1.0 / L
        if variant == ROTATED:
            v = 1j * v
        elif variant != NEWTON:
            raise ValueError(f"unknown variant {variant!r}")
        v = sign * v
    # removable singularities: zeros, poles and critical points are rest points
    v = np.where(np.isfinite(v), v, 0)
    return v if v.ndim else complex(v)


@dataclass(frozen=True)
class FlowField:
    """The (desingularized) Newton or rotated field of ``function``.

    ``sign=REVERSED`` runs time backwards, which is the forward field of ``1/f``.
    """

    function: EllipticFunction
    variant: str = NEWTON
    sign: int = FORWARD
    desingularized: bool = True

    def __post_init__(self):
        if self.variant not in (NEWTON, ROTATED):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.sign not in (FORWARD, REVERSED):
            raise ValueError("sign must be +1 or -1")

    def __call__(self, z):
        return velocity(self.function, z, self.variant, self.sign, self.desingularized)

    def reversed(self) -> "FlowField":
        return FlowField(self.function, self.variant, -self.sign, self.desingularized)

    def rhs(self):
        """Scalar right-hand side ``(t, [x, y, s]) -> [dx, dy, ds]`` for the ODE solver."""
        ev = scalar_evaluator(self.function)
        rot = 1j if self.variant == ROTATED else 1.0
        sgn = float(self.sign)
        desing = self.desingularized

        def rhs(t, y):
            logf, L = ev(complex(y[0], y[1]))
            la = logf.real
            if not (math.isfinite(la) and cmath.isfinite(L)):
                return [0.0, 0.0, 0.0]
            if desing:
                k = 0.5 / math.cosh(2.0 * la) if abs(la) < 300 else 0.0
                v = -k * L.conjugate() * rot * sgn
                ds = k * (L.real * L.real + L.imag * L.imag)
            else:
                if L == 0:
                    return [0.0, 0.0, 0.0]
                v = -rot * sgn / L
                ds = 1.0
            return [v.real, v.imag, ds]

        return rhs


def field(f: EllipticFunction, variant, z, sign=FORWARD):
    """Desingularized velocity of the ``variant`` flow of ``f`` at ``z``."""
    return velocity(f, z, variant, sign)


# -- equilibria ---------------------------------------------------------------

@dataclass(frozen=True)
class Equilibrium:
    id: str
    kind: str  # "zero", "pole" or "saddle"
    point: complex


@dataclass(frozen=True)
class SaddleFrame:
    """Linearisation of the field at a saddle."""

    saddle: Equilibrium
    eigvals: tuple  # (negative, positive)
    stable_dirs: tuple  # (+d, -d), unit complex numbers
    unstable_dirs: tuple
    rotated_stable_dirs: tuple
    rotated_unstable_dirs: tuple

    @property
    def orthogonality_error(self) -> float:
        """Deviation of the stable/unstable angle from a right angle (radians)."""
        c = abs((self.stable_dirs[0].conjugate() * self.unstable_dirs[0]).real)
        return abs(math.asin(min(1.0, c)))


@dataclass(frozen=True)
class StarNode:
    equilibrium: Equilibrium
    eigvals: tuple

    @property
    def anisotropy(self) -> float:
        a, b = self.eigvals
        return abs(a - b) / max(abs(a), abs(b))


@dataclass(frozen=True)
class Equilibria:
    attractors: tuple
    repellors: tuple
    saddles: tuple
    frames: tuple
    stars: tuple
    critical_values: tuple

    @property
    def all(self) -> tuple:
        return self.attractors + self.repellors + self.saddles

    def by_id(self, eid) -> Equilibrium:
        for e in self.all:
            if e.id == eid:
                return e
        raise KeyError(eid)

    def to_dict(self):
        def pt(e):
            return {"id": e.id, "kind": e.kind, "point": [e.point.real, e.point.imag]}
        return {
            "attractors": [pt(e) for e in self.attractors],
            "repellors": [pt(e) for e in self.repellors],
            "saddles": [dict(pt(fr.saddle), eigvals=list(fr.eigvals),
                             orthogonality_error=fr.orthogonality_error) for fr in self.frames],
        }


def jacobian(fld: FlowField, z, h=JACOBIAN_STEP) -> np.ndarray:
    """Real 2x2 Jacobian of the field at ``z`` by central differences."""
    z = complex(z)
    pts = np.array([z + h, z - h, z + 1j * h, z - 1j * h])
    v = np.asarray(fld(pts))
    dx = (v[0] - v[1]) / (2 * h)
    dy = (v[2] - v[3]) / (2 * h)
    return np.array([[dx.real, dy.real], [dx.imag, dy.imag]])


def _unit(vec) -> complex:
    d = complex(vec[0], vec[1])
    d /= abs(d)
    # fix the sign so the direction has argument in (-pi/2, pi/2]
    if d.real < -1e-15 or (abs(d.real) <= 1e-15 and d.imag < 0):
        d = -d
    return d


def _saddle_dirs(J, what):
    w, V = np.linalg.eig(J)
    if np.max(np.abs(w.imag)) > 1e-8 * max(1.0, np.max(np.abs(w))):
        raise DegenerateFunction(f"{what}: complex eigenvalues {w}")
    w = w.real
    V = V.real
    i_neg, i_pos = int(np.argmin(w)), int(np.argmax(w))
    if not (w[i_neg] < 0 < w[i_pos]):
        raise DegenerateFunction(f"{what}: eigenvalues {w} are not of opposite sign")
    scale = max(abs(w[0]), abs(w[1]))
    if min(abs(w[0]), abs(w[1])) < 1e-8 * max(1.0, scale) or scale < 1e-14:
        raise DegenerateFunction(f"{what}: near-zero eigenvalue {w}")
    s = _unit(V[:, i_neg])
    u = _unit(V[:, i_pos])
    return (float(w[i_neg]), float(w[i_pos])), (s, -s), (u, -u)


def _sorted_points(lat, pts):
    red = [complex(lat.reduce(p)) for p in pts]
    return sorted(red, key=lambda p: (round(p.real, 9), round(p.imag, 9)))


def classify_equilibria(f: EllipticFunction, crit=None) -> Equilibria:
    """Zeros are attractors, poles repellors and critical points saddles."""
    lat = f.lattice
    crit = crit if crit is not None else critical_points(f)
    zeros = [Equilibrium(f"a{i + 1}", "zero", p) for i, p in enumerate(_sorted_points(lat, f.zeros))]
    poles = [Equilibrium(f"b{i + 1}", "pole", p) for i, p in enumerate(_sorted_points(lat, f.sigma_poles))]
    cps = _sorted_points(lat, crit.points)
    saddles = [Equilibrium(f"c{i + 1}", "saddle", p) for i, p in enumerate(cps)]
    newton = FlowField(f)
    rotated = FlowField(f, ROTATED)
    frames = []
    for s in saddles:
        ev, st, un = _saddle_dirs(jacobian(newton, s.point), f"saddle {s.id}")
        _, rst, run = _saddle_dirs(jacobian(rotated, s.point), f"rotated saddle {s.id}")
        frames.append(SaddleFrame(s, ev, st, un, rst, run))
    stars = []
    for e, want in [(z, -1) for z in zeros] + [(p, 1) for p in poles]:
        w = np.linalg.eigvals(jacobian(newton, e.point))
        if np.max(np.abs(w.imag)) > STAR_TOL * np.max(np.abs(w)):
            raise DegenerateFunction(f"{e.id}: complex eigenvalues {w}")
        w = w.real
        if not np.all(np.sign(w) == want):
            raise DegenerateFunction(f"{e.id}: eigenvalues {w} have the wrong sign")
        star = StarNode(e, (float(w[0]), float(w[1])))
        if star.anisotropy > STAR_TOL:
            raise DegenerateFunction(f"{e.id}: not a star node (eigenvalues {w})")
        stars.append(star)
    values = tuple(complex(f(s.point)) for s in saddles)
    return Equilibria(tuple(zeros), tuple(poles), tuple(saddles), tuple(frames),
                      tuple(stars), values)


# -- trajectories ----------------------------------------------------------------

@dataclass(frozen=True)
class Trajectory:
    """Time-ordered samples of one integration.

    ``samples`` are reduced into the period cell; ``raw_times`` is the
    undamped Newton time.  ``terminal`` is an equilibrium id, ``"horizon"``
    or ``"rest"`` (started on an equilibrium that is not a target).
    """

    samples: tuple
    times: tuple
    raw_times: tuple
    abs_f: tuple
    arg_f: tuple
    terminal: str
    arrival_point: complex | None = None
    arrival_angle: float | None = None
    steps: int = 0
    closest: dict = dc_field(default_factory=dict)

    def arg_drift(self, mask=None) -> float:
        a = np.asarray(self.arg_f)
        if mask is not None:
            a = a[mask]
        if a.size < 2:
            return 0.0
        d = np.angle(np.exp(1j * (a - a[0])))
        return float(np.max(np.abs(d)))

    def abs_drift(self) -> float:
        m = np.asarray(self.abs_f)
        return float(np.max(np.abs(m / m[0] - 1))) if m.size else 0.0

    def to_dict(self):
        return {
            "terminal": self.terminal,
            "steps": self.steps,
            "n_samples": len(self.samples),
            "arrival_angle": self.arrival_angle,
        }


class _Torus:
    """Scalar nearest-image arithmetic for one lattice."""

    def __init__(self, lattice):
        self.w1 = lattice.omega1
        self.w2 = lattice.omega2
        self.ti = lattice.tau.imag
        self.tr = lattice.tau.real

    def offset(self, z, p):
        """Shortest representative of ``z - p`` mod the lattice."""
        d = (z - p)
        u = d / self.w1
        t = u.imag / self.ti
        s = u.real - t * self.tr
        d = d - round(s) * self.w1 - round(t) * self.w2
        best = d
        for i in (-1, 0, 1):
            for j in (-1, 0, 1):
                c = d + i * self.w1 + j * self.w2
                if abs(c) < abs(best):
                    best = c
        return best


def integrate(fld: FlowField, z0, horizon=1e3, *, equilibria=(), targets=None,
              capture_radius=1e-6, watch=(), start=None, depart_radius=1e-2,
              rtol=None, atol=None, max_steps=MAX_STEPS, dense=16,
              record=True) -> Trajectory:
    """Integrate ``fld`` from ``z0`` until capture or ``horizon``.

    ``equilibria`` are :class:`Equilibrium` values; those whose kind is in
    ``targets`` (default: every kind) end the trajectory once it comes within
    ``capture_radius``.  The crossing of that circle is located on the dense
    output and reported as ``arrival_point``/``arrival_angle``.  ``watch``
    equilibria only have their closest approach recorded.  The equilibrium
    ``start`` is ignored until the trajectory has moved ``depart_radius``
    away from it.  Tolerances default to ``TOLERANCES[fld.variant]``.
    """
    f = fld.function
    rtol = TOLERANCES[fld.variant][0] if rtol is None else rtol
    atol = TOLERANCES[fld.variant][1] if atol is None else atol
    torus = _Torus(f.lattice)
    ev = scalar_evaluator(f)
    z0 = complex(z0)
    targets = None if targets is None else set(targets)
    caps = [e for e in equilibria if targets is None or e.kind in targets]
    watch = list(watch)
    departed = start is None

    def sample(z):
        logf, _ = ev(z)
        return logf

    def red(z):
        return complex(f.lattice.reduce(z))

    # started on a rest point
    for e in equilibria:
        if e is not start and abs(torus.offset(z0, e.point)) == 0:
            lf = sample(z0)
            return Trajectory((red(z0),), (0.0,), (0.0,), (math.exp(lf.real) if lf.real > -700 else 0.0,),
                              (lf.imag,), e.id, z0, None, 0)
    if fld(z0) == 0:
        lf = sample(z0)
        return Trajectory((red(z0),), (0.0,), (0.0,), (math.exp(lf.real),), (lf.imag,), "rest", z0, None, 0)

    solver = DOP853(fld.rhs(), 0.0, [z0.real, z0.imag, 0.0], horizon, rtol=rtol, atol=atol)
    lf = sample(z0)
    samples, times, raw, mods, args = [red(z0)], [0.0], [0.0], [math.exp(lf.real)], [lf.imag]
    closest = {e.id: math.inf for e in watch}
    steps = 0
    terminal = "horizon"
    arrival = None
    angle = None
    prev_t, prev_y = 0.0, np.array([z0.real, z0.imag, 0.0])

    def near(z, group, radius):
        for e in group:
            if e is start and not departed:
                continue
            if abs(torus.offset(z, e.point)) <= radius:
                return e
        return None

    while solver.status == "running":
        msg = solver.step()
        steps += 1
        if solver.status == "failed":
            raise StepSizeUnderflow(f"integrator failed: {msg}", location=complex(solver.y[0], solver.y[1]))
        if steps > max_steps:
            raise StepSizeUnderflow(f"more than {max_steps} steps", location=complex(solver.y[0], solver.y[1]))
        t, y = solver.t, solver.y
        z = complex(y[0], y[1])
        # dense check only near watched or capturing equilibria
        interp = None
        hit = None
        sub = [(t, z)]
        reach = max(abs(z - complex(prev_y[0], prev_y[1])), 0.0)
        candidates = [e for e in caps + watch
                      if abs(torus.offset(z, e.point)) <= reach + 5 * max(capture_radius, CONNECTION_TOL)]
        if candidates and dense:
            interp = solver.dense_output()
            ts = np.linspace(prev_t, t, dense + 1)[1:]
            ys = interp(ts)
            sub = [(float(tt), complex(ys[0, i], ys[1, i])) for i, tt in enumerate(ts)]
        for e in watch:
            if departed or e is not start:
                d = abs(torus.offset(z, e.point))
                if d < closest[e.id]:
                    closest[e.id] = d
        last_t = prev_t
        for tt, zz in sub:
            if not departed and abs(torus.offset(zz, start.point)) > depart_radius:
                departed = True
            for e in candidates:
                if e in watch and (departed or e is not start):
                    d = abs(torus.offset(zz, e.point))
                    if d < closest[e.id]:
                        closest[e.id] = d
            e = near(zz, caps, capture_radius)
            if e is not None:
                hit = (e, last_t, tt)
                break
            last_t = tt
        if hit is not None:
            e, ta, tb = hit
            if interp is None:
                interp = solver.dense_output()
            # bisection for the circle crossing
            for _ in range(60):
                tm = 0.5 * (ta + tb)
                ym = interp(tm)
                if abs(torus.offset(complex(ym[0], ym[1]), e.point)) <= capture_radius:
                    tb = tm
                else:
                    ta = tm
            ye = interp(tb)
            ze = complex(ye[0], ye[1])
            off = torus.offset(ze, e.point)
            arrival = ze
            angle = math.atan2(off.imag, off.real)
            t, y, z = tb, ye, ze
            terminal = e.id
        if record or hit is not None:
            lf = sample(z)
            samples.append(red(z))
            times.append(float(t))
            raw.append(float(y[2]))
            mods.append(math.exp(lf.real))
            args.append(lf.imag)
        if hit is not None:
            break
        prev_t, prev_y = t, np.array(y)
    if terminal == "horizon" and (not record):
        lf = sample(z)
        samples.append(red(z))
        times.append(float(solver.t))
        raw.append(float(solver.y[2]))
        mods.append(math.exp(lf.real))
        args.append(lf.imag)
    return Trajectory(tuple(samples), tuple(times), tuple(raw), tuple(mods), tuple(args),
                      terminal, arrival, angle, steps, closest)


# -- separatrices -----------------------------------------------------------------

@dataclass(frozen=True)
class Leg:
    """One separatrix branch: ``kind`` is unstable/stable/rotated, ``branch`` is +1 or -1."""

    saddle: str
    kind: str
    branch: int
    departure_angle: float
    trajectory: Trajectory

    @property
    def target(self) -> str:
        return self.trajectory.terminal

    @property
    def arrival_angle(self) -> float:
        return self.trajectory.arrival_angle

    def to_dict(self):
        return {"saddle": self.saddle, "kind": self.kind, "branch": "+" if self.branch > 0 else "-",
                "target": self.target, "departure_angle": self.departure_angle,
                "arrival_angle": self.arrival_angle, "steps": self.trajectory.steps,
                "min_saddle_distance": _finite_min(self.trajectory.closest)}


def _finite_min(d):
    vals = [v for v in d.values() if math.isfinite(v)]
    return min(vals) if vals else None


def normalized(f: EllipticFunction, values=None) -> EllipticFunction:
    """``f`` rescaled so the geometric mean of its critical moduli is 1.

    The phase portrait does not depend on a constant factor; this only keeps
    the damping factor of order one along separatrices.
    """
    if values is None:
        values = critical_points(f).values
    gm = math.exp(sum(math.log(abs(v)) for v in values) / len(values))
    return f.rescaled(1.0 / gm)


@dataclass(frozen=True)
class ExtractedPortrait:
    function: EllipticFunction
    equilibria: Equilibria
    unstable: tuple  # legs, ordered by (saddle, branch)
    stable: tuple
    rotated: tuple = ()
    rotated_error: dict | None = None

    @property
    def edges_unstable(self):
        """Per saddle: ``(saddle, zero at + branch, zero at - branch, angles)``."""
        return _edges(self.unstable)

    @property
    def edges_stable(self):
        return _edges(self.stable)

    def to_dict(self):
        return {
            "equilibria": self.equilibria.to_dict(),
            "unstable": [leg.to_dict() for leg in self.unstable],
            "stable": [leg.to_dict() for leg in self.stable],
            "rotated": [leg.to_dict() for leg in self.rotated],
            "rotated_error": self.rotated_error,
        }


def _edges(legs):
    out = []
    for i in range(0, len(legs), 2):
        p, m = legs[i], legs[i + 1]
        out.append((p.saddle, p.target, m.target, p.arrival_angle, m.arrival_angle))
    return tuple(out)


def trace_separatrices(f: EllipticFunction, horizon=1e4, rotated=True,
                       connection_tol=CONNECTION_TOL, record=False) -> ExtractedPortrait:
    """Trace the four separatrices of every saddle (and the rotated ones).

    Raises :class:`SaddleConnection` if a Newton separatrix comes within
    ``connection_tol`` of a saddle and :class:`NonConvergence` if it does
    not reach a zero (pole) within ``horizon``.
    """
    crit = critical_points(f)
    g = normalized(f, crit.values)
    eq = classify_equilibria(g, crit)
    newton = FlowField(g)
    saddles = list(eq.saddles)
    legs = {"unstable": [], "stable": []}
    for fr in eq.frames:
        s = fr.saddle
        for kind, dirs, fld, targets in (("unstable", fr.unstable_dirs, newton, "zero"),
                                         ("stable", fr.stable_dirs, newton.reversed(), "pole")):
            for branch, d in zip((1, -1), dirs):
                traj = integrate(fld, s.point + SEED_OFFSET * d, horizon,
                                 equilibria=eq.all, targets={targets},
                                 capture_radius=ARRIVAL_RADIUS, watch=saddles, start=s,
                                 record=record)
                for other, dist in traj.closest.items():
                    if dist < connection_tol:
                        raise SaddleConnection(
                            f"{kind} separatrix of {s.id} passes within {dist:.3g} of {other}",
                            saddle=s.id, target=other, distance=dist)
                if traj.terminal not in {e.id for e in eq.all if e.kind == targets}:
                    raise NonConvergence(
                        f"{kind} separatrix {'+' if branch > 0 else '-'} of {s.id} "
                        f"did not reach a {targets} within horizon {horizon}")
                legs[kind].append(Leg(s.id, kind, branch, math.atan2(d.imag, d.real), traj))
    rot_legs, rot_err = (), None
    if rotated:
        try:
            rot_legs = tuple(_trace_rotated(g, eq, horizon, record))
        except (NonConvergence, StepSizeUnderflow) as exc:
            rot_err = exc.to_dict()
    return ExtractedPortrait(g, eq, tuple(legs["unstable"]), tuple(legs["stable"]),
                             rot_legs, rot_err)


def _trace_rotated(g, eq, horizon, record=False):
    fld = FlowField(g, ROTATED)
    out = []
    for fr in eq.frames:
        s = fr.saddle
        for branch, d in zip((1, -1), fr.rotated_unstable_dirs):
            traj = integrate(fld, s.point + SEED_OFFSET * d, horizon,
                             equilibria=eq.saddles, targets={"saddle"},
                             capture_radius=ARRIVAL_RADIUS, start=s, record=record)
            if traj.terminal not in {e.id for e in eq.saddles}:
                raise NonConvergence(f"rotated separatrix of {s.id} did not reach a saddle")
            out.append(Leg(s.id, "rotated", branch, math.atan2(d.imag, d.real), traj))
    return out


# -- graphs -----------------------------------------------------------------------

def _rotation(ends, what):
    """Sort ``[(vertex, angle, dart)]`` anticlockwise per vertex, checking gaps."""
    at = {}
    for v, ang, dart in ends:
        at.setdefault(v, []).append((ang, dart))
    rot = {}
    for v, items in at.items():
        items.sort()
        angs = [a for a, _ in items]
        for i in range(len(angs)):
            gap = (angs[(i + 1) % len(angs)] - angs[i]) % (2 * math.pi)
            if len(angs) > 1 and min(gap, 2 * math.pi - gap) < ANGLE_TOL:
                raise AngleCollision(f"{what}: two edge-ends at {v} within {ANGLE_TOL} rad")
        rot[v] = [d for _, d in items]
    return rot


def _graph_from_legs(vertices, legs, what):
    edges = []
    ends = []
    for i in range(0, len(legs), 2):
        p, m = legs[i], legs[i + 1]
        eid = p.saddle
        edges.append((eid, (p.target, m.target)))
        ends.append((p.target, p.arrival_angle, f"{eid}+"))
        ends.append((m.target, m.arrival_angle, f"{eid}-"))
    return build([e.id for e in vertices], edges, _rotation(ends, what))


def _perp_graph(eq, legs):
    edges = []
    ends = []
    for leg in legs:
        eid = f"{leg.saddle}{'p' if leg.branch > 0 else 'm'}"
        edges.append((eid, (leg.saddle, leg.target)))
        ends.append((leg.saddle, leg.departure_angle, f"{eid}+"))
        ends.append((leg.target, leg.arrival_angle, f"{eid}-"))
    return build([s.id for s in eq.saddles], edges, _rotation(ends, "level-line graph"))


@dataclass(frozen=True)
class ExtractedGraphs:
    """``primal`` is built on the zeros, ``dual`` on the poles, ``level`` on the saddles."""

    portrait: ExtractedPortrait
    primal: EmbeddedGraph
    dual: EmbeddedGraph
    level: EmbeddedGraph | None
    level_error: dict | None = None

    def diagnostics(self) -> dict:
        legs = self.portrait.unstable + self.portrait.stable
        steps = [leg.trajectory.steps for leg in legs]
        dists = [d for leg in legs for d in leg.trajectory.closest.values() if math.isfinite(d)]
        fr = self.portrait.equilibria.frames
        return {
            "n_legs": len(legs),
            "max_steps": max(steps) if steps else 0,
            "total_steps": sum(steps),
            "min_saddle_distance": min(dists) if dists else None,
            "max_orthogonality_error": max((x.orthogonality_error for x in fr), default=0.0),
            "max_star_anisotropy": max((s.anisotropy for s in self.portrait.equilibria.stars),
                                       default=0.0),
            "critical_log_modulus_spread": _spread(self.portrait.equilibria.critical_values),
            "level_graph_error": self.level_error,
        }


def _spread(values):
    lm = [math.log(abs(v)) for v in values]
    return max(lm) - min(lm) if lm else 0.0


def extract_graphs(portrait: ExtractedPortrait) -> ExtractedGraphs:
    """Assemble the three embedded graphs from traced separatrices."""
    eq = portrait.equilibria
    primal = _graph_from_legs(eq.attractors, portrait.unstable, "zero graph")
    dualg = _graph_from_legs(eq.repellors, portrait.stable, "pole graph")
    level, err = None, portrait.rotated_error
    if portrait.rotated and err is None:
        try:
            level = _perp_graph(eq, portrait.rotated)
        except GraphError as exc:
            err = exc.to_dict()
    return ExtractedGraphs(portrait, primal, dualg, level, err)


def extract(f: EllipticFunction, horizon=1e4, rotated=True, record=False) -> ExtractedGraphs:
    return extract_graphs(trace_separatrices(f, horizon, rotated, record=record))


@dataclass(frozen=True)
class RoundtripReport:
    graphs: ExtractedGraphs
    primal_report: object
    dual_report: object
    dual_matches: bool
    dual_witness: object
    reference_witness: object = None
    self_dual: object = None

    @property
    def is_newton(self) -> bool:
        return bool(self.primal_report.is_newton and self.dual_report.is_newton)

    def to_dict(self):
        w = self.reference_witness
        return {
            "is_newton": self.is_newton,
            "primal": self.primal_report.to_dict(),
            "dual": self.dual_report.to_dict(),
            "pole_graph_is_dual": self.dual_matches,
            "pole_graph_dual_sense": None if self.dual_witness is None else self.dual_witness.orientation,
            "reference_equivalence": None if w is None else w.to_dict(),
            "self_dual": None if self.self_dual is None else self.self_dual.to_dict(),
        }


def newton_roundtrip(f: EllipticFunction, reference: EmbeddedGraph | None = None,
                     horizon=1e4, mode="rational") -> RoundtripReport:
    """Extract ``G(f)`` and ``G*(f)`` and run the Newton-graph decision on both."""
    from .newton_props import is_newton_graph

    gr = extract(f, horizon, rotated=False)
    rp = is_newton_graph(gr.primal, mode)
    rd = is_newton_graph(gr.dual, mode)
    w = equivalent(gr.dual, dual(gr.primal))
    ref = equivalent(gr.primal, reference) if reference is not None else None
    sd = self_dual_check(gr.primal) if rp.is_newton else None
    return RoundtripReport(gr, rp, rd, w is not None, w, ref, sd)
