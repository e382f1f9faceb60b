"""Phase-space strata, Poisson brackets, and the spiral Hamilton flow.

The cotangent variables are (t, x1, x2; tau, xi1, xi2).  Two model variants
are supported:

* ``closed``  — characteristic function x1 xi2 - x2 xi1 + t^k <x, xi>;
  the depth-one stratum is symplectic of codimension 2, the depth-two
  stratum (t = 0) is not.
* ``spiral``  — characteristic function x1 xi2 - x2 xi1 + (mu + t^k) <x, xi>
  modulated by the annulus factors g1 = |x|^2 - a^2, g2 = b^2 - |x|^2; the
  depth-two stratum has codimension 3 and its Hamilton leaves are
  logarithmic spirals between the circles |x| = a and |x| = b.

Stratum membership, Poisson brackets, and the bracket-matrix rank test are
all available in exact rational arithmetic (`fractions.Fraction` inputs stay
exact end to end); classification of float covectors uses a relative
tolerance.  The flow integrator is a fixed-step classical Runge-Kutta scheme
with conserved-quantity monitors and an optional Richardson step check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from enum import Enum

__all__ = [
    "PhasePoly",
    "StratumLabel",
    "ModelParams",
    "Covector",
    "FlowState",
    "Trajectory",
    "StepSizeError",
    "var",
    "poisson_bracket",
    "char_function",
    "stratum_defining_functions",
    "classify",
    "classify_detailed",
    "symplectic_rank",
    "hamilton_rhs",
    "make_flow_state",
    "integrate",
    "write_trajectory_csv",
    "log_spiral_fit",
    "sample_sigma1",
    "sample_sigma2",
]

_VARS = ("t", "x1", "x2", "tau", "xi1", "xi2")
_VAR_INDEX = {name: i for i, name in enumerate(_VARS)}
# canonical pairs (position-like, momentum-like) for the symplectic structure
_PAIRS = ((1, 4), (2, 5), (0, 3))

_ZERO6 = (0, 0, 0, 0, 0, 0)


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"exact coefficients required, got {type(x).__name__}")


class PhasePoly:
    """Polynomial on phase space with exact rational coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        pruned = {}
        if terms:
            for key, coeff in terms.items():
                c = _frac(coeff)
                if c != 0:
                    pruned[tuple(key)] = c
        self.terms = pruned

    @staticmethod
    def const(c) -> "PhasePoly":
        return PhasePoly({_ZERO6: c})

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if not isinstance(other, PhasePoly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other: "PhasePoly") -> "PhasePoly":
        out = dict(self.terms)
        for key, coeff in other.terms.items():
            acc = out.get(key, Fraction(0)) + coeff
            if acc:
                out[key] = acc
            else:
                out.pop(key, None)
        poly = PhasePoly.__new__(PhasePoly)
        poly.terms = out
        return poly

    def __neg__(self) -> "PhasePoly":
        poly = PhasePoly.__new__(PhasePoly)
        poly.terms = {k: -c for k, c in self.terms.items()}
        return poly

    def __sub__(self, other: "PhasePoly") -> "PhasePoly":
        return self + (-other)

    def __mul__(self, other) -> "PhasePoly":
        if isinstance(other, (int, Fraction)):
            f = _frac(other)
            poly = PhasePoly.__new__(PhasePoly)
            poly.terms = {} if f == 0 else {k: f * c for k, c in self.terms.items()}
            return poly
        out: dict = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                key = tuple(e1 + e2 for e1, e2 in zip(k1, k2))
                acc = out.get(key, Fraction(0)) + c1 * c2
                if acc:
                    out[key] = acc
                else:
                    out.pop(key, None)
        poly = PhasePoly.__new__(PhasePoly)
        poly.terms = out
        return poly

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "PhasePoly":
        if exponent < 0:
            raise ValueError("negative powers are not polynomials")
        out = PhasePoly.const(1)
        for _ in range(exponent):
            out = out * self
        return out

    def diff(self, name: str) -> "PhasePoly":
        idx = _VAR_INDEX[name]
        out: dict = {}
        for key, coeff in self.terms.items():
            e = key[idx]
            if e == 0:
                continue
            down = key[:idx] + (e - 1,) + key[idx + 1:]
            out[down] = out.get(down, Fraction(0)) + coeff * e
        poly = PhasePoly.__new__(PhasePoly)
        poly.terms = out
        return poly

    def eval(self, point) -> Fraction | float:
        """Evaluate at (t, x1, x2, tau, xi1, xi2); exact for exact inputs."""
        values = tuple(point)
        acc = None
        for key, coeff in self.terms.items():
            term = coeff
            for v, e in zip(values, key):
                if e:
                    term = term * v ** e
            acc = term if acc is None else acc + term
        if acc is None:
            return Fraction(0) if not any(isinstance(v, float) for v in values) else 0.0
        return acc

    def __repr__(self):
        def mono(key):
            return " ".join(
                f"{n}^{e}" if e > 1 else n for n, e in zip(_VARS, key) if e
            ) or "1"

        return " + ".join(f"{c} {mono(k)}" for k, c in sorted(self.terms.items()))


def var(name: str) -> PhasePoly:
    key = [0] * 6
    key[_VAR_INDEX[name]] = 1
    return PhasePoly({tuple(key): 1})


def poisson_bracket(f: PhasePoly, g: PhasePoly) -> PhasePoly:
    """Canonical bracket sum_i (df/dxi_i dg/dx_i - df/dx_i dg/dxi_i).

    The (t, tau) pair enters the same way, so {tau, t} = 1 exactly.
    """
    out = PhasePoly()
    for xi_idx, mom_idx in ((pair[0], pair[1]) for pair in _PAIRS):
        x_name, p_name = _VARS[xi_idx], _VARS[mom_idx]
        out = out + f.diff(p_name) * g.diff(x_name) - f.diff(x_name) * g.diff(p_name)
    return out


class StratumLabel(Enum):
    NONCHARACTERISTIC = "Noncharacteristic"
    SIGMA1 = "Sigma1"
    SIGMA2 = "Sigma2"
    SIGMA_TOP = "SigmaTop"
    ZERO_SECTION = "ZeroSection"


@dataclass(frozen=True)
class ModelParams:
    """Model selector: ``closed`` for the plain t^k twist, ``spiral`` for the
    annulus model with the rotation-dilation matrix [[mu, 1], [-1, mu]]."""

    variant: str
    k: int
    mu: float | Fraction | None = None
    a: float | None = None
    b: float | None = None

    def __post_init__(self):
        if self.variant not in ("closed", "spiral"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if self.variant == "spiral":
            if self.mu is None or self.mu <= 0:
                raise ValueError("spiral variant requires mu > 0")
            if self.a is None or self.b is None or not 0 < self.a < self.b:
                raise ValueError("spiral variant requires 0 < a < b")

    def matrix(self) -> tuple[tuple[float, float], tuple[float, float]]:
        mu = self.mu
        return ((mu, 1.0), (-1.0, mu))


@dataclass(frozen=True)
class Covector:
    """A phase-space point (t, x; tau, xi) with x, xi in the plane."""

    t: float | Fraction
    x: tuple
    tau: float | Fraction
    xi: tuple

    def components(self) -> tuple:
        return (self.t, self.x[0], self.x[1], self.tau, self.xi[0], self.xi[1])

    def is_exact(self) -> bool:
        return all(
            isinstance(v, (int, Fraction)) and not isinstance(v, bool)
            for v in self.components()
        )


def char_function(params: ModelParams) -> PhasePoly:
    """Principal characteristic polynomial of the angular field (tau excluded)."""
    x1, x2 = var("x1"), var("x2")
    xi1, xi2 = var("xi1"), var("xi2")
    t = var("t")
    angular = x1 * xi2 - x2 * xi1
    radial = x1 * xi1 + x2 * xi2
    twist = t ** params.k
    if params.variant == "spiral":
        twist = twist + PhasePoly.const(Fraction(params.mu))
    return angular + twist * radial


def stratum_defining_functions(label: StratumLabel, params: ModelParams) -> list[PhasePoly]:
    """Defining polynomials whose pairwise brackets feed the rank test."""
    tau = var("tau")
    if label is StratumLabel.SIGMA1:
        return [tau, char_function(params)]
    if label is StratumLabel.SIGMA2:
        x1, x2 = var("x1"), var("x2")
        xi1, xi2 = var("xi1"), var("xi2")
        if params.variant == "closed":
            third = x1 * xi2 - x2 * xi1
        else:
            third = x1 * xi2 - x2 * xi1 + Fraction(params.mu) * (x1 * xi1 + x2 * xi2)
        return [tau, var("t"), third]
    raise ValueError(f"no defining-function system for {label}")


def _is_zero(value, tol, scale) -> bool:
    if isinstance(value, (int, Fraction)):
        return value == 0
    return abs(value) <= tol * max(1.0, scale)


def classify_detailed(
    cov: Covector, params: ModelParams, tol: float = 1e-12
) -> tuple[StratumLabel, dict]:
    """Classify a covector and report classification metadata.

    Exact (Fraction/int) inputs are classified with exact zero tests; float
    inputs use ``tol`` relative to the covector magnitude.  The flag
    ``ambiguous`` marks spiral points with tau = t = 0, <x, A xi> = 0 but
    <x, xi> = 0 as well (possible only where x vanishes): they satisfy the
    characteristic equations yet belong to no printed stratum, so they are
    bucketed with the depth-two stratum and flagged.
    """
    if tol < 0:
        raise ValueError("tol must be >= 0")
    exact = cov.is_exact()
    comps = cov.components()
    cov_scale = 0.0 if exact else max(abs(float(cov.tau)), abs(float(cov.xi[0])), abs(float(cov.xi[1])))
    if cov.tau == 0 and cov.xi[0] == 0 and cov.xi[1] == 0:
        raise ValueError("zero covector cannot be classified")
    flags = {"exact": exact, "ambiguous": False}

    if not _is_zero(cov.tau, tol, cov_scale):
        return StratumLabel.NONCHARACTERISTIC, flags
    if _is_zero(cov.xi[0], tol, cov_scale) and _is_zero(cov.xi[1], tol, cov_scale):
        # covector degenerates to the zero section (deepest stratum)
        return StratumLabel.ZERO_SECTION, flags

    x_scale = 1.0 if exact else max(abs(float(cov.x[0])), abs(float(cov.x[1])), 1.0)
    f2 = char_function(params).eval(comps)
    if not _is_zero(f2, tol, cov_scale * x_scale):
        return StratumLabel.NONCHARACTERISTIC, flags
    if not _is_zero(cov.t, tol, 1.0):
        return StratumLabel.SIGMA1, flags
    if params.variant == "spiral":
        radial = cov.x[0] * cov.xi[0] + cov.x[1] * cov.xi[1]
        if _is_zero(radial, tol, cov_scale * x_scale):
            flags["ambiguous"] = True
    return StratumLabel.SIGMA2, flags


def classify(cov: Covector, params: ModelParams, tol: float = 1e-12) -> StratumLabel:
    return classify_detailed(cov, params, tol)[0]


def _exact_rank(matrix: list[list[Fraction]]) -> int:
    m = [row[:] for row in matrix]
    n = len(m)
    rank = 0
    for col in range(n):
        pivot = next((r for r in range(rank, n) if m[r][col] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        inv = Fraction(1) / m[rank][col]
        for r in range(n):
            if r != rank and m[r][col]:
                factor = m[r][col] * inv
                m[r] = [a - factor * b for a, b in zip(m[r], m[rank])]
        rank += 1
    return rank


def _float_rank(matrix: list[list[float]], tol: float) -> int:
    m = [list(map(float, row)) for row in matrix]
    n = len(m)
    rank = 0
    for col in range(n):
        pivot = max(range(rank, n), key=lambda r: abs(m[r][col]), default=None)
        if pivot is None or abs(m[pivot][col]) <= tol:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        for r in range(n):
            if r != rank:
                factor = m[r][col] / m[rank][col]
                m[r] = [a - factor * b for a, b in zip(m[r], m[rank])]
        rank += 1
    return rank


def symplectic_rank(
    stratum: StratumLabel, point: Covector, params: ModelParams, tol: float = 1e-12
) -> dict:
    """Bracket matrix of the stratum's defining functions at a point on it.

    Returns the matrix {F_i, F_j}(point), its rank, and ``degenerate`` (true
    iff the matrix is singular, i.e. the stratum fails the symplectic
    codimension test there).  Exact covectors make the whole computation
    exact; the rank of an odd-size antisymmetric matrix is necessarily
    deficient, which is how the codimension-3 stratum always reports
    degenerate.
    """
    observed = classify(point, params, tol)
    if observed is not stratum:
        raise ValueError(f"point classifies as {observed.value}, not {stratum.value}")
    funcs = stratum_defining_functions(stratum, params)
    comps = point.components()
    size = len(funcs)
    matrix = [[poisson_bracket(fi, fj).eval(comps) for fj in funcs] for fi in funcs]
    if point.is_exact():
        rank = _exact_rank([[Fraction(v) for v in row] for row in matrix])
    else:
        scale = max((abs(float(v)) for row in matrix for v in row), default=0.0)
        rank = _float_rank(matrix, tol * max(scale, 1.0))
    return {
        "bracket_matrix": matrix,
        "rank": rank,
        "degenerate": rank < size,
    }


# -- Hamilton flow ------------------------------------------------------------


class StepSizeError(RuntimeError):
    """Raised when the Richardson half-step comparison rejects the step size."""


@dataclass(frozen=True)
class FlowState:
    time: float
    x: tuple[float, float]
    xi: tuple[float, float]
    monitors: dict = field(compare=False)


def _monitors(x, xi, mu) -> dict:
    a_xi = (mu * xi[0] + xi[1], -xi[0] + mu * xi[1])
    return {
        "x_dot_xi": x[0] * xi[0] + x[1] * xi[1],
        "x_A_xi": x[0] * a_xi[0] + x[1] * a_xi[1],
        "norm_x": math.hypot(x[0], x[1]),
        "norm_xi": math.hypot(xi[0], xi[1]),
    }


def make_flow_state(x, xi, params: ModelParams, time: float = 0.0) -> FlowState:
    if params.variant != "spiral":
        raise ValueError("flow states belong to the spiral variant")
    return FlowState(
        time=time,
        x=(float(x[0]), float(x[1])),
        xi=(float(xi[0]), float(xi[1])),
        monitors=_monitors((float(x[0]), float(x[1])), (float(xi[0]), float(xi[1])), float(params.mu)),
    )


def hamilton_rhs(state: FlowState, params: ModelParams) -> dict:
    """Right side x' = g1 g2 A^T x, xi' = -g1 g2 A xi of the leaf flow."""
    if params.variant != "spiral":
        raise ValueError("the Hamilton system belongs to the spiral variant")
    x1, x2 = state.x
    xi1, xi2 = state.xi
    mu = float(params.mu)
    r2 = x1 * x1 + x2 * x2
    g = (r2 - params.a ** 2) * (params.b ** 2 - r2)
    return {
        "x_dot": (g * (mu * x1 - x2), g * (x1 + mu * x2)),
        "xi_dot": (-g * (mu * xi1 + xi2), -g * (-xi1 + mu * xi2)),
    }


@dataclass
class Trajectory:
    params: ModelParams
    h: float
    states: list
    drift_x_xi: float
    drift_x_A_xi: float
    xi_closed_form_max_rel_dev: float
    xi_closed_form_max_rel_dev_trapezoid: float
    norm_x_monotone: bool
    max_norm_x: float
    final_quadrature: float


def _rk4_step(y, h, mu, a2, b2):
    def f(u):
        x1, x2, xi1, xi2, _ = u
        r2 = x1 * x1 + x2 * x2
        g = (r2 - a2) * (b2 - r2)
        return (
            g * (mu * x1 - x2),
            g * (x1 + mu * x2),
            -g * (mu * xi1 + xi2),
            -g * (-xi1 + mu * xi2),
            g,
        )

    k1 = f(y)
    k2 = f(tuple(y[i] + 0.5 * h * k1[i] for i in range(5)))
    k3 = f(tuple(y[i] + 0.5 * h * k2[i] for i in range(5)))
    k4 = f(tuple(y[i] + h * k3[i] for i in range(5)))
    return tuple(
        y[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) for i in range(5)
    )


def _closed_form_xi(xi0, quadrature: float, mu: float) -> tuple[float, float]:
    # exp(-I A) = e^(-mu I) (cos I * Id - sin I * J) for A = mu Id + J
    damp = math.exp(-mu * quadrature)
    c, s = math.cos(quadrature), math.sin(quadrature)
    j_xi = (xi0[1], -xi0[0])
    return (damp * (c * xi0[0] - s * j_xi[0]), damp * (c * xi0[1] - s * j_xi[1]))


def integrate(
    s0: FlowState,
    params: ModelParams,
    t_end: float,
    h: float,
    richardson_tol: float | None = None,
) -> Trajectory:
    """Fixed-step 4th-order integration of the spiral Hamilton system.

    The quadrature of g1 g2 along the orbit is carried as an augmented state
    component (same accuracy order as the trajectory itself); the composite
    trapezoid value on the step grid is reported alongside for comparison.
    The closed form xi(t) = exp(-quadrature * A) xi0 is evaluated at every
    step and the worst relative deviation from the integrated xi recorded.

    With ``richardson_tol`` set, each step is compared against two half
    steps and a deviation beyond the tolerance raises StepSizeError.
    """
    if params.variant != "spiral":
        raise ValueError("the Hamilton system belongs to the spiral variant")
    if h <= 0 or t_end <= 0:
        raise ValueError("need h > 0 and t_end > 0")
    mu = float(params.mu)
    a2, b2 = params.a ** 2, params.b ** 2
    n_steps = int(round(t_end / h))

    y = (s0.x[0], s0.x[1], s0.xi[0], s0.xi[1], 0.0)
    states = [make_flow_state(s0.x, s0.xi, params, time=s0.time)]
    xi0 = (s0.x[0], s0.x[1]), (s0.xi[0], s0.xi[1])
    base_x_xi = states[0].monitors["x_dot_xi"]
    base_x_A_xi = states[0].monitors["x_A_xi"]

    drift_x_xi = 0.0
    drift_x_a_xi = 0.0
    closed_dev = 0.0
    monotone = True
    prev_norm = states[0].monitors["norm_x"]
    max_norm = prev_norm
    trap = 0.0
    trap_dev = 0.0

    def g_of(u):
        r2 = u[0] * u[0] + u[1] * u[1]
        return (r2 - a2) * (b2 - r2)

    g_prev = g_of(y)
    for step in range(1, n_steps + 1):
        y_next = _rk4_step(y, h, mu, a2, b2)
        if richardson_tol is not None:
            half = _rk4_step(_rk4_step(y, 0.5 * h, mu, a2, b2), 0.5 * h, mu, a2, b2)
            err = max(abs(half[i] - y_next[i]) for i in range(5))
            if err > richardson_tol:
                raise StepSizeError(
                    f"step {step}: Richardson deviation {err:.3e} exceeds {richardson_tol:.3e}"
                )
        y = y_next
        g_here = g_of(y)
        trap += 0.5 * h * (g_prev + g_here)
        g_prev = g_here

        time = s0.time + step * h
        x = (y[0], y[1])
        xi = (y[2], y[3])
        state = make_flow_state(x, xi, params, time=time)
        states.append(state)

        drift_x_xi = max(drift_x_xi, abs(state.monitors["x_dot_xi"] - base_x_xi))
        drift_x_a_xi = max(drift_x_a_xi, abs(state.monitors["x_A_xi"] - base_x_A_xi))

        xi_norm = state.monitors["norm_xi"]
        closed = _closed_form_xi(xi0[1], y[4], mu)
        closed_dev = max(
            closed_dev,
            math.hypot(closed[0] - xi[0], closed[1] - xi[1]) / max(xi_norm, 1e-300),
        )
        closed_trap = _closed_form_xi(xi0[1], trap, mu)
        trap_dev = max(
            trap_dev,
            math.hypot(closed_trap[0] - xi[0], closed_trap[1] - xi[1])
            / max(xi_norm, 1e-300),
        )

        norm_x = state.monitors["norm_x"]
        if norm_x < prev_norm - 1e-12:
            monotone = False
        prev_norm = norm_x
        max_norm = max(max_norm, norm_x)

    return Trajectory(
        params=params,
        h=h,
        states=states,
        drift_x_xi=drift_x_xi,
        drift_x_A_xi=drift_x_a_xi,
        xi_closed_form_max_rel_dev=closed_dev,
        xi_closed_form_max_rel_dev_trapezoid=trap_dev,
        norm_x_monotone=monotone,
        max_norm_x=max_norm,
        final_quadrature=y[4],
    )


def write_trajectory_csv(traj: Trajectory, stream) -> None:
    """Trajectory table with a mandatory header and 17-significant-digit floats."""
    stream.write("time,x1,x2,xi1,xi2,dot_x_xi,x_A_xi,norm_x\n")
    for s in traj.states:
        row = (
            s.time,
            s.x[0],
            s.x[1],
            s.xi[0],
            s.xi[1],
            s.monitors["x_dot_xi"],
            s.monitors["x_A_xi"],
            s.monitors["norm_x"],
        )
        stream.write(",".join(f"{v:.17g}" for v in row) + "\n")


def log_spiral_fit(traj: Trajectory, inner_margin: float = 0.1) -> dict:
    """Least-squares fit of log |x| against the unwound winding angle.

    Restricted to the mid-annulus segment (margin fraction away from both
    circles); for the spiral model the pitch d log|x| / d theta equals mu
    identically, so the fit slope approximates mu and the residual measures
    integration error only.
    """
    a, b = traj.params.a, traj.params.b
    lo = a + inner_margin * (b - a)
    hi = b - inner_margin * (b - a)
    theta = 0.0
    prev_angle = math.atan2(traj.states[0].x[1], traj.states[0].x[0])
    angles, logs = [], []
    for s in traj.states:
        angle = math.atan2(s.x[1], s.x[0])
        d = angle - prev_angle
        while d <= -math.pi:
            d += 2 * math.pi
        while d > math.pi:
            d -= 2 * math.pi
        theta += d
        prev_angle = angle
        r = s.monitors["norm_x"]
        if lo <= r <= hi:
            angles.append(theta)
            logs.append(math.log(r))
    n = len(angles)
    if n < 2:
        raise ValueError("trajectory has no mid-annulus segment to fit")
    mean_a = sum(angles) / n
    mean_l = sum(logs) / n
    sxx = sum((av - mean_a) ** 2 for av in angles)
    sxy = sum((av - mean_a) * (lv - mean_l) for av, lv in zip(angles, logs))
    slope = sxy / sxx
    intercept = mean_l - slope * mean_a
    residual = max(abs(lv - (slope * av + intercept)) for av, lv in zip(angles, logs))
    return {"slope": slope, "intercept": intercept, "max_residual": residual, "points": n}


# -- exact stratum samplers ----------------------------------------------------


def _nonzero_fraction(rng, span: int = 6) -> Fraction:
    num = 0
    while num == 0:
        num = rng.randint(-span, span)
    return Fraction(num, rng.randint(1, span))


def sample_sigma1(rng, params: ModelParams) -> Covector:
    """Random exact-rational covector on the depth-one stratum.

    Writes xi = alpha x + beta x_perp and solves the characteristic equation
    for beta, which keeps every value rational.
    """
    t = _nonzero_fraction(rng)
    x = (_nonzero_fraction(rng), _nonzero_fraction(rng))
    alpha = _nonzero_fraction(rng)
    twist = t ** params.k
    if params.variant == "spiral":
        twist += Fraction(params.mu)
    beta = -twist * alpha
    x_perp = (-x[1], x[0])
    xi = (alpha * x[0] + beta * x_perp[0], alpha * x[1] + beta * x_perp[1])
    return Covector(t=t, x=x, tau=Fraction(0), xi=xi)


def sample_sigma2(rng, params: ModelParams) -> Covector:
    """Random exact-rational covector on the depth-two stratum (t = 0)."""
    x = (_nonzero_fraction(rng), _nonzero_fraction(rng))
    alpha = _nonzero_fraction(rng)
    if params.variant == "closed":
        xi = (alpha * x[0], alpha * x[1])
    else:
        mu = Fraction(params.mu)
        det = mu * mu + 1
        x_perp = (-x[1], x[0])
        # xi = A^(-1) (beta x_perp) makes <x, A xi> = 0 with <x, xi> != 0
        xi = (
            alpha * (mu * x_perp[0] - x[0]) / det,
            alpha * (mu * x_perp[1] - x[1]) / det,
        )
    return Covector(t=Fraction(0), x=x, tau=Fraction(0), xi=xi)
