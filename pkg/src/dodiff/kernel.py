"""Per-mode relaxation kernels by contour and real-axis quadrature.

For each eigenvalue lambda_n the solution operators act diagonally through
two inverse-Laplace kernels,

    E_n(t) = (1/2 pi i) int_gamma  w(s)/(s w(s) + lambda_n) e^(st) ds,
    G_n(t) = (1/2 pi i) int_gamma     1/(s w(s) + lambda_n) e^(st) ds,

which generalize the constant-order pair E_a(-lambda t^a) and
t^(a-1) E_{a,a}(-lambda t^a).  The contour gamma(eps, theta) consists of two
rays at angles +-theta in (pi/2, pi) joined by an arc of radius eps; the
kernels are independent of any admissible (eps, theta), which the tests
exploit as an internal consistency check.

Independently, squeezing the contour onto the branch cut yields the
real-axis representation

    G_n(t) = (1/pi) int_0^inf Phi_n(r) e^(-rt) dr,
    Phi_n(r) = N(r) / ((D(r) + lambda_n)^2 + N(r)^2),

where D + iN is the upper-side cut limit of s w(s).  Phi_n is the spectral
density of the mode: non-negative, integrable against 1/r, and the route is
fully independent of the contour quadrature.

Only the upper ray and upper half-arc are quadratured; the lower half is
their complex conjugate, which halves the cost and forces a real result.

Everything here is pure; kernel tables are immutable once built and safe to
fill from concurrent workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np
from scipy.optimize import brentq
from scipy.special import rgamma

from .errors import DomainError, NumericError, PreconditionError
from .spectral import SpectralBasis
from .weight import WeightFunction, zeta_inv

_LN10 = math.log(10.0)


@dataclass(frozen=True)
class KernelConfig:
    """Quadrature policy for kernel evaluations.

    ``eta`` = 1/(2 sup|mu|) is the symbol margin that keeps the arc away
    from the zero set of s w(s) + lambda; ``t_threshold`` is the time scale
    beyond which the 1/t branch of the arc-radius rule binds.
    """

    eta: float
    theta: float = 3.0 * np.pi / 4.0
    ray_order: int = 16
    panel_ratio: float = 2.0
    arc_count: int = 24
    tail_decades: float = 16.0
    t_threshold: float = math.e
    moment_order: int = 64
    spectral_lower_rt: float = 1e-8
    spectral_upper_rt: float = 40.0
    spectral_tail_floor: float = 1e-12
    spectral_panel_width: float = 0.75

    def __post_init__(self):
        if self.eta <= 0.0:
            raise PreconditionError("eta must be positive")
        if not (np.pi / 2.0 < self.theta < np.pi):
            raise PreconditionError(f"theta = {self.theta} outside (pi/2, pi)")

    @classmethod
    def for_weight(cls, w: WeightFunction, **kwargs) -> "KernelConfig":
        return cls(eta=1.0 / (2.0 * w.sup_norm), **kwargs)


@dataclass(frozen=True)
class ContourSpec:
    """A concrete deformed contour: rays at +-theta from radius epsilon out
    to the cutoff, plus the joining arc.  The cutoff carries a truncation
    certificate: the discarded ray tail is bounded by exp(cutoff*t*cos(theta)),
    required to be below 1e-16."""

    epsilon: float
    theta: float
    t: float
    ray_cutoff: float
    ray_order: int = 16
    panel_ratio: float = 2.0
    arc_count: int = 24

    def __post_init__(self):
        if not (np.pi / 2.0 < self.theta < np.pi):
            raise PreconditionError(f"theta = {self.theta} outside (pi/2, pi)")
        if not (0.0 < self.epsilon <= self.ray_cutoff):
            raise PreconditionError("need 0 < epsilon <= ray cutoff")
        if self.t <= 0.0:
            raise DomainError("contour is built for a positive time")
        # compared in log space with rounding slack: the cutoff rule lands
        # exactly on the certificate boundary
        if self.ray_cutoff * self.t * math.cos(self.theta) > -16.0 * _LN10 + 1e-9:
            raise NumericError(
                "truncation certificate unmet: exp(R t cos theta) > 1e-16")

    @property
    def n_panels(self) -> int:
        return max(1, int(np.ceil(np.log(self.ray_cutoff / self.epsilon)
                                  / np.log(self.panel_ratio))))

    @property
    def ray_count(self) -> int:
        return self.n_panels * self.ray_order

    def ray_quadrature(self):
        """Geometrically graded Gauss-Legendre nodes on [epsilon, cutoff]."""
        x, wq = np.polynomial.legendre.leggauss(self.ray_order)
        edges = self.epsilon * (self.ray_cutoff / self.epsilon) ** (
            np.arange(self.n_panels + 1) / self.n_panels)
        lo, hi = edges[:-1, None], edges[1:, None]
        nodes = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
        wts = 0.5 * (hi - lo) * np.broadcast_to(wq, nodes.shape)
        return nodes.ravel(), wts.ravel()

    def arc_quadrature(self):
        """Gauss-Legendre nodes in angle on the upper half-arc [0, theta]."""
        x, wq = np.polynomial.legendre.leggauss(self.arc_count)
        return 0.5 * self.theta * (x + 1.0), 0.5 * self.theta * wq


def choose_contour(t: float, lambda1: float, w: WeightFunction,
                   cfg: KernelConfig | None = None) -> ContourSpec:
    """Contour for time t: radius rule eps = min(eps0, 1/t) with
    eps0 = (1/2) min(1, eta*lambda_1, zeta_inv(eta*lambda_1)), which keeps
    |s w(s)| <= lambda_1/2 on the arc for every mode; cutoff chosen so the
    discarded tail is below 10^-tail_decades."""
    if t <= 0.0:
        raise DomainError(f"time t = {t} must be positive")
    if cfg is None:
        cfg = KernelConfig.for_weight(w)
    y = cfg.eta * lambda1
    eps0 = 0.5 * min(1.0, y, zeta_inv(y))
    epsilon = min(eps0, 1.0 / t)
    cutoff = cfg.tail_decades * _LN10 / (t * abs(math.cos(cfg.theta)))
    return ContourSpec(epsilon=epsilon, theta=cfg.theta, t=t, ray_cutoff=cutoff,
                       ray_order=cfg.ray_order, panel_ratio=cfg.panel_ratio,
                       arc_count=cfg.arc_count)


def _contour_rows(t: float, lambdas: np.ndarray, w: WeightFunction,
                  spec: ContourSpec, moment_order: int = 64):
    """Batched contour quadrature of (E_n, G_n) over all eigenvalues.

    Returns two arrays shaped like ``lambdas``.  The result is assembled as
    (A - conj A)/(2 pi i) from the upper-half pieces, so it is real by
    construction; the imaginary residue is asserted anyway as a guard on the
    assembly algebra.
    """
    lambdas = np.asarray(lambdas, dtype=float)
    r, wr = spec.ray_quadrature()
    logs_ray = np.log(r) + 1j * spec.theta
    s_ray = np.exp(logs_ray)
    sw_ray = w.power_moments(logs_ray, order=moment_order)
    # ds = e^(i theta) dr on the ray; quadrature weight absorbs both
    phase_ray = np.exp(s_ray * t) * wr * np.exp(1j * spec.theta)

    beta, wb = spec.arc_quadrature()
    s_arc = spec.epsilon * np.exp(1j * beta)
    sw_arc = w.power_moments(np.log(spec.epsilon) + 1j * beta, order=moment_order)
    # ds = i s dbeta on the arc
    phase_arc = np.exp(s_arc * t) * wb * (1j * s_arc)

    denom_ray = sw_ray[None, :] + lambdas[:, None]
    denom_arc = sw_arc[None, :] + lambdas[:, None]

    def close_up(a_upper):
        val = (a_upper - np.conj(a_upper)) / (2j * np.pi)
        resid = np.max(np.abs(val.imag))
        if resid > 1e-10 * max(1.0, float(np.max(np.abs(val)))):
            raise NumericError(f"imaginary residue {resid:.2e} after conjugate closure")
        return val.real

    a_G = (phase_ray[None, :] / denom_ray).sum(axis=1) \
        + (phase_arc[None, :] / denom_arc).sum(axis=1)
    w_ray = sw_ray / s_ray
    w_arc = sw_arc / s_arc
    a_E = ((phase_ray * w_ray)[None, :] / denom_ray).sum(axis=1) \
        + ((phase_arc * w_arc)[None, :] / denom_arc).sum(axis=1)
    return close_up(a_E), close_up(a_G)


def eval_kernel_row(t: float, lambdas, w: WeightFunction,
                    spec: ContourSpec | None = None,
                    cfg: KernelConfig | None = None):
    """(E_n(t), G_n(t)) for a whole eigenvalue vector at one time."""
    lambdas = np.atleast_1d(np.asarray(lambdas, dtype=float))
    if np.any(lambdas <= 0.0):
        raise DomainError("eigenvalues must be positive")
    if spec is None:
        spec = choose_contour(t, float(lambdas.min()), w, cfg)
    return _contour_rows(t, lambdas, w, spec,
                         moment_order=cfg.moment_order if cfg else 64)


def shared_contour(times, lambda1: float, w: WeightFunction,
                   cfg: KernelConfig | None = None) -> ContourSpec:
    """One contour admissible for every time in ``times``: the radius obeys
    the 1/t rule at the largest time, the cutoff certificate at the smallest.
    Kernel values are contour-independent, so sharing is exact.

    The radius is floored at 0.25: the resolvent symbol has no zeros off the
    cut (its modulus stays above C_beta * lambda everywhere), so larger arcs
    are equally valid and avoid the long geometric ray grading that the
    worst-case proof radius would force for weights with large sup-norm.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times <= 0.0):
        raise DomainError("all times must be positive")
    if cfg is None:
        cfg = KernelConfig.for_weight(w)
    y = cfg.eta * lambda1
    eps0 = 0.5 * min(1.0, y, zeta_inv(y))
    epsilon = min(1.0 / float(times.max()), max(eps0, 0.25))
    cutoff = cfg.tail_decades * _LN10 / (float(times.min()) * abs(math.cos(cfg.theta)))
    return ContourSpec(epsilon=epsilon, theta=cfg.theta, t=float(times.min()),
                       ray_cutoff=cutoff, ray_order=cfg.ray_order,
                       panel_ratio=cfg.panel_ratio, arc_count=cfg.arc_count)


def eval_kernel_block(times, lambdas, w: WeightFunction,
                      cfg: KernelConfig | None = None,
                      spec: ContourSpec | None = None,
                      chunk: int = 64):
    """(E, G) arrays of shape (n_times, n_modes) over a whole time grid.

    All times share one contour, so the symbol quadrature is evaluated once
    and only the exponential factor varies; times are chunked to bound the
    working set.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    lambdas = np.atleast_1d(np.asarray(lambdas, dtype=float))
    if np.any(lambdas <= 0.0):
        raise DomainError("eigenvalues must be positive")
    if spec is None and times.size and times.max() > 1e3 * times.min():
        # wide spans would force very long ray gradings; band the grid so
        # each shared contour covers at most three decades
        order = np.argsort(times)
        E = np.empty((len(times), len(lambdas)))
        G = np.empty_like(E)
        lo = 0
        while lo < len(order):
            t_lo = times[order[lo]]
            hi = lo
            while hi < len(order) and times[order[hi]] <= 1e3 * t_lo:
                hi += 1
            idx = order[lo:hi]
            E[idx], G[idx] = eval_kernel_block(times[idx], lambdas, w,
                                               cfg=cfg, chunk=chunk)
            lo = hi
        return E, G
    if spec is None:
        spec = shared_contour(times, float(lambdas.min()), w, cfg)

    r, wr = spec.ray_quadrature()
    logs_ray = np.log(r) + 1j * spec.theta
    s_ray = np.exp(logs_ray)
    morder = cfg.moment_order if cfg else 64
    sw_ray = w.power_moments(logs_ray, order=morder)
    beta, wb = spec.arc_quadrature()
    s_arc = spec.epsilon * np.exp(1j * beta)
    sw_arc = w.power_moments(np.log(spec.epsilon) + 1j * beta, order=morder)

    denom_ray = sw_ray[None, :] + lambdas[:, None]
    denom_arc = sw_arc[None, :] + lambdas[:, None]
    base_ray = wr * np.exp(1j * spec.theta)
    base_arc = wb * (1j * s_arc)
    coefG_ray = base_ray[None, :] / denom_ray          # (n_modes, n_ray)
    coefG_arc = base_arc[None, :] / denom_arc
    coefE_ray = coefG_ray * (sw_ray / s_ray)[None, :]
    coefE_arc = coefG_arc * (sw_arc / s_arc)[None, :]

    E = np.empty((len(times), len(lambdas)))
    G = np.empty_like(E)
    for lo in range(0, len(times), chunk):
        tc = times[lo:lo + chunk]
        ex_ray = np.exp(np.multiply.outer(tc, s_ray))
        ex_arc = np.exp(np.multiply.outer(tc, s_arc))
        aE = ex_ray @ coefE_ray.T + ex_arc @ coefE_arc.T
        aG = ex_ray @ coefG_ray.T + ex_arc @ coefG_arc.T
        E[lo:lo + chunk] = aE.imag / np.pi
        G[lo:lo + chunk] = aG.imag / np.pi
    return E, G


def eval_En_contour(n: int, t: float, basis: SpectralBasis, w: WeightFunction,
                    spec: ContourSpec | None = None,
                    cfg: KernelConfig | None = None) -> float:
    """Homogeneous-propagator kernel for 1-based mode n at time t."""
    lam = _mode_lambda(basis, n)
    if spec is None:
        spec = choose_contour(t, float(basis.eigenvalues[0]), w, cfg)
    E, _ = _contour_rows(t, np.array([lam]), w, spec,
                         moment_order=cfg.moment_order if cfg else 64)
    return float(E[0])


def eval_Gn_contour(n: int, t: float, basis: SpectralBasis, w: WeightFunction,
                    spec: ContourSpec | None = None,
                    cfg: KernelConfig | None = None) -> float:
    """Source-response kernel for 1-based mode n at time t."""
    lam = _mode_lambda(basis, n)
    if spec is None:
        spec = choose_contour(t, float(basis.eigenvalues[0]), w, cfg)
    _, G = _contour_rows(t, np.array([lam]), w, spec,
                         moment_order=cfg.moment_order if cfg else 64)
    return float(G[0])


def _mode_lambda(basis: SpectralBasis, n: int) -> float:
    if not (1 <= n <= basis.n_modes):
        raise DomainError(f"mode index n = {n} outside 1..{basis.n_modes}")
    return float(basis.eigenvalues[n - 1])


def phi_n(n: int, r, basis: SpectralBasis, w: WeightFunction):
    """Spectral density Phi_n(r) of mode n on the positive half-line."""
    lam = _mode_lambda(basis, n)
    return phi_values(lam, r, w)


def phi_values(lam: float, r, w: WeightFunction):
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r_arr <= 0.0):
        raise DomainError("Phi_n is defined for r > 0")
    out = _phi_from_logr(lam, np.log(r_arr), w)
    return out if np.ndim(r) else float(out[0])


def _phi_from_logr(lam: float, logr: np.ndarray, w: WeightFunction,
                   order: int = 64) -> np.ndarray:
    """Phi evaluated from log r, so far tails never underflow the radius."""
    cut = w.power_moments(np.asarray(logr, dtype=float) + 1j * np.pi, order=order)
    return cut.imag / ((cut.real + lam) ** 2 + cut.imag ** 2)


def eval_Gn_spectral(n: int, t: float, basis: SpectralBasis, w: WeightFunction,
                     cfg: KernelConfig | None = None) -> float:
    """G_n(t) through the real-axis density: (1/pi) int Phi_n e^(-rt) dr.

    Quadratured in u = log r on Gauss-Legendre panels; the window is chosen
    so both tails sit below the kernel scale: the upper end where r t
    exceeds ``spectral_upper_rt``, the lower end where r t is below
    ``spectral_lower_rt`` and the crude tail estimate r*Phi_n(r) falls under
    ``spectral_tail_floor``/lambda_n^2 (scaled by sup|mu|).
    """
    if t <= 0.0:
        raise DomainError(f"time t = {t} must be positive")
    if cfg is None:
        cfg = KernelConfig.for_weight(w)
    lam = _mode_lambda(basis, n)

    r_min = cfg.spectral_lower_rt / t
    floor = cfg.spectral_tail_floor * max(1.0, w.sup_norm) / lam ** 2
    while r_min * phi_values(lam, r_min, w) > floor:
        r_min /= 10.0
        if r_min < 1e-130:
            raise NumericError("spectral lower truncation certificate unmet")
    u_min = math.log(r_min)
    u_max = math.log(cfg.spectral_upper_rt / t)
    if u_max <= u_min:
        raise NumericError("empty spectral quadrature window")

    u, wu = _panel_gauss(u_min, u_max, cfg.spectral_panel_width)
    vals = _phi_from_logr(lam, u, w, order=cfg.moment_order) \
        * np.exp(u - np.exp(u) * t)
    return float(vals @ wu / np.pi)


def _panel_gauss(lo: float, hi: float, width: float, order: int = 16):
    x, wq = np.polynomial.legendre.leggauss(order)
    n_pan = max(1, int(math.ceil((hi - lo) / width)))
    edges = np.linspace(lo, hi, n_pan + 1)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (b - a) * x + 0.5 * (a + b)
    wts = 0.5 * (b - a) * np.broadcast_to(wq, nodes.shape)
    return nodes.ravel(), wts.ravel()


def dEn_dt(n: int, t: float, basis: SpectralBasis, w: WeightFunction,
           spec: ContourSpec | None = None,
           cfg: KernelConfig | None = None) -> float:
    """Time derivative of E_n through the identity dE_n/dt = -lambda_n G_n."""
    lam = _mode_lambda(basis, n)
    return -lam * eval_Gn_contour(n, t, basis, w, spec=spec, cfg=cfg)


def dEn_dt_finite_difference(n: int, t: float, basis: SpectralBasis,
                             w: WeightFunction, step: float | None = None,
                             cfg: KernelConfig | None = None) -> float:
    """Central-difference route on E_n, for testing the identity only."""
    h = 1e-4 * t if step is None else step
    up = eval_En_contour(n, t + h, basis, w, cfg=cfg)
    dn = eval_En_contour(n, t - h, basis, w, cfg=cfg)
    return (up - dn) / (2.0 * h)


# --- Mittag-Leffler reference ------------------------------------------------

def mittag_leffler(alpha: float, beta: float, z: float) -> float:
    """E_(alpha,beta)(z) for real z <= 0 and alpha in (0, 1].

    Power series sum z^k / Gamma(alpha k + beta) below the switch radius
    max(5, 21^alpha); the series is summed in extended precision because its
    terms grow like exp(|z|^(1/alpha)) before they decay.  Beyond the switch
    the algebraic tail expansion -sum z^(-k)/Gamma(beta - alpha k) applies,
    truncated at its smallest term; the switch radius keeps that optimal
    truncation error below 1e-9.
    """
    if not (0.0 < alpha <= 1.0):
        raise DomainError(f"alpha = {alpha} outside (0, 1]")
    z = float(z)
    if z > 0.0:
        raise DomainError(f"evaluator covers z <= 0, got z = {z}")
    if z == 0.0:
        return float(rgamma(beta))
    if abs(z) <= max(5.0, 21.0 ** alpha):
        return _ml_series(alpha, beta, z)
    return _ml_asymptotic(alpha, beta, z)


def _ml_series(alpha: float, beta: float, z: float) -> float:
    growth = abs(z) ** (1.0 / alpha)
    extra = int(math.ceil(0.45 * growth)) + 10
    if extra > 1200:
        raise NumericError(
            f"series at alpha = {alpha}, |z| = {abs(z)} needs {extra} digits")
    with mp.workdps(20 + extra):
        za, ba = mp.mpf(alpha), mp.mpf(beta)
        zz = mp.mpf(z)
        total = mp.mpf(0)
        power = mp.mpf(1)
        kmax = int(4 * (growth / alpha + 60))
        tol = mp.mpf(10) ** (-(mp.mp.dps - 5))
        small = 0
        for k in range(kmax):
            term = power * mp.rgamma(za * k + ba)
            total += term
            power *= zz
            if abs(term) < tol * (1 + abs(total)):
                small += 1
                if small >= 3 and za * k + ba > growth + 2:
                    break
            else:
                small = 0
        else:
            raise NumericError("series failed to converge within the term cap")
        return float(total)


def _ml_asymptotic(alpha: float, beta: float, z: float) -> float:
    # optimal truncation: |terms| dip to a global minimum before diverging,
    # but not monotonically (the reciprocal gamma oscillates through its
    # zeros), so truncate at the global minimum over a fixed horizon
    ks = np.arange(1, 201)
    terms = -rgamma(beta - alpha * ks) * z ** (-ks.astype(float))
    mags = np.abs(terms)
    mags[mags == 0.0] = np.inf
    stop = int(np.argmin(mags)) + 1
    return float(math.fsum(terms[:stop]))


# --- spectral-density tail machinery ------------------------------------------

def an_threshold(n: int, basis: SpectralBasis, w: WeightFunction) -> float:
    """The radius a_n where int_0^1 a^alpha mu(alpha) d(alpha) = lambda_n / 2.

    The moment map is strictly increasing, so the root is unique; solved by
    bracketing bisection with residual certified below 1e-10 * lambda_n.
    """
    lam = _mode_lambda(basis, n)
    target = lam / 2.0

    def f(u):
        return float(w.power_moments(np.array([u + 0.0j]))[0].real) - target

    lo, hi = -300.0, 300.0
    if f(lo) > 0.0 or f(hi) < 0.0:
        raise NumericError(f"a_n bracket expansion failed for lambda = {lam}")
    u = brentq(f, lo, hi, xtol=1e-14, rtol=1e-15, maxiter=300)
    a = float(math.exp(u))
    if abs(f(u)) > 1e-10 * lam:
        raise NumericError(f"a_n residual certificate unmet at lambda = {lam}")
    return a


def check_g0c(n: int, basis: SpectralBasis, w: WeightFunction,
              split: bool = True) -> float:
    """The product lambda_n * int_0^inf Phi_n(r)/r dr.

    Boundedness of this product across n is the testable content of the
    spectral-density tail bound; it requires the upper support cutoff
    (alpha1 present).  The integral is taken in u = log r and split at the
    threshold radius a_n, mirroring the two regimes of the density.
    """
    if w.alpha1 is None:
        raise PreconditionError(
            "tail-bound check requires a weight with upper support cutoff alpha1")
    lam = _mode_lambda(basis, n)
    a_n = an_threshold(n, basis, w)
    u_split = math.log(a_n)
    u_min = -1000.0
    u_max = max(u_split, 0.0) + 300.0

    def integrate(lo, hi):
        if hi <= lo:
            return 0.0
        # graded panels built from hi downwards: unit width near the split,
        # geometric growth into the far tails where the integrand is a slow
        # power of u
        pts = [hi]
        while pts[-1] > lo:
            span = pts[-1] - lo
            step = min(max(1.0, 0.25 * abs(pts[-1])), span)
            pts.append(pts[-1] - step)
        pts[-1] = lo
        edges = np.array(pts[::-1])
        x, wq = np.polynomial.legendre.leggauss(16)
        a, b = edges[:-1, None], edges[1:, None]
        nodes = (0.5 * (b - a) * x + 0.5 * (a + b)).ravel()
        wts = (0.5 * (b - a) * np.broadcast_to(wq, (len(edges) - 1, 16))).ravel()
        return float(_phi_from_logr(lam, nodes, w) @ wts)

    if split:
        total = integrate(u_min, u_split) + integrate(u_split, u_max)
    else:
        total = integrate(u_min, u_max)
    return lam * total


# --- sampled kernel tables -----------------------------------------------------

@dataclass(frozen=True)
class KernelTable:
    """Sampled kernels per mode and time; method is ``contour`` or ``spectral``."""

    modes: np.ndarray
    times: np.ndarray
    E: np.ndarray
    G: np.ndarray
    method: str

    def __post_init__(self):
        object.__setattr__(self, "modes", np.asarray(self.modes, dtype=int))
        object.__setattr__(self, "times", np.asarray(self.times, dtype=float))
        object.__setattr__(self, "E", np.asarray(self.E, dtype=float))
        object.__setattr__(self, "G", np.asarray(self.G, dtype=float))
        shape = (len(self.modes), len(self.times))
        if self.E.shape != shape or self.G.shape != shape:
            raise PreconditionError("kernel table shape mismatch")
        if not (np.all(np.isfinite(self.E)) and np.all(np.isfinite(self.G))):
            raise PreconditionError("kernel table holds non-finite entries")
        if np.any(self.G <= 0.0):
            raise PreconditionError("positivity invariant violated: G_n <= 0")


def build_kernel_table(basis: SpectralBasis, w: WeightFunction, times,
                       modes=None, method: str = "contour",
                       cfg: KernelConfig | None = None) -> KernelTable:
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if modes is None:
        modes = np.arange(1, basis.n_modes + 1)
    modes = np.atleast_1d(np.asarray(modes, dtype=int))
    lams = np.array([_mode_lambda(basis, int(m)) for m in modes])
    E = np.empty((len(modes), len(times)))
    G = np.empty_like(E)
    if method == "contour":
        for j, t in enumerate(times):
            E[:, j], G[:, j] = eval_kernel_row(t, lams, w, cfg=cfg)
    elif method == "spectral":
        for i, m in enumerate(modes):
            for j, t in enumerate(times):
                G[i, j] = eval_Gn_spectral(int(m), float(t), basis, w, cfg=cfg)
        # the homogeneous kernel has no independent real-axis route here;
        # tables tagged spectral carry the contour values for E
        for j, t in enumerate(times):
            E[:, j], _ = eval_kernel_row(t, lams, w, cfg=cfg)
    else:
        raise DomainError(f"unknown kernel method {method!r}")
    return KernelTable(modes=modes, times=times, E=E, G=G, method=method)
