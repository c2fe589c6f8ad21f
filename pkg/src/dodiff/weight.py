"""Distributed-order weight functions and their Laplace symbol.

The order density ``mu`` is a piecewise polynomial on [0, 1].  Its Laplace
symbol is

    w(s)   = int_0^1 s^(alpha-1) mu(alpha) d(alpha),
    s w(s) = int_0^1 s^alpha     mu(alpha) d(alpha),

with the principal branch of log s, branch cut along (-inf, 0].  Every
weight carries a concentration certificate (alpha0, delta, mu_at_alpha0):
the density stays above mu(alpha0)/2 on the open window
(alpha0 - delta, alpha0), which is what drives all lower bounds on the
resolvent symbol s*w(s) + lambda.  An optional upper cutoff alpha1 certifies
that mu vanishes on (alpha1, 1).

The envelopes

    zeta(r)     = (r - 1)/log r     (continuous, = 1 at r = 1, increasing),
    vartheta(r) = zeta(r)/r         (decreasing),

bound |s w(s)| <= sup|mu| * zeta(|s|) and |w(s)| <= sup|mu| * vartheta(|s|).
zeta is strictly monotone, so it has an inverse; the kernel module uses
zeta_inv to pick admissible contour radii.

All functions here are pure and the weight objects are immutable, so
concurrent use from any number of workers is safe.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.optimize import brentq

from . import textio
from .errors import DomainError, NumericError, PreconditionError

DEFAULT_QUAD_ORDER = 64
# Gauss-Legendre of order n on a panel resolves exp(c*alpha) only while
# |Re c| * width stays below a few hundred; panels are split to keep the
# per-panel exponent range under this bound.
_MAX_PANEL_EXPONENT = 150.0

_CERT_SAMPLES = 512
_DENSE_SAMPLES = 2048


class NearCutWarning(UserWarning):
    """Evaluation requested very close to the branch cut (|arg s| > 3.1)."""


@lru_cache(maxsize=32)
def _gauss(order: int):
    return np.polynomial.legendre.leggauss(order)


@dataclass(frozen=True)
class WeightFunction:
    """Piecewise-polynomial order density with its concentration certificate.

    ``breakpoints`` has K+1 sorted entries spanning [0, 1]; ``coeffs[k]``
    holds the polynomial coefficients (low to high degree, in the global
    order variable) valid on [breakpoints[k], breakpoints[k+1]).  At a
    breakpoint the right-limit value applies.  ``mu_at_alpha0`` is stored
    explicitly rather than recomputed: for an essentially-bounded density
    the pointwise value at alpha0 is a convention, and the certificate makes
    that convention explicit.
    """

    breakpoints: np.ndarray
    coeffs: tuple
    alpha0: float
    delta: float
    mu_at_alpha0: float
    sup_norm: float
    alpha1: float | None = None

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        cf = tuple(np.atleast_1d(np.asarray(c, dtype=float)) for c in self.coeffs)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "coeffs", cf)
        if bp.ndim != 1 or len(bp) < 2 or len(cf) != len(bp) - 1:
            raise PreconditionError("breakpoints/coeffs shape mismatch")
        if not (abs(bp[0]) < 1e-15 and abs(bp[-1] - 1.0) < 1e-15):
            raise PreconditionError("breakpoints must span [0, 1]")
        if np.any(np.diff(bp) <= 0):
            raise PreconditionError("breakpoints must be strictly increasing")
        if not (0.0 < self.alpha0 < 1.0):
            raise PreconditionError(f"alpha0 = {self.alpha0} outside (0, 1)")
        if not (0.0 < self.delta < self.alpha0):
            raise PreconditionError(f"delta = {self.delta} outside (0, alpha0)")
        if not self.mu_at_alpha0 > 0.0:
            raise PreconditionError("mu_at_alpha0 must be positive")
        if self.alpha1 is not None and not (self.alpha0 < self.alpha1 < 1.0):
            raise PreconditionError(f"alpha1 = {self.alpha1} outside (alpha0, 1)")
        self._check_samples()

    def _check_samples(self):
        grid = np.linspace(0.0, 1.0, _DENSE_SAMPLES)
        vals = self._eval_many(grid)
        if np.any(vals < -1e-12):
            raise PreconditionError("density invariant violated: mu < 0 on [0, 1]")
        if self.sup_norm < vals.max() - 1e-12:
            raise PreconditionError(
                "sup_norm invariant violated: stored bound below sampled maximum"
            )
        # concentration window is open, so sample strictly inside it
        lo, hi = self.alpha0 - self.delta, self.alpha0
        win = lo + self.delta * (np.arange(_CERT_SAMPLES) + 0.5) / _CERT_SAMPLES
        if np.any(self._eval_many(win) < 0.5 * self.mu_at_alpha0 - 1e-12):
            raise PreconditionError(
                "concentration invariant violated: mu < mu(alpha0)/2 on "
                f"({lo}, {hi})"
            )
        if self.alpha1 is not None:
            tail = np.linspace(self.alpha1, 1.0, _CERT_SAMPLES)[1:]
            if np.any(np.abs(self._eval_many(tail)) > 1e-12):
                raise PreconditionError(
                    "upper-cutoff invariant violated: mu != 0 on (alpha1, 1)"
                )

    def _piece_index(self, alpha):
        idx = np.searchsorted(self.breakpoints, alpha, side="right") - 1
        return np.clip(idx, 0, len(self.coeffs) - 1)

    def _eval_many(self, alpha: np.ndarray) -> np.ndarray:
        alpha = np.asarray(alpha, dtype=float)
        out = np.empty_like(alpha)
        idx = self._piece_index(alpha)
        for k, c in enumerate(self.coeffs):
            mask = idx == k
            if np.any(mask):
                out[mask] = npoly.polyval(alpha[mask], c)
        return out

    def panels(self, order: int = DEFAULT_QUAD_ORDER, max_exponent: float = 0.0):
        """Gauss-Legendre nodes/weights/density per piece, pieces that are
        identically zero skipped.  ``max_exponent`` is the largest |Re(log s)|
        the caller will use; panels are subdivided so the quadrature stays in
        its accuracy envelope for exponentials of that scale."""
        x, wq = _gauss(order)
        nodes, wts = [], []
        for k, c in enumerate(self.coeffs):
            if np.all(c == 0.0):
                continue
            a, b = self.breakpoints[k], self.breakpoints[k + 1]
            nsub = 1
            if max_exponent > 0.0:
                nsub = max(1, int(np.ceil(max_exponent * (b - a) / _MAX_PANEL_EXPONENT)))
            edges = np.linspace(a, b, nsub + 1)
            for j in range(nsub):
                lo, hi = edges[j], edges[j + 1]
                al = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
                nodes.append(al)
                wts.append(0.5 * (hi - lo) * wq * npoly.polyval(al, c))
        if not nodes:
            return np.zeros(0), np.zeros(0)
        return np.concatenate(nodes), np.concatenate(wts)

    def power_moments(self, logs, offset: float = 0.0, order: int = DEFAULT_QUAD_ORDER):
        """Vectorized ``int_0^1 exp((alpha + offset) * logs) mu(alpha) d(alpha)``.

        ``logs`` is an array of (complex) logarithms of the evaluation
        points; this is the single quadrature every symbol evaluation
        reduces to.
        """
        logs = np.atleast_1d(np.asarray(logs, dtype=complex))
        max_exp = float(np.max(np.abs(logs.real))) if logs.size else 0.0
        al, wt = self.panels(order=order, max_exponent=max_exp)
        if al.size == 0:
            return np.zeros(logs.shape, dtype=complex)
        return np.exp(np.multiply.outer(logs, al + offset)) @ wt

    def to_mapping(self) -> dict[str, str]:
        doc = {
            "type": "piecewise",
            "breakpoints": textio.format_array(self.breakpoints),
            "coeffs": textio.format_array_groups(self.coeffs),
            "alpha0": repr(self.alpha0),
            "delta": repr(self.delta),
            "mu_at_alpha0": repr(self.mu_at_alpha0),
            "sup_norm": repr(self.sup_norm),
        }
        if self.alpha1 is not None:
            doc["alpha1"] = repr(self.alpha1)
        return doc


def weight_from_mapping(body: dict[str, str]) -> WeightFunction:
    """Build a weight from the key-value document body (section ``[weight]``)."""
    kind = body.get("type", "piecewise").strip().lower()
    if kind == "constant":
        return make_constant_weight(
            value=float(body.get("value", "1.0")),
            alpha0=float(body["alpha0"]) if "alpha0" in body else 0.5,
            delta=float(body["delta"]) if "delta" in body else None,
        )
    if kind == "box":
        return make_box_weight(float(body["alpha0"]), float(body["h"]))
    if kind == "piecewise":
        try:
            bp = textio.parse_array(body["breakpoints"])
            cf = textio.parse_array_groups(body["coeffs"])
        except KeyError as exc:
            raise PreconditionError(f"piecewise weight missing key {exc}") from exc
        return WeightFunction(
            breakpoints=bp,
            coeffs=tuple(cf),
            alpha0=float(body["alpha0"]),
            delta=float(body["delta"]),
            mu_at_alpha0=float(body["mu_at_alpha0"]),
            sup_norm=float(body["sup_norm"]),
            alpha1=float(body["alpha1"]) if "alpha1" in body else None,
        )
    raise PreconditionError(f"unknown weight type {kind!r}")


def make_constant_weight(value: float = 1.0, alpha0: float = 0.5,
                         delta: float | None = None) -> WeightFunction:
    """Constant density mu = value on [0, 1]."""
    if value <= 0.0:
        raise DomainError("constant weight must be positive")
    if delta is None:
        delta = alpha0 / 2.0
    return WeightFunction(
        breakpoints=np.array([0.0, 1.0]),
        coeffs=(np.array([value]),),
        alpha0=alpha0,
        delta=delta,
        mu_at_alpha0=value,
        sup_norm=value,
    )


def make_box_weight(alpha0: float, h: float) -> WeightFunction:
    """Unit-mass box density (1/h) on [alpha0 - h, alpha0].

    This is the bounded approximant of a point mass at alpha0; letting
    h -> 0 recovers the constant-order dynamics at order alpha0.
    """
    if not (0.0 < h < alpha0 < 1.0):
        raise DomainError(f"box weight needs 0 < h < alpha0 < 1, got ({alpha0}, {h})")
    return WeightFunction(
        breakpoints=np.array([0.0, alpha0 - h, alpha0, 1.0]),
        coeffs=(np.array([0.0]), np.array([1.0 / h]), np.array([0.0])),
        alpha0=alpha0,
        delta=h,
        mu_at_alpha0=1.0 / h,
        sup_norm=1.0 / h,
        # the density vanishes beyond alpha0, so any cutoff in (alpha0, 1) is valid
        alpha1=0.5 * (alpha0 + 1.0),
    )


def make_tapered_weight(level: float = 1.0, plateau_end: float = 0.75,
                        support_end: float = 0.8, alpha0: float | None = None,
                        delta: float | None = None) -> WeightFunction:
    """Plateau density with a linear taper to zero and an upper support cutoff.

    mu = level on [0, plateau_end], linear down to 0 at support_end, 0 after.
    The cutoff certificate alpha1 = support_end enables the spectral-density
    tail bound checks.
    """
    if not (0.0 < plateau_end < support_end < 1.0) or level <= 0.0:
        raise DomainError("need 0 < plateau_end < support_end < 1 and level > 0")
    a0 = plateau_end if alpha0 is None else alpha0
    dl = (2.0 * a0 / 3.0) if delta is None else delta
    slope = -level / (support_end - plateau_end)
    # taper piece written in the global variable: level + slope*(alpha - plateau_end)
    taper = np.array([level - slope * plateau_end, slope])
    return WeightFunction(
        breakpoints=np.array([0.0, plateau_end, support_end, 1.0]),
        coeffs=(np.array([level]), taper, np.array([0.0])),
        alpha0=a0,
        delta=dl,
        mu_at_alpha0=level,
        sup_norm=level,
        alpha1=support_end,
    )


def eval_mu(w: WeightFunction, alpha: float) -> float:
    """Pointwise density; at a breakpoint the right-limit value is returned."""
    if not (0.0 <= alpha <= 1.0):
        raise DomainError(f"order alpha = {alpha} outside [0, 1]")
    return float(w._eval_many(np.array([alpha]))[0])


def _checked_log(s: complex) -> complex:
    s = complex(s)
    if s == 0 or (s.imag == 0.0 and s.real <= 0.0):
        raise DomainError(f"s = {s} lies on the branch cut (-inf, 0]")
    if abs(np.angle(s)) > 3.1:
        warnings.warn(f"evaluation near the branch cut: arg s = {np.angle(s):.4f}",
                      NearCutWarning, stacklevel=3)
    return complex(np.log(s))


def eval_w(w: WeightFunction, s: complex, order: int = DEFAULT_QUAD_ORDER) -> complex:
    """Laplace symbol w(s) = int_0^1 s^(alpha-1) mu(alpha) d(alpha)."""
    return complex(w.power_moments(_checked_log(s), offset=-1.0, order=order)[0])


def eval_sw(w: WeightFunction, s: complex, order: int = DEFAULT_QUAD_ORDER) -> complex:
    """s*w(s) = int_0^1 s^alpha mu(alpha) d(alpha), the resolvent symbol."""
    return complex(w.power_moments(_checked_log(s), offset=0.0, order=order)[0])


def sw_on_cut(w: WeightFunction, r, order: int = DEFAULT_QUAD_ORDER):
    """Upper-side limit of s*w(s) on the cut: int r^alpha e^(i pi alpha) mu d(alpha).

    Real part and imaginary part are the cosine/sine moments that enter the
    spectral density of the relaxation kernels.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r <= 0.0):
        raise DomainError("cut-limit evaluation needs r > 0")
    return w.power_moments(np.log(r) + 1j * np.pi, order=order)


def zeta_env(r: float) -> float:
    """zeta(r) = (r-1)/log r, continued by 1 at r = 1; increasing on (0, inf)."""
    if r <= 0.0:
        raise DomainError(f"zeta requires r > 0, got {r}")
    x = r - 1.0
    if abs(x) < 1e-6:
        # series of (r-1)/log(r) about r = 1 avoids the 0/0
        return 1.0 + x / 2.0 - x * x / 12.0
    return x / np.log(r)


def vartheta_env(r: float) -> float:
    """vartheta(r) = zeta(r)/r; decreasing on (0, inf)."""
    if r <= 0.0:
        raise DomainError(f"vartheta requires r > 0, got {r}")
    return zeta_env(r) / r


def zeta_inv(y: float) -> float:
    """Inverse of the increasing envelope zeta, by bisection in log r.

    The bracket spans log r in [-690, 690]; tiny targets (y below about
    1/690) come from weights with very large sup-norm and fall outside it.
    """
    if y <= 0.0:
        raise DomainError(f"zeta_inv requires y > 0, got {y}")
    lo, hi = -690.0, 690.0
    f = lambda u: zeta_env(np.exp(u)) - y
    if f(lo) > 0.0 or f(hi) < 0.0:
        raise NumericError(f"zeta_inv target {y} outside the bisection bracket")
    u = brentq(f, lo, hi, xtol=1e-13, rtol=1e-15)
    return float(np.exp(u))


def symbol_bound_constants(w: WeightFunction) -> dict[str, float]:
    """Explicit constants of the symbol lower bounds implied by the certificate."""
    a0, d = w.alpha0, w.delta
    base = d * w.mu_at_alpha0 / 2.0
    return {
        "power_floor_right": base * np.cos(a0 * np.pi / 2.0),
        "power_floor_left": base * min(np.sin((a0 - d) * np.pi / 2.0), np.sin(a0 * np.pi)),
    }


def check_symbol_bounds(w: WeightFunction, samples) -> dict[str, dict]:
    """Evaluate the four symbol inequalities on (s, lambda) samples.

    ``samples`` is an iterable of (s, lam) with s off the cut and lam > 0;
    an optional third entry supplies the interpolation exponent nu in [0, 1]
    (default 1/2).  Checked with their explicit constants:

      resolvent_floor:      |s w(s) + lam| >= C_beta * lam,
                            C_beta = 1 for |arg s| <= pi/2, sin(beta)/2 above;
      interpolation_bound:  lam^nu |s w|^{1-nu} / |s w + lam| <= 2/sin(beta),
                            only for |arg s| in (pi/2, pi);
      power_floor:          |s w(s) + lam| >= C min(|s|^{alpha0-delta}, |s|^{alpha0});
      symbol_envelope:      |s w(s)| <= sup|mu| * zeta(|s|).

    Returns, per inequality, the worst (signed) slack = satisfied-side minus
    required-side, the sample achieving it, and the violation count; any
    negative slack is a violation.
    """
    consts = symbol_bound_constants(w)
    report = {
        name: {"min_slack": np.inf, "argmin": None, "violations": 0, "count": 0}
        for name in ("resolvent_floor", "interpolation_bound", "power_floor",
                     "symbol_envelope")
    }

    def record(name, slack, sample):
        entry = report[name]
        entry["count"] += 1
        if slack < entry["min_slack"]:
            entry["min_slack"] = slack
            entry["argmin"] = sample
        if slack < 0.0:
            entry["violations"] += 1

    for sample in samples:
        s, lam = sample[0], float(sample[1])
        nu = float(sample[2]) if len(sample) > 2 else 0.5
        if lam <= 0.0:
            raise DomainError(f"lambda must be positive, got {lam}")
        sw = eval_sw(w, s)
        beta = abs(np.angle(complex(s)))
        mod = abs(complex(s))
        lhs = abs(sw + lam)

        c_beta = 1.0 if beta <= np.pi / 2.0 else np.sin(beta) / 2.0
        record("resolvent_floor", lhs - c_beta * lam, sample)

        if beta > np.pi / 2.0:
            ratio = lam ** nu * abs(sw) ** (1.0 - nu) / lhs
            record("interpolation_bound", 2.0 / np.sin(beta) - ratio, sample)

        c_pow = (consts["power_floor_right"] if beta <= np.pi / 2.0
                 else consts["power_floor_left"])
        floor = c_pow * min(mod ** (w.alpha0 - w.delta), mod ** w.alpha0)
        record("power_floor", lhs - floor, sample)

        record("symbol_envelope", w.sup_norm * zeta_env(mod) - abs(sw), sample)

    return report
