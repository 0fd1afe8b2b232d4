"""
Sampled verification of the structural hypotheses on f and the constants derived from them.

Verdicts are statements about the sample, never proofs. A failing verdict always carries a
concrete witness (x, t) with both sides of the violated inequality.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from django.conf import settings
from django.core.cache import cache
from scipy import integrate, optimize

from core.context import get_current_rng
from spectral.params import ProblemParams
from variational.nonlinearities import Nonlinearity

logger = logging.getLogger(__name__)

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"

# f t / F must stay this far above 2 in the tail for (AR) to be credible
AR_MARGIN = 2.05
AR_PROBE = 2.01
AR_DECADES = np.arange(0, 9)
AR_WITNESS_DECADES = np.arange(1, 151)

_BRACKET_LIMIT = 1e12


@dataclass(frozen=True)
class SamplerConfig:
    samples: int = 1000
    t_max: float = 100.0
    x_points: int = 8
    thetas: tuple = tuple(i / 10 for i in range(11))
    epsilons: tuple = (0.5, 0.25, 0.125)
    amplitudes: tuple = (1.0, 2.0, 5.0)

    @classmethod
    def from_settings(cls, **overrides) -> "SamplerConfig":
        defaults = settings.LAB_DEFAULTS
        values = {
            "samples": defaults["samples"],
            "t_max": defaults["t_max"],
            "epsilons": tuple(defaults["epsilons"]),
            "amplitudes": tuple(defaults["amplitudes"]),
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)


@dataclass(frozen=True)
class Verdict:
    name: str
    verdict: str
    detail: str = ""
    witness: dict = None


@dataclass(frozen=True)
class ARVerdict:
    verdict: str
    mu: float = None
    R: float = None
    limit: float = None
    witness: list = field(default_factory=list)


@dataclass(frozen=True)
class HypothesisReport:
    label: str
    verdicts: tuple
    ar: ARVerdict
    growth_constants: dict
    bound_constants: dict

    def verdict(self, name: str) -> str:
        for item in self.verdicts:
            if item.name == name:
                return item.verdict
        raise KeyError(name)

    @property
    def passed(self) -> bool:
        return all(item.verdict != FAIL for item in self.verdicts)


# --- sampling ---


def sample_points(nl: Nonlinearity, dim: int, count: int) -> np.ndarray:
    """
    x samples in [0, T)^N drawn from the run's generator; shape (count, N).
    """
    if nl.modulation is None:
        return np.zeros((1, dim))
    rng = get_current_rng()
    return rng.uniform(0.0, nl.period, size=(count, dim))


def _coords(points: np.ndarray) -> tuple:
    return tuple(points[:, axis][:, None] for axis in range(points.shape[1]))


def _witness(points, index, t, lhs, rhs) -> dict:
    row, col = np.unravel_index(index, lhs.shape)
    return {
        "x": [float(v) for v in points[row]],
        "t": float(np.broadcast_to(t, lhs.shape)[row, col]),
        "lhs": float(lhs[row, col]),
        "rhs": float(rhs[row, col]),
    }


def _inequality(name, points, t, lhs, rhs, tol=1e-12) -> Verdict:
    """
    Checks lhs <= rhs (1 + tol) + tol everywhere on the sample.
    """
    slack = rhs + tol * (1.0 + np.abs(rhs)) - lhs
    if np.all(slack >= 0):
        return Verdict(name, PASS)
    index = int(np.argmin(slack))
    return Verdict(name, FAIL, "inequality violated", _witness(points, index, t, lhs, rhs))


# --- individual hypotheses ---


def check_periodicity(nl: Nonlinearity, points, t) -> Verdict:
    coords = _coords(points)
    base = nl.f(coords, t)
    worst = 0.0
    for axis in range(points.shape[1]):
        shifted = np.array(points, copy=True)
        shifted[:, axis] += nl.period
        diff = np.abs(nl.f(_coords(shifted), t) - base)
        worst = max(worst, float(np.max(diff)))
        if worst > 1e-9 * max(1.0, float(np.max(np.abs(base)))):
            index = int(np.argmax(diff))
            return Verdict("f1", FAIL, f"not T-periodic in x_{axis + 1}", _witness(points, index, t, diff, 0 * diff))
    return Verdict("f1", PASS, f"max shift difference {worst:.2e}")


def check_continuity(nl: Nonlinearity, points, t) -> Verdict:
    """
    Finite values everywhere and difference quotients that match f_t.
    """
    coords = _coords(points)
    values = nl.f(coords, t)
    if not np.all(np.isfinite(values)):
        index = int(np.argmin(np.isfinite(values)))
        return Verdict("f2", FAIL, "non-finite value", _witness(points, index, t, values, values))
    h = 1e-6
    quotient = (nl.f(coords, t + h) - nl.f(coords, t - h)) / (2 * h)
    slope = nl.f_t(coords, t)
    mismatch = np.abs(quotient - slope)
    bound = 1e-4 * (1.0 + np.abs(slope))
    if np.all(mismatch <= bound):
        return Verdict("f2", PASS)
    index = int(np.argmax(mismatch - bound))
    return Verdict("f2", FAIL, "difference quotient disagrees with f_t", _witness(points, index, t, quotient, slope))


def check_small_ratio(nl: Nonlinearity, points) -> Verdict:
    """
    sup_x |f(x,t)/t| at t = 10^{-k}, k = 1..8, must decrease towards 0.
    """
    coords = _coords(points)
    ratios = []
    for k in range(1, 9):
        t = 10.0**-k
        ratios.append(float(np.max(np.abs(nl.f(coords, np.array([t, -t])) / t))))
    ratios = np.array(ratios)
    if np.all(np.diff(ratios) <= 1e-15) and ratios[-1] < 1e-3:
        return Verdict("f3", PASS, f"f/t at 1e-8: {ratios[-1]:.2e}")
    witness = {"x": [float(v) for v in points[0]], "t": 1e-8, "lhs": float(ratios[-1]), "rhs": 0.0}
    return Verdict("f3", FAIL, "f(x,t)/t does not vanish at 0", witness)


def check_growth(nl: Nonlinearity, params: ProblemParams, points, t) -> Verdict:
    if not nl.exponent + 1.0 < params.critical_exponent:
        witness = {"x": None, "t": None, "lhs": nl.exponent + 1.0, "rhs": params.critical_exponent}
        return Verdict("f4", FAIL, "growth exponent is not subcritical", witness)
    coords = _coords(points)
    lhs = np.abs(nl.f(coords, t))
    rhs = nl.growth * (1.0 + np.abs(t) ** nl.exponent) + 0 * lhs
    return _inequality("f4", points, t, lhs, rhs)


def check_superquadratic(nl: Nonlinearity, points) -> Verdict:
    """
    inf_x F(x,t)/t² at t = 10^j, j = 1..8, must increase without bound.
    """
    coords = _coords(points)
    ratios = []
    for j in range(1, 9):
        t = 10.0**j
        ratios.append(float(np.min(nl.F(coords, np.array([t, -t])) / t**2)))
    ratios = np.array(ratios)
    increasing = np.all(np.diff(ratios) > 0)
    if increasing and ratios[-1] > 2.0 * max(ratios[0], 0.0) and ratios[-1] > 1.0:
        return Verdict("f5", PASS, f"F/t² at 1e8: {ratios[-1]:.3g}")
    j = int(np.argmin(np.diff(ratios))) + 2 if not increasing else 8
    witness = {"x": [float(v) for v in points[0]], "t": 10.0**j, "lhs": float(ratios[j - 1]), "rhs": math.inf}
    return Verdict("f5", FAIL, "F/t² does not blow up", witness)


def check_monotone_excess(nl: Nonlinearity, points, t, thetas) -> Verdict:
    """
    G(x, θt) <= γ G(x, t) for every sampled θ ∈ [0, 1].
    """
    coords = _coords(points)
    reference = nl.gamma * nl.G(coords, t)
    for theta in thetas:
        verdict = _inequality("f6", points, t, nl.G(coords, theta * t) + 0 * reference, reference)
        if verdict.verdict == FAIL:
            witness = dict(verdict.witness, theta=float(theta))
            return Verdict("f6", FAIL, verdict.detail, witness)
    return Verdict("f6", PASS)


def check_primitive(nl: Nonlinearity, points, count: int = 12) -> Verdict:
    """
    F(x,0) = 0 and F(x,t) = ∫_0^t f(x,τ)dτ by adaptive quadrature.
    """
    coords = _coords(points[:1])
    if np.any(nl.F(coords, np.array([[0.0]])) != 0):
        return Verdict("primitive", FAIL, "F(x,0) != 0")
    for t in np.linspace(-10.0, 10.0, count):
        integral, _ = integrate.quad(lambda tau: float(nl.f(coords, np.array([[tau]]))[0, 0]), 0.0, t, epsabs=1e-12)
        closed = float(nl.F(coords, np.array([[t]]))[0, 0])
        if abs(integral - closed) > 1e-8 * max(1.0, abs(closed)):
            witness = {"x": [float(v) for v in points[0]], "t": float(t), "lhs": closed, "rhs": integral}
            return Verdict("primitive", FAIL, "F is not the primitive of f", witness)
    return Verdict("primitive", PASS)


def check_sign(name: str, values, points, t) -> Verdict:
    if np.all(values >= 0):
        return Verdict(name, PASS)
    index = int(np.argmin(values))
    return Verdict(name, FAIL, "negative value", _witness(points, index, t, -values, 0 * values))


def check_ambrosetti_rabinowitz(nl: Nonlinearity, points) -> ARVerdict:
    """
    Looks for μ > 2 and R with μF <= f t for |t| >= R.

    The tail of f t / F is fitted against 1/log t; a limit at (or near) 2 means no μ > 2 can
    work, and a t where f t < 2.01 F is returned as witness.
    """
    if nl.is_zero:
        return ARVerdict(FAIL, witness=[{"t": 1.0, "lhs": 0.0, "rhs": 0.0}])
    coords = _coords(points)

    def ratio(t):
        t = np.asarray(t, dtype=float)[None, :]
        return np.min(nl.f(coords, t) * t / nl.F(coords, t), axis=0)

    tail = np.logspace(1, 8, 57)
    tail_ratio = ratio(tail)
    slope, limit = np.polyfit(1.0 / np.log(tail), tail_ratio, 1)
    limit = float(limit)

    if limit <= AR_MARGIN:
        witness = []
        for decade in AR_WITNESS_DECADES:
            t = 10.0 ** float(decade)
            value = float(ratio(np.array([t]))[0])
            witness.append({"t": t, "ratio": value})
            if value < AR_PROBE:
                break
        logger.info("%s fails (AR): tail ratio tends to %.4f", nl.label, limit)
        return ARVerdict(FAIL, limit=limit, witness=witness)

    for decade in AR_DECADES:
        R = 10.0 ** float(decade)
        t = np.logspace(decade, 8, 200)
        values = ratio(t)
        mu = float(np.min(values))
        if mu > AR_MARGIN and np.all(nl.F(coords, t) > 0):
            return ARVerdict(PASS, mu=mu, R=R, limit=limit)
    return ARVerdict(INCONCLUSIVE, limit=limit)


# --- derived constants ---


def growth_constant(nl: Nonlinearity, epsilon: float, t_max: float = 1e4, count: int = 4000) -> float:
    """
    Smallest C_ε on the sample with |F| <= ε t² + C_ε |t|^{p+1} and |f| <= 2ε|t| + (p+1)C_ε|t|^p.
    """
    p = nl.exponent
    t = np.geomspace(1e-6, t_max, count)
    a_max = nl.modulation_range[1]
    primitive = a_max * np.abs(nl.primitive(t))
    profile = a_max * np.abs(nl.profile(t))
    from_primitive = (primitive - epsilon * t**2) / t ** (p + 1.0)
    from_profile = (profile - 2.0 * epsilon * t) / ((p + 1.0) * t**p)
    return float(max(np.max(from_primitive), np.max(from_profile), 0.0))


def _bound_cache_key(nl: Nonlinearity, amplitude: float) -> str:
    return f"bound_constant:{nl.label}:{nl.exponent!r}:{float(amplitude)!r}:{nl.modulation_min!r}"


def bound_constant(nl: Nonlinearity, amplitude: float) -> float:
    """
    B_A = sup_{x,t} (A t² - F(x,t)), so that F >= A t² - B_A. Infinite when F does not outgrow A t².

    Cached through django.core.cache; the fit is a doubling bracket followed by a bounded
    maximization.
    """
    key = _bound_cache_key(nl, amplitude)
    cached = cache.get(key)
    if cached is not None:
        return cached

    a_min = nl.modulation_min

    def gain(t):
        return amplitude * t * t - a_min * float(nl.primitive(np.array([t]))[0])

    upper = 1.0
    while gain(2.0 * upper) >= gain(upper) or gain(2.0 * upper) > 0:
        upper *= 2.0
        if upper > _BRACKET_LIMIT:
            logger.info("B_A unbounded for %s at A=%g", nl.label, amplitude)
            value = math.inf
            cache.set(key, value, timeout=settings.LAB_DEFAULTS["bound_cache_timeout"])
            return value

    result = optimize.minimize_scalar(
        lambda t: -gain(t), bounds=(0.0, 2.0 * upper), method="bounded", options={"xatol": 1e-10 * upper}
    )
    value = max(float(-result.fun), 0.0)
    cache.set(key, value, timeout=settings.LAB_DEFAULTS["bound_cache_timeout"])
    logger.debug("B_A for %s at A=%g: %.6g (t*=%.4g)", nl.label, amplitude, value, result.x)
    return value


# --- report ---


def check_hypotheses(nl: Nonlinearity, params: ProblemParams, sampler: SamplerConfig = None) -> HypothesisReport:
    sampler = sampler or SamplerConfig.from_settings()
    points = sample_points(nl, params.dim, sampler.x_points)
    t = np.linspace(-sampler.t_max, sampler.t_max, sampler.samples)[None, :]
    coords = _coords(points)

    verdicts = (
        check_periodicity(nl, points, t),
        check_continuity(nl, points, t),
        check_small_ratio(nl, points),
        check_growth(nl, params, points, t),
        check_superquadratic(nl, points),
        check_monotone_excess(nl, points, t, sampler.thetas),
        check_primitive(nl, points),
        check_sign("F_nonnegative", nl.F(coords, t), points, t),
        check_sign("G_nonnegative", nl.G(coords, t), points, t),
    )
    ar = check_ambrosetti_rabinowitz(nl, points)

    growth_constants = {repr(float(eps)): growth_constant(nl, eps) for eps in sampler.epsilons}
    bound_constants = {repr(float(a)): bound_constant(nl, a) for a in sampler.amplitudes}

    for item in verdicts:
        if item.verdict == FAIL:
            logger.warning("%s fails %s: %s %s", nl.label, item.name, item.detail, item.witness)
    logger.info("Hypotheses for %s: %s, AR %s", nl.label, {v.name: v.verdict for v in verdicts}, ar.verdict)
    return HypothesisReport(
        label=nl.label,
        verdicts=verdicts,
        ar=ar,
        growth_constants=growth_constants,
        bound_constants=bound_constants,
    )
