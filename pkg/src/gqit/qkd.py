"""Weak-coherent BB84: detector model, decoy-state bounds and key rates.

Binary entropies are in bits and key rates are per sifted bit.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import brentq
from scipy.special import erf

from .errors import DegenerateInput, InvalidArgument, NumericalFailure

FLUCTUATION_SIGMAS = 10.0


@dataclass(frozen=True)
class DetectorModel:
    """Receiver and link parameters.

    ``alpha_db_per_km`` is the fiber loss, ``beta_db`` a fixed receiver loss,
    ``afterpulse_A`` the afterpulse probability per gate and ``afterpulse_M``
    the number of gates it persists for.
    """

    eta: float = 0.1
    p_dark: float = 1e-5
    visibility: float = 1.0
    alpha_db_per_km: float = 0.2
    beta_db: float = 0.0
    afterpulse_A: float = 0.0
    afterpulse_M: float = 0.0

    def __post_init__(self):
        if not 0 < self.eta <= 1:
            raise InvalidArgument("eta must lie in (0, 1]")
        if not 0 <= self.p_dark < 1:
            raise InvalidArgument("p_dark must lie in [0, 1)")
        if not 0.5 < self.visibility <= 1:
            raise InvalidArgument("visibility must lie in (0.5, 1]")
        if self.alpha_db_per_km < 0 or self.beta_db < 0:
            raise InvalidArgument("losses must be nonnegative")
        if not 0 <= self.afterpulse_A <= 1 or self.afterpulse_M < 0:
            raise InvalidArgument("invalid afterpulse parameters")

    @classmethod
    def from_dict(cls, doc: dict) -> "DetectorModel":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise InvalidArgument(f"unknown detector fields: {sorted(unknown)}")
        return cls(**doc)


def link_transmittance(model: DetectorModel, L_km: float) -> float:
    """``10^{-(alpha L + beta)/10}``."""
    if L_km < 0:
        raise InvalidArgument("distance must be nonnegative")
    return float(10.0 ** (-(model.alpha_db_per_km * L_km + model.beta_db) / 10.0))


def arrival_probability(model: DetectorModel, L_km: float, source: str = "single",
                        mu: Optional[float] = None) -> float:
    """Probability that a signal reaches the receiver.

    ``source="single"`` gives the link transmittance; ``source="coherent"``
    gives ``1 - exp(-mu T)`` for a coherent pulse of mean photon number ``mu``.
    """
    t = link_transmittance(model, L_km)
    if source == "single":
        return t
    if source == "coherent":
        if mu is None or mu < 0:
            raise InvalidArgument("coherent source needs mu >= 0")
        return float(-np.expm1(-mu * t))
    raise InvalidArgument(f"unknown source {source!r}")


class QberResult(NamedTuple):
    e_b: float
    p_det: float
    e_b_afterpulse: float


def qber_from_arrival(model: DetectorModel, S: float) -> QberResult:
    """Error rate given the arrival probability ``S``."""
    eta, pd, v = model.eta, model.p_dark, model.visibility
    p_det = S * eta + pd - S * eta * pd
    if p_det <= 0:
        raise DegenerateInput("detection probability is zero")
    e_b = 0.5 * (S * (1.0 - v) * eta + pd) / p_det
    return QberResult(float(e_b), float(p_det),
                      float(e_b + 0.5 * model.afterpulse_A * model.afterpulse_M))


def qber(model: DetectorModel, L_km: float, mu: Optional[float] = None) -> QberResult:
    """Error rate ``e_B`` and detection probability at distance ``L_km``.

    With ``mu`` the source is a coherent pulse, otherwise a single photon.
    The third field adds the steady-state afterpulse contribution ``A M / 2``.
    """
    source = "single" if mu is None else "coherent"
    return qber_from_arrival(model, arrival_probability(model, L_km, source, mu))


def max_secure_distance(model: DetectorModel, threshold: float = 0.11,
                        mu: Optional[float] = None, L_max: float = 1e4) -> float:
    """Largest distance with ``e_B <= threshold``, found by bisection.

    Returns 0 when the threshold is already exceeded at zero distance and
    ``inf`` when it is never exceeded up to ``L_max``.
    """
    if not 0 < threshold < 0.5:
        raise InvalidArgument("threshold must lie in (0, 0.5)")

    def excess(L):
        return qber(model, L, mu).e_b - threshold

    if excess(0.0) > 0:
        return 0.0
    if excess(L_max) <= 0:
        return float("inf")
    return float(brentq(excess, 0.0, L_max, xtol=1e-10))


# ---------------------------------------------------------------- decoy states

class PoissonCoefficients(NamedTuple):
    a1: float
    a1_prime: float
    a_c: float
    a_c_prime: float
    c: float


def poisson_coefficients(mu: float, mu_prime: float) -> PoissonCoefficients:
    """Weights of the single-photon and multi-photon parts of the two sources.

    The multi-photon part of the decoy is bounded from below by a scaled copy
    of the signal's, ``a_c' = c mu'^2 e^{-mu'} / (mu^2 e^{-mu})``.
    """
    if not (0 < mu < mu_prime):
        raise InvalidArgument("need 0 < mu < mu_prime")
    if not mu_prime * np.exp(-mu_prime) > mu * np.exp(-mu):
        raise InvalidArgument("need mu' e^-mu' > mu e^-mu")
    a1 = mu * np.exp(-mu)
    a1p = mu_prime * np.exp(-mu_prime)
    c = 1.0 - np.exp(-mu) - mu * np.exp(-mu)
    acp = c * mu_prime ** 2 * np.exp(-mu_prime) / (mu ** 2 * np.exp(-mu))
    return PoissonCoefficients(float(a1), float(a1p), float(c), float(acp), float(c))


@dataclass(frozen=True)
class DecoyObservation:
    """Counting rates of the vacuum, signal (``mu``) and decoy (``mu_prime``) sources.

    ``n_pulses`` and ``n_vacuum`` are the numbers of pulses sent by each
    coherent source and by the vacuum source; they are needed only for
    finite-size bounds.
    """

    mu: float
    mu_prime: float
    S0: float
    S_mu: float
    S_mu_prime: float
    n_pulses: Optional[float] = None
    n_vacuum: Optional[float] = None
    E_mu: Optional[float] = None

    def __post_init__(self):
        for name in ("S0", "S_mu", "S_mu_prime"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise InvalidArgument(f"{name} must be a rate in [0, 1]")

    @classmethod
    def from_counts(cls, mu, mu_prime, sent, clicks, errors=None):
        """Build from per-source counts; ``sent`` and ``clicks`` map 0, mu, mu' to integers."""
        for key in (0, mu, mu_prime):
            if clicks[key] > sent[key]:
                raise InvalidArgument("clicks cannot exceed pulses sent")
            if sent[key] <= 0:
                raise InvalidArgument("every source must send pulses")
        e_mu = None if errors is None else errors[mu] / clicks[mu]
        n = min(sent[mu], sent[mu_prime])
        return cls(mu, mu_prime, clicks[0] / sent[0], clicks[mu] / sent[mu],
                   clicks[mu_prime] / sent[mu_prime], n, sent[0], e_mu)


def no_eve_rate(x: float, eta: float, p_dark: float = 0.0) -> float:
    """Counting rate ``1 - (1 - p_dark) e^{-eta x}`` of a lossy channel without eavesdropper."""
    return float(1.0 - (1.0 - p_dark) * np.exp(-eta * x))


def simulate_no_eve(mu: float, mu_prime: float, eta: float, p_dark: float = 0.0,
                    n_pulses: Optional[float] = None, n_vacuum: Optional[float] = None) -> DecoyObservation:
    """Exact expected counting rates on the test channel."""
    if n_pulses is not None and n_vacuum is None:
        n_vacuum = n_pulses
    return DecoyObservation(mu, mu_prime, p_dark, no_eve_rate(mu, eta, p_dark),
                            no_eve_rate(mu_prime, eta, p_dark), n_pulses, n_vacuum)


def true_tagged_fraction(mu: float, eta: float, p_dark: float = 0.0) -> float:
    """Actual multi-photon share of the clicks on the test channel."""
    s = no_eve_rate(mu, eta, p_dark)
    y0 = p_dark
    y1 = 1.0 - (1.0 - p_dark) * (1.0 - eta)
    return float((s - np.exp(-mu) * y0 - mu * np.exp(-mu) * y1) / s)


@dataclass(frozen=True)
class DecoyBounds:
    s1_lower: float
    sc_upper: float
    delta: float
    delta1: float
    delta_prime: float
    delta1_prime: float
    delta0: float
    iterations: int = 0


def _bounds_from_rates(obs: DecoyObservation, s1: float, sc: float, s1_p: float, sc_p: float,
                       iterations: int = 0) -> DecoyBounds:
    co = poisson_coefficients(obs.mu, obs.mu_prime)
    delta = co.c * sc / obs.S_mu
    delta1 = co.a1 * s1 / obs.S_mu
    delta_p = co.a_c_prime * sc_p / obs.S_mu_prime
    delta1_p = co.a1_prime * s1_p / obs.S_mu_prime
    delta0 = np.exp(-obs.mu) * obs.S0 / obs.S_mu
    return DecoyBounds(float(s1), float(sc), float(delta), float(delta1), float(delta_p),
                       float(delta1_p), float(delta0), iterations)


def decoy_bounds_asymptotic(obs: DecoyObservation) -> DecoyBounds:
    """Lower bound on ``s1`` and upper bound on the tagged fraction ``delta``.

    Solves ``a1 s1 + a_c s_c = S_mu - e^{-mu} S0`` together with
    ``a1' s1 + a_c' s_c = S_mu' - e^{-mu'} S0``.
    """
    co = poisson_coefficients(obs.mu, obs.mu_prime)
    if obs.S_mu <= 0 or obs.S_mu_prime <= 0:
        raise InvalidArgument("counting rates of the coherent sources must be positive")
    big_s = obs.S_mu - np.exp(-obs.mu) * obs.S0
    big_sp = obs.S_mu_prime - np.exp(-obs.mu_prime) * obs.S0
    det = co.a1 * co.a_c_prime - co.a1_prime * co.a_c
    if det <= 0:
        raise InvalidArgument("degenerate intensities")
    s1 = (co.a_c_prime * big_s - co.a_c * big_sp) / det
    sc = (co.a1 * big_sp - co.a1_prime * big_s) / det
    return _bounds_from_rates(obs, s1, sc, s1, sc)


def hwang_bound(obs: DecoyObservation) -> float:
    """Tagged-fraction bound ``mu^2 e^{-mu} S_mu' / (mu'^2 e^{-mu'} S_mu)``."""
    mu, mup = obs.mu, obs.mu_prime
    return float(mu ** 2 * np.exp(-mu) * obs.S_mu_prime / (mup ** 2 * np.exp(-mup) * obs.S_mu))


def _radius(rate: float, count: float, sigmas: float) -> float:
    if rate <= 0 or count is None or not np.isfinite(count):
        return 0.0
    return sigmas * np.sqrt(1.0 / (rate * count))


def decoy_bounds_finite(obs: DecoyObservation, n_pulses: Optional[float] = None,
                        n_vacuum: Optional[float] = None, sigmas: float = FLUCTUATION_SIGMAS,
                        damping: float = 0.5, tol: float = 1e-12,
                        max_iter: Optional[int] = None) -> DecoyBounds:
    """Worst-case bounds when the signal and decoy sources see different yields.

    The decoy's single- and multi-photon yields may differ from the signal's
    by relative amounts up to ``r = sigmas / sqrt(count)``, where ``count`` is
    the expected number of clicks from that photon-number class. The
    worst case raises the signal's ``s_c`` by ``(1 + r_c)`` and lowers the
    decoy's ``s_1`` and ``s_0`` by ``1/(1 + r)``. The coupled equations are
    solved by damped fixed-point iteration on ``s_c``.
    """
    n = n_pulses if n_pulses is not None else obs.n_pulses
    n0 = n_vacuum if n_vacuum is not None else (obs.n_vacuum if obs.n_vacuum is not None else n)
    if n is None:
        raise InvalidArgument("finite-size bounds need the number of pulses")
    if max_iter is None:
        max_iter = int(os.environ.get("GQIT_MAX_ITER", 10_000))
    mu, mup = obs.mu, obs.mu_prime
    co = poisson_coefficients(mu, mup)
    asym = decoy_bounds_asymptotic(obs)
    if not np.isfinite(n):
        return asym
    s0 = obs.S0
    r0 = _radius(s0, n0, sigmas)
    ratio = mu ** 2 * np.exp(-mu) / (co.c * mup ** 2 * np.exp(-mup))

    def s1_of(sc):
        return (obs.S_mu - np.exp(-mu) * s0 - co.c * sc) / co.a1

    sc = asym.sc_upper
    for it in range(1, max_iter + 1):
        s1 = s1_of(sc)
        if s1 <= 0:
            # too few pulses: nothing can be certified, every click may be tagged
            sc = (obs.S_mu - np.exp(-mu) * s0) / co.c
            return _bounds_from_rates(obs, 0.0, sc, 0.0, sc, it)
        r1 = _radius(co.a1 * s1, n, sigmas)
        rc = _radius(co.c * sc, n, sigmas)
        sc_prime = ratio * (obs.S_mu_prime - co.a1_prime * s1 / (1.0 + r1)
                            - np.exp(-mup) * s0 / (1.0 + r0))
        target = (1.0 + rc) * sc_prime
        new = (1.0 - damping) * sc + damping * target
        if abs(new - sc) <= tol * abs(new):
            sc = new
            s1 = s1_of(sc)
            r1 = _radius(co.a1 * s1, n, sigmas)
            rc = _radius(co.c * sc, n, sigmas)
            return _bounds_from_rates(obs, s1, sc, s1 / (1.0 + r1), sc / (1.0 + rc), it)
        sc = new
    raise NumericalFailure(f"finite-size bounds did not converge in {max_iter} iterations")


# ---------------------------------------------------------------- key rates

def binary_entropy(p) -> float:
    """Shannon entropy of a bit with bias ``p``, in bits."""
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -p * np.log2(p) - (1 - p) * np.log2(1 - p)
    h = np.where((p <= 0) | (p >= 1), 0.0, h)
    return h if h.ndim else float(h)


def gllp_key_rate(t_z: float, t_x: float, delta: float, clamp: bool = False) -> float:
    """``1 - H(t_z) - delta - (1 - delta) H(t_x / (1 - delta))`` per sifted bit."""
    if not (0 <= t_z < 1 and 0 <= t_x < 1 and 0 <= delta <= 1):
        raise InvalidArgument("arguments must lie in [0, 1)")
    if delta >= 1:
        rate = 1.0 - binary_entropy(t_z) - 1.0
    else:
        q = t_x / (1.0 - delta)
        if q >= 1:
            raise InvalidArgument("t_x / (1 - delta) must be below 1")
        rate = 1.0 - binary_entropy(t_z) - delta - (1.0 - delta) * binary_entropy(q)
    return max(rate, 0.0) if clamp else float(rate)


def bb84_threshold() -> float:
    """Error rate where ``gllp_key_rate(t, t, 0)`` crosses zero."""
    return float(brentq(lambda t: gllp_key_rate(t, t, 0.0), 0.01, 0.49, xtol=1e-14))


def decoy_key_rate(delta1: float, delta0: float, E_total: float, e1: float) -> float:
    """``delta1 + delta0 - H(E) - delta1 H(e1)`` per sifted bit."""
    for v in (delta1, delta0, E_total, e1):
        if not 0 <= v <= 1:
            raise InvalidArgument("fractions must lie in [0, 1]")
    return float(delta1 + delta0 - binary_entropy(E_total) - delta1 * binary_entropy(e1))


def single_photon_error(E_mu: float, S0: float, S_mu: float, delta1_mu: float, mu: float) -> float:
    """Upper bound ``(E - e^{-mu} S0 / (2 S_mu)) / delta1`` on the single-photon error rate.

    Vacuum clicks are assumed to be wrong half of the time.
    """
    if delta1_mu <= 0:
        raise InvalidArgument("delta1 must be positive")
    return float((E_mu - np.exp(-mu) * S0 / (2.0 * S_mu)) / delta1_mu)


def bs_attack_info(R: float, mu: float) -> float:
    """Eve's information ``1 - exp(-R mu)`` from tapping a fraction ``R`` of each pulse."""
    if not 0 <= R <= 1 or mu < 0:
        raise InvalidArgument("need R in [0, 1] and mu >= 0")
    return float(-np.expm1(-R * mu))


def cvqkd_interval_prob(delta_window: float, r: float) -> float:
    """Probability ``erf(delta / (2 sqrt(e^{-2r}/2)))`` that the shared value falls in the right bin."""
    if delta_window <= 0:
        raise InvalidArgument("window must be positive")
    nu = 0.5 * np.exp(-2.0 * r)
    return float(erf(delta_window / (2.0 * np.sqrt(nu))))


# ---------------------------------------------------------------- key-rate table

KEYRATE_COLUMNS = ("L_km", "S_mu", "e_B", "delta", "delta1", "key_rate",
                   "delta_finite", "delta_hwang", "rate_per_pulse")


def keyrate_row(mu: float, mu_prime: float, transmittance: float, model: DetectorModel,
                n_pulses: Optional[float] = None, L_km: float = float("nan")) -> dict:
    """Decoy-state BB84 figures for one overall transmittance.

    ``transmittance`` multiplies the detector efficiency. Error rate uses the
    detector model's visibility and dark counts; the key rate is the GLLP
    rate with the asymptotic tagged-fraction bound.
    """
    eta_tot = transmittance * model.eta
    obs = simulate_no_eve(mu, mu_prime, eta_tot, model.p_dark, n_pulses)
    # probability of a click from a coherent pulse reaching the detector
    S = -np.expm1(-mu * transmittance)
    e_b = qber_from_arrival(model, S).e_b_afterpulse
    asym = decoy_bounds_asymptotic(obs)
    delta = min(max(asym.delta, 0.0), 1.0)
    finite = float("nan")
    if n_pulses is not None:
        finite = decoy_bounds_finite(obs, n_pulses).delta
    e_b = min(e_b, 0.5)
    if delta >= 1 or e_b / (1.0 - delta) >= 0.5:
        rate = 0.0
    else:
        rate = gllp_key_rate(e_b, e_b, delta, clamp=True)
    return {
        "L_km": L_km,
        "S_mu": obs.S_mu,
        "e_B": e_b,
        "delta": asym.delta,
        "delta1": asym.delta1,
        "key_rate": rate,
        "delta_finite": finite,
        "delta_hwang": hwang_bound(obs),
        "rate_per_pulse": 0.5 * obs.S_mu * rate,
    }
