"""End-to-end experiments: norm traces, decay fits, inequality sweeps, reports.

Spatial L^2 quantities are computed on the frequency side as radial integrals
with the single normalization constant (2 pi)^{-N} applied uniformly; decay
exponents are normalization-invariant, so nothing downstream depends on the
convention.

All randomness flows through an explicit seed so that two runs of the same
configuration produce byte-identical outputs.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import quadrature
from .data_catalog import DataProfile, profile_terms
from .propagator import OdeConfig, PropagatorMode, carrier_frequency, \
    closed_form_defect, oracle_grid, propagate_closed
from .symbols import PI_SQ, SpectralState, dissipation_f, dissipation_f_effective, \
    energy_e, energy_e0, phi, source_r


class InsufficientData(Exception):
    """Fewer than the minimum number of samples inside the fit window."""


class NonPositiveValues(Exception):
    """A log-transformed fit needs strictly positive trace values."""


# ---------------------------------------------------------------------------
# small data carriers


@dataclass(frozen=True)
class TimeGrid:
    lo: float
    hi: float
    count: int
    spacing: str = "log"

    def __post_init__(self):
        if not (0 <= self.lo < self.hi):
            raise ValueError("need 0 <= t_lo < t_hi")
        if self.count < 2:
            raise ValueError("need at least two samples")
        if self.spacing not in ("log", "linear"):
            raise ValueError(f"unknown spacing {self.spacing!r}")
        if self.spacing == "log" and self.lo <= 0:
            raise ValueError("log spacing needs t_lo > 0")

    def times(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.lo, self.hi, self.count)
        return np.linspace(self.lo, self.hi, self.count)


@dataclass
class Trace:
    times: np.ndarray
    values: np.ndarray
    label: str

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.ndim != 1 or self.times.shape != self.values.shape:
            raise ValueError("times and values must be 1-d and equally long")
        if len(self.times) and np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("trace values must be finite")


@dataclass(frozen=True)
class DecayFit:
    model: str
    rate: float
    intercept: float
    max_residual: float
    window: tuple[float, float]
    trace_label: str = ""


@dataclass(frozen=True)
class Check:
    description: str
    passed: bool
    margin: float


@dataclass
class ExperimentReport:
    name: str
    parameters: dict
    traces: list = field(default_factory=list)
    fits: list = field(default_factory=list)
    checks: list = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)


# ---------------------------------------------------------------------------
# Plancherel accounting


def plancherel_constant(N: int) -> float:
    return (2.0 * math.pi) ** (-N)


def _trace_norm(N: int) -> float:
    return plancherel_constant(N) * quadrature.surface_area(N)


def carrier_peak_times(lo: float, hi: float, count: int, mode) -> np.ndarray:
    """Log-spaced times snapped to maxima of the r-independent carrier.

    The closed form factors as envelope(r, t) * sin(nu t) with nu fixed
    across frequencies, so the squared norm vanishes on a periodic time set;
    sampling at the carrier peaks (|sin(nu t)| = 1) measures the envelope,
    which is what a decay exponent describes.
    """
    nu = carrier_frequency(mode)
    period = math.pi / nu  # sin^2 period
    offset = 0.5 * period  # first maximum of |sin|
    raw = np.geomspace(max(lo, offset), hi, count)
    snapped = offset + period * np.round((raw - offset) / period)
    snapped = snapped[(snapped >= lo) & (snapped <= hi)]
    return np.unique(snapped)


def _radial_hat_pair(p0: DataProfile, p1: DataProfile):
    """Real radial reductions (h0, h1) valid for quadratic functionals.

    Both profiles radial: use the signed transforms.  Exactly one nonzero and
    non-radial: its modulus suffices because the closed-form coefficients are
    real, so only |hat|^2 enters.  Two nonzero non-radial data would need the
    joint phase and are rejected.
    """
    if (p0.is_zero or p0.is_radial) and (p1.is_zero or p1.is_radial):
        return p0.hat_radial, p1.hat_radial
    if p0.is_zero:
        return p0.hat_radial, p1.hat_abs_radial
    if p1.is_zero:
        return p0.hat_abs_radial, p1.hat_radial
    raise ValueError("need radial data (or a single non-radial datum with the other zero)")


def _envelope_cut(p0: DataProfile, p1: DataProfile) -> float:
    alphas = [alpha for amp, alpha in (p0.envelope, p1.envelope) if amp > 0]
    if not alphas:
        return 1.0
    return math.sqrt(60.0 / min(alphas))


def _spectral_quadratic(p0, p1, N, t, mode, wu=None, wv=None, rel_tol=1e-9) -> float:
    """(2 pi)^{-N} omega_N * int (wu(L)|u|^2 + wv(L)|v|^2) r^{N-1} dr."""
    if p0.is_zero and p1.is_zero:
        return 0.0
    h0, h1 = _radial_hat_pair(p0, p1)
    r_hi = _envelope_cut(p0, p1)

    def integrand(r):
        r = np.asarray(r, dtype=float)
        L = np.log1p(r * r)
        st = propagate_closed(h0(r), h1(r), r, t, mode)
        dens = np.zeros_like(r)
        if wu is not None:
            dens = dens + wu(L) * np.abs(st.u_hat) ** 2
        if wv is not None:
            dens = dens + wv(L) * np.abs(st.v_hat) ** 2
        return dens * np.power(r, N - 1)

    seeds = np.geomspace(r_hi * 1e-5, r_hi, 48)
    res = quadrature.integrate(integrand, 0.0, r_hi, tol=1e-300, rel_tol=rel_tol,
                               breakpoints=seeds)
    return _trace_norm(N) * res.value


def energy_value(p0, p1, N, t, mode, rel_tol=1e-9) -> float:
    """||v||^2 + ||L u||^2/4 + pi^2 ||u||^2/4 at time t (twice the energy)."""
    return _spectral_quadratic(
        p0, p1, N, t, mode,
        wu=lambda L: 0.25 * (L * L + PI_SQ), wv=lambda L: np.ones_like(L),
        rel_tol=rel_tol,
    )


def l2_value(p0, p1, N, t, mode, rel_tol=1e-9) -> float:
    return _spectral_quadratic(p0, p1, N, t, mode, wu=lambda L: np.ones_like(L),
                               rel_tol=rel_tol)


def dissipation_value(p0, p1, N, t, mode, rel_tol=1e-10) -> float:
    return _spectral_quadratic(p0, p1, N, t, mode, wv=lambda L: L, rel_tol=rel_tol)


def energy_trace(profile_u0, profile_u1, N, tgrid, mode=PropagatorMode.ODE,
                 rel_tol=1e-9) -> Trace:
    """Total-energy trace (twice the scalar energy), radially integrated."""
    times = tgrid.times() if isinstance(tgrid, TimeGrid) else np.asarray(tgrid, dtype=float)
    vals = [energy_value(profile_u0, profile_u1, N, float(t), mode, rel_tol)
            for t in times]
    return Trace(times, np.asarray(vals), "energy")


def l2_trace(profile_u0, profile_u1, N, tgrid, mode=PropagatorMode.ODE,
             rel_tol=1e-9) -> Trace:
    """Squared L^2 norm of the solution over the time grid."""
    times = tgrid.times() if isinstance(tgrid, TimeGrid) else np.asarray(tgrid, dtype=float)
    vals = [l2_value(profile_u0, profile_u1, N, float(t), mode, rel_tol)
            for t in times]
    return Trace(times, np.asarray(vals), "l2-squared")


def energy_identity_residual(profile_u0, profile_u1, N, t,
                             mode=PropagatorMode.ODE) -> float:
    """Relative defect of E(t) + int_0^t ||L^{1/2} v||^2 ds = E(0).

    Nested quadrature: the dissipation integrand oscillates with the carrier,
    so the outer panels are seeded at quarter periods.
    """
    if t <= 0:
        raise ValueError("requires t > 0")
    e_start = 0.5 * energy_value(profile_u0, profile_u1, N, 0.0, mode)
    if e_start == 0.0:
        return 0.0
    e_end = 0.5 * energy_value(profile_u0, profile_u1, N, float(t), mode)

    def diss(s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        return np.array([
            dissipation_value(profile_u0, profile_u1, N, float(x), mode) for x in s
        ])

    quarter = 0.25 * math.pi / carrier_frequency(mode)
    seeds = np.arange(quarter, t, quarter)
    dissipated = quadrature.integrate(diss, 0.0, float(t), tol=1e-300, rel_tol=3e-8,
                                      breakpoints=seeds).value
    return abs(e_end + dissipated - e_start) / e_start


# ---------------------------------------------------------------------------
# profile-error traces (quarter-frequency mode, zero displacement datum)


def _profile_error_value(profile, N, t, lo, hi, rel_tol=1e-9) -> float:
    P1 = profile.P1
    hat = profile.hat_radial
    amp, alpha = profile.envelope
    s4 = math.sin(math.pi * t / 4.0)

    def integrand(r):
        r = np.asarray(r, dtype=float)
        L = np.log1p(r * r)
        diff = s4 * hat(r) - P1 * np.sin(t * np.sqrt(L))
        return (16.0 / PI_SQ) * np.exp(-L * t) * diff * diff * np.power(r, N - 1)

    if hi is None:
        # cut where both the datum envelope and the mass term are certifiably
        # negligible; the mass term needs t > N/2 for its majorant
        if t <= N / 2.0 + 1.0:
            raise ValueError("unbounded region needs t > N/2 + 1")
        r_gauss = math.sqrt(60.0 / alpha) if amp > 0 else 2.0
        rough = quadrature.integrate(
            integrand, lo, max(lo + 1.0, 4.0), tol=1e-300, rel_tol=1e-3,
            breakpoints=quadrature.quarter_period_radii(t, lo, max(lo + 1.0, 4.0)),
        ).value
        scale = max(abs(rough), 1e-250)
        budget = rel_tol * scale / 10.0
        coef = (16.0 / PI_SQ) * max(P1 * P1, 1e-300) * _trace_norm(N)
        # (1+R^2)^{N/2-t} / (2(t-N/2)) * coef <= budget
        need = math.log(coef / (budget * 2.0 * (t - N / 2.0))) / (t - N / 2.0)
        r_maj = quadrature.log_radius(min(max(need, 0.1), 400.0))
        hi = max(r_gauss, r_maj, lo + 1.0, 2.0)

    X = math.log(1.0 / rel_tol) + 40.0
    r_osc_hi = min(hi, quadrature.log_radius(min(X / max(t, 1e-9), 400.0)))
    seeds = np.concatenate([
        quadrature.quarter_period_radii(t, lo, r_osc_hi),
        np.geomspace(max(lo, hi * 1e-6), hi, 40) if hi > lo else np.empty(0),
    ])
    res = quadrature.integrate(integrand, lo, hi, tol=1e-300, rel_tol=rel_tol,
                               breakpoints=seeds)
    return _trace_norm(N) * res.value


def profile_error_trace(profile_u1, N, tgrid, region="low", rel_tol=1e-9) -> Trace:
    """Squared distance between the solution and its wave-like leading term.

    Zero-displacement scenario in the quarter-frequency mode (the mode the
    three-term split is stated in).  Regions partition the frequency space at
    radius 1: "low" is [0, 1], "high" is [1, inf), "all" their union.
    """
    if not profile_u1.is_radial:
        raise ValueError("profile error traces need a radial datum")
    if region not in ("low", "high", "all"):
        raise ValueError(f"unknown region {region!r}")
    times = tgrid.times() if isinstance(tgrid, TimeGrid) else np.asarray(tgrid, dtype=float)
    lo, hi = {"low": (0.0, 1.0), "high": (1.0, None), "all": (0.0, None)}[region]
    vals = []
    for t in times:
        if t == 0.0:
            vals.append(0.0)
        else:
            vals.append(_profile_error_value(profile_u1, N, float(t), lo, hi, rel_tol))
    return Trace(times, np.asarray(vals), f"profile-error-{region}")


# ---------------------------------------------------------------------------
# comparison-integral (optimality) trace


def optimality_trace(N, tgrid, rel_tol=1e-10):
    """Raw and t^{N/2}-normalized traces of the sin^2 comparison integral,
    plus its two-sided window checks and the substitution-oracle agreement."""
    times = tgrid.times() if isinstance(tgrid, TimeGrid) else np.asarray(tgrid, dtype=float)
    raw = np.array([quadrature.optimality_integral(N, float(t), rel_tol) for t in times])
    oracle = np.array([quadrature.substitution_oracle(N, float(t), rel_tol) for t in times])
    norm = raw * times ** (N / 2.0)

    t_raw = Trace(times, raw, "comparison-integral")
    t_norm = Trace(times, norm, "comparison-integral-normalized")

    a_n = quadrature.a_const(N)
    f_end = quadrature.f_osc(N, float(times[-1]))
    lower_floor = quadrature.surface_area(N) * (a_n - f_end) * 0.95
    rel_gap = float(np.max(np.abs(raw - oracle) / np.abs(raw)))
    majorant = np.array([
        quadrature.surface_area(N)
        * (quadrature.integral_Ip(N - 1, float(t)) + quadrature.integral_Jp(N - 1, float(t)))
        for t in times
    ])

    ratio = float(norm.max() / norm.min()) if norm.min() > 0 else math.inf
    checks = [
        Check("two-sided-window: normalized comparison integral positive",
              bool(norm.min() > 0), float(norm.min())),
        Check("two-sided-window: normalized max/min <= 3",
              bool(ratio <= 3.0), 3.0 - ratio),
        Check("lower-bound-constant: normalized min >= 0.95 * omega_N (A_N - F_N(t_hi))",
              bool(norm.min() >= lower_floor), float(norm.min() - lower_floor)),
        Check("substitution-oracle agreement <= 1e-8 relative",
              bool(rel_gap <= 1e-8), 1e-8 - rel_gap),
        Check("sin^2 <= 1 majorant: raw <= omega_N (I_{N-1} + J_{N-1})",
              bool(np.all(raw <= majorant)), float(np.min(majorant - raw))),
    ]
    return t_raw, t_norm, checks


# ---------------------------------------------------------------------------
# rate fitting


def fit_rate(trace: Trace, model: str = "power", window=None) -> DecayFit:
    """Least-squares decay rate in transformed coordinates.

    power: slope of log(value) against log(t); exponential: against t.
    """
    if model not in ("power", "exponential"):
        raise ValueError(f"unknown model {model!r}")
    t_lo, t_hi = window if window is not None else (trace.times[0], trace.times[-1])
    if t_lo > t_hi:
        raise ValueError("inverted window")
    mask = (trace.times >= t_lo) & (trace.times <= t_hi)
    ts, vs = trace.times[mask], trace.values[mask]
    if len(ts) < 8:
        raise InsufficientData(f"{len(ts)} samples in window, need >= 8")
    if np.any(vs <= 0):
        raise NonPositiveValues(f"{model} fit needs positive values")
    x = np.log(ts) if model == "power" else ts
    y = np.log(vs)
    coeffs = np.polyfit(x, y, 1)
    resid = y - np.polyval(coeffs, x)
    return DecayFit(
        model=model, rate=float(coeffs[0]), intercept=float(coeffs[1]),
        max_residual=float(np.max(np.abs(resid))), window=(float(t_lo), float(t_hi)),
        trace_label=trace.label,
    )


# ---------------------------------------------------------------------------
# frequency-side inequality sweeps


def _random_states(rng, n):
    return (rng.standard_normal(n) + 1j * rng.standard_normal(n),
            rng.standard_normal(n) + 1j * rng.standard_normal(n))


def inequality_sweep(N=3, mode=PropagatorMode.ODE, seed=0, n_radii=200, n_times=100,
                     n_states=10, n_algebraic=10_000) -> list:
    """The three pointwise inequality families, plus the algebraic step that
    certifies the decay-rate envelope.

    Returns a list of Check with worst margins; all quantities are evaluated
    along exact solutions on a deterministic (radius, time, state) grid.
    """
    if PropagatorMode(mode) is not PropagatorMode.ODE:
        raise ValueError("the sweep is defined for the equation-consistent mode")
    rng = np.random.default_rng(seed)
    tol_eq = 1e-12
    checks = []

    # (a) algebraic equivalence on random states (solutions not required)
    u, v = _random_states(rng, n_algebraic)
    r = rng.uniform(0.0, 50.0, n_algebraic)
    st = SpectralState(u, v)
    e0 = energy_e0(st, r)
    e = energy_e(st, r)
    lower = float(np.min(e - 0.5 * e0))
    upper = float(np.min(2.25 * e0 - e))
    margin = min(lower, upper)
    checks.append(Check(
        f"energy-equivalence: E0/2 <= E <= 9E0/4 on {n_algebraic} random states",
        margin >= -tol_eq, margin))

    # (b) the algebraic decay step: R - F + phi E <= 0 for any state
    lyap = float(np.max(source_r(st, r) - dissipation_f(st, r) + phi(r) * e))
    checks.append(Check(
        "decay-step (algebraic): R - F + phi*E <= 0 on random states",
        lyap <= tol_eq, -lyap))

    # (c) pointwise families along solutions on a deterministic grid
    radii = np.linspace(0.0, 10.0, n_radii).reshape(1, -1, 1)
    times = np.linspace(0.0, 20.0, n_times).reshape(1, 1, -1)
    su, sv = _random_states(rng, n_states)
    u0 = su.reshape(-1, 1, 1)
    u1 = sv.reshape(-1, 1, 1)
    st_t = propagate_closed(u0, u1, radii, times, mode)
    e0_t = energy_e0(st_t, radii)
    e0_0 = energy_e0(SpectralState(u0, u1), radii)
    ph = phi(radii)

    decay_margin = float(np.min(4.5 * e0_0 * np.exp(-ph * times) + 1e-12 - e0_t))
    checks.append(Check(
        "pointwise-decay: 2E0(t) <= 9 E0(0) e^{-phi t} + tol along solutions",
        decay_margin >= 0.0, decay_margin))

    L = np.log1p(radii * radii)
    amp_bound = 18.0 * (np.abs(u1) ** 2 / (L * L + PI_SQ) + 0.25 * np.abs(u0) ** 2)
    amp_margin = float(np.min(amp_bound * np.exp(-ph * times) + 1e-12
                              - np.abs(st_t.u_hat) ** 2))
    checks.append(Check(
        "pointwise-amplitude: |u|^2 <= 18(|u1|^2/(L^2+pi^2) + |u0|^2/4) e^{-phi t} + tol",
        amp_margin >= 0.0, amp_margin))

    mono_margin = float(np.min(e0_t[..., :-1] - e0_t[..., 1:]))
    checks.append(Check(
        "pointwise-energy monotone non-increasing in t",
        mono_margin >= -tol_eq, mono_margin))
    return checks


def differential_inequality_sweep(N=3, mode=PropagatorMode.ODE, seed=0,
                                  n_radii=200, n_times=100, n_states=10) -> Check:
    """Worst value of dE/dt + phi E along exact solutions.

    The derivative is evaluated through the exact budget
    dE/dt = R - F_eff (validated elsewhere against finite differences).
    The measured worst value is positive at low frequency: the cross-term
    weight is too large for the differential form of the decay inequality,
    even though the integrated envelope holds.
    """
    if PropagatorMode(mode) is not PropagatorMode.ODE:
        raise ValueError("the sweep is defined for the equation-consistent mode")
    rng = np.random.default_rng(seed)
    radii = np.linspace(0.0, 10.0, n_radii).reshape(1, -1, 1)
    times = np.linspace(0.0, 20.0, n_times).reshape(1, 1, -1)
    su, sv = _random_states(rng, n_states)
    st_t = propagate_closed(su.reshape(-1, 1, 1), sv.reshape(-1, 1, 1),
                            radii, times, mode)
    de_dt = source_r(st_t, radii) - dissipation_f_effective(st_t, radii)
    worst = float(np.max(de_dt + phi(radii) * energy_e(st_t, radii)))
    return Check("differential-decay: dE/dt + phi*E <= 1e-10 along solutions",
                 worst <= 1e-10, 1e-10 - worst)


# ---------------------------------------------------------------------------
# experiment runners (shared by the CLI and the acceptance suite)


def run_simulate(p0, p1, N, mode, tgrid, seed=0, rel_tol=1e-9) -> ExperimentReport:
    rep = ExperimentReport(
        name="simulate",
        parameters={"N": N, "mode": str(PropagatorMode(mode).value), "seed": seed,
                    "u0": p0.label, "u1": p1.label},
    )
    rep.traces.append(energy_trace(p0, p1, N, tgrid, mode, rel_tol))
    rep.traces.append(l2_trace(p0, p1, N, tgrid, mode, rel_tol))

    rng = np.random.default_rng(seed)
    radii = np.linspace(0.0, 10.0, 21)
    t_out = np.array([0.5, 2.0, 5.0, 10.0, 20.0])
    u0s, u1s = _random_states(rng, 5)
    worst = 0.0
    for k in range(5):
        ou, ov = oracle_grid(u0s[k], u1s[k], radii, t_out, OdeConfig(tol=1e-11))
        for i, t in enumerate(t_out):
            st = propagate_closed(u0s[k], u1s[k], radii, float(t), PropagatorMode.ODE)
            scale = np.maximum(np.maximum(np.abs(st.u_hat), np.abs(st.v_hat)), 1e-300)
            gap = np.maximum(np.abs(ou[i] - st.u_hat), np.abs(ov[i] - st.v_hat)) / scale
            worst = max(worst, float(np.max(gap)))
    rep.checks.append(Check("closed-form vs numerical oracle <= 1e-8 relative",
                            worst <= 1e-8, 1e-8 - worst))

    for t in (1.0, 5.0, 10.0):
        resid = energy_identity_residual(p0, p1, N, t, mode)
        rep.checks.append(Check(f"energy-identity residual at t={t:g} <= 1e-6",
                                resid <= 1e-6, 1e-6 - resid))

    ev = rep.traces[0].values
    mono = float(np.min(ev[:-1] - ev[1:])) if len(ev) > 1 else 0.0
    rep.checks.append(Check("energy trace non-increasing", mono >= -1e-12 * ev[0], mono))

    rr = np.linspace(0.0, 6.0, 25)
    tt = np.linspace(0.0, 12.0, 25).reshape(-1, 1)
    defect = closed_form_defect(1.0 + 0.3j, -0.7 + 1j, rr, tt, mode)
    if PropagatorMode(mode) is PropagatorMode.ODE:
        dmax = float(np.max(np.abs(defect)))
        rep.checks.append(Check("closed-form defect < 1e-10", dmax < 1e-10, 1e-10 - dmax))
    else:
        st = propagate_closed(1.0 + 0.3j, -0.7 + 1j, rr, tt, mode)
        gap = float(np.max(np.abs(defect - (3.0 * PI_SQ / 16.0) * np.asarray(st.u_hat))))
        rep.checks.append(Check(
            "quarter-frequency defect equals (3 pi^2/16) u exactly",
            gap < 1e-10, 1e-10 - gap))
    return rep


def run_decay(p0, p1, N, mode, tgrid, seed=0, rel_tol=1e-9) -> ExperimentReport:
    rep = ExperimentReport(
        name="decay",
        parameters={"N": N, "mode": str(PropagatorMode(mode).value), "seed": seed,
                    "u0": p0.label, "u1": p1.label},
    )
    e_tr = energy_trace(p0, p1, N, tgrid, mode, rel_tol)
    rep.traces.append(e_tr)
    e_fit = fit_rate(e_tr, "power")
    rep.fits.append(e_fit)

    has_mass = abs(p1.P1) > 0 or abs(p0.P1) > 0
    if has_mass:
        gap = abs(e_fit.rate + N / 2.0)
        rep.checks.append(Check(
            f"total-energy decay exponent = -{N / 2:.2f} +- 0.10",
            gap <= 0.10, 0.10 - gap))
    else:
        rep.checks.append(Check(
            f"total-energy decay exponent <= -{N / 2:.2f} + 0.10",
            e_fit.rate <= -N / 2.0 + 0.10, -N / 2.0 + 0.10 - e_fit.rate))

    peak_times = carrier_peak_times(tgrid.lo, tgrid.hi, tgrid.count, mode)
    l_tr = l2_trace(p0, p1, N, peak_times, mode, rel_tol)
    rep.traces.append(l_tr)
    l_fit = fit_rate(l_tr, "power")
    rep.fits.append(l_fit)
    rep.parameters["l2_squared_rate"] = l_fit.rate
    rep.parameters["l2_norm_rate"] = 0.5 * l_fit.rate  # reported, not asserted

    if has_mass:
        gap = abs(l_fit.rate + N / 2.0)
        rep.checks.append(Check(
            f"squared-norm decay exponent = -{N / 2:.2f} +- 0.10 (mass-carrying datum)",
            gap <= 0.10, 0.10 - gap))
    else:
        floor = -(N + 2.0) / 2.0 + 0.10
        rep.checks.append(Check(
            f"squared-norm decay exponent <= {floor:.2f} (zero-mass datum)",
            l_fit.rate <= floor, floor - l_fit.rate))
    return rep


def run_profile(p1, N, tgrid, seed=0, rel_tol=1e-9) -> ExperimentReport:
    """Leading-term error experiment, quarter-frequency mode, u0 = 0."""
    mode = PropagatorMode.PAPER
    rep = ExperimentReport(
        name="profile",
        parameters={"N": N, "mode": mode.value, "seed": seed, "u1": p1.label},
    )
    # a zero-mass datum leaves only the carrier-locked term, which vanishes on
    # a periodic time set; sample its envelope at carrier peaks
    if abs(p1.P1) > 0:
        low_times = tgrid.times() if isinstance(tgrid, TimeGrid) else np.asarray(tgrid)
    else:
        low_times = carrier_peak_times(tgrid.lo, tgrid.hi, tgrid.count, mode)
    low = profile_error_trace(p1, N, low_times, "low", rel_tol)
    rep.traces.append(low)
    low_fit = fit_rate(low, "power")
    rep.fits.append(low_fit)

    if abs(p1.P1) > 0:
        inside = -0.6 <= low_fit.rate <= -0.4
        margin = min(low_fit.rate + 0.6, -0.4 - low_fit.rate)
        rep.checks.append(Check(
            "low-band error exponent within [-0.6, -0.4]", inside, margin))
    else:
        floor = -(N + 2.0) / 2.0 + 0.10
        rep.checks.append(Check(
            f"low-band error exponent <= {floor:.2f} (zero-mass datum)",
            low_fit.rate <= floor, floor - low_fit.rate))

    # calibrate the stated two-power bound on the first half of the window,
    # then require domination on the second half
    mid = math.sqrt(low.times[0] * low.times[-1])
    first = low.times <= mid
    shape = (p1.l11 ** 2 * low.times ** (-(N + 2.0) / 2.0)
             + p1.P1 ** 2 * low.times ** (-(N - 2.0) / 2.0))
    if np.any(shape[first] > 0):
        c_cal = float(np.max(low.values[first] / shape[first]))
        dom = c_cal * shape[~first] - low.values[~first]
        dom_margin = float(np.min(dom / np.maximum(low.values[~first], 1e-300)))
        rep.parameters["bound_calibration"] = c_cal
        rep.checks.append(Check(
            "calibrated two-power bound dominates the low-band error",
            dom_margin >= 0.0, dom_margin))

    # the high band underflows double precision past t ~ 1000 (values ~ 2^{-t}),
    # so its fit window sits at moderate times
    t_high_lo = max(5.0, N / 2.0 + 1.5)
    if abs(p1.P1) > 0:
        high_times = np.linspace(t_high_lo, 60.0, 23)
    else:
        high_times = np.arange(math.ceil((t_high_lo - 2.0) / 4.0) * 4.0 + 2.0, 60.0, 4.0)
    high = profile_error_trace(p1, N, high_times, "high", rel_tol)
    rep.traces.append(high)
    high_fit = fit_rate(high, "exponential")
    rep.fits.append(high_fit)
    slope_cap = -min(8.0 / 9.0, (2.0 / 3.0) * math.log(2.0)) + 0.05
    rep.checks.append(Check(
        f"high-band log-linear slope <= {slope_cap:.4f}",
        high_fit.rate <= slope_cap, slope_cap - high_fit.rate))

    # exact three-term split of the solution
    worst = 0.0
    for r in np.linspace(0.0, 3.0, 16):
        for t in (0.5, 1.0, 7.3, 20.0):
            terms = profile_terms(p1, float(r), float(t))
            u_hat = propagate_closed(0.0, complex(p1.hat_radial(float(r))),
                                     float(r), float(t), mode).u_hat
            worst = max(worst, abs(u_hat - (terms.f1 + terms.f2 + terms.f3)))
    rep.checks.append(Check("exact split u = F1 + F2 + F3 to 1e-12",
                            worst <= 1e-12, 1e-12 - worst))

    # the frequency regions partition at radius 1 (times off the carrier zeros)
    t_shared = np.array([6.0, 14.0, 26.0, 46.0])
    v_low = profile_error_trace(p1, N, t_shared, "low").values
    v_high = profile_error_trace(p1, N, t_shared, "high").values
    v_all = profile_error_trace(p1, N, t_shared, "all").values
    add_gap = float(np.max(np.abs(v_all - (v_low + v_high)) / np.maximum(v_all, 1e-300)))
    rep.checks.append(Check("region additivity: all = low + high within 1e-6 relative",
                            add_gap <= 1e-6, 1e-6 - add_gap))
    return rep


def run_optimality(N, tgrid, seed=0) -> ExperimentReport:
    rep = ExperimentReport(name="optimality", parameters={"N": N, "seed": seed})
    t_raw, t_norm, checks = optimality_trace(N, tgrid)
    rep.traces += [t_raw, t_norm]
    rep.checks += checks
    raw_fit = fit_rate(t_raw, "power")
    rep.fits.append(raw_fit)
    gap = abs(raw_fit.rate + N / 2.0)
    rep.checks.append(Check(
        f"comparison-integral exponent = -{N / 2:.2f} +- 0.05", gap <= 0.05, 0.05 - gap))

    a_n = quadrature.a_const(N)
    gamma_val = 0.5 * math.exp(math.lgamma(N / 2.0))
    a_gap = abs(a_n - gamma_val)
    rep.checks.append(Check("A_N by quadrature matches Gamma(N/2)/2 to 1e-10",
                            a_gap <= 1e-10, 1e-10 - a_gap))
    f_end = quadrature.f_osc(N, float(t_raw.times[-1]))
    f_gap = abs(f_end - 0.5 * a_n)
    rep.parameters["f_osc_at_t_hi"] = f_end
    rep.checks.append(Check("|F_N(t_hi) - A_N/2| < 5e-3", f_gap < 5e-3, 5e-3 - f_gap))
    return rep


def run_lemmas(N=3, mode=PropagatorMode.ODE, seed=0) -> ExperimentReport:
    rep = ExperimentReport(
        name="lemmas",
        parameters={"N": N, "mode": str(PropagatorMode(mode).value), "seed": seed},
    )
    rep.checks += inequality_sweep(N=N, mode=mode, seed=seed)

    worst = 0.0
    for t in (2.0, 5.0, 11.0, 101.0):
        exact_i = (1.0 - 2.0 ** (1.0 - t)) / (2.0 * (t - 1.0))
        exact_j = 2.0 ** (-t) / (t - 1.0)
        worst = max(worst, abs(quadrature.integral_Ip(1.0, t) - exact_i) / exact_i,
                    abs(quadrature.integral_Jp(1.0, t) - exact_j) / exact_j)
    rep.checks.append(Check("I_1/J_1 match closed forms to 1e-12 relative",
                            worst <= 1e-12, 1e-12 - worst))

    ts_i = np.geomspace(50.0, 5000.0, 12)
    w_i = np.array([quadrature.integral_Ip(0.0, float(t)) * math.sqrt(t) for t in ts_i])
    rep.traces.append(Trace(ts_i, w_i, "I0-normalized"))
    ratio_i = float(w_i.max() / w_i.min()) if w_i.min() > 0 else math.inf
    rep.checks.append(Check("I_0(t) sqrt(t) window: positive, max/min <= 3",
                            w_i.min() > 0 and ratio_i <= 3.0, 3.0 - ratio_i))

    ts_j = np.linspace(50.0, 200.0, 7)
    w_j = np.array([quadrature.integral_Jp(2.0, float(t)) * (t - 1.0) * 2.0 ** t
                    for t in ts_j])
    rep.traces.append(Trace(ts_j, w_j, "J2-normalized"))
    ratio_j = float(w_j.max() / w_j.min()) if w_j.min() > 0 else math.inf
    rep.checks.append(Check("J_2(t)(t-1)2^t window: positive, max/min <= 3",
                            w_j.min() > 0 and ratio_j <= 3.0, 3.0 - ratio_j))

    ivals = [quadrature.integral_Ip(2.0, t) for t in (2.0, 4.0, 8.0, 16.0)]
    mono = float(np.min(np.diff(ivals) * -1.0))
    rep.checks.append(Check("I_p strictly decreasing in t", mono > 0, mono))

    # additivity against a single pass over (0, inf)
    p_add, t_add = 2.0, 5.0

    def f(r):
        return np.exp(-t_add * np.log1p(r * r)) * np.power(r, p_add)

    split = quadrature.integral_Ip(p_add, t_add) + quadrature.integral_Jp(p_add, t_add)
    single = quadrature.integrate(f, 0.0, 300.0, tol=1e-300, rel_tol=1e-12,
                                  breakpoints=np.geomspace(1e-3, 300.0, 64)).value
    add_gap = abs(split - single) / single
    rep.checks.append(Check("I_p + J_p equals the single-pass integral (1e-10 rel)",
                            add_gap <= 1e-10, 1e-10 - add_gap))
    return rep


def run_all(p0, p1, N, mode, tgrid, seed=0, rel_tol=1e-9) -> list[ExperimentReport]:
    return [
        run_simulate(p0, p1, N, mode, tgrid, seed, rel_tol),
        run_decay(p0, p1, N, mode, tgrid, seed, rel_tol),
        run_profile(p1, N, tgrid, seed, rel_tol),
        run_optimality(N, tgrid, seed),
        run_lemmas(N, mode, seed),
    ]


# ---------------------------------------------------------------------------
# report serialization


def _slug(label: str) -> str:
    out = re.sub(r"[^a-z0-9]+", "-", label.lower()).strip("-")
    return out or "trace"


def report_as_dict(report: ExperimentReport) -> dict:
    params = {k: (float(v) if isinstance(v, (np.floating, np.integer)) else v)
              for k, v in report.parameters.items()}
    return {
        "name": report.name,
        "parameters": params,
        "all_passed": bool(report.all_passed),
        "traces": [{"label": tr.label, "csv": f"{_slug(tr.label)}.csv",
                    "points": int(len(tr.times))} for tr in report.traces],
        "fits": [{"trace": f.trace_label, "model": f.model, "rate": f.rate,
                  "intercept": f.intercept, "max_residual": f.max_residual,
                  "window": list(f.window)} for f in report.fits],
        "checks": [{"description": c.description, "passed": bool(c.passed),
                    "margin": float(c.margin)} for c in report.checks],
    }


def write_report(report: ExperimentReport, out_dir) -> Path:
    """Write report.json plus one CSV per trace under out_dir/<name>/."""
    base = Path(out_dir) / report.name
    base.mkdir(parents=True, exist_ok=True)
    for tr in report.traces:
        lines = ["t,value"]
        lines += [f"{float(t)!r},{float(v)!r}" for t, v in zip(tr.times, tr.values)]
        (base / f"{_slug(tr.label)}.csv").write_text("\n".join(lines) + "\n",
                                                     encoding="utf-8")
    payload = json.dumps(report_as_dict(report), indent=2, sort_keys=True)
    (base / "report.json").write_text(payload + "\n", encoding="utf-8")
    return base
