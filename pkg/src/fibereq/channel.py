"""Dual-polarization nonlinear fiber propagation and EDFA amplification.

The fiber is integrated with the symmetric (Strang) split-step Fourier
method applied to the Manakov pair: half linear step, full Kerr step, half
linear step. The linear operator applies group-velocity dispersion and
loss in the frequency domain over the whole (periodic) frame; the Kerr
step rotates both polarizations by the common phase
``(8/9) * gamma * (|Ax|^2 + |Ay|^2) * h``.

Sign convention (shared with the receiver's dispersion compensation and the
back-propagation equalizer): propagating a distance L multiplies the
spectrum by ``exp(+1j * (beta2/2) * omega**2 * L)`` with ``omega`` the
baseband angular frequency and ``beta2 = -D * lambda**2 / (2*pi*c)``.

Backward propagation negates loss, dispersion and nonlinearity, which makes
it the exact algebraic inverse of a forward pass with the same step size.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c as _C_LIGHT
from scipy.constants import h as _H_PLANCK

from .dsp import DualPolWaveform, dbm_to_watt

__all__ = [
    "FiberParams",
    "LinkConfig",
    "beta2_from_dispersion",
    "ssfm_propagate_span",
    "edfa_amplify",
    "propagate_link",
]

MANAKOV_KERR_FACTOR = 8.0 / 9.0


@dataclass(frozen=True)
class FiberParams:
    """Per-span fiber description (engineering units)."""

    alpha_db_per_km: float = 0.23
    dispersion_ps_nm_km: float = 2.8
    gamma_per_w_km: float = 2.5
    length_km: float = 50.0
    reference_lambda_nm: float = 1550.0

    def __post_init__(self):
        if not self.length_km > 0:
            raise ValueError("length_km must be positive")
        if self.alpha_db_per_km < 0:
            raise ValueError("alpha must be non-negative")

    @property
    def alpha_per_km(self) -> float:
        """Power attenuation coefficient in 1/km."""
        return self.alpha_db_per_km * np.log(10.0) / 10.0

    @property
    def beta2_s2_per_km(self) -> float:
        return beta2_from_dispersion(self.dispersion_ps_nm_km, self.reference_lambda_nm)

    @property
    def span_loss_db(self) -> float:
        return self.alpha_db_per_km * self.length_km


@dataclass
class LinkConfig:
    """A chain of identical or per-span fibers with lumped amplification."""

    spans: list = field(default_factory=lambda: [FiberParams()] * 9)
    amp_noise_figure_db: float | None = 4.5
    ssfm_step_km: float = 1.0
    launch_power_dbm: float = 2.0
    carrier_freq_thz: float = 193.41

    def __post_init__(self):
        if len(self.spans) < 1:
            raise ValueError("need at least one span")
        lam_carrier_nm = 1e9 * _C_LIGHT / (self.carrier_freq_thz * 1e12)
        for sp in self.spans:
            if abs(sp.reference_lambda_nm - lam_carrier_nm) / lam_carrier_nm > 1e-3:
                raise ValueError(
                    "span reference wavelength inconsistent with carrier frequency"
                )

    @property
    def n_spans(self) -> int:
        return len(self.spans)

    @property
    def carrier_freq_hz(self) -> float:
        return self.carrier_freq_thz * 1e12

    @property
    def launch_power_watt(self) -> float:
        return dbm_to_watt(self.launch_power_dbm)

    @property
    def total_length_km(self) -> float:
        return sum(sp.length_km for sp in self.spans)


def beta2_from_dispersion(dispersion_ps_nm_km: float, lambda_nm: float) -> float:
    """Group-velocity dispersion beta2 in s^2/km from D in ps/(nm km)."""
    d_si = dispersion_ps_nm_km * 1e-6  # s/m^2
    lam = lambda_nm * 1e-9
    beta2_si = -d_si * lam**2 / (2.0 * np.pi * _C_LIGHT)  # s^2/m
    return beta2_si * 1e3


def _step_plan(length_km: float, step_km: float) -> np.ndarray:
    """Uniform steps plus one final fractional step when needed."""
    if step_km > length_km + 1e-12:
        raise ValueError("step larger than span")
    n_full = int(np.floor(length_km / step_km + 1e-9))
    steps = [step_km] * n_full
    rest = length_km - n_full * step_km
    if rest > 1e-9 * length_km:
        steps.append(rest)
    return np.asarray(steps)


def dispersion_phase(omega: np.ndarray, beta2_s2_per_km: float, length_km: float) -> np.ndarray:
    """Phase of the dispersion transfer function for the package convention."""
    return 0.5 * beta2_s2_per_km * length_km * omega**2


def ssfm_propagate_span(
    wave: DualPolWaveform,
    fiber: FiberParams,
    step_km: float,
    direction: str = "forward",
) -> DualPolWaveform:
    """Propagate one span with the symmetric split-step Fourier method.

    ``direction="backward"`` negates loss, dispersion and nonlinearity,
    yielding the exact inverse of the corresponding forward call.
    """
    if direction not in ("forward", "backward"):
        raise ValueError("direction must be 'forward' or 'backward'")
    sign = 1.0 if direction == "forward" else -1.0

    steps = _step_plan(fiber.length_km, step_km)
    if direction == "backward":
        steps = steps[::-1]  # traverse the span end-to-start
    omega = 2.0 * np.pi * np.fft.fftfreq(len(wave), 1.0 / wave.sample_rate)
    beta2 = sign * fiber.beta2_s2_per_km
    alpha = sign * fiber.alpha_per_km
    gamma = sign * fiber.gamma_per_w_km

    # Merge adjacent half steps of the Strang product L(h/2) N L(h/2) into
    # single linear segments between nonlinear stages (same operator, half
    # the FFTs). Segment lengths: h0/2, (h0+h1)/2, ..., h_last/2.
    seg_lengths = np.empty(steps.size + 1)
    seg_lengths[0] = 0.5 * steps[0]
    seg_lengths[1:-1] = 0.5 * (steps[:-1] + steps[1:])
    seg_lengths[-1] = 0.5 * steps[-1]
    factors: dict[float, np.ndarray] = {}
    for seg in seg_lengths:
        if seg not in factors:
            factors[seg] = np.exp(
                1j * dispersion_phase(omega, beta2, seg) - alpha * seg / 2.0
            )

    def linear(a, seg):
        return np.fft.ifft(np.fft.fft(a) * factors[seg])

    ax = linear(wave.x_pol, seg_lengths[0])
    ay = linear(wave.y_pol, seg_lengths[0])
    for h, seg_after in zip(steps, seg_lengths[1:]):
        phi = MANAKOV_KERR_FACTOR * gamma * (np.abs(ax) ** 2 + np.abs(ay) ** 2) * h
        rot = np.exp(1j * phi)
        ax = linear(ax * rot, seg_after)
        ay = linear(ay * rot, seg_after)
    return DualPolWaveform(ax, ay, wave.sample_rate)


def edfa_amplify(
    wave: DualPolWaveform,
    gain_db: float,
    nf_db: float | None,
    carrier_freq_hz: float,
    rng: np.random.Generator | int | None = None,
) -> DualPolWaveform:
    """Flat-gain amplifier with circular complex Gaussian ASE noise.

    The per-polarization noise PSD is ``(G - 1) * h * f_c * n_sp`` with
    ``n_sp = 10**(NF/10) / 2``; the total added power per polarization is
    that PSD times the simulation sample rate. ``nf_db=None`` disables noise.
    """
    if gain_db < 0:
        raise ValueError("gain_db must be >= 0")
    g_amp = 10.0 ** (gain_db / 20.0)
    ax = wave.x_pol * g_amp
    ay = wave.y_pol * g_amp
    if nf_db is not None and np.isfinite(nf_db):
        n_sp = 10.0 ** (nf_db / 10.0) / 2.0
        g_pow = 10.0 ** (gain_db / 10.0)
        psd = (g_pow - 1.0) * _H_PLANCK * carrier_freq_hz * n_sp
        sigma2 = psd * wave.sample_rate  # noise power per polarization
        if not isinstance(rng, np.random.Generator):
            rng = np.random.Generator(np.random.MT19937(rng))
        std = np.sqrt(sigma2 / 2.0)
        n = len(wave)
        ax = ax + std * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
        ay = ay + std * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return DualPolWaveform(ax, ay, wave.sample_rate)


def propagate_link(
    wave: DualPolWaveform, link: LinkConfig, seed: int | None = 0
) -> DualPolWaveform:
    """Spans of split-step propagation, each followed by a loss-compensating EDFA.

    Deterministic given ``seed``; one independent noise stream per span.
    """
    if seed is None:
        rngs = [None] * link.n_spans
        nf = None
    else:
        children = np.random.SeedSequence(seed).spawn(link.n_spans)
        rngs = [np.random.Generator(np.random.MT19937(s)) for s in children]
        nf = link.amp_noise_figure_db
    out = wave
    for span, rng in zip(link.spans, rngs):
        out = ssfm_propagate_span(out, span, link.ssfm_step_km, "forward")
        out = edfa_amplify(out, span.span_loss_db, nf, link.carrier_freq_hz, rng)
    return out
