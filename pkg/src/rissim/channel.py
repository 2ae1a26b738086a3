"""Cascaded channel synthesis, tone reception, ADC quantization, and dBFS.

Phase conventions: the forward channel h toward the surface carries
exp(-j 2 pi d / lambda) per element; the return channel g is stored with the
opposite sign so that the conjugating cascade g^H diag(theta) h accumulates
the physical round-trip phase. The direct term h_los is a plain scalar.

Every random draw comes from a generator keyed on explicit integers (seed,
terminal positions, measurement index), so identical inputs reproduce
identical bits and parallel evaluation order cannot change results.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import Scene, antenna_gain, gains_toward, los_blocked
from .ris import DEFAULT_ELEMENT_AMPLITUDE, RisConfig, RisLayout, theta_diag

ADC_CODE_MAX = 2048
ADC_CODE_MIN = -2047

# Receiver defaults calibrated on the default bench (all elements off,
# deterministic channel, median over the grid angles at 170 cm): the all-off
# tone lands near 20 dBFS and the per-sample SNR near 30 dB.
# scripts/calibrate_defaults.py recomputes both.
DEFAULT_FULL_SCALE = 800.7328811701997
DEFAULT_NOISE_VARIANCE = 0.01528675906627486


def _entropy_words(parts) -> list[int]:
    words: list[int] = []
    for p in parts:
        if isinstance(p, (list, tuple)):
            words.extend(_entropy_words(p))
        elif isinstance(p, (bool, int, np.integer)):
            words.append(int(p) & 0xFFFFFFFFFFFFFFFF)
        elif isinstance(p, (float, np.floating)):
            words.append(int(np.float64(p).view(np.uint64)))
        elif isinstance(p, str):
            digest = hashlib.sha256(p.encode("utf-8")).digest()
            words.append(int.from_bytes(digest[:8], "little"))
        elif isinstance(p, np.ndarray):
            flat = np.ascontiguousarray(p, dtype=np.float64).view(np.uint64).ravel()
            words.extend(int(w) for w in flat)
        else:
            raise TypeError(f"cannot derive a seed from {type(p)!r}")
    return words


def derive_rng(*parts) -> np.random.Generator:
    """Generator keyed on a mixed tuple of ints, floats, strings, arrays."""
    return np.random.default_rng(_entropy_words(parts))


def derive_seed(*parts) -> int:
    """Stable 64-bit sub-seed from the same kind of mixed key."""
    return int(np.random.SeedSequence(_entropy_words(parts)).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class ChannelModelParams:
    """Propagation model knobs shared by every synthesized link."""

    path_loss_exponent: float = 2.0
    rician_k_db: float = 10.0  # deterministic-to-scattered power ratio; inf is pure deterministic
    noise_variance: float = DEFAULT_NOISE_VARIANCE
    seed: int = 0
    cross_pol_coupling: float = 0.0

    def __post_init__(self):
        if self.path_loss_exponent < 1.0:
            raise ValueError("path_loss_exponent must be at least 1")
        if self.noise_variance < 0.0:
            raise ValueError("noise_variance must be non-negative")
        if not 0.0 <= self.cross_pol_coupling <= 1.0:
            raise ValueError("cross_pol_coupling must be in [0, 1]")


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """One drawn link: per-polarization element vectors plus the direct term."""

    h_h: np.ndarray
    h_v: np.ndarray
    g_h: np.ndarray
    g_v: np.ndarray
    h_los: complex
    noise_variance: float

    def __post_init__(self):
        n = None
        for name in ("h_h", "h_v", "g_h", "g_v"):
            vec = np.asarray(getattr(self, name), dtype=np.complex128).copy()
            if vec.ndim != 1:
                raise ValueError(f"{name} must be a vector")
            if not np.all(np.isfinite(vec.view(np.float64))):
                raise ValueError(f"{name} has non-finite entries")
            if n is None:
                n = vec.shape[0]
            elif vec.shape[0] != n:
                raise ValueError("channel vectors must share one length")
            vec.setflags(write=False)
            object.__setattr__(self, name, vec)
        object.__setattr__(self, "h_los", complex(self.h_los))
        if self.noise_variance < 0:
            raise ValueError("noise_variance must be non-negative")

    @property
    def n_elements(self) -> int:
        return self.h_h.shape[0]


def _complex_normal(rng: np.random.Generator, n: int) -> np.ndarray:
    z = rng.standard_normal((2, n))
    return (z[0] + 1j * z[1]) / math.sqrt(2.0)


def _side_vectors(term, elem_pos, wavelength, params, rng, conjugate_phase):
    delta = elem_pos - term.position
    d = np.linalg.norm(delta, axis=1)
    if np.any(d < 1e-9):
        raise ValueError("terminal coincides with an element position")
    dirs = delta / d[:, None]
    amp = np.sqrt(gains_toward(term, dirs)) * d ** (-params.path_loss_exponent / 2.0)
    phase = 2.0 * np.pi * d / wavelength
    det = amp * np.exp(1j * phase if conjugate_phase else -1j * phase)
    if math.isinf(params.rician_k_db):
        w_det, w_sc = 1.0, 0.0
    else:
        k = 10.0 ** (params.rician_k_db / 10.0)
        w_det = math.sqrt(k / (k + 1.0))
        w_sc = math.sqrt(1.0 / (k + 1.0))
    out = []
    # draw both polarizations in a fixed order so streams stay aligned even
    # when a weight is zero
    for w_pol in (1.0 - term.polarization, term.polarization):
        scatter = amp * _complex_normal(rng, len(d))
        out.append(math.sqrt(w_pol) * (w_det * det + w_sc * scatter))
    return out


def synthesize_channels(scene: Scene, layout: RisLayout, params: ChannelModelParams) -> ChannelRealization:
    """Draw h, g, and the direct scalar for one placement.

    Deterministic per element: spherical-wave phase over the exact element
    distance, antenna gain toward the element, and distance to the power
    -path_loss_exponent/2. A Rician scattered part rides on top with the
    same magnitude envelope. The generator is keyed on (seed, tx position,
    rx position), so reruns are bit-identical while distinct placements get
    independent scatter.
    """
    elem_pos = scene.element_positions(layout)
    rng = derive_rng(params.seed, scene.tx.position, scene.rx.position)
    h_h, h_v = _side_vectors(scene.tx, elem_pos, layout.wavelength, params, rng, conjugate_phase=False)
    g_h, g_v = _side_vectors(scene.rx, elem_pos, layout.wavelength, params, rng, conjugate_phase=True)

    c = params.cross_pol_coupling
    if c > 0.0:
        a, b = math.sqrt(1.0 - c), math.sqrt(c)
        h_h, h_v = a * h_h + b * h_v, a * h_v + b * h_h
        g_h, g_v = a * g_h + b * g_v, a * g_v + b * g_h

    if los_blocked(scene):
        h_los = 0.0j
    else:
        sep = scene.rx.position - scene.tx.position
        dist = float(np.linalg.norm(sep))
        d = sep / dist
        product = antenna_gain(scene.tx, d) * antenna_gain(scene.rx, -d)
        h_los = (
            math.sqrt(product)
            * dist ** (-params.path_loss_exponent / 2.0)
            * np.exp(-2j * np.pi * dist / layout.wavelength)
        )
    return ChannelRealization(h_h, h_v, g_h, g_v, complex(h_los), params.noise_variance)


def channel_gain(config: RisConfig, chan: ChannelRealization, amplitude: float = DEFAULT_ELEMENT_AMPLITUDE) -> complex:
    """Complex end-to-end coefficient: per-polarization g^H diag(theta) h
    cascades plus the direct term."""
    if config.layout.n_active != chan.n_elements:
        raise ValueError("configuration and channel have different element counts")
    th = theta_diag(config, "H", amplitude)
    tv = theta_diag(config, "V", amplitude)
    total = np.vdot(chan.g_h, th * chan.h_h) + np.vdot(chan.g_v, tv * chan.h_v)
    return complex(total + chan.h_los)


def end_to_end_gain(config: RisConfig, chan: ChannelRealization, amplitude: float = DEFAULT_ELEMENT_AMPLITUDE) -> float:
    """Power gain |sum of cascades + direct|^2 for one configuration."""
    return abs(channel_gain(config, chan, amplitude)) ** 2


@dataclass(frozen=True)
class ToneParams:
    """Probe tone and sampling settings."""

    tone_hz: float = 100e3
    sample_rate_hz: float = 1e6
    buffer_len: int = 10_000
    tx_amplitude: float = 1.0

    def __post_init__(self):
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        if not 0.0 < self.tone_hz < self.sample_rate_hz / 2.0:
            raise ValueError("tone_hz must sit below Nyquist")
        if self.buffer_len < 1:
            raise ValueError("buffer_len must be at least 1")
        if self.tx_amplitude <= 0:
            raise ValueError("tx_amplitude must be positive")


def tone_waveform(tone: ToneParams) -> np.ndarray:
    """Complex baseband probe: tx_amplitude * exp(j 2 pi f k / fs)."""
    k = np.arange(tone.buffer_len)
    w = tone.tx_amplitude * np.exp(2j * np.pi * tone.tone_hz * k / tone.sample_rate_hz)
    w.setflags(write=False)
    return w


def received_samples(
    config: RisConfig,
    chan: ChannelRealization,
    tone: ToneParams,
    noise_seed=0,
    amplitude: float = DEFAULT_ELEMENT_AMPLITUDE,
) -> np.ndarray:
    """Baseband receive buffer: channel-scaled tone plus complex AWGN."""
    c = channel_gain(config, chan, amplitude)
    r = c * tone_waveform(tone)
    if chan.noise_variance > 0.0:
        rng = derive_rng(noise_seed)
        z = rng.standard_normal((2, tone.buffer_len))
        r = r + math.sqrt(chan.noise_variance / 2.0) * (z[0] + 1j * z[1])
    return r


@dataclass(frozen=True, eq=False)
class QuantizedBuffer:
    """12-bit conversion result: (K, 2) integer codes and the clipped share."""

    iq: np.ndarray
    clip_fraction: float


def quantize_adc(samples, full_scale: float) -> QuantizedBuffer:
    """Map complex samples onto 12-bit codes; valid codes are (-2047, 2048].

    Rounding is half away from zero. Components beyond full scale clamp
    silently; the fraction of samples touched by clamping is reported.
    """
    if full_scale <= 0:
        raise ValueError("full_scale must be positive")
    x = np.asarray(samples, dtype=np.complex128)
    scaled = np.stack([x.real, x.imag], axis=-1) * (ADC_CODE_MAX / full_scale)
    rounded = np.copysign(np.floor(np.abs(scaled) + 0.5), scaled)
    over = (rounded > ADC_CODE_MAX) | (rounded < ADC_CODE_MIN)
    clip_fraction = float(np.mean(np.any(over, axis=-1))) if x.size else 0.0
    codes = np.clip(rounded, ADC_CODE_MIN, ADC_CODE_MAX).astype(np.int16)
    return QuantizedBuffer(codes, clip_fraction)


class MeasurementFloorError(ValueError):
    """An all-zero buffer has no measurable power."""


def power_dbfs(iq) -> float:
    """Average power of ADC codes in dB relative to one squared LSB.

    Full scale sits near 66 dB on this scale, so bench-like levels come out
    as positive values around 20 to 35.
    """
    a = np.asarray(iq, dtype=np.float64)
    if a.ndim != 2 or a.shape[-1] != 2 or a.shape[0] < 1:
        raise ValueError("expected a (K, 2) integer I/Q buffer")
    p = float(np.mean(a[:, 0] ** 2 + a[:, 1] ** 2))
    if p == 0.0:
        raise MeasurementFloorError("buffer is identically zero")
    # via the RMS so a constant-amplitude-A buffer lands on 20*log10(A) to
    # the last bit (sqrt(A*A) is exactly A in IEEE arithmetic)
    return float(20.0 * np.log10(math.sqrt(p)))


class TonePowerMeter:
    """Measurement function: tone through one channel, AWGN, ADC, dBFS.

    Calls are counted and each call's noise comes from a stream keyed on
    (noise_seed, call index), so a rerun reproduces the exact sequence.
    """

    def __init__(
        self,
        chan: ChannelRealization,
        tone: ToneParams | None = None,
        *,
        full_scale: float = DEFAULT_FULL_SCALE,
        amplitude: float = DEFAULT_ELEMENT_AMPLITUDE,
        noise_seed=0,
    ):
        self.chan = chan
        self.tone = tone if tone is not None else ToneParams()
        self.full_scale = float(full_scale)
        self.amplitude = float(amplitude)
        self.noise_seed = noise_seed
        self.calls = 0
        self.last_clip_fraction = 0.0
        self._waveform = tone_waveform(self.tone)
        self._noise_scale = math.sqrt(self.chan.noise_variance / 2.0)

    def __call__(self, config: RisConfig) -> float:
        index = self.calls
        self.calls += 1
        c = channel_gain(config, self.chan, self.amplitude)
        r = c * self._waveform
        if self.chan.noise_variance > 0.0:
            z = derive_rng(self.noise_seed, index).standard_normal((2, len(r)))
            r = r + self._noise_scale * (z[0] + 1j * z[1])
        buf = quantize_adc(r, self.full_scale)
        self.last_clip_fraction = buf.clip_fraction
        return power_dbfs(buf.iq)


class GainMeter:
    """Noiseless analytic measurement: configuration gain in dB.

    Shares the measurement-function contract with TonePowerMeter; handy as
    the fast measure for small exhaustive searches.
    """

    def __init__(self, chan: ChannelRealization, amplitude: float = DEFAULT_ELEMENT_AMPLITUDE):
        self.chan = chan
        self.amplitude = float(amplitude)
        self.calls = 0

    def __call__(self, config: RisConfig) -> float:
        self.calls += 1
        g = end_to_end_gain(config, self.chan, self.amplitude)
        with np.errstate(divide="ignore"):
            return float(10.0 * np.log10(g))


def write_iq_buffer(path, buf: QuantizedBuffer, tone: ToneParams, full_scale: float) -> None:
    """Dump codes as interleaved little-endian int16 I/Q plus a JSON sidecar."""
    path = Path(path)
    raw = np.ascontiguousarray(buf.iq, dtype="<i2")  # row-major: I0 Q0 I1 Q1 ...
    path.write_bytes(raw.tobytes())
    sidecar = {
        "format": "interleaved int16 I/Q, little-endian",
        "buffer_len": int(buf.iq.shape[0]),
        "sample_rate_hz": tone.sample_rate_hz,
        "tone_hz": tone.tone_hz,
        "full_scale": full_scale,
        "clip_fraction": buf.clip_fraction,
    }
    Path(str(path) + ".json").write_text(json.dumps(sidecar, sort_keys=True, indent=2) + "\n")
