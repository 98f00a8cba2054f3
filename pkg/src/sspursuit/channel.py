"""Tapped-delay-line channel models with a sparse support shared across antennas."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "PowerDelayProfile",
    "ChannelSpec",
    "ChannelRealization",
    "ITU_VEHICULAR_B",
    "BUILTIN_PROFILES",
    "quantize_pdp",
    "generate_channel",
    "format_pdp",
    "parse_pdp",
    "load_pdp",
    "save_pdp",
]


@dataclass(frozen=True)
class PowerDelayProfile:
    """Named delay profile: tap delays in microseconds, mean tap powers in dB.

    Delays must be non-negative and strictly increasing.  Powers are relative;
    quantize_pdp renormalizes total linear power to 1, so only differences
    between entries matter.
    """

    name: str
    delay_us: tuple[float, ...]
    power_db: tuple[float, ...]

    def __post_init__(self):
        delays = tuple(float(d) for d in self.delay_us)
        powers = tuple(float(p) for p in self.power_db)
        object.__setattr__(self, "delay_us", delays)
        object.__setattr__(self, "power_db", powers)
        if not delays:
            raise ValueError("profile needs at least one tap")
        if len(delays) != len(powers):
            raise ValueError(
                f"{len(delays)} delays but {len(powers)} powers in profile {self.name!r}"
            )
        if delays[0] < 0.0:
            raise ValueError("delays must be non-negative")
        if any(b <= a for a, b in zip(delays, delays[1:])):
            raise ValueError("delays must be strictly increasing")
        if not all(math.isfinite(p) for p in powers):
            raise ValueError("powers must be finite")


ITU_VEHICULAR_B = PowerDelayProfile(
    name="itu_vehicular_b",
    delay_us=(0.0, 0.3, 8.9, 12.9, 17.1, 20.0),
    power_db=(-2.5, 0.0, -12.8, -10.0, -25.2, -16.0),
)

BUILTIN_PROFILES = {ITU_VEHICULAR_B.name: ITU_VEHICULAR_B}


def quantize_pdp(pdp, sample_rate, L):
    """Map a continuous-delay profile onto tap indices of an L-sample window.

    Delays are rounded to the nearest sample and clamped to [0, L-1]; taps
    that land on the same index merge by summing their linear power.  Powers
    come back renormalized to unit total.

    Returns (delays, powers): int and float arrays of equal length, delays
    strictly increasing.
    """
    if sample_rate <= 0:
        raise ValueError("sample_rate must be positive")
    if L < 1:
        raise ValueError("L must be >= 1")
    idx = np.rint(np.asarray(pdp.delay_us) * 1e-6 * sample_rate).astype(int)
    idx = np.clip(idx, 0, L - 1)
    linear = 10.0 ** (np.asarray(pdp.power_db) / 10.0)
    delays, inverse = np.unique(idx, return_inverse=True)
    powers = np.zeros(delays.size)
    np.add.at(powers, inverse, linear)
    powers /= powers.sum()
    return delays, powers


@dataclass(frozen=True)
class ChannelSpec:
    """Dimensions of one downlink estimation problem.

    M  transmit antennas
    L  delay-window length in samples
    K  nonzero taps per antenna
    R  OFDM symbols observed per block
    sample_rate  Hz; used when quantizing a delay profile onto the window
    """

    M: int
    L: int
    K: int
    R: int = 1
    sample_rate: float = 10e6

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be >= 1")
        if self.L < 1:
            raise ValueError("L must be >= 1")
        if not 1 <= self.K <= self.L:
            raise ValueError(f"need 1 <= K <= L, got K={self.K}, L={self.L}")
        if self.R < 1:
            raise ValueError("R must be >= 1")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")


@dataclass
class ChannelRealization:
    """One draw of the sparse multi-antenna channel.

    H has shape (M*L, R); antenna m's impulse response occupies rows
    [m*L, (m+1)*L).  Every antenna places energy on the same K-tap support.
    """

    spec: ChannelSpec
    support: np.ndarray
    gains: np.ndarray
    H: np.ndarray


def generate_channel(spec, pdp, rng):
    """Draw one ChannelRealization.

    With a PowerDelayProfile the support and per-tap variances come from
    quantize_pdp, and the quantized tap count must equal spec.K.  With
    pdp=None the support is a uniform random K-subset of [0, L) with flat
    per-tap power 1/K.  Gains are i.i.d. circularly symmetric complex
    Gaussian scaled so that E||h_m||^2 = 1 for every antenna and symbol.
    """
    if pdp is None:
        support = np.sort(rng.choice(spec.L, size=spec.K, replace=False))
        powers = np.full(spec.K, 1.0 / spec.K)
    else:
        support, powers = quantize_pdp(pdp, spec.sample_rate, spec.L)
        if support.size != spec.K:
            raise ValueError(
                f"profile {pdp.name!r} quantizes to {support.size} taps "
                f"but the channel spec asks for K={spec.K}"
            )
    shape = (spec.M, spec.K, spec.R)
    gains = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    gains *= np.sqrt(powers / 2.0)[None, :, None]
    H = np.zeros((spec.M * spec.L, spec.R), dtype=complex)
    rows = (spec.L * np.arange(spec.M)[:, None] + support[None, :]).ravel()
    H[rows] = gains.reshape(spec.M * spec.K, spec.R)
    return ChannelRealization(spec=spec, support=support, gains=gains, H=H)


def format_pdp(pdp):
    """Render a profile as the key-value text block parse_pdp reads back."""
    return (
        f"name = {pdp.name}\n"
        f"delay_us = {', '.join(repr(d) for d in pdp.delay_us)}\n"
        f"power_db = {', '.join(repr(p) for p in pdp.power_db)}\n"
    )


def parse_pdp(text):
    """Parse the profile text format.

    Three `key = value` lines (name, delay_us, power_db); list values may be
    comma- or space-separated; `#` starts a comment.
    """
    fields = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"expected 'key = value', got {raw!r}")
        fields[key.strip()] = value.strip()
    missing = {"name", "delay_us", "power_db"} - fields.keys()
    if missing:
        raise ValueError(f"profile text is missing {sorted(missing)}")
    unknown = fields.keys() - {"name", "delay_us", "power_db"}
    if unknown:
        raise ValueError(f"unknown profile keys {sorted(unknown)}")

    def floats(value):
        return tuple(float(tok) for tok in value.replace(",", " ").split())

    return PowerDelayProfile(
        name=fields["name"],
        delay_us=floats(fields["delay_us"]),
        power_db=floats(fields["power_db"]),
    )


def load_pdp(path):
    return parse_pdp(Path(path).read_text())


def save_pdp(pdp, path):
    Path(path).write_text(format_pdp(pdp))
