"""Forward measurement model: pilot-domain observations of the sparse channel."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channel import ChannelRealization

__all__ = ["MeasurementBlock", "simulate_measurement", "measurement_to_csv"]


@dataclass
class MeasurementBlock:
    """Observed pilot block Y (shape (N_p, R)) plus the noise bookkeeping.

    snr_db is None for the noise-free model; noise_var is the per complex
    sample variance actually applied (0.0 when noise-free).
    """

    Y: np.ndarray
    snr_db: float | None
    noise_var: float


def simulate_measurement(phi, H, snr_db, rng):
    """Apply the sensing operator and add calibrated receiver noise.

    H may be a ChannelRealization or a plain (M*L, R) array; a 1-D vector is
    treated as a single column.  With snr_db=None the output is exactly
    Y = Phi @ H.  Otherwise the noise variance is calibrated against the
    realized signal energy,

        var = ||Phi H||_F^2 / (N_p * R * 10^(snr_db/10)),

    and the noise is i.i.d. circularly symmetric complex Gaussian.  A zero
    channel under finite SNR yields var = 0 (there is no signal to scale
    against), so Y comes back all zero.
    """
    if isinstance(H, ChannelRealization):
        H = H.H
    H = np.asarray(H, dtype=complex)
    if H.ndim == 1:
        H = H[:, None]
    if H.ndim != 2 or H.shape[0] != phi.data.shape[1]:
        raise ValueError(
            f"channel shape {H.shape} does not match operator columns {phi.data.shape[1]}"
        )
    signal = phi.data @ H
    if snr_db is None:
        return MeasurementBlock(Y=signal, snr_db=None, noise_var=0.0)
    var = float(np.linalg.norm(signal) ** 2) / (signal.size * 10.0 ** (snr_db / 10.0))
    noise = rng.standard_normal(signal.shape) + 1j * rng.standard_normal(signal.shape)
    return MeasurementBlock(
        Y=signal + np.sqrt(var / 2.0) * noise,
        snr_db=float(snr_db),
        noise_var=var,
    )


def measurement_to_csv(block, path):
    """Dump Y row-major for debugging; cell q,r holds "re,im" of Y[q, r].

    The cell itself contains a comma, so rows are written with full quoting
    to stay valid CSV.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, quoting=csv.QUOTE_ALL)
        for row in np.atleast_2d(block.Y):
            writer.writerow([f"{float(z.real)!r},{float(z.imag)!r}" for z in row])
