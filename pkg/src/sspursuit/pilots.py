"""Superimposed pilot design and the induced sparse measurement operator.

Every antenna transmits on one shared set of uniformly spaced subcarriers;
antennas are told apart only by their per-antenna binary (+/-1) sequences.
The pilot overhead therefore stays flat as the antenna count grows, at the
price of recovering all antennas jointly from a compressed observation.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "PilotConfig",
    "SensingMatrix",
    "OverheadReport",
    "pilot_subcarriers",
    "design_pilots",
    "build_sensing_matrix",
    "overhead_report",
    "format_pilot_config",
    "parse_pilot_config",
    "load_pilot_config",
    "save_pilot_config",
]


@dataclass(frozen=True)
class PilotConfig:
    """Shared pilot subcarriers plus the per-antenna +/-1 sequences.

    pilot_indices: sorted distinct subcarrier indices, shape (N_p,).
    sequences: int array of +/-1 entries, shape (M, N_p), rows distinct.
    seed: the integer seed the config was drawn from, when known.
    """

    N: int
    N_p: int
    pilot_indices: np.ndarray
    sequences: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        idx = np.asarray(self.pilot_indices, dtype=int)
        seqs = np.asarray(self.sequences, dtype=int)
        object.__setattr__(self, "pilot_indices", idx)
        object.__setattr__(self, "sequences", seqs)
        if not 1 <= self.N_p <= self.N:
            raise ValueError(f"need 1 <= N_p <= N, got N_p={self.N_p}, N={self.N}")
        if idx.shape != (self.N_p,):
            raise ValueError(f"pilot_indices shape {idx.shape} != ({self.N_p},)")
        if idx[0] < 0 or idx[-1] >= self.N or np.any(np.diff(idx) <= 0):
            raise ValueError("pilot_indices must be sorted, distinct, within [0, N)")
        if seqs.ndim != 2 or seqs.shape[1] != self.N_p:
            raise ValueError(f"sequences must be (M, N_p), got {seqs.shape}")
        if seqs.shape[0] < 1:
            raise ValueError("need at least one sequence row")
        if not np.all(np.abs(seqs) == 1):
            raise ValueError("sequences must contain only +1/-1")
        if np.unique(seqs, axis=0).shape[0] != seqs.shape[0]:
            raise ValueError("antenna sequences must be pairwise distinct")

    @property
    def M(self):
        return self.sequences.shape[0]


def pilot_subcarriers(N, N_p):
    """Uniformly decimated subcarrier set: entry i is floor(i * N / N_p)."""
    if not 1 <= N_p <= N:
        raise ValueError(f"need 1 <= N_p <= N, got N_p={N_p}, N={N}")
    return (np.arange(N_p) * N) // N_p


def design_pilots(N, N_p, M, rng):
    """Draw a PilotConfig: the shared subcarrier set plus M distinct sequences.

    rng may be an integer seed (recorded on the config, so the draw can be
    replayed) or a numpy Generator (seed recorded as None).  Duplicate
    sequence rows are redrawn until all M are distinct; with 2^N_p < M that
    is impossible and a ValueError is raised up front.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    if N_p < 63 and M > 2 ** N_p:
        raise ValueError(f"cannot draw {M} distinct +/-1 sequences of length {N_p}")
    if isinstance(rng, (int, np.integer)):
        seed = int(rng)
        rng = np.random.default_rng(seed)
    else:
        seed = None
    seqs = 2 * rng.integers(0, 2, size=(M, N_p)) - 1
    while True:
        _, first = np.unique(seqs, axis=0, return_index=True)
        if first.size == M:
            break
        stale = np.setdiff1d(np.arange(M), first)
        seqs[stale] = 2 * rng.integers(0, 2, size=(stale.size, N_p)) - 1
    return PilotConfig(
        N=N, N_p=N_p, pilot_indices=pilot_subcarriers(N, N_p), sequences=seqs, seed=seed
    )


@dataclass(frozen=True)
class SensingMatrix:
    """Dense pilot-domain measurement operator, shape (N_p, M*L)."""

    data: np.ndarray
    N_p: int
    M: int
    L: int


def build_sensing_matrix(cfg, L):
    """Assemble the measurement operator for an L-sample delay window.

    Column m*L + tau carries antenna m's sequence times the delay-tau DFT
    column restricted to the pilot subcarriers:

        data[q, m*L + tau] = p_m[q] * exp(-2j*pi * omega_q * tau / N)

    with omega_q = cfg.pilot_indices[q].  The DFT is unnormalized.
    """
    if not 1 <= L <= cfg.N:
        raise ValueError(f"need 1 <= L <= N, got L={L}, N={cfg.N}")
    phase = np.exp(
        (-2j * np.pi / cfg.N) * np.outer(cfg.pilot_indices, np.arange(L))
    )
    data = np.empty((cfg.N_p, cfg.M * L), dtype=complex)
    for m in range(cfg.M):
        data[:, m * L : (m + 1) * L] = cfg.sequences[m, :, None] * phase
    return SensingMatrix(data=data, N_p=cfg.N_p, M=cfg.M, L=L)


@dataclass(frozen=True)
class OverheadReport:
    """Pilot-cost summary for a configuration serving M antennas."""

    N: int
    N_p: int
    M: int
    K: int

    @property
    def fraction(self):
        """Share of subcarriers spent on pilots, N_p / N."""
        return self.N_p / self.N

    @property
    def per_antenna(self):
        """Average pilot subcarriers per antenna, N_p / M."""
        return self.N_p / self.M

    @property
    def cs_limit(self):
        """Compressed-sensing floor on per-antenna measurements, 2 * K."""
        return 2 * self.K

    @property
    def orthogonal_total(self):
        """Subcarriers an orthogonal per-antenna scheme would need, M * N_p."""
        return self.M * self.N_p

    def format(self):
        return (
            f"pilot subcarriers      : {self.N_p} of {self.N} "
            f"({100.0 * self.fraction:.2f}% overhead)\n"
            f"average per antenna    : {self.per_antenna:.2f}\n"
            f"sensing floor (2K)     : {self.cs_limit}\n"
            f"orthogonal equivalent  : {self.orthogonal_total} subcarriers\n"
        )


def overhead_report(cfg, M, K):
    """Summarize pilot cost when cfg serves M antennas at sparsity K."""
    if M < 1:
        raise ValueError("M must be >= 1")
    if K < 1:
        raise ValueError("K must be >= 1")
    return OverheadReport(N=cfg.N, N_p=cfg.N_p, M=M, K=K)


def format_pilot_config(cfg):
    """Render a PilotConfig as key-value text; integers only, so the
    round-trip through parse_pilot_config is exact."""
    lines = [
        f"N = {cfg.N}",
        f"N_p = {cfg.N_p}",
        f"seed = {'none' if cfg.seed is None else cfg.seed}",
        "pilot_indices = " + ", ".join(str(i) for i in cfg.pilot_indices),
    ]
    for m in range(cfg.M):
        lines.append(f"sequence_{m} = " + ", ".join(str(s) for s in cfg.sequences[m]))
    return "\n".join(lines) + "\n"


def parse_pilot_config(text):
    fields = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"expected 'key = value', got {raw!r}")
        fields[key.strip()] = value.strip()
    for req in ("N", "N_p", "seed", "pilot_indices", "sequence_0"):
        if req not in fields:
            raise ValueError(f"pilot config text is missing {req!r}")

    def ints(value):
        return [int(tok) for tok in value.replace(",", " ").split()]

    rows = []
    while f"sequence_{len(rows)}" in fields:
        rows.append(ints(fields.pop(f"sequence_{len(rows)}")))
    leftovers = {k for k in fields if k.startswith("sequence_")}
    if leftovers:
        raise ValueError(f"non-contiguous sequence rows: {sorted(leftovers)}")
    seed = fields["seed"]
    return PilotConfig(
        N=int(fields["N"]),
        N_p=int(fields["N_p"]),
        pilot_indices=np.array(ints(fields["pilot_indices"])),
        sequences=np.array(rows),
        seed=None if seed == "none" else int(seed),
    )


def load_pilot_config(path):
    return parse_pilot_config(Path(path).read_text())


def save_pilot_config(cfg, path):
    Path(path).write_text(format_pilot_config(cfg))
