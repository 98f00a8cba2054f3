"""Monte Carlo NMSE-versus-SNR studies and their delimited outputs.

A config names the problem dimensions, an SNR grid, and an ordered list of
algorithm entries.  Every trial draws one R-column measurement block and each
entry processes that same block, so curves are paired trial-by-trial:

  ssp@r   structured recovery on groups of r columns (r = R when omitted);
          ssp@1 recovers each column on its own and the NMSE is still taken
          over the reassembled full block
  sp@r    classical per-column pursuit, evaluated on the leading r columns
  oracle  least squares on the exact support (leading r columns)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channel import BUILTIN_PROFILES, ChannelSpec, generate_channel, load_pdp
from .measurement import simulate_measurement
from .pilots import build_sensing_matrix, design_pilots
from .recovery import (
    NMSE_DB_FLOOR,
    GramTable,
    nmse,
    oracle_ls,
    sp_recover,
    ssp_recover,
)

__all__ = [
    "AlgorithmEntry",
    "ExperimentConfig",
    "ResultRow",
    "ResultTable",
    "parse_algorithms",
    "parse_snr_spec",
    "parse_experiment_config",
    "format_experiment_config",
    "load_experiment_config",
    "run_experiment",
    "emit_csv",
    "read_result_csv",
    "emit_plot_data",
    "summarize",
]

_KINDS = ("ssp", "sp", "oracle")


@dataclass(frozen=True)
class AlgorithmEntry:
    """One algorithm to evaluate; r is the column window (None = full block)."""

    kind: str
    r: int | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown algorithm {self.kind!r}, expected one of {_KINDS}")
        if self.r is not None and self.r < 1:
            raise ValueError("algorithm window r must be >= 1")

    @property
    def label(self):
        return self.kind if self.r is None else f"{self.kind}@{self.r}"


def parse_algorithms(value):
    """Parse a comma-separated list like 'ssp@1, ssp@4, sp@1, oracle'."""
    entries = []
    for token in value.split(","):
        token = token.strip()
        if not token:
            continue
        kind, sep, r = token.partition("@")
        entries.append(AlgorithmEntry(kind=kind, r=int(r) if sep else None))
    if not entries:
        raise ValueError("algorithm list is empty")
    return tuple(entries)


def parse_snr_spec(value):
    """Parse an SNR grid: 'a:b:step' (inclusive) or a comma list; the token
    'none' marks the noise-free model."""
    value = value.strip()
    if ":" in value:
        parts = value.split(":")
        if len(parts) != 3:
            raise ValueError(f"expected 'a:b:step', got {value!r}")
        a, b, step = (float(p) for p in parts)
        if step <= 0:
            raise ValueError("snr step must be positive")
        if b < a:
            raise ValueError("snr range end is below its start")
        count = int(math.floor((b - a) / step + 1e-9)) + 1
        return tuple(a + i * step for i in range(count))
    grid = tuple(
        None if tok.strip().lower() == "none" else float(tok)
        for tok in value.split(",")
        if tok.strip()
    )
    if not grid:
        raise ValueError("snr grid is empty")
    return grid


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one Monte Carlo study."""

    M: int
    L: int
    K: int
    R: int
    N: int
    N_p: int
    snr_db: tuple
    trials: int
    seed: int
    algorithms: tuple
    pdp: str = "random"
    sample_rate: float = 10e6
    out: str = "."

    def __post_init__(self):
        ChannelSpec(M=self.M, L=self.L, K=self.K, R=self.R, sample_rate=self.sample_rate)
        if not 1 <= self.N_p <= self.N:
            raise ValueError(f"need 1 <= N_p <= N, got N_p={self.N_p}, N={self.N}")
        if self.L > self.N:
            raise ValueError(f"delay window L={self.L} exceeds N={self.N}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.snr_db:
            raise ValueError("snr grid is empty")
        if not self.algorithms:
            raise ValueError("algorithm list is empty")
        labels = []
        for entry in self.algorithms:
            r = entry.r if entry.r is not None else self.R
            if r > self.R:
                raise ValueError(f"{entry.label}: window exceeds the block R={self.R}")
            labels.append((entry.kind, r))
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate algorithm entries: {labels}")


_CONFIG_KEYS = {
    "M", "L", "K", "R", "N", "N_p", "pdp", "sample_rate",
    "snr_db", "trials", "seed", "algorithms", "out",
}
_CONFIG_DEFAULTS = {"pdp": "random", "sample_rate": "10e6", "out": "."}


def parse_experiment_config(text):
    """Parse the key = value experiment format (# comments allowed)."""
    fields = dict(_CONFIG_DEFAULTS)
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"expected 'key = value', got {raw!r}")
        key = key.strip()
        if key not in _CONFIG_KEYS:
            raise ValueError(f"unknown config key {key!r}")
        fields[key] = value.strip()
    missing = _CONFIG_KEYS - fields.keys()
    if missing:
        raise ValueError(f"config is missing {sorted(missing)}")
    return ExperimentConfig(
        M=int(fields["M"]),
        L=int(fields["L"]),
        K=int(fields["K"]),
        R=int(fields["R"]),
        N=int(fields["N"]),
        N_p=int(fields["N_p"]),
        pdp=fields["pdp"],
        sample_rate=float(fields["sample_rate"]),
        snr_db=parse_snr_spec(fields["snr_db"]),
        trials=int(fields["trials"]),
        seed=int(fields["seed"]),
        algorithms=parse_algorithms(fields["algorithms"]),
        out=fields["out"],
    )


def format_experiment_config(cfg):
    """Canonical text form; parse_experiment_config reads it back."""
    snr = ", ".join("none" if s is None else f"{s:g}" for s in cfg.snr_db)
    algorithms = ", ".join(e.label for e in cfg.algorithms)
    return (
        f"M = {cfg.M}\n"
        f"L = {cfg.L}\n"
        f"K = {cfg.K}\n"
        f"R = {cfg.R}\n"
        f"N = {cfg.N}\n"
        f"N_p = {cfg.N_p}\n"
        f"pdp = {cfg.pdp}\n"
        f"sample_rate = {cfg.sample_rate!r}\n"
        f"snr_db = {snr}\n"
        f"trials = {cfg.trials}\n"
        f"seed = {cfg.seed}\n"
        f"algorithms = {algorithms}\n"
        f"out = {cfg.out}\n"
    )


def load_experiment_config(path):
    return parse_experiment_config(Path(path).read_text())


@dataclass(frozen=True)
class ResultRow:
    snr_db: float | None
    algorithm: str
    R: int
    nmse_db: float
    trials: int
    ci95_db: float


@dataclass
class ResultTable:
    """Aggregated study results, one row per (SNR point, algorithm entry)."""

    rows: list = field(default_factory=list)

    def curves(self):
        """Rows grouped by (algorithm, R) in first-seen order."""
        grouped: dict = {}
        for row in self.rows:
            grouped.setdefault((row.algorithm, row.R), []).append(row)
        return grouped


def _resolve_profile(name):
    if name == "random":
        return None
    if name in BUILTIN_PROFILES:
        return BUILTIN_PROFILES[name]
    path = Path(name)
    if path.exists():
        return load_pdp(path)
    raise ValueError(f"unknown delay profile {name!r} (not builtin, not a file)")


def _trial_nmse(entry_kind, r, block, phi, chan, K, gram):
    Y = block.Y
    R_blk = Y.shape[1]
    if entry_kind == "ssp":
        H_hat = np.zeros_like(chan.H)
        for start in range(0, R_blk, r):
            stop = min(start + r, R_blk)
            res = ssp_recover(Y[:, start:stop], phi, K, gram=gram)
            H_hat[:, start:stop] = res.H_hat
        return nmse(H_hat, chan.H)
    if entry_kind == "sp":
        H_hat = np.zeros((phi.M * phi.L, r), dtype=complex)
        for j in range(r):
            H_hat[:, j] = sp_recover(Y[:, j], phi, phi.M * K, gram=gram)
        return nmse(H_hat, chan.H[:, :r])
    if entry_kind == "oracle":
        H_hat = oracle_ls(Y[:, :r], phi, chan.support, gram=gram)
        return nmse(H_hat, chan.H[:, :r])
    raise ValueError(f"unknown algorithm kind {entry_kind!r}")


def _mean_to_db(linear):
    if linear <= 0.0:
        return NMSE_DB_FLOOR
    return max(10.0 * math.log10(linear), NMSE_DB_FLOOR)


def run_experiment(cfg, progress=None):
    """Run the study described by cfg and return a ResultTable.

    Deterministic for a given seed: the pilot draw uses the master seed, and
    trial t at SNR index s uses default_rng([seed, s*trials + t]), so any
    grid point can be recomputed in isolation.  Results are accumulated in a
    fixed serial order; reruns are byte-identical.
    """
    if cfg.M * cfg.K > cfg.N_p:
        raise ValueError(
            f"M*K = {cfg.M * cfg.K} unknowns on an expanded support exceed the "
            f"N_p = {cfg.N_p} pilot measurements; restricted least squares is "
            f"underdetermined even with the exact support"
        )
    spec = ChannelSpec(M=cfg.M, L=cfg.L, K=cfg.K, R=cfg.R, sample_rate=cfg.sample_rate)
    profile = _resolve_profile(cfg.pdp)
    entries = [(e.kind, e.r if e.r is not None else cfg.R) for e in cfg.algorithms]

    pilots = design_pilots(cfg.N, cfg.N_p, cfg.M, cfg.seed)
    phi = build_sensing_matrix(pilots, cfg.L)
    gram = GramTable.from_pilots(pilots, cfg.L)

    sums = np.zeros((len(cfg.snr_db), len(entries)))
    squares = np.zeros_like(sums)
    for s, snr in enumerate(cfg.snr_db):
        for t in range(cfg.trials):
            rng = np.random.default_rng([cfg.seed, s * cfg.trials + t])
            chan = generate_channel(spec, profile, rng)
            block = simulate_measurement(phi, chan, snr, rng)
            for j, (kind, r) in enumerate(entries):
                value = _trial_nmse(kind, r, block, phi, chan, cfg.K, gram)
                sums[s, j] += value
                squares[s, j] += value * value
        if progress is not None:
            label = "none" if snr is None else f"{snr:g} dB"
            progress(f"snr {label}: {cfg.trials} trials done")

    table = ResultTable()
    n = cfg.trials
    for s, snr in enumerate(cfg.snr_db):
        for j, (kind, r) in enumerate(entries):
            mean = sums[s, j] / n
            if n > 1:
                var = max(squares[s, j] - n * mean * mean, 0.0) / (n - 1)
                half = 1.96 * math.sqrt(var / n)
            else:
                half = 0.0
            mean_db = _mean_to_db(mean)
            ci_db = _mean_to_db(mean + half) - mean_db if mean > 0.0 else 0.0
            table.rows.append(
                ResultRow(
                    snr_db=snr,
                    algorithm=kind,
                    R=r,
                    nmse_db=mean_db,
                    trials=n,
                    ci95_db=ci_db,
                )
            )
    return table


_CSV_HEADER = "snr_db,algorithm,R,nmse_db,trials,ci95_db"


def emit_csv(table, path):
    """Write the table as CSV with the fixed header

        snr_db,algorithm,R,nmse_db,trials,ci95_db

    floats carry 6 decimal places; a noise-free row writes snr_db as 'none'.
    ci95_db is the upper half-width of the linear-domain 95% interval mapped
    to dB: 10*log10((mean + 1.96*std/sqrt(n)) / mean).
    """
    lines = [_CSV_HEADER]
    for row in table.rows:
        snr = "none" if row.snr_db is None else f"{row.snr_db:.6f}"
        lines.append(
            f"{snr},{row.algorithm},{row.R},{row.nmse_db:.6f},"
            f"{row.trials},{row.ci95_db:.6f}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def read_result_csv(path):
    """Parse emit_csv output back into a ResultTable."""
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != _CSV_HEADER:
        raise ValueError(f"{path}: expected header {_CSV_HEADER!r}")
    table = ResultTable()
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 6:
            raise ValueError(f"{path}:{lineno}: expected 6 fields, got {len(parts)}")
        try:
            table.rows.append(
                ResultRow(
                    snr_db=None if parts[0] == "none" else float(parts[0]),
                    algorithm=parts[1],
                    R=int(parts[2]),
                    nmse_db=float(parts[3]),
                    trials=int(parts[4]),
                    ci95_db=float(parts[5]),
                )
            )
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
    return table


def emit_plot_data(table, path):
    """Write a gnuplot .dat plus a .gp script next to it.

    Curves become indexed blocks (two blank lines apart, gnuplot's `index`
    convention) of `snr_db nmse_db ci95_db`; noise-free rows have no SNR
    coordinate and are skipped.  The script renders <stem>.gnuplot.png.
    """
    if not table.rows:
        raise ValueError("cannot emit plot data for an empty table")
    path = Path(path)
    blocks = []
    plots = []
    for i, ((alg, r), rows) in enumerate(table.curves().items()):
        points = [row for row in rows if row.snr_db is not None]
        lines = [f"# block {i}: {alg} R={r}", "# snr_db nmse_db ci95_db"]
        lines += [
            f"{p.snr_db:.6f} {p.nmse_db:.6f} {p.ci95_db:.6f}" for p in points
        ]
        blocks.append("\n".join(lines))
        plots.append(
            f"    '{path.name}' index {i} using 1:2:3 with yerrorlines "
            f"title '{alg} R={r}'"
        )
    path.write_text("\n\n\n".join(blocks) + "\n")
    script = (
        f"set terminal pngcairo size 800,560\n"
        f"set output '{path.stem}.gnuplot.png'\n"
        "set xlabel 'SNR (dB)'\n"
        "set ylabel 'NMSE (dB)'\n"
        "set grid\n"
        "set key top right\n"
        "plot \\\n" + ", \\\n".join(plots) + "\n"
    )
    path.with_suffix(".gp").write_text(script)


def summarize(table):
    """Fixed-width text summary, one line per SNR point."""
    curves = table.curves()
    labels = [f"{alg} R={r}" for (alg, r) in curves]
    width = max([len(lbl) for lbl in labels] + [14])
    grid = []
    for row in table.rows:
        if row.snr_db not in grid:
            grid.append(row.snr_db)
    by_point = {
        (row.snr_db, row.algorithm, row.R): row for row in table.rows
    }
    out = ["snr_db".ljust(8) + "".join(lbl.rjust(width + 2) for lbl in labels)]
    for snr in grid:
        cells = []
        for (alg, r) in curves:
            row = by_point.get((snr, alg, r))
            cells.append(
                "-".rjust(width + 2)
                if row is None
                else f"{row.nmse_db:.2f} ({row.ci95_db:.2f})".rjust(width + 2)
            )
        name = "none" if snr is None else f"{snr:g}"
        out.append(name.ljust(8) + "".join(cells))
    return "\n".join(out) + "\n"
