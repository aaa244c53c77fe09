"""Monte Carlo experiments: BER-vs-SNR curves and flop-gain tables.

Every trial ``i`` owns its own random streams, seeded from
``(master_seed, i)`` (channel) and ``(master_seed, i, j + 1)`` (bits and
noise at SNR index ``j``). All variants and SNR points of a trial share the
same channel, bits and unit noise, so comparisons between variants are
paired. Results are integer sums merged in trial order, which makes the
output independent of the number of worker processes.
"""
import configparser
import csv
import dataclasses
import hashlib
import io
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .lattice import ReductionParams, lll_reduce
from .linalg import RankDeficient, embed_vector
from .mimo import (
    Constellation,
    LrZfDetector,
    draw_channel,
    noise_variance,
    qam_demodulate,
    qam_modulate,
    zf_detect,
)

__all__ = [
    "ConfigInvalid",
    "SimConfig",
    "BerPoint",
    "GainRow",
    "ResultList",
    "load_config",
    "run_ber_experiment",
    "run_gain_experiment",
    "emit_csv",
    "read_csv",
    "emit_plot_script",
    "write_manifest",
    "snr_at_ber",
    "SNR_CONVENTION",
    "OUTPUT_DIR_ENV",
]

SNR_CONVENTION = "SNR_dB = 10*log10(N_t*E_s/sigma_n^2) with E_s = 1"
FLOP_SCOPE = "LLL loop only; QR decomposition excluded"
OUTPUT_DIR_ENV = "LRMIMO_OUTPUT_DIR"
MAX_REDRAWS = 100


class ConfigInvalid(ValueError):
    pass


def _desk_trials(n_t):
    return 2000 if n_t <= 4 else 500


@dataclass
class SimConfig:
    n_t: int = 4
    n_r: int = 4
    m_s: int = 16
    snr_db_grid: tuple = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    k_start_list: tuple = (2, 3, 4)
    detectors: tuple = ("ZF", "LR-ZF")
    trials_per_point: int = None
    symbols_per_trial: int = 100
    master_seed: int = 20240101
    delta: float = 0.75
    output_dir: str = None
    noiseless: bool = False
    workers: int = 1
    block_size: int = 50

    def __post_init__(self):
        if self.trials_per_point is None:
            self.trials_per_point = _desk_trials(self.n_t)
        if self.output_dir is None:
            self.output_dir = os.environ.get(OUTPUT_DIR_ENV, "results")
        self.snr_db_grid = tuple(float(v) for v in self.snr_db_grid)
        self.k_start_list = tuple(int(v) for v in self.k_start_list)
        self.detectors = tuple(str(d) for d in self.detectors)
        self.validate()

    def validate(self):
        def bad(name, why):
            raise ConfigInvalid(f"{name}: {why} (got {getattr(self, name)!r})")

        if not self.n_t >= 2:
            bad("n_t", "must be >= 2")
        if not self.n_r >= self.n_t:
            bad("n_r", "must be >= n_t")
        try:
            Constellation(self.m_s)
        except ValueError as exc:
            bad("m_s", str(exc))
        if not self.snr_db_grid:
            bad("snr_db_grid", "must not be empty")
        if not self.k_start_list or any(not 2 <= k <= 2 * self.n_t for k in self.k_start_list):
            bad("k_start_list", f"every entry must lie in [2, {2 * self.n_t}]")
        if len(set(self.k_start_list)) != len(self.k_start_list):
            bad("k_start_list", "entries must be distinct")
        if not self.detectors or set(self.detectors) - {"ZF", "LR-ZF"}:
            bad("detectors", "must be a non-empty subset of {ZF, LR-ZF}")
        if self.trials_per_point < 1:
            bad("trials_per_point", "must be >= 1")
        if self.symbols_per_trial < 1:
            bad("symbols_per_trial", "must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            bad("master_seed", "must be a 64-bit unsigned integer")
        if not 0.25 < self.delta <= 1.0:
            bad("delta", "must lie in (1/4, 1]")
        if self.workers < 1:
            bad("workers", "must be >= 1")
        if self.block_size < 1:
            bad("block_size", "must be >= 1")

    @property
    def variants(self):
        out = []
        if "ZF" in self.detectors:
            out.append("ZF")
        if "LR-ZF" in self.detectors:
            out.extend(f"LR-ZF-k{k}" for k in self.k_start_list)
        return out

    @property
    def dimension(self):
        return f"{self.n_r}x{self.n_t}"

    def canonical(self):
        """Key/value lines describing everything that affects results."""
        skip = {"output_dir", "workers"}
        lines = []
        for f in dataclasses.fields(self):
            if f.name in skip:
                continue
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ", ".join(_fmt(x) for x in v)
            lines.append(f"{f.name} = {_fmt(v)}")
        return "\n".join(lines)

    def config_hash(self):
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]


def _fmt(v):
    if isinstance(v, float):
        return format(v, ".12g")
    return str(v)


_LIST_FIELDS = {"snr_db_grid": float, "k_start_list": int, "detectors": str}
_SCALAR_FIELDS = {
    "n_t": int,
    "n_r": int,
    "m_s": int,
    "trials_per_point": int,
    "symbols_per_trial": int,
    "master_seed": int,
    "delta": float,
    "output_dir": str,
    "workers": int,
    "block_size": int,
}


def _parse_bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_config_values(raw):
    """Convert string values (from a config file or CLI flags) to typed SimConfig kwargs."""
    out = {}
    for key, text in raw.items():
        try:
            if key in _LIST_FIELDS:
                conv = _LIST_FIELDS[key]
                out[key] = tuple(conv(p.strip()) for p in str(text).split(",") if p.strip())
            elif key in _SCALAR_FIELDS:
                out[key] = _SCALAR_FIELDS[key](str(text).strip())
            elif key == "noiseless":
                out[key] = _parse_bool(str(text))
            else:
                raise ConfigInvalid(f"{key}: unknown configuration key")
        except ValueError as exc:
            if isinstance(exc, ConfigInvalid):
                raise
            raise ConfigInvalid(f"{key}: cannot parse {text!r} ({exc})") from None
    return out


def load_config(path=None, **overrides):
    """Read a ``key = value`` config file, apply overrides, return a :class:`SimConfig`.

    Lists are comma separated; ``#`` and ``;`` start comment lines.
    """
    raw = {}
    if path is not None:
        parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
        parser.optionxform = str
        text = Path(path).read_text()
        try:
            parser.read_string("[run]\n" + text, source=str(path))
        except configparser.Error as exc:
            raise ConfigInvalid(f"{path}: {exc}") from None
        raw.update(parser["run"])
    values = parse_config_values(raw)
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return SimConfig(**values)
    except TypeError as exc:
        raise ConfigInvalid(str(exc)) from None


@dataclass(frozen=True)
class BerPoint:
    variant: str
    snr_db: float
    bit_errors: int
    bits_total: int
    channels_used: int
    redraws: int = 0
    capped: int = 0
    flop_total: int = 0
    swap_total: int = 0

    @property
    def ber(self):
        return self.bit_errors / self.bits_total if self.bits_total else 0.0

    @property
    def mean_flops(self):
        return self.flop_total / self.channels_used if self.channels_used else 0.0

    @property
    def mean_swaps(self):
        return self.swap_total / self.channels_used if self.channels_used else 0.0

    @property
    def sigma(self):
        """Binomial standard error of :attr:`ber`."""
        p = self.ber
        return math.sqrt(p * (1 - p) / self.bits_total) if self.bits_total else 0.0


@dataclass(frozen=True)
class GainRow:
    dimension: str
    k_start: int
    channels: int
    flop_total: int
    baseline_flop_total: int
    swap_total: int = 0
    capped: int = 0

    @property
    def mean_flops(self):
        return self.flop_total / self.channels if self.channels else 0.0

    @property
    def mean_swaps(self):
        return self.swap_total / self.channels if self.channels else 0.0

    @property
    def gain_percent(self):
        # every k_start runs on the same channels, so totals compare directly
        if not self.baseline_flop_total:
            return 0.0
        return 100.0 * (1.0 - self.flop_total / self.baseline_flop_total)


class ResultList(list):
    """A list of result rows plus run metadata."""

    def __init__(self, rows=(), config=None, partial=False, redraws=0):
        super().__init__(rows)
        self.config = config
        self.partial = partial
        self.redraws = redraws


def _trial_channel(config, i):
    rng = np.random.default_rng([config.master_seed, i])
    redraws = 0
    while True:
        ch = draw_channel(config.n_r, config.n_t, rng)
        try:
            ch.qr
            return ch, redraws
        except RankDeficient:
            redraws += 1
            if redraws > MAX_REDRAWS:
                raise


def _ber_block(config, start, stop):
    const = Constellation(config.m_s)
    variants = config.variants
    n_snr = len(config.snr_db_grid)
    errors = np.zeros((len(variants), n_snr), dtype=np.int64)
    flops = np.zeros(len(variants), dtype=np.int64)
    swaps = np.zeros(len(variants), dtype=np.int64)
    capped = np.zeros(len(variants), dtype=np.int64)
    redraws = 0
    bps = const.bits_per_symbol
    n_bits = config.n_t * bps * config.symbols_per_trial
    for i in range(start, stop):
        ch, extra = _trial_channel(config, i)
        redraws += extra
        q, r = ch.qr
        detectors = []
        for v, name in enumerate(variants):
            if name == "ZF":
                detectors.append(lambda x: zf_detect(ch, x, const))
                continue
            out = lll_reduce(q, r, ReductionParams(config.delta, int(name.rsplit("k", 1)[1])), n_r=config.n_r)
            flops[v] += out.ledger.total
            swaps[v] += out.swap_count
            capped[v] += out.capped
            detectors.append(LrZfDetector(out, const))
        for j, snr in enumerate(config.snr_db_grid):
            rng = np.random.default_rng([config.master_seed, i, j + 1])
            bits = rng.integers(0, 2, n_bits, dtype=np.int8)
            s = qam_modulate(bits, const).reshape(config.symbols_per_trial, config.n_t).T
            g = rng.standard_normal((2, config.n_r, config.symbols_per_trial))
            sigma_sq = 0.0 if config.noiseless else noise_variance(snr, config.n_t)
            x = ch.h @ s + math.sqrt(sigma_sq / 2.0) * (g[0] + 1j * g[1])
            for v, det in enumerate(detectors):
                s_hat = det(x)
                rx = qam_demodulate(s_hat.T.ravel(), const)
                errors[v, j] += np.count_nonzero(rx != bits)
    return errors, flops, swaps, capped, redraws, stop - start


def _gain_block(config, start, stop):
    ks = config.k_start_list
    flops = np.zeros(len(ks), dtype=np.int64)
    swaps = np.zeros(len(ks), dtype=np.int64)
    capped = np.zeros(len(ks), dtype=np.int64)
    redraws = 0
    for i in range(start, stop):
        ch, extra = _trial_channel(config, i)
        redraws += extra
        q, r = ch.qr
        for v, k in enumerate(ks):
            out = lll_reduce(q, r, ReductionParams(config.delta, k), n_r=config.n_r)
            flops[v] += out.ledger.total
            swaps[v] += out.swap_count
            capped[v] += out.capped
    return flops, swaps, capped, redraws, stop - start


def _run_blocks(fn, config):
    """Evaluate ``fn`` over trial blocks in order; returns (block results, interrupted)."""
    n = config.trials_per_point
    bounds = [(a, min(a + config.block_size, n)) for a in range(0, n, config.block_size)]
    done = []
    try:
        if config.workers == 1:
            for a, b in bounds:
                done.append(fn(config, a, b))
        else:
            with ProcessPoolExecutor(config.workers) as pool:
                futures = [pool.submit(fn, config, a, b) for a, b in bounds]
                for fut in futures:
                    done.append(fut.result())
    except KeyboardInterrupt:
        return done, True
    return done, False


def run_ber_experiment(config):
    """BER per (variant, SNR) cell, ordered variant-major as in ``config.variants``."""
    blocks, interrupted = _run_blocks(_ber_block, config)
    variants = config.variants
    n_snr = len(config.snr_db_grid)
    errors = np.zeros((len(variants), n_snr), dtype=np.int64)
    flops = np.zeros(len(variants), dtype=np.int64)
    swaps = np.zeros(len(variants), dtype=np.int64)
    capped = np.zeros(len(variants), dtype=np.int64)
    redraws = channels = 0
    for e, f, s, c, rd, n in blocks:
        errors += e
        flops += f
        swaps += s
        capped += c
        redraws += rd
        channels += n
    bits_per_cell = channels * config.n_t * Constellation(config.m_s).bits_per_symbol * config.symbols_per_trial
    rows = [
        BerPoint(
            variant=name,
            snr_db=snr,
            bit_errors=int(errors[v, j]),
            bits_total=bits_per_cell,
            channels_used=channels,
            redraws=redraws,
            capped=int(capped[v]),
            flop_total=int(flops[v]),
            swap_total=int(swaps[v]),
        )
        for v, name in enumerate(variants)
        for j, snr in enumerate(config.snr_db_grid)
    ]
    return ResultList(rows, config, interrupted, redraws)


def run_gain_experiment(config):
    """Mean LLL flops per k_start over one channel ensemble, with gains relative to k_start = 2."""
    if 2 not in config.k_start_list:
        raise ConfigInvalid("k_start_list: must include the baseline 2")
    blocks, interrupted = _run_blocks(_gain_block, config)
    ks = config.k_start_list
    flops = np.zeros(len(ks), dtype=np.int64)
    swaps = np.zeros(len(ks), dtype=np.int64)
    capped = np.zeros(len(ks), dtype=np.int64)
    redraws = channels = 0
    for f, s, c, rd, n in blocks:
        flops += f
        swaps += s
        capped += c
        redraws += rd
        channels += n
    base = int(flops[ks.index(2)])
    rows = [
        GainRow(config.dimension, k, channels, int(flops[v]), base, int(swaps[v]), int(capped[v]))
        for v, k in enumerate(ks)
    ]
    return ResultList(rows, config, interrupted, redraws)


BER_COLUMNS = [
    "variant", "snr_db", "bit_errors", "bits_total", "ber", "channels_used",
    "redraws", "capped", "flop_total", "mean_flops", "swap_total", "mean_swaps",
]
GAIN_COLUMNS = [
    "dimension", "k_start", "channels", "flop_total", "mean_flops", "baseline_flop_total",
    "gain_percent", "swap_total", "mean_swaps", "capped",
]


def _row_values(row, columns):
    return [_fmt(getattr(row, c)) for c in columns]


def _metadata(results, config, partial):
    meta = {"tool": f"lrmimo {__version__}"}
    if config is not None:
        meta["config-hash"] = config.config_hash()
        meta["master-seed"] = str(config.master_seed)
        meta["dimension"] = config.dimension
    meta["snr-convention"] = SNR_CONVENTION
    meta["flop-scope"] = FLOP_SCOPE
    meta["partial"] = "true" if partial else "false"
    return meta


def emit_csv(results, path, config=None, partial=None, kind=None):
    """Write results as CSV preceded by ``# key: value`` metadata lines.

    ``kind`` ("ber" or "gain") picks the schema when ``results`` is empty.
    """
    config = config if config is not None else getattr(results, "config", None)
    partial = partial if partial is not None else getattr(results, "partial", False)
    if kind is None:
        kind = "gain" if results and isinstance(results[0], GainRow) else "ber"
    columns = GAIN_COLUMNS if kind == "gain" else BER_COLUMNS
    buf = io.StringIO()
    for key, value in _metadata(results, config, partial).items():
        buf.write(f"# {key}: {value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in results:
        writer.writerow(_row_values(row, columns))
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(buf.getvalue())
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def read_csv(path):
    """Parse a file written by :func:`emit_csv`; returns a :class:`ResultList` with ``.metadata``."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            meta[key.strip()] = value.strip()
        elif line:
            body.append(line)
    reader = csv.DictReader(body)
    rows = []
    if reader.fieldnames == GAIN_COLUMNS:
        for rec in reader:
            rows.append(GainRow(
                rec["dimension"], int(rec["k_start"]), int(rec["channels"]), int(rec["flop_total"]),
                int(rec["baseline_flop_total"]), int(rec["swap_total"]), int(rec["capped"]),
            ))
    elif reader.fieldnames == BER_COLUMNS:
        for rec in reader:
            rows.append(BerPoint(
                rec["variant"], float(rec["snr_db"]), int(rec["bit_errors"]), int(rec["bits_total"]),
                int(rec["channels_used"]), int(rec["redraws"]), int(rec["capped"]),
                int(rec["flop_total"]), int(rec["swap_total"]),
            ))
    else:
        raise ValueError(f"{path}: unrecognised CSV header {reader.fieldnames}")
    out = ResultList(rows, partial=meta.get("partial") == "true")
    out.metadata = meta
    return out


_PLOT_TEMPLATE = '''"""Semilog BER-vs-SNR plot for {csv_name}; run with python from any directory."""
import csv
from pathlib import Path

import matplotlib.pyplot as plt

CSV = Path(__file__).with_name({csv_name!r})
SERIES = {series!r}

rows = [r for r in csv.DictReader(l for l in CSV.open() if not l.startswith("#"))]
fig, ax = plt.subplots(figsize=(6, 4.5))
for name in SERIES:
    pts = [(float(r["snr_db"]), float(r["ber"])) for r in rows if r["variant"] == name and float(r["ber"]) > 0]
    if pts:
        x, y = zip(*pts)
        ax.plot(x, y, marker="o", label=name)
ax.set_yscale("log")
ax.set_xlabel("SNR [dB] ({convention})")
ax.set_ylabel("BER")
ax.set_title({title!r})
ax.grid(True, which="both", alpha=0.3)
ax.legend()
fig.tight_layout()
fig.savefig(CSV.with_suffix(".png"), dpi=150)
'''


def emit_plot_script(results, path, csv_path):
    """Write a matplotlib script plotting ``csv_path`` (must sit in the same directory as ``path``)."""
    if not results:
        raise ValueError("no BER results to plot")
    series = list(dict.fromkeys(r.variant for r in results))
    path = Path(path)
    csv_name = Path(csv_path).name
    config = getattr(results, "config", None)
    title = f"{config.m_s}-QAM {config.dimension} MIMO" if config is not None else "BER"
    text = _PLOT_TEMPLATE.format(csv_name=csv_name, series=series, title=title, convention=SNR_CONVENTION)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def write_manifest(path, config, durations, extra=None):
    lines = [f"tool = lrmimo {__version__}", f"config_hash = {config.config_hash()}", config.canonical()]
    lines += [f"duration_{k}_s = {v:.3f}" for k, v in durations.items()]
    for k, v in (extra or {}).items():
        lines.append(f"{k} = {v}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")
    return path


def snr_at_ber(points, variant, target=1e-2):
    """SNR where ``variant``'s BER curve first crosses ``target`` (log-BER linear interpolation).

    Returns ``None`` if the curve never crosses the target on the grid.
    """
    pts = sorted((p.snr_db, p.ber) for p in points if p.variant == variant)
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        if y0 >= target > y1:
            if y1 <= 0:
                return x1
            f = (math.log10(y0) - math.log10(target)) / (math.log10(y0) - math.log10(y1))
            return x0 + f * (x1 - x0)
    return None


class Timer:
    def __init__(self):
        self.durations = {}

    def __call__(self, name):
        timer = self

        class _Ctx:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                timer.durations[name] = time.perf_counter() - self.t0

        return _Ctx()
