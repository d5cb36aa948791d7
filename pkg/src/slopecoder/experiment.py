"""Experiment harness: configuration, sweeps, oracle suite, traces, curves.

Config files are flat ``key = value`` lines; ``#`` starts a comment and
unknown keys are errors.  All CSV output uses a header row, commas, LF line
endings and floats printed with 9 significant digits.  Rows are sorted by
(trial, slope) before writing, so the worker count never changes the
output bytes.
"""
import csv
import io
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .cost import hamming, load_distortion
from .errors import ConfigError
from .lz import lz78_length
from .oracle import OracleReport, enumerate_sequences, phi_lemma_report, verify_theorem1
from .refine import DEFAULT_MAX_ITER, SlopeSchedule, anneal, iterate_fixed_slope
from .sources import SourceSpec, curve_points, generate

THREADS_ENV = "SLOPECODER_THREADS"

ROW_FIELDS = ("trial", "seed", "alpha", "distortion", "rate_hk", "lz_rate", "energy", "energy_linear",
              "iterations", "converged", "wall_ms")
STAT_FIELDS = ("distortion", "rate_hk", "lz_rate", "energy", "iterations")


def _bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _alpha_list(text):
    vals = [float(v) for v in text.split(",") if v.strip()]
    if not vals:
        raise ValueError("empty slope list")
    if any(v < 0 for v in vals):
        raise ValueError("slopes must be non-negative")
    return vals


def _cap(text):
    return None if text.strip().lower() == "auto" else float(text)


@dataclass
class ExperimentConfig:
    source: str = "bern:0.5"
    n: int = 10_000
    k: int = 8
    alpha_max: float = 3.0
    alpha_min: float = 0.1
    alpha_step: float = 0.1
    alphas: list = None
    anneal: bool = True
    trials: int = 50
    seed: int = 0
    max_iter: int = DEFAULT_MAX_ITER
    cap: float = None
    distortion: str = None
    lz: bool = True
    timing: bool = False
    out: str = "results"

    # key -> parser; also the set of accepted keys
    PARSERS = {
        "source": str, "n": int, "k": int, "alpha_max": float, "alpha_min": float, "alpha_step": float,
        "alphas": _alpha_list, "anneal": _bool, "trials": int, "seed": int, "max_iter": int, "cap": _cap,
        "distortion": str, "lz": _bool, "timing": _bool, "out": str,
    }

    def source_spec(self, n=None) -> SourceSpec:
        return SourceSpec.parse(self.source, self.n if n is None else n, self.seed)

    def slopes(self) -> list:
        if self.alphas:
            return list(self.alphas)
        return SlopeSchedule.from_step(self.alpha_max, self.alpha_min, self.alpha_step).alphas()

    def distortion_matrix(self):
        if self.distortion:
            return load_distortion(self.distortion)
        return hamming(2)

    def validate(self):
        try:
            self.source_spec()
            slopes = self.slopes()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.anneal and any(b > a for a, b in zip(slopes, slopes[1:])):
            raise ConfigError("annealed sweeps need a non-increasing slope list")
        if self.k < 0 or self.n <= self.k:
            raise ConfigError(f"need 0 <= k < n (k={self.k}, n={self.n})")
        if self.trials < 1 or self.max_iter < 1:
            raise ConfigError("trials and max_iter must be >= 1")
        if self.cap is not None and self.cap <= 0:
            raise ConfigError("cap must be positive")
        return self

    def with_overrides(self, **overrides):
        clean = {key: val for key, val in overrides.items() if val is not None}
        unknown = set(clean) - set(self.PARSERS)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        parsed = {}
        for key, val in clean.items():
            try:
                parsed[key] = self.PARSERS[key](val) if isinstance(val, str) else val
            except ValueError as exc:
                raise ConfigError(f"--{key.replace('_', '-')}: {exc}") from None
        return replace(self, **parsed)

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            val = getattr(self, f.name)
            if val is None:
                continue
            if isinstance(val, list):
                val = ",".join(f"{v:g}" for v in val)
            elif isinstance(val, bool):
                val = str(val).lower()
            lines.append(f"{f.name} = {val}")
        return "\n".join(lines) + "\n"


def parse_config(text: str, origin: str = "<config>") -> ExperimentConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{lineno}: expected 'key = value'")
        key, val = (part.strip() for part in line.split("=", 1))
        if key not in ExperimentConfig.PARSERS:
            raise ConfigError(f"{origin}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{origin}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = ExperimentConfig.PARSERS[key](val)
        except ValueError as exc:
            raise ConfigError(f"{origin}:{lineno}: bad value for {key!r}: {exc}") from None
    return ExperimentConfig(**values)


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text(), str(path))


def worker_count(requested=None) -> int:
    limit = os.environ.get(THREADS_ENV)
    count = requested if requested is not None else (os.cpu_count() or 1)
    if limit:
        count = min(count, int(limit))
    return max(1, count)


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{value:.9g}"


def _result_row(cfg, trial, res, x, wall_ms):
    return {
        "trial": trial,
        "seed": cfg.seed,
        "alpha": res.alpha,
        "distortion": res.distortion,
        "rate_hk": res.rate_hk,
        "lz_rate": lz78_length(res.reconstruction, 2) / x.shape[0] if cfg.lz else None,
        "energy": res.energy,
        "energy_linear": res.linear_energy,
        "iterations": res.iterations,
        "converged": res.converged,
        "wall_ms": wall_ms if cfg.timing else None,
    }


def _run_trial(cfg: ExperimentConfig, trial: int, slopes=None):
    """All slopes of one source realisation; returns ``(rows, results)``."""
    x = generate(cfg.source_spec(), trial)
    d = cfg.distortion_matrix()
    slopes = cfg.slopes() if slopes is None else slopes
    rows, results = [], []
    y0 = None
    for alpha in slopes:
        start = time.perf_counter()
        res = iterate_fixed_slope(x, alpha, y0 if cfg.anneal else None, cfg.k, d, cfg.max_iter, cfg.cap)
        wall = (time.perf_counter() - start) * 1e3
        rows.append(_result_row(cfg, trial, res, x, wall))
        results.append(res)
        y0 = res.reconstruction
    return rows, results


def _trial_rows(args):
    cfg, trial = args
    return trial, _run_trial(cfg, trial)[0]


def sweep_rows(cfg: ExperimentConfig, workers=None) -> list:
    cfg.validate()
    jobs = [(cfg, t) for t in range(cfg.trials)]
    workers = min(worker_count(workers), len(jobs))
    if workers <= 1:
        done = [_trial_rows(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            done = list(pool.map(_trial_rows, jobs))
    done.sort(key=lambda item: item[0])
    return [row for _, rows in done for row in rows]


def rows_to_csv(rows, fieldnames=ROW_FIELDS) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fieldnames)
    for row in rows:
        writer.writerow([fmt(row[name]) for name in fieldnames])
    return buf.getvalue()


def aggregate_csv(rows_csv: str) -> str:
    """Per-slope mean/min/max, computed from the printed row values."""
    reader = csv.DictReader(io.StringIO(rows_csv))
    groups = {}
    for row in reader:
        groups.setdefault(row["alpha"], []).append(row)
    header = ["alpha", "trials", "converged"]
    for name in STAT_FIELDS:
        header += [f"{name}_mean", f"{name}_min", f"{name}_max"]
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    # slopes in first-appearance order, which is the sweep order
    for alpha, group in groups.items():
        line = [alpha, str(len(group)), fmt(float(np.mean([float(r["converged"]) for r in group])))]
        for name in STAT_FIELDS:
            vals = [float(r[name]) for r in group if r[name] != ""]
            if vals:
                line += [fmt(float(np.mean(vals))), fmt(min(vals)), fmt(max(vals))]
            else:
                line += ["", "", ""]
        writer.writerow(line)
    return out.getvalue()


def run_sweep(cfg: ExperimentConfig, out=None, workers=None):
    """Write ``rows.csv`` and ``aggregate.csv`` under ``out`` and return their paths."""
    out_dir = Path(out or cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows_csv = rows_to_csv(sweep_rows(cfg, workers))
    rows_path = out_dir / "rows.csv"
    agg_path = out_dir / "aggregate.csv"
    rows_path.write_text(rows_csv)
    agg_path.write_text(aggregate_csv(rows_csv))
    return rows_path, agg_path


def emit_energy_trace(cfg: ExperimentConfig, alpha: float, trial: int = 0):
    """CSV text ``t, energy, energy_linear`` for one cold-started fixed-slope run."""
    x = generate(cfg.source_spec(), trial)
    res = iterate_fixed_slope(x, alpha, None, cfg.k, cfg.distortion_matrix(), cfg.max_iter, cfg.cap)
    rows = [{"t": t, "energy": e, "energy_linear": el}
            for t, (e, el) in enumerate(zip(res.energy_trace, res.linear_trace), start=1)]
    return rows_to_csv(rows, ("t", "energy", "energy_linear")), res


def curves_csv(source: str, step: float = 1e-3) -> str:
    spec = SourceSpec.parse(source, 1)
    D, R = curve_points(spec.kind, spec.param, step)
    rows = [{"D": dv, "R": rv} for dv, rv in zip(D, R)]
    return rows_to_csv(rows, ("D", "R"))


@dataclass
class OracleSuiteResult:
    theorem1: list = field(default_factory=list)
    phi: list = field(default_factory=list)  # (x, k, alpha, convention, PhiLemmaReport)

    @property
    def violations(self) -> int:
        return sum(not r.ok for r in self.theorem1) + sum(not rep.holds for *_, rep in self.phi)

    def to_text(self) -> str:
        t_ok = sum(r.ok for r in self.theorem1)
        p_ok = sum(rep.holds for *_, rep in self.phi)
        lines = [
            f"P1/P2 equivalence: {t_ok}/{len(self.theorem1)} instances with equal minima and S2 subset of S1",
            f"phi lemma: {p_ok}/{len(self.phi)} instances hold",
        ]
        lines += [r.to_text() for r in self.theorem1 if not r.ok]
        lines += [f"phi lemma FAILED x={''.join(map(str, x))} k={k} alpha={a:g} convention={c}: {rep}"
                  for x, k, a, c, rep in self.phi if not rep.holds]
        lines.append("PASS" if self.violations == 0 else f"FAIL ({self.violations} violations)")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("check",) + OracleReport.CSV_FIELDS + ("min_phi", "phi_at_optimum", "holds"))
        for r in self.theorem1:
            row = r.csv_row()
            writer.writerow(["theorem1"] + [row[name] for name in OracleReport.CSV_FIELDS] + ["", "", int(r.ok)])
        blanks = [""] * (len(OracleReport.CSV_FIELDS) - 5)
        for x, k, a, c, rep in self.phi:
            writer.writerow(["phi_lemma", "".join(map(str, x)), k, fmt(a), "", c] + blanks
                            + [f"{rep.min_phi:.12g}", f"{rep.phi_at_optimum:.12g}", int(rep.holds)])
        return buf.getvalue()


def run_oracle_suite(n_max: int, k_max: int, alphas, caps=(32.0,), conventions=("cyclic", "linear"),
                     size: int = 2) -> OracleSuiteResult:
    """P1/P2 equivalence and phi-lemma checks over every ``x`` of length ``n_max``.

    Orders ``k = 1..k_max`` are covered (``k = 0`` only when ``k_max == 0``).
    """
    alphas = list(alphas)
    if not alphas:
        raise ConfigError("the oracle suite needs at least one slope")
    if k_max < 0 or n_max <= k_max:
        raise ConfigError(f"need 0 <= k_max < n_max (k_max={k_max}, n_max={n_max})")
    ks = [0] if k_max == 0 else range(1, k_max + 1)
    d = hamming(size)
    result = OracleSuiteResult()
    for k in ks:
        for block in enumerate_sequences(n_max, size):
            for x in block:
                for alpha in alphas:
                    for cap in caps:
                        result.theorem1.append(verify_theorem1(x, k, alpha, d, cap=cap))
                    for conv in conventions:
                        rep = phi_lemma_report(x, k, alpha, d, convention=conv)
                        result.phi.append((tuple(int(v) for v in x), k, alpha, conv, rep))
    return result
