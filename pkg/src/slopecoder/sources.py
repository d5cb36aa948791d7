"""Seeded binary sources and reference rate-distortion curves.

Randomness comes from numpy's PCG64 bit generator.  Trial ``i`` of an
experiment seeded with ``seed`` draws from
``np.random.SeedSequence(seed, spawn_key=(i,))``, so every trial is
reproducible on its own and independent of how trials are scheduled.
"""
from dataclasses import dataclass

import numpy as np

D_GRID_STEP = 1e-4


@dataclass(frozen=True)
class SourceSpec:
    kind: str  # "bernoulli" or "markov_binary"
    param: float
    n: int
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("bernoulli", "markov_binary"):
            raise ValueError(f"unknown source kind {self.kind!r}")
        if not 0.0 <= self.param <= 1.0:
            raise ValueError(f"source parameter must be in [0, 1], got {self.param}")
        if self.n < 1:
            raise ValueError("source length must be >= 1")

    @classmethod
    def parse(cls, text: str, n: int, seed: int = 0) -> "SourceSpec":
        """Parse ``bern:<p>`` or ``bsms:<q>``."""
        name, _, value = text.partition(":")
        kinds = {"bern": "bernoulli", "bernoulli": "bernoulli", "bsms": "markov_binary",
                 "markov": "markov_binary"}
        if name not in kinds or not value:
            raise ValueError(f"source must look like bern:<p> or bsms:<q>, got {text!r}")
        return cls(kinds[name], float(value), n, seed)

    @property
    def label(self) -> str:
        return f"{'bern' if self.kind == 'bernoulli' else 'bsms'}:{self.param:g}"


def trial_rng(seed: int, trial: int = None) -> np.random.Generator:
    if trial is None:
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(trial,))))


def generate(spec: SourceSpec, trial: int = None) -> np.ndarray:
    """Draw a realisation of ``spec`` as an ``int64`` array of 0/1 symbols."""
    rng = trial_rng(spec.seed, trial)
    if spec.kind == "bernoulli":
        return (rng.random(spec.n) < spec.param).astype(np.int64)
    first = rng.random() < 0.5
    flips = rng.random(spec.n - 1) < spec.param
    seq = np.empty(spec.n, dtype=np.int64)
    seq[0] = first
    seq[1:] = first ^ (np.cumsum(flips) % 2)
    return seq


def h_binary(eps) -> float:
    """Binary entropy in bits."""
    eps = np.asarray(eps, dtype=float)
    if np.any((eps < 0) | (eps > 1)):
        raise ValueError("h_binary needs eps in [0, 1]")
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(eps * np.log2(eps) + (1 - eps) * np.log2(1 - eps))
    h = np.where((eps == 0) | (eps == 1), 0.0, h)
    return float(h) if h.ndim == 0 else h


def rd_bernoulli(p: float, D):
    """Rate-distortion function of a Bernoulli(p) source under Hamming distortion."""
    D = np.asarray(D, dtype=float)
    if not 0 <= p <= 1 or np.any((D < 0) | (D > 1)):
        raise ValueError("rd_bernoulli needs p, D in [0, 1]")
    r = np.where(D >= min(p, 1 - p), 0.0, np.maximum(h_binary(p) - h_binary(np.minimum(D, 0.5)), 0.0))
    return float(r) if r.ndim == 0 else r


def critical_distortion(q: float) -> float:
    """Largest ``D`` for which the Shannon lower bound of a BSMS(q) is tight."""
    r = min(q, 1 - q) / max(q, 1 - q)
    return 0.5 * (1.0 - np.sqrt(1.0 - r * r))


def slb_markov(q: float, D):
    """Shannon lower bound ``max(H_b(q) - H_b(D), 0)`` and whether it is tight."""
    D_arr = np.asarray(D, dtype=float)
    if not 0 <= q <= 0.5 or np.any((D_arr < 0) | (D_arr > 0.5)):
        raise ValueError("slb_markov needs q, D in [0, 0.5]")
    value = np.maximum(h_binary(q) - h_binary(D_arr), 0.0)
    tight = D_arr <= critical_distortion(q)
    if value.ndim == 0:
        return float(value), bool(tight)
    return value, tight


def curve(kind: str, param: float, D):
    """Reference curve values: ``R(D)`` for Bernoulli, the SLB for BSMS."""
    if kind == "bernoulli":
        return rd_bernoulli(param, D)
    return slb_markov(param, D)[0]


def fixed_slope_optimum(kind: str, param: float, alpha: float):
    """``(D*, min_D [R(D) + alpha D])`` for the reference curve of a source.

    Searched on a 1e-4 grid over [0, 0.5] and refined with the closed-form
    stationary point ``D = 1 / (1 + 2**alpha)`` where the curve is
    ``H_b(.) - H_b(D)``.
    """
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    grid = np.linspace(0.0, 0.5, int(round(0.5 / D_GRID_STEP)) + 1)
    candidates = list(grid) + [1.0 / (1.0 + 2.0 ** alpha)]
    if kind == "bernoulli":
        candidates.append(min(param, 1 - param))
    else:
        candidates.append(min(param, 0.5))
    cand = np.array(candidates)
    vals = curve(kind, param, cand) + alpha * cand
    i = int(np.argmin(vals))
    return float(cand[i]), float(vals[i])


def curve_points(kind: str, param: float, step: float = 1e-3):
    """``(D, R)`` samples of the reference curve on [0, 0.5]."""
    D = np.linspace(0.0, 0.5, int(round(0.5 / step)) + 1)
    return D, curve(kind, param, D)
