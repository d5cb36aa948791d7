"""Iterative coefficient refinement at a fixed slope, and slope annealing.

Each iteration builds coefficients at the (linear-convention) type of the
previous reconstruction and re-solves the linearised problem with the
Viterbi trellis.  Because the trellis minimises the linear-convention cost,
the linear-convention energy is non-increasing along the iterations; the
cyclic energy, which is what gets reported, can wobble by ``O(k/n)``.
"""
from dataclasses import dataclass, field

import numpy as np

from .cost import coeffs_from_counts, default_cap, distortion, hamming
from .empirical import as_symbols, cond_entropy, count_matrix
from .viterbi import viterbi_solve

DEFAULT_MAX_ITER = 200


@dataclass
class SlopeSchedule:
    """Annealing from ``alpha_max`` down to ``alpha_0`` in ``n_steps`` equal steps."""

    alpha_max: float = 3.0
    alpha_0: float = 0.1
    n_steps: int = 29

    def __post_init__(self):
        if not self.alpha_max >= self.alpha_0 >= 0:
            raise ValueError("schedule needs alpha_max >= alpha_0 >= 0")
        if self.n_steps < 1:
            raise ValueError("schedule needs n_steps >= 1")

    @property
    def delta(self) -> float:
        return (self.alpha_max - self.alpha_0) / self.n_steps

    def alphas(self) -> list:
        # rounding keeps 3.0 - 7*0.1 from printing as 2.3000000000000003
        return [round(self.alpha_max - r * self.delta, 12) for r in range(self.n_steps + 1)]

    @classmethod
    def from_step(cls, alpha_max: float, alpha_0: float, step: float) -> "SlopeSchedule":
        n_steps = int(round((alpha_max - alpha_0) / step))
        if n_steps < 1 or abs(alpha_max - n_steps * step - alpha_0) > 1e-9:
            raise ValueError(f"step {step} does not divide [{alpha_0}, {alpha_max}] evenly")
        return cls(alpha_max, alpha_0, n_steps)


@dataclass
class EncodeResult:
    reconstruction: np.ndarray
    alpha: float
    energy: float
    rate_hk: float
    distortion: float
    iterations: int
    converged: bool
    energy_trace: list = field(default_factory=list)
    linear_energy: float = float("nan")
    linear_trace: list = field(default_factory=list)
    lz_rate: float = None

    @property
    def convention_gap(self) -> float:
        return abs(self.linear_energy - self.energy)


def _energies(x, y, k, alpha, d, size):
    dist = distortion(x, y, d)
    h_cyc = cond_entropy(count_matrix(y, k, "cyclic", size))
    h_lin = cond_entropy(count_matrix(y, k, "linear", size))
    return h_cyc, dist, h_cyc + alpha * dist, h_lin + alpha * dist


def iterate_fixed_slope(x, alpha: float, y0=None, k: int = 8, d=None, max_iter: int = DEFAULT_MAX_ITER,
                        cap=None, alphabet_size=None, backend=None) -> EncodeResult:
    """Refine coefficients until the reconstruction stops changing.

    ``y0`` defaults to ``x``.  ``energy_trace[t-1]`` is the cyclic energy of
    the t-th reconstruction and ``linear_trace`` its linear-convention
    energy.  ``converged`` is False when ``max_iter`` ran out first.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if d is None:
        x, size_x = as_symbols(x, alphabet_size)
        size = alphabet_size or size_x
        d = hamming(size_x, size)
    else:
        d = np.asarray(d, dtype=float)
        x, _ = as_symbols(x, d.shape[0])
        size = d.shape[1]
    n = x.shape[0]
    if cap is None:
        cap = default_cap(n, size)
    prev = x.copy() if y0 is None else as_symbols(y0, size)[0]
    if prev.shape != x.shape:
        raise ValueError("y0 must have the same length as x")

    trace, lin_trace = [], []
    converged = False
    y = prev
    for _ in range(max_iter):
        lam = coeffs_from_counts(count_matrix(prev, k, "linear", size), cap)
        y, _ = viterbi_solve(x, lam, alpha, d, backend=backend)
        h_cyc, dist, e_cyc, e_lin = _energies(x, y, k, alpha, d, size)
        trace.append(e_cyc)
        lin_trace.append(e_lin)
        if np.array_equal(y, prev):
            converged = True
            break
        prev = y

    return EncodeResult(
        reconstruction=y, alpha=float(alpha), energy=e_cyc, rate_hk=h_cyc, distortion=dist,
        iterations=len(trace), converged=converged, energy_trace=trace,
        linear_energy=e_lin, linear_trace=lin_trace,
    )


def anneal(x, schedule: SlopeSchedule, k: int = 8, d=None, max_iter: int = DEFAULT_MAX_ITER, cap=None,
           alphabet_size=None, backend=None) -> list:
    """Run fixed-slope refinement down the schedule, warm-starting each step.

    The first step starts from ``x``; step ``r`` starts from the output of
    step ``r - 1``.  Returns one :class:`EncodeResult` per slope, highest
    slope first.
    """
    results = []
    y0 = None
    for alpha in schedule.alphas():
        res = iterate_fixed_slope(x, alpha, y0, k, d, max_iter, cap, alphabet_size, backend)
        results.append(res)
        y0 = res.reconstruction
    return results
