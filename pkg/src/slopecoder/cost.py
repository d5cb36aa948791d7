"""Distortion, energy, linearisation coefficients and the linearised cost."""
from dataclasses import dataclass

import numpy as np

from .empirical import CountMatrix, as_symbols, cond_entropy, count_matrix, state_indices


@dataclass(frozen=True, eq=False)
class CoeffMatrix:
    """Coefficients ``lambda[beta, b]`` of the linearised entropy term.

    Entries where the reference count is zero would be ``+inf``; they hold
    the finite ``cap`` instead.
    """

    k: int
    alphabet_size: int
    table: np.ndarray
    cap: float

    @property
    def state_weights(self) -> np.ndarray:
        """Coefficients flattened by trellis state ``s = b * A + beta``."""
        return np.ascontiguousarray(self.table.T).reshape(-1)

    @classmethod
    def from_table(cls, table, cap=np.inf) -> "CoeffMatrix":
        t = np.array(table, dtype=float)
        t.setflags(write=False)
        return cls(_infer_order(t.shape), t.shape[0], t, float(cap))


def _infer_order(shape) -> int:
    if len(shape) != 2:
        raise ValueError("coefficient table must be 2-D (|Y| x |Y|^k)")
    size, cols = shape
    k, width = 0, 1
    while width < cols and size > 1:
        k, width = k + 1, width * size
    if width != cols:
        raise ValueError(f"table shape {shape} is not (A, A**k)")
    return k


def hamming(size_x: int, size_y=None) -> np.ndarray:
    """Hamming distortion matrix: 0 on the diagonal, 1 elsewhere."""
    size_y = size_x if size_y is None else size_y
    return 1.0 - np.eye(size_x, size_y)


def check_distortion(d) -> np.ndarray:
    d = np.asarray(d, dtype=float)
    if d.ndim != 2:
        raise ValueError("distortion matrix must be 2-D (|X| x |Y|)")
    if not np.all(np.isfinite(d)) or np.any(d < 0):
        raise ValueError("distortion entries must be finite and non-negative")
    return d


def load_distortion(path) -> np.ndarray:
    """Read ``|X| |Y|`` followed by row-major entries."""
    with open(path) as fh:
        tokens = fh.read().split()
    if len(tokens) < 2:
        raise ValueError(f"{path}: missing '|X| |Y|' header")
    rows, cols = int(tokens[0]), int(tokens[1])
    values = tokens[2:]
    if len(values) != rows * cols:
        raise ValueError(f"{path}: expected {rows * cols} entries, found {len(values)}")
    return check_distortion(np.array(values, dtype=float).reshape(rows, cols))


def save_distortion(d, path) -> None:
    d = check_distortion(d)
    with open(path, "w") as fh:
        fh.write(f"{d.shape[0]} {d.shape[1]}\n")
        for row in d:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def _pair(x, y, d):
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: len(x)={x.shape[0]}, len(y)={y.shape[0]}")
    if d is None:
        size = int(max(x.max(), y.max())) + 1
        d = hamming(max(size, 2))
    return x, y, check_distortion(d)


def distortion(x, y, d=None) -> float:
    """Average per-letter distortion ``(1/n) sum d(x_i, y_i)``; Hamming by default."""
    x, y, d = _pair(x, y, d)
    return float(d[x, y].sum() / x.shape[0])


def energy(x, y, k: int, alpha: float, d=None, convention="cyclic", alphabet_size=None) -> float:
    """``H_k(y) + alpha * d_n(x, y)``."""
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    x, y, d = _pair(x, y, d)
    size = alphabet_size if alphabet_size is not None else d.shape[1]
    m = count_matrix(y, k, convention, size)
    return cond_entropy(m) + alpha * distortion(x, y, d)


def default_cap(n: int, alphabet_size: int) -> float:
    """Finite stand-in for ``+inf`` coefficients: ``log2(2 n |Y|)``."""
    return float(np.log2(2.0 * n * alphabet_size))


def coeffs_from_counts(m, cap=None) -> CoeffMatrix:
    """Coefficient matrix ``lambda = log2(column mass / entry)`` at ``m``.

    ``m`` is a :class:`CountMatrix` (cap defaults to :func:`default_cap`) or
    a raw ``(A, A**k)`` table (cap is then required).
    """
    if isinstance(m, CountMatrix):
        c = m.counts.astype(float)
        if cap is None:
            cap = default_cap(m.n, m.alphabet_size)
    else:
        c = np.asarray(m, dtype=float)
        if cap is None:
            raise ValueError("cap is required when building coefficients from a raw table")
    if cap <= 0:
        raise ValueError("cap must be positive")
    col = np.broadcast_to(c.sum(axis=0), c.shape)
    lam = np.full(c.shape, float(cap))
    pos = c > 0
    lam[pos] = np.log2(col[pos] / c[pos])
    # deterministic columns give log2(1) = 0 exactly; the cap bounds the rest
    np.minimum(lam, cap, out=lam)
    lam.setflags(write=False)
    k = m.k if isinstance(m, CountMatrix) else _infer_order(c.shape)
    return CoeffMatrix(k, c.shape[0], lam, float(cap))


def scalar_product(a, b) -> float:
    """Elementwise product summed over all entries."""
    a = a.table if isinstance(a, (CoeffMatrix, CountMatrix)) else np.asarray(a, dtype=float)
    b = b.table if isinstance(b, (CoeffMatrix, CountMatrix)) else np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.sum(a * b))


def linear_cost(lam: CoeffMatrix, x, y, alpha: float, d=None, convention="cyclic") -> float:
    """Linearised cost ``lam (.) m(y) + alpha * d_n(x, y)`` (matrix form)."""
    x, y, d = _pair(x, y, d)
    m = count_matrix(y, lam.k, convention, lam.alphabet_size)
    return scalar_product(lam, m) + alpha * distortion(x, y, d)


def linear_cost_positional(lam: CoeffMatrix, x, y, alpha: float, d=None, convention="cyclic") -> float:
    """Same value as :func:`linear_cost`, summed position by position."""
    x, y, d = _pair(x, y, d)
    y, _ = as_symbols(y, lam.alphabet_size)
    states = state_indices(y, lam.k, lam.alphabet_size, convention)
    coeff_term = lam.state_weights[states].sum() / states.shape[0]
    return float(coeff_term + alpha * d[x, y].sum() / x.shape[0])
