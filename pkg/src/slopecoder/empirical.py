"""Empirical count matrices and conditional empirical entropy.

A count matrix of order ``k`` has shape ``(A, A**k)``: row ``beta`` is the
current symbol, column ``b`` the preceding ``k`` symbols.  Contexts
``b = (b_1, ..., b_k)`` are packed as ``sum(b_j * A**(k - j))``, so the most
recent symbol ``b_k`` is the least significant digit.  A (k+1)-tuple
``(b_1, ..., b_k, beta)`` is packed the same way, which gives the trellis
state ``s = b * A + beta``.

Two counting conventions are supported:

``cyclic``
    ``y_i = y_{i+n}`` for ``i <= 0``; all ``n`` positions are counted and the
    normaliser is ``n``.  This is the default and what reported rates use.
``linear``
    Positions ``i <= k`` are skipped and the normaliser is ``n - k``.  This
    is the objective the Viterbi solver minimises exactly.

The two conventions give ``H_k`` values that differ by ``O(k/n)``.
"""
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError

MAX_TABLE_ENTRIES = 2 ** 28
MAX_ALPHABET = 256
CONVENTIONS = ("cyclic", "linear")


@dataclass(frozen=True, eq=False)
class CountMatrix:
    """Integer context/symbol counts with a common denominator.

    ``counts[beta, b]`` is the number of positions whose context is ``b`` and
    whose symbol is ``beta``.  The normalised matrix is :attr:`table`.
    """

    k: int
    alphabet_size: int
    counts: np.ndarray
    denominator: int
    convention: str = "cyclic"

    @property
    def table(self) -> np.ndarray:
        return self.counts / self.denominator

    @property
    def n(self) -> int:
        """Length of the sequence the counts were taken from."""
        return self.denominator + (self.k if self.convention == "linear" else 0)

    @property
    def shape(self):
        return self.counts.shape

    def to_text(self) -> str:
        lines = [f"k={self.k} alphabet={self.alphabet_size} convention={self.convention}"]
        betas, ctxs = np.nonzero(self.counts)
        order = np.lexsort((betas, ctxs))
        for beta, ctx in zip(betas[order], ctxs[order]):
            lines.append(f"{beta} {ctx} {self.counts[beta, ctx]} {self.denominator}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "CountMatrix":
        rows = [ln.split() for ln in text.splitlines() if ln.strip()]
        if not rows:
            raise ValueError("empty count matrix text")
        header = dict(field.split("=", 1) for field in rows[0])
        try:
            k = int(header["k"])
            size = int(header["alphabet"])
            convention = header["convention"]
        except KeyError as exc:
            raise ValueError(f"count matrix header missing {exc.args[0]!r}") from None
        _check_convention(convention)
        counts = np.zeros((size, table_columns(size, k)), dtype=np.int64)
        denominator = None
        for lineno, row in enumerate(rows[1:], start=2):
            if len(row) != 4:
                raise ValueError(f"line {lineno}: expected 'beta ctx count denominator'")
            beta, ctx, count, denom = (int(v) for v in row)
            if denominator is None:
                denominator = denom
            elif denom != denominator:
                raise ValueError(f"line {lineno}: inconsistent denominator {denom} != {denominator}")
            counts[beta, ctx] = count
        if denominator is None:
            raise ValueError("count matrix has no entries")
        return _freeze(cls(k, size, counts, denominator, convention))


@dataclass(frozen=True, eq=False)
class EmpiricalDist:
    """k-th order empirical distribution of a sequence (cyclic)."""

    k: int
    alphabet_size: int
    probs: np.ndarray


def _freeze(m):
    m.counts.setflags(write=False)
    return m


def _check_convention(convention):
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}, got {convention!r}")


def table_columns(alphabet_size: int, k: int) -> int:
    """Number of contexts ``A**k``, enforcing the dense-table budget."""
    if k < 0:
        raise ValueError(f"order k must be non-negative, got {k}")
    if not 1 <= alphabet_size <= MAX_ALPHABET:
        raise ValueError(f"alphabet size must be in [1, {MAX_ALPHABET}], got {alphabet_size}")
    # exact integer arithmetic; float log would misjudge the boundary
    if alphabet_size ** (k + 1) > MAX_TABLE_ENTRIES:
        raise CapacityError(
            f"|Y|^(k+1) = {alphabet_size}^{k + 1} exceeds the table budget of {MAX_TABLE_ENTRIES} entries"
        )
    return alphabet_size ** k


def as_symbols(y, alphabet_size=None):
    """Validate a symbol sequence and return ``(array, alphabet_size)``.

    When ``alphabet_size`` is omitted it is inferred as ``max(y) + 1``, but
    never below 2 so that constant binary inputs keep a binary alphabet.
    """
    arr = np.asarray(y)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("sequence must be a non-empty 1-D array of symbol indices")
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.mod(arr, 1) == 0):
            raise ValueError("sequence symbols must be integers")
    arr = arr.astype(np.int64)
    if arr.min() < 0:
        raise ValueError("sequence symbols must be non-negative")
    if alphabet_size is None:
        alphabet_size = max(2, int(arr.max()) + 1)
    elif arr.max() >= alphabet_size:
        raise ValueError(f"symbol {int(arr.max())} outside alphabet of size {alphabet_size}")
    return arr, int(alphabet_size)


def state_indices(y: np.ndarray, k: int, alphabet_size: int, convention: str = "cyclic") -> np.ndarray:
    """Packed (k+1)-tuples ``y_{i-k}..y_i`` for every counted position."""
    n = y.shape[0]
    if convention == "cyclic":
        ext = y[np.arange(-k, n) % n]
        stop = n
    else:
        if n <= k:
            raise ValueError(f"linear convention needs n > k (n={n}, k={k})")
        ext = y
        stop = n - k
    s = np.zeros(stop, dtype=np.int64)
    for j in range(k + 1):
        s = s * alphabet_size + ext[j:j + stop]
    return s


def count_matrix(y, k: int, convention: str = "cyclic", alphabet_size=None) -> CountMatrix:
    """(k+1)-th order empirical count matrix of ``y``."""
    _check_convention(convention)
    y, size = as_symbols(y, alphabet_size)
    cols = table_columns(size, k)
    states = state_indices(y, k, size, convention)
    counts = np.bincount(states, minlength=cols * size).reshape(cols, size).T.copy()
    return _freeze(CountMatrix(k, size, counts, states.shape[0], convention))


def _table(m):
    if isinstance(m, CountMatrix):
        return m.table
    t = np.asarray(m, dtype=float)
    if t.ndim != 2:
        raise ValueError("count matrix must be 2-D (|Y| x |Y|^k)")
    return t


def entropy_vec(v) -> float:
    """Entropy in bits of the pmf proportional to ``v``; 0 for the zero vector."""
    v = np.asarray(v, dtype=float).ravel()
    if np.any(v < 0):
        raise ValueError("entropy_vec requires non-negative components")
    total = v.sum()
    if total == 0:
        return 0.0
    nz = v[v > 0]
    return float(np.sum(nz / total * np.log2(total / nz)))


def cond_entropy(m) -> float:
    """Conditional empirical entropy ``H(m)`` in bits per symbol.

    Accepts a :class:`CountMatrix` or any non-negative 2-D array laid out
    as ``(A, A**k)``.  Equals ``H_k(y)`` for ``m = count_matrix(y, k)``.
    """
    if isinstance(m, CountMatrix):
        c = m.counts
        scale = float(m.denominator)
    else:
        c = _table(m)
        scale = 1.0
    col = c.sum(axis=0)
    beta, ctx = np.nonzero(c)
    vals = c[beta, ctx].astype(float)
    h = np.sum(vals * np.log2(col[ctx] / vals)) / scale
    return float(max(h, 0.0))


def inflow_outflow(m):
    """Both sides of the stationarity condition, per context.

    ``outflow[b] = sum_beta m[beta, b]`` (mass of ``b`` as a context) and
    ``inflow[b] = sum_beta m[b_k, (beta, b_1..b_{k-1})]`` (mass of ``b`` as
    the trailing k symbols of a (k+1)-tuple).
    """
    t = _table(m)
    size, cols = t.shape
    outflow = t.sum(axis=0)
    # flat state vector indexed by s = ctx * A + beta; leading digit of s is
    # the oldest symbol, so summing it out leaves the trailing k symbols
    states = t.T.reshape(-1)
    inflow = states.reshape(size, cols).sum(axis=0)
    return outflow, inflow


def check_stationarity(m, tol: float = 1e-12):
    """Return ``(ok, max_violation)`` for the stationarity condition."""
    outflow, inflow = inflow_outflow(m)
    viol = float(np.max(np.abs(outflow - inflow))) if outflow.size else 0.0
    return viol <= tol, viol


def empirical_dist(x, k: int, alphabet_size=None) -> EmpiricalDist:
    """k-th order (cyclic) empirical distribution of ``x``."""
    if k < 1:
        raise ValueError("empirical_dist needs k >= 1")
    x, size = as_symbols(x, alphabet_size)
    cols = table_columns(size, k)
    states = state_indices(x, k - 1, size, "cyclic")
    probs = np.bincount(states, minlength=cols) / x.shape[0]
    return EmpiricalDist(k, size, probs)
