"""Exhaustive-search reference solvers for tiny instances.

Every candidate ``y`` in ``Y^n`` is enumerated in lexicographic order (first
symbol most significant), in blocks, with counts computed vectorised per
block.  Argmin sets hold every candidate within ``SET_TOL`` of the minimum;
candidates sharing a type have bit-identical values, and distinct types
that tie mathematically may differ in the last ulp.
"""
import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .cost import CoeffMatrix, check_distortion, coeffs_from_counts, default_cap, hamming
from .empirical import CONVENTIONS, as_symbols, count_matrix, table_columns
from .errors import BudgetError
from .viterbi import viterbi_solve

ENUMERATION_BUDGET = 2 ** 24
SET_TOL = 1e-12
BLOCK = 2 ** 15


def _setup(x, d, size, convention):
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}, got {convention!r}")
    if d is None:
        x, size_x = as_symbols(x, size)
        size = size or size_x
        d = hamming(max(size_x, size), size)
    else:
        d = check_distortion(d)
        x, _ = as_symbols(x, d.shape[0])
        size = d.shape[1]
    n = x.shape[0]
    if size ** n > ENUMERATION_BUDGET:
        raise BudgetError(f"|Y|^n = {size}^{n} exceeds the enumeration budget of {ENUMERATION_BUDGET}")
    return x, d, size, n


def enumerate_sequences(n: int, size: int):
    """Yield blocks of candidate sequences, lexicographic order."""
    total = size ** n
    if total > ENUMERATION_BUDGET:
        raise BudgetError(f"|Y|^n = {size}^{n} exceeds the enumeration budget of {ENUMERATION_BUDGET}")
    powers = size ** np.arange(n - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, BLOCK):
        idx = np.arange(start, min(start + BLOCK, total), dtype=np.int64)
        yield (idx[:, None] // powers[None, :]) % size


def _block_states(block, k, size, convention):
    n = block.shape[1]
    if convention == "cyclic":
        ext = block[:, np.arange(-k, n) % n]
        stop = n
    else:
        if n <= k:
            raise ValueError(f"linear convention needs n > k (n={n}, k={k})")
        ext = block
        stop = n - k
    s = np.zeros((block.shape[0], stop), dtype=np.int64)
    for j in range(k + 1):
        s = s * size + ext[:, j:j + stop]
    return s


def _block_entropy(states, k, size):
    rows, npos = states.shape
    n_states = size * table_columns(size, k)
    flat = states + (np.arange(rows) * n_states)[:, None]
    counts = np.bincount(flat.ravel(), minlength=rows * n_states).reshape(rows, -1, size).astype(float)
    col = counts.sum(axis=2, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(counts > 0, counts * np.log2(col / np.where(counts > 0, counts, 1.0)), 0.0)
    return terms.reshape(rows, -1).sum(axis=1) / npos


def _search(x, d, size, n, score):
    best = np.inf
    keep = []
    for block in enumerate_sequences(n, size):
        vals = score(block)
        blk_min = vals.min()
        if blk_min < best - SET_TOL:
            keep = [(v, tuple(row)) for v, row in zip(vals, block) if v <= blk_min + SET_TOL]
            best = blk_min
        else:
            best = min(best, blk_min)
            keep.extend((v, tuple(row)) for v, row in zip(vals, block) if v <= best + SET_TOL)
        keep = [(v, row) for v, row in keep if v <= best + SET_TOL]
    return float(best), [row for _, row in keep]


def exhaustive_p1(x, k: int, alpha: float, d=None, convention="cyclic", alphabet_size=None):
    """Minimum of ``H_k(y) + alpha d_n(x, y)`` over all ``y`` and its argmin set."""
    x, d, size, n = _setup(x, d, alphabet_size, convention)

    def score(block):
        h = _block_entropy(_block_states(block, k, size, convention), k, size)
        return h + alpha * d[x[None, :], block].sum(axis=1) / n

    return _search(x, d, size, n, score)


def exhaustive_p2(x, lam: CoeffMatrix, alpha: float, d=None, convention="cyclic"):
    """Minimum of ``lam (.) m(y) + alpha d_n(x, y)`` over all ``y`` and its argmin set."""
    x, d, size, n = _setup(x, d, lam.alphabet_size, convention)
    weights = lam.state_weights

    def score(block):
        states = _block_states(block, lam.k, size, convention)
        return weights[states].sum(axis=1) / states.shape[1] + alpha * d[x[None, :], block].sum(axis=1) / n

    return _search(x, d, size, n, score)


@dataclass
class OracleReport:
    x: tuple
    k: int
    alpha: float
    cap: float
    convention: str
    min_p1: float
    argmin_set_p1: list
    min_p2: float
    argmin_set_p2: list
    lambda_used: CoeffMatrix = field(repr=False)
    equal_minima: bool
    s2_subset_s1: bool
    s2_contains_type_class: bool

    @property
    def ok(self) -> bool:
        return self.equal_minima and self.s2_subset_s1

    def to_text(self) -> str:
        seq = "".join(str(v) for v in self.x)
        lines = [
            f"x={seq} k={self.k} alpha={self.alpha:g} cap={self.cap:g} convention={self.convention}",
            f"  min P1 = {self.min_p1:.12f}  |S1| = {len(self.argmin_set_p1)}",
            f"  min P2 = {self.min_p2:.12f}  |S2| = {len(self.argmin_set_p2)}",
            f"  equal minima: {self.equal_minima}  S2 subset of S1: {self.s2_subset_s1}"
            f"  S2 holds type class: {self.s2_contains_type_class}",
        ]
        return "\n".join(lines)

    CSV_FIELDS = ("x", "k", "alpha", "cap", "convention", "min_p1", "min_p2", "size_s1", "size_s2",
                  "equal_minima", "s2_subset_s1", "s2_contains_type_class")

    def csv_row(self) -> dict:
        return {
            "x": "".join(str(v) for v in self.x),
            "k": self.k,
            "alpha": f"{self.alpha:.9g}",
            "cap": f"{self.cap:.9g}",
            "convention": self.convention,
            "min_p1": f"{self.min_p1:.12g}",
            "min_p2": f"{self.min_p2:.12g}",
            "size_s1": len(self.argmin_set_p1),
            "size_s2": len(self.argmin_set_p2),
            "equal_minima": int(self.equal_minima),
            "s2_subset_s1": int(self.s2_subset_s1),
            "s2_contains_type_class": int(self.s2_contains_type_class),
        }


def verify_theorem1(x, k: int, alpha: float, d=None, cap=32.0, convention="cyclic", tol=1e-9) -> OracleReport:
    """Check that coefficients built at a P1 minimiser make P2 equivalent.

    Takes the lexicographically first member ``z`` of the P1 argmin set,
    builds coefficients at ``m(z)`` and solves P2 exhaustively.
    """
    x_arr = np.asarray(x)
    min1, s1 = exhaustive_p1(x_arr, k, alpha, d, convention)
    size = d.shape[1] if d is not None else max(2, int(x_arr.max()) + 1)
    z = s1[0]
    mz = count_matrix(np.array(z), k, convention, size)
    lam = coeffs_from_counts(mz, cap)
    min2, s2 = exhaustive_p2(x_arr, lam, alpha, d, convention)
    s1_set = set(s1)
    same_type = {w for w in s1 if np.array_equal(count_matrix(np.array(w), k, convention, size).counts, mz.counts)}
    return OracleReport(
        x=tuple(int(v) for v in x_arr), k=k, alpha=float(alpha), cap=float(cap), convention=convention,
        min_p1=min1, argmin_set_p1=s1, min_p2=min2, argmin_set_p2=s2, lambda_used=lam,
        equal_minima=abs(min1 - min2) <= tol,
        s2_subset_s1=set(s2) <= s1_set,
        s2_contains_type_class=same_type <= set(s2),
    )


def phi(lam: CoeffMatrix, x, alpha: float, d=None, convention="linear", backend=None) -> float:
    """Minimum linearised cost over all reconstructions.

    The linear convention is solved by the Viterbi trellis; the cyclic one
    (which the trellis cannot express) by exhaustive search.
    """
    if convention == "linear":
        return viterbi_solve(x, lam, alpha, d, backend=backend)[1]
    return exhaustive_p2(x, lam, alpha, d, convention)[0]


@dataclass
class PhiLemmaReport:
    min_phi: float
    min_energy: float
    phi_at_optimum: float
    worst_gap: float
    n_coefficient_sets: int
    holds: bool


def phi_lemma_report(x, k: int, alpha: float, d=None, convention="linear", cap=None, tol=1e-9,
                     backend=None) -> PhiLemmaReport:
    """Enumerate ``Lambda(m(y))`` for every type and compare ``min phi`` with ``min energy``."""
    x_arr, d_mat, size, n = _setup(x, d, None, convention)
    if cap is None:
        cap = default_cap(n, size)
    min_e, s1 = exhaustive_p1(x_arr, k, alpha, d_mat, convention)
    seen = {}
    for block in enumerate_sequences(n, size):
        for row in block:
            counts = count_matrix(row, k, convention, size).counts
            seen.setdefault(counts.tobytes(), counts)
    phis = []
    for counts in seen.values():
        lam = coeffs_from_counts(counts.astype(float), cap)
        phis.append(phi(lam, x_arr, alpha, d_mat, convention, backend))
    star = coeffs_from_counts(count_matrix(np.array(s1[0]), k, convention, size), cap)
    at_star = phi(star, x_arr, alpha, d_mat, convention, backend)
    min_phi = min(phis)
    worst = min(p - min_e for p in phis)
    holds = abs(min_phi - min_e) <= tol and abs(at_star - min_e) <= tol and worst >= -tol
    return PhiLemmaReport(min_phi, min_e, at_star, worst, len(seen), holds)


def verify_phi_lemma(x, k: int, alpha: float, d=None, convention="linear", cap=None) -> bool:
    """True when ``min over L_d of phi`` equals the minimum energy and is attained at ``Lambda*``."""
    return phi_lemma_report(x, k, alpha, d, convention, cap).holds


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=OracleReport.CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for rep in reports:
        writer.writerow(rep.csv_row())
    return buf.getvalue()
