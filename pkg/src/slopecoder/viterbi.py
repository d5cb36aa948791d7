"""Exact minimisation of the linearised cost on the context trellis.

The state at position ``i`` (1-indexed, ``i >= k+1``) is the packed
(k+1)-tuple ``y_{i-k}..y_i``; its predecessors are the ``A`` states that
share its leading ``k`` symbols as their trailing ones.  The solver
minimises the *linear* convention cost

    lam (.) m_lin(y) + alpha * d_n(x, y)
      = [ n/(n-k) * sum_{i>k} lam[s_i] + alpha * sum_i d(x_i, y_i) ] / n

Stage one covers positions ``1..k+1`` jointly.  Sums are accumulated
unnormalised and divided by ``n`` once at the end.

Ties are broken towards the numerically smaller predecessor state and the
smaller terminal state, so results are deterministic and identical between
the numba and numpy backends (both perform the same float operations).
"""
import numpy as np

from ._accel import njit, resolve_backend
from .cost import CoeffMatrix, check_distortion, hamming
from .empirical import as_symbols, table_columns


def edge_weight(lam: CoeffMatrix, x, i: int, s: int, alpha: float, d=None) -> float:
    """Weight of entering state ``s`` at 1-indexed position ``i``.

    ``lam[b_{k+1}, b^k] + alpha * d(x_i, b_{k+1})`` where ``s`` packs
    ``b^{k+1}``.
    """
    x = np.asarray(x)
    if not lam.k + 1 <= i <= x.shape[0]:
        raise ValueError(f"position {i} outside [k+1, n] = [{lam.k + 1}, {x.shape[0]}]")
    d = hamming(lam.alphabet_size) if d is None else check_distortion(d)
    beta = s % lam.alphabet_size
    return float(lam.state_weights[s] + alpha * d[x[i - 1], beta])


def _prepare(x, lam, alpha, d):
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    size, k = lam.alphabet_size, lam.k
    n_states = size * table_columns(size, k)
    d = hamming(size) if d is None else check_distortion(d)
    if d.shape[1] != size:
        raise ValueError(f"distortion has {d.shape[1]} columns, reconstruction alphabet is {size}")
    x, _ = as_symbols(x, d.shape[0])
    n = x.shape[0]
    if n < k + 1:
        raise ValueError(f"sequence length {n} shorter than k+1 = {k + 1}")
    scale = n / (n - k)
    states = np.arange(n_states)
    lam_s = lam.state_weights
    # per source letter: stage weight scale*lam[s] + alpha*d(x, beta(s))
    wtab = np.ascontiguousarray(scale * lam_s[None, :] + alpha * d[:, states % size])
    dist0 = np.zeros(n_states)
    for j in range(k + 1):
        digit = (states // size ** (k - j)) % size
        dist0 += d[x[j], digit]
    init = scale * lam_s + alpha * dist0
    return x, n, k, size, wtab, init


@njit
def _forward_numba(x, wtab, init, k, size, keep):
    n = x.shape[0]
    n_states = init.shape[0]
    width = n_states // size
    stages = n - k
    back = np.zeros((stages, n_states), dtype=np.uint8)
    history = np.empty((stages if keep else 1, n_states))
    cost = init.copy()
    new = np.empty(n_states)
    if keep:
        history[0] = cost
    for t in range(1, stages):
        w = wtab[x[k + t]]
        for s in range(n_states):
            base = s // size
            best = cost[base]
            arg = 0
            for a in range(1, size):
                c = cost[a * width + base]
                if c < best:
                    best = c
                    arg = a
            new[s] = best + w[s]
            back[t, s] = arg
        cost, new = new, cost
        if keep:
            history[t] = cost
    return cost, back, history


@njit
def _backtrack_numba(back, final, k, size, n):
    n_states = final.shape[0]
    width = n_states // size
    s = 0
    for j in range(1, n_states):
        if final[j] < final[s]:
            s = j
    total = final[s]
    y = np.empty(n, dtype=np.int64)
    for t in range(back.shape[0] - 1, 0, -1):
        y[k + t] = s % size
        s = back[t, s] * width + s // size
    for j in range(k, -1, -1):
        y[j] = s % size
        s //= size
    return y, total


def _forward_numpy(x, wtab, init, k, size, keep):
    n = x.shape[0]
    n_states = init.shape[0]
    width = n_states // size
    stages = n - k
    back = np.zeros((stages, n_states), dtype=np.uint8)
    history = np.empty((stages if keep else 1, n_states))
    cost = init.copy()
    if keep:
        history[0] = cost
    for t in range(1, stages):
        # rows of the reshape are the leading (oldest) digit of the predecessor
        pred = cost.reshape(size, width)
        arg = pred.argmin(axis=0)
        best = pred[arg, np.arange(width)]
        cost = np.repeat(best, size) + wtab[x[k + t]]
        back[t] = np.repeat(arg, size)
        if keep:
            history[t] = cost
    return cost, back, history


def _backtrack_numpy(back, final, k, size, n):
    width = final.shape[0] // size
    s = int(np.argmin(final))
    total = final[s]
    y = np.empty(n, dtype=np.int64)
    for t in range(back.shape[0] - 1, 0, -1):
        y[k + t] = s % size
        s = int(back[t, s]) * width + s // size
    for j in range(k, -1, -1):
        y[j] = s % size
        s //= size
    return y, total


def viterbi_trellis(x, lam: CoeffMatrix, alpha: float, d=None, backend=None):
    """Full DP table: ``(costs, back)`` with one row per stage.

    ``costs[t, s]`` is the unnormalised minimum cumulative weight of a path
    ending in state ``s`` at position ``k + 1 + t``; ``back[t, s]`` is the
    leading symbol of the chosen predecessor.  Meant for inspection on small
    instances.
    """
    x, n, k, size, wtab, init = _prepare(x, lam, alpha, d)
    forward = _forward_numba if resolve_backend(backend) == "numba" else _forward_numpy
    _, back, history = forward(x, wtab, init, k, size, True)
    return history, back


def viterbi_solve(x, lam: CoeffMatrix, alpha: float, d=None, k=None, backend=None):
    """Minimise the linear-convention linearised cost exactly.

    Returns ``(y, cost)`` where ``cost`` equals
    ``linear_cost(lam, x, y, alpha, d, convention="linear")``.
    """
    if k is not None and k != lam.k:
        raise ValueError(f"order k={k} does not match coefficient matrix order {lam.k}")
    x, n, k, size, wtab, init = _prepare(x, lam, alpha, d)
    if resolve_backend(backend) == "numba":
        final, back, _ = _forward_numba(x, wtab, init, k, size, False)
        y, total = _backtrack_numba(back, final, k, size, n)
    else:
        final, back, _ = _forward_numpy(x, wtab, init, k, size, False)
        y, total = _backtrack_numpy(back, final, k, size, n)
    return y, float(total / n)
