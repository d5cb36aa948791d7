"""LZ78 incremental parsing as a concrete lossless length function.

Phrase ``j`` (1-indexed) costs ``ceil(log2 j)`` bits for the index of its
prefix phrase plus ``ceil(log2 |Y|)`` bits for the extension symbol.  If
the input ends inside a phrase that is already in the dictionary, the tail
is emitted as its parent phrase plus its last symbol.
"""
from dataclasses import dataclass

import numpy as np

from .empirical import as_symbols, cond_entropy, count_matrix


@dataclass
class LzParse:
    phrases: list  # (prefix index, extension symbol); index 0 is the empty phrase
    total_bits: int
    alphabet_size: int

    def decode(self) -> np.ndarray:
        table = [()]
        out = []
        for prefix, sym in self.phrases:
            phrase = table[prefix] + (sym,)
            table.append(phrase)
            out.extend(phrase)
        return np.array(out, dtype=np.int64)


def _ceil_log2(v: int) -> int:
    return (v - 1).bit_length()


def lz78_parse(y, alphabet_size=None) -> LzParse:
    y, size = as_symbols(y, alphabet_size)
    trie = {}
    phrases = []
    node = 0
    for sym in y.tolist():
        nxt = trie.get((node, sym))
        if nxt is None:
            phrases.append((node, sym))
            trie[(node, sym)] = len(phrases)
            node = 0
        else:
            node = nxt
    if node:
        # tail is a repeat of phrase `node`: re-emit it as (parent, last symbol)
        parent, last = phrases[node - 1]
        phrases.append((parent, last))
    sym_bits = _ceil_log2(size)
    total = sum(_ceil_log2(j) + sym_bits for j in range(1, len(phrases) + 1))
    return LzParse(phrases, total, size)


def lz78_length(y, alphabet_size=None) -> int:
    """Codeword length in bits."""
    return lz78_parse(y, alphabet_size).total_bits


def ziv_gap(y, k: int, alphabet_size=None) -> float:
    """``lz78_length(y) / n - H_k(y)``."""
    y, size = as_symbols(y, alphabet_size)
    return lz78_length(y, size) / y.shape[0] - cond_entropy(count_matrix(y, k, "cyclic", size))
