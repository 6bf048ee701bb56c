"""Reproducible counter-based randomness for parallel Monte Carlo.

Trials are grouped into fixed-size blocks; block i draws from a Philox
generator keyed by (root_seed, i).  Results aggregated in block order are
therefore identical no matter how blocks are distributed over workers.
"""

import numpy as np

BLOCK = 4096


def block_rng(root_seed, block_index):
    """Independent generator for one trial block."""
    seq = np.random.SeedSequence(entropy=int(root_seed), spawn_key=(int(block_index),))
    return np.random.Generator(np.random.Philox(seq))


def iter_blocks(root_seed, n_trials, block=BLOCK, indices=None):
    """Yield (block_index, n_in_block, generator) covering n_trials trials.

    With `indices` given, only those block indices are yielded (their trial
    counts are unchanged), which lets workers share a run deterministically.
    """
    i = 0
    done = 0
    wanted = None if indices is None else set(indices)
    while done < n_trials:
        n = min(block, n_trials - done)
        if wanted is None or i in wanted:
            yield i, n, block_rng(root_seed, i)
        done += n
        i += 1


def n_blocks(n_trials, block=BLOCK):
    return (n_trials + block - 1) // block


def split_blocks(n_blocks, n_workers):
    """Deterministic round-robin assignment of block indices to workers."""
    return [list(range(w, n_blocks, n_workers)) for w in range(n_workers)]
