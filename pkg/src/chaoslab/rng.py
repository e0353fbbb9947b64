"""Counter-based random number streams for reproducible parallel Monte Carlo.

Every stochastic operation in the package takes an explicit
``numpy.random.Generator``.  Streams are derived from a 64-bit master
seed and a chain index through the Philox counter-based generator, so
the stream consumed by chain ``i`` is a pure function of
``(master_seed, i)`` and cannot depend on scheduling or on how many
chains run beside it.
"""

from __future__ import annotations

import numpy as np

__all__ = ["chain_stream", "split_chain_sizes"]


def chain_stream(master_seed: int, chain_index: int = 0) -> np.random.Generator:
    """Return the generator for one chain of a seeded experiment."""
    if not 0 <= int(master_seed) < 2**64:
        raise ValueError("master_seed must fit in an unsigned 64-bit integer")
    if chain_index < 0:
        raise ValueError("chain_index must be nonnegative")
    key = np.array([master_seed, chain_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def split_chain_sizes(n_total: int, chains: int) -> list[int]:
    """Partition ``n_total`` samples over ``chains`` in fixed order.

    The first ``n_total % chains`` chains get one extra sample, so the
    layout is a pure function of (n_total, chains).
    """
    if n_total < 0 or chains < 1:
        raise ValueError("need n_total >= 0 and chains >= 1")
    base, extra = divmod(n_total, chains)
    return [base + (1 if i < extra else 0) for i in range(chains)]
