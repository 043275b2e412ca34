"""Deterministic random-stream derivation.

Every stochastic component draws from a generator derived from the global
seed plus a small integer path, e.g. ``spawn_rng(seed, STREAM_REFERENCE,
outer_iter, modality)``.  The scheme is a plain ``numpy.random.SeedSequence``
over the entropy list ``[seed, *path]``; it is stable across runs and
releases and keeps independent components on independent streams.

Stream tags (first path element):
    1  encoder/discriminator parameter initialization
    2  reference samples for the normality push
    3  minibatch sampling inside encoder updates
    4  discriminator minibatch sampling
    5  permutation thresholds
    6  synthetic data generation
    7  benchmark replicates (second element is the replicate index)
    8  train/validation/test splits
    9  objective-log row subsampling
"""

import numpy as np

STREAM_INIT = 1
STREAM_REFERENCE = 2
STREAM_BATCH = 3
STREAM_DISC = 4
STREAM_PERM = 5
STREAM_SYNTH = 6
STREAM_REPLICATE = 7
STREAM_SPLIT = 8
STREAM_EVAL = 9


def spawn_rng(seed: int, *path: int) -> np.random.Generator:
    """Generator for the stream identified by ``seed`` and an integer path."""
    entropy = [int(seed) & 0xFFFFFFFF] + [int(p) & 0xFFFFFFFF for p in path]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def derive_seed(seed: int, *path: int) -> int:
    """Integer sub-seed for the stream identified by ``seed`` and a path."""
    entropy = [int(seed) & 0xFFFFFFFF] + [int(p) & 0xFFFFFFFF for p in path]
    ss = np.random.SeedSequence(entropy)
    return int(ss.generate_state(1, dtype=np.uint64)[0] & 0x7FFFFFFF)


def replicate_seed(seed: int, index: int) -> int:
    """Root seed for replicate ``index``, stable across pool widths."""
    return derive_seed(seed, STREAM_REPLICATE, index)
