"""Counter-based random streams.

Every random quantity in the package (sketch entries, dither) is drawn from a
Philox stream whose key is derived from ``(seed, *tags)``. Entry ``p`` of a
row-major block always consumes the same counter position, so results do not
depend on evaluation order and blocks can be generated independently.
"""

import numpy as np

# stream tags, kept distinct so sketch and dither never share a key
SKETCH = 1
DITHER_LEFT = 2
DITHER_RIGHT = 3
ROTATION = 4
DITHER = 5
VERIFY = 6


def stream_key(seed, *tags):
    """Derive a 128-bit Philox key from an integer seed and integer tags."""
    seed = int(seed)
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    words = [seed & 0xFFFFFFFF, seed >> 32] + [int(t) for t in tags]
    return np.random.SeedSequence(words).generate_state(2, dtype=np.uint64)


def _generator(key, offset=0):
    # Philox advances in blocks of four 64-bit outputs
    block, rest = divmod(int(offset), 4)
    bitgen = np.random.Philox(key=key)
    if block:
        bitgen = bitgen.advance(block)
    gen = np.random.Generator(bitgen)
    if rest:
        gen.random(rest)
    return gen


def uniforms(key, shape, offset=0):
    """Uniform variates in [0, 1), one counter step per entry.

    ``offset`` skips that many entries, so a block starting at flat index
    ``offset`` matches the corresponding slice of a full draw.
    """
    shape = tuple(int(s) for s in np.atleast_1d(shape))
    n = int(np.prod(shape))
    gen = _generator(key, offset)
    return gen.random(n).reshape(shape)


def normals(key, shape, offset=0):
    """Standard normal variates by Box-Muller, two counter steps per entry."""
    shape = tuple(int(s) for s in np.atleast_1d(shape))
    n = int(np.prod(shape))
    u = _generator(key, 2 * offset).random(2 * n).reshape(n, 2)
    radius = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
    return (radius * np.cos(2.0 * np.pi * u[:, 1])).reshape(shape)
