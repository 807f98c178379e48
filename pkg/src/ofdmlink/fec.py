"""Rate-1/2 convolutional code, constraint length 7, hard-decision Viterbi.

Generators are the standard octal 171/133 pair.  The encoder starts in the
all-zero state, appends six zero tail bits, and emits the 171 output before
the 133 output for every input bit.  The decoder is terminated at the zero
state and breaks metric ties toward the lower-numbered predecessor state.
"""

from dataclasses import dataclass

import numpy as np

from .errors import FramingError

__all__ = ["ConvCodeSpec", "DEFAULT_CODE", "conv_encode", "viterbi_decode"]


@dataclass(frozen=True)
class ConvCodeSpec:
    constraint_length: int = 7
    generators: tuple = (0o171, 0o133)

    @property
    def n_states(self):
        return 1 << (self.constraint_length - 1)

    @property
    def tail_bits(self):
        return self.constraint_length - 1

    def generator_taps(self):
        k = self.constraint_length
        return [np.array([(g >> i) & 1 for i in range(k)], dtype=np.uint8)
                for g in self.generators]


DEFAULT_CODE = ConvCodeSpec()


def conv_encode(bits, spec=DEFAULT_CODE):
    """Encode with zero tail; output 2 * (len(bits) + 6) coded bits."""
    bits = np.asarray(bits, dtype=np.uint8)
    padded = np.concatenate([bits, np.zeros(spec.tail_bits, dtype=np.uint8)])
    out = np.empty((len(padded), 2), dtype=np.uint8)
    for j, taps in enumerate(spec.generator_taps()):
        # binary convolution of the message with the generator taps
        out[:, j] = np.convolve(padded, taps)[: len(padded)] % 2
    return out.ravel()


def _trellis(spec):
    """Per-destination-state predecessor table and expected output symbols."""
    n = spec.n_states
    dest = np.arange(n)
    bit = dest & 1
    pred0 = dest >> 1
    pred1 = (dest >> 1) | (n >> 1)
    g1, g2 = spec.generators

    def out_sym(pred, b):
        reg = (pred << 1) | b
        o1 = np.array([bin(r & g1).count("1") & 1 for r in reg])
        o2 = np.array([bin(r & g2).count("1") & 1 for r in reg])
        return (o1 << 1) | o2

    return bit, pred0, pred1, out_sym(pred0, bit), out_sym(pred1, bit)


def viterbi_decode(coded, spec=DEFAULT_CODE):
    """Hard-decision maximum-likelihood decode of a zero-terminated block."""
    coded = np.asarray(coded, dtype=np.uint8)
    if len(coded) % 2 != 0:
        raise FramingError(f"coded length {len(coded)} is odd")
    if len(coded) < 2 * spec.tail_bits:
        raise FramingError(f"coded length {len(coded)} shorter than the tail")
    n_steps = len(coded) // 2
    rx_sym = (coded[0::2].astype(np.int64) << 1) | coded[1::2]

    bit, pred0, pred1, sym0, sym1 = _trellis(spec)
    # Hamming distance between 2-bit symbols, as a lookup table
    popcount = np.array([0, 1, 1, 2])
    bm0 = popcount[sym0[None, :] ^ rx_sym[:, None]]
    bm1 = popcount[sym1[None, :] ^ rx_sym[:, None]]

    big = np.iinfo(np.int64).max // 2
    pm = np.full(spec.n_states, big, dtype=np.int64)
    pm[0] = 0
    choices = np.empty((n_steps, spec.n_states), dtype=np.uint8)
    for t in range(n_steps):
        m0 = pm[pred0] + bm0[t]
        m1 = pm[pred1] + bm1[t]
        take1 = m1 < m0  # ties go to pred0, the lower-numbered predecessor
        choices[t] = take1
        pm = np.where(take1, m1, m0)

    state = 0  # zero-terminated
    decoded = np.empty(n_steps, dtype=np.uint8)
    for t in range(n_steps - 1, -1, -1):
        decoded[t] = state & 1
        state = pred1[state] if choices[t, state] else pred0[state]
    return decoded[: n_steps - spec.tail_bits]
