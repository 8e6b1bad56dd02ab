#!/usr/bin/env python3
"""Embed a short message into an integer host and get it back.

The stego sequence is an exact rearrangement of the host, so its histogram
(and therefore any first-order statistic a warden might test) is untouched.
"""
import numpy as np

from permstego import Message, StegoKey, capacity_bits, compute_histogram, perm_decode, perm_encode

rng = np.random.default_rng(0)
x = rng.integers(0, 16, size=120)
hist = compute_histogram(x)
print("host:      ", x[:20], "...")
print("support:   ", hist.values)
print("counts:    ", hist.counts)

c = capacity_bits(hist)
print(f"\ncapacity:   {c} bits in {len(x)} samples "
      f"({c / len(x):.3f} bits/element)")

payload = Message.from_bytes(b"hello, warden!")
print(f"embedding:  {len(payload)} payload bits")

y = perm_encode(x, payload)
print("stego:     ", y[:20], "...")

hy = compute_histogram(y)
assert np.array_equal(hy.values, hist.values) and np.array_equal(hy.counts, hist.counts)
print("histogram preserved exactly:", True)

recovered = perm_decode(y)
print("recovered: ", recovered.to_bytes()[: len(b'hello, warden!')])

# a shared secret permutation of the histogram bins keeps the mapping private
key = StegoKey([rng.permutation(hist.q), rng.permutation(hist.q)])
y_keyed = perm_encode(x, payload, key=key)
wrong = perm_decode(y_keyed)                 # without the key
right = perm_decode(y_keyed, key=key)        # with the key
print("\nkeyed embed, decoded without key:", wrong.to_bytes()[:14])
print("keyed embed, decoded with key:   ", right.to_bytes()[:14])
