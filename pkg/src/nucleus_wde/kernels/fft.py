"""Reference FFT flavors (radix-2 and radix-4 decimation in time).

Forward transforms are unnormalized, X[k] = sum_n x[n] exp(-2j*pi*n*k/N).
Every call is reported to the active :func:`count_fft_calls` counter, which
is how genre members prove they reuse the nucleus.
"""

from __future__ import annotations

import contextlib
import contextvars
from dataclasses import dataclass
from typing import Iterator

import numpy as np


class UnsupportedSizeError(ValueError):
    pass


@dataclass
class CallCounter:
    calls: int = 0
    by_flavor: dict | None = None

    def record(self, flavor: str) -> None:
        self.calls += 1
        if self.by_flavor is None:
            self.by_flavor = {}
        self.by_flavor[flavor] = self.by_flavor.get(flavor, 0) + 1


_active_counter: contextvars.ContextVar[CallCounter | None] = contextvars.ContextVar(
    "fft_call_counter", default=None)


@contextlib.contextmanager
def count_fft_calls() -> Iterator[CallCounter]:
    """Count FFT-nucleus invocations made inside the ``with`` block."""
    counter = CallCounter()
    token = _active_counter.set(counter)
    try:
        yield counter
    finally:
        _active_counter.reset(token)


def _record(flavor: str) -> None:
    counter = _active_counter.get()
    if counter is not None:
        counter.record(flavor)


def is_power_of(n: int, base: int) -> bool:
    if n < 1:
        return False
    while n % base == 0:
        n //= base
    return n == 1


def stage_count(n: int, radix: int) -> int:
    """Number of butterfly stages of a single-radix FFT of size ``n``."""
    if radix not in (2, 4) or not is_power_of(n, radix) or n < radix:
        raise UnsupportedSizeError(f"size {n} is not a power of {radix}")
    stages = 0
    while n > 1:
        n //= radix
        stages += 1
    return stages


def _digit_reversal(n: int, radix: int) -> np.ndarray:
    digits = stage_count(n, radix)
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for _ in range(digits):
        rev = rev * radix + idx % radix
        idx //= radix
    return rev


def _as_signal(x) -> np.ndarray:
    a = np.asarray(x, dtype=np.complex128)
    if a.ndim != 1:
        raise ValueError(f"expected a 1-D signal, got shape {a.shape}")
    return a


def fft_radix2(x) -> np.ndarray:
    a = _as_signal(x)
    n = a.size
    if n < 2 or not is_power_of(n, 2):
        raise UnsupportedSizeError(f"radix-2 FFT needs a power-of-two size >= 2, got {n}")
    _record("radix2")
    a = a[_digit_reversal(n, 2)]
    m = 2
    while m <= n:
        half = m // 2
        w = np.exp(-2j * np.pi * np.arange(half) / m)
        blocks = a.reshape(-1, m)
        even = blocks[:, :half]
        odd = blocks[:, half:] * w
        a = np.concatenate([even + odd, even - odd], axis=1).reshape(n)
        m *= 2
    return a


def fft_radix4(x) -> np.ndarray:
    a = _as_signal(x)
    n = a.size
    if n < 4 or not is_power_of(n, 4):
        raise UnsupportedSizeError(f"radix-4 FFT needs a power-of-four size >= 4, got {n}")
    _record("radix4")
    a = a[_digit_reversal(n, 4)]
    m = 4
    while m <= n:
        q = m // 4
        k = np.arange(q)
        blocks = a.reshape(-1, m)
        t0 = blocks[:, :q]
        t1 = blocks[:, q:2 * q] * np.exp(-2j * np.pi * k / m)
        t2 = blocks[:, 2 * q:3 * q] * np.exp(-4j * np.pi * k / m)
        t3 = blocks[:, 3 * q:] * np.exp(-6j * np.pi * k / m)
        s02, d02 = t0 + t2, t0 - t2
        s13, d13 = t1 + t3, -1j * (t1 - t3)
        a = np.concatenate([s02 + s13, d02 + d13, s02 - s13, d02 - d13], axis=1).reshape(n)
        m *= 4
    return a


def fft(x) -> np.ndarray:
    """FFT nucleus entry point; uses radix-4 when the size allows it."""
    n = np.size(x)
    if n >= 4 and is_power_of(n, 4):
        return fft_radix4(x)
    return fft_radix2(x)
