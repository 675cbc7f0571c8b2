"""Genre members of the FFT nucleus.

Each transform here is one FFT call wrapped in cheap pre- and
post-processing. The ``fft`` argument selects the flavor doing the call.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .fft import fft_radix2

FftFlavor = Callable[[np.ndarray], np.ndarray]


def _real_input(x) -> np.ndarray:
    a = np.asarray(x)
    if np.iscomplexobj(a):
        if np.any(a.imag != 0):
            raise ValueError("real transform given a signal with nonzero imaginary part")
        a = a.real
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 1:
        raise ValueError(f"expected a 1-D signal, got shape {a.shape}")
    return a


def ifft(X, fft: FftFlavor = fft_radix2) -> np.ndarray:
    """Inverse transform as conj -> forward FFT -> conj -> 1/N."""
    a = np.asarray(X, dtype=np.complex128)
    return np.conj(fft(np.conj(a))) / a.size


def dct2_via_fft(x, fft: FftFlavor = fft_radix2) -> np.ndarray:
    """Unnormalized DCT-II, X[k] = sum_n x[n] cos(pi*(n+1/2)*k/N).

    Even samples go to the front, odd samples reversed to the back; after one
    N-point FFT the k-th bin is rotated by exp(-j*pi*k/(2N)) and its real
    part kept.
    """
    a = _real_input(x)
    n = a.size
    v = np.concatenate([a[0::2], a[1::2][::-1]])
    V = fft(v.astype(np.complex128))
    twiddle = np.exp(-1j * np.pi * np.arange(n) / (2 * n))
    return np.real(twiddle * V)


def dht_via_fft(x, fft: FftFlavor = fft_radix2) -> np.ndarray:
    """Discrete Hartley transform: Re(FFT(x)) - Im(FFT(x)) for real x."""
    a = _real_input(x)
    X = fft(a.astype(np.complex128))
    return X.real - X.imag
