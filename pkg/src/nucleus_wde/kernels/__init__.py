"""Reference flavors of the FFT nucleus, its genre members, and Q-format glue."""

from .fft import (
    CallCounter, UnsupportedSizeError, count_fft_calls, fft, fft_radix2, fft_radix4,
    is_power_of, stage_count,
)
from .fixedpoint import (
    Q15_MAX, Q15_MIN, convert_samples, float_to_q15, float_to_q31, q15_to_float, q31_to_float,
)
from .genre import dct2_via_fft, dht_via_fft, ifft

__all__ = [
    "CallCounter", "UnsupportedSizeError", "count_fft_calls", "fft", "fft_radix2", "fft_radix4",
    "is_power_of", "stage_count", "Q15_MAX", "Q15_MIN", "convert_samples", "float_to_q15",
    "float_to_q31", "q15_to_float", "q31_to_float", "dct2_via_fft", "dht_via_fft", "ifft",
]
