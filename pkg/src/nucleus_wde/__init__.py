"""Waveform development toolchain built around nucleus kernels and their flavors."""

__version__ = "0.1.0"
