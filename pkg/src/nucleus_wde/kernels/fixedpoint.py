"""Saturating Q15/Q31 conversions used by format glue."""

from __future__ import annotations

import numpy as np

from ..model import DataFormat, FormatKind, Rounding

Q15_MIN, Q15_MAX = -(1 << 15), (1 << 15) - 1
Q31_MIN, Q31_MAX = -(1 << 31), (1 << 31) - 1


def _quantize(x, frac_bits: int, lo: int, hi: int, rounding: Rounding):
    scaled = np.asarray(x, dtype=np.float64) * float(1 << frac_bits)
    if rounding is Rounding.NEAREST:
        # half away from zero, the usual DSP convention
        q = np.sign(scaled) * np.floor(np.abs(scaled) + 0.5)
    else:
        q = np.trunc(scaled)
    return np.clip(q, lo, hi).astype(np.int64)


def float_to_q15(x, rounding: Rounding = Rounding.NEAREST):
    """Quantize to Q15. Scalars give an ``int``, arrays an int64 array.

    Out-of-range input saturates to [-32768, 32767].
    """
    q = _quantize(x, 15, Q15_MIN, Q15_MAX, rounding)
    return int(q) if q.ndim == 0 else q


def q15_to_float(q):
    r = np.asarray(q, dtype=np.float64) / float(1 << 15)
    return float(r) if r.ndim == 0 else r


def float_to_q31(x, rounding: Rounding = Rounding.NEAREST):
    q = _quantize(x, 31, Q31_MIN, Q31_MAX, rounding)
    return int(q) if q.ndim == 0 else q


def q31_to_float(q):
    r = np.asarray(q, dtype=np.float64) / float(1 << 31)
    return float(r) if r.ndim == 0 else r


def convert_samples(data, src: DataFormat, dst: DataFormat) -> np.ndarray:
    """Functional model of a glue task: re-encode ``data`` from ``src`` to ``dst``.

    Fixed-point data is carried as integer arrays, float data as float or
    complex arrays. Complex data converted to a fixed-point kind keeps the
    complex shape, quantizing real and imaginary parts separately.
    """
    a = np.asarray(data)
    if src.kind is FormatKind.Q15:
        values = q15_to_float(a)
    elif src.kind is FormatKind.Q31:
        values = q31_to_float(a)
    else:
        values = a.astype(np.complex128 if src.kind is FormatKind.CFLOAT32 else np.float64)

    if dst.kind is FormatKind.FLOAT32:
        if np.iscomplexobj(values):
            if np.any(np.imag(values) != 0):
                raise ValueError("cannot convert complex samples to float32")
            values = np.real(values)
        return np.asarray(values, dtype=np.float32)
    if dst.kind is FormatKind.CFLOAT32:
        return np.asarray(values, dtype=np.complex64)
    quant = float_to_q15 if dst.kind is FormatKind.Q15 else float_to_q31
    if np.iscomplexobj(values):
        return quant(np.real(values), dst.rounding) + 1j * quant(np.imag(values), dst.rounding)
    return np.asarray(quant(values, dst.rounding))
