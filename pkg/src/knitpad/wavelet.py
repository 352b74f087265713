"""Orthogonal discrete wavelet transform with symmetric boundary extension.

Implements the Symlet-4 filter bank (8 taps, 4 vanishing moments) with
half-sample symmetric extension, the same boundary convention used by
standard wavelet toolboxes. Analysis and synthesis are exact inverses of
each other (perfect reconstruction to floating-point precision).
"""

import numpy as np

# Symlet-4 decomposition low-pass filter. The high-pass and the two
# reconstruction filters follow from the quadrature-mirror relations.
SYM4_DEC_LO = np.array([
    -0.07576571478927333,
    -0.02963552764599851,
    0.49761866763201545,
    0.8037387518059161,
    0.29785779560527736,
    -0.09921954357684722,
    -0.012603967262037833,
    0.0322231006040427,
])
_L = len(SYM4_DEC_LO)
SYM4_DEC_HI = np.array([(-1.0) ** k * SYM4_DEC_LO[_L - 1 - k] for k in range(_L)])
SYM4_REC_LO = SYM4_DEC_LO[::-1].copy()
SYM4_REC_HI = SYM4_DEC_HI[::-1].copy()


def max_depth(n: int) -> int:
    """Largest decomposition depth usable for a length-n signal."""
    if n < _L:
        return 0
    return int(np.floor(np.log2(n / (_L - 1))))


def _extend_symmetric(x, pad):
    # half-sample symmetric: ..., x1, x0 | x0, x1, ... | x_{n-1} | x_{n-1}, ...
    return np.concatenate([x[:pad][::-1], x, x[-pad:][::-1]])


def dwt(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Single-level sym4 analysis: returns (approximation, detail).

    Output length is (n + 7) // 2 for each band.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n < _L:
        raise ValueError(f"signal length {n} shorter than filter support {_L}")
    ext = _extend_symmetric(x, _L - 1)
    out_len = (n + _L - 1) // 2
    idx = _L + 2 * np.arange(out_len)
    ca = np.convolve(ext, SYM4_DEC_LO)[idx]
    cd = np.convolve(ext, SYM4_DEC_HI)[idx]
    return ca, cd


def idwt(ca: np.ndarray, cd: np.ndarray, out_len: int) -> np.ndarray:
    """Single-level sym4 synthesis; out_len is the pre-analysis length."""
    if len(ca) != len(cd):
        raise ValueError("approximation/detail length mismatch")
    up_a = np.zeros(2 * len(ca))
    up_d = np.zeros(2 * len(cd))
    up_a[::2] = ca
    up_d[::2] = cd
    rec = np.convolve(up_a, SYM4_REC_LO) + np.convolve(up_d, SYM4_REC_HI)
    start = _L - 2
    if start + out_len > len(rec):
        raise ValueError(f"cannot reconstruct {out_len} samples from {len(ca)} coefficients")
    return rec[start:start + out_len]


def wavedec(x: np.ndarray, depth: int) -> tuple[list[np.ndarray], list[int]]:
    """Multilevel analysis.

    Returns (coeffs, lengths): coeffs = [cA_depth, cD_depth, ..., cD_1]
    (coarsest first) and the per-level input lengths needed by waverec.
    """
    x = np.asarray(x, dtype=float)
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if depth > max_depth(len(x)):
        raise ValueError(f"depth {depth} infeasible for length {len(x)}")
    details = []
    lengths = []
    a = x
    for _ in range(depth):
        lengths.append(len(a))
        a, d = dwt(a)
        details.append(d)
    coeffs = [a] + details[::-1]
    return coeffs, lengths[::-1]


def waverec(coeffs: list[np.ndarray], lengths: list[int]) -> np.ndarray:
    """Inverse of wavedec."""
    if len(coeffs) != len(lengths) + 1:
        raise ValueError("coefficient/length bookkeeping mismatch")
    a = coeffs[0]
    for d, n in zip(coeffs[1:], lengths):
        a = idwt(a, d, n)
    return a
