"""FID synthesis from an eigendecomposition and its Fourier transform.

With ``A = V^dag Sx V`` and ``B = V^dag (Sx + i Sy) V`` in the eigenbasis,

    FID(t) = Tr(e^{-iHt} Sx e^{iHt} (Sx + i Sy)) = sum_ab A_ab B_ba e^{-i (l_a - l_b) t}

so only the transitions with a nonzero weight ``A_ab B_ba`` contribute. A lone
spin with ``H = (w/2) Z`` gives ``e^{iwt}/2``, a line at ``+w / 2 pi`` Hz.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InvalidInputError, ResourceLimitError
from .exact_diag import EigenDecomposition
from .pauli import DENSE_QUBIT_CAP

DEFAULT_POINTS = 4096
DEFAULT_WIDTH_PPM = 12.0
WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class FidSignal:
    points: np.ndarray        # complex samples
    spectral_width: float     # Hz
    times: np.ndarray         # seconds

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class Spectrum:
    hz: np.ndarray
    ppm: np.ndarray
    intensity: np.ndarray

    def __len__(self):
        return len(self.hz)

    def crop(self, ppm_low: float, ppm_high: float) -> Spectrum:
        """Keep only points with ``ppm_low <= ppm <= ppm_high``."""
        keep = (self.ppm >= ppm_low) & (self.ppm <= ppm_high)
        return Spectrum(self.hz[keep], self.ppm[keep], self.intensity[keep])


@dataclass(frozen=True)
class Peak:
    ppm: float
    hz: float
    intensity: float


def collective_spin_operators(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Dense ``sum_k S_kx`` and ``sum_k S_ky`` with ``S = sigma / 2``."""
    if n < 1:
        raise InvalidInputError("need at least one spin")
    if n > DENSE_QUBIT_CAP:
        raise ResourceLimitError(f"{n} spins exceeds dense cap {DENSE_QUBIT_CAP}")
    dim = 1 << n
    idx = np.arange(dim)
    sx = np.zeros((dim, dim), dtype=complex)
    sy = np.zeros((dim, dim), dtype=complex)
    for k in range(n):
        bit = 1 << (n - 1 - k)
        flipped = idx ^ bit
        # <x ^ bit| sigma_y |x> = i if bit of x is 0 else -i
        sx[flipped, idx] += 0.5
        sy[flipped, idx] += np.where(idx & bit, -0.5j, 0.5j)
    return sx, sy


def transition_lines(decomp: EigenDecomposition) -> tuple[np.ndarray, np.ndarray]:
    """Angular frequencies ``-(l_a - l_b)`` and complex weights of every active transition."""
    dim = len(decomp)
    n = dim.bit_length() - 1
    sx, sy = collective_spin_operators(n)
    v = decomp.eigenvectors
    a = v.conj().T @ sx @ v
    b = v.conj().T @ (sx + 1j * sy) @ v
    weights = a * b.T
    lam = decomp.eigenvalues
    omega = -(lam[:, None] - lam[None, :])
    keep = np.abs(weights) > WEIGHT_TOL
    return omega[keep], weights[keep]


def sample_times(d: int, spectral_width: float, convention: str = "dwell") -> np.ndarray:
    """``t_j = j / SW`` (dwell time). ``convention="literal"`` gives ``t_j = j * SW``."""
    if d < 2:
        raise InvalidInputError("an FID needs at least two points")
    if not spectral_width > 0:
        raise InvalidInputError("spectral width must be positive")
    j = np.arange(d, dtype=float)
    if convention == "dwell":
        return j / spectral_width
    if convention == "literal":
        return j * spectral_width
    raise InvalidInputError(f"unknown time convention {convention!r}")


def compute_fid(decomp: EigenDecomposition, d: int = DEFAULT_POINTS,
                spectral_width: float = 4800.0, convention: str = "dwell",
                t2: float | None = None) -> FidSignal:
    """Sample the FID at ``d`` points; optional ``exp(-t/T2)`` apodization."""
    times = sample_times(d, spectral_width, convention)
    omega, weights = transition_lines(decomp)
    fid = np.zeros(d, dtype=complex)
    chunk = max(1, (1 << 22) // max(len(omega), 1))
    for s in range(0, d, chunk):
        t = times[s:s + chunk]
        fid[s:s + chunk] = np.exp(1j * np.outer(t, omega)) @ weights
    if t2 is not None:
        if not t2 > 0:
            raise InvalidInputError("T2 must be positive")
        fid *= np.exp(-times / t2)
    return FidSignal(fid, float(spectral_width), times)


def fid_from_propagator(h: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Reference FID via ``e^{-iHt}`` built by scaling and squaring (no diagonalization)."""
    from scipy.linalg import expm

    h = np.asarray(h, dtype=complex)
    n = h.shape[0].bit_length() - 1
    sx, sy = collective_spin_operators(n)
    plus = sx + 1j * sy
    out = np.empty(len(times), dtype=complex)
    for j, t in enumerate(times):
        u = expm(-1j * h * t)
        out[j] = np.trace(u @ sx @ u.conj().T @ plus)
    return out


def fid_to_spectrum(fid: FidSignal, field_mhz: float, offset_ppm: float = 0.0,
                    mode: str = "magnitude", method: str = "fft") -> Spectrum:
    """Fourier transform to a centered Hz axis and a ppm axis ``Hz / B + offset``.

    ``mode`` is ``"magnitude"`` (default, phase insensitive) or ``"real"``.
    ``method="direct"`` runs the O(d^2) DFT kernel instead of numpy's FFT.
    """
    if not field_mhz > 0:
        raise InvalidInputError("field must be positive")
    x = np.ascontiguousarray(fid.points, dtype=complex)
    if method == "fft":
        spec = np.fft.fft(x)
    elif method == "direct":
        spec = _kernels.dft(x)
    else:
        raise InvalidInputError(f"unknown transform method {method!r}")
    spec = np.fft.fftshift(spec)
    hz = np.fft.fftshift(np.fft.fftfreq(len(x), d=1.0 / fid.spectral_width))
    if mode == "magnitude":
        inten = np.abs(spec)
    elif mode == "real":
        inten = spec.real
    else:
        raise InvalidInputError(f"unknown spectrum mode {mode!r}")
    return Spectrum(hz, hz / field_mhz + offset_ppm, inten)


def peak_list(s: Spectrum, threshold: float, relative: bool = False) -> list[Peak]:
    """Local maxima at or above ``threshold``, highest ppm first.

    With ``relative=True`` the threshold is a fraction of the tallest point.
    """
    if not threshold > 0:
        raise InvalidInputError("threshold must be positive")
    y = np.asarray(s.intensity)
    if y.size == 0:
        return []
    level = threshold * y.max() if relative else threshold
    left = np.concatenate(([-np.inf], y[:-1]))
    right = np.concatenate((y[1:], [-np.inf]))
    idx = np.nonzero((y > left) & (y >= right) & (y >= level))[0]
    peaks = [Peak(float(s.ppm[i]), float(s.hz[i]), float(y[i])) for i in idx]
    return sorted(peaks, key=lambda p: -p.ppm)


def default_spectral_width(field_mhz: float, width_ppm: float = DEFAULT_WIDTH_PPM) -> float:
    """Spectral width in Hz covering ``offset +- width_ppm / 2``."""
    return width_ppm * field_mhz


def group_doublets(peaks: list[Peak], max_split_hz: float) -> list[tuple[Peak, Peak]]:
    """Pair neighbouring peaks closer than ``max_split_hz`` (input sorted by ppm)."""
    out, i = [], 0
    while i < len(peaks) - 1:
        a, b = peaks[i], peaks[i + 1]
        if abs(a.hz - b.hz) <= max_split_hz:
            out.append((a, b))
            i += 2
        else:
            i += 1
    return out


def spectrum_csv_rows(s: Spectrum):
    yield ("hz", "ppm", "intensity")
    for h, p, v in zip(s.hz, s.ppm, s.intensity):
        yield (f"{h:.10g}", f"{p:.10g}", f"{v:.12g}")


def fid_csv_rows(fid: FidSignal):
    yield ("t_seconds", "re", "im")
    for t, z in zip(fid.times, fid.points):
        yield (f"{t:.12g}", f"{z.real:.12g}", f"{z.imag:.12g}")
