"""Differentiation and wavelet denoising of kinematic series.

Series are 1-D float arrays sampled every ``DT`` seconds.
"""

import logging
from functools import lru_cache
from typing import Sequence

import numpy as np
import pywt

from utils.exceptions import ConfigInfeasible, TooShort
from utils.validators import DT, DenoiseConfig, TrajectoryRecord

logger = logging.getLogger(__name__)


def differentiate(values: Sequence[float], dt: float = DT) -> np.ndarray:
    """Central differences inside, one-sided differences at both ends.

    Raises:
        TooShort: fewer than two samples
    """
    arr = np.asarray(values, dtype=float)
    if arr.size < 2:
        raise TooShort(f"differentiation needs at least 2 samples, got {arr.size}")
    return np.gradient(arr, dt, edge_order=1)


def max_denoise_level(length: int, wavelet: str) -> int:
    """Deepest decomposition the signal length supports for ``wavelet``."""
    return pywt.dwt_max_level(length, pywt.Wavelet(wavelet).dec_len)


@lru_cache(maxsize=32)
def approximation_basis(length: int, wavelet: str, boundary: str, levels: int) -> np.ndarray:
    """Orthonormal basis of every zero-detail reconstruction of ``length`` samples.

    Column k of the raw basis is the inverse transform of the k-th unit
    approximation coefficient with all detail bands zero, truncated to
    ``length``. The returned columns span the same space.
    """
    template = pywt.wavedec(np.zeros(length), wavelet, mode=boundary, level=levels)
    zero_details = [np.zeros_like(detail) for detail in template[1:]]
    n_approx = len(template[0])

    raw = np.empty((length, n_approx))
    for k in range(n_approx):
        unit = np.zeros(n_approx)
        unit[k] = 1.0
        raw[:, k] = pywt.waverec([unit] + zero_details, wavelet, mode=boundary)[:length]

    u, s, _ = np.linalg.svd(raw, full_matrices=False)
    rank = int(np.count_nonzero(s > s.max() * max(raw.shape) * np.finfo(float).eps))
    basis = u[:, :rank].copy()
    basis.setflags(write=False)
    return basis


def dwt_denoise(values: Sequence[float], config: DenoiseConfig, keep_details: bool = False) -> np.ndarray:
    """Multilevel DWT with every detail band set to zero, then inverse DWT.

    The approximation coefficients are the least-squares fit of the input
    in the zero-detail reconstruction space, so the output is the orthogonal
    projection onto that space. For an orthogonal boundary this equals
    forward transform, zeroing and inverse transform. The operator is
    idempotent and never adds energy.

    Args:
        values: Input series
        config: Wavelet, depth and boundary extension
        keep_details: Skip the zeroing (pure forward/inverse round trip)

    Returns:
        Series of the same length as ``values``

    Raises:
        ConfigInfeasible: depth exceeds what the length supports
    """
    arr = np.asarray(values, dtype=float)
    max_level = max_denoise_level(arr.size, config.wavelet)
    if config.levels > max_level:
        raise ConfigInfeasible(
            f"{config.levels} levels of {config.wavelet} need a longer signal than {arr.size} samples "
            f"(max {max_level})"
        )

    if keep_details:
        coeffs = pywt.wavedec(arr, config.wavelet, mode=config.boundary, level=config.levels)
        return pywt.waverec(coeffs, config.wavelet, mode=config.boundary)[: arr.size]

    basis = approximation_basis(arr.size, config.wavelet, config.boundary, config.levels)
    return basis @ (basis.T @ arr)


def denoise_trajectory(record: TrajectoryRecord, config: DenoiseConfig) -> TrajectoryRecord:
    """Denoise the speed profile and refresh acceleration.

    With ``config.acceleration == "rederive"`` the new acceleration is the
    derivative of the denoised speed. With ``"independent"`` the stored
    acceleration is denoised on its own. Positions and context are untouched.
    """
    speeds = dwt_denoise(record.speeds(), config)
    if config.acceleration == "independent":
        accelerations = dwt_denoise(record.accelerations(), config)
    else:
        accelerations = differentiate(speeds)
    logger.debug(f"Denoised {record.segment_id} ({config.wavelet}, {config.levels} levels)")
    return record.with_kinematics(speeds, accelerations)
