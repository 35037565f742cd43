"""Hot numeric kernels, with optional numba acceleration.

Backend selection via the ``TRUSTSIM_BACKEND`` environment variable:
``numba`` (require numba), ``numpy`` (force the pure-numpy path), or
``auto`` (default: numba when importable). The two paths compute the
same quantities; reduction order may differ in the last ulp, so replay
determinism is guaranteed per backend.
"""

from __future__ import annotations

import math
import os

import numpy as np


def _pick_backend() -> str:
    choice = os.environ.get("TRUSTSIM_BACKEND", "auto").lower()
    if choice not in ("auto", "numba", "numpy"):
        raise ValueError(f"TRUSTSIM_BACKEND must be auto, numba or numpy (got {choice!r})")
    if choice == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if choice == "numba":
            raise
        return "numpy"
    return "numba"


BACKEND = _pick_backend()


# ---------------------------------------------------------------------------
# first_contact: earliest trajectory sample where two swept discs touch.
# ego_path (T,2); obs_paths (N,T,2); radii (N,) combined radii per object.
# Returns (N,) int64 sample indices, -1 where no contact within the horizon.

def _first_contact_np(ego_path: np.ndarray, obs_paths: np.ndarray, radii: np.ndarray) -> np.ndarray:
    delta = obs_paths - ego_path[None, :, :]
    d2 = delta[..., 0] ** 2 + delta[..., 1] ** 2
    hit = d2 <= (radii ** 2)[:, None]
    any_hit = hit.any(axis=1)
    first = hit.argmax(axis=1)
    return np.where(any_hit, first, -1).astype(np.int64)


# ---------------------------------------------------------------------------
# scr_superpose: sum of peak-normalized bi-exponential (Bateman) bumps.
# n samples at `rate` Hz; bump j starts at onsets[j] seconds with peak
# amplitude amps[j]. tau_fast < tau_slow are the rise/decay constants.

def _bateman_peak(tau_fast: float, tau_slow: float) -> tuple[float, float]:
    t_peak = math.log(tau_slow / tau_fast) * tau_fast * tau_slow / (tau_slow - tau_fast)
    peak = math.exp(-t_peak / tau_slow) - math.exp(-t_peak / tau_fast)
    return t_peak, peak


def _scr_superpose_np(n: int, rate: float, onsets: np.ndarray, amps: np.ndarray,
                      tau_fast: float, tau_slow: float) -> np.ndarray:
    out = np.zeros(n)
    _, peak = _bateman_peak(tau_fast, tau_slow)
    t = np.arange(n) / rate
    for onset, amp in zip(onsets, amps):
        if amp == 0.0:
            continue
        i0 = max(0, int(math.ceil(onset * rate)))
        if i0 >= n:
            continue
        # beyond ~8 slow time constants the bump is numerically gone
        i1 = min(n, i0 + int(8.0 * tau_slow * rate) + 1)
        dt = t[i0:i1] - onset
        out[i0:i1] += (amp / peak) * (np.exp(-dt / tau_slow) - np.exp(-dt / tau_fast))
    return out


if BACKEND == "numba":
    from numba import njit

    @njit(cache=True)
    def _first_contact_nb(ego_path, obs_paths, radii):  # pragma: no cover - jitted
        n_obj = obs_paths.shape[0]
        n_t = ego_path.shape[0]
        out = np.full(n_obj, -1, dtype=np.int64)
        for i in range(n_obj):
            r2 = radii[i] * radii[i]
            for k in range(n_t):
                dx = obs_paths[i, k, 0] - ego_path[k, 0]
                dy = obs_paths[i, k, 1] - ego_path[k, 1]
                if dx * dx + dy * dy <= r2:
                    out[i] = k
                    break
        return out

    @njit(cache=True)
    def _scr_superpose_nb(n, rate, onsets, amps, tau_fast, tau_slow):  # pragma: no cover
        out = np.zeros(n)
        t_peak = math.log(tau_slow / tau_fast) * tau_fast * tau_slow / (tau_slow - tau_fast)
        peak = math.exp(-t_peak / tau_slow) - math.exp(-t_peak / tau_fast)
        for j in range(onsets.shape[0]):
            amp = amps[j]
            if amp == 0.0:
                continue
            i0 = int(math.ceil(onsets[j] * rate))
            if i0 < 0:
                i0 = 0
            if i0 >= n:
                continue
            i1 = i0 + int(8.0 * tau_slow * rate) + 1
            if i1 > n:
                i1 = n
            scale = amp / peak
            for k in range(i0, i1):
                dt = k / rate - onsets[j]
                out[k] += scale * (math.exp(-dt / tau_slow) - math.exp(-dt / tau_fast))
        return out

    def first_contact(ego_path, obs_paths, radii):
        return _first_contact_nb(np.ascontiguousarray(ego_path),
                                 np.ascontiguousarray(obs_paths),
                                 np.ascontiguousarray(radii))

    def scr_superpose(n, rate, onsets, amps, tau_fast, tau_slow):
        return _scr_superpose_nb(n, float(rate), np.ascontiguousarray(onsets, dtype=np.float64),
                                 np.ascontiguousarray(amps, dtype=np.float64),
                                 float(tau_fast), float(tau_slow))
else:
    def first_contact(ego_path, obs_paths, radii):
        return _first_contact_np(np.asarray(ego_path, dtype=np.float64),
                                 np.asarray(obs_paths, dtype=np.float64),
                                 np.asarray(radii, dtype=np.float64))

    def scr_superpose(n, rate, onsets, amps, tau_fast, tau_slow):
        return _scr_superpose_np(int(n), float(rate), np.asarray(onsets, dtype=np.float64),
                                 np.asarray(amps, dtype=np.float64),
                                 float(tau_fast), float(tau_slow))
