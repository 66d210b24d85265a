"""Numpy implementation of the sampling kernels.

This is the fallback backend selected when the compiled extension is not
available.  Both backends implement the identical counter-based scheme:

    per-trial seed   = mix(master + (trial + 1) * GOLDEN)
    per-edge uniform = mix(trial_seed + (counter + 1) * GOLDEN) >> 11,
                       scaled to [0, 1)

where mix is the 64-bit splitmix finalizer.  A sample is therefore a pure
function of (master seed, trial, counter), independent of evaluation
order, chunking and worker count.
"""

from __future__ import annotations

import numpy as np

from ..errors import Overflow

BACKEND = "numpy"

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_ONE = np.uint64(1)
_U53 = 2.0**-53
_INT64_MAX = 2**63 - 1


def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def _at(state, index):
    return _mix(state + (index + _ONE) * _GOLDEN)


def derive_seeds(seed: int, lo: int, hi: int) -> np.ndarray:
    """Per-trial sub-seeds for trials lo..hi-1 under a master seed."""
    idx = np.arange(lo, hi, dtype=np.uint64)
    return _at(np.uint64(seed & 0xFFFFFFFFFFFFFFFF), idx)


def derive_seed(seed: int, index: int) -> int:
    return int(derive_seeds(seed, index, index + 1)[0])


def uniform_grid(tseeds: np.ndarray, counters: np.ndarray) -> np.ndarray:
    """Uniforms in [0,1) for every (trial seed, counter) combination."""
    ts = np.asarray(tseeds, dtype=np.uint64)
    cs = np.asarray(counters, dtype=np.uint64)
    h = _at(ts[:, None], cs[None, :])
    return (h >> np.uint64(11)).astype(np.float64) * _U53


def pair_uniforms(tseeds: np.ndarray, counters: np.ndarray) -> np.ndarray:
    """Uniforms for aligned (trial seed, counter) pairs."""
    ts = np.asarray(tseeds, dtype=np.uint64)
    cs = np.asarray(counters, dtype=np.uint64)
    h = _at(ts, cs)
    return (h >> np.uint64(11)).astype(np.float64) * _U53


def _invcdf(cum: np.ndarray, u: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(cum, u, side="right")
    return np.minimum(idx, cum.size - 1).astype(np.int64)


def symbol_grid(tseeds, counters, cum) -> np.ndarray:
    return _invcdf(np.asarray(cum, dtype=np.float64), uniform_grid(tseeds, counters))


def pair_symbols(tseeds, counters, cum) -> np.ndarray:
    return _invcdf(np.asarray(cum, dtype=np.float64), pair_uniforms(tseeds, counters))


def _level_layout(first_deg: int, rest_deg: int, depth: int):
    widths = [1]
    offs = [0]
    for n in range(1, depth + 1):
        widths.append(first_deg if n == 1 else widths[-1] * rest_deg)
        offs.append(offs[-1] + widths[-2])
    top = 2 * (offs[depth] + widths[depth] - 1) + 1
    if top > _INT64_MAX:
        raise Overflow(f"edge counters at depth {depth} exceed int64")
    return widths, offs


# Cap on (trials x level width) scratch arrays; chunking has no effect on
# results because every trial is computed elementwise.
_CHUNK_CELLS = 1 << 22


def tree_level_sums(
    first_deg: int,
    rest_deg: int,
    depth: int,
    seed: int,
    t_lo: int,
    t_hi: int,
    cum_toward: np.ndarray,
    cum_away: np.ndarray,
    val_toward: np.ndarray,
    val_away: np.ndarray,
    scale: float,
) -> np.ndarray:
    """Per-trial, per-level sums of exp(scale * S_v) over the truncated tree.

    S_v accumulates, along the root-to-v path, one draw from the toward law
    and one from the away law per geometric edge.  Output has shape
    (t_hi - t_lo, depth + 1); column 0 is the root level, identically 1.
    """
    cum_t = np.asarray(cum_toward, dtype=np.float64)
    cum_a = np.asarray(cum_away, dtype=np.float64)
    val_t = np.asarray(val_toward, dtype=np.float64)
    val_a = np.asarray(val_away, dtype=np.float64)

    ntr = t_hi - t_lo
    out = np.empty((ntr, depth + 1), dtype=np.float64)
    out[:, 0] = 1.0
    if depth == 0 or ntr == 0:
        return out

    widths, offs = _level_layout(first_deg, rest_deg, depth)
    tseeds = derive_seeds(seed, t_lo, t_hi)
    chunk = max(1, _CHUNK_CELLS // widths[depth])
    two = np.uint64(2)

    for c0 in range(0, ntr, chunk):
        c1 = min(ntr, c0 + chunk)
        ts = tseeds[c0:c1][:, None]
        s_prev = np.zeros((c1 - c0, 1), dtype=np.float64)
        for n in range(1, depth + 1):
            w = widths[n]
            vids = np.uint64(offs[n]) + np.arange(w, dtype=np.uint64)
            i_t = _invcdf(cum_t, (_at(ts, two * vids[None, :]) >> np.uint64(11)).astype(np.float64) * _U53)
            i_a = _invcdf(cum_a, (_at(ts, two * vids[None, :] + _ONE) >> np.uint64(11)).astype(np.float64) * _U53)
            inc = val_t[i_t] + val_a[i_a]
            if n == 1:
                parents = np.zeros(w, dtype=np.intp)
            else:
                parents = np.arange(w, dtype=np.intp) // rest_deg
            s_prev = s_prev[:, parents] + inc
            out[c0:c1, n] = np.exp(scale * s_prev).sum(axis=1)
    return out
