"""Numpy tick kernel: the pure-Python fallback backend.

Both backends must execute the exact same arithmetic in the exact same
order so traces are bit-identical regardless of which one is loaded:

per tick T:
  1. deliver external events binned at T (event order), then spikes fired
     at T-1 (ascending slot order), as jumps on the synaptic currents;
  2. refractory slots: decrement counter, clamp membrane at reset;
     others: v <- v*alpha_m + k_exc*i_exc - k_inh*i_inh [+ (1-alpha_m)*exp
     term], where k_* is the exact one-tick response to a decaying unit
     current, so the tick map samples the continuous solution;
  3. decay both synaptic currents;
  4. slots updated in 2 that reached threshold fire at T (ascending order),
     reset and load their refractory counter; delivery happens at T+1.

Scatter adds use ``np.add.at`` whose accumulation order is the index order,
matching the C loop.  Keep any change here mirrored in ``_kernel.pyx``.
"""

from __future__ import annotations

import numpy as np

BACKEND = "py"


def run_ticks(tick0, n_ticks,
              alive, alpha_m, om_alpha_m, alpha_e, alpha_i, k_exc, k_inh,
              v_th, v_reset, delta_t, ref_ticks,
              v, i_exc, i_inh, refrac,
              syn_indptr, syn_post, syn_weight, syn_inh,
              ext_indptr, ext_src, pending):
    """Advance ``n_ticks`` ticks; returns (fire_ticks, fire_ids, new_pending)."""
    alive_b = alive.astype(bool)
    exp_mask = alive_b & (delta_t > 0.0)
    exp_any = bool(exp_mask.any())
    inh_b = syn_inh.astype(bool)

    out_ticks: list[np.ndarray] = []
    out_ids: list[np.ndarray] = []
    pending = np.asarray(pending, np.int32)

    for r in range(int(n_ticks)):
        # 1. synaptic delivery: externals in event order, then last tick's spikes
        lo, hi = int(ext_indptr[r]), int(ext_indptr[r + 1])
        sources = ext_src[lo:hi]
        if len(pending):
            sources = np.concatenate([sources, pending]) if len(sources) else pending
        if len(sources):
            segs = [np.arange(syn_indptr[s], syn_indptr[s + 1]) for s in sources]
            idx = np.concatenate(segs) if len(segs) > 1 else segs[0]
            if len(idx):
                sel_inh = inh_b[idx]
                exc_idx = idx[~sel_inh]
                inh_idx = idx[sel_inh]
                if len(exc_idx):
                    np.add.at(i_exc, syn_post[exc_idx], syn_weight[exc_idx])
                if len(inh_idx):
                    np.add.at(i_inh, syn_post[inh_idx], syn_weight[inh_idx])

        # 2. membrane update
        in_ref = alive_b & (refrac > 0)
        active = alive_b & ~in_ref
        refrac[in_ref] -= 1
        v[in_ref] = v_reset[in_ref]
        drive = k_exc * i_exc - k_inh * i_inh
        if exp_any:
            sel = exp_mask & active
            boost = np.zeros_like(drive)
            boost[sel] = delta_t[sel] * np.exp((v[sel] - v_th[sel]) / delta_t[sel])
            drive = drive + om_alpha_m * boost
        v_upd = v * alpha_m + drive
        v[active] = v_upd[active]

        # 3. current decay (post-update: drive saw start-of-tick values)
        i_exc *= alpha_e
        i_inh *= alpha_i

        # 4. threshold, reset, refractory load
        fired_mask = active & (v >= v_th)
        fired = np.nonzero(fired_mask)[0].astype(np.int32)
        if len(fired):
            v[fired_mask] = v_reset[fired_mask]
            refrac[fired_mask] = ref_ticks[fired_mask]
            out_ticks.append(np.full(len(fired), tick0 + r, np.int64))
            out_ids.append(fired)
        pending = fired

    if out_ticks:
        return np.concatenate(out_ticks), np.concatenate(out_ids), pending
    return np.empty(0, np.int64), np.empty(0, np.int32), pending
