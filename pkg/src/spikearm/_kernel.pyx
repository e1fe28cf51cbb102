# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled tick kernel: hot-loop twin of ``_kernel_py``.

The two backends must stay operation-for-operation identical so traces are
bit-identical (the extension is built with -ffp-contract=off for this
reason).  See the fallback module for the normative step ordering.
"""

from libc.math cimport exp
from libc.stdint cimport int64_t, int32_t, uint8_t

import numpy as np

BACKEND = "c"


def run_ticks(long long tick0, long long n_ticks,
              uint8_t[::1] alive, double[::1] alpha_m, double[::1] om_alpha_m,
              double[::1] alpha_e, double[::1] alpha_i,
              double[::1] k_exc, double[::1] k_inh,
              double[::1] v_th, double[::1] v_reset, double[::1] delta_t,
              int32_t[::1] ref_ticks,
              double[::1] v, double[::1] i_exc, double[::1] i_inh,
              int32_t[::1] refrac,
              int64_t[::1] syn_indptr, int32_t[::1] syn_post,
              double[::1] syn_weight, uint8_t[::1] syn_inh,
              int64_t[::1] ext_indptr, int32_t[::1] ext_src,
              int32_t[::1] pending):
    """Advance ``n_ticks`` ticks; returns (fire_ticks, fire_ids, new_pending)."""
    cdef Py_ssize_t n_slots = v.shape[0]
    cdef Py_ssize_t r, i, k, j, s, lo, hi
    cdef double drive
    cdef int32_t[::1] fired_buf = np.empty(n_slots, np.int32)
    cdef int32_t[::1] prev_buf = np.empty(n_slots, np.int32)
    cdef Py_ssize_t n_fired = 0, n_prev
    cdef list out_ticks = []
    cdef list out_ids = []

    n_prev = pending.shape[0]
    for k in range(n_prev):
        prev_buf[k] = pending[k]

    for r in range(n_ticks):
        # 1. delivery: externals binned at this tick, then last tick's spikes
        lo = ext_indptr[r]
        hi = ext_indptr[r + 1]
        for k in range(lo, hi):
            s = ext_src[k]
            for j in range(syn_indptr[s], syn_indptr[s + 1]):
                if syn_inh[j]:
                    i_inh[syn_post[j]] += syn_weight[j]
                else:
                    i_exc[syn_post[j]] += syn_weight[j]
        for k in range(n_prev):
            s = prev_buf[k]
            for j in range(syn_indptr[s], syn_indptr[s + 1]):
                if syn_inh[j]:
                    i_inh[syn_post[j]] += syn_weight[j]
                else:
                    i_exc[syn_post[j]] += syn_weight[j]

        # 2-4. membrane update, current decay, threshold
        n_fired = 0
        for i in range(n_slots):
            if not alive[i]:
                continue
            if refrac[i] > 0:
                refrac[i] -= 1
                v[i] = v_reset[i]
                i_exc[i] *= alpha_e[i]
                i_inh[i] *= alpha_i[i]
            else:
                drive = k_exc[i] * i_exc[i] - k_inh[i] * i_inh[i]
                if delta_t[i] > 0.0:
                    drive = drive + om_alpha_m[i] * (delta_t[i] * exp((v[i] - v_th[i]) / delta_t[i]))
                v[i] = v[i] * alpha_m[i] + drive
                i_exc[i] *= alpha_e[i]
                i_inh[i] *= alpha_i[i]
                if v[i] >= v_th[i]:
                    v[i] = v_reset[i]
                    refrac[i] = ref_ticks[i]
                    fired_buf[n_fired] = <int32_t> i
                    n_fired += 1

        if n_fired:
            ids = np.empty(n_fired, np.int32)
            for k in range(n_fired):
                ids[k] = fired_buf[k]
            out_ticks.append(np.full(n_fired, tick0 + r, np.int64))
            out_ids.append(ids)
        for k in range(n_fired):
            prev_buf[k] = fired_buf[k]
        n_prev = n_fired

    new_pending = np.empty(n_prev, np.int32)
    for k in range(n_prev):
        new_pending[k] = prev_buf[k]
    if out_ticks:
        return np.concatenate(out_ticks), np.concatenate(out_ids), new_pending
    return np.empty(0, np.int64), np.empty(0, np.int32), new_pending
