# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: cumulative walks with running extremes, and binned
moment accumulation.  See ``_ref`` for the reference semantics."""


def walk_block(double[:, ::1] increments, long[::1] record_idx,
               double[::1] high, double[::1] low, double[::1] close,
               long[::1] argmax, double[:, ::1] samples):
    cdef Py_ssize_t n_paths = increments.shape[0]
    cdef Py_ssize_t n_steps = increments.shape[1]
    cdef Py_ssize_t n_rec = record_idx.shape[0]
    cdef Py_ssize_t p, s, r
    cdef long peak_at
    cdef double x, mx, mn
    with nogil:
        for p in range(n_paths):
            x = 0.0
            mx = 0.0
            mn = 0.0
            peak_at = 0
            r = 0
            for s in range(n_steps):
                x += increments[p, s]
                if x > mx:
                    mx = x
                    peak_at = s + 1
                elif x < mn:
                    mn = x
                if r < n_rec and record_idx[r] == s + 1:
                    samples[p, r] = x
                    r += 1
            high[p] = mx
            low[p] = mn
            close[p] = x
            argmax[p] = peak_at


def accumulate_bins(double[:, ::1] samples, long[::1] bins,
                    double[::1] counts, double[:, ::1] sums,
                    double[:, ::1] sumsqs):
    cdef Py_ssize_t n_paths = samples.shape[0]
    cdef Py_ssize_t n_times = samples.shape[1]
    cdef Py_ssize_t p, s
    cdef long b
    cdef double v
    with nogil:
        for p in range(n_paths):
            b = bins[p]
            if b < 0:
                continue
            counts[b] += 1.0
            for s in range(n_times):
                v = samples[p, s]
                sums[b, s] += v
                sumsqs[b, s] += v * v
