# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled threshold search. Same contract as the pure variant:
sorted values + 0/1 labels in, (weighted_gini, threshold) out, inf when
no boundary satisfies min_leaf. Expression order mirrors the numpy code
so both backends produce bit-identical floats.
"""

cimport cython


@cython.cdivision(True)
def best_split_sorted(double[::1] values, double[::1] labels, Py_ssize_t min_leaf=1):
    cdef Py_ssize_t n = values.shape[0]
    if n < 2 * min_leaf or n < 2 or values[0] == values[n - 1]:
        return float("inf"), float("nan")

    cdef double total_pos = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        total_pos += labels[i]

    cdef double nf = <double> n
    cdef double best_w = float("inf")
    cdef double best_thr = float("nan")
    cdef double pl = 0.0
    cdef double nl, nr, pr, pl_frac, ql_frac, pr_frac, qr_frac
    cdef double gini_l, gini_r, weighted
    cdef Py_ssize_t lo = min_leaf - 1
    cdef Py_ssize_t hi = n - min_leaf

    for i in range(n - 1):
        pl += labels[i]
        if i < lo or i >= hi:
            continue
        if values[i] == values[i + 1]:
            continue
        nl = <double> (i + 1)
        nr = nf - nl
        pr = total_pos - pl
        pl_frac = pl / nl
        ql_frac = (nl - pl) / nl
        gini_l = 1.0 - pl_frac * pl_frac - ql_frac * ql_frac
        pr_frac = pr / nr
        qr_frac = (nr - pr) / nr
        gini_r = 1.0 - pr_frac * pr_frac - qr_frac * qr_frac
        weighted = (nl * gini_l + nr * gini_r) / nf
        if weighted < best_w:
            best_w = weighted
            best_thr = (values[i] + values[i + 1]) / 2.0

    return best_w, best_thr
