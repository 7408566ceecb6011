# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Jaccard scoring kernel over a CSR-tokenized catalog.

Mirrors nutribench._native.pure.score_many exactly: intersection and union
are integers, one float division per record, so results are bit-identical.
"""


def score_many(const int[:] query_ids, int n_unknown,
               const int[:] indptr, const int[:] token_ids,
               double[:] out):
    cdef Py_ssize_t n_records = indptr.shape[0] - 1
    cdef Py_ssize_t n_query_known = query_ids.shape[0]
    cdef int n_query = <int> n_query_known + n_unknown
    cdef Py_ssize_t i, a, b, hi
    cdef int inter, union_
    for i in range(n_records):
        a = 0
        b = indptr[i]
        hi = indptr[i + 1]
        inter = 0
        # record token ids are sorted, as are the query ids: merge-count
        while a < n_query_known and b < hi:
            if query_ids[a] == token_ids[b]:
                inter += 1
                a += 1
                b += 1
            elif query_ids[a] < token_ids[b]:
                a += 1
            else:
                b += 1
        union_ = n_query + <int> (hi - indptr[i]) - inter
        if union_ > 0:
            out[i] = (<double> inter) / (<double> union_)
        else:
            out[i] = 0.0
