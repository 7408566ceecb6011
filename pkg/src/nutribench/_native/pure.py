"""Pure-Python fallback for the Jaccard scoring kernel."""

from __future__ import annotations

from typing import MutableSequence, Sequence


def score_many(
    query_ids: Sequence[int],
    n_unknown: int,
    indptr: Sequence[int],
    token_ids: Sequence[int],
    out: MutableSequence[float],
) -> None:
    """Fill ``out[i]`` with Jaccard(query, record_i) for every catalog record.

    ``query_ids`` holds the query's known token ids (sorted, unique) and
    ``n_unknown`` counts query tokens absent from the catalog vocabulary;
    those still enlarge the union.  Records are CSR slices of ``token_ids``.
    """
    query = set(query_ids)
    n_query = len(query) + n_unknown
    for i in range(len(indptr) - 1):
        lo, hi = indptr[i], indptr[i + 1]
        inter = 0
        for j in range(lo, hi):
            if token_ids[j] in query:
                inter += 1
        union = n_query + (hi - lo) - inter
        out[i] = inter / union if union > 0 else 0.0
