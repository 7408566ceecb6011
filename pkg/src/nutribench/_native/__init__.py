"""Similarity-scoring kernel with a compiled fast path.

``score_many`` computes token-set Jaccard scores for one query against every
record of a tokenized catalog stored in CSR form.  The Cython build is used
when available; set NUTRIBENCH_PURE=1 to force the pure-Python kernel.  Both
kernels compute intersection/union as integers before a single float divide,
so their outputs are bit-identical.
"""

import os

from .pure import score_many as score_many_pure

if os.environ.get("NUTRIBENCH_PURE") == "1":
    score_many = score_many_pure
    BACKEND = "pure"
else:
    try:
        from ._jaccard import score_many  # type: ignore[no-redef]

        BACKEND = "native"
    except ImportError:
        score_many = score_many_pure
        BACKEND = "pure"

__all__ = ["score_many", "score_many_pure", "BACKEND"]
