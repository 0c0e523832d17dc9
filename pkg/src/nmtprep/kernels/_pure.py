"""Pure-Python BPE application kernel.

Semantics: merges are applied in learned order; each merge replaces all of
its adjacent occurrences (left to right, non-overlapping) before the next
merge is considered.  The heap below is an optimization of that definition,
not a different algorithm: ranks are visited in increasing order, and a pair
created by merge r can only be scheduled if its own rank is greater than r,
exactly as the in-order pass would see it.
"""

import heapq

IMPLEMENTATION = "pure"


def apply_ranked_merges(symbols, ranks, merges):
    """Apply a learned merge list to one word's symbol sequence.

    symbols: list of symbol strings (marker + characters).
    ranks:   dict mapping (left, right) -> merge index.
    merges:  list of (left, right) in learned order.
    Returns a new list of merged symbols.
    """
    n = len(symbols)
    if n < 2:
        return list(symbols)
    heap = []
    for i in range(n - 1):
        r = ranks.get((symbols[i], symbols[i + 1]))
        if r is not None:
            heap.append(r)
    if not heap:
        return list(symbols)
    heapq.heapify(heap)
    last = -1
    while heap:
        r = heapq.heappop(heap)
        if r == last:
            continue
        last = r
        left, right = merges[r]
        out = []
        i = 0
        merged = False
        limit = len(symbols) - 1
        while i < len(symbols):
            if i < limit and symbols[i] == left and symbols[i + 1] == right:
                out.append(left + right)
                i += 2
                merged = True
            else:
                out.append(symbols[i])
                i += 1
        if not merged:
            continue
        symbols = out
        for i in range(len(symbols) - 1):
            nr = ranks.get((symbols[i], symbols[i + 1]))
            if nr is not None and nr > r:
                heapq.heappush(heap, nr)
    return symbols
