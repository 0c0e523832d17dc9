# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled BPE application kernel; same contract as kernels._pure."""

from cpython.mem cimport PyMem_Free, PyMem_Malloc, PyMem_Realloc

IMPLEMENTATION = "cython"


cdef struct LongHeap:
    long* data
    Py_ssize_t size
    Py_ssize_t cap


cdef inline int heap_push(LongHeap* h, long item) except -1:
    cdef Py_ssize_t pos, parentpos
    if h.size == h.cap:
        h.cap = h.cap * 2 if h.cap else 8
        h.data = <long*>PyMem_Realloc(h.data, h.cap * sizeof(long))
        if h.data is NULL:
            raise MemoryError()
    pos = h.size
    h.size += 1
    while pos > 0:
        parentpos = (pos - 1) >> 1
        if item < h.data[parentpos]:
            h.data[pos] = h.data[parentpos]
            pos = parentpos
        else:
            break
    h.data[pos] = item
    return 0


cdef inline long heap_pop(LongHeap* h) noexcept:
    cdef long top = h.data[0]
    cdef long last
    cdef Py_ssize_t pos = 0, childpos
    h.size -= 1
    if h.size > 0:
        last = h.data[h.size]
        childpos = 1
        while childpos < h.size:
            if childpos + 1 < h.size and h.data[childpos + 1] < h.data[childpos]:
                childpos += 1
            if h.data[childpos] < last:
                h.data[pos] = h.data[childpos]
                pos = childpos
                childpos = 2 * pos + 1
            else:
                break
        h.data[pos] = last
    return top


def apply_ranked_merges(list symbols, dict ranks, list merges):
    """Apply a learned merge list to one word's symbol sequence.

    Merges are applied in learned order; each merge replaces all of its
    adjacent occurrences before the next merge is considered.
    """
    cdef Py_ssize_t n = len(symbols)
    if n < 2:
        return list(symbols)

    cdef LongHeap heap
    heap.data = NULL
    heap.size = 0
    heap.cap = 0

    cdef list work = list(symbols)
    cdef list out
    cdef long last = -1
    cdef long rank
    cdef object left, right, merged_sym, r
    cdef Py_ssize_t j, limit
    cdef bint merged

    try:
        for j in range(n - 1):
            r = ranks.get((work[j], work[j + 1]))
            if r is not None:
                heap_push(&heap, <long>r)
        while heap.size > 0:
            rank = heap_pop(&heap)
            if rank == last:
                continue
            last = rank
            left, right = <tuple>merges[rank]
            out = []
            j = 0
            merged = False
            merged_sym = None
            limit = len(work) - 1
            while j < len(work):
                if j < limit and work[j] == left and work[j + 1] == right:
                    if merged_sym is None:
                        merged_sym = <str>left + <str>right
                    out.append(merged_sym)
                    j += 2
                    merged = True
                else:
                    out.append(work[j])
                    j += 1
            if not merged:
                continue
            work = out
            for j in range(len(work) - 1):
                r = ranks.get((work[j], work[j + 1]))
                if r is not None and <long>r > rank:
                    heap_push(&heap, <long>r)
    finally:
        PyMem_Free(heap.data)
    return work
