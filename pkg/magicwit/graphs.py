"""
Weighted graphs over F_d and their local-Clifford orbits.

Two graph states are LC-equivalent exactly when their adjacency matrices are
related by a sequence of M moves (scale a vertex by a unit) and L moves
(local complementation with weight a). Orbits are computed by breadth-first
closure; every orbit is represented by its lexicographically smallest member
under row-major ordering of the entries.
"""
import itertools
import logging
import multiprocessing
import time
from collections import deque

import numpy as np

from magicwit.algebra import FieldElement, modulus
from magicwit.cache import catalogs
from magicwit.util import InvalidArgument, check_budget

DEFAULT_ENUMERATION_BUDGET = 2 ** 24

log = logging.getLogger('magicwit.graphs')


class AdjacencyMatrix(object):
    """Symmetric, zero-diagonal n x n matrix over F_d."""

    def __init__(self, entries, d):
        self.d = modulus(d)
        arr = np.array(entries, dtype=np.int64)
        if arr.ndim == 0 and arr.size == 1:
            arr = arr.reshape(1, 1)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise InvalidArgument("adjacency matrix must be square, got shape %s" % (arr.shape,))
        arr = arr % self.d.d
        if not np.array_equal(arr, arr.T):
            raise InvalidArgument("adjacency matrix must be symmetric")
        if np.any(np.diag(arr)):
            raise InvalidArgument("adjacency matrix must have a zero diagonal")
        arr.setflags(write=False)
        self.entries = arr
        self.n = arr.shape[0]
        self.key = tuple(arr.ravel().tolist())

    @classmethod
    def empty(cls, n, d):
        return cls(np.zeros((n, n), dtype=np.int64), d)

    @classmethod
    def from_edges(cls, n, d, edges):
        arr = np.zeros((n, n), dtype=np.int64)
        for edge in edges:
            i, j = edge[0], edge[1]
            w = edge[2] if len(edge) > 2 else 1
            if i == j:
                raise InvalidArgument("self loop at vertex %d" % i)
            arr[i, j] = arr[j, i] = int(w)
        return cls(arr, d)

    @classmethod
    def from_upper(cls, n, d, upper):
        arr = np.zeros((n, n), dtype=np.int64)
        arr[np.triu_indices(n, 1)] = upper
        return cls(arr + arr.T, d)

    @property
    def dims(self):
        return (self.d.d,) * self.n

    def entry(self, i, j):
        return FieldElement(self.entries[i, j], self.d)

    def edges(self):
        i, j = np.triu_indices(self.n, 1)
        return [(int(a), int(b), int(self.entries[a, b])) for a, b in zip(i, j) if self.entries[a, b]]

    def to_dict(self):
        return {'dims': list(self.dims), 'edges': [list(e) for e in self.edges()]}

    def __eq__(self, other):
        if not isinstance(other, AdjacencyMatrix):
            return NotImplemented
        return self.d == other.d and self.key == other.key

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    def __lt__(self, other):
        return self.key < other.key

    def __hash__(self):
        return hash((self.d.d, self.key))

    def __repr__(self):
        return "AdjacencyMatrix(n=%d, d=%d, edges=%s)" % (self.n, self.d.d, self.edges())


class GraphSum(object):
    """
    Direct sum of graphs living on disjoint sets of parties, one block per
    dimension cluster. Parties keep their global index.
    """

    def __init__(self, dims, blocks):
        self.dims = tuple(int(modulus(d)) for d in dims)
        self.blocks = tuple((tuple(sites), graph) for sites, graph in blocks)
        covered = sorted(s for sites, _ in self.blocks for s in sites)
        if covered != list(range(len(self.dims))):
            raise InvalidArgument("blocks must cover every party exactly once")
        for sites, graph in self.blocks:
            if graph.n != len(sites):
                raise InvalidArgument("block size %d does not match %d sites" % (graph.n, len(sites)))
            for s in sites:
                if self.dims[s] != graph.d.d:
                    raise InvalidArgument("party %d has dimension %d, block is over F_%d" % (s, self.dims[s], graph.d.d))

    @property
    def n(self):
        return len(self.dims)

    def edges(self):
        out = []
        for sites, graph in self.blocks:
            for i, j, w in graph.edges():
                a, b = sorted((sites[i], sites[j]))
                out.append((a, b, w))
        return sorted(out)

    def to_dict(self):
        return {'dims': list(self.dims), 'edges': [list(e) for e in self.edges()]}

    def __eq__(self, other):
        if not isinstance(other, GraphSum):
            return NotImplemented
        return self.dims == other.dims and self.blocks == other.blocks

    def __hash__(self):
        return hash((self.dims, self.blocks))

    def __repr__(self):
        return "GraphSum(dims=%s, edges=%s)" % (self.dims, self.edges())


def _unit(b, d):
    value = int(b) % d
    if value == 0:
        raise InvalidArgument("M move needs a unit of F_%d, got 0" % d)
    return value


def m_move(A, v, b):
    d = A.d.d
    b = _unit(b, d)
    scale = np.ones(A.n, dtype=np.int64)
    scale[v] = b
    return AdjacencyMatrix(np.outer(scale, scale) * A.entries % d, d)


def l_move(A, v, a):
    """Local complementation at v with weight a: A_ij += a A_vi A_vj off the diagonal."""
    d = A.d.d
    a = int(a) % d
    if a == 0:
        return A
    row = A.entries[v]
    arr = (A.entries + a * np.outer(row, row)) % d
    np.fill_diagonal(arr, 0)
    return AdjacencyMatrix(arr, d)


def _neighbours(A):
    d = A.d.d
    for v in range(A.n):
        for b in range(2, d):
            yield m_move(A, v, b)
        if not np.any(A.entries[v]):
            continue
        for a in range(1, d):
            yield l_move(A, v, a)


def lc_orbit(A):
    seen = set([A])
    queue = deque([A])
    while queue:
        current = queue.popleft()
        for nxt in _neighbours(current):
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return frozenset(seen)


class OrbitCatalog(object):

    def __init__(self, n, d, representatives, orbit_sizes):
        self.n = n
        self.d = modulus(d)
        self.representatives = tuple(representatives)
        self.orbit_sizes = tuple(orbit_sizes)

    def __len__(self):
        return len(self.representatives)

    def __iter__(self):
        return iter(zip(self.representatives, self.orbit_sizes))

    def to_dict(self):
        return {
            'n': self.n,
            'd': self.d.d,
            'classes': [{'edges': [list(e) for e in rep.edges()], 'orbit_size': size}
                        for rep, size in self],
        }

    def __eq__(self, other):
        return (isinstance(other, OrbitCatalog) and self.n == other.n and self.d == other.d and
                self.representatives == other.representatives and self.orbit_sizes == other.orbit_sizes)

    def __repr__(self):
        return "OrbitCatalog(n=%d, d=%d, classes=%d)" % (self.n, self.d.d, len(self))


def matrix_count(n, d):
    return int(d) ** (n * (n - 1) // 2)


def _matrix_at(n, d, index):
    m = n * (n - 1) // 2
    digits = []
    for _ in range(m):
        index, r = divmod(index, d)
        digits.append(r)
    return AdjacencyMatrix.from_upper(n, d, digits[::-1])


def _orbits_for_shard(args):
    n, d, start, stop = args
    seen = set()
    found = {}
    for index in range(start, stop):
        A = _matrix_at(n, d, index)
        if A in seen:
            continue
        orbit = lc_orbit(A)
        seen.update(orbit)
        found[min(m.key for m in orbit)] = len(orbit)
    return found


def enumerate_classes(n, d, budget=DEFAULT_ENUMERATION_BUDGET, jobs=1):
    """
    Partition every zero-diagonal symmetric n x n matrix over F_d into M/L
    orbits. Shards of the matrix index space may run in parallel; merging is a
    dict union keyed by the orbit minimum, so the result is independent of the
    number of workers.
    """
    d = int(modulus(d))
    if n < 1:
        raise InvalidArgument("need at least one vertex, got %d" % n)
    total = check_budget(matrix_count(n, d), budget, "class enumeration (n=%d, d=%d)" % (n, d))
    started = time.time()
    if jobs > 1 and total > 1:
        step = -(-total // jobs)
        shards = [(n, d, lo, min(lo + step, total)) for lo in range(0, total, step)]
        pool = multiprocessing.Pool(min(jobs, len(shards)))
        try:
            parts = pool.map(_orbits_for_shard, shards)
        finally:
            pool.close()
            pool.join()
    else:
        parts = [_orbits_for_shard((n, d, 0, total))]
    merged = {}
    for part in parts:
        merged.update(part)
    keys = sorted(merged)
    reps = [AdjacencyMatrix(np.array(k, dtype=np.int64).reshape(n, n), d) for k in keys]
    sizes = [merged[k] for k in keys]
    if sum(sizes) != total:
        raise RuntimeError("orbit sizes sum to %d, expected %d" % (sum(sizes), total))
    log.info("enumerated %d LC classes for n=%d d=%d in %.3fs", len(reps), n, d, time.time() - started)
    return OrbitCatalog(n, d, reps, sizes)


def cached_classes(n, d, budget=DEFAULT_ENUMERATION_BUDGET, jobs=1):
    d = int(modulus(d))
    check_budget(matrix_count(n, d), budget, "class enumeration (n=%d, d=%d)" % (n, d))
    return catalogs.lookup(n, d, lambda n, d: enumerate_classes(n, d, budget, jobs))


def direct_sum(*graphs):
    """
    Block-diagonal sum. Returns an AdjacencyMatrix when all blocks share one
    field, a GraphSum otherwise.
    """
    if not graphs:
        raise InvalidArgument("direct sum of nothing")
    blocks = []
    offset = 0
    dims = []
    for g in graphs:
        parts = g.blocks if isinstance(g, GraphSum) else [(tuple(range(g.n)), g)]
        for sites, block in parts:
            blocks.append((tuple(s + offset for s in sites), block))
        dims.extend(g.dims)
        offset += g.n
    fields = set(block.d.d for _, block in blocks)
    if len(fields) == 1:
        arr = np.zeros((offset, offset), dtype=np.int64)
        for sites, block in blocks:
            idx = np.array(sites)
            arr[np.ix_(idx, idx)] = block.entries
        return AdjacencyMatrix(arr, fields.pop())
    return GraphSum(dims, blocks)


class ClusterFamily(object):

    def __init__(self, dims, clusters):
        self.dims = tuple(modulus(d) for d in dims)
        self.clusters = tuple(clusters)

    def __len__(self):
        size = 1
        for _, _, catalog in self.clusters:
            size *= len(catalog)
        return size

    def direct_sums(self):
        dims = [d.d for d in self.dims]
        for choice in itertools.product(*[catalog.representatives for _, _, catalog in self.clusters]):
            yield GraphSum(dims, [(sites, rep) for (_, sites, _), rep in zip(self.clusters, choice)])

    def __repr__(self):
        return "ClusterFamily(dims=%s, clusters=%s)" % (
            [d.d for d in self.dims], [(d.d, sites, len(c)) for d, sites, c in self.clusters])


def cluster_representatives(dims, budget=DEFAULT_ENUMERATION_BUDGET, jobs=1):
    dims = [modulus(d) for d in dims]
    if not dims:
        raise InvalidArgument("no parties")
    order = []
    groups = {}
    for i, d in enumerate(dims):
        if d.d not in groups:
            groups[d.d] = []
            order.append(d.d)
        groups[d.d].append(i)
    clusters = [(modulus(d), tuple(groups[d]), cached_classes(len(groups[d]), d, budget, jobs)) for d in order]
    family = ClusterFamily(dims, clusters)
    return family, family.direct_sums()


def random_adjacency(n, d, rng):
    d = int(modulus(d))
    return AdjacencyMatrix.from_upper(n, d, rng.integers(0, d, size=n * (n - 1) // 2))
