"""
Graph states and a few named states used as optimizer inputs.

Amplitudes are stored as flat complex vectors in party order (party 0 is the
most significant index), i.e. the layout of numpy's kron.
"""
import logging

import numpy as np

from magicwit.algebra import TOLERANCE, clock_matrix, kron, modulus, omega, shift_matrix
from magicwit.graphs import AdjacencyMatrix, GraphSum
from magicwit.util import InvalidArgument

log = logging.getLogger('magicwit.states')


def _weights(A):
    """(dims, n x n integer weight matrix) for an AdjacencyMatrix or a GraphSum."""
    if isinstance(A, AdjacencyMatrix):
        return A.dims, np.array(A.entries)
    if isinstance(A, GraphSum):
        w = np.zeros((A.n, A.n), dtype=np.int64)
        for i, j, v in A.edges():
            w[i, j] = w[j, i] = v
        return A.dims, w
    raise InvalidArgument("expected an adjacency matrix or graph sum, got %r" % (A,))


class StabilizerGenerators(object):
    """n Pauli strings, one list of single-site factors per generator."""

    def __init__(self, dims, factors):
        self.dims = tuple(dims)
        self.factors = tuple(tuple(f) for f in factors)

    def __len__(self):
        return len(self.factors)

    def __iter__(self):
        return iter(self.operators())

    def operator(self, i):
        return kron(self.factors[i])

    def operators(self):
        return [self.operator(i) for i in range(len(self))]

    def commute(self, tol=TOLERANCE):
        ops = self.operators()
        for i in range(len(ops)):
            for j in range(i + 1, len(ops)):
                if np.max(np.abs(ops[i].dot(ops[j]) - ops[j].dot(ops[i]))) >= tol:
                    return False
        return True


class GraphState(object):

    def __init__(self, dims, amplitudes, source=None):
        self.dims = tuple(int(modulus(d)) for d in dims)
        amps = np.asarray(amplitudes, dtype=complex).ravel()
        if amps.size != int(np.prod(self.dims)):
            raise InvalidArgument("%d amplitudes do not fit dims %s" % (amps.size, self.dims))
        amps.setflags(write=False)
        self.amplitudes = amps
        self.source = source
        self._generators = None

    @property
    def n(self):
        return len(self.dims)

    @property
    def generators(self):
        if self._generators is None:
            self._generators = stabilizer_generators(self.source)
        return self._generators

    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def is_stabilized(self, tol=1e-9):
        return all(np.linalg.norm(g.dot(self.amplitudes) - self.amplitudes) < tol for g in self.generators)

    def __repr__(self):
        return "GraphState(dims=%s, source=%r)" % (self.dims, self.source)


def cp_gate(d):
    """Controlled phase sum_j |j><j| (x) Z^j, diagonal with entries omega^{jk}."""
    d = int(modulus(d))
    j, k = np.divmod(np.arange(d * d), d)
    return np.diag(omega(d) ** ((j * k) % d))


def build_graph_state(A):
    """Closed form: amplitude d^{-n/2} omega^{sum_{i<j} A_ij a_i a_j} on |a>."""
    dims, w = _weights(A)
    grid = np.indices(dims).reshape(len(dims), -1)
    phase = np.zeros(grid.shape[1])
    for i, j in zip(*np.nonzero(np.triu(w, 1))):
        phase += 2 * np.pi * ((w[i, j] * grid[i] * grid[j]) % dims[i]) / dims[i]
    amps = np.exp(1j * phase) / np.sqrt(np.prod(dims))
    return GraphState(dims, amps, A)


def _apply_two_site(psi, dims, gate, i, j):
    t = np.moveaxis(psi.reshape(dims), (i, j), (0, 1))
    shape = t.shape
    t = gate.dot(t.reshape(dims[i] * dims[j], -1)).reshape(shape)
    return np.moveaxis(t, (0, 1), (i, j)).ravel()


def graph_state_by_gates(A):
    """Gate sequence: CP^{A_ij} for every i < j applied to the product of |+> states."""
    dims, w = _weights(A)
    psi = kron([np.ones(d) / np.sqrt(d) for d in dims])
    for i, j in zip(*np.nonzero(np.triu(w, 1))):
        gate = np.linalg.matrix_power(cp_gate(dims[i]), int(w[i, j]))
        psi = _apply_two_site(psi, dims, gate, i, j)
    return GraphState(dims, psi, A)


def stabilizer_generators(A):
    """g_i = X_i prod_j Z_j^{A_ij}; the +1 joint eigenstate is build_graph_state(A)."""
    dims, w = _weights(A)
    factors = []
    for i in range(len(dims)):
        row = []
        for j, d in enumerate(dims):
            if j == i:
                row.append(shift_matrix(d))
            else:
                row.append(np.linalg.matrix_power(clock_matrix(d), int(w[i, j]) % d))
        factors.append(row)
    return StabilizerGenerators(dims, factors)


def _vector(state):
    if isinstance(state, GraphState):
        return state.amplitudes
    return np.asarray(state, dtype=complex).ravel()


def expectation(state, observable):
    """<psi|O|psi>"""
    psi = _vector(state)
    observable = np.asarray(observable)
    if observable.shape != (psi.size, psi.size):
        raise InvalidArgument("observable of shape %s does not act on a %d-dimensional state" %
                              (observable.shape, psi.size))
    return complex(np.vdot(psi, observable.dot(psi)))


def reduced_state(state, keep, dims=None):
    if dims is None:
        dims = state.dims
    dims = tuple(int(d) for d in dims)
    keep = sorted(set(int(k) for k in keep))
    if not keep or len(keep) >= len(dims) or keep[0] < 0 or keep[-1] >= len(dims):
        raise InvalidArgument("keep must be a non-empty strict subset of %d sites, got %s" % (len(dims), keep))
    psi = _vector(state)
    t = np.moveaxis(psi.reshape(dims), keep, list(range(len(keep))))
    dk = int(np.prod([dims[k] for k in keep]))
    m = t.reshape(dk, -1)
    return m.dot(m.conj().T)


def reduced_purity(state, keep, dims=None):
    """tr(rho_keep^2)"""
    rho = reduced_state(state, keep, dims)
    return float(np.real(np.sum(np.abs(rho) ** 2)))


def apply_local(state, dims, ops):
    """(ops[0] (x) ... (x) ops[n-1]) |psi>, without forming the full operator."""
    dims = tuple(int(d) for d in dims)
    t = _vector(state).reshape(dims)
    for site, op in enumerate(ops):
        t = np.moveaxis(np.tensordot(op, t, axes=([1], [site])), 0, site)
    return t.ravel()


def product_state(vectors):
    return kron([np.asarray(v, dtype=complex) / np.linalg.norm(v) for v in vectors]).ravel()


def partially_entangled_state(theta):
    """cos(theta)|00> + sin(theta)|11>"""
    psi = np.zeros(4, dtype=complex)
    psi[0] = np.cos(theta)
    psi[3] = np.sin(theta)
    return psi


def maximally_entangled_state(d):
    d = int(d)
    psi = np.zeros(d * d, dtype=complex)
    psi[np.arange(d) * (d + 1)] = 1 / np.sqrt(d)
    return psi


def ghz_state(n, d=2):
    psi = np.zeros(d ** n, dtype=complex)
    step = sum(d ** k for k in range(n))
    psi[np.arange(d) * step] = 1 / np.sqrt(d)
    return psi


def generalized_w_state(theta, phi):
    """sin(t) sin(p)|001> + sin(t) cos(p)|010> + cos(t)|100>"""
    psi = np.zeros(8, dtype=complex)
    psi[1] = np.sin(theta) * np.sin(phi)
    psi[2] = np.sin(theta) * np.cos(phi)
    psi[4] = np.cos(theta)
    return psi
