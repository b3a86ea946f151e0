"""
See-saw optimization of Bell values.

With the state fixed, the Bell value is linear in every single measurement:
for party i and setting s it reads sum_b <e_b|F_{l(b)}|e_b> over the
eigenbasis e_b and outcome labels l(b) of that measurement, where the
environment F_a collects the coefficients and everything else held fixed.
Each update maximizes that expression (closed form for qubits, polar
alignment plus relabeling for qudits), so the value never decreases. The
quantum value additionally replaces the state by the top eigenvector of the
Bell operator between sweeps.
"""
import collections
import itertools
import logging
import multiprocessing
import os
import time

import numpy as np
from scipy.linalg import polar
from scipy.optimize import linear_sum_assignment

from magicwit import bell
from magicwit.algebra import haar_unitary, is_unitary, kron, modulus, pauli_vector
from magicwit.graphs import DEFAULT_ENUMERATION_BUDGET, cluster_representatives
from magicwit.states import build_graph_state, generalized_w_state
from magicwit.util import InvalidArgument

SEED_ENV = 'MAGICWIT_SEED'
INNER_STEPS = 8

log = logging.getLogger('magicwit.optimize')


def default_seed():
    value = os.environ.get(SEED_ENV)
    if value is None or value == '':
        return 0
    try:
        return int(value)
    except ValueError:
        raise InvalidArgument("%s must be an integer, got %r" % (SEED_ENV, value))


class OptimizerConfig(object):

    def __init__(self, restarts=64, max_iters=500, tol=1e-9, seed=None, jobs=1,
                 enumeration_budget=DEFAULT_ENUMERATION_BUDGET,
                 strategy_budget=bell.DEFAULT_STRATEGY_BUDGET):
        if seed is None:
            seed = default_seed()
        for name, value in (('restarts', restarts), ('max_iters', max_iters), ('jobs', jobs),
                            ('enumeration_budget', enumeration_budget), ('strategy_budget', strategy_budget)):
            if int(value) != value or value < 1:
                raise InvalidArgument("%s must be a positive integer, got %r" % (name, value))
        if not tol > 0:
            raise InvalidArgument("tol must be positive, got %r" % (tol,))
        if int(seed) != seed or seed < 0:
            raise InvalidArgument("seed must be a non-negative integer, got %r" % (seed,))
        self.restarts = int(restarts)
        self.max_iters = int(max_iters)
        self.tol = float(tol)
        self.seed = int(seed)
        self.jobs = int(jobs)
        self.enumeration_budget = int(enumeration_budget)
        self.strategy_budget = int(strategy_budget)

    def replace(self, **changes):
        values = self.to_dict()
        values.update(changes)
        return OptimizerConfig(**values)

    def to_dict(self):
        return {
            'restarts': self.restarts,
            'max_iters': self.max_iters,
            'tol': self.tol,
            'seed': self.seed,
            'jobs': self.jobs,
            'enumeration_budget': self.enumeration_budget,
            'strategy_budget': self.strategy_budget,
        }

    def __repr__(self):
        return "OptimizerConfig(%s)" % ', '.join('%s=%r' % kv for kv in sorted(self.to_dict().items()))


def _bloch_basis(u):
    op = sum(c * p for c, p in zip(u, pauli_vector()))
    _, vecs = np.linalg.eigh(op)
    return vecs[:, ::-1]


def _label_matrix(labels, d):
    out = np.zeros((d, d))
    out[np.arange(d), labels] = 1
    return out


class MeasurementSet(object):
    """
    Projective measurements for every party and setting. Each one is an
    orthonormal eigenbasis (columns of a unitary) plus the outcome label of
    every eigenvector. The qudit see-saw keeps the labels a permutation of
    0..d-1; labels given through from_projectors, and trivial qubit
    measurements, may repeat and give coarse-grained projectors.
    The associated order-d unitary is sum_b omega^{l(b)} |e_b><e_b|.
    """

    def __init__(self, dims, bases, labels=None):
        self.dims = tuple(int(modulus(d)) for d in dims)
        if len(bases) != len(self.dims):
            raise InvalidArgument("need measurements for %d parties, got %d" % (len(self.dims), len(bases)))
        all_bases, all_labels = [], []
        for i, d in enumerate(self.dims):
            if not len(bases[i]):
                raise InvalidArgument("party %d has no settings" % i)
            row_b, row_l = [], []
            for s, basis in enumerate(bases[i]):
                basis = np.array(basis, dtype=complex)
                if basis.shape != (d, d) or not is_unitary(basis, 1e-9):
                    raise InvalidArgument("party %d setting %d: basis is not a %dx%d unitary" % (i, s, d, d))
                lab = np.arange(d) if labels is None else np.array(labels[i][s], dtype=int)
                if lab.shape != (d,) or lab.min() < 0 or lab.max() >= d:
                    raise InvalidArgument("party %d setting %d: labels must be %d outcomes in [0, %d)" % (i, s, d, d))
                basis.setflags(write=False)
                lab.setflags(write=False)
                row_b.append(basis)
                row_l.append(lab)
            all_bases.append(tuple(row_b))
            all_labels.append(tuple(row_l))
        self.bases = tuple(all_bases)
        self.labels = tuple(all_labels)

    @property
    def settings(self):
        return tuple(len(b) for b in self.bases)

    def label_matrix(self, i, s):
        return _label_matrix(self.labels[i][s], self.dims[i])

    def projector(self, i, s, a):
        v = self.bases[i][s][:, self.labels[i][s] == a]
        return v.dot(v.conj().T)

    def unitary(self, i, s):
        d = self.dims[i]
        v = self.bases[i][s]
        return (v * np.exp(2j * np.pi * self.labels[i][s] / d)).dot(v.conj().T)

    def bloch(self):
        if any(d != 2 for d in self.dims):
            raise InvalidArgument("Bloch vectors only exist for qubits")
        out = []
        for i in range(len(self.dims)):
            row = []
            for s in range(len(self.bases[i])):
                u = self.unitary(i, s)
                row.append(np.array([np.real(np.trace(u.dot(p))) / 2 for p in pauli_vector()]))
            out.append(row)
        return out

    @classmethod
    def from_bloch(cls, vectors):
        bases = []
        for i, row in enumerate(vectors):
            prow = []
            for s, u in enumerate(row):
                u = np.asarray(u, dtype=float)
                norm = np.linalg.norm(u)
                if u.shape != (3,) or abs(norm - 1) > 1e-6:
                    raise InvalidArgument("party %d setting %d: Bloch vector must have unit length" % (i, s))
                prow.append(_bloch_basis(u / norm))
            bases.append(prow)
        return cls((2,) * len(vectors), bases)

    @classmethod
    def from_projectors(cls, dims, projectors):
        """projectors[i][s][a] is the projector of outcome a; they must be orthogonal and complete."""
        dims = [int(modulus(d)) for d in dims]
        bases, labels = [], []
        for i, d in enumerate(dims):
            prow, lrow = [], []
            for s, projs in enumerate(projectors[i]):
                if len(projs) != d:
                    raise InvalidArgument("party %d setting %d: need %d projectors" % (i, s, d))
                cols, labs = [], []
                total = np.zeros((d, d), dtype=complex)
                for a, p in enumerate(projs):
                    p = np.asarray(p, dtype=complex)
                    if p.shape != (d, d) or np.max(np.abs(p.dot(p) - p)) > 1e-8 or \
                            np.max(np.abs(p - p.conj().T)) > 1e-8:
                        raise InvalidArgument("party %d setting %d outcome %d: not a projector" % (i, s, a))
                    vals, vecs = np.linalg.eigh(p)
                    keep = vals > 0.5
                    cols.append(vecs[:, keep])
                    labs.extend([a] * int(keep.sum()))
                    total += p
                if np.max(np.abs(total - np.eye(d))) > 1e-8:
                    raise InvalidArgument("party %d setting %d: projectors do not sum to identity" % (i, s))
                prow.append(np.hstack(cols))
                lrow.append(labs)
            bases.append(prow)
            labels.append(lrow)
        return cls(dims, bases, labels)

    @classmethod
    def random(cls, dims, settings, rng):
        bases = []
        for d, m in zip(dims, settings):
            d = int(d)
            if d == 2:
                row = []
                for _ in range(m):
                    u = rng.standard_normal(3)
                    row.append(_bloch_basis(u / np.linalg.norm(u)))
                bases.append(row)
            else:
                bases.append([haar_unitary(d, rng) for _ in range(m)])
        return cls(dims, bases)

    def to_dict(self):
        return {
            'dims': list(self.dims),
            'bases': [[[[[float(z.real), float(z.imag)] for z in row] for row in basis]
                       for basis in party] for party in self.bases],
            'labels': [[[int(v) for v in lab] for lab in party] for party in self.labels],
        }

    @classmethod
    def from_dict(cls, doc):
        bases = [[np.array([[complex(re, im) for re, im in row] for row in basis]) for basis in party]
                 for party in doc['bases']]
        return cls(doc['dims'], bases, doc['labels'])


class OptimizationReport(object):

    def __init__(self, value, measurements, state, best_class=None, restarts=(), seed=None,
                 per_class=None, inequality=None):
        self.value = value
        self.measurements = measurements
        self.state = state
        self.best_class = best_class
        self.restarts = list(restarts)
        self.seed = seed
        self.per_class = per_class
        self.inequality = inequality

    @property
    def converged(self):
        return all(r['converged'] for r in self.restarts)

    def to_dict(self):
        out = {
            'value': self.value,
            'seed': self.seed,
            'converged': self.converged,
            'measurements': self.measurements.to_dict(),
            'restarts': [dict((k, r[k]) for k in ('restart', 'value', 'iterations', 'converged'))
                         for r in self.restarts],
        }
        if self.inequality is not None:
            out['inequality'] = self.inequality
        if self.best_class is not None:
            out['best_class'] = self.best_class.to_dict() if hasattr(self.best_class, 'to_dict') else self.best_class
        if self.per_class is not None:
            out['per_class'] = [{'class': g.to_dict(), 'value': v} for g, v in self.per_class]
        return out

    def __repr__(self):
        return "OptimizationReport(value=%.10f, restarts=%d, converged=%s)" % (
            self.value, len(self.restarts), self.converged)


def environment(I, psi, bases, labels, i, s):
    """
    F[a] for party i, setting s: sum over the other parties' settings of
    chi diag(W[a]) chi^dag, chi being the state rotated into the other
    parties' eigenbases and W the coefficient slice mapped through their labels.
    """
    dims = I.dims
    d = dims[i]
    other = [j for j in range(I.n) if j != i]
    F = np.zeros((d, d, d), dtype=complex)
    tensor = np.asarray(psi).reshape(dims)
    for xo in itertools.product(*[range(I.settings[j]) for j in other]):
        x = list(xo)
        x.insert(i, s)
        chi = tensor
        w = I.coeffs[(Ellipsis,) + tuple(x)]
        for j, xj in zip(other, xo):
            chi = np.moveaxis(np.tensordot(bases[j][xj].conj().T, chi, axes=([1], [j])), 0, j)
            w = np.moveaxis(np.tensordot(_label_matrix(labels[j][xj], dims[j]), w, axes=([1], [j])), 0, j)
        chi = np.moveaxis(chi, i, 0).reshape(d, -1)
        w = np.moveaxis(w, i, 0).reshape(d, -1)
        F += np.einsum('ir,ar,jr->aij', chi, w, chi.conj())
    return F


def _local_value(F, basis, labels):
    return float(sum(np.real(np.vdot(basis[:, b], F[labels[b]].dot(basis[:, b]))) for b in range(len(labels))))


def _qubit_update(F, basis, labels):
    K = F[0] - F[1]
    k0 = np.real(np.trace(K)) / 2
    v = np.array([np.real(np.trace(K.dot(p))) / 2 for p in pauli_vector()])
    r = np.linalg.norm(v)
    if r < 1e-14 and abs(k0) < 1e-14:
        return basis, labels
    if r >= abs(k0):
        return _bloch_basis(v / r), np.array([0, 1])
    return np.eye(2, dtype=complex), np.array([0, 0] if k0 > 0 else [1, 1])


def _qudit_update(F, basis, labels, tol):
    """Polar alignment on the PSD-shifted environment, then the best one-to-one relabeling."""
    d = F.shape[0]
    shift = max(0.0, -min(np.linalg.eigvalsh(F[a])[0] for a in range(d)))
    shifted = F + shift * np.eye(d)
    current = _local_value(F, basis, labels)
    for _ in range(INNER_STEPS):
        G = np.column_stack([shifted[labels[b]].dot(basis[:, b]) for b in range(d)])
        if np.linalg.norm(G) < 1e-14:
            break
        basis, _ = polar(G)
        diag = np.real(np.einsum('ib,aij,jb->ab', basis.conj(), F, basis))
        rows, cols = linear_sum_assignment(-diag)
        labels = np.empty(d, dtype=int)
        labels[cols] = rows
        value = float(diag[rows, cols].sum())
        if value - current < tol:
            break
        current = value
    return basis, labels


def _check_monotone(before, after, what):
    assert after >= before - 1e-9 * (1 + abs(before)), \
        "%s decreased the objective from %.12g to %.12g" % (what, before, after)


def _sweep(I, psi, bases, labels, tol):
    for i in range(I.n):
        for s in range(I.settings[i]):
            F = environment(I, psi, bases, labels, i, s)
            before = _local_value(F, bases[i][s], labels[i][s])
            if I.dims[i] == 2:
                basis, lab = _qubit_update(F, bases[i][s], labels[i][s])
            else:
                basis, lab = _qudit_update(F, bases[i][s], labels[i][s], tol)
            _check_monotone(before, _local_value(F, basis, lab), "measurement update (%d, %d)" % (i, s))
            bases[i][s], labels[i][s] = basis, lab


def bell_operator(I, M):
    """sum_{a,x} I^a_x (x)_i M_{a_i|x_i} as a dense matrix."""
    D = int(np.prod(I.dims))
    B = np.zeros((D, D), dtype=complex)
    for x in itertools.product(*[range(m) for m in I.settings]):
        w = I.coeffs[(Ellipsis,) + x]
        for j in range(I.n):
            w = np.moveaxis(np.tensordot(M.label_matrix(j, x[j]), w, axes=([1], [j])), 0, j)
        U = kron([M.bases[j][x[j]] for j in range(I.n)])
        B += (U * w.ravel()).dot(U.conj().T)
    return B


def top_eigenvector(B, tol=1e-9):
    """
    Eigenvector of the largest eigenvalue. Within a degenerate top eigenspace
    the vector with the largest first component is taken (projection of e_0).
    """
    vals, vecs = np.linalg.eigh(B)
    sub = vecs[:, vals >= vals[-1] - tol]
    if sub.shape[1] > 1:
        v = sub.dot(sub[0].conj())
        norm = np.linalg.norm(v)
        if norm > tol:
            return v / norm
    return sub[:, -1]


def _value(I, psi, bases, labels):
    return bell.evaluate(I, bell.behavior_from_state(psi, MeasurementSet(I.dims, bases, labels)))


def _random_state(D, rng):
    v = rng.standard_normal(D) + 1j * rng.standard_normal(D)
    return v / np.linalg.norm(v)


def _restart(task):
    I, psi, cfg, seed, index, free_state = task
    rng = np.random.default_rng(seed)
    if psi is None:
        psi = _random_state(int(np.prod(I.dims)), rng)
    M = MeasurementSet.random(I.dims, I.settings, rng)
    bases = [list(b) for b in M.bases]
    labels = [list(l) for l in M.labels]
    history = [_value(I, psi, bases, labels)]
    converged = False
    iterations = 0
    while iterations < cfg.max_iters:
        iterations += 1
        _sweep(I, psi, bases, labels, cfg.tol)
        if free_state:
            before = _value(I, psi, bases, labels)
            psi = top_eigenvector(bell_operator(I, MeasurementSet(I.dims, bases, labels)))
            value = _value(I, psi, bases, labels)
            _check_monotone(before, value, "state update")
        else:
            value = _value(I, psi, bases, labels)
        _check_monotone(history[-1], value, "sweep")
        history.append(value)
        if value - history[-2] < cfg.tol:
            converged = True
            break
    return {
        'restart': index,
        'value': history[-1],
        'iterations': iterations,
        'converged': converged,
        'history': history,
        'state': psi,
        'bases': bases,
        'labels': labels,
    }


def _run_restarts(I, psi, cfg, free_state, stream=()):
    seeds = np.random.SeedSequence([cfg.seed] + list(stream)).spawn(cfg.restarts)
    tasks = [(I, psi, cfg, seed, k, free_state) for k, seed in enumerate(seeds)]
    if cfg.jobs > 1 and len(tasks) > 1:
        pool = multiprocessing.Pool(min(cfg.jobs, len(tasks)))
        try:
            results = pool.map(_restart, tasks)
        except Exception:
            log.exception("restart worker failed")
            raise
        finally:
            pool.close()
            pool.join()
    else:
        results = [_restart(t) for t in tasks]
    best = None
    for r in results:
        log.debug("restart %d: value %.10f after %d iterations", r['restart'], r['value'], r['iterations'])
        if not r['converged']:
            log.warning("restart %d did not converge within %d iterations (last value %.10f)",
                        r['restart'], cfg.max_iters, r['value'])
        if best is None or r['value'] > best['value']:
            best = r
    return best, results


def _report(I, best, results, cfg, best_class=None, per_class=None):
    M = MeasurementSet(I.dims, best['bases'], best['labels'])
    state = best['state']
    value = bell.evaluate(I, bell.behavior_from_state(state, M))
    for r in results:
        r.pop('state', None)
        r.pop('bases', None)
        r.pop('labels', None)
    return OptimizationReport(value, M, state, best_class=best_class, restarts=results,
                              seed=cfg.seed, per_class=per_class, inequality=I.name)


def _check_state(I, state):
    psi = np.asarray(getattr(state, 'amplitudes', state), dtype=complex).ravel()
    if psi.size != int(np.prod(I.dims)):
        raise InvalidArgument("state of size %d does not match inequality dims %s" % (psi.size, I.dims))
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise InvalidArgument("zero state")
    return psi / norm


def optimize_measurements(I, state, cfg=None, stream=()):
    cfg = cfg or OptimizerConfig()
    psi = _check_state(I, state)
    best, results = _run_restarts(I, psi, cfg, False, stream)
    return _report(I, best, results, cfg, best_class=getattr(state, 'source', None))


def stabilizer_value(I, cfg=None):
    cfg = cfg or OptimizerConfig()
    started = time.time()
    family, sums = cluster_representatives(I.dims, cfg.enumeration_budget, cfg.jobs)
    best = None
    per_class = []
    for index, graph in enumerate(sums):
        state = build_graph_state(graph)
        report = optimize_measurements(I, state, cfg, stream=(index,))
        log.info("class %d %s: %.10f", index, graph.edges(), report.value)
        per_class.append((graph, report.value))
        if best is None or report.value > best.value:
            best = report
    best.per_class = per_class
    log.info("stabilizer value of %s over %d classes: %.10f (%.2fs)",
             I.name or 'inequality', len(per_class), best.value, time.time() - started)
    return best


def quantum_value(I, cfg=None):
    cfg = cfg or OptimizerConfig()
    best, results = _run_restarts(I, None, cfg, True)
    return _report(I, best, results, cfg, best_class='optimized state')


ScanRow = collections.namedtuple('ScanRow', 'param local stab quantum gap')


def gap_scan(family, params, cfg=None, which=('local', 'stab', 'quantum')):
    cfg = cfg or OptimizerConfig()
    unknown = set(which) - set(['local', 'stab', 'quantum'])
    if unknown:
        raise InvalidArgument("unknown scan columns %s" % sorted(unknown))
    rows = []
    for param in params:
        I = family(param)
        local = bell.local_bound(I, cfg.strategy_budget) if 'local' in which else None
        stab = stabilizer_value(I, cfg).value if 'stab' in which else None
        quantum = quantum_value(I, cfg).value if 'quantum' in which else None
        gap = quantum - stab if stab is not None and quantum is not None else None
        rows.append(ScanRow(param, local, stab, quantum, gap))
        log.info("scan %s=%g: local=%s stab=%s quantum=%s", I.name, param, local, stab, quantum)
    return rows


def alpha_for_theta(theta):
    """Tilting parameter for which cos(t)|00> + sin(t)|11> is optimal."""
    return 2.0 / np.sqrt(2 * np.tan(2 * theta) ** 2 + 1)


def w_point():
    return np.arccos(1 / np.sqrt(3)), np.pi / 4


Heatmap = collections.namedtuple('Heatmap', 'thetas phis values best')


def w_heatmap(theta_grid, phi_grid, cfg=None, inequality=None):
    """
    Optimized S_3 + R_2 over the generalized W family on a (theta, phi) grid.
    ``best`` holds the angles, value and measurement settings of the top cell.
    """
    cfg = cfg or OptimizerConfig()
    I = inequality or bell.svetlichny_r2()
    thetas = [float(t) for t in theta_grid]
    phis = [float(p) for p in phi_grid]
    for v in thetas + phis:
        if not 0 <= v <= np.pi:
            raise InvalidArgument("grid angles must lie in [0, pi], got %g" % v)
    values = np.zeros((len(thetas), len(phis)))
    best = None
    for a, theta in enumerate(thetas):
        for b, phi in enumerate(phis):
            report = optimize_measurements(I, generalized_w_state(theta, phi), cfg, stream=(a, b))
            values[a, b] = report.value
            if best is None or report.value > best['value']:
                best = {'theta': theta, 'phi': phi, 'value': report.value,
                        'measurements': report.measurements.to_dict()}
    if best is not None:
        log.info("heatmap peak %.6f at theta=%.4f phi=%.4f", best['value'], best['theta'], best['phi'])
    return Heatmap(thetas, phis, values, best)
