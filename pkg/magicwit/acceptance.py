"""
End-to-end verification suite run by ``magicwit verify``.

Each check takes an OptimizerConfig and a quick flag and returns a list of
failure messages; an empty list is a pass.
"""
import collections
import itertools
import logging
import time

import numpy as np

from magicwit import bell, graphs, optimize, states

log = logging.getLogger('magicwit.acceptance')

CGLMP_TABLE = {3: (2.8729, 2.9149), 5: (2.9105, 3.0157), 7: (2.9272, 3.0776)}
W_TARGET = 7.26

CheckResult = collections.namedtuple('CheckResult', 'name passed seconds failures')


def cglmp_reference(d):
    """CGLMP in its original probability form, two settings, local bound 2."""
    coeffs = np.zeros((d, d, 2, 2))
    for k in range(d // 2):
        w = 1 - 2.0 * k / (d - 1)
        for a in range(d):
            for b in range(d):
                for x in ((0, 0), (1, 1)):
                    if (a - b) % d == k:
                        coeffs[a, b, x[0], x[1]] += w
                    if (a - b) % d == (-k - 1) % d:
                        coeffs[a, b, x[0], x[1]] -= w
                if (b - a) % d == (k + 1) % d:
                    coeffs[a, b, 1, 0] += w
                if (b - a) % d == (-k) % d:
                    coeffs[a, b, 1, 0] -= w
                if (b - a) % d == k:
                    coeffs[a, b, 0, 1] += w
                if (b - a) % d == (-k - 1) % d:
                    coeffs[a, b, 0, 1] -= w
    return bell.BellInequality(coeffs, (d, d), (2, 2), name='cglmp-reference-d%d' % d)


def _rank_mod(rows, d):
    rows = [list(r) for r in rows]
    rank = 0
    cols = len(rows[0]) if rows else 0
    for c in range(cols):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][c] % d), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        inv = pow(rows[rank][c], d - 2, d)
        rows[rank] = [(v * inv) % d for v in rows[rank]]
        for r in range(len(rows)):
            if r != rank and rows[r][c] % d:
                f = rows[r][c]
                rows[r] = [(v - f * p) % d for v, p in zip(rows[r], rows[rank])]
        rank += 1
    return rank


def count_stabilizer_states(n, d):
    """
    Brute force: every pure stabilizer state is fixed by a maximal isotropic
    subspace of F_d^{2n} together with one of d^n sign choices.
    """
    vectors = [v for v in itertools.product(range(d), repeat=2 * n) if any(v)]

    def isotropic(u, v):
        return sum(u[i] * v[n + i] - u[n + i] * v[i] for i in range(n)) % d == 0

    spaces = set()
    for combo in itertools.combinations(vectors, n):
        if not all(isotropic(u, v) for u, v in itertools.combinations(combo, 2)):
            continue
        if _rank_mod(combo, d) != n:
            continue
        span = frozenset(tuple(sum(c * v[j] for c, v in zip(cs, combo)) % d for j in range(2 * n))
                         for cs in itertools.product(range(d), repeat=n))
        spaces.add(span)
    return len(spaces) * d ** n


def stabilizer_state_formula(n, d):
    out = d ** n
    for i in range(1, n + 1):
        out *= d ** i + 1
    return out


def check_orbit_counts(cfg, quick):
    failures = []
    for (n, d), (classes, total) in {(2, 2): (2, 2), (3, 2): (5, 8), (2, 3): (2, 3)}.items():
        catalog = graphs.enumerate_classes(n, d, cfg.enumeration_budget)
        if len(catalog) != classes or sum(catalog.orbit_sizes) != total:
            failures.append("n=%d d=%d: %d classes covering %d matrices" % (n, d, len(catalog), sum(catalog.orbit_sizes)))
    return failures


def check_stabilizer_count(cfg, quick):
    failures = []
    cases = [(2, 2)] if quick else [(2, 2), (3, 2), (1, 3), (2, 3)]
    for n, d in cases:
        count = count_stabilizer_states(n, d)
        if count != stabilizer_state_formula(n, d):
            failures.append("n=%d d=%d: counted %d stabilizer states" % (n, d, count))
    return failures


def check_tilted_chsh(cfg, quick):
    failures = []
    alphas = [0.0, 1.0] if quick else [0.25 * k for k in range(8)]
    for alpha in alphas:
        I = bell.tilted_chsh(alpha)
        stab = optimize.stabilizer_value(I, cfg).value
        quantum = optimize.quantum_value(I, cfg).value
        if abs(stab - max(2 * np.sqrt(2), 2 + alpha)) > 1e-5:
            failures.append("alpha=%g: stabilizer value %.8f" % (alpha, stab))
        if abs(quantum - np.sqrt(8 + 2 * alpha ** 2)) > 1e-5:
            failures.append("alpha=%g: quantum value %.8f" % (alpha, quantum))
    return failures


def check_cglmp(cfg, quick):
    failures = []
    for d in (2, 3, 5):
        if np.max(np.abs(bell.cglmp(d).coeffs - cglmp_reference(d).coeffs)) > 1e-9:
            failures.append("d=%d: correlator construction differs from the probability form" % d)
    if abs(bell.local_bound(bell.cglmp(3)) - 2) > 1e-9:
        failures.append("d=3: local bound is not 2")
    for d in ([3] if quick else [3, 5, 7]):
        I = bell.cglmp(d)
        stab_expected, quantum_expected = CGLMP_TABLE[d]
        stab = optimize.stabilizer_value(I, cfg).value
        quantum = optimize.quantum_value(I, cfg).value
        if abs(stab - stab_expected) > (5e-4 if d == 3 else 1e-3):
            failures.append("d=%d: stabilizer value %.5f, expected %.4f" % (d, stab, stab_expected))
        if abs(quantum - quantum_expected) > 1e-3:
            failures.append("d=%d: quantum value %.5f, expected %.4f" % (d, quantum, quantum_expected))
    return failures


def check_tripartite(cfg, quick):
    failures = []
    I = bell.svetlichny_r2()
    if abs(bell.local_bound(I) - 6) > 1e-9:
        failures.append("local bound of S3+R2 is not 6")
    stab = optimize.stabilizer_value(I, cfg).value
    if abs(stab - 6) > 1e-5:
        failures.append("stabilizer value of S3+R2 is %.8f" % stab)
    theta, phi = optimize.w_point()
    peak = optimize.optimize_measurements(I, states.generalized_w_state(theta, phi), cfg).value
    if abs(peak - W_TARGET) > 0.02:
        failures.append("W state reaches %.4f" % peak)
    if not quick:
        grid = np.linspace(0, np.pi, 5)
        lines = [(0.0, p) for p in grid] + [(t, 0.0) for t in grid] + [(t, np.pi / 2) for t in grid]
        for t, p in lines:
            value = optimize.optimize_measurements(I, states.generalized_w_state(t, p), cfg).value
            if value > 6 + 1e-6:
                failures.append("biseparable point theta=%.3f phi=%.3f reaches %.8f" % (t, p, value))
    return failures


def check_coprime_dims(cfg, quick):
    failures = []
    rng = np.random.default_rng(cfg.seed)
    for k in range(5 if quick else 20):
        I = bell.BellInequality(rng.uniform(-1, 1, size=(2, 3, 2, 2)), (2, 3), (2, 2))
        local = bell.local_bound(I)
        stab = optimize.stabilizer_value(I, cfg.replace(restarts=min(cfg.restarts, 8))).value
        if stab > local + 1e-6:
            failures.append("random inequality %d: stabilizer %.8f above local %.8f" % (k, stab, local))
    return failures


def check_properties(cfg, quick):
    failures = []
    rng = np.random.default_rng(cfg.seed)
    for dims in ((2, 2), (3, 3), (2, 2, 2)):
        settings = (2,) * len(dims)
        for _ in range(10 if quick else 100):
            I = bell.BellInequality(rng.normal(size=dims + settings), dims, settings)
            p = rng.uniform(size=dims + settings)
            p /= p.sum(axis=tuple(range(len(dims))))
            behavior = bell.Behavior(p, dims, settings)
            lhs = np.sum(bell.fourier_coefficients(I).coeffs * bell.correlators_from_behavior(behavior))
            if abs(lhs - bell.evaluate(I, behavior)) > 1e-9:
                failures.append("DFT round trip off at dims %s" % (dims,))
                break
    for n, d in ((2, 2), (3, 2), (2, 3), (2, 5)):
        for rep in graphs.enumerate_classes(n, d).representatives:
            closed = states.build_graph_state(rep)
            gates = states.graph_state_by_gates(rep)
            if np.max(np.abs(closed.amplitudes - gates.amplitudes)) > 1e-12:
                failures.append("closed form and gate sequence differ for %r" % rep)
            if not closed.is_stabilized(1e-9):
                failures.append("%r is not stabilized by its generators" % rep)
    family, sums = graphs.cluster_representatives((2, 2, 3))
    for graph in sums:
        if abs(states.reduced_purity(states.build_graph_state(graph), [2]) - 1) > 1e-9:
            failures.append("qutrit of %r is entangled with the qubits" % graph)
    return failures


CHECKS = [
    ('orbit-counts', check_orbit_counts),
    ('stabilizer-count', check_stabilizer_count),
    ('properties', check_properties),
    ('tilted-chsh', check_tilted_chsh),
    ('cglmp', check_cglmp),
    ('tripartite', check_tripartite),
    ('coprime-dims', check_coprime_dims),
]


def run_checks(cfg, quick=False, names=None):
    if quick:
        cfg = cfg.replace(restarts=min(cfg.restarts, 8))
    results = []
    for name, check in CHECKS:
        if names and name not in names:
            continue
        started = time.time()
        try:
            failures = check(cfg, quick)
        except AssertionError as e:
            failures = ["assertion: %s" % e]
        seconds = time.time() - started
        log.info("check %s: %s in %.2fs", name, 'ok' if not failures else 'FAILED', seconds)
        results.append(CheckResult(name, not failures, seconds, failures))
    return results
