import itertools
import os

import numpy as np
from nose import tools as nt

from magicwit import acceptance, algebra, bell, optimize
from magicwit.bell import Behavior, BellInequality
from magicwit.util import InvalidArgument, ResourceLimit

from magicwit.test.util import (bell_pair, chsh_optimal_measurements, random_behavior, random_inequality,
                                remove, temp_dir)


def _computational(dims, settings):
    return optimize.MeasurementSet(dims, [[np.eye(d)] * m for d, m in zip(dims, settings)])


def test_fourier_of_constant():
    I = BellInequality(np.ones((3, 2, 2, 2)), (3, 2), (2, 2))
    coeffs = bell.fourier_coefficients(I).coeffs
    expected = np.zeros((3, 2, 2, 2))
    expected[0, 0] = 1
    nt.assert_true(np.allclose(coeffs, expected))


def test_fourier_round_trip():
    rng = np.random.default_rng(0)
    for dims in ((2, 2), (3, 3), (2, 2, 2), (2, 3)):
        for _ in range(100):
            I = random_inequality(rng, dims)
            p = random_behavior(rng, dims)
            lhs = np.sum(bell.fourier_coefficients(I).coeffs * bell.correlators_from_behavior(p))
            nt.assert_true(abs(lhs - bell.evaluate(I, p)) < 1e-9)


def test_inverse_transform_recovers_inequality():
    rng = np.random.default_rng(1)
    I = random_inequality(rng, (3, 5))
    form = bell.fourier_coefficients(I)
    nt.assert_true(form.is_hermitian())
    nt.assert_true(np.allclose(form.to_inequality().coeffs, I.coeffs))


def test_tilted_chsh_correlator_form():
    alpha = 0.7
    coeffs = bell.fourier_coefficients(bell.tilted_chsh(alpha)).coeffs
    nt.assert_true(abs(coeffs[1, 0, 0, :].sum() - alpha) < 1e-12)
    nt.assert_true(np.allclose(coeffs[1, 0, 1, :], 0))
    nt.assert_true(np.allclose(coeffs[0, 1], 0))
    for x1, x2 in itertools.product(range(2), repeat=2):
        nt.assert_true(abs(coeffs[1, 1, x1, x2] - (-1) ** (x1 * x2)) < 1e-12)


def test_correlators_from_behavior():
    uniform = Behavior.uniform((3, 3), (2, 2))
    c = bell.correlators_from_behavior(uniform)
    expected = np.zeros((3, 3, 2, 2))
    expected[0, 0] = 1
    nt.assert_true(np.allclose(c, expected))

    p = np.zeros((3, 3, 2, 2))
    for a in range(3):
        p[a, a] = 1.0 / 3
    c = bell.correlators_from_behavior(Behavior(p, (3, 3), (2, 2)))
    for k, l in itertools.product(range(3), repeat=2):
        nt.assert_true(np.allclose(c[k, l], 1.0 if (k + l) % 3 == 0 else 0.0))

    rng = np.random.default_rng(2)
    q = random_behavior(rng, (2, 2))
    signs = np.array([[1, -1], [-1, 1]])[:, :, None, None]
    nt.assert_true(np.allclose(bell.correlators_from_behavior(q)[1, 1], np.sum(signs * q.p, axis=(0, 1))))


def test_behavior_from_correlators_inverts():
    rng = np.random.default_rng(3)
    p = random_behavior(rng, (3, 2))
    back = Behavior.from_correlators(bell.correlators_from_behavior(p), (3, 2), (2, 2))
    nt.assert_true(np.allclose(back.p, p.p))


def test_behavior_validation():
    nt.assert_raises(InvalidArgument, Behavior, np.full((2, 2, 1, 1), 0.3), (2, 2), (1, 1))
    bad = np.zeros((2, 2, 1, 1))
    bad[0, 0] = 1.5
    bad[1, 1] = -0.5
    nt.assert_raises(InvalidArgument, Behavior, bad, (2, 2), (1, 1))
    nt.assert_raises(InvalidArgument, Behavior, np.ones((2, 2)), (2, 2), (1, 1))


def test_behavior_from_state_basics():
    p = bell.behavior_from_state(np.array([1, 0]), _computational((2,), (1,)))
    nt.assert_true(np.allclose(p.p[:, 0], [1, 0]))
    p = bell.behavior_from_state(bell_pair(), _computational((2, 2), (1, 1)))
    nt.assert_true(np.allclose(p.p[:, :, 0, 0], [[0.5, 0], [0, 0.5]]))
    nt.assert_raises(InvalidArgument, bell.behavior_from_state, np.ones(3), _computational((2, 2), (1, 1)))


def test_chsh_optimal_value():
    p = bell.behavior_from_state(bell_pair(), chsh_optimal_measurements())
    nt.assert_true(abs(bell.evaluate(bell.chsh(), p) - 2 * np.sqrt(2)) < 1e-12)


def test_degenerate_labels_give_trivial_outcomes():
    M = optimize.MeasurementSet((2, 2), [[np.eye(2)], [np.eye(2)]], [[[1, 1]], [[0, 1]]])
    p = bell.behavior_from_state(bell_pair(), M)
    nt.assert_true(np.allclose(p.p[1, :, 0, 0], [0.5, 0.5]))
    nt.assert_true(np.allclose(p.p[0, :, 0, 0], 0))


def test_evaluate():
    p = Behavior.uniform((2, 2), (2, 2))
    nt.assert_equal(bell.evaluate(BellInequality(np.zeros((2, 2, 2, 2)), (2, 2), (2, 2)), p), 0.0)
    for alpha in (0.0, 0.5, 1.5):
        zero = Behavior.deterministic((2, 2), (2, 2), [(0, 0), (0, 0)])
        nt.assert_true(abs(bell.evaluate(bell.tilted_chsh(alpha), zero) - (alpha + 2)) < 1e-12)
    nt.assert_raises(InvalidArgument, bell.evaluate, bell.chsh(), Behavior.uniform((2, 2, 2), (2, 2, 2)))


def test_local_bounds_of_catalog():
    nt.assert_true(abs(bell.local_bound(bell.chsh()) - 2) < 1e-12)
    for alpha in (0.0, 0.5, 1.0):
        nt.assert_true(abs(bell.local_bound(bell.tilted_chsh(alpha)) - (2 + alpha)) < 1e-12)
    nt.assert_true(abs(bell.local_bound(bell.svetlichny_r2()) - 6) < 1e-12)
    nt.assert_true(abs(bell.local_bound(bell.svetlichny()) - 4) < 1e-12)
    for d in (2, 3, 5):
        nt.assert_true(abs(bell.local_bound(bell.cglmp(d)) - 2) < 1e-9)


def test_local_strategy_is_attained():
    rng = np.random.default_rng(4)
    for dims in ((2, 2), (2, 3), (3, 2, 2)):
        I = random_inequality(rng, dims)
        value, strategy = bell.local_strategy(I)
        attained = bell.evaluate(I, Behavior.deterministic(I.dims, I.settings, strategy))
        nt.assert_true(abs(value - attained) < 1e-9)
        brute = max(bell.evaluate(I, Behavior.deterministic(I.dims, I.settings, s))
                    for s in itertools.product(*[list(itertools.product(range(d), repeat=m))
                                                 for d, m in zip(I.dims, I.settings)]))
        nt.assert_true(abs(value - brute) < 1e-9)


def test_local_bound_budget():
    nt.assert_raises(ResourceLimit, bell.local_bound, bell.cglmp(7), budget=100)


def test_local_bound_relabeling_invariance():
    rng = np.random.default_rng(5)
    for I in (bell.chsh(), bell.tilted_chsh(0.5), bell.cglmp(3), bell.svetlichny_r2()):
        bound = bell.local_bound(I)
        for _ in range(10):
            party = int(rng.integers(I.n))
            J = bell.relabel(I, party, outcomes=rng.permutation(I.dims[party]),
                             settings=rng.permutation(I.settings[party]))
            nt.assert_true(abs(bell.local_bound(J) - bound) < 1e-9)


def test_cglmp_matches_probability_form():
    for d in (2, 3, 5, 7):
        nt.assert_true(np.allclose(bell.cglmp(d).coeffs, acceptance.cglmp_reference(d).coeffs))


def test_cglmp_two_outcomes_is_chsh():
    I = bell.cglmp(2)
    correlators = bell.fourier_coefficients(I).coeffs[1, 1]
    nt.assert_true(np.allclose(np.abs(correlators), 1))
    nt.assert_true(abs(np.prod(correlators) + 1) < 1e-12)


def test_tilted_chsh_range():
    nt.assert_raises(InvalidArgument, bell.tilted_chsh, -0.1)
    nt.assert_raises(InvalidArgument, bell.tilted_chsh, 2.0)
    nt.assert_true(abs(bell.local_bound(bell.tilted_chsh(2.0, closed=True)) - 4) < 1e-12)
    nt.assert_true(np.allclose(bell.tilted_chsh(0).coeffs, bell.chsh().coeffs))


def test_catalog_registry():
    nt.assert_equal(bell.catalog('cglmp', d=5).dims, (5, 5))
    nt.assert_equal(bell.catalog('tilted-chsh', alpha=None).name, 'tilted-chsh')
    nt.assert_equal(bell.catalog('svetlichny-r2').n, 3)
    nt.assert_raises(InvalidArgument, bell.catalog, 'i3322')


def test_bloch_objective_matches_born_rule():
    rng = np.random.default_rng(6)
    for I in (bell.chsh(), bell.svetlichny_r2(), random_inequality(rng, (2, 2, 2))):
        for _ in range(5):
            dim = 2 ** I.n
            psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
            psi /= np.linalg.norm(psi)
            vectors = [[v / np.linalg.norm(v) for v in rng.normal(size=(2, 3))] for _ in range(I.n)]
            M = optimize.MeasurementSet.from_bloch(vectors)
            born = bell.evaluate(I, bell.behavior_from_state(psi, M))
            nt.assert_true(abs(bell.bloch_objective(I, psi, vectors) - born) < 1e-9)
    nt.assert_raises(InvalidArgument, bell.bloch_objective, bell.cglmp(3), np.ones(9), [])


def test_correlation_tensor_of_bell_pair():
    t = bell.correlation_tensor(bell_pair(), 2)
    nt.assert_true(np.allclose(np.diag(t), [1, 1, -1, 1]))


def test_json_round_trip():
    I = bell.cglmp(3)
    J = bell.parse_inequality(bell.inequality_to_json(I))
    nt.assert_equal(J.name, I.name)
    nt.assert_true(np.allclose(J.coeffs, I.coeffs))
    path = temp_dir()
    try:
        spec = os.path.join(path, 'chsh.json')
        with open(spec, 'w') as f:
            f.write(bell.inequality_to_json(bell.chsh()))
        nt.assert_true(np.allclose(bell.load_inequality(spec).coeffs, bell.chsh().coeffs))
    finally:
        remove(path)


def _expect_error(text, fragment):
    try:
        bell.parse_inequality(text)
    except InvalidArgument as e:
        nt.assert_true(fragment in str(e), "%r not in %r" % (fragment, str(e)))
    else:
        raise AssertionError("no error for %r" % text)


def test_json_errors():
    _expect_error('{"parties": 2,\n "outcomes": [2, 2]\n', 'line 3')
    _expect_error('{"parties": 2, "outcomes": [2, 2], "settings": [2, 2]}', 'coefficients')
    _expect_error('{"parties": 2, "outcomes": [2, 4], "settings": [2, 2], "coefficients": []}', 'outcomes[1]')
    base = '{"parties": 2, "outcomes": [2, 2], "settings": [2, 2], "coefficients": [%s]}'
    good = '{"a": [0, 0], "x": [0, 0], "value": 1}'
    _expect_error(base % (good + ', {"a": [0, 2], "x": [0, 0], "value": 1}'), 'coefficients[1].a')
    _expect_error(base % (good + ', {"a": [0], "x": [0, 0], "value": 1}'), 'coefficients[1].a')
    _expect_error(base % (good + ', {"a": [0, 0], "x": [0, 0], "value": "x"}'), 'coefficients[1].value')
    _expect_error(base % (good + ', ' + good), 'duplicate')
    nt.assert_equal(bell.parse_inequality(base % good).coeffs[0, 0, 0, 0], 1.0)


def test_relabel_validation():
    nt.assert_raises(InvalidArgument, bell.relabel, bell.chsh(), 0, outcomes=[0, 0])
    flipped = bell.relabel(bell.chsh(), 0, outcomes=[1, 0])
    nt.assert_true(np.allclose(flipped.coeffs, -bell.chsh().coeffs))
