"""
Bell inequalities as coefficient tensors.

A BellInequality over n parties keeps its coefficients I^a_x as a real numpy
array whose first n axes are the outcomes a_i (length d_i) and whose last n
axes are the settings x_i (length m_i). Behaviors use the same layout, so a
Bell value is a plain elementwise product and sum.

The correlator picture is the discrete Fourier transform over the outcome
axes: with C^k_x = sum_a omega^{k.a} p(a|x) the coefficients are
Ĩ^k_x = D^{-1} sum_a omega^{-k.a} I^a_x, D = prod d_i, and
sum Ĩ^k_x C^k_x = sum I^a_x p(a|x).
"""
import itertools
import json
import logging

import numpy as np

from magicwit.algebra import TOLERANCE, is_unitary, modulus, omega, pauli_vector
from magicwit.util import InvalidArgument, check_budget

DEFAULT_STRATEGY_BUDGET = 2 ** 24
NORMALIZATION_TOLERANCE = 1e-9

log = logging.getLogger('magicwit.bell')


def _shape(dims, settings):
    dims = tuple(int(modulus(d)) for d in dims)
    settings = tuple(int(m) for m in settings)
    if len(dims) != len(settings) or not dims:
        raise InvalidArgument("need one setting count per party, got dims %s settings %s" % (dims, settings))
    if any(m < 1 for m in settings):
        raise InvalidArgument("setting counts must be positive: %s" % (settings,))
    return dims, settings


class BellInequality(object):

    def __init__(self, coeffs, dims, settings, name=None, bounds=None):
        self.dims, self.settings = _shape(dims, settings)
        coeffs = np.array(coeffs, dtype=float)
        if coeffs.shape != self.dims + self.settings:
            raise InvalidArgument("coefficient shape %s, expected %s" % (coeffs.shape, self.dims + self.settings))
        if not np.all(np.isfinite(coeffs)):
            raise InvalidArgument("coefficients must be finite")
        coeffs.setflags(write=False)
        self.coeffs = coeffs
        self.name = name
        self.bounds = dict(bounds or {})

    @property
    def n(self):
        return len(self.dims)

    @property
    def outcome_axes(self):
        return tuple(range(self.n))

    def is_qubit(self):
        return all(d == 2 for d in self.dims)

    def __repr__(self):
        return "BellInequality(name=%r, dims=%s, settings=%s)" % (self.name, self.dims, self.settings)


class CorrelatorForm(object):

    def __init__(self, coeffs, dims, settings):
        self.dims, self.settings = _shape(dims, settings)
        coeffs = np.array(coeffs, dtype=complex)
        if coeffs.shape != self.dims + self.settings:
            raise InvalidArgument("coefficient shape %s, expected %s" % (coeffs.shape, self.dims + self.settings))
        coeffs.setflags(write=False)
        self.coeffs = coeffs

    def to_inequality(self, name=None, bounds=None):
        """Inverse transform, I = D * ifft(Ĩ); the result must be real."""
        axes = tuple(range(len(self.dims)))
        full = np.fft.ifftn(self.coeffs, axes=axes) * np.prod(self.dims)
        if np.max(np.abs(full.imag)) > 1e-9:
            raise InvalidArgument("correlator coefficients do not describe a real inequality")
        return BellInequality(full.real, self.dims, self.settings, name=name, bounds=bounds)

    def is_hermitian(self, tol=1e-9):
        neg = self.coeffs
        for axis, d in enumerate(self.dims):
            neg = np.take(neg, (-np.arange(d)) % d, axis=axis)
        return np.max(np.abs(neg - self.coeffs.conj())) < tol


class Behavior(object):

    def __init__(self, p, dims, settings):
        self.dims, self.settings = _shape(dims, settings)
        p = np.array(p, dtype=float)
        if p.shape != self.dims + self.settings:
            raise InvalidArgument("behavior shape %s, expected %s" % (p.shape, self.dims + self.settings))
        if np.min(p) < -NORMALIZATION_TOLERANCE:
            raise InvalidArgument("negative probability %g" % np.min(p))
        sums = p.sum(axis=tuple(range(len(self.dims))))
        if np.max(np.abs(sums - 1)) > NORMALIZATION_TOLERANCE:
            raise InvalidArgument("probabilities do not sum to one for every setting")
        p.setflags(write=False)
        self.p = p

    @classmethod
    def from_correlators(cls, correlators, dims, settings):
        """p(a|x) = D^{-1} sum_k omega^{-k.a} C^k_x"""
        dims, settings = _shape(dims, settings)
        axes = tuple(range(len(dims)))
        p = np.fft.fftn(np.asarray(correlators, dtype=complex), axes=axes) / np.prod(dims)
        if np.max(np.abs(p.imag)) > 1e-9:
            raise InvalidArgument("correlators do not describe a real behavior")
        return cls(p.real, dims, settings)

    @classmethod
    def uniform(cls, dims, settings):
        dims, settings = _shape(dims, settings)
        return cls(np.full(dims + settings, 1.0 / np.prod(dims)), dims, settings)

    @classmethod
    def deterministic(cls, dims, settings, strategy):
        """strategy[i][x_i] is the outcome party i outputs on setting x_i."""
        dims, settings = _shape(dims, settings)
        p = np.ones(())
        for i, (d, m) in enumerate(zip(dims, settings)):
            table = np.zeros((d, m))
            table[list(strategy[i]), np.arange(m)] = 1
            p = np.multiply.outer(p, table)
        # axes come out as (a0, x0, a1, x1, ...)
        n = len(dims)
        p = np.transpose(p, [2 * i for i in range(n)] + [2 * i + 1 for i in range(n)])
        return cls(p, dims, settings)


def fourier_coefficients(I):
    return CorrelatorForm(np.fft.fftn(I.coeffs, axes=I.outcome_axes) / np.prod(I.dims), I.dims, I.settings)


def correlators_from_behavior(p):
    """C^k_x = sum_a omega^{k.a} p(a|x), as a complex array in the behavior layout."""
    axes = tuple(range(len(p.dims)))
    return np.fft.ifftn(p.p, axes=axes) * np.prod(p.dims)


def _label_matrix(labels, d):
    out = np.zeros((d, d))
    out[np.arange(len(labels)), labels] = 1
    return out


def behavior_from_state(state, M):
    """
    Born rule for a pure state under the projective measurements M. Party i's
    setting x_i has eigenbasis M.bases[i][x_i] (columns) and the outcome label
    of each eigenvector in M.labels[i][x_i].
    """
    psi = np.asarray(getattr(state, 'amplitudes', state), dtype=complex).ravel()
    dims = tuple(M.dims)
    settings = tuple(len(b) for b in M.bases)
    if psi.size != int(np.prod(dims)):
        raise InvalidArgument("state of size %d does not match measurement dims %s" % (psi.size, dims))
    rotations = []
    relabel = []
    for i, d in enumerate(dims):
        rows = []
        lrows = []
        for s, basis in enumerate(M.bases[i]):
            basis = np.asarray(basis)
            if basis.shape != (d, d) or not is_unitary(basis, 1e-8):
                raise InvalidArgument("party %d setting %d is not a complete orthonormal basis" % (i, s))
            rows.append(basis.conj().T)
            lrows.append(_label_matrix(M.labels[i][s], d))
        rotations.append(rows)
        relabel.append(lrows)
    p = np.zeros(dims + settings)
    for x in itertools.product(*[range(m) for m in settings]):
        t = psi.reshape(dims)
        for i in range(len(dims)):
            t = np.moveaxis(np.tensordot(rotations[i][x[i]], t, axes=([1], [i])), 0, i)
        q = np.abs(t) ** 2
        for i in range(len(dims)):
            q = np.moveaxis(np.tensordot(relabel[i][x[i]], q, axes=([0], [i])), 0, i)
        p[(Ellipsis,) + x] = q
    norm = np.linalg.norm(psi) ** 2
    return Behavior(p / norm, dims, settings)


def evaluate(I, p):
    if I.dims != p.dims or I.settings != p.settings:
        raise InvalidArgument("inequality %s/%s and behavior %s/%s do not match" %
                              (I.dims, I.settings, p.dims, p.settings))
    return float(np.sum(I.coeffs * p.p))


def strategy_count(I):
    count = 1
    for d, m in zip(I.dims, I.settings):
        count *= d ** m
    return count


def _one_hot_strategies(d, m):
    for f in itertools.product(range(d), repeat=m):
        table = np.zeros((m, d))
        table[np.arange(m), f] = 1
        yield f, table


def local_strategy(I, budget=DEFAULT_STRATEGY_BUDGET):
    """
    Best deterministic local strategy as (value, [outcome tuple per party]).
    All parties but the last are enumerated; the last one answers each of its
    settings with the best outcome given the others.
    """
    check_budget(strategy_count(I), budget, "local bound of %s" % (I.name or 'inequality'))
    n = I.n
    best = None
    choices = [list(_one_hot_strategies(d, m)) for d, m in zip(I.dims[:-1], I.settings[:-1])]
    for combo in itertools.product(*choices):
        t = I.coeffs
        for k, (_, table) in enumerate(combo):
            remaining = n - k
            t = np.tensordot(t, table, axes=([0, remaining], [1, 0]))
        # t has axes (a_last, x_last)
        value = float(np.sum(np.max(t, axis=0)))
        if best is None or value > best[0] + TOLERANCE:
            last = tuple(int(a) for a in np.argmax(t, axis=0))
            best = (value, [f for f, _ in combo] + [last])
    return best


def local_bound(I, budget=DEFAULT_STRATEGY_BUDGET):
    return local_strategy(I, budget)[0]


def correlator_term(dims, settings, term, weight):
    """
    Probability-form tensor of weight * <prod_i A_i^{x_i}> for the binary
    outcome parties named in term (a dict party -> setting). Parties outside
    the term are marginalized with their settings averaged.
    """
    dims, settings = _shape(dims, settings)
    t = np.full(dims + settings, float(weight))
    n = len(dims)
    for i in range(n):
        idx = [np.newaxis] * (2 * n)
        if i in term:
            sign = (-1.0) ** np.arange(dims[i])
            idx[i] = slice(None)
            t = t * sign[tuple(idx)]
            mask = np.zeros(settings[i])
            mask[term[i]] = 1
            idx = [np.newaxis] * (2 * n)
            idx[n + i] = slice(None)
            t = t * mask[tuple(idx)]
        else:
            t = t / settings[i]
    return t


def chsh():
    return tilted_chsh(0.0, name='chsh')


def tilted_chsh(alpha, closed=False, name=None):
    """alpha <A_1^0> + sum_{x1,x2} (-1)^{x1 x2} <A_1^{x1} A_2^{x2}>"""
    alpha = float(alpha)
    upper_ok = alpha <= 2 if closed else alpha < 2
    if not (alpha >= 0 and upper_ok):
        raise InvalidArgument("tilting parameter must lie in [0, 2), got %g" % alpha)
    dims, settings = (2, 2), (2, 2)
    coeffs = correlator_term(dims, settings, {0: 0}, alpha)
    for x1 in range(2):
        for x2 in range(2):
            coeffs += correlator_term(dims, settings, {0: x1, 1: x2}, (-1) ** (x1 * x2))
    bounds = {'local': 2 + alpha, 'stabilizer': max(2 * np.sqrt(2), 2 + alpha),
              'quantum': np.sqrt(8 + 2 * alpha ** 2)}
    return BellInequality(coeffs, dims, settings, name=name or 'tilted-chsh', bounds=bounds)


def cglmp_weights(d):
    d = int(d)
    return [1 - 2.0 * k / (d - 1) for k in range(d // 2)]


def cglmp_phases(d):
    """c_l = sum_k w_k (omega^{-kl} - omega^{(k+1)l}) for l = 0..d-1"""
    d = int(modulus(d))
    w = omega(d)
    out = np.zeros(d, dtype=complex)
    for l in range(d):
        out[l] = sum(wk * (w ** (-k * l) - w ** ((k + 1) * l)) for k, wk in enumerate(cglmp_weights(d)))
    return out


def cglmp(d):
    """
    Two parties, two settings, d outcomes. Assembled in correlator form:
    the (l, -l) correlators carry c_l/d for equal settings and
    conj(c_l) omega^{x l}/d when party one uses x and party two uses x+1 mod 2.
    The 1/d puts the inequality in the normalization with local bound 2.
    """
    d = int(modulus(d))
    c = cglmp_phases(d)
    w = omega(d)
    coeffs = np.zeros((d, d, 2, 2), dtype=complex)
    for l in range(1, d):
        for x in range(2):
            coeffs[l, (-l) % d, x, x] = c[l] / d
            coeffs[l, (-l) % d, x, 1 - x] = np.conj(c[l]) * w ** (x * l) / d
    bounds = {'local': 2.0}
    return CorrelatorForm(coeffs, (d, d), (2, 2)).to_inequality(name='cglmp-d%d' % d, bounds=bounds)


def svetlichny():
    """Full correlators weighted +1 when at most one party uses setting 1, -1 otherwise."""
    dims, settings = (2, 2, 2), (2, 2, 2)
    coeffs = np.zeros(dims + settings)
    for x in itertools.product(range(2), repeat=3):
        sign = 1 if sum(x) <= 1 else -1
        coeffs += correlator_term(dims, settings, dict(enumerate(x)), sign)
    return BellInequality(coeffs, dims, settings, name='svetlichny', bounds={'local': 4.0})


def two_body_r2():
    """sum over pairs i < j and s of <A_i^s A_j^{s+1}>"""
    dims, settings = (2, 2, 2), (2, 2, 2)
    coeffs = np.zeros(dims + settings)
    for i, j in itertools.combinations(range(3), 2):
        for s in range(2):
            coeffs += correlator_term(dims, settings, {i: s, j: 1 - s}, 1)
    return BellInequality(coeffs, dims, settings, name='r2', bounds={'local': 6.0})


def svetlichny_r2():
    coeffs = svetlichny().coeffs + two_body_r2().coeffs
    return BellInequality(coeffs, (2, 2, 2), (2, 2, 2), name='svetlichny-r2', bounds={'local': 6.0})


CATALOG = {
    'chsh': lambda **kw: chsh(),
    'tilted-chsh': lambda alpha=0.0, **kw: tilted_chsh(alpha, closed=kw.get('closed', False)),
    'cglmp': lambda d=3, **kw: cglmp(d),
    'svetlichny-r2': lambda **kw: svetlichny_r2(),
}


def catalog(name, **params):
    try:
        factory = CATALOG[name]
    except KeyError:
        raise InvalidArgument("unknown inequality %r, expected one of %s" % (name, ', '.join(sorted(CATALOG))))
    return factory(**dict((k, v) for k, v in params.items() if v is not None))


def relabel(I, party, outcomes=None, settings=None):
    """New inequality whose party outcome a reads old outcome outcomes[a], likewise for settings."""
    coeffs = I.coeffs
    if outcomes is not None:
        if sorted(outcomes) != list(range(I.dims[party])):
            raise InvalidArgument("outcome relabeling must be a permutation")
        coeffs = np.take(coeffs, list(outcomes), axis=party)
    if settings is not None:
        if sorted(settings) != list(range(I.settings[party])):
            raise InvalidArgument("setting relabeling must be a permutation")
        coeffs = np.take(coeffs, list(settings), axis=I.n + party)
    return BellInequality(coeffs, I.dims, I.settings, name=I.name, bounds=I.bounds)


def correlation_tensor(state, n):
    """R[mu_1..mu_n] = <sigma_mu1 (x) ... (x) sigma_mun> with sigma_0 = identity."""
    psi = np.asarray(getattr(state, 'amplitudes', state), dtype=complex).ravel()
    paulis = [np.eye(2, dtype=complex)] + list(pauli_vector())
    rho = np.outer(psi, psi.conj()).reshape((2,) * (2 * n))
    t = rho
    # contract one party at a time: tr(rho sigma) = sum rho[a..., b...] sigma[b, a]
    for i in range(n):
        basis = np.array(paulis)
        t = np.tensordot(t, basis, axes=([0, n - i], [2, 1]))
    return np.real(t)


def bloch_objective(I, state, vectors):
    """
    Qubit Bell value as the explicit polynomial in Bloch vectors:
    sum_{a,x} I^a_x sum_mu R_mu prod_i m_i(a_i, x_i)_mu with
    m = (1, (-1)^a u_{i,x}) / 2.
    """
    if not I.is_qubit():
        raise InvalidArgument("bloch objective needs qubit parties, dims are %s" % (I.dims,))
    n = I.n
    t = correlation_tensor(state, n)
    factors = []
    for i in range(n):
        m = np.zeros((2, I.settings[i], 4))
        for s in range(I.settings[i]):
            u = np.asarray(vectors[i][s], dtype=float)
            for a in range(2):
                m[a, s] = np.concatenate([[1.0], (-1) ** a * u]) / 2
        factors.append(m)
    value = I.coeffs
    for i in range(n):
        # contract outcome and setting of party i against m, leaving the Pauli index
        value = np.tensordot(value, factors[i], axes=([0, n - i], [0, 1]))
    # value now has axes (mu_1 .. mu_n)
    return float(np.sum(value * t))


def inequality_to_dict(I):
    records = []
    for idx in zip(*np.nonzero(I.coeffs)):
        idx = [int(v) for v in idx]
        records.append({'a': idx[:I.n], 'x': idx[I.n:], 'value': float(I.coeffs[tuple(idx)])})
    out = {'parties': I.n, 'outcomes': list(I.dims), 'settings': list(I.settings), 'coefficients': records}
    if I.name:
        out['name'] = I.name
    return out


def inequality_to_json(I):
    return json.dumps(inequality_to_dict(I), sort_keys=True, indent=2)


def _field(doc, key, path):
    if key not in doc:
        raise InvalidArgument("%s: missing field" % (path + key))
    return doc[key]


def _int_list(value, length, path):
    if not isinstance(value, list) or len(value) != length or \
            not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
        raise InvalidArgument("%s: expected a list of %d integers" % (path, length))
    return value


def inequality_from_dict(doc):
    if not isinstance(doc, dict):
        raise InvalidArgument("top level: expected an object")
    n = _field(doc, 'parties', '')
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise InvalidArgument("parties: expected a positive integer")
    dims = _int_list(_field(doc, 'outcomes', ''), n, 'outcomes')
    settings = _int_list(_field(doc, 'settings', ''), n, 'settings')
    for i, d in enumerate(dims):
        try:
            modulus(d)
        except InvalidArgument:
            raise InvalidArgument("outcomes[%d]: %r is not prime" % (i, d))
    for i, m in enumerate(settings):
        if m < 1:
            raise InvalidArgument("settings[%d]: must be positive" % i)
    records = _field(doc, 'coefficients', '')
    if not isinstance(records, list):
        raise InvalidArgument("coefficients: expected a list")
    coeffs = np.zeros(tuple(dims) + tuple(settings))
    seen = set()
    for r, rec in enumerate(records):
        path = 'coefficients[%d].' % r
        if not isinstance(rec, dict):
            raise InvalidArgument("coefficients[%d]: expected an object" % r)
        a = _int_list(_field(rec, 'a', path), n, path + 'a')
        x = _int_list(_field(rec, 'x', path), n, path + 'x')
        value = _field(rec, 'value', path)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise InvalidArgument("%svalue: expected a number" % path)
        for i in range(n):
            if not 0 <= a[i] < dims[i]:
                raise InvalidArgument("%sa: outcome %d out of range for party %d" % (path, a[i], i))
            if not 0 <= x[i] < settings[i]:
                raise InvalidArgument("%sx: setting %d out of range for party %d" % (path, x[i], i))
        key = tuple(a) + tuple(x)
        if key in seen:
            raise InvalidArgument("%s: duplicate entry for a=%s x=%s" % (path[:-1], a, x))
        seen.add(key)
        coeffs[key] = value
    return BellInequality(coeffs, dims, settings, name=doc.get('name'))


def parse_inequality(text):
    try:
        doc = json.loads(text)
    except ValueError as e:
        lineno = getattr(e, 'lineno', None)
        if lineno is not None:
            raise InvalidArgument("line %d column %d: %s" % (lineno, e.colno, e.msg))
        raise InvalidArgument("invalid JSON: %s" % e)
    return inequality_from_dict(doc)


def load_inequality(path):
    try:
        with open(path, encoding='utf-8') as f:
            text = f.read()
    except (IOError, OSError, UnicodeDecodeError) as e:
        raise InvalidArgument("cannot read %s: %s" % (path, e))
    try:
        return parse_inequality(text)
    except InvalidArgument as e:
        raise InvalidArgument("%s: %s" % (path, e))
