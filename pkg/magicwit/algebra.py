"""
Prime-field arithmetic and the generalized Pauli (Weyl) operators.

All matrices are dense complex numpy arrays. Site order in tensor products is
party order 0..n-1 throughout the package.
"""
import numpy as np
from functools import reduce

from magicwit.util import InvalidArgument

TOLERANCE = 1e-10


def is_prime(n):
    n = int(n)
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    k = 3
    while k * k <= n:
        if n % k == 0:
            return False
        k += 2
    return True


class PrimeModulus(object):
    """A prime local dimension d."""

    __slots__ = ('d',)

    def __init__(self, d):
        if isinstance(d, PrimeModulus):
            d = d.d
        if int(d) != d or not is_prime(d):
            raise InvalidArgument("dimension must be prime: %r" % (d,))
        object.__setattr__(self, 'd', int(d))

    def __setattr__(self, name, value):
        raise AttributeError("PrimeModulus is immutable")

    def __int__(self):
        return self.d

    def __index__(self):
        return self.d

    def __eq__(self, other):
        if isinstance(other, PrimeModulus):
            return self.d == other.d
        if isinstance(other, (int, np.integer)):
            return self.d == other
        return NotImplemented

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    def __hash__(self):
        return hash(self.d)

    def __repr__(self):
        return "PrimeModulus(%d)" % self.d

    def element(self, value):
        return FieldElement(value, self)


def modulus(d):
    if isinstance(d, PrimeModulus):
        return d
    return PrimeModulus(d)


class FieldElement(object):
    """An element of F_d, always reduced into [0, d)."""

    __slots__ = ('value', 'modulus')

    def __init__(self, value, d):
        m = modulus(d)
        object.__setattr__(self, 'modulus', m)
        object.__setattr__(self, 'value', int(value) % m.d)

    def __setattr__(self, name, value):
        raise AttributeError("FieldElement is immutable")

    def _coerce(self, other):
        if isinstance(other, FieldElement):
            if other.modulus != self.modulus:
                raise InvalidArgument("mixed moduli %d and %d" % (self.modulus.d, other.modulus.d))
            return other.value
        return int(other)

    def __add__(self, other):
        return FieldElement(self.value + self._coerce(other), self.modulus)

    __radd__ = __add__

    def __sub__(self, other):
        return FieldElement(self.value - self._coerce(other), self.modulus)

    def __rsub__(self, other):
        return FieldElement(self._coerce(other) - self.value, self.modulus)

    def __mul__(self, other):
        return FieldElement(self.value * self._coerce(other), self.modulus)

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElement(-self.value, self.modulus)

    def __truediv__(self, other):
        return self * field_inverse(FieldElement(self._coerce(other), self.modulus))

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.modulus == other.modulus and self.value == other.value
        if isinstance(other, (int, np.integer)):
            return self.value == int(other) % self.modulus.d
        return NotImplemented

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    def __hash__(self):
        return hash((self.value, self.modulus.d))

    def __int__(self):
        return self.value

    def __index__(self):
        return self.value

    def __bool__(self):
        return self.value != 0

    def __repr__(self):
        return "%d (mod %d)" % (self.value, self.modulus.d)


def field_inverse(x):
    """Multiplicative inverse in F_d; zero has none."""
    if x.value == 0:
        raise InvalidArgument("zero has no inverse mod %d" % x.modulus.d)
    return FieldElement(pow(x.value, x.modulus.d - 2, x.modulus.d), x.modulus)


def omega(d):
    d = int(d)
    return np.exp(2j * np.pi / d)


def half_phase(d, k):
    """omega^{k/2}: i^k for d=2, omega^{k * 2^-1 mod d} for odd d."""
    d = int(d)
    if d == 2:
        return 1j ** (int(k) % 4)
    half = pow(2, d - 2, d)
    return omega(d) ** ((int(k) * half) % d)


def shift_matrix(d):
    """Generalized X: X|j> = |j+1 mod d>."""
    d = int(modulus(d))
    x = np.zeros((d, d), dtype=complex)
    for j in range(d):
        x[(j + 1) % d, j] = 1.0
    return x


def clock_matrix(d):
    """Generalized Z: Z|j> = omega^j |j>."""
    d = int(modulus(d))
    return np.diag(omega(d) ** np.arange(d))


def displacement(d, a1, a2):
    """
    Weyl displacement operator for a = (a1, a2).

    With X and Z as above, Z X = omega X Z, so the phase is omega^{+a1 a2 / 2}
    and the group law reads D_a D_b = omega^{-S(a,b)/2} D_{a+b}. For d=2 the
    half power is taken through i and the integers are used unreduced, since
    i^{a1 a2} is only 4-periodic.
    """
    d = int(modulus(d))
    a1, a2 = int(a1), int(a2)
    xa = np.linalg.matrix_power(shift_matrix(d), a1 % d)
    za = np.linalg.matrix_power(clock_matrix(d), a2 % d)
    return half_phase(d, a1 * a2) * xa.dot(za)


def symplectic_product(a, b):
    return int(a[0]) * int(b[1]) - int(a[1]) * int(b[0])


def weyl_basis(d):
    """All d^2 displacement operators keyed by (a1, a2)."""
    d = int(modulus(d))
    return dict(((a1, a2), displacement(d, a1, a2)) for a1 in range(d) for a2 in range(d))


def pauli_vector():
    """(sigma_x, sigma_y, sigma_z)."""
    return (np.array([[0, 1], [1, 0]], dtype=complex),
            np.array([[0, -1j], [1j, 0]], dtype=complex),
            np.array([[1, 0], [0, -1]], dtype=complex))


def kron(ms):
    """Kronecker product in party order."""
    ms = list(ms)
    if not ms:
        raise InvalidArgument("kron of an empty list")
    for m in ms:
        if np.size(m) == 0:
            raise InvalidArgument("kron factor is empty")
    return reduce(np.kron, [np.asarray(m, dtype=complex) for m in ms])


def is_unitary(m, tol=TOLERANCE):
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return np.max(np.abs(m.conj().T.dot(m) - np.eye(m.shape[0]))) < tol


def is_hermitian(m, tol=TOLERANCE):
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return np.max(np.abs(m - m.conj().T)) < tol


def matrices_close(a, b, tol=TOLERANCE):
    a, b = np.asarray(a), np.asarray(b)
    return a.shape == b.shape and np.max(np.abs(a - b)) < tol


def haar_unitary(d, rng):
    """Haar-random d x d unitary (QR of a Ginibre matrix with phase fix)."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diag(r)
    return q * (diag / np.abs(diag))
