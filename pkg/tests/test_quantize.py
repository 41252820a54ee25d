import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from csquant.fock import (
    PhaseSpaceScales,
    TruncationWarning,
    displacement,
    ladder_ops,
    number_op,
    parity_op,
    position_momentum,
)
from csquant.quantize import (
    ParseError,
    Polynomial,
    QuadratureRule,
    RadialAngular,
    cs_quantize_polynomial,
    cs_quantize_quadrature,
    gaussian_weight_route,
    integral_quantize,
    lower_symbol,
    povm_positivity_check,
    quantizer_kernel,
    symplectic_fourier_gaussian,
    weighted_displacement_integral,
)

COV_MARGIN = 32  # extra levels for products with D(z0), |z0| <= 1

coeffs = st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False)
small_z = st.complex_numbers(max_magnitude=1.0, allow_nan=False, allow_infinity=False)
s_values = st.sampled_from([-1.0, -0.75, -0.5, -0.25, 0.0])


@st.composite
def polynomials(draw, max_degree=2):
    terms = {}
    for a in range(max_degree + 1):
        for b in range(max_degree + 1 - a):
            if draw(st.booleans()):
                terms[(a, b)] = draw(coeffs)
    return Polynomial(terms)


@st.composite
def real_polynomials(draw, max_degree=3):
    p = draw(polynomials(max_degree))
    conj = Polynomial({(b, a): np.conj(c) for (a, b), c in p.terms.items()})
    return p + conj


def moment_rule_oracle(a, b, n):
    """Anti-normal moment rule with exact integer factorials."""
    out = np.zeros((n, n))
    for m in range(n):
        k = m + a - b
        if 0 <= k < n:
            out[m, k] = math.factorial(m + a) / math.sqrt(math.factorial(m) * math.factorial(k))
    return out


# ---------------------------------------------------------------- parsing


@pytest.mark.parametrize("text,terms", [
    ("z^2 zbar + 0.5", {(2, 1): 1, (0, 0): 0.5}),
    ("2*z*zbar - (1+2j) z", {(1, 1): 2, (1, 0): -(1 + 2j)}),
    ("z z", {(2, 0): 1}),
    ("-zbar^3", {(0, 3): -1}),
    ("1", {(0, 0): 1}),
    ("1e-3 z", {(1, 0): 1e-3}),
])
def test_parse(text, terms):
    assert Polynomial.parse(text) == Polynomial(terms)


@pytest.mark.parametrize("text", ["", "z^^2", "w", "z +", "(1+ z", "z^-1", "2 ** z"])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        Polynomial.parse(text)


def test_polynomial_algebra():
    z = Polynomial.monomial(1, 0)
    zb = Polynomial.monomial(0, 1)
    assert (z * zb) == Polynomial.monomial(1, 1)
    assert (z + 1) ** 2 == Polynomial({(2, 0): 1, (1, 0): 2, (0, 0): 1})
    assert (z - z) == Polynomial()
    assert (z * zb).is_real and not z.is_real
    f = Polynomial.parse("z^2 zbar + 3 z")
    assert f.shift(0.5 - 1j)(0.2 + 0.3j) == pytest.approx(f(0.2 + 0.3j - (0.5 - 1j)))
    assert f.degree == 3 and f.max_harmonic == 1
    with pytest.raises(ValueError):
        Polynomial({(-1, 0): 1})


def test_position_symbol_is_real():
    q = Polynomial.position(PhaseSpaceScales(ell=2.0))
    assert q.is_real
    assert q(1.0 + 5j) == pytest.approx(2 * math.sqrt(2))


# ------------------------------------------------------- CS quantization


def test_cs_examples():
    a, _ = ladder_ops(10)
    assert np.abs(cs_quantize_polynomial(Polynomial.parse("z"), 10).matrix - a.matrix).max() <= 1e-14
    d = np.diag(cs_quantize_polynomial(Polynomial.parse("z zbar"), 10).matrix).real
    assert np.abs(d - np.arange(1, 11)).max() <= 1e-13
    assert np.array_equal(cs_quantize_polynomial(Polynomial.constant(1), 6).matrix, np.eye(6))


def test_cs_monomial_against_integer_oracle():
    for a in range(5):
        for b in range(5):
            got = cs_quantize_polynomial(Polynomial.monomial(a, b), 20).matrix
            ref = moment_rule_oracle(a, b, 20)
            assert np.abs(got - ref).max() <= 1e-13 * (1 + np.abs(ref).max())


def test_quadrature_matches_closed_form_on_monomials():
    # entries reach (n+8)!/n! ~ 1e12, so the 1e-8 bound is taken relative
    # to the largest entry
    n = 32
    rule = QuadratureRule(n + 8 + 16, 2 * (n + 8) + 1)
    for a in range(9):
        for b in range(9 - a):
            f = Polynomial.monomial(a, b)
            ref = cs_quantize_polynomial(f, n).matrix
            got = cs_quantize_quadrature(f, n, rule).matrix
            assert np.abs(got - ref).max() <= 1e-8 * (1 + np.abs(ref).max()), (a, b)


def test_quadrature_examples():
    a, _ = ladder_ops(20)
    got = cs_quantize_quadrature(Polynomial.parse("z"), 20, QuadratureRule(64, 128))
    assert np.abs(got.matrix - a.matrix).max() <= 1e-10
    one = cs_quantize_quadrature(Polynomial.constant(1), 12)
    assert np.abs(one.matrix - np.eye(12)).max() <= 1e-10
    gauss = RadialAngular(lambda r, th: np.exp(-r * r), harmonics=0)
    g = cs_quantize_quadrature(gauss, 16).matrix
    assert np.abs(g - np.diag(0.5 ** (np.arange(16) + 1))).max() <= 1e-12


def test_undersized_rule_warns():
    with pytest.warns(TruncationWarning):
        op = cs_quantize_quadrature(Polynomial.parse("z^3"), 16, QuadratureRule(4, 5))
    assert op.warnings


def test_non_finite_samples_raise():
    bad = RadialAngular(lambda r, th: np.where(r > 1, np.nan, 1.0))
    with pytest.raises(FloatingPointError):
        cs_quantize_quadrature(bad, 8)


# ------------------------------------------------------------ lower symbols


def test_lower_symbol_examples():
    a, _ = ladder_ops(40)
    assert lower_symbol(a, 0.7 + 0.2j) == pytest.approx(0.7 + 0.2j, abs=1e-12)
    assert lower_symbol(np.eye(30), 1.1 - 0.4j) == pytest.approx(1.0, abs=1e-12)
    # q^2 quantized then sampled: two Gaussian smoothings of ell^2/2 each
    q2 = Polynomial.position() ** 2
    op = cs_quantize_polynomial(q2, 60)
    for q in (0.0, 0.5, 1.3):
        z = PhaseSpaceScales().z_of(q, 0.0)
        assert lower_symbol(op, z) == pytest.approx(q * q + 1.0, abs=1e-10)


def test_lower_symbol_warns_when_z_too_large():
    with pytest.warns(TruncationWarning):
        lower_symbol(np.eye(8), 2.0)


@given(st.integers(min_value=0, max_value=3), small_z)
def test_lower_symbol_of_holomorphic_monomial(a, z):
    op = cs_quantize_polynomial(Polynomial.monomial(a, 0), 48)
    assert abs(lower_symbol(op, z) - z ** a) <= 1e-8


@given(real_polynomials(), small_z)
def test_lower_symbol_of_hermitian_is_real(f, z):
    op = cs_quantize_polynomial(f, 40)
    assert abs(lower_symbol(op, z).imag) <= 1e-10 * (1 + abs(lower_symbol(op, z)))


# ------------------------------------------------------------------ kernels


def test_kernel_examples():
    e0 = np.zeros((6, 6))
    e0[0, 0] = 1
    assert np.array_equal(quantizer_kernel(-1, 6).kernel.matrix, e0)
    assert np.array_equal(quantizer_kernel(0, 6).kernel.matrix, 2 * parity_op(6).matrix)
    assert np.allclose(quantizer_kernel(-3, 5).diagonal, 0.5 ** (np.arange(5) + 1), atol=0, rtol=1e-15)
    with pytest.raises(ValueError):
        quantizer_kernel(1.0, 4)


def test_kernel_limits():
    k = quantizer_kernel(-1, 10).kernel.matrix
    assert np.linalg.matrix_rank(k) == 1 and np.allclose(k @ k, k)
    w = quantizer_kernel(0, 10).kernel.matrix
    assert np.array_equal(w @ w, 4 * np.eye(10))


def test_gaussian_average_of_displacement():
    n = 32
    got = weighted_displacement_integral(-1, n).matrix
    e0 = np.zeros((n, n))
    e0[0, 0] = 1
    assert np.abs(got - e0).max() <= 1e-6


@pytest.mark.parametrize("s", [-3.0, -1.0, -0.5, 0.0])
def test_weighted_displacement_integral_gives_kernel(s):
    got = weighted_displacement_integral(s, 16).matrix
    assert np.abs(got - quantizer_kernel(s, 16).kernel.matrix).max() <= 1e-10


def test_povm_examples():
    assert tuple(povm_positivity_check(-1)) == (True, 0.0)
    assert tuple(povm_positivity_check(0)) == (False, -2.0)
    ok, lo = povm_positivity_check(-2, 12)
    assert ok and lo == pytest.approx((2 / 3) * (1 / 3) ** 11)
    verdicts = [povm_positivity_check(s).is_positive for s in (-2, -1, -0.5, 0)]
    assert verdicts == [True, True, False, False]


# ------------------------------------------------------ integral quantization


@pytest.mark.parametrize("s", [-1.0, -0.5, 0.0])
def test_integral_examples(s):
    n = 20
    a, ad = ladder_ops(n)
    assert np.abs(integral_quantize(Polynomial.parse("z"), s, n).matrix - a.matrix).max() <= 1e-8
    assert np.abs(integral_quantize(Polynomial.constant(1), s, n).matrix - np.eye(n)).max() <= 1e-8


def test_weyl_symbol_of_modulus_squared_is_symmetric_order():
    n = 24
    a, ad = ladder_ops(n + 1)
    sym = 0.5 * (a.matrix @ ad.matrix + ad.matrix @ a.matrix)[:n, :n]
    got = integral_quantize(Polynomial.parse("z zbar"), 0.0, n).matrix
    assert np.abs(got - sym).max() <= 1e-8
    assert np.abs(got - number_op(n).matrix - 0.5 * np.eye(n)).max() <= 1e-8


def test_ordering_diagonals():
    n = 32
    zz = Polynomial.parse("z zbar")
    for s, shift in [(-1.0, 1.0), (-0.5, 0.75), (0.0, 0.5)]:
        d = np.diag(integral_quantize(zz, s, n).matrix).real
        assert np.abs(d - (np.arange(n) + shift)).max() <= 1e-8


def test_integral_matches_cs_at_s_minus_one():
    f = Polynomial.parse("z^2 zbar + (0.5-1j) zbar^2 + 3")
    n = 24
    assert np.abs(integral_quantize(f, -1, n).matrix - cs_quantize_quadrature(f, n).matrix).max() <= 1e-8


def test_integral_rejects_out_of_range_s():
    for s in (0.5, -1.5):
        with pytest.raises(ValueError):
            integral_quantize(Polynomial.parse("z"), s, 8)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.5])
@pytest.mark.parametrize("s", [-1.0, -0.4, 0.0])
def test_gaussian_routes_agree(alpha, s):
    n = 20
    f = RadialAngular(lambda r, th: np.exp(-alpha * r * r), harmonics=0)
    direct = integral_quantize(f, s, n, QuadratureRule(96, 2 * n + 1)).matrix
    weight = gaussian_weight_route(alpha, s, n).matrix
    assert np.abs(direct - weight).max() <= 1e-10


# ---------------------------------------------------------- Fourier transform


def _brute_force_fourier(alpha, z):
    # int exp(z conj(xi) - conj(z) xi) exp(-alpha |xi|^2) d^2 xi / pi
    def re(y, x):
        xi = complex(x, y)
        return (np.exp(z * xi.conjugate() - z.conjugate() * xi) * np.exp(-alpha * abs(xi) ** 2)).real
    lim = 9 / math.sqrt(alpha)
    val, _ = integrate.dblquad(re, -lim, lim, -lim, lim, epsabs=1e-12, epsrel=1e-11)
    return val / math.pi


@pytest.mark.parametrize("alpha,z", [(1.0, 0.0), (1.0, 0.3 + 0.4j), (2.0, 1 + 1j), (0.7, -0.5j)])
def test_symplectic_fourier_against_brute_force(alpha, z):
    assert symplectic_fourier_gaussian(alpha, z) == pytest.approx(_brute_force_fourier(alpha, z), abs=1e-9)


def test_symplectic_fourier_examples():
    assert symplectic_fourier_gaussian(1.0, 0) == 1.0
    z = 1 + 1j
    once = symplectic_fourier_gaussian(2.0, z)
    # the transform of a Gaussian is a Gaussian with alpha -> 1/alpha
    twice = symplectic_fourier_gaussian(0.5, z, amplitude=1 / 2.0)
    assert twice == pytest.approx(math.exp(-4))
    assert once == pytest.approx(0.5 * math.exp(-1))
    for w in (0.0, 0.3, 1 - 2j):
        assert symplectic_fourier_gaussian(1.0, w) == pytest.approx(math.exp(-abs(w) ** 2))
    with pytest.raises(ValueError):
        symplectic_fourier_gaussian(0.0, 1.0)


# ----------------------------------------------------------------- properties


@given(polynomials(3), polynomials(3), coeffs, coeffs)
def test_linearity_polynomial(f, g, x, y):
    n = 16
    lhs = cs_quantize_polynomial(x * f + y * g, n).matrix
    rhs = x * cs_quantize_polynomial(f, n).matrix + y * cs_quantize_polynomial(g, n).matrix
    assert np.abs(lhs - rhs).max() <= 1e-12 * (1 + np.abs(lhs).max())


@given(polynomials(2), polynomials(2), coeffs, coeffs, s_values)
def test_linearity_quadrature(f, g, x, y, s):
    n = 12
    rule = QuadratureRule(40, 2 * (n + 2) + 1)
    lhs = integral_quantize(x * f + y * g, s, n, rule).matrix
    rhs = x * integral_quantize(f, s, n, rule).matrix + y * integral_quantize(g, s, n, rule).matrix
    assert np.abs(lhs - rhs).max() <= 1e-10 * (1 + np.abs(lhs).max())


@given(real_polynomials(), s_values)
def test_reality(f, s):
    n = 12
    m = integral_quantize(f, s, n).matrix
    assert np.abs(m - m.conj().T).max() <= 1e-10 * (1 + np.abs(m).max())
    c = cs_quantize_polynomial(f, n).matrix
    assert np.abs(c - c.conj().T).max() <= 1e-10 * (1 + np.abs(c).max())


@given(polynomials(2), small_z, s_values)
def test_covariance(f, z0, s):
    n = 10
    big = n + COV_MARGIN
    d = displacement(z0, big).matrix
    a = integral_quantize(f, s, big).matrix
    b = integral_quantize(f.shift(z0), s, big).matrix
    assert np.abs((d @ a @ d.conj().T - b)[:n, :n]).max() <= 1e-6
