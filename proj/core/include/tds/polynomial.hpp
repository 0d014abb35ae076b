#pragma once

#include <complex>
#include <initializer_list>
#include <span>
#include <vector>

namespace tds {

using cplx = std::complex<double>;

/**
 * Real polynomial with ascending coefficients (coeffs[k] multiplies x^k).
 *
 * Trailing zeros are stripped on construction, so the zero polynomial has an
 * empty coefficient vector and degree -1.
 */
class RealPolynomial {
public:
    RealPolynomial() = default;
    explicit RealPolynomial(std::vector<double> ascending);
    RealPolynomial(std::initializer_list<double> ascending);

    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    bool is_zero() const { return coeffs_.empty(); }
    const std::vector<double>& coeffs() const { return coeffs_; }
    double operator[](int k) const;

    cplx operator()(cplx x) const;
    double operator()(double x) const;

    // Value of the k-th derivative at x without forming the derivative.
    cplx derivative_at(cplx x, int order) const;
    // Sum over monomials of |c_k| * (d^order/dx^order x^k at |x|): the scale
    // of the rounding error committed when evaluating derivative_at.
    double magnitude_at(double abs_x, int order) const;

    RealPolynomial derivative(int order = 1) const;

    friend RealPolynomial operator+(const RealPolynomial& a, const RealPolynomial& b);
    friend RealPolynomial operator-(const RealPolynomial& a, const RealPolynomial& b);
    friend RealPolynomial operator*(const RealPolynomial& a, const RealPolynomial& b);
    friend RealPolynomial operator*(double s, const RealPolynomial& p);
    friend bool operator==(const RealPolynomial& a, const RealPolynomial& b) = default;

private:
    std::vector<double> coeffs_;
};

// Falling factorial k (k-1) ... (k-order+1).
double falling_factorial(int k, int order);
double binomial(int n, int k);
double factorial(int n);

struct PolynomialRootOptions {
    int max_iterations = 500;
    double tolerance = 1e-15;
    // Roots closer than cluster_tol * max(1, |root|) are averaged into one
    // cluster of the combined multiplicity.
    double cluster_tol = 0.0;
};

struct PolyRootCluster {
    cplx center;
    int multiplicity = 1;
};

// All roots of sum c_k x^k (Aberth-Ehrlich), with multiplicity, unsorted.
std::vector<cplx> polynomial_roots(std::span<const cplx> ascending, const PolynomialRootOptions& opts = {});
std::vector<cplx> polynomial_roots(const RealPolynomial& p, const PolynomialRootOptions& opts = {});

// Groups numerically coincident roots; the cluster center is the mean, which
// is far better conditioned than any single member.
std::vector<PolyRootCluster> cluster_roots(const std::vector<cplx>& roots, double rel_tol);

cplx evaluate_complex_poly(std::span<const cplx> ascending, cplx x);

}  // namespace tds
