#include "tds/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "tds/errors.hpp"

namespace tds {

namespace {

void strip(std::vector<double>& c) {
    while (!c.empty() && c.back() == 0.0) c.pop_back();
}

}  // namespace

RealPolynomial::RealPolynomial(std::vector<double> ascending) : coeffs_(std::move(ascending)) {
    for (double c : coeffs_)
        if (!std::isfinite(c)) throw ValidationError("polynomial coefficient is not finite");
    strip(coeffs_);
}

RealPolynomial::RealPolynomial(std::initializer_list<double> ascending)
    : RealPolynomial(std::vector<double>(ascending)) {}

double RealPolynomial::operator[](int k) const {
    if (k < 0 || k >= static_cast<int>(coeffs_.size())) return 0.0;
    return coeffs_[k];
}

cplx RealPolynomial::operator()(cplx x) const {
    cplx acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
    return acc;
}

double RealPolynomial::operator()(double x) const {
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
    return acc;
}

double falling_factorial(int k, int order) {
    double r = 1.0;
    for (int i = 0; i < order; ++i) r *= static_cast<double>(k - i);
    return r;
}

double factorial(int n) {
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return std::round(r);
}

cplx RealPolynomial::derivative_at(cplx x, int order) const {
    const int n = degree();
    if (order > n) return 0.0;
    cplx acc = 0.0;
    for (int k = n; k >= order; --k) acc = acc * x + coeffs_[k] * falling_factorial(k, order);
    return acc;
}

double RealPolynomial::magnitude_at(double abs_x, int order) const {
    const int n = degree();
    if (order > n) return 0.0;
    double acc = 0.0;
    for (int k = n; k >= order; --k) acc = acc * abs_x + std::abs(coeffs_[k]) * falling_factorial(k, order);
    return acc;
}

RealPolynomial RealPolynomial::derivative(int order) const {
    const int n = degree();
    if (order > n) return {};
    std::vector<double> d(n - order + 1);
    for (int k = order; k <= n; ++k) d[k - order] = coeffs_[k] * falling_factorial(k, order);
    return RealPolynomial(std::move(d));
}

RealPolynomial operator+(const RealPolynomial& a, const RealPolynomial& b) {
    std::vector<double> c(std::max(a.coeffs_.size(), b.coeffs_.size()), 0.0);
    for (size_t k = 0; k < a.coeffs_.size(); ++k) c[k] += a.coeffs_[k];
    for (size_t k = 0; k < b.coeffs_.size(); ++k) c[k] += b.coeffs_[k];
    return RealPolynomial(std::move(c));
}

RealPolynomial operator-(const RealPolynomial& a, const RealPolynomial& b) {
    return a + (-1.0) * b;
}

RealPolynomial operator*(const RealPolynomial& a, const RealPolynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<double> c(a.coeffs_.size() + b.coeffs_.size() - 1, 0.0);
    for (size_t i = 0; i < a.coeffs_.size(); ++i)
        for (size_t j = 0; j < b.coeffs_.size(); ++j) c[i + j] += a.coeffs_[i] * b.coeffs_[j];
    return RealPolynomial(std::move(c));
}

RealPolynomial operator*(double s, const RealPolynomial& p) {
    std::vector<double> c = p.coeffs_;
    for (double& x : c) x *= s;
    return RealPolynomial(std::move(c));
}

cplx evaluate_complex_poly(std::span<const cplx> ascending, cplx x) {
    cplx acc = 0.0;
    for (auto it = ascending.rbegin(); it != ascending.rend(); ++it) acc = acc * x + *it;
    return acc;
}

std::vector<cplx> polynomial_roots(std::span<const cplx> ascending, const PolynomialRootOptions& opts) {
    std::vector<cplx> c(ascending.begin(), ascending.end());
    while (!c.empty() && c.back() == 0.0) c.pop_back();
    if (c.empty()) throw DomainError("roots of the zero polynomial are undefined");

    std::vector<cplx> roots;
    size_t lead_zeros = 0;
    while (lead_zeros < c.size() && c[lead_zeros] == 0.0) ++lead_zeros;
    roots.assign(lead_zeros, cplx(0.0));
    c.erase(c.begin(), c.begin() + static_cast<long>(lead_zeros));

    const int n = static_cast<int>(c.size()) - 1;
    if (n == 0) return roots;
    if (n == 1) {
        roots.push_back(-c[0] / c[1]);
        return roots;
    }

    // Monic copy and derivative for the iteration.
    std::vector<cplx> a(c.size());
    for (int k = 0; k <= n; ++k) a[k] = c[k] / c[n];
    std::vector<cplx> da(n);
    for (int k = 1; k <= n; ++k) da[k - 1] = a[k] * static_cast<double>(k);
    std::vector<double> abs_a(a.size());
    for (int k = 0; k <= n; ++k) abs_a[k] = std::abs(a[k]);

    // Starting points on a circle with the geometric-mean radius, rotated off
    // the real axis so conjugate pairs do not start symmetric.
    double radius = std::pow(std::abs(a[0]), 1.0 / n);
    if (!(radius > 0.0) || !std::isfinite(radius)) radius = 1.0;
    std::vector<cplx> z(n);
    for (int i = 0; i < n; ++i)
        z[i] = std::polar(radius, 2.0 * std::numbers::pi * i / n + 0.4);

    std::vector<bool> done(n, false);
    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        bool all_done = true;
        for (int i = 0; i < n; ++i) {
            if (done[i]) continue;
            const cplx p = evaluate_complex_poly(a, z[i]);
            double scale = 0.0;
            const double az = std::abs(z[i]);
            for (int k = n; k >= 0; --k) scale = scale * az + abs_a[k];
            if (std::abs(p) <= 4.0 * std::numeric_limits<double>::epsilon() * scale) {
                done[i] = true;
                continue;
            }
            const cplx dp = evaluate_complex_poly(da, z[i]);
            const cplx ratio = p / dp;
            cplx sum = 0.0;
            for (int j = 0; j < n; ++j)
                if (j != i) sum += 1.0 / (z[i] - z[j]);
            cplx w = ratio / (1.0 - ratio * sum);
            if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) w = ratio;
            if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) {
                done[i] = true;
                continue;
            }
            z[i] -= w;
            if (std::abs(w) <= opts.tolerance * std::max(1.0, std::abs(z[i]))) done[i] = true;
            else all_done = false;
        }
        if (all_done) break;
    }
    roots.insert(roots.end(), z.begin(), z.end());
    if (opts.cluster_tol > 0.0) {
        std::vector<cplx> merged;
        for (const auto& cl : cluster_roots(roots, opts.cluster_tol))
            for (int k = 0; k < cl.multiplicity; ++k) merged.push_back(cl.center);
        return merged;
    }
    return roots;
}

std::vector<cplx> polynomial_roots(const RealPolynomial& p, const PolynomialRootOptions& opts) {
    std::vector<cplx> c(p.coeffs().begin(), p.coeffs().end());
    return polynomial_roots(std::span<const cplx>(c), opts);
}

std::vector<PolyRootCluster> cluster_roots(const std::vector<cplx>& roots, double rel_tol) {
    const size_t n = roots.size();
    std::vector<size_t> parent(n);
    std::iota(parent.begin(), parent.end(), size_t{0});
    auto find = [&](size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) {
            const double s = std::max({1.0, std::abs(roots[i]), std::abs(roots[j])});
            if (std::abs(roots[i] - roots[j]) <= rel_tol * s) parent[find(i)] = find(j);
        }
    std::vector<PolyRootCluster> out;
    std::vector<long> slot(n, -1);
    for (size_t i = 0; i < n; ++i) {
        const size_t r = find(i);
        if (slot[r] < 0) {
            slot[r] = static_cast<long>(out.size());
            out.push_back({roots[i], 1});
        } else {
            auto& cl = out[static_cast<size_t>(slot[r])];
            cl.center += roots[i];
            ++cl.multiplicity;
        }
    }
    for (auto& cl : out) cl.center /= static_cast<double>(cl.multiplicity);
    return out;
}

}  // namespace tds
