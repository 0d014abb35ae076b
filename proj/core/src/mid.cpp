#include "tds/mid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "tds/errors.hpp"
#include "tds/quadrature.hpp"

namespace tds {

namespace {

constexpr int kMaxOrder = 20;

bool finite(double x) { return std::isfinite(x); }

// x - sin x without cancellation near 0.
double x_minus_sin(double x) {
    if (std::abs(x) > 0.5) return x - std::sin(x);
    const double x2 = x * x;
    double term = x * x2 / 6.0, sum = 0.0;
    for (int k = 1; k < 30 && term != 0.0; ++k) {
        sum += term;
        term *= -x2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
    }
    return sum;
}

// x cos x - sin x without cancellation near 0.
double x_cos_minus_sin(double x) {
    if (std::abs(x) > 0.5) return x * std::cos(x) - std::sin(x);
    // sum_{k>=1} (-1)^k 2k x^{2k+1} / (2k+1)!
    const double x2 = x * x;
    double power = x * x2 / 6.0;  // x^{2k+1} / (2k+1)! at k = 1
    double sum = 0.0;
    for (int k = 1; k < 30; ++k) {
        const double term = (k % 2 ? -1.0 : 1.0) * 2.0 * k * power;
        sum += term;
        if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
        power *= x2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
    }
    return sum;
}

struct SingleDelay {
    RealPolynomial p0, p1;
};

SingleDelay split_single_delay(const Quasipolynomial& qp) {
    if (!qp.is_commensurate() || qp.max_index() > 1)
        throw NotSupported("expected P0(lambda) + P1(lambda) exp(-lambda tau)");
    return {qp.poly(0), qp.max_index() == 1 ? qp.poly(1) : RealPolynomial{}};
}

double max_abs_re(const std::vector<RootCluster>& cl) {
    double r = -std::numeric_limits<double>::infinity();
    for (const auto& c : cl) r = std::max(r, c.center.real());
    return r;
}

bool at_target(cplx c, cplx lambda0, double near) {
    return std::abs(c - lambda0) < near || std::abs(c - std::conj(lambda0)) < near;
}

DominanceCertificate neutral_scan(const Quasipolynomial& qp, double tau, cplx target, int multiplicity,
                                  const DominanceOptions& opts) {
    const double lambda0 = target.real();
    DominanceCertificate cert;
    const double w = opts.initial_width > 0 ? opts.initial_width : 1.0 / tau;
    const double h = opts.neutral_height > 0 ? opts.neutral_height : 40.0 / tau;
    cert.box = ComplexBox::make(lambda0 - w, lambda0 + w, -h, h);
    const double tau_arr[] = {tau};
    const auto roots = roots_in_box(qp, tau_arr, cert.box, opts.roots);
    const double near = 1e-3 * std::max(1.0, std::abs(target));
    double worst = 0.0, right = -std::numeric_limits<double>::infinity();
    for (const auto& c : roots) {
        worst = std::max(worst, std::abs(c.center.real() - lambda0));
        if (at_target(c.center, target, near)) {
            cert.multiplicity_found += c.multiplicity;
            continue;
        }
        if (c.center.real() > right) {
            right = c.center.real();
            cert.nearest = c.center;
        }
    }
    if (cert.nearest) cert.margin = lambda0 - right;
    cert.passed = worst < opts.neutral_tol;
    cert.note = "neutral: max |Re - lambda0| = " + std::to_string(worst) + " over " +
                std::to_string(roots.size()) + " clusters";
    if (cert.multiplicity_found != multiplicity)
        cert.note += "; multiplicity at lambda0 found " + std::to_string(cert.multiplicity_found);
    return cert;
}

}  // namespace

Quasipolynomial MIDAssignment::quasipolynomial() const {
    std::vector<double> p0(a);
    p0.push_back(1.0);
    return Quasipolynomial::commensurate({RealPolynomial(p0), RealPolynomial(alpha)}, tau);
}

MultiplicityReport multiplicity_report(const Quasipolynomial& qp, double tau, cplx lambda0, int order) {
    MultiplicityReport rep;
    const double tau_arr[] = {tau};
    for (int k = 0; k <= order; ++k) {
        const double mag = derivative_magnitude(qp, lambda0, tau_arr, k, 0);
        const double val = std::abs(mixed_derivative(qp, lambda0, tau_arr, k, 0));
        const double rel = mag > 0 ? val / mag : (val == 0 ? 0.0 : std::numeric_limits<double>::infinity());
        rep.relative.push_back(rel);
        if (k < order)
            rep.max_vanishing = std::max(rep.max_vanishing, rel);
        else
            rep.first_nonvanishing = rel;
    }
    return rep;
}

MIDAssignment max_multiplicity_coefficients(int n, int m, double lambda0, double tau, double vanish_tol,
                                            double nonvanish_tol) {
    if (n < 1) throw DomainError("n must be at least 1");
    if (m < 0 || m > n) throw DomainError("m must lie in [0, n]");
    if (n > kMaxOrder) throw DomainError("n above " + std::to_string(kMaxOrder));
    if (!(tau > 0) || !finite(tau)) throw DomainError("tau must be positive");
    if (!finite(lambda0)) throw DomainError("lambda0 must be finite");

    MIDAssignment out;
    out.n = n;
    out.m = m;
    out.lambda0 = lambda0;
    out.tau = tau;
    out.decay_estimate = lambda0;
    const double nf = factorial(n);
    for (int k = 0; k < n; ++k) {
        double s = 0.0, lp = 1.0;
        for (int i = k; i <= n; ++i) {
            s += binomial(i, k) * binomial(m + n - i, m) * lp / (factorial(i) * std::pow(tau, n - i));
            lp *= lambda0;
        }
        out.a.push_back(((n - k) % 2 ? -1.0 : 1.0) * nf * s);
    }
    const double pre = ((n - 1) % 2 ? -1.0 : 1.0) * std::exp(lambda0 * tau);
    for (int k = 0; k <= m; ++k) {
        double s = 0.0, lp = 1.0;
        for (int i = k; i <= m; ++i) {
            s += ((i - k) % 2 ? -1.0 : 1.0) * factorial(m + n - i) * lp /
                 (factorial(k) * factorial(i - k) * factorial(m - i) * std::pow(tau, n - i));
            lp *= lambda0;
        }
        out.alpha.push_back(pre * s);
    }
    const auto rep = multiplicity_report(out.quasipolynomial(), tau, lambda0, out.multiplicity());
    if (rep.max_vanishing >= vanish_tol || rep.first_nonvanishing <= nonvanish_tol)
        throw NumericError("multiplicity invariant missed: vanishing " + std::to_string(rep.max_vanishing) +
                           ", leading " + std::to_string(rep.first_nonvanishing));
    return out;
}

bool mid_stable(const MIDAssignment& s) { return s.a.back() > -s.n * (s.m + 1) / s.tau; }

cplx kummer_phi_series(double a, double b, cplx z) {
    if (!finite(a) || !finite(b)) throw DomainError("Kummer parameters must be finite");
    if (b <= 0 && b == std::floor(b)) throw DomainError("b must not be a non-positive integer");
    if (z.real() < 0) {
        // Kummer's transformation keeps the series terms from cancelling.
        if (!(b - a <= 0 && b - a == std::floor(b - a))) return std::exp(z) * kummer_phi_series(b - a, b, -z);
    }
    cplx term = 1.0, sum = 1.0;
    const double limit = 1e-17;
    for (int k = 0; k < 100000; ++k) {
        term *= (a + k) / (b + k) * z / static_cast<double>(k + 1);
        sum += term;
        if (term == 0.0) return sum;
        if (k > std::abs(z) && std::abs(term) <= limit * std::abs(sum)) return sum;
    }
    throw NumericError("Kummer series did not converge");
}

cplx kummer_phi_integral(double a, double b, cplx z) {
    if (!(a > 0) || !(b > a) || !finite(b)) throw DomainError("integral form needs b > a > 0");
    const double c = b - a;
    const double norm = std::exp(std::lgamma(b) - std::lgamma(a) - std::lgamma(c));
    // Split at 1/2; below order 1 an endpoint power is substituted away.
    std::function<cplx(double)> left, right;
    double left_hi = 0.5, right_hi = 0.5, left_scale = 1.0, right_scale = 1.0;
    if (a < 1) {
        left_hi = std::pow(0.5, a);
        left_scale = 1.0 / a;
        left = [=](double s) {
            const double t = std::pow(s, 1.0 / a);
            return std::pow(1.0 - t, c - 1.0) * std::exp(z * t);
        };
    } else {
        left = [=](double t) { return std::pow(t, a - 1.0) * std::pow(1.0 - t, c - 1.0) * std::exp(z * t); };
    }
    if (c < 1) {
        right_hi = std::pow(0.5, c);
        right_scale = 1.0 / c;
        right = [=](double r) {
            const double t = 1.0 - std::pow(r, 1.0 / c);
            return std::pow(t, a - 1.0) * std::exp(z * t);
        };
    } else {
        // u = 1 - t
        right = [=](double u) {
            const double t = 1.0 - u;
            return std::pow(t, a - 1.0) * std::pow(u, c - 1.0) * std::exp(z * t);
        };
    }
    const auto l = integrate(left, 0.0, left_hi, 1e-300, 1e-13);
    const auto r = integrate(right, 0.0, right_hi, 1e-300, 1e-13);
    return norm * (left_scale * l.value + right_scale * r.value);
}

cplx kummer_phi(double a, double b, cplx z) {
    if (a > 0 && b > a && finite(b)) return kummer_phi_integral(a, b, z);
    return kummer_phi_series(a, b, z);
}

cplx r_polynomial(const RealPolynomial& p0, int k, cplx lambda, double tau) {
    if (k < 0) throw DomainError("k must be non-negative");
    cplx s = 0.0;
    for (int i = 0; i <= k; ++i) s += binomial(k, i) * p0.derivative_at(lambda, i) * std::pow(tau, k - i);
    return s;
}

bool sufficient_dominance_condition(const RealPolynomial& p0, double lambda0, double tau, int grid) {
    const int n = p0.degree();
    if (n < 1) return false;
    for (int g = 1; g <= grid; ++g) {
        const double t = tau * g / grid;
        double value = 0.0, scale = 0.0;
        for (int i = 0; i <= n - 1; ++i) {
            const double term = binomial(n - 1, i) * p0.derivative_at(cplx(lambda0), i).real() * std::pow(t, n - 1 - i);
            value += term;
            scale += std::abs(term);
        }
        if (value > 1e-13 * scale) return false;
    }
    return true;
}

DominanceCertificate certify_dominance(const Quasipolynomial& qp, double tau, cplx target, int multiplicity,
                                       const DominanceOptions& opts) {
    if (!(tau > 0)) throw DomainError("tau must be positive");
    if (multiplicity < 1) throw DomainError("multiplicity must be positive");
    const double lambda0 = target.real();
    const int expected = target.imag() != 0 ? 2 * multiplicity : multiplicity;
    DominanceCertificate cert;
    std::string prefix;
    if (opts.method == DominanceMethod::SufficientCondition) {
        const auto parts = split_single_delay(qp);
        const int n = parts.p0.degree();
        if (target.imag() == 0 && parts.p1.degree() < n && multiplicity >= n + 1 &&
            sufficient_dominance_condition(parts.p0, lambda0, tau, opts.sufficient_grid)) {
            cert.method = DominanceMethod::SufficientCondition;
            cert.passed = true;
            cert.multiplicity_found = expected;
            cert.note = "R_{n-1}(lambda0; tau t) <= 0 on (0, 1]";
            return cert;
        }
        prefix = "sufficient condition inconclusive; ";
    }
    if (qp.kind() == SystemKind::Neutral) {
        cert = neutral_scan(qp, tau, target, expected, opts);
        cert.note = prefix + cert.note;
        return cert;
    }
    if (qp.kind() == SystemKind::Advanced) throw NotSupported("advanced models have no dominant root");

    const double tau_arr[] = {tau};
    const double near = 1e-3 * std::max(1.0, std::abs(target));
    double w = opts.initial_width > 0 ? opts.initial_width : 1.0 / tau;
    for (int d = 0; d <= opts.max_doublings; ++d, w *= 2) {
        const double x = lambda0 - w;
        const double r = 1.01 * modulus_bound(qp, tau_arr, x) + 1e-3;
        cert.box = ComplexBox::make(x, std::max(r, lambda0 + w), -r, r);
        const auto roots = roots_in_box(qp, tau_arr, cert.box, opts.roots);
        std::vector<RootCluster> others;
        cert.multiplicity_found = 0;
        for (const auto& c : roots) {
            if (at_target(c.center, target, near))
                cert.multiplicity_found += c.multiplicity;
            else
                others.push_back(c);
        }
        if (others.empty()) continue;
        const double right = max_abs_re(others);
        for (const auto& c : others)
            if (c.center.real() == right) cert.nearest = c.center;
        cert.margin = lambda0 - right;
        cert.passed = *cert.margin > opts.margin_tol && cert.multiplicity_found == expected;
        cert.note = prefix + std::to_string(others.size()) + " other clusters in the box";
        if (cert.multiplicity_found != expected)
            cert.note += "; multiplicity at lambda0 found " + std::to_string(cert.multiplicity_found);
        return cert;
    }
    // No other root with real part above lambda0 - W.
    cert.margin = w / 2;
    cert.margin_is_bound = true;
    cert.passed = cert.multiplicity_found == expected;
    cert.note = prefix + "no other root found; margin is a lower bound";
    return cert;
}

DominanceCertificate certify_dominance(const MIDAssignment& s, const DominanceOptions& opts) {
    return certify_dominance(s.quasipolynomial(), s.tau, s.lambda0, s.multiplicity(), opts);
}

cplx factorization_residual(const Quasipolynomial& qp, double tau, double lambda0, cplx lambda) {
    const auto parts = split_single_delay(qp);
    const int n = parts.p0.degree();
    if (n < 1) throw DomainError("P0 must have positive degree");
    const double an = parts.p0.coeffs().back();
    const cplx shift = lambda - lambda0;
    const double norm = tau / factorial(n - 1);
    const auto integrand = [&](double t) {
        return std::exp(-shift * tau * t) * norm * r_polynomial(parts.p0, n - 1, cplx(lambda0), tau * t);
    };
    const auto integral = integrate(integrand, 0.0, 1.0, 1e-300, 1e-13);
    return evaluate(qp, lambda, tau) - std::pow(shift, n) * (an + integral.value);
}

cplx factorization_residual(const MIDAssignment& s, cplx lambda) {
    return factorization_residual(s.quasipolynomial(), s.tau, s.lambda0, lambda);
}

Quasipolynomial PendulumDesign::quasipolynomial() const {
    return Quasipolynomial::commensurate({RealPolynomial{a0, 0.0, 1.0}, RealPolynomial{b0, b1}}, tau);
}

PendulumDesign pendulum_pd_design(double a0, double tau) {
    if (!(a0 < 0) || !finite(a0)) throw DomainError("a0 must be negative");
    if (!(tau > 0) || !finite(tau)) throw DomainError("tau must be positive");
    PendulumDesign d;
    d.a0 = a0;
    d.tau_crit = std::sqrt(-2.0 / a0);
    if (std::abs(tau - d.tau_crit) <= 4 * std::numeric_limits<double>::epsilon() * d.tau_crit) {
        d.tau = d.tau_crit;
        d.at_critical = true;
        d.lambda_plus = 0.0;
        d.lambda_minus = -4.0 / d.tau;
        d.b0 = -a0;
        d.b1 = -a0 * d.tau_crit;
    } else {
        d.tau = tau;
        const double disc = 2.0 - a0 * tau * tau;
        if (disc < 0) throw DomainError("2 - a0 tau^2 must be non-negative");
        d.lambda_plus = (-2.0 + std::sqrt(disc)) / tau;
        d.lambda_minus = (-2.0 - std::sqrt(disc)) / tau;
        const double l = d.lambda_plus, e = std::exp(l * tau);
        d.b0 = e * (tau * l * l * l + l * l + a0 * tau * l - a0);
        d.b1 = -e * (tau * l * l + 2.0 * l + a0 * tau);
    }
    d.unstable = d.at_critical || d.tau > d.tau_crit;
    const auto rep = multiplicity_report(d.quasipolynomial(), d.tau, d.lambda_plus, 3);
    if (rep.max_vanishing > 1e-8) throw NumericError("triple root not reproduced");
    return d;
}

Quasipolynomial ComplexPairDesign::quasipolynomial() const {
    return Quasipolynomial::commensurate({RealPolynomial{a0, a1, 1.0}, RealPolynomial{alpha0, alpha1}}, tau);
}

ComplexPairDesign complex_pair_coefficients(double sigma0, double theta0, double tau) {
    if (theta0 == 0) throw DomainError("theta0 = 0: use the real quadruple-root design");
    if (!(tau > 0) || !finite(tau) || !finite(sigma0) || !finite(theta0)) throw DomainError("invalid arguments");
    ComplexPairDesign d;
    d.sigma0 = sigma0;
    d.theta0 = theta0;
    d.tau = tau;
    const double x = tau * theta0;
    if (std::abs(x) < kComplexPairRealSwitch) {
        const auto s = max_multiplicity_coefficients(2, 1, sigma0, tau);
        d.real_limit = true;
        d.a0 = s.a[0];
        d.a1 = s.a[1];
        d.alpha0 = s.alpha[0];
        d.alpha1 = s.alpha[1];
    } else {
        const double sx = std::sin(x);
        const double den = x_minus_sin(x) * (x + sx);
        const double two = x_minus_sin(2 * x);
        const double ex = 2.0 * theta0 * std::exp(sigma0 * tau);
        d.a1 = -2.0 * sigma0 - theta0 * two / den;
        d.a0 = sigma0 * sigma0 + (sigma0 * theta0 * two + theta0 * theta0 * (x * x + sx * sx)) / den;
        d.alpha1 = ex * x_cos_minus_sin(x) / den;
        d.alpha0 = ex * (-sigma0 * x_cos_minus_sin(x) - tau * theta0 * theta0 * sx) / den;
    }
    const auto qp = d.quasipolynomial();
    const auto up = multiplicity_report(qp, tau, cplx(sigma0, theta0), 2);
    const auto down = multiplicity_report(qp, tau, cplx(sigma0, -theta0), 2);
    d.residual = std::max(up.max_vanishing, down.max_vanishing);
    if (!d.real_limit && d.residual > 1e-8) throw NumericError("double root not reproduced");
    return d;
}

Quasipolynomial absorber_characteristic(double m_a, double zeta, double Omega, const ResonatorGains& g, double tau) {
    if (!(m_a > 0)) throw DomainError("m_a must be positive");
    return Quasipolynomial::commensurate({RealPolynomial{Omega * Omega - g.position / m_a,
                                                         2.0 * zeta * Omega - g.velocity / m_a, 1.0},
                                          RealPolynomial{0.0, -g.delayed_velocity / m_a}},
                                         tau);
}

ResonatorDesign resonator_design(double omega, int k, double m_a, double zeta, double Omega) {
    if (!(omega > 0) || !finite(omega)) throw DomainError("omega must be positive");
    if (k < 1) throw DomainError("k must be a positive integer");
    if (!(m_a > 0) || !finite(m_a)) throw DomainError("m_a must be positive");
    if (!finite(zeta) || !finite(Omega)) throw DomainError("invalid absorber parameters");
    ResonatorDesign d;
    d.omega = omega;
    d.k = k;
    d.tau = k * std::numbers::pi / omega;
    const double sign = k % 2 ? -1.0 : 1.0;
    d.gains.position = m_a * (Omega * Omega - omega * omega);
    d.gains.velocity = 2.0 * m_a * (zeta * Omega + 1.0 / d.tau);
    d.gains.delayed_velocity = -2.0 * m_a * sign / d.tau;
    d.delta = Quasipolynomial::commensurate(
        {RealPolynomial{omega * omega, -2.0 / d.tau, 1.0}, RealPolynomial{0.0, 2.0 * sign / d.tau}}, d.tau);
    const auto rep = multiplicity_report(d.delta, d.tau, cplx(0.0, omega), 2);
    if (rep.max_vanishing > 1e-8) throw NumericError("double root at j omega not reproduced");
    return d;
}

const char* to_string(DominanceMethod m) {
    return m == DominanceMethod::RootScan ? "RootScan" : "SufficientCondition";
}

}  // namespace tds
