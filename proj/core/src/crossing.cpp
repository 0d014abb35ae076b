#include "tds/crossing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tds/errors.hpp"

namespace tds {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Coefficients (in w) of Re P(jw) and Im P(jw).
void split_on_axis(const RealPolynomial& p, std::vector<double>& re, std::vector<double>& im) {
    const int n = p.degree();
    re.assign(static_cast<size_t>(std::max(n, 0)) + 1, 0.0);
    im.assign(static_cast<size_t>(std::max(n, 0)) + 1, 0.0);
    for (int k = 0; k <= n; ++k) {
        // j^k cycles 1, j, -1, -j
        const double c = p[k];
        switch (k % 4) {
            case 0: re[static_cast<size_t>(k)] = c; break;
            case 1: im[static_cast<size_t>(k)] = c; break;
            case 2: re[static_cast<size_t>(k)] = -c; break;
            default: im[static_cast<size_t>(k)] = -c; break;
        }
    }
}

RealPolynomial abs_squared_on_axis(const RealPolynomial& p) {
    std::vector<double> re, im;
    split_on_axis(p, re, im);
    const RealPolynomial r(re), i(im);
    const RealPolynomial sq = r * r + i * i;
    std::vector<double> x;
    for (int k = 0; k <= sq.degree(); k += 2) x.push_back(sq[k]);
    return RealPolynomial(std::move(x));
}

struct RealRoot {
    double x;
    int multiplicity;
};

// Real roots of F with multiplicity: Aberth, cluster, then confirm clusters by
// derivative tests and refine simple roots by Newton.
std::vector<RealRoot> real_roots(const RealPolynomial& f) {
    std::vector<RealRoot> out;
    if (f.degree() < 1) return out;
    const auto roots = polynomial_roots(f);
    auto clusters = cluster_roots(roots, 1e-4);
    std::vector<PolyRootCluster> confirmed;
    for (auto& cl : clusters) {
        if (cl.multiplicity > 1 && std::abs(cl.center.imag()) <= 1e-4 * std::max(1.0, std::abs(cl.center))) {
            // A real multiple root: the mean drifts off the axis, so polish it
            // on the (m-1)-th derivative, where it is simple.
            double x = cl.center.real();
            for (int it = 0; it < 30; ++it) {
                const double d = f.derivative_at(x, cl.multiplicity).real();
                if (d == 0.0) break;
                const double step = f.derivative_at(x, cl.multiplicity - 1).real() / d;
                x -= step;
                if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(x))) break;
            }
            if (std::abs(x - cl.center.real()) <= 1e-3 * std::max(1.0, std::abs(x))) cl.center = x;
        }
        bool ok = true;
        const double ax = std::abs(cl.center);
        for (int j = 0; j < cl.multiplicity && ok; ++j)
            ok = std::abs(f.derivative_at(cl.center, j)) <= 1e-7 * f.magnitude_at(ax, j);
        if (ok || cl.multiplicity == 1) {
            confirmed.push_back(cl);
        } else {
            for (const auto& r : roots)
                if (std::abs(r - cl.center) <= 1e-4 * std::max(1.0, ax)) confirmed.push_back({r, 1});
        }
    }
    for (const auto& cl : confirmed) {
        if (std::abs(cl.center.imag()) > 1e-8 * std::max(1.0, std::abs(cl.center))) continue;
        double x = cl.center.real();
        if (cl.multiplicity == 1) {
            for (int it = 0; it < 20; ++it) {
                const double d = f.derivative_at(x, 1).real();
                if (d == 0.0) break;
                const double step = f(x) / d;
                x -= step;
                if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(x))) break;
            }
        }
        out.push_back({x, cl.multiplicity});
    }
    std::sort(out.begin(), out.end(), [](const RealRoot& a, const RealRoot& b) { return a.x < b.x; });
    return out;
}

bool coprime(const RealPolynomial& p0, const RealPolynomial& p1) {
    if (p1.is_zero() || p0.degree() < 1) return true;
    for (const auto& r : polynomial_roots(p0)) {
        const double mag = p1.magnitude_at(std::abs(r), 0);
        if (mag > 0 && std::abs(p1(r)) <= 1e-10 * mag) return false;
    }
    return true;
}

}  // namespace

RealPolynomial crossing_polynomial(const RealPolynomial& p0, const RealPolynomial& p1) {
    return abs_squared_on_axis(p0) - abs_squared_on_axis(p1);
}

CrossingFrequency crossing_frequency(const RealPolynomial& p0, const RealPolynomial& p1, double omega) {
    if (!(omega > 0.0)) throw DomainError("crossing frequency must be positive");
    const cplx jw(0.0, omega);
    const cplx b = p1(jw);
    const double mag = p1.magnitude_at(omega, 0) + p0.magnitude_at(omega, 0);
    if (std::abs(b) <= 1e-12 * mag)
        throw InvariantRoot("P_1(j omega) = 0 at omega = " + std::to_string(omega) +
                            ": common imaginary root, present for every delay");
    const cplx z = -p0(jw) / b;  // exp(-j omega tau)
    double theta = -std::arg(z);
    CrossingFrequency cf;
    cf.omega = omega;
    cf.period = kTwoPi / omega;
    if (theta < 0.0) {
        theta += kTwoPi;
        // -arg(z) in (-pi, pi]: a negative value is a genuine angle in the
        // lower half; values within rounding of 0 mark the clamp.
        if (theta >= kTwoPi - 1e-12) cf.clamped = true;
    }
    cf.tau_star = theta / omega;
    return cf;
}

std::vector<double> crossing_delays(const RealPolynomial& p0, const RealPolynomial& p1, double omega, int k_max) {
    const CrossingFrequency cf = crossing_frequency(p0, p1, omega);
    std::vector<double> out;
    for (int k = 0; k <= k_max; ++k) out.push_back(cf.tau_star + k * cf.period);
    return out;
}

CrossingSet crossing_set(const RealPolynomial& p0, const RealPolynomial& p1) {
    CrossingSet cs;
    cs.coprime = coprime(p0, p1);
    cs.origin_invariant = (p0[0] + p1[0]) == 0.0 ||
                          std::abs(p0[0] + p1[0]) <= 1e-14 * (std::abs(p0[0]) + std::abs(p1[0]));
    const RealPolynomial f = crossing_polynomial(p0, p1);
    if (f.is_zero()) throw DomainError("|P_0(jw)| = |P_1(jw)| for all w: crossing set is not finite");
    for (const auto& r : real_roots(f)) {
        if (r.x <= 1e-14) continue;  // w = 0 is never a crossing; it is the origin case
        const double w = std::sqrt(r.x);
        try {
            CrossingFrequency cf = crossing_frequency(p0, p1, w);
            cf.multiplicity = r.multiplicity;
            cs.frequencies.push_back(cf);
        } catch (const InvariantRoot&) {
            cs.invariant_frequencies.push_back(w);
        }
    }
    return cs;
}

CrossingSet crossing_set(const Quasipolynomial& qp) {
    if (!qp.is_commensurate() || qp.max_index() > 1)
        throw ValidationError("crossing analysis needs a single-delay model (terms 0 and 1)");
    return crossing_set(qp.poly(0), qp.poly(1));
}

HyperbolicityResult hyperbolicity_test(const RealPolynomial& p0, const RealPolynomial& p1) {
    HyperbolicityResult res;
    if (p1.is_zero()) {
        res.verdict = HyperbolicityVerdict::Hyperbolic;
        return res;
    }
    if (p0.degree() <= p1.degree()) throw ValidationError("hyperbolicity test needs deg P_0 > deg P_1");
    const CrossingSet cs = crossing_set(p0, p1);
    res.origin_invariant = cs.origin_invariant;
    if (!cs.frequencies.empty() || !cs.invariant_frequencies.empty()) {
        res.verdict = HyperbolicityVerdict::CrossingsExist;
        return res;
    }
    const RealPolynomial f = crossing_polynomial(p0, p1);
    if (!res.origin_invariant && !(f[0] > 0.0)) {
        res.verdict = HyperbolicityVerdict::CrossingsExist;
        return res;
    }
    res.verdict = HyperbolicityVerdict::Hyperbolic;
    if (!res.origin_invariant) {
        bool stable = true;
        for (const auto& r : polynomial_roots(p0 + p1)) stable = stable && r.real() < 0.0;
        if (stable) res.verdict = HyperbolicityVerdict::DelayIndependentStable;
    }
    return res;
}

CrossingDirection crossing_direction_simple(const Quasipolynomial& qp, double omega0, double tau0,
                                            double multiplicity_tol, double degenerate_tol) {
    const cplx l(0.0, omega0);
    const std::vector<double> tau{tau0};
    if (qp.parameter_count() != 1) throw ValidationError("crossing direction needs a one-parameter model");
    const cplx dl = mixed_derivative(qp, l, tau, 1, 0);
    if (std::abs(dl) <= multiplicity_tol * derivative_magnitude(qp, l, tau, 1, 0))
        throw MultipleRoot("d Delta / d lambda vanishes: multiple root, use the Puiseux analysis");
    const cplx dt = mixed_derivative(qp, l, tau, 0, 1);
    const cplx s = -dt / dl;
    if (std::abs(s.real()) <= degenerate_tol * std::abs(s) || s == 0.0) return CrossingDirection::Degenerate;
    return s.real() > 0.0 ? CrossingDirection::Switch : CrossingDirection::Reversal;
}

const char* to_string(CrossingDirection d) {
    switch (d) {
        case CrossingDirection::Switch: return "switch";
        case CrossingDirection::Reversal: return "reversal";
        default: return "degenerate";
    }
}

const char* to_string(HyperbolicityVerdict v) {
    switch (v) {
        case HyperbolicityVerdict::Hyperbolic: return "hyperbolic";
        case HyperbolicityVerdict::DelayIndependentStable: return "delay-independent-stable";
        default: return "crossings-exist";
    }
}

}  // namespace tds
