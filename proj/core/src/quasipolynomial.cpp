#include "tds/quasipolynomial.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tds/errors.hpp"

namespace tds {

namespace {

const RealPolynomial kZeroPoly{};

std::vector<Term> normalize_terms(std::vector<Term> terms) {
    std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.index < b.index; });
    for (size_t k = 0; k < terms.size(); ++k) {
        if (terms[k].index < 0) throw ValidationError("term index must be nonnegative");
        if (k > 0 && terms[k].index == terms[k - 1].index)
            throw ValidationError("duplicate term index " + std::to_string(terms[k].index));
    }
    std::erase_if(terms, [](const Term& t) { return t.poly.is_zero(); });
    return terms;
}

// How term k reacts to the requested parameter orders: it is differentiated
// J times by a parameter that enters its exponent as exp(-lambda s p).
struct TermFactor {
    bool active = true;
    double s = 0.0;
    int J = 0;
};

TermFactor term_factor(const Quasipolynomial& qp, int index, std::span<const int> orders) {
    TermFactor f;
    if (qp.is_commensurate()) {
        f.s = static_cast<double>(index);
        f.J = orders.empty() ? 0 : orders[0];
        return f;
    }
    for (size_t r = 0; r < orders.size(); ++r) {
        if (orders[r] == 0) continue;
        if (static_cast<int>(r) + 1 == index) {
            f.s = 1.0;
            f.J = orders[r];
        } else {
            f.active = false;
        }
    }
    return f;
}

void check_orders(const Quasipolynomial& qp, int order_lambda, std::span<const int> orders, int cap) {
    if (order_lambda < 0) throw ValidationError("negative derivative order");
    if (!orders.empty() && static_cast<int>(orders.size()) != qp.parameter_count())
        throw DimensionMismatch("derivative orders do not match the number of delay parameters");
    int total = order_lambda;
    for (int j : orders) {
        if (j < 0) throw ValidationError("negative derivative order");
        total += j;
    }
    if (total > cap)
        throw CapExceeded("derivative order " + std::to_string(total) + " exceeds cap " + std::to_string(cap));
}

// Coefficients of (-s)^J lambda^J P(lambda).
RealPolynomial weighted_shift(const RealPolynomial& p, double s, int J) {
    const double w = std::pow(-s, J);
    std::vector<double> q(static_cast<size_t>(J) + p.coeffs().size(), 0.0);
    for (size_t k = 0; k < p.coeffs().size(); ++k) q[k + static_cast<size_t>(J)] = w * p.coeffs()[k];
    return RealPolynomial(std::move(q));
}

}  // namespace

Quasipolynomial Quasipolynomial::commensurate(std::vector<Term> terms, std::optional<double> tau) {
    if (tau && (!std::isfinite(*tau) || *tau < 0.0)) throw ValidationError("delay must be finite and nonnegative");
    Quasipolynomial qp;
    qp.delays_.kind = DelayKind::Commensurate;
    qp.delays_.base_delay = tau;
    qp.terms_ = normalize_terms(std::move(terms));
    return qp;
}

Quasipolynomial Quasipolynomial::commensurate(const std::vector<RealPolynomial>& by_index,
                                              std::optional<double> tau) {
    std::vector<Term> terms;
    for (size_t k = 0; k < by_index.size(); ++k) terms.push_back({static_cast<int>(k), by_index[k]});
    return commensurate(std::move(terms), tau);
}

Quasipolynomial Quasipolynomial::fixed(std::vector<double> values, std::vector<Term> terms) {
    if (values.empty() || values[0] != 0.0) throw ValidationError("fixed delays must start with 0");
    for (size_t k = 1; k < values.size(); ++k) {
        if (!std::isfinite(values[k]) || values[k] < 0.0) throw ValidationError("delay must be finite and nonnegative");
        if (values[k] <= values[k - 1]) throw ValidationError("fixed delays must be strictly increasing");
    }
    Quasipolynomial qp;
    qp.delays_.kind = DelayKind::Fixed;
    qp.delays_.values = std::move(values);
    qp.terms_ = normalize_terms(std::move(terms));
    for (const auto& t : qp.terms_)
        if (t.index >= static_cast<int>(qp.delays_.values.size()))
            throw ValidationError("term index " + std::to_string(t.index) + " has no delay value");
    return qp;
}

const RealPolynomial& Quasipolynomial::poly(int index) const {
    for (const auto& t : terms_)
        if (t.index == index) return t.poly;
    return kZeroPoly;
}

int Quasipolynomial::max_index() const {
    return terms_.empty() ? 0 : terms_.back().index;
}

int Quasipolynomial::parameter_count() const {
    return is_commensurate() ? 1 : static_cast<int>(delays_.values.size()) - 1;
}

SystemKind Quasipolynomial::kind() const {
    const int d0 = poly(0).degree();
    SystemKind k = SystemKind::Retarded;
    for (const auto& t : terms_) {
        if (t.index == 0) continue;
        if (t.poly.degree() > d0) return SystemKind::Advanced;
        if (t.poly.degree() == d0) k = SystemKind::Neutral;
    }
    return k;
}

std::vector<double> Quasipolynomial::default_delays() const {
    if (is_commensurate()) {
        if (!delays_.base_delay) throw ValidationError("model has no base delay; pass one explicitly");
        return {*delays_.base_delay};
    }
    return delays_.values;
}

void Quasipolynomial::check_delays(std::span<const double> tau) const {
    if (is_commensurate()) {
        if (tau.size() != 1) throw DimensionMismatch("commensurate model takes exactly one delay");
    } else {
        if (tau.size() != delays_.values.size())
            throw DimensionMismatch("fixed model takes " + std::to_string(delays_.values.size()) + " delay values");
        if (tau[0] != 0.0) throw DimensionMismatch("first fixed delay must be 0");
    }
    for (double t : tau)
        if (!std::isfinite(t) || t < 0.0) throw ValidationError("delay must be finite and nonnegative");
}

std::vector<double> Quasipolynomial::term_delays(std::span<const double> tau) const {
    check_delays(tau);
    std::vector<double> d;
    d.reserve(terms_.size());
    for (const auto& t : terms_)
        d.push_back(is_commensurate() ? t.index * tau[0] : tau[static_cast<size_t>(t.index)]);
    return d;
}

cplx evaluate(const Quasipolynomial& qp, cplx lambda, std::span<const double> tau) {
    const auto d = qp.term_delays(tau);
    cplx acc = 0.0;
    for (size_t k = 0; k < d.size(); ++k) {
        const cplx p = qp.terms()[k].poly(lambda);
        acc += d[k] == 0.0 ? p : p * std::exp(-lambda * d[k]);
    }
    return acc;
}

cplx evaluate(const Quasipolynomial& qp, cplx lambda, double tau) {
    const double t[1] = {tau};
    return evaluate(qp, lambda, std::span<const double>(t));
}

cplx mixed_derivative(const Quasipolynomial& qp, cplx lambda, std::span<const double> tau, int order_lambda,
                      std::span<const int> order_params, int cap) {
    check_orders(qp, order_lambda, order_params, cap);
    const auto d = qp.term_delays(tau);
    cplx acc = 0.0;
    for (size_t k = 0; k < d.size(); ++k) {
        const Term& term = qp.terms()[k];
        const TermFactor f = term_factor(qp, term.index, order_params);
        if (!f.active) continue;
        const RealPolynomial q = weighted_shift(term.poly, f.s, f.J);
        if (q.is_zero()) continue;
        // Leibniz: d^i/dlambda^i [Q(lambda) exp(-lambda d)].
        cplx sum = 0.0;
        double dpow = 1.0;
        for (int r = order_lambda; r >= 0; --r) {
            sum += binomial(order_lambda, r) * q.derivative_at(lambda, r) * dpow;
            dpow *= -d[k];
        }
        acc += d[k] == 0.0 ? sum : sum * std::exp(-lambda * d[k]);
    }
    return acc;
}

cplx mixed_derivative(const Quasipolynomial& qp, cplx lambda, std::span<const double> tau, int order_lambda,
                      int order_tau, int cap) {
    std::vector<int> orders(static_cast<size_t>(qp.parameter_count()), 0);
    orders[0] = order_tau;
    return mixed_derivative(qp, lambda, tau, order_lambda, std::span<const int>(orders), cap);
}

cplx mixed_derivative(const Quasipolynomial& qp, cplx lambda, double tau, int order_lambda, int order_tau,
                      int cap) {
    const double t[1] = {tau};
    return mixed_derivative(qp, lambda, std::span<const double>(t), order_lambda, order_tau, cap);
}

double derivative_magnitude(const Quasipolynomial& qp, cplx lambda, std::span<const double> tau,
                            int order_lambda, std::span<const int> order_params) {
    const auto d = qp.term_delays(tau);
    const double al = std::abs(lambda);
    double acc = 0.0;
    for (size_t k = 0; k < d.size(); ++k) {
        const Term& term = qp.terms()[k];
        const TermFactor f = term_factor(qp, term.index, order_params);
        if (!f.active) continue;
        const RealPolynomial q = weighted_shift(term.poly, f.s, f.J);
        if (q.is_zero()) continue;
        double sum = 0.0;
        double dpow = 1.0;
        for (int r = order_lambda; r >= 0; --r) {
            sum += binomial(order_lambda, r) * q.magnitude_at(al, r) * dpow;
            dpow *= d[k];
        }
        acc += sum * std::exp(-lambda.real() * d[k]);
    }
    return acc;
}

double derivative_magnitude(const Quasipolynomial& qp, cplx lambda, std::span<const double> tau,
                            int order_lambda, int order_tau) {
    std::vector<int> orders(static_cast<size_t>(qp.parameter_count()), 0);
    orders[0] = order_tau;
    return derivative_magnitude(qp, lambda, tau, order_lambda, std::span<const int>(orders));
}

int polya_szego_degree(const Quasipolynomial& qp) {
    if (qp.terms().empty()) return 0;
    int deg = static_cast<int>(qp.terms().size()) - 1;
    for (const auto& t : qp.terms()) deg += t.poly.degree();
    return deg;
}

BivariatePolynomial::BivariatePolynomial(std::vector<RealPolynomial> by_z_power) : by_z_(std::move(by_z_power)) {
    while (by_z_.size() > 1 && by_z_.back().is_zero()) by_z_.pop_back();
    if (by_z_.empty()) by_z_.emplace_back();
}

const RealPolynomial& BivariatePolynomial::coefficient(int z_power) const {
    if (z_power < 0 || z_power > z_degree()) return kZeroPoly;
    return by_z_[static_cast<size_t>(z_power)];
}

cplx BivariatePolynomial::operator()(cplx lambda, cplx z) const {
    cplx acc = 0.0;
    for (auto it = by_z_.rbegin(); it != by_z_.rend(); ++it) acc = acc * z + (*it)(lambda);
    return acc;
}

std::vector<cplx> BivariatePolynomial::in_z(cplx lambda) const {
    std::vector<cplx> c;
    c.reserve(by_z_.size());
    for (const auto& p : by_z_) c.push_back(p(lambda));
    return c;
}

BivariatePolynomial auxiliary_polynomial(const Quasipolynomial& qp) {
    if (!qp.is_commensurate()) throw ValidationError("auxiliary polynomial needs commensurate delays");
    std::vector<RealPolynomial> by_z(static_cast<size_t>(qp.max_index()) + 1);
    for (const auto& t : qp.terms()) by_z[static_cast<size_t>(t.index)] = t.poly;
    return BivariatePolynomial(std::move(by_z));
}

PointEvaluator::PointEvaluator(Quasipolynomial qp, cplx lambda0, std::vector<double> tau0, int cap)
    : qp_(std::make_shared<const Quasipolynomial>(std::move(qp))), lambda0_(lambda0), tau0_(std::move(tau0)),
      cap_(cap) {
    qp_->check_delays(tau0_);
}

cplx PointEvaluator::operator()(cplx u, double v) const {
    std::vector<double> shifts(static_cast<size_t>(parameter_count()), 0.0);
    shifts[0] = v;
    return value(u, shifts);
}

cplx PointEvaluator::value(cplx u, std::span<const double> shifts) const {
    if (static_cast<int>(shifts.size()) != parameter_count())
        throw DimensionMismatch("shift vector does not match the number of delay parameters");
    std::vector<double> tau = tau0_;
    const size_t offset = qp_->is_commensurate() ? 0 : 1;
    for (size_t r = 0; r < shifts.size(); ++r) tau[r + offset] += shifts[r];
    return evaluate(*qp_, lambda0_ + u, tau);
}

cplx PointEvaluator::derivative(int order_lambda, int order_tau) const {
    return mixed_derivative(*qp_, lambda0_, tau0_, order_lambda, order_tau, cap_);
}

cplx PointEvaluator::derivative(int order_lambda, std::span<const int> order_params) const {
    return mixed_derivative(*qp_, lambda0_, tau0_, order_lambda, order_params, cap_);
}

double PointEvaluator::magnitude(int order_lambda, int order_tau) const {
    return derivative_magnitude(*qp_, lambda0_, tau0_, order_lambda, order_tau);
}

double PointEvaluator::magnitude(int order_lambda, std::span<const int> order_params) const {
    return derivative_magnitude(*qp_, lambda0_, tau0_, order_lambda, order_params);
}

PointEvaluator shifted_evaluator(const Quasipolynomial& qp, cplx lambda0, std::vector<double> tau0, int cap) {
    return PointEvaluator(qp, lambda0, std::move(tau0), cap);
}

PointEvaluator shifted_evaluator(const Quasipolynomial& qp, cplx lambda0, double tau0, int cap) {
    return PointEvaluator(qp, lambda0, std::vector<double>{tau0}, cap);
}

}  // namespace tds
