#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "tds/polynomial.hpp"

namespace tds {

// Highest total derivative order the closed-form oracle accepts by default.
inline constexpr int kDefaultDerivativeCap = 64;

enum class DelayKind { Commensurate, Fixed };

// Retarded: deg P_0 above every delayed degree. Neutral: equal for some term.
// Advanced: some delayed degree exceeds deg P_0 (rejected by most operations).
enum class SystemKind { Retarded, Neutral, Advanced };

struct DelayStructure {
    DelayKind kind = DelayKind::Commensurate;
    std::optional<double> base_delay;  // commensurate only, may be absent
    std::vector<double> values;        // fixed only, values[0] == 0

    friend bool operator==(const DelayStructure&, const DelayStructure&) = default;
};

struct Term {
    int index = 0;
    RealPolynomial poly;

    friend bool operator==(const Term&, const Term&) = default;
};

/**
 * Delta(lambda) = sum_k P_k(lambda) exp(-lambda d_k).
 *
 * Commensurate form: d_k = k * tau, one delay parameter tau.
 * Fixed form: d_k = values[k], parameters are values[1..].
 *
 * Delay arguments passed to operations are the full parameter vector: {tau}
 * for commensurate, the full values vector (leading 0 included) for fixed.
 */
class Quasipolynomial {
public:
    static Quasipolynomial commensurate(std::vector<Term> terms, std::optional<double> tau = std::nullopt);
    // by_index[k] multiplies exp(-k lambda tau)
    static Quasipolynomial commensurate(const std::vector<RealPolynomial>& by_index,
                                        std::optional<double> tau = std::nullopt);
    static Quasipolynomial fixed(std::vector<double> values, std::vector<Term> terms);

    const DelayStructure& delays() const { return delays_; }
    bool is_commensurate() const { return delays_.kind == DelayKind::Commensurate; }

    // Stored terms, sorted by index, zero polynomials dropped.
    const std::vector<Term>& terms() const { return terms_; }
    const RealPolynomial& poly(int index) const;

    // Largest index carrying a nonzero polynomial (n_d).
    int max_index() const;
    // Number of delay parameters: 1 for commensurate, values.size()-1 for fixed.
    int parameter_count() const;
    SystemKind kind() const;

    // Delay arguments stored in the model; throws if the model omits them.
    std::vector<double> default_delays() const;
    void check_delays(std::span<const double> tau) const;
    // d_k for every stored term, in terms() order.
    std::vector<double> term_delays(std::span<const double> tau) const;

    friend bool operator==(const Quasipolynomial&, const Quasipolynomial&) = default;

private:
    DelayStructure delays_;
    std::vector<Term> terms_;
};

cplx evaluate(const Quasipolynomial& qp, cplx lambda, std::span<const double> tau);
cplx evaluate(const Quasipolynomial& qp, cplx lambda, double tau);

// d^{i+|j|} Delta / d lambda^i d p_0^{j_0} d p_1^{j_1} ... in closed form.
cplx mixed_derivative(const Quasipolynomial& qp, cplx lambda, std::span<const double> tau, int order_lambda,
                      std::span<const int> order_params, int cap = kDefaultDerivativeCap);
// One-parameter form: derivative in the first delay parameter.
cplx mixed_derivative(const Quasipolynomial& qp, cplx lambda, std::span<const double> tau, int order_lambda,
                      int order_tau, int cap = kDefaultDerivativeCap);
cplx mixed_derivative(const Quasipolynomial& qp, cplx lambda, double tau, int order_lambda, int order_tau,
                      int cap = kDefaultDerivativeCap);

// Sum of the absolute values of every summand of the same derivative: the
// scale against which "numerically zero" is judged.
double derivative_magnitude(const Quasipolynomial& qp, cplx lambda, std::span<const double> tau,
                            int order_lambda, std::span<const int> order_params);
double derivative_magnitude(const Quasipolynomial& qp, cplx lambda, std::span<const double> tau,
                            int order_lambda, int order_tau = 0);

int polya_szego_degree(const Quasipolynomial& qp);

// P_a(lambda, z) = sum_i P_i(lambda) z^i for commensurate models.
class BivariatePolynomial {
public:
    explicit BivariatePolynomial(std::vector<RealPolynomial> by_z_power);
    int z_degree() const { return static_cast<int>(by_z_.size()) - 1; }
    const RealPolynomial& coefficient(int z_power) const;
    cplx operator()(cplx lambda, cplx z) const;
    // Coefficients in z at fixed lambda, ascending.
    std::vector<cplx> in_z(cplx lambda) const;

private:
    std::vector<RealPolynomial> by_z_;
};

BivariatePolynomial auxiliary_polynomial(const Quasipolynomial& qp);

/**
 * Delta translated to (lambda0, tau0): f(u, v) = Delta(lambda0 + u; tau0 + v).
 * Derivative orders refer to u and the delay parameters.
 */
class PointEvaluator {
public:
    PointEvaluator(Quasipolynomial qp, cplx lambda0, std::vector<double> tau0, int cap = kDefaultDerivativeCap);

    cplx operator()(cplx u, double v = 0.0) const;
    cplx value(cplx u, std::span<const double> shifts) const;

    cplx derivative(int order_lambda, int order_tau) const;
    cplx derivative(int order_lambda, std::span<const int> order_params) const;
    double magnitude(int order_lambda, int order_tau) const;
    double magnitude(int order_lambda, std::span<const int> order_params) const;

    const Quasipolynomial& quasipolynomial() const { return *qp_; }
    cplx lambda0() const { return lambda0_; }
    const std::vector<double>& tau0() const { return tau0_; }
    int cap() const { return cap_; }
    int parameter_count() const { return qp_->parameter_count(); }

private:
    std::shared_ptr<const Quasipolynomial> qp_;
    cplx lambda0_;
    std::vector<double> tau0_;
    int cap_;
};

PointEvaluator shifted_evaluator(const Quasipolynomial& qp, cplx lambda0, std::vector<double> tau0,
                                 int cap = kDefaultDerivativeCap);
PointEvaluator shifted_evaluator(const Quasipolynomial& qp, cplx lambda0, double tau0,
                                 int cap = kDefaultDerivativeCap);

}  // namespace tds
