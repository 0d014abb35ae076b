#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tds/quasipolynomial.hpp"
#include "tds/rootfinder.hpp"

namespace tds {

/**
 * Coefficients placing a real root lambda0 of maximal multiplicity m + n + 1
 * in Delta(lambda) = lambda^n + sum a_k lambda^k + exp(-lambda tau) sum alpha_k lambda^k.
 */
struct MIDAssignment {
    int n = 0;
    int m = 0;
    double lambda0 = 0.0;
    double tau = 0.0;
    std::vector<double> a;      // a_0 .. a_{n-1}
    std::vector<double> alpha;  // alpha_0 .. alpha_m
    double decay_estimate = 0.0;  // spectral abscissa when lambda0 dominates

    int multiplicity() const { return m + n + 1; }
    bool neutral() const { return m == n; }
    Quasipolynomial quasipolynomial() const;
};

// Relative sizes |Delta^(k)(lambda0)| / magnitude_k for k = 0 .. order.
struct MultiplicityReport {
    std::vector<double> relative;
    double max_vanishing = 0.0;    // max over k < order
    double first_nonvanishing = 0.0;  // at k = order
};

MultiplicityReport multiplicity_report(const Quasipolynomial& qp, double tau, cplx lambda0, int order);

// Throws NumericError when the computed coefficients miss the invariant
// (vanishing below vanish_tol, order m+n+1 above nonvanish_tol).
MIDAssignment max_multiplicity_coefficients(int n, int m, double lambda0, double tau, double vanish_tol = 1e-8,
                                            double nonvanish_tol = 1e-6);

// Exponential stability of the design: a_{n-1} > -n(m+1)/tau.
bool mid_stable(const MIDAssignment& assignment);

// Confluent hypergeometric function. The integral form needs b > a > 0; other
// parameters go through the power series (b must not be a non-positive integer).
cplx kummer_phi(double a, double b, cplx z);
cplx kummer_phi_integral(double a, double b, cplx z);
cplx kummer_phi_series(double a, double b, cplx z);

enum class DominanceMethod { RootScan, SufficientCondition };

struct DominanceOptions {
    DominanceMethod method = DominanceMethod::RootScan;
    double margin_tol = 1e-6;       // other roots must sit left of lambda0 - margin_tol
    double initial_width = 0.0;     // W; default 1/tau
    int max_doublings = 8;
    double neutral_tol = 1e-4;      // |Re - lambda0| accepted on the neutral line
    double neutral_height = 0.0;    // H for the neutral scan; default 40/tau
    int sufficient_grid = 4000;
    RootFinderOptions roots;
};

struct DominanceCertificate {
    ComplexBox box;
    // lambda0 minus the largest real part of the other roots. Absent when the
    // sufficient condition decided; a lower bound (= W) if no other root was found.
    std::optional<double> margin;
    bool margin_is_bound = false;
    DominanceMethod method = DominanceMethod::RootScan;
    bool passed = false;
    int multiplicity_found = 0;
    std::optional<cplx> nearest;  // rightmost other root
    std::string note;
};

DominanceCertificate certify_dominance(const MIDAssignment& assignment, const DominanceOptions& opts = {});
// Any single-delay model with a root lambda0 of the given multiplicity. A
// non-real lambda0 stands for the conjugate pair; margin is then Re lambda0
// minus the largest real part of the remaining roots.
DominanceCertificate certify_dominance(const Quasipolynomial& qp, double tau, cplx lambda0, int multiplicity,
                                       const DominanceOptions& opts = {});

// R_k(lambda; tau) = sum_i C(k, i) P0^(i)(lambda) tau^(k-i).
cplx r_polynomial(const RealPolynomial& p0, int k, cplx lambda, double tau);

// True when R_{n-1}(lambda0; tau t) <= 0 on a grid of (0, 1], n = deg P0.
bool sufficient_dominance_condition(const RealPolynomial& p0, double lambda0, double tau, int grid = 4000);

// Delta(lambda) minus its integral factorization around a real root lambda0 of
// multiplicity >= deg P0, for Delta = P0 + P1 exp(-lambda tau).
cplx factorization_residual(const Quasipolynomial& qp, double tau, double lambda0, cplx lambda);
cplx factorization_residual(const MIDAssignment& assignment, cplx lambda);

// Inverted pendulum phi'' + a0 phi = -b0 phi(t - tau) - b1 phi'(t - tau)
// with the gains that make lambda_plus a triple root.
struct PendulumDesign {
    double a0 = 0.0;
    double tau = 0.0;
    double b0 = 0.0;
    double b1 = 0.0;
    double lambda_plus = 0.0;
    double lambda_minus = 0.0;
    double tau_crit = 0.0;
    bool at_critical = false;  // tau snapped to tau_crit, lambda_plus = 0
    bool unstable = false;     // tau >= tau_crit

    Quasipolynomial quasipolynomial() const;
};

PendulumDesign pendulum_pd_design(double a0, double tau);

// Delta = lambda^2 + a1 lambda + a0 + (alpha1 lambda + alpha0) exp(-lambda tau)
// with double roots at sigma0 +- j theta0.
struct ComplexPairDesign {
    double sigma0 = 0.0;
    double theta0 = 0.0;
    double tau = 0.0;
    double a1 = 0.0, a0 = 0.0, alpha1 = 0.0, alpha0 = 0.0;
    // |tau theta0| below the switch: coefficients of the real quadruple root at sigma0.
    bool real_limit = false;
    double residual = 0.0;  // max relative |Delta|, |Delta'| at the pair

    Quasipolynomial quasipolynomial() const;
};

inline constexpr double kComplexPairRealSwitch = 1e-4;

ComplexPairDesign complex_pair_coefficients(double sigma0, double theta0, double tau);

// Delayed resonator absorber: x'' + 2 zeta Omega x' + Omega^2 x = u / m_a.
struct ResonatorGains {
    double position = 0.0;
    double velocity = 0.0;
    double delayed_velocity = 0.0;
};

struct ResonatorDesign {
    double omega = 0.0;
    int k = 1;
    double tau = 0.0;
    ResonatorGains gains;
    Quasipolynomial delta;  // commensurate in tau, double roots at +- j omega
};

ResonatorDesign resonator_design(double omega, int k, double m_a, double zeta, double Omega);

// Closed-loop absorber characteristic function for the given feedback.
Quasipolynomial absorber_characteristic(double m_a, double zeta, double Omega, const ResonatorGains& gains,
                                        double tau);

const char* to_string(DominanceMethod m);

}  // namespace tds
