#pragma once

#include <vector>

#include "tds/polynomial.hpp"
#include "tds/quasipolynomial.hpp"

namespace tds {

struct CrossingFrequency {
    double omega = 0.0;
    double tau_star = 0.0;  // smallest critical delay >= 0
    double period = 0.0;    // 2 pi / omega
    int multiplicity = 1;   // as a root of F; above 1 the crossing is tangential
    bool clamped = false;   // tau_star was moved up one period after rounding below 0
};

struct CrossingSet {
    std::vector<CrossingFrequency> frequencies;  // increasing omega, omega > 0
    // Frequencies where P_0(j omega) = P_1(j omega) = 0: roots for every delay.
    std::vector<double> invariant_frequencies;
    bool origin_invariant = false;  // P_0(0) + P_1(0) = 0
    bool coprime = true;
};

// F(x) = |P_0(j w)|^2 - |P_1(j w)|^2 written in x = w^2.
RealPolynomial crossing_polynomial(const RealPolynomial& p0, const RealPolynomial& p1);

CrossingSet crossing_set(const RealPolynomial& p0, const RealPolynomial& p1);
CrossingSet crossing_set(const Quasipolynomial& qp);

// tau_star + 2 k pi / omega for k = 0..k_max.
std::vector<double> crossing_delays(const RealPolynomial& p0, const RealPolynomial& p1, double omega, int k_max);
// Minimal delay with the clamping flag.
CrossingFrequency crossing_frequency(const RealPolynomial& p0, const RealPolynomial& p1, double omega);

enum class HyperbolicityVerdict { Hyperbolic, DelayIndependentStable, CrossingsExist };

struct HyperbolicityResult {
    HyperbolicityVerdict verdict = HyperbolicityVerdict::CrossingsExist;
    bool origin_invariant = false;
    bool hyperbolic() const { return verdict != HyperbolicityVerdict::CrossingsExist; }
};

HyperbolicityResult hyperbolicity_test(const RealPolynomial& p0, const RealPolynomial& p1);

enum class CrossingDirection { Switch, Reversal, Degenerate };

CrossingDirection crossing_direction_simple(const Quasipolynomial& qp, double omega0, double tau0,
                                            double multiplicity_tol = 1e-7, double degenerate_tol = 1e-9);

const char* to_string(CrossingDirection d);
const char* to_string(HyperbolicityVerdict v);

}  // namespace tds
