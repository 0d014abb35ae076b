#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tds/quasipolynomial.hpp"
#include "tds/rootfinder.hpp"

namespace tds {

struct SweepOptions {
    double band = 0.05;             // refine where some ||z| - 1| falls below this
    int refine_factor = 8;          // points inserted per flagged interval
    int max_points = 200000;
    double collision_tol = 1e-6;    // relative z distance that marks a discriminant point
    unsigned threads = 1;
};

/**
 * z-roots of P_a(j w, z) on an increasing w grid, threaded into branches by
 * minimal total displacement between neighbouring grid points.
 */
struct FrequencySweep {
    std::shared_ptr<const Quasipolynomial> qp;
    std::vector<double> omega;
    std::vector<std::vector<cplx>> roots;  // roots[i][b]: branch b at omega[i]
    std::vector<bool> discriminant;        // collision or leading-coefficient drop
    int branch_count = 0;

    double modulus(std::size_t i, int b) const { return std::abs(roots[i][static_cast<std::size_t>(b)]); }
};

FrequencySweep sweep(const Quasipolynomial& qp, double omega_lo, double omega_hi, int initial_resolution,
                     const SweepOptions& opts = {});

struct CriticalFrequencyRecord {
    double omega = 0.0;
    int g = 0;              // z-curves through the unit circle at (omega, z)
    cplx z;                 // exp(-j omega tau) on the unit circle
    int var_nf = 0;         // filled by var_nf()
    double tau0 = 0.0;      // smallest critical delay for this (omega, z)
    int n = 0;              // multiplicity of j omega as a root at tau0
    int g_derivative = 0;   // g from the first nonvanishing tau-derivative
};

struct CriticalOptions {
    double tol = 1e-7;              // | |z| - 1 | accepted as on the unit circle
    double polish_tol = 1e-10;      // residual for the polished critical pair
    double z_cluster_tol = 1e-3;
};

std::vector<CriticalFrequencyRecord> critical_frequencies(const FrequencySweep& sw, const CriticalOptions& opts = {});

// NF(w + eps) - NF(w - eps) over the g curves through the unit circle.
int var_nf(const FrequencySweep& sw, const CriticalFrequencyRecord& rec,
           const std::vector<CriticalFrequencyRecord>& all = {});

struct StabilityInterval {
    double lo = 0.0, hi = 0.0;
    bool lo_closed = false, hi_closed = false;
};

struct NUOptions {
    int initial_resolution = 4000;
    bool validate = true;
    SweepOptions sweep;
    CriticalOptions critical;
    RootFinderOptions roots;
};

struct NUProfile {
    double tau_max = 0.0;
    int nu0 = 0;
    bool origin_invariant = false;
    std::vector<double> breakpoints;
    std::vector<int> counts;  // counts[i]: NU on the open interval after breakpoint i-1
    std::vector<StabilityInterval> stability_intervals;
    std::vector<CriticalFrequencyRecord> critical;
    std::vector<std::string> warnings;
};

NUProfile nu_profile(const Quasipolynomial& qp, double tau_max, const NUOptions& opts = {});

// Gauss-Newton on {d^k Delta / d lambda^k (j w, tau) = 0, k < n} in (w, tau).
struct CriticalPair {
    double omega = 0.0;
    double tau = 0.0;
    int n = 0;
    bool converged = false;
};
CriticalPair polish_critical_pair(const Quasipolynomial& qp, double omega, double tau, double residual_tol = 1e-10);

}  // namespace tds
