#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "tds/quasipolynomial.hpp"

namespace tds {

struct ComplexBox {
    double re_min = 0, re_max = 0, im_min = 0, im_max = 0;

    static ComplexBox make(double re_min, double re_max, double im_min, double im_max);
    static ComplexBox around(cplx center, double half_width);

    cplx center() const { return {0.5 * (re_min + re_max), 0.5 * (im_min + im_max)}; }
    double width() const { return re_max - re_min; }
    double height() const { return im_max - im_min; }
    double diameter() const;
    bool contains(cplx z) const;
    ComplexBox expanded(double left, double right, double bottom, double top) const;
};

struct RootCluster {
    cplx center;
    int multiplicity = 1;
    double residual = 0.0;  // |Delta(center)|
    double box_diameter = 0.0;
};

struct RootFinderOptions {
    double residual_tol = 1e-10;      // relative to the evaluation magnitude
    double multiplicity_tol = 1e-7;   // relative to each derivative's magnitude
    double boundary_tol = 1e-13;      // |Delta| / magnitude below this on an edge = root on the edge
    double winding_tol = 1e-3;        // allowed distance of turns from an integer
    int initial_samples = 64;
    int max_edge_samples = 1 << 20;
    int max_depth = 80;
    double min_box_size = 1e-10;      // relative to max(1, |center|)
    int max_jitter = 5;
    double jitter_fraction = 1e-3;
    unsigned threads = 1;
    std::uint64_t seed = 0;
};

// Analytic function with its derivative and rounding scale; the root finder
// works on this so that shifted and unshifted evaluators share one code path.
struct AnalyticFunction {
    std::function<cplx(cplx)> value;
    std::function<cplx(cplx, int)> derivative;  // order >= 1
    std::function<double(cplx, int)> magnitude; // order >= 0
    int max_multiplicity = 1 << 20;
    double max_delay = 0.0;  // frequency of exp oscillation along edges
};

AnalyticFunction make_function(const Quasipolynomial& qp, std::span<const double> tau);
AnalyticFunction make_function(const PointEvaluator& ev);

int winding_count(const AnalyticFunction& f, const ComplexBox& box, const RootFinderOptions& opts = {});
int winding_count(const Quasipolynomial& qp, std::span<const double> tau, const ComplexBox& box,
                  const RootFinderOptions& opts = {});
int winding_count(const Quasipolynomial& qp, double tau, const ComplexBox& box, const RootFinderOptions& opts = {});
// Box in shifted coordinates u = lambda - lambda0.
int winding_count(const PointEvaluator& ev, const ComplexBox& box, const RootFinderOptions& opts = {});

// Clusters sorted by (real part, imaginary part). The box is expanded by
// jitter if a root sits on its boundary.
std::vector<RootCluster> roots_in_box(const AnalyticFunction& f, const ComplexBox& box,
                                      const RootFinderOptions& opts = {});
std::vector<RootCluster> roots_in_box(const Quasipolynomial& qp, std::span<const double> tau, const ComplexBox& box,
                                      const RootFinderOptions& opts = {});
std::vector<RootCluster> roots_in_box(const Quasipolynomial& qp, double tau, const ComplexBox& box,
                                      const RootFinderOptions& opts = {});
// Same without jitter: throws BoundaryRoot instead.
std::vector<RootCluster> roots_in_exact_box(const AnalyticFunction& f, const ComplexBox& box,
                                            const RootFinderOptions& opts = {});

int multiplicity_at(const Quasipolynomial& qp, std::span<const double> tau, cplx lambda0,
                    const RootFinderOptions& opts = {});
int multiplicity_at(const Quasipolynomial& qp, double tau, cplx lambda0, const RootFinderOptions& opts = {});

// Newton on the (order-1)-th derivative from a guess; returns the converged
// point or the guess unchanged with converged = false.
struct PolishResult {
    cplx root;
    bool converged = false;
};
PolishResult polish_root(const AnalyticFunction& f, cplx guess, int order, double max_step);

// Smallest R such that every root with Re(lambda) >= x has |lambda| <= R
// (retarded models only).
double modulus_bound(const Quasipolynomial& qp, std::span<const double> tau, double x);

struct CountOptions {
    // Exclude a root at the origin that persists for every delay. A small
    // square around the origin is cut out of the counted region.
    bool exclude_origin = false;
};

int count_unstable(const Quasipolynomial& qp, std::span<const double> tau, const RootFinderOptions& opts = {},
                   const CountOptions& count = {});
int count_unstable(const Quasipolynomial& qp, double tau, const RootFinderOptions& opts = {},
                   const CountOptions& count = {});

// Clusters sorted by descending real part until k multiplicities are covered.
std::vector<RootCluster> rightmost_roots(const Quasipolynomial& qp, std::span<const double> tau, int k,
                                         const RootFinderOptions& opts = {});
std::vector<RootCluster> rightmost_roots(const Quasipolynomial& qp, double tau, int k,
                                         const RootFinderOptions& opts = {});

}  // namespace tds
