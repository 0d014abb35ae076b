#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tds/quasipolynomial.hpp"
#include "tds/rational.hpp"

namespace tds {

/**
 * Local analysis of an m-multiple root (lambda*, tau*) through the Newton
 * diagram of Delta(lambda* + u, tau* + v).
 *
 * n[i] is the first v-order with a nonzero d^{i+n}/du^i dv^n; nullopt means
 * none up to cap_n. kappa counts the leading nullopt entries: those roots
 * stay at lambda* for every delay.
 */
struct PartialIndexTable {
    int m = 0;
    std::vector<std::optional<int>> n;
    int kappa = 0;
    int cap_n = 0;
    // Some scanned derivative sat within a factor 10 of the zero threshold.
    bool ambiguous = false;
};

struct PartialIndexOptions {
    std::optional<int> cap_n;     // default: Polya-Szego degree + 2
    double zero_tol = 1e-9;       // relative to the running max of per-order magnitudes
    double multiplicity_tol = 1e-7;
};

PartialIndexTable partial_indices(const PointEvaluator& ev, int m, const PartialIndexOptions& opts = {});

struct DiagramPoint {
    int i = 0;  // lambda order
    int l = 0;  // tau order
    friend auto operator<=>(const DiagramPoint&, const DiagramPoint&) = default;
};

struct Segment {
    Rational beta;                     // slope magnitude, tau ~ lambda^(1/beta)
    int multiplicity = 0;              // i_end - i_start
    std::vector<DiagramPoint> points;  // on the segment, ascending i
    DiagramPoint start, end;
};

struct NewtonDiagram {
    int m = 0;
    int kappa = 0;
    std::vector<DiagramPoint> points;  // ascending i, ends with (m, 0)
    std::vector<Segment> segments;     // filled by polygon_segments
};

NewtonDiagram newton_diagram(const PartialIndexTable& table, int m);
// Lower convex hull walk, slopes in exact arithmetic. points must contain (m, 0).
std::vector<Segment> polygon_segments(const std::vector<DiagramPoint>& points, int kappa);

struct WeierstrassTerm {
    int index = 0;              // w_index
    std::optional<int> order;   // n_index; nullopt for w == 0
    cplx coeff;                 // w_index(v) = coeff * v^order + ...
};

struct WeierstrassLeading {
    std::vector<WeierstrassTerm> terms;
    // The finite orders are strictly decreasing, which the leading-term
    // formula assumes.
    bool valid = true;
};

WeierstrassLeading weierstrass_leading(const PointEvaluator& ev, const PartialIndexTable& table, int m);

struct BranchPolynomial {
    std::vector<cplx> coeffs;  // ascending in z, degree = segment multiplicity
    bool degenerate = false;   // leading coefficient numerically zero
};

std::vector<BranchPolynomial> branch_polynomials(const std::vector<Segment>& segments, const PointEvaluator& ev,
                                                 int m);

enum class Direction { EntersCPlus, EntersCMinus, Tangential };

/**
 * lambda(tau) = base + sum_k series[k] * t^(p + k), t = (tau - tau*)^(1/q),
 * exponent = p/q. series[0] is the leading coefficient.
 */
struct PuiseuxBranch {
    cplx base;
    Rational exponent;
    cplx leading_coeff;
    std::vector<cplx> series;
    int segment = 0;
    int conjugacy_size = 1;
    bool repeated = false;  // leading coefficient is a multiple root of its polynomial
    int equation_order = 0; // t-order of the leading local equation
    Direction direction = Direction::Tangential;
};

struct ExpansionOptions {
    int series_terms = 2;       // coefficients kept per branch, leading included
    double cluster_tol = 1e-6;  // relative distance of repeated polynomial roots
    double tangential_tol = 1e-6;
};

std::vector<PuiseuxBranch> expand_branches(const std::vector<Segment>& segments,
                                           const std::vector<BranchPolynomial>& polys, const PointEvaluator& ev,
                                           int kappa = 0, const ExpansionOptions& opts = {});

enum class SplittingClass { CRS, RS, NRS };
SplittingClass classify_splitting(const std::vector<Segment>& segments);

struct DirectionOptions {
    int max_terms = 6;           // series depth for tangential branches
    double tangential_tol = 1e-6;
    double zero_tol = 1e-12;     // series coefficients below this relative size are zero
};

struct BranchDirection {
    Direction forward = Direction::Tangential;   // tau > tau*
    Direction backward = Direction::Tangential;  // tau < tau*
    int decided_at = 0;                          // series index that decided forward
};

struct DirectionReport {
    std::vector<PuiseuxBranch> branches;  // with series extended as far as needed
    std::vector<BranchDirection> directions;
    // NU(tau* + 0) - NU(tau* - 0) contributed by this root; doubled for a
    // non-real base to count the conjugate root.
    int delta_nu = 0;
};

DirectionReport crossing_direction_multiple(const std::vector<PuiseuxBranch>& branches, const PointEvaluator& ev,
                                            int kappa = 0, const DirectionOptions& opts = {});

// Everything above in one call: indices, diagram, segments, branches, class.
struct PuiseuxAnalysis {
    PartialIndexTable table;
    NewtonDiagram diagram;
    std::vector<BranchPolynomial> polynomials;
    WeierstrassLeading weierstrass;
    std::vector<PuiseuxBranch> branches;
    SplittingClass splitting = SplittingClass::CRS;
};

PuiseuxAnalysis analyze_multiple_root(const PointEvaluator& ev, int m, const PartialIndexOptions& idx = {},
                                      const ExpansionOptions& exp = {});

// Two delays. The expansion parameter x1 is delay parameter `x1_param` of
// the evaluator; x2 is the other one.
struct PartialIndex2D {
    std::optional<int> n1, n2;
    std::optional<int> n_mixed;  // x1-order of w_i(x1, 1) when n1 and n2 are both infinite
    int eta = 0;                 // x2-order paired with n_mixed
    int rho = 0;                 // order in x1 used for the diagram; meaningful when finite
    bool finite = true;
};

struct PartialIndexTable2D {
    int m = 0;
    int kappa = 0;
    int x1_param = 0;
    std::vector<PartialIndex2D> n;
    bool ambiguous = false;
};

PartialIndexTable2D partial_indices_2d(const PointEvaluator& ev, int m, int x1_param = 0,
                                       const PartialIndexOptions& opts = {});

struct TwoDelayTerm {
    int index = 0;
    int rho = 0;   // x1 power
    int eta = 0;   // x2 power
    cplx coeff;    // w_index ~ coeff * x1^rho * x2^eta
};

struct TwoDelayBranch {
    Rational exponent;  // in x1
    cplx coeff;         // at the requested x2 offset
    int segment = 0;
};

struct TwoDelayExpansion {
    PartialIndexTable2D table;
    std::vector<DiagramPoint> points;
    std::vector<Segment> segments;
    std::vector<TwoDelayTerm> leading;  // one per diagram point below m
    std::vector<TwoDelayBranch> branches;
};

TwoDelayExpansion two_delay_expansion(const PointEvaluator& ev, int m, int x1_param = 0, double x2_offset = 0.0,
                                      const PartialIndexOptions& opts = {});

const char* to_string(Direction d);
const char* to_string(SplittingClass s);

}  // namespace tds
