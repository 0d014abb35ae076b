#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "exact_models.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"
#include "tds/errors.hpp"
#include "tds/puiseux.hpp"
#include "tds/rootfinder.hpp"

using namespace tds;
using testing_support::fixture;
using testing_support::uniform;
constexpr double pi = std::numbers::pi;
const cplx J(0.0, 1.0);

namespace {

std::vector<DiagramPoint> pts(std::initializer_list<std::pair<int, int>> il) {
    std::vector<DiagramPoint> v;
    for (auto [i, l] : il) v.push_back({i, l});
    return v;
}

// lambda^2 - g/l + k1 e^{-lambda tau} + k2 e^{-2 lambda tau}
Quasipolynomial delayed_pendulum(double gl, double k1, double k2, double tau) {
    return Quasipolynomial::commensurate({RealPolynomial{-gl, 0.0, 1.0}, RealPolynomial{k1}, RealPolynomial{k2}}, tau);
}

int segment_total(const std::vector<Segment>& segs) {
    int s = 0;
    for (const auto& g : segs) s += g.multiplicity;
    return s;
}

// Brute-force lower hull of the diagram from i = kappa to (m, 0): slopes
// between consecutive vertices, as doubles.
std::vector<double> brute_hull_slopes(std::vector<DiagramPoint> p, int kappa) {
    std::erase_if(p, [&](const DiagramPoint& d) { return d.i < kappa; });
    std::sort(p.begin(), p.end());
    std::vector<double> slopes;
    std::size_t cur = 0;
    while (cur + 1 < p.size()) {
        // farthest point achieving the minimal slope
        double best = 1e300;
        std::size_t nxt = cur + 1;
        for (std::size_t k = cur + 1; k < p.size(); ++k) {
            const double s = static_cast<double>(p[k].l - p[cur].l) / (p[k].i - p[cur].i);
            if (s < best - 1e-12 || (std::abs(s - best) <= 1e-12 && p[k].i > p[nxt].i)) {
                best = s;
                nxt = k;
            }
        }
        slopes.push_back(-best);
        cur = nxt;
    }
    return slopes;
}

struct TrackedError {
    double eps;
    double scaled;
};

// |lambda(eps) - lambda* - c eps^beta| / eps^beta, lambda(eps) from the oracle
// Newton started at the prediction.
std::vector<TrackedError> track(const oracle::Field& f, cplx base, long double tau0, const PuiseuxBranch& b,
                                std::initializer_list<double> eps) {
    std::vector<TrackedError> out;
    for (double e : eps) {
        const double s = std::pow(e, b.exponent.to_double());
        const cplx pred = base + b.leading_coeff * s;
        cplx l = pred;
        REQUIRE(oracle::newton(f, oracle::xcplx(tau0 + e), l));
        out.push_back({e, std::abs(l - pred) / s});
    }
    return out;
}

}  // namespace

TEST_CASE("first example: indices, diagram, segments, class") {
    auto ev = shifted_evaluator(fixture("example1.json"), J, pi);
    auto table = partial_indices(ev, 3);
    REQUIRE(table.n.size() == 3);
    CHECK(table.n[0] == 2);
    CHECK(table.n[1] == 1);
    CHECK(table.n[2] == 1);
    CHECK(table.kappa == 0);
    CHECK_FALSE(table.ambiguous);

    auto diag = newton_diagram(table, 3);
    CHECK(diag.points == pts({{0, 2}, {1, 1}, {2, 1}, {3, 0}}));
    auto segs = polygon_segments(diag.points, diag.kappa);
    REQUIRE(segs.size() == 2);
    CHECK(segs[0].beta == Rational(1));
    CHECK(segs[0].multiplicity == 1);
    CHECK(segs[0].start == DiagramPoint{0, 2});
    CHECK(segs[0].end == DiagramPoint{1, 1});
    CHECK(segs[1].beta == Rational(1, 2));
    CHECK(segs[1].multiplicity == 2);
    CHECK(segs[1].start == DiagramPoint{1, 1});
    CHECK(segs[1].end == DiagramPoint{3, 0});
    CHECK(classify_splitting(segs) == SplittingClass::CRS);

    // w_0 = coeff v^2 from the quotient of tau- and lambda-derivatives
    auto wl = weierstrass_leading(ev, table, 3);
    REQUIRE(wl.terms.size() == 3);
    CHECK(wl.terms[0].order == 2);
    const cplx d_tt = ev.derivative(0, 2), d_lll = ev.derivative(3, 0);
    CHECK(std::abs(wl.terms[0].coeff - 3.0 * d_tt / d_lll) < 1e-12);

    // the beta = 1/2 polynomial is quadratic with opposite roots
    auto polys = branch_polynomials(segs, ev, 3);
    REQUIRE(polys.size() == 2);
    REQUIRE(polys[1].coeffs.size() == 3);
    CHECK(std::abs(polys[1].coeffs[1]) < 1e-12 * std::abs(polys[1].coeffs[2]));
}

TEST_CASE("delayed pendulum: invariant double root") {
    // k1 = 2 g/l, k2 = -g/l with tau away from sqrt(l/g)
    auto qp = delayed_pendulum(0.5, 1.0, -0.5, 1.0);
    REQUIRE(multiplicity_at(qp, 1.0, cplx(0.0)) == 2);
    auto table = partial_indices(shifted_evaluator(qp, cplx(0.0), 1.0), 2);
    CHECK_FALSE(table.n[0].has_value());
    CHECK_FALSE(table.n[1].has_value());
    CHECK(table.kappa == 2);
}

TEST_CASE("delayed pendulum: triple root at the critical delay") {
    auto qp = fixture("pendulum_triple.json");
    const double tau0 = std::sqrt(2.0);
    auto ev = shifted_evaluator(qp, cplx(0.0), tau0);
    auto a = analyze_multiple_root(ev, 3);
    REQUIRE(a.table.n.size() == 3);
    CHECK(a.table.n[2] == 1);
    CHECK(a.table.kappa == 2);
    CHECK(a.diagram.points == pts({{2, 1}, {3, 0}}));
    REQUIRE(a.diagram.segments.size() == 1);
    CHECK(a.diagram.segments[0].beta == Rational(1));
    CHECK(a.diagram.segments[0].multiplicity == 1);

    // w_2 ~ -(2 g/l) v with g/l = 1/2
    const auto& w2 = a.weierstrass.terms.back();
    CHECK(w2.index == 2);
    CHECK(w2.order == 1);
    CHECK(std::abs(w2.coeff - cplx(-1.0)) < 1e-12);
    for (const auto& t : a.weierstrass.terms)
        if (t.order) CHECK(*t.order >= 1);  // w_i(0) = 0

    // The moving root leaves the origin with slope +2 g/l (checked against the oracle below).
    REQUIRE(a.branches.size() == 1);
    CHECK(a.branches[0].exponent == Rational(1));
    CHECK(std::abs(a.branches[0].leading_coeff - cplx(1.0)) < 1e-10);
    CHECK(static_cast<int>(a.branches.size()) + a.table.kappa == 3);

    auto f = oracle::commensurate(testing_support::coefficient_table(qp));
    for (double e : {1e-3, 1e-4}) {
        cplx l = a.branches[0].leading_coeff * e;
        REQUIRE(oracle::newton(f, tau0 + e, l));
        CHECK(l.real() / e == doctest::Approx(1.0).epsilon(2e-3));
    }
}

TEST_CASE("simple roots reduce to the implicit-function slope") {
    auto qp = Quasipolynomial::commensurate({RealPolynomial{0.0, 1.0}, RealPolynomial{1.0}}, 1.0);
    auto ev = shifted_evaluator(qp, J, pi / 2);
    auto a = analyze_multiple_root(ev, 1);
    CHECK(a.diagram.points == pts({{0, 1}, {1, 0}}));
    REQUIRE(a.diagram.segments.size() == 1);
    CHECK(a.diagram.segments[0].beta == Rational(1));
    CHECK(a.splitting == SplittingClass::CRS);
    REQUIRE(a.polynomials.size() == 1);
    REQUIRE(a.polynomials[0].coeffs.size() == 2);
    const cplx root = -a.polynomials[0].coeffs[0] / a.polynomials[0].coeffs[1];
    CHECK(std::abs(root + ev.derivative(0, 1) / ev.derivative(1, 0)) < 1e-14);
    REQUIRE(a.branches.size() == 1);
    CHECK(a.branches[0].leading_coeff.real() > 0);

    auto rep = crossing_direction_multiple(a.branches, ev);
    CHECK(rep.directions[0].forward == Direction::EntersCPlus);
    CHECK(rep.delta_nu == 2);
}

TEST_CASE("polygon segments on synthetic diagrams") {
    auto one = polygon_segments(pts({{0, 1}, {1, 0}}), 0);
    REQUIRE(one.size() == 1);
    CHECK(one[0].beta == Rational(1));
    CHECK(one[0].multiplicity == 1);

    auto nrs = polygon_segments(pts({{0, 3}, {2, 0}}), 0);
    REQUIRE(nrs.size() == 1);
    CHECK(nrs[0].beta == Rational(3, 2));
    CHECK(nrs[0].multiplicity == 2);
    CHECK(classify_splitting(nrs) == SplittingClass::NRS);
}

TEST_CASE("polygon slopes equal a brute-force lower hull") {
    for (int s = 0; s < 200; ++s) {
        const int m = 1 + s % 7;
        std::vector<DiagramPoint> p;
        const int kappa = s % 3 == 0 ? static_cast<int>(uniform(0, m - 0.01)) : 0;
        for (int i = kappa; i < m; ++i)
            if (i == kappa || uniform(0, 1) < 0.6) p.push_back({i, 1 + static_cast<int>(uniform(0, 6))});
        p.push_back({m, 0});
        auto segs = polygon_segments(p, kappa);
        auto ref = brute_hull_slopes(p, kappa);
        REQUIRE(segs.size() == ref.size());
        for (std::size_t k = 0; k < segs.size(); ++k) CHECK(segs[k].beta.to_double() == doctest::Approx(ref[k]));
        CHECK(segment_total(segs) + kappa == m);
        for (std::size_t k = 1; k < segs.size(); ++k) CHECK(segs[k].beta < segs[k - 1].beta);
    }
}

TEST_CASE("third example expansion and direction") {
    auto qp = fixture("example3.json");
    auto ev = shifted_evaluator(qp, J, pi);
    ExpansionOptions eo;
    eo.series_terms = 2;
    auto a = analyze_multiple_root(ev, 2, {}, eo);
    CHECK(segment_total(a.diagram.segments) + a.table.kappa == 2);
    REQUIRE(a.branches.size() == 2);
    for (const auto& b : a.branches) {
        CHECK(b.exponent == Rational(1, 2));
        CHECK(std::abs(b.leading_coeff) == doctest::Approx(0.1468).epsilon(2e-3 / 0.1468));
        CHECK(std::abs(b.leading_coeff.real()) < 1e-3);
        REQUIRE(b.series.size() >= 2);
        CHECK(std::abs(b.series[1] - cplx(-0.0033, -0.1473)) < 1e-3);
    }
    auto rep = crossing_direction_multiple(a.branches, ev);
    CHECK(rep.delta_nu == -2);
    // the leading term is tangential; the second term decides
    for (const auto& d : rep.directions) CHECK(d.decided_at >= 1);
    const int counted = count_unstable(qp, pi + 0.02) - count_unstable(qp, pi - 0.02);
    CHECK(rep.delta_nu == counted);
}

TEST_CASE("second example Taylor branches") {
    auto qp = fixture("example2.json");
    auto ev = shifted_evaluator(qp, J, pi);
    auto a = analyze_multiple_root(ev, 2);
    REQUIRE(a.branches.size() == 2);
    std::vector<double> ims;
    for (const auto& b : a.branches) {
        CHECK(b.exponent == Rational(1));
        CHECK(std::abs(b.leading_coeff.real()) < 1e-10);
        ims.push_back(b.leading_coeff.imag());
    }
    std::sort(ims.begin(), ims.end());
    CHECK(ims[0] == doctest::Approx(0.0796).epsilon(1e-3));
    CHECK(ims[1] == doctest::Approx(0.1592).epsilon(1e-3));
    auto rep = crossing_direction_multiple(a.branches, ev);
    CHECK(rep.delta_nu == 0);
}

TEST_CASE("a real double root splitting across the imaginary direction") {
    // lambda - 2 + e^{1 - lambda}: double root at 1, n_0 = 1, real leading coefficients of opposite signs
    auto qp = Quasipolynomial::commensurate({RealPolynomial{-2.0, 1.0}, RealPolynomial{std::exp(1.0)}}, 1.0);
    REQUIRE(multiplicity_at(qp, 1.0, cplx(1.0)) == 2);
    auto ev = shifted_evaluator(qp, cplx(1.0), 1.0);
    auto a = analyze_multiple_root(ev, 2);
    CHECK(a.table.n[0] == 1);
    REQUIRE(a.branches.size() == 2);
    auto rep = crossing_direction_multiple(a.branches, ev);
    int plus = 0, minus = 0;
    for (const auto& d : rep.directions) {
        plus += d.forward == Direction::EntersCPlus;
        minus += d.forward == Direction::EntersCMinus;
    }
    CHECK(plus == 1);
    CHECK(minus == 1);
}

TEST_CASE("predicted branches converge to tracked roots") {
    struct Case {
        const char* model;
        cplx base;
        double tau0;
        int m;
    };
    for (const Case& c : {Case{"example1.json", J, pi, 3}, Case{"example3.json", J, pi, 2},
                          Case{"example2.json", J, pi, 2}, Case{"pendulum_triple.json", 0.0, std::sqrt(2.0), 3}}) {
        const std::string model = c.model;
        CAPTURE(model);
        auto qp = fixture(c.model);
        auto ev = shifted_evaluator(qp, c.base, c.tau0);
        auto a = analyze_multiple_root(ev, c.m);
        // The second example's double root sits at (j, pi) only for the exact
        // coefficients; the rounded ones move it by about 1e-8.
        const bool exact = model == "example2.json";
        auto f = exact ? oracle::commensurate_extended(oracle::second_example_coefficients())
                       : oracle::commensurate(testing_support::coefficient_table(qp));
        const long double tau0 = exact ? std::numbers::pi_v<long double> : c.tau0;
        for (const auto& b : a.branches) {
            auto errs = track(f, c.base, tau0, b, {1e-3, 1e-4, 1e-5});
            for (std::size_t k = 1; k < errs.size(); ++k) {
                CAPTURE(errs[k - 1].scaled);
                CHECK(errs[k].scaled * 3.0 <= errs[k - 1].scaled);
            }
        }
    }
}

TEST_CASE("branches at conjugate points are conjugate") {
    auto qp = fixture("example3.json");
    auto up = analyze_multiple_root(shifted_evaluator(qp, J, pi), 2);
    auto down = analyze_multiple_root(shifted_evaluator(qp, -J, pi), 2);
    REQUIRE(up.branches.size() == down.branches.size());
    for (const auto& b : up.branches) {
        const bool found = std::any_of(down.branches.begin(), down.branches.end(), [&](const PuiseuxBranch& d) {
            return d.exponent == b.exponent && std::abs(d.leading_coeff - std::conj(b.leading_coeff)) < 1e-10;
        });
        CHECK(found);
    }
}

TEST_CASE("aggregate NU change matches direct counts") {
    struct Case {
        const char* model;
        cplx base;
        double tau0;
        int m;
        bool origin;
    };
    for (const Case& c : {Case{"example1.json", J, pi, 3, false}, Case{"example3.json", J, pi, 2, false},
                          Case{"example2.json", J, pi, 2, false},
                          Case{"pendulum_triple.json", 0.0, std::sqrt(2.0), 3, true}}) {
        const std::string model = c.model;
        CAPTURE(model);
        auto qp = fixture(c.model);
        auto ev = shifted_evaluator(qp, c.base, c.tau0);
        auto a = analyze_multiple_root(ev, c.m);
        auto rep = crossing_direction_multiple(a.branches, ev, a.table.kappa);
        const CountOptions co{.exclude_origin = c.origin};
        const double h = 0.01;
        const int counted = count_unstable(qp, c.tau0 + h, {}, co) - count_unstable(qp, c.tau0 - h, {}, co);
        CHECK(rep.delta_nu == counted);
    }
}

TEST_CASE("two-delay example") {
    auto qp = fixture("two_delay.json");
    const std::vector<double> tau0{0.0, 1.0, pi};
    auto ev = shifted_evaluator(qp, J, tau0);
    // d^2 Delta / d lambda d tau_1 at the critical point
    const int orders[] = {0, 1};
    CHECK(std::abs(ev.derivative(1, orders) - cplx(1.0, -pi)) < 1e-12);

    auto t2 = partial_indices_2d(ev, 2, 1);
    REQUIRE(t2.n.size() == 2);
    CHECK(t2.n[0].n1 == 1);
    CHECK_FALSE(t2.n[0].n2.has_value());
    CHECK(t2.n[1].n1 == 1);
    CHECK_FALSE(t2.n[1].n2.has_value());

    auto ex = two_delay_expansion(ev, 2, 1);
    CHECK(ex.table.kappa == 0);
    CHECK(ex.points == pts({{0, 1}, {1, 1}, {2, 0}}));
    REQUIRE(ex.segments.size() == 1);
    CHECK(ex.segments[0].beta == Rational(1, 2));
    CHECK(ex.segments[0].multiplicity == 2);
    const cplx D = cplx(8 + pi * pi, 8 - 3 * pi) + 16.0 * std::exp(-J);
    REQUIRE(!ex.leading.empty());
    CHECK(std::abs(ex.leading[0].coeff - (-2.0 * J / D)) < 1e-8);

    REQUIRE(ex.branches.size() == 2);
    auto f = oracle::fixed(testing_support::coefficient_table(qp), tau0, 1);
    const double e = 1e-4;
    for (const auto& b : ex.branches) {
        cplx l = J + b.coeff * std::sqrt(e);
        REQUIRE(oracle::newton(f, pi + e, l));
        CHECK(std::abs(l - (J + b.coeff * std::sqrt(e))) < 5e-4);
    }
}

TEST_CASE("a model without the second delay reduces to the one-delay expansion") {
    // lambda + e^{-lambda tau_1} with an unused second delay value
    auto two = Quasipolynomial::fixed({0.0, 1.0, pi / 2}, {Term{0, RealPolynomial{0.0, 1.0}}, Term{2, RealPolynomial{1.0}}});
    auto ev2 = shifted_evaluator(two, J, {0.0, 1.0, pi / 2});
    auto t2 = partial_indices_2d(ev2, 1, 1);
    for (const auto& n : t2.n) CHECK_FALSE(n.n2.has_value());
    auto ex = two_delay_expansion(ev2, 1, 1);
    REQUIRE(ex.branches.size() == 1);

    auto one = Quasipolynomial::commensurate({RealPolynomial{0.0, 1.0}, RealPolynomial{1.0}}, pi / 2);
    auto a = analyze_multiple_root(shifted_evaluator(one, J, pi / 2), 1);
    REQUIRE(a.branches.size() == 1);
    CHECK(ex.branches[0].exponent == a.branches[0].exponent);
    CHECK(std::abs(ex.branches[0].coeff - a.branches[0].leading_coeff) < 1e-14);
}

TEST_CASE("partial indices reject a non-root") {
    auto ev = shifted_evaluator(fixture("example3.json"), cplx(0.3, 0.3), pi);
    CHECK_THROWS_AS(partial_indices(ev, 2), NotARoot);
}
