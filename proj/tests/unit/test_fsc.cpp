#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fixtures.hpp"
#include "tds/crossing.hpp"
#include "tds/fsc.hpp"
#include "tds/rootfinder.hpp"

using namespace tds;
using testing_support::fixture;
constexpr double pi = std::numbers::pi;

namespace {

const CriticalFrequencyRecord* near(const std::vector<CriticalFrequencyRecord>& recs, double omega, double tol = 1e-6) {
    for (const auto& r : recs)
        if (std::abs(r.omega - omega) < tol) return &r;
    return nullptr;
}

// Offsets large enough to leave the axis; the roots near a tangential
// crossing move off it only at high order.
int nu_jump(const Quasipolynomial& qp, double tau, double offset = 0.02) {
    return count_unstable(qp, tau + offset) - count_unstable(qp, tau - offset);
}

}  // namespace

TEST_CASE("second example: two curves meet the unit circle at omega = 1") {
    auto qp = fixture("example2.json");
    auto sw = sweep(qp, 0.0, 3.0, 2000);
    auto crit = critical_frequencies(sw);
    const auto* rec = near(crit, 1.0);
    REQUIRE(rec != nullptr);
    CHECK(rec->g == 2);
    CHECK(var_nf(sw, *rec, crit) == 0);
}

TEST_CASE("third example: critical frequencies match the crossing set") {
    auto qp = fixture("example3.json");
    auto sw = sweep(qp, 0.0, 4.0, 2000);
    auto crit = critical_frequencies(sw);
    const auto* one = near(crit, 1.0);
    REQUIRE(one != nullptr);
    CHECK(one->g == 1);
    CHECK(one->n == 2);
    CHECK(one->tau0 == doctest::Approx(pi).epsilon(1e-8));
    // one curve drops below the unit circle for +j; the conjugate root doubles the NU jump
    CHECK(var_nf(sw, *one, crit) == -1);

    // n_d = 1: every unit-circle touch is a crossing frequency and vice versa
    auto cs = crossing_set(qp);
    for (const auto& f : cs.frequencies) CHECK(near(crit, f.omega) != nullptr);
    for (const auto& r : crit) {
        const bool found = std::any_of(cs.frequencies.begin(), cs.frequencies.end(),
                                       [&](const auto& f) { return std::abs(f.omega - r.omega) < 1e-6; });
        CHECK(found);
    }
}

TEST_CASE("a single curve crossing upward") {
    auto qp = Quasipolynomial::commensurate({RealPolynomial{0.5, 1.0}, RealPolynomial{1.0}}, 1.0);
    auto sw = sweep(qp, 0.0, 3.0, 500);
    auto crit = critical_frequencies(sw);
    REQUIRE(crit.size() == 1);
    CHECK(crit[0].omega == doctest::Approx(std::sqrt(0.75)).epsilon(1e-8));
    CHECK(var_nf(sw, crit[0], crit) == 1);
}

TEST_CASE("degenerate sweeps") {
    auto poly_only = Quasipolynomial::commensurate({RealPolynomial{1.0, 2.0, 1.0}}, 1.0);
    auto sw = sweep(poly_only, 0.0, 3.0, 100);
    CHECK(sw.branch_count == 0);
    CHECK(critical_frequencies(sw).empty());

    auto hyper = Quasipolynomial::commensurate({RealPolynomial{2.0, 1.0}, RealPolynomial{1.0}}, 1.0);
    CHECK(critical_frequencies(sweep(hyper, 0.0, 10.0, 1000)).empty());
}

TEST_CASE("branch bookkeeping") {
    for (const auto& name : {"scalar.json", "pendulum_triple.json", "example2.json", "example3.json"}) {
        auto qp = fixture(name);
        auto sw = sweep(qp, 0.0, 5.0, 800);
        REQUIRE(sw.omega.size() == sw.roots.size());
        std::size_t total = 0;
        for (const auto& row : sw.roots) {
            CHECK(row.size() == static_cast<std::size_t>(sw.branch_count));
            total += row.size();
        }
        CHECK(total == sw.omega.size() * static_cast<std::size_t>(sw.branch_count));
        CHECK(std::is_sorted(sw.omega.begin(), sw.omega.end()));
        CHECK(sw.omega.front() >= 0.0);
        CHECK(sw.omega.size() >= 800);
    }
}

TEST_CASE("third example NU profile") {
    auto prof = nu_profile(fixture("example3.json"), 5.0);
    CHECK(prof.nu0 == 0);
    REQUIRE(prof.breakpoints.size() == 3);
    CHECK(prof.breakpoints[0] == doctest::Approx(1.2525).epsilon(1e-3));
    CHECK(prof.breakpoints[1] == doctest::Approx(pi).epsilon(1e-8));
    CHECK(prof.breakpoints[2] == doctest::Approx(4.0549).epsilon(1e-3));
    CHECK(prof.counts == std::vector<int>{0, 2, 0, 2});
    REQUIRE(prof.stability_intervals.size() == 2);
    CHECK(prof.stability_intervals[0].lo == 0.0);
    CHECK(prof.stability_intervals[0].lo_closed);
    CHECK_FALSE(prof.stability_intervals[0].hi_closed);
    CHECK(prof.stability_intervals[1].lo == doctest::Approx(pi));
    CHECK_FALSE(prof.stability_intervals[1].lo_closed);
    CHECK_FALSE(prof.stability_intervals[1].hi_closed);
    CHECK(prof.warnings.empty());
}

TEST_CASE("second example NU does not change at odd multiples of pi") {
    auto qp = fixture("example2.json");
    for (int k = 0; k < 4; ++k) CHECK(nu_jump(qp, (2 * k + 1) * pi) == 0);
    auto prof = nu_profile(qp, 8 * pi);
    for (double b : prof.breakpoints)
        for (int k = 0; k < 4; ++k) CHECK(std::abs(b - (2 * k + 1) * pi) > 1e-6);
}

TEST_CASE("hyperbolic NU profile is constant") {
    auto qp = Quasipolynomial::commensurate({RealPolynomial{2.0, 1.0}, RealPolynomial{1.0}}, 1.0);
    auto prof = nu_profile(qp, 50.0);
    CHECK(prof.breakpoints.empty());
    CHECK(prof.counts == std::vector<int>{0});
    REQUIRE(prof.stability_intervals.size() == 1);
    CHECK(prof.stability_intervals[0].hi == doctest::Approx(50.0));
}

TEST_CASE("NU jumps repeat along each critical frequency and equal var_nf") {
    for (const auto& name : {"example3.json", "example2.json"}) {
        auto qp = fixture(name);
        auto sw = sweep(qp, 0.0, 4.0, 2000);
        auto crit = critical_frequencies(sw);
        REQUIRE(!crit.empty());
        for (const auto& rec : crit) {
            const int v = var_nf(sw, rec, crit);
            const int expected = rec.omega > 0 ? 2 * v : v;
            const double period = 2 * pi / rec.omega;
            std::vector<int> jumps;
            for (int k = 0; k < 3; ++k) {
                const double tau = rec.tau0 + k * period;
                if (tau <= 0) continue;
                jumps.push_back(nu_jump(qp, tau));
            }
            for (int j : jumps) CHECK(j == expected);
        }
    }
}

TEST_CASE("critical pair polishing") {
    auto qp = fixture("example3.json");
    auto cp = polish_critical_pair(qp, 1.0 + 1e-4, pi - 1e-4);
    CHECK(cp.converged);
    CHECK(cp.n == 2);
    CHECK(cp.omega == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(cp.tau == doctest::Approx(pi).epsilon(1e-10));
}

TEST_CASE("threaded sweep matches the sequential one") {
    auto qp = fixture("example2.json");
    SweepOptions par;
    par.threads = 4;
    auto a = sweep(qp, 0.0, 3.0, 1000);
    auto b = sweep(qp, 0.0, 3.0, 1000, par);
    REQUIRE(a.omega == b.omega);
    CHECK(a.roots == b.roots);
}
