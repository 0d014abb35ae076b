#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracle.hpp"
#include "tds/errors.hpp"
#include "tds/model_io.hpp"
#include "tds/quasipolynomial.hpp"

using namespace tds;
using testing_support::fixture;
using testing_support::uniform;
constexpr double pi = std::numbers::pi;
const cplx J(0.0, 1.0);

namespace {

Quasipolynomial scalar_family(double alpha) {
    return Quasipolynomial::commensurate({RealPolynomial{alpha, 1.0}, RealPolynomial{-alpha}}, 1.0);
}

}  // namespace

TEST_CASE("evaluate at known roots") {
    CHECK(std::abs(evaluate(scalar_family(-1.0), cplx(0.0), 1.0)) == doctest::Approx(0.0));

    auto poly_only = Quasipolynomial::commensurate({RealPolynomial{2.0, 3.0, 1.0}}, 1.0);
    CHECK(std::abs(evaluate(poly_only, cplx(-2.0), 1.0)) < 1e-15);

    auto ex1 = fixture("example1.json");
    CHECK(std::abs(evaluate(ex1, J, pi)) < 1e-13);
}

TEST_CASE("mixed derivatives of the first example at (j, pi)") {
    auto ex1 = fixture("example1.json");
    auto d = [&](int i, int k) { return mixed_derivative(ex1, J, pi, i, k); };
    CHECK(std::abs(d(0, 2) - cplx(-2.0)) < 1e-12);
    CHECK(std::abs(d(1, 1) - cplx(2.0, pi)) < 1e-12);
    CHECK(std::abs(d(2, 1) + cplx(5 * pi, 4 * pi * pi + 6)) < 1e-11);
    CHECK(std::abs(d(3, 0) + 3 * pi * cplx(-6 + pi * pi, -5 * pi)) < 1e-10);
    // multiplicity 3 in lambda
    CHECK(std::abs(d(1, 0)) < 1e-12);
    CHECK(std::abs(d(2, 0)) < 1e-11);
}

TEST_CASE("scalar family derivative and tau-derivative at the origin") {
    for (double alpha : {-2.0, -1.0, 0.5}) {
        auto qp = scalar_family(alpha);
        CHECK(std::abs(mixed_derivative(qp, cplx(0.0), 1.0, 1, 0) - cplx(1.0 + alpha)) < 1e-14);
    }
    for (const auto& name : testing_support::fixture_names()) {
        auto qp = fixture(name);
        auto tau = qp.default_delays();
        for (int p = 0; p < qp.parameter_count(); ++p) {
            std::vector<int> orders(static_cast<std::size_t>(qp.parameter_count()), 0);
            orders[static_cast<std::size_t>(p)] = 1;
            CHECK(std::abs(mixed_derivative(qp, cplx(0.0), tau, 0, orders)) == 0.0);
        }
    }
}

TEST_CASE("Polya-Szego degree") {
    CHECK(polya_szego_degree(scalar_family(-1.0)) == 2);
    auto pend = Quasipolynomial::commensurate(
        {RealPolynomial{-1.0, 0.0, 1.0}, RealPolynomial{2.0}, RealPolynomial{-1.0}}, 1.0);
    CHECK(polya_szego_degree(pend) == 4);
    for (int n = 1; n <= 4; ++n)
        for (int m = 0; m <= n; ++m) {
            std::vector<double> p0(static_cast<std::size_t>(n + 1), 1.0), p1(static_cast<std::size_t>(m + 1), 1.0);
            auto qp = Quasipolynomial::commensurate({RealPolynomial(p0), RealPolynomial(p1)}, 1.0);
            CHECK(polya_szego_degree(qp) == n + m + 1);
        }
}

TEST_CASE("auxiliary polynomial") {
    const double alpha = -0.7;
    auto pa = auxiliary_polynomial(scalar_family(alpha));
    CHECK(pa.z_degree() == 1);
    CHECK(pa.coefficient(0) == RealPolynomial{alpha, 1.0});
    CHECK(pa.coefficient(1) == RealPolynomial{-alpha});

    auto ex3 = fixture("example3.json");
    auto pa3 = auxiliary_polynomial(ex3);
    CHECK(pa3.z_degree() == 1);
    CHECK(pa3.coefficient(1) == RealPolynomial{1, 1, 10, 1, 8});
    CHECK(pa3.coefficient(0).degree() == 5);

    auto poly_only = Quasipolynomial::commensurate({RealPolynomial{1.0, 2.0}}, 1.0);
    CHECK(auxiliary_polynomial(poly_only).z_degree() == 0);

    // consistency with evaluate
    for (const auto& name : {"scalar.json", "pendulum_triple.json", "example1.json", "example2.json", "example3.json"}) {
        auto qp = fixture(name);
        auto aux = auxiliary_polynomial(qp);
        const double tau = qp.default_delays()[0];
        for (int s = 0; s < 50; ++s) {
            cplx l(uniform(-3, 3), uniform(-10, 10));
            cplx a = evaluate(qp, l, tau), b = aux(l, std::exp(-l * tau));
            CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, derivative_magnitude(qp, l, std::vector{tau}, 0)));
        }
    }
}

TEST_CASE("conjugate symmetry of evaluate") {
    for (const auto& name : testing_support::fixture_names()) {
        auto qp = fixture(name);
        auto tau = qp.default_delays();
        double worst = 0.0;
        for (int s = 0; s < 1000; ++s) {
            cplx l(uniform(-4, 4), uniform(-20, 20));
            worst = std::max(worst, std::abs(evaluate(qp, std::conj(l), tau) - std::conj(evaluate(qp, l, tau))));
        }
        CHECK(worst == 0.0);
    }
}

TEST_CASE("mixed derivatives match the Cauchy-integral oracle") {
    for (const auto& name : {"scalar.json", "pendulum_triple.json", "example1.json", "example2.json", "example3.json"}) {
        auto qp = fixture(name);
        const double tau = qp.default_delays()[0];
        auto field = oracle::commensurate(testing_support::coefficient_table(qp));
        for (int s = 0; s < 20; ++s) {
            cplx l(uniform(-1, 1), uniform(-3, 3));
            for (int i = 0; i <= 3; ++i)
                for (int k = 0; i + k <= 3; ++k) {
                    cplx lib = mixed_derivative(qp, l, tau, i, k);
                    cplx ref = oracle::cauchy_derivative(field, l, tau, i, k);
                    double scale = derivative_magnitude(qp, l, std::vector{tau}, i, k);
                    CHECK(std::abs(lib - ref) <= 1e-6 * std::max(scale, 1e-300));
                }
        }
    }
    auto two = fixture("two_delay.json");
    auto vals = two.default_delays();
    auto field = oracle::fixed(testing_support::coefficient_table(two), vals, 1);
    for (int s = 0; s < 20; ++s) {
        cplx l(uniform(-1, 1), uniform(-3, 3));
        for (int i = 0; i <= 2; ++i)
            for (int k = 0; i + k <= 3; ++k) {
                std::vector<int> orders{0, k};
                cplx lib = mixed_derivative(two, l, vals, i, orders);
                cplx ref = oracle::cauchy_derivative(field, l, vals[2], i, k);
                double scale = derivative_magnitude(two, l, vals, i, orders);
                CHECK(std::abs(lib - ref) <= 1e-6 * std::max(scale, 1e-300));
            }
    }
}

TEST_CASE("mixed derivatives match central finite differences") {
    auto qp = fixture("example3.json");
    const double tau = pi;
    const double h = 1e-3;
    for (int s = 0; s < 20; ++s) {
        cplx l(uniform(-0.5, 0.5), uniform(-2, 2));
        // first order in lambda and tau
        cplx fd_l = (evaluate(qp, l + h, tau) - evaluate(qp, l - h, tau)) / (2 * h);
        cplx fd_t = (evaluate(qp, l, tau + h) - evaluate(qp, l, tau - h)) / (2 * h);
        cplx ex_l = mixed_derivative(qp, l, tau, 1, 0);
        cplx ex_t = mixed_derivative(qp, l, tau, 0, 1);
        CHECK(std::abs(fd_l - ex_l) <= 1e-5 * derivative_magnitude(qp, l, std::vector{tau}, 1));
        CHECK(std::abs(fd_t - ex_t) <= 1e-5 * derivative_magnitude(qp, l, std::vector{tau}, 0, 1));
    }
}

TEST_CASE("derivative cap") {
    auto qp = fixture("scalar.json");
    CHECK_THROWS_AS(mixed_derivative(qp, cplx(0.0), 1.0, 40, 30), CapExceeded);
    CHECK_NOTHROW(mixed_derivative(qp, cplx(0.0), 1.0, 40, 30, 80));
}

TEST_CASE("shifted evaluator") {
    auto qp = fixture("example3.json");
    auto id = shifted_evaluator(qp, cplx(0.0), pi);
    for (int s = 0; s < 20; ++s) {
        cplx u(uniform(-1, 1), uniform(-1, 1));
        CHECK(std::abs(id(u) - evaluate(qp, u, pi)) <= 1e-14 * std::max(1.0, std::abs(evaluate(qp, u, pi))));
    }

    auto ex1 = shifted_evaluator(fixture("example1.json"), J, pi);
    CHECK(std::abs(ex1(cplx(0.0))) < 1e-13);
    CHECK(std::abs(ex1.derivative(1, 0)) < 1e-12);
    CHECK(std::abs(ex1.derivative(2, 0)) < 1e-11);
    CHECK(std::abs(ex1.derivative(3, 0)) > 1.0);

    // For a non-real base the shifted function is not conjugate-symmetric in u.
    cplx u(0.3, 0.2);
    CHECK(std::abs(ex1(std::conj(u)) - std::conj(ex1(u))) > 1e-3);
}

TEST_CASE("model file round trip and rejection") {
    for (const auto& name : testing_support::fixture_names()) {
        auto qp = fixture(name);
        CHECK(parse_model(serialize_model(qp)) == qp);
    }
    CHECK_THROWS_AS(parse_model(R"({"delays":{"kind":"commensurate","tau":-1},"terms":[{"index":0,"coeffs":[1,1]}]})"),
                    ValidationError);
    CHECK_THROWS_AS(parse_model(R"({"delays":{"kind":"commensurate"},"terms":[{"index":0,"coeffs":[1,1]}],"x":1})"),
                    ValidationError);
    CHECK_THROWS_AS(parse_model(R"({"delays":{"kind":"fixed","values":[0,-2]},"terms":[{"index":0,"coeffs":[1]}]})"),
                    ValidationError);
    CHECK_THROWS_AS(parse_model(R"({"delays":{"kind":"commensurate"},"terms":[{"index":-1,"coeffs":[1]}]})"),
                    ValidationError);
    CHECK_THROWS_AS(parse_model("{\n\"delays\": ,\n}"), ValidationError);
    CHECK_THROWS_AS(load_model("/nonexistent/model.json"), ValidationError);
    try {
        parse_model(R"({"delays":{"kind":"commensurate","tau":1},"terms":[{"index":0,"coeffs":[1,"a"]}]})");
        FAIL("expected a ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("terms") != std::string::npos);
    }
}

TEST_CASE("system kind") {
    CHECK(fixture("scalar.json").kind() == SystemKind::Retarded);
    auto neutral = Quasipolynomial::commensurate({RealPolynomial{1.0, 1.0}, RealPolynomial{0.5, 0.5}}, 1.0);
    CHECK(neutral.kind() == SystemKind::Neutral);
    auto advanced = Quasipolynomial::commensurate({RealPolynomial{1.0}, RealPolynomial{0.5, 0.5}}, 1.0);
    CHECK(advanced.kind() == SystemKind::Advanced);
}
