#pragma once

#include <random>
#include <string>
#include <vector>

#include "tds/model_io.hpp"
#include "tds/quasipolynomial.hpp"

namespace testing_support {

inline std::string fixture_path(const std::string& name) { return std::string(TDS_FIXTURE_DIR) + "/" + name; }

inline tds::Quasipolynomial fixture(const std::string& name) { return tds::load_model(fixture_path(name)); }

inline const std::vector<std::string>& fixture_names() {
    static const std::vector<std::string> names = {"scalar.json",   "pendulum_triple.json", "example1.json",
                                                   "example2.json", "example3.json",        "two_delay.json"};
    return names;
}

// Raw coefficient table for the oracle, indexed by term index.
inline std::vector<std::vector<double>> coefficient_table(const tds::Quasipolynomial& qp) {
    std::vector<std::vector<double>> polys(static_cast<std::size_t>(qp.max_index() + 1));
    for (const auto& t : qp.terms()) polys[static_cast<std::size_t>(t.index)] = t.poly.coeffs();
    return polys;
}

inline std::mt19937_64& rng() {
    static std::mt19937_64 gen(20240611);
    return gen;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

}  // namespace testing_support
