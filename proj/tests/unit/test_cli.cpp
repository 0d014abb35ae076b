#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"
#include "tds_cli/app.hpp"

using nlohmann::json;
using testing_support::fixture_path;

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    Result r;
    r.code = tds::cli::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("tds_cli_" + name);
}

std::size_t line_count(const std::string& s) {
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_CASE("roots on the scalar model") {
    auto r = run({"roots", "--model", fixture_path("scalar.json"), "--box", "-0.5", "0.5", "-0.5", "0.5"});
    REQUIRE(r.code == 0);
    auto j = json::parse(r.out);
    REQUIRE(j["roots"].size() == 1);
    CHECK(j["roots"][0]["multiplicity"] == 2);
    CHECK(std::abs(j["roots"][0]["re"].get<double>()) < 1e-6);

    auto csv = run({"roots", "--model", fixture_path("scalar.json"), "--box", "-0.5", "0.5", "-0.5", "0.5",
                    "--format", "csv"});
    REQUIRE(csv.code == 0);
    CHECK(csv.out.rfind("re,im,multiplicity,residual\n", 0) == 0);
    CHECK(line_count(csv.out) == 2);
}

TEST_CASE("NU profile of the third example") {
    auto r = run({"nu", "--model", fixture_path("example3.json"), "--tau-max", "5"});
    REQUIRE(r.code == 0);
    auto j = json::parse(r.out);
    CHECK(j["counts"] == json::array({0, 2, 0, 2}));
    REQUIRE(j["breakpoints"].size() == 3);
    CHECK(j["breakpoints"][1].get<double>() == doctest::Approx(3.141592653589793));
}

TEST_CASE("invalid input maps to exit code 2") {
    auto neg = run({"roots", "--model", fixture_path("scalar.json"), "--tau", "-1", "--box", "-1", "1", "-1", "1"});
    CHECK(neg.code == 2);
    CHECK(neg.err.find("delay") != std::string::npos);
    CHECK(run({"roots", "--model", "/nonexistent.json", "--box", "-1", "1", "-1", "1"}).code == 2);
    CHECK(run({"mid", "--n", "0", "--m", "0", "--lambda0", "0", "--tau", "1"}).code == 2);
    CHECK(run({"crossing", "--model", fixture_path("two_delay.json")}).code == 2);
    CHECK(run({"bogus"}).code == 2);
}

TEST_CASE("CSV exports") {
    auto scalar = run({"export", "scalar-roots", "--steps", "3"});
    REQUIRE(scalar.code == 0);
    CHECK(scalar.out.rfind("alpha,re,im,multiplicity\n", 0) == 0);
    CHECK(line_count(scalar.out) > 3);

    auto pend = run({"export", "pendulum-roots", "--steps", "2"});
    REQUIRE(pend.code == 0);
    CHECK(pend.out.rfind("alpha,re,im,multiplicity\n", 0) == 0);

    // a model with no delayed term has no curves: header only
    const auto path = temp_file("poly.json");
    {
        std::ofstream f(path);
        f << R"({"delays": {"kind": "commensurate", "tau": 1.0}, "terms": [{"index": 0, "coeffs": [1.0, 1.0]}]})";
    }
    auto empty = run({"export", "fsc", "--model", path.string(), "--omega-max", "2", "--resolution", "20"});
    REQUIRE(empty.code == 0);
    CHECK(empty.out == "omega,branch_id,modulus\n");
    std::filesystem::remove(path);
}

TEST_CASE("output is byte-identical across runs and thread counts") {
    const std::vector<std::string> args = {"roots", "--model", fixture_path("example2.json"), "--box",
                                           "-2", "1", "-8", "8"};
    auto a = run(args);
    auto b = run(args);
    auto with_threads = args;
    with_threads.insert(with_threads.end(), {"--threads", "4"});
    auto c = run(with_threads);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out == c.out);
}

TEST_CASE("TDS_THREADS caps the worker count") {
    ::setenv("TDS_THREADS", "2", 1);
    CHECK(tds::cli::resolve_threads(8) == 2);
    CHECK(tds::cli::resolve_threads(1) == 1);
    CHECK(tds::cli::resolve_threads(0) <= 2);
    ::unsetenv("TDS_THREADS");
    CHECK(tds::cli::resolve_threads(3) == 3);
    CHECK(tds::cli::resolve_threads(0) >= 1);
}

TEST_CASE("a designed model round-trips through a file") {
    auto mid = run({"mid", "--n", "2", "--m", "1", "--lambda0", "-1", "--tau", "1"});
    REQUIRE(mid.code == 0);
    auto j = json::parse(mid.out);
    CHECK(j["multiplicity"] == 4);
    CHECK(j["stable"] == true);
    const auto path = temp_file("mid.json");
    {
        std::ofstream f(path);
        f << j["model"].dump();
    }
    auto r = run({"roots", "--model", path.string(), "--box", "-1.5", "-0.5", "-0.5", "0.5"});
    REQUIRE(r.code == 0);
    auto roots = json::parse(r.out)["roots"];
    REQUIRE(roots.size() == 1);
    CHECK(roots[0]["multiplicity"] == 4);
    CHECK(roots[0]["re"].get<double>() == doctest::Approx(-1.0).epsilon(1e-4));

    auto out = temp_file("out.json");
    auto o = run({"roots", "--model", path.string(), "--box", "-1.5", "-0.5", "-0.5", "0.5", "-o", out.string()});
    REQUIRE(o.code == 0);
    CHECK(o.out.empty());
    std::ifstream in(out);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == r.out);
    std::filesystem::remove(path);
    std::filesystem::remove(out);
}

TEST_CASE("pendulum design output") {
    auto r = run({"pendulum", "--a0", "-1", "--tau", "1"});
    REQUIRE(r.code == 0);
    auto j = json::parse(r.out);
    CHECK(j["lambda_plus"].get<double>() == doctest::Approx(-2.0 + std::sqrt(3.0)));
    CHECK(j["unstable"] == false);
}
