#include "tds/model_io.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "tds/errors.hpp"

namespace tds {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ValidationError("model field " + path + ": " + msg);
}

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!ok.count(it.key())) fail(path + "." + it.key(), "unknown field");
}

double number_at(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

int line_of(std::string_view text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

}  // namespace

Quasipolynomial parse_model(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ValidationError("model syntax error at line " + std::to_string(line_of(text, e.byte)) + ": " +
                              e.what());
    }
    if (!doc.is_object()) fail("$", "expected an object");
    reject_unknown(doc, "$", {"delays", "terms"});
    if (!doc.contains("delays")) fail("$.delays", "missing");
    if (!doc.contains("terms")) fail("$.terms", "missing");

    const json& d = doc["delays"];
    if (!d.is_object()) fail("$.delays", "expected an object");
    if (!d.contains("kind") || !d["kind"].is_string()) fail("$.delays.kind", "expected \"commensurate\" or \"fixed\"");
    const std::string kind = d["kind"].get<std::string>();

    const json& t = doc["terms"];
    if (!t.is_array()) fail("$.terms", "expected an array");
    std::vector<Term> terms;
    for (std::size_t k = 0; k < t.size(); ++k) {
        const std::string p = "$.terms[" + std::to_string(k) + "]";
        const json& e = t[k];
        if (!e.is_object()) fail(p, "expected an object");
        reject_unknown(e, p, {"index", "coeffs"});
        if (!e.contains("index") || !e["index"].is_number_integer()) fail(p + ".index", "expected an integer");
        const long idx = e["index"].get<long>();
        if (idx < 0 || idx > 1000) fail(p + ".index", "must be in [0, 1000]");
        if (!e.contains("coeffs") || !e["coeffs"].is_array()) fail(p + ".coeffs", "expected an array");
        std::vector<double> c;
        for (std::size_t i = 0; i < e["coeffs"].size(); ++i)
            c.push_back(number_at(e["coeffs"][i], p + ".coeffs[" + std::to_string(i) + "]"));
        terms.push_back({static_cast<int>(idx), RealPolynomial(std::move(c))});
    }

    try {
        if (kind == "commensurate") {
            reject_unknown(d, "$.delays", {"kind", "tau"});
            std::optional<double> tau;
            if (d.contains("tau")) {
                tau = number_at(d["tau"], "$.delays.tau");
                if (*tau < 0.0) fail("$.delays.tau", "delay must be nonnegative");
            }
            return Quasipolynomial::commensurate(std::move(terms), tau);
        }
        if (kind == "fixed") {
            reject_unknown(d, "$.delays", {"kind", "values"});
            if (!d.contains("values") || !d["values"].is_array()) fail("$.delays.values", "expected an array");
            std::vector<double> v;
            for (std::size_t i = 0; i < d["values"].size(); ++i) {
                const std::string p = "$.delays.values[" + std::to_string(i) + "]";
                v.push_back(number_at(d["values"][i], p));
                if (v.back() < 0.0) fail(p, "delay must be nonnegative");
            }
            return Quasipolynomial::fixed(std::move(v), std::move(terms));
        }
    } catch (const ValidationError& e) {
        const std::string what = e.what();
        if (what.rfind("model field", 0) == 0) throw;
        throw ValidationError("model: " + what);
    }
    fail("$.delays.kind", "expected \"commensurate\" or \"fixed\"");
}

Quasipolynomial load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open model file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str());
}

std::string serialize_model(const Quasipolynomial& qp) {
    json doc;
    json d;
    if (qp.is_commensurate()) {
        d["kind"] = "commensurate";
        if (qp.delays().base_delay) d["tau"] = *qp.delays().base_delay;
    } else {
        d["kind"] = "fixed";
        d["values"] = qp.delays().values;
    }
    doc["delays"] = d;
    json terms = json::array();
    for (const auto& t : qp.terms()) terms.push_back({{"index", t.index}, {"coeffs", t.poly.coeffs()}});
    doc["terms"] = terms;
    return doc.dump(2);
}

}  // namespace tds
