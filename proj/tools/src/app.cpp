#include "tds_cli/app.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "tds/crossing.hpp"
#include "tds/errors.hpp"
#include "tds/fsc.hpp"
#include "tds/mid.hpp"
#include "tds/model_io.hpp"
#include "tds/puiseux.hpp"
#include "tds/rootfinder.hpp"

namespace tds::cli {

namespace {

using json = nlohmann::ordered_json;

struct Common {
    std::string model;
    std::string format = "json";
    std::string output;
    double tau = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> delays;
    double residual_tol = RootFinderOptions{}.residual_tol;
    double multiplicity_tol = RootFinderOptions{}.multiplicity_tol;
    double boundary_tol = RootFinderOptions{}.boundary_tol;
    int max_depth = RootFinderOptions{}.max_depth;
    unsigned threads = 0;
    std::uint64_t seed = 0;
};

void add_model_flags(CLI::App* sub, Common& c) {
    sub->add_option("--model", c.model, "model file (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--tau", c.tau, "delay for commensurate models (overrides the file)");
    sub->add_option("--delays", c.delays, "delay values d_1.. for fixed models (overrides the file)");
}

void add_numeric_flags(CLI::App* sub, Common& c) {
    sub->add_option("--residual-tol", c.residual_tol, "root residual, relative to the evaluation scale")
        ->capture_default_str();
    sub->add_option("--multiplicity-tol", c.multiplicity_tol, "derivative threshold for multiplicity")
        ->capture_default_str();
    sub->add_option("--boundary-tol", c.boundary_tol, "|Delta| on a box edge treated as a root")
        ->capture_default_str();
    sub->add_option("--max-depth", c.max_depth, "subdivision depth cap")->capture_default_str();
    sub->add_option("--threads", c.threads, "worker threads, 0 = hardware (capped by TDS_THREADS)");
    sub->add_option("--seed", c.seed, "seed for box jitter")->capture_default_str();
}

void add_output_flags(CLI::App* sub, Common& c, bool csv) {
    if (csv)
        sub->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    sub->add_option("--output,-o", c.output, "write results to this file instead of stdout");
}

RootFinderOptions root_options(const Common& c) {
    RootFinderOptions o;
    o.residual_tol = c.residual_tol;
    o.multiplicity_tol = c.multiplicity_tol;
    o.boundary_tol = c.boundary_tol;
    o.max_depth = c.max_depth;
    o.threads = resolve_threads(c.threads);
    o.seed = c.seed;
    return o;
}

Quasipolynomial load(const Common& c) { return load_model(c.model); }

std::vector<double> delays_of(const Quasipolynomial& qp, const Common& c) {
    if (qp.is_commensurate()) {
        if (!std::isnan(c.tau)) return {c.tau};
        if (!c.delays.empty()) throw ValidationError("--delays applies to fixed models; use --tau");
        return qp.default_delays();
    }
    if (!std::isnan(c.tau)) throw ValidationError("--tau applies to commensurate models; use --delays");
    if (c.delays.empty()) return qp.default_delays();
    std::vector<double> v{0.0};
    v.insert(v.end(), c.delays.begin(), c.delays.end());
    if (static_cast<int>(v.size()) != static_cast<int>(qp.delays().values.size()))
        throw DimensionMismatch("--delays expects " + std::to_string(qp.delays().values.size() - 1) + " values");
    return v;
}

// Shortest round-trip text for CSV cells, the same digits the JSON writer uses.
std::string num(double x) { return json(x).dump(); }

void emit(const Common& c, std::ostream& out, const std::string& text) {
    if (c.output.empty()) {
        out << text;
        return;
    }
    std::ofstream f(c.output, std::ios::binary);
    if (!f) throw ValidationError("cannot open output file " + c.output);
    f << text;
    if (!f) throw Error("write failed: " + c.output);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json box_json(const ComplexBox& b) { return {b.re_min, b.re_max, b.im_min, b.im_max}; }

json rational_json(const Rational& r) { return r.to_string(); }

// --- roots -----------------------------------------------------------------

struct RootsArgs {
    Common c;
    std::vector<double> box;
};

std::string roots_cmd(const RootsArgs& a) {
    const auto qp = load(a.c);
    const auto tau = delays_of(qp, a.c);
    const auto box = ComplexBox::make(a.box[0], a.box[1], a.box[2], a.box[3]);
    const auto roots = roots_in_box(qp, tau, box, root_options(a.c));
    if (a.c.format == "csv") {
        std::string s = "re,im,multiplicity,residual\n";
        for (const auto& r : roots)
            s += num(r.center.real()) + "," + num(r.center.imag()) + "," + std::to_string(r.multiplicity) + "," +
                 num(r.residual) + "\n";
        return s;
    }
    json arr = json::array();
    for (const auto& r : roots)
        arr.push_back({{"re", r.center.real()}, {"im", r.center.imag()}, {"multiplicity", r.multiplicity},
                       {"residual", r.residual}});
    return dump({{"box", box_json(box)}, {"roots", arr}});
}

// --- crossing --------------------------------------------------------------

std::string crossing_cmd(const Common& c) {
    const auto qp = load(c);
    if (!qp.is_commensurate() || qp.max_index() > 1)
        throw NotSupported("crossing needs P0(lambda) + P1(lambda) exp(-lambda tau)");
    const auto set = crossing_set(qp);
    struct Row {
        double omega, tau_star;
        std::string direction;
    };
    std::vector<Row> rows;
    for (const auto& f : set.frequencies) {
        const auto dir = crossing_direction_simple(qp, f.omega, f.tau_star, c.multiplicity_tol);
        rows.push_back({f.omega, f.tau_star, to_string(dir)});
    }
    if (c.format == "csv") {
        std::string s = "omega,tau_star,direction\n";
        for (const auto& r : rows) s += num(r.omega) + "," + num(r.tau_star) + "," + r.direction + "\n";
        return s;
    }
    json arr = json::array();
    for (const auto& r : rows) arr.push_back({{"omega", r.omega}, {"tau_star", r.tau_star}, {"direction", r.direction}});
    const auto hyp = hyperbolicity_test(qp.poly(0), qp.max_index() == 1 ? qp.poly(1) : RealPolynomial{});
    return dump({{"crossings", arr},
                 {"invariant_frequencies", set.invariant_frequencies},
                 {"origin_invariant", set.origin_invariant},
                 {"hyperbolicity", to_string(hyp.verdict)}});
}

// --- fsc / nu --------------------------------------------------------------

struct SweepArgs {
    Common c;
    double omega_min = 0.0;
    double omega_max = 0.0;
    int resolution = 2000;
    double band = SweepOptions{}.band;
};

FrequencySweep run_sweep(const SweepArgs& a, const Quasipolynomial& qp) {
    if (!(a.omega_max > a.omega_min) || a.omega_min < 0) throw ValidationError("need 0 <= omega-min < omega-max");
    if (a.resolution < 2) throw ValidationError("resolution must be at least 2");
    SweepOptions so;
    so.band = a.band;
    so.threads = resolve_threads(a.c.threads);
    return sweep(qp, a.omega_min, a.omega_max, a.resolution, so);
}

std::string fsc_csv(const FrequencySweep& sw) {
    std::string s = "omega,branch_id,modulus\n";
    for (std::size_t i = 0; i < sw.omega.size(); ++i)
        for (int b = 0; b < sw.branch_count; ++b) {
            const double m = sw.modulus(i, b);
            if (m > 1e100) continue;  // root lost to a leading-coefficient drop
            s += num(sw.omega[i]) + "," + std::to_string(b) + "," + num(m) + "\n";
        }
    return s;
}

std::string fsc_cmd(const SweepArgs& a) {
    const auto qp = load(a.c);
    const auto sw = run_sweep(a, qp);
    if (a.c.format == "csv") return fsc_csv(sw);
    json samples = json::array();
    for (std::size_t i = 0; i < sw.omega.size(); ++i)
        for (int b = 0; b < sw.branch_count; ++b) {
            const double m = sw.modulus(i, b);
            if (m > 1e100) continue;
            samples.push_back({{"omega", sw.omega[i]}, {"branch_id", b}, {"modulus", m}});
        }
    json crit = json::array();
    for (const auto& r : critical_frequencies(sw))
        crit.push_back({{"omega", r.omega}, {"g", r.g}, {"tau0", r.tau0}, {"n", r.n}});
    return dump({{"branches", sw.branch_count}, {"critical", crit}, {"samples", samples}});
}

struct NuArgs {
    Common c;
    double tau_max = 0.0;
    int resolution = NUOptions{}.initial_resolution;
    bool no_validate = false;
};

NUProfile run_nu(const NuArgs& a, const Quasipolynomial& qp) {
    NUOptions o;
    o.initial_resolution = a.resolution;
    o.validate = !a.no_validate;
    o.roots = root_options(a.c);
    o.sweep.threads = o.roots.threads;
    return nu_profile(qp, a.tau_max, o);
}

std::string nu_csv(const NUProfile& p) {
    std::string s = "tau_lo,tau_hi,count\n";
    double lo = 0.0;
    for (std::size_t i = 0; i < p.counts.size(); ++i) {
        const double hi = i < p.breakpoints.size() ? p.breakpoints[i] : p.tau_max;
        s += num(lo) + "," + num(hi) + "," + std::to_string(p.counts[i]) + "\n";
        lo = hi;
    }
    return s;
}

std::string nu_cmd(const NuArgs& a) {
    const auto qp = load(a.c);
    const auto p = run_nu(a, qp);
    if (a.c.format == "csv") return nu_csv(p);
    json intervals = json::array();
    for (const auto& iv : p.stability_intervals)
        intervals.push_back({{"lo", iv.lo}, {"hi", iv.hi}, {"lo_closed", iv.lo_closed}, {"hi_closed", iv.hi_closed}});
    json crit = json::array();
    for (const auto& r : p.critical)
        crit.push_back({{"omega", r.omega}, {"g", r.g}, {"var_nf", r.var_nf}, {"tau0", r.tau0}, {"n", r.n}});
    return dump({{"tau_max", p.tau_max},
                 {"nu0", p.nu0},
                 {"origin_invariant", p.origin_invariant},
                 {"breakpoints", p.breakpoints},
                 {"counts", p.counts},
                 {"stability_intervals", intervals},
                 {"critical", crit},
                 {"warnings", p.warnings}});
}

// --- puiseux ---------------------------------------------------------------

struct PuiseuxArgs {
    Common c;
    std::vector<double> lambda0;
    double tau0 = 0.0;
    double tau2 = std::numeric_limits<double>::quiet_NaN();
    int x1_param = 0;
    int series_terms = ExpansionOptions{}.series_terms;
};

json diagram_json(const std::vector<DiagramPoint>& pts) {
    json arr = json::array();
    for (const auto& p : pts) arr.push_back({p.i, p.l});
    return arr;
}

json segments_json(const std::vector<Segment>& segs) {
    json arr = json::array();
    for (const auto& s : segs)
        arr.push_back({{"beta", rational_json(s.beta)},
                       {"m", s.multiplicity},
                       {"start", {s.start.i, s.start.l}},
                       {"end", {s.end.i, s.end.l}}});
    return arr;
}

std::string puiseux_cmd(const PuiseuxArgs& a) {
    const auto qp = load(a.c);
    const cplx l0(a.lambda0[0], a.lambda0[1]);
    auto ropts = root_options(a.c);
    PartialIndexOptions idx;
    idx.multiplicity_tol = a.c.multiplicity_tol;

    if (!std::isnan(a.tau2)) {
        if (qp.is_commensurate() || qp.parameter_count() != 2)
            throw ValidationError("--tau2 needs a fixed-delay model with two delays");
        if (a.x1_param < 0 || a.x1_param > 1) throw ValidationError("--x1-param must be 0 or 1");
        std::vector<double> tau = qp.delays().values;
        tau[static_cast<std::size_t>(a.x1_param) + 1] = a.tau0;
        tau[static_cast<std::size_t>(1 - a.x1_param) + 1] = a.tau2;
        const int m = multiplicity_at(qp, tau, l0, ropts);
        const auto ev = shifted_evaluator(qp, l0, tau);
        const auto exp = two_delay_expansion(ev, m, a.x1_param, 0.0, idx);
        json branches = json::array();
        for (const auto& b : exp.branches)
            branches.push_back({{"exponent", rational_json(b.exponent)},
                                {"coeff_re", b.coeff.real()},
                                {"coeff_im", b.coeff.imag()},
                                {"direction", nullptr},
                                {"segment", b.segment}});
        return dump({{"multiplicity", m},
                     {"kappa", exp.table.kappa},
                     {"diagram", diagram_json(exp.points)},
                     {"segments", segments_json(exp.segments)},
                     {"branches", branches},
                     {"splitting", to_string(classify_splitting(exp.segments))}});
    }

    std::vector<double> tau;
    if (qp.is_commensurate()) {
        tau = {a.tau0};
    } else {
        if (qp.parameter_count() != 1) throw ValidationError("fixed models with two delays need --tau2");
        tau = {0.0, a.tau0};
    }
    const int m = multiplicity_at(qp, tau, l0, ropts);
    const auto ev = shifted_evaluator(qp, l0, tau);
    ExpansionOptions eo;
    eo.series_terms = a.series_terms;
    const auto an = analyze_multiple_root(ev, m, idx, eo);
    json branches = json::array();
    std::optional<DirectionReport> rep;
    try {
        rep = crossing_direction_multiple(an.branches, ev, an.table.kappa);
    } catch (const UndecidedDirection&) {
    }
    for (std::size_t k = 0; k < an.branches.size(); ++k) {
        const auto& b = an.branches[k];
        json row = {{"exponent", rational_json(b.exponent)},
                    {"coeff_re", b.leading_coeff.real()},
                    {"coeff_im", b.leading_coeff.imag()},
                    {"direction", to_string(rep ? rep->directions[k].forward : b.direction)}};
        if (rep) row["backward"] = to_string(rep->directions[k].backward);
        row["segment"] = b.segment;
        branches.push_back(row);
    }
    json table = json::array();
    for (const auto& n : an.table.n) table.push_back(n ? json(*n) : json(nullptr));
    json out = {{"multiplicity", m},
                {"kappa", an.table.kappa},
                {"partial_indices", table},
                {"diagram", diagram_json(an.diagram.points)},
                {"segments", segments_json(an.diagram.segments)},
                {"branches", branches},
                {"splitting", to_string(an.splitting)}};
    out["delta_nu"] = rep ? json(rep->delta_nu) : json(nullptr);
    return dump(out);
}

// --- mid / pendulum / resonator -------------------------------------------

json certificate_json(const DominanceCertificate& c) {
    json j = {{"method", to_string(c.method)}, {"passed", c.passed}};
    j["margin"] = c.margin ? json(*c.margin) : json(nullptr);
    j["margin_is_bound"] = c.margin_is_bound;
    j["box"] = c.method == DominanceMethod::RootScan ? box_json(c.box) : json(nullptr);
    j["multiplicity_found"] = c.multiplicity_found;
    if (c.nearest) j["nearest"] = {c.nearest->real(), c.nearest->imag()};
    j["note"] = c.note;
    return j;
}

DominanceOptions dominance_options(const Common& c, const std::string& method) {
    DominanceOptions o;
    o.method = method == "sufficient" ? DominanceMethod::SufficientCondition : DominanceMethod::RootScan;
    o.roots = root_options(c);
    return o;
}

struct MidArgs {
    Common c;
    int n = 0, m = 0;
    double lambda0 = 0.0, tau = 0.0;
    std::string method = "scan";
    bool no_certify = false;
};

std::string mid_cmd(const MidArgs& a) {
    const auto s = max_multiplicity_coefficients(a.n, a.m, a.lambda0, a.tau);
    json j = {{"n", s.n},         {"m", s.m},         {"lambda0", s.lambda0},
              {"tau", s.tau},     {"a", s.a},         {"alpha", s.alpha},
              {"multiplicity", s.multiplicity()}, {"decay_estimate", s.decay_estimate},
              {"stable", mid_stable(s)}};
    j["model"] = json::parse(serialize_model(s.quasipolynomial()));
    if (!a.no_certify) j["certificate"] = certificate_json(certify_dominance(s, dominance_options(a.c, a.method)));
    return dump(j);
}

struct PendulumArgs {
    Common c;
    double a0 = 0.0, tau = 0.0;
    std::string method = "scan";
    bool no_certify = false;
};

std::string pendulum_cmd(const PendulumArgs& a) {
    const auto d = pendulum_pd_design(a.a0, a.tau);
    json j = {{"a0", d.a0},
              {"tau", d.tau},
              {"b0", d.b0},
              {"b1", d.b1},
              {"lambda_plus", d.lambda_plus},
              {"lambda_minus", d.lambda_minus},
              {"tau_crit", d.tau_crit},
              {"at_critical", d.at_critical},
              {"unstable", d.unstable}};
    if (!a.no_certify)
        j["certificate"] = certificate_json(
            certify_dominance(d.quasipolynomial(), d.tau, d.lambda_plus, 3, dominance_options(a.c, a.method)));
    return dump(j);
}

struct ResonatorArgs {
    Common c;
    double omega = 0.0;
    int k = 1;
    double ma = 0.0, zeta = 0.0, Omega = 0.0;
};

std::string resonator_cmd(const ResonatorArgs& a) {
    const auto d = resonator_design(a.omega, a.k, a.ma, a.zeta, a.Omega);
    json j = {{"omega", d.omega},
              {"k", d.k},
              {"tau", d.tau},
              {"gains",
               {{"position", d.gains.position},
                {"velocity", d.gains.velocity},
                {"delayed_velocity", d.gains.delayed_velocity}}}};
    j["delta"] = json::parse(serialize_model(d.delta));
    j["multiplicity"] = multiplicity_at(d.delta, d.tau, cplx(0.0, d.omega), root_options(a.c));
    return dump(j);
}

// --- export ----------------------------------------------------------------

struct ExportArgs {
    Common c;
    std::string what;
    int steps = 41;
    std::vector<double> box{-6.0, 2.0, -40.0, 40.0};
    std::vector<double> range;
    SweepArgs sweep;
    NuArgs nu;
};

Quasipolynomial scalar_family(double alpha) {
    return Quasipolynomial::commensurate({RealPolynomial{alpha, 1.0}, RealPolynomial{-alpha}}, 1.0);
}

Quasipolynomial pendulum_family(double alpha) {
    const double a2 = alpha * alpha;
    return Quasipolynomial::commensurate({RealPolynomial{-a2, 0.0, 1.0}, RealPolynomial{2 * a2}, RealPolynomial{-a2}},
                                         1.0);
}

std::string root_map(const ExportArgs& a, Quasipolynomial (*family)(double), double lo, double hi) {
    if (a.steps < 1) throw ValidationError("steps must be positive");
    if (a.range.size() == 2) {
        lo = a.range[0];
        hi = a.range[1];
    }
    const auto box = ComplexBox::make(a.box[0], a.box[1], a.box[2], a.box[3]);
    const auto opts = root_options(a.c);
    std::string s = "alpha,re,im,multiplicity\n";
    for (int k = 0; k < a.steps; ++k) {
        const double alpha = a.steps == 1 ? lo : lo + (hi - lo) * k / (a.steps - 1);
        for (const auto& r : roots_in_box(family(alpha), 1.0, box, opts))
            s += num(alpha) + "," + num(r.center.real()) + "," + num(r.center.imag()) + "," +
                 std::to_string(r.multiplicity) + "\n";
    }
    return s;
}

std::string export_cmd(ExportArgs& a) {
    if (a.box.size() != 4) throw ValidationError("--box takes re_min re_max im_min im_max");
    if (!a.range.empty() && a.range.size() != 2) throw ValidationError("--range takes two values");
    if (a.what == "scalar-roots") return root_map(a, scalar_family, -2.0, 0.0);
    if (a.what == "pendulum-roots") return root_map(a, pendulum_family, 0.0, 2.0);
    if (a.c.model.empty()) throw ValidationError("--model is required for " + a.what);
    const auto qp = load(a.c);
    if (a.what == "fsc") {
        a.sweep.c = a.c;
        return fsc_csv(run_sweep(a.sweep, qp));
    }
    a.nu.c = a.c;
    return nu_csv(run_nu(a.nu, qp));
}

}  // namespace

unsigned resolve_threads(unsigned requested) {
    unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("TDS_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && cap > 0) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    }
    return n;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Spectral analysis of retarded time-delay systems", "tds"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "tds 0.1.0");

    RootsArgs roots;
    auto* s_roots = app.add_subcommand("roots", "characteristic roots inside a box");
    add_model_flags(s_roots, roots.c);
    add_numeric_flags(s_roots, roots.c);
    add_output_flags(s_roots, roots.c, true);
    s_roots->add_option("--box", roots.box, "re_min re_max im_min im_max")->expected(4)->required();

    Common crossing;
    auto* s_cross = app.add_subcommand("crossing", "crossing frequencies and directions (single delay)");
    add_model_flags(s_cross, crossing);
    add_numeric_flags(s_cross, crossing);
    add_output_flags(s_cross, crossing, true);

    SweepArgs fsc;
    fsc.c.format = "csv";
    auto* s_fsc = app.add_subcommand("fsc", "frequency-sweeping curves");
    add_model_flags(s_fsc, fsc.c);
    add_numeric_flags(s_fsc, fsc.c);
    add_output_flags(s_fsc, fsc.c, true);
    s_fsc->add_option("--omega-min", fsc.omega_min)->capture_default_str();
    s_fsc->add_option("--omega-max", fsc.omega_max)->required();
    s_fsc->add_option("--resolution", fsc.resolution, "initial grid points")->capture_default_str();
    s_fsc->add_option("--band", fsc.band, "refine where ||z| - 1| is below this")->capture_default_str();

    NuArgs nu;
    auto* s_nu = app.add_subcommand("nu", "unstable-root count as a function of the delay");
    add_model_flags(s_nu, nu.c);
    add_numeric_flags(s_nu, nu.c);
    add_output_flags(s_nu, nu.c, true);
    s_nu->add_option("--tau-max", nu.tau_max)->required();
    s_nu->add_option("--resolution", nu.resolution, "initial frequency grid points")->capture_default_str();
    s_nu->add_flag("--no-validate", nu.no_validate, "skip the direct-count check at interval midpoints");

    PuiseuxArgs pu;
    auto* s_pu = app.add_subcommand("puiseux", "Newton diagram and Puiseux branches at a multiple root");
    add_model_flags(s_pu, pu.c);
    add_numeric_flags(s_pu, pu.c);
    add_output_flags(s_pu, pu.c, false);
    s_pu->add_option("--lambda0", pu.lambda0, "root: re im")->expected(2)->required();
    s_pu->add_option("--tau0", pu.tau0, "critical delay")->required();
    s_pu->add_option("--tau2", pu.tau2, "value of the second delay (two-delay models)");
    s_pu->add_option("--x1-param", pu.x1_param, "delay parameter expanded in (two-delay models)")
        ->capture_default_str();
    s_pu->add_option("--series-terms", pu.series_terms)->capture_default_str();

    MidArgs mid;
    auto* s_mid = app.add_subcommand("mid", "maximal-multiplicity coefficient assignment");
    add_numeric_flags(s_mid, mid.c);
    add_output_flags(s_mid, mid.c, false);
    s_mid->add_option("--n", mid.n)->required();
    s_mid->add_option("--m", mid.m)->required();
    s_mid->add_option("--lambda0", mid.lambda0)->required();
    s_mid->add_option("--tau", mid.tau)->required();
    s_mid->add_option("--method", mid.method)->check(CLI::IsMember({"scan", "sufficient"}))->capture_default_str();
    s_mid->add_flag("--no-certify", mid.no_certify);

    PendulumArgs pend;
    auto* s_pend = app.add_subcommand("pendulum", "delayed PD design for the inverted pendulum");
    add_numeric_flags(s_pend, pend.c);
    add_output_flags(s_pend, pend.c, false);
    s_pend->add_option("--a0", pend.a0)->required();
    s_pend->add_option("--tau", pend.tau)->required();
    s_pend->add_option("--method", pend.method)->check(CLI::IsMember({"scan", "sufficient"}))->capture_default_str();
    s_pend->add_flag("--no-certify", pend.no_certify);

    ResonatorArgs res;
    auto* s_res = app.add_subcommand("resonator", "delayed resonator absorber tuning");
    add_numeric_flags(s_res, res.c);
    add_output_flags(s_res, res.c, false);
    s_res->add_option("--omega", res.omega)->required();
    s_res->add_option("--k", res.k)->required();
    s_res->add_option("--ma", res.ma)->required();
    s_res->add_option("--zeta", res.zeta)->required();
    s_res->add_option("--Omega", res.Omega)->required();

    ExportArgs ex;
    auto* s_ex = app.add_subcommand("export", "plot data as CSV");
    s_ex->add_option("what", ex.what, "scalar-roots | pendulum-roots | fsc | nu")
        ->required()
        ->check(CLI::IsMember({"scalar-roots", "pendulum-roots", "fsc", "nu"}));
    s_ex->add_option("--model", ex.c.model)->check(CLI::ExistingFile);
    add_numeric_flags(s_ex, ex.c);
    s_ex->add_option("--output,-o", ex.c.output);
    s_ex->add_option("--steps", ex.steps, "parameter values in the sweep")->capture_default_str();
    s_ex->add_option("--range", ex.range, "sweep parameter range lo hi")->expected(2);
    s_ex->add_option("--box", ex.box, "root box re_min re_max im_min im_max")->expected(4);
    s_ex->add_option("--omega-max", ex.sweep.omega_max);
    s_ex->add_option("--resolution", ex.sweep.resolution)->capture_default_str();
    s_ex->add_option("--tau-max", ex.nu.tau_max);

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kOk : kValidation;
    }

    try {
        std::string text;
        const Common* common = nullptr;
        if (s_roots->parsed()) {
            text = roots_cmd(roots);
            common = &roots.c;
        } else if (s_cross->parsed()) {
            text = crossing_cmd(crossing);
            common = &crossing;
        } else if (s_fsc->parsed()) {
            text = fsc_cmd(fsc);
            common = &fsc.c;
        } else if (s_nu->parsed()) {
            text = nu_cmd(nu);
            common = &nu.c;
        } else if (s_pu->parsed()) {
            text = puiseux_cmd(pu);
            common = &pu.c;
        } else if (s_mid->parsed()) {
            text = mid_cmd(mid);
            common = &mid.c;
        } else if (s_pend->parsed()) {
            text = pendulum_cmd(pend);
            common = &pend.c;
        } else if (s_res->parsed()) {
            text = resonator_cmd(res);
            common = &res.c;
        } else {
            text = export_cmd(ex);
            common = &ex.c;
        }
        emit(*common, out, text);
        return kOk;
    } catch (const ValidationError& e) {
        err << "validation error: " << e.what() << "\n";
        return kValidation;
    } catch (const NotSupported& e) {
        err << "not supported: " << e.what() << "\n";
        return kValidation;
    } catch (const NumericError& e) {
        err << "numeric error: " << e.what() << "\n";
        return kNumeric;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFailure;
    }
}

}  // namespace tds::cli
