#include "tds/rootfinder.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <limits>
#include <mutex>
#include <numbers>
#include <random>
#include <string>
#include <thread>

#include "tds/errors.hpp"

namespace tds {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kPi = std::numbers::pi;

std::string fmt_point(cplx z) {
    return "(" + std::to_string(z.real()) + ", " + std::to_string(z.imag()) + ")";
}

struct Sample {
    double t;
    cplx f;
    double logd;  // |f'/f|
};

// Argument change of f along the segment a -> b. Intervals are bisected until
// every phase increment is below pi/2 and the step times |f'/f| is below 1
// at both ends, which rules out a full turn hiding between two samples.
double edge_phase(const AnalyticFunction& fn, cplx a, cplx b, const RootFinderOptions& o, double strictness,
                  long& budget) {
    const double len = std::abs(b - a);
    int n0 = std::max(o.initial_samples, 8);
    const double osc = std::ceil(len * fn.max_delay * 4.0 / kPi);
    if (osc > n0) n0 = static_cast<int>(std::min<double>(osc, o.max_edge_samples / 4));

    auto sample = [&](double t) {
        const cplx z = a + t * (b - a);
        const cplx f = fn.value(z);
        const double mag = fn.magnitude(z, 0);
        if (!(std::abs(f) > o.boundary_tol * mag)) throw BoundaryRoot("root on box edge near " + fmt_point(z), z);
        const cplx df = fn.derivative(z, 1);
        if (--budget < 0) throw NumericError("edge sampling budget exhausted near " + fmt_point(z));
        return Sample{t, f, std::abs(df / f)};
    };
    auto ok = [&](const Sample& l, const Sample& r) {
        const double dphi = std::abs(std::arg(r.f * std::conj(l.f)));
        const double h = (r.t - l.t) * len;
        return dphi < 0.5 * kPi * strictness && h * std::max(l.logd, r.logd) < strictness;
    };

    double total = 0.0;
    Sample cur = sample(0.0);
    std::vector<Sample> pending;
    for (int i = 1; i <= n0; ++i) {
        pending.push_back(sample(static_cast<double>(i) / n0));
        while (!pending.empty()) {
            const Sample nxt = pending.back();
            if (ok(cur, nxt)) {
                total += std::arg(nxt.f * std::conj(cur.f));
                cur = nxt;
                pending.pop_back();
                continue;
            }
            const double tm = 0.5 * (cur.t + nxt.t);
            if ((nxt.t - cur.t) * len <= 1e-14 * std::max(1.0, std::abs(a) + len))
                throw BoundaryRoot("unresolvable phase change near " + fmt_point(a + tm * (b - a)), a + tm * (b - a));
            pending.push_back(sample(tm));
        }
    }
    return total;
}

double total_phase(const AnalyticFunction& fn, const ComplexBox& b, const RootFinderOptions& o, double strictness) {
    const cplx c0(b.re_min, b.im_min), c1(b.re_max, b.im_min), c2(b.re_max, b.im_max), c3(b.re_min, b.im_max);
    long budget = 4L * o.max_edge_samples;
    return edge_phase(fn, c0, c1, o, strictness, budget) + edge_phase(fn, c1, c2, o, strictness, budget) +
           edge_phase(fn, c2, c3, o, strictness, budget) + edge_phase(fn, c3, c0, o, strictness, budget);
}

cplx derivative_or_value(const AnalyticFunction& fn, cplx z, int order) {
    return order == 0 ? fn.value(z) : fn.derivative(z, order);
}

bool is_root_of_order(const AnalyticFunction& fn, cplx z, int k, const RootFinderOptions& o) {
    if (!(std::abs(fn.value(z)) <= o.residual_tol * fn.magnitude(z, 0))) return false;
    for (int j = 1; j < k; ++j)
        if (!(std::abs(fn.derivative(z, j)) <= o.multiplicity_tol * fn.magnitude(z, j))) return false;
    return true;
}

struct WorkItem {
    ComplexBox box;
    int count = 0;
    int depth = 0;
};

// Smallest relative |f| along a candidate split line; lines through or near
// roots score low.
double line_quality(const AnalyticFunction& fn, cplx a, cplx b) {
    double q = std::numeric_limits<double>::infinity();
    constexpr int n = 33;
    for (int i = 1; i < n; ++i) {
        const cplx z = a + (static_cast<double>(i) / n) * (b - a);
        const double mag = fn.magnitude(z, 0);
        q = std::min(q, mag > 0 ? std::abs(fn.value(z)) / mag : 0.0);
    }
    return q;
}

std::vector<WorkItem> split(const AnalyticFunction& fn, const WorkItem& item, const RootFinderOptions& o) {
    static constexpr double fractions[] = {0.5, 0.42, 0.58, 0.35, 0.65, 0.28, 0.72};
    const ComplexBox& b = item.box;
    struct Candidate {
        bool vertical;
        double frac;
        double quality;
    };
    std::vector<Candidate> cands;
    const bool prefer_vertical = b.width() >= b.height();
    for (int pass = 0; pass < 2; ++pass) {
        const bool vertical = pass == 0 ? prefer_vertical : !prefer_vertical;
        std::vector<Candidate> group;
        for (double fr : fractions) {
            if (vertical) {
                const double x = b.re_min + fr * b.width();
                group.push_back({true, fr, line_quality(fn, {x, b.im_min}, {x, b.im_max})});
            } else {
                const double y = b.im_min + fr * b.height();
                group.push_back({false, fr, line_quality(fn, {b.re_min, y}, {b.re_max, y})});
            }
        }
        std::stable_sort(group.begin(), group.end(), [](const Candidate& l, const Candidate& r) {
            return l.quality > r.quality;
        });
        cands.insert(cands.end(), group.begin(), group.end());
    }
    for (const auto& c : cands) {
        ComplexBox lo = b, hi = b;
        if (c.vertical) {
            lo.re_max = hi.re_min = b.re_min + c.frac * b.width();
        } else {
            lo.im_max = hi.im_min = b.im_min + c.frac * b.height();
        }
        try {
            const int wl = winding_count(fn, lo, o);
            const int wh = winding_count(fn, hi, o);
            if (wl < 0 || wh < 0 || wl + wh != item.count) continue;
            std::vector<WorkItem> out;
            if (wl > 0) out.push_back({lo, wl, item.depth + 1});
            if (wh > 0) out.push_back({hi, wh, item.depth + 1});
            return out;
        } catch (const BoundaryRoot&) {
        } catch (const NonIntegerWinding&) {
        }
    }
    throw BudgetExhausted("no admissible split line for box with " + std::to_string(item.count) + " roots", b.re_min,
                          b.re_max, b.im_min, b.im_max);
}

struct Outcome {
    std::vector<WorkItem> children;
    bool has_cluster = false;
    RootCluster cluster;
};

Outcome process(const AnalyticFunction& fn, const WorkItem& item, const RootFinderOptions& o) {
    Outcome out;
    const ComplexBox& b = item.box;
    const double diam = b.diameter();
    const cplx c = b.center();
    // more roots than any single root's multiplicity bound: split first
    const bool single = item.count <= fn.max_multiplicity;
    const auto pr = single ? polish_root(fn, c, item.count, diam) : PolishResult{c, false};
    const bool inside = pr.converged && b.contains(pr.root);
    if (inside && is_root_of_order(fn, pr.root, item.count, o)) {
        out.has_cluster = true;
        out.cluster = {pr.root, item.count, std::abs(fn.value(pr.root)), diam};
        return out;
    }
    if (diam <= o.min_box_size * std::max(1.0, std::abs(c))) {
        const cplx z = inside ? pr.root : c;
        out.has_cluster = true;
        out.cluster = {z, item.count, std::abs(fn.value(z)), diam};
        return out;
    }
    if (item.depth >= o.max_depth)
        throw BudgetExhausted("subdivision depth cap reached", b.re_min, b.re_max, b.im_min, b.im_max);
    out.children = split(fn, item, o);
    return out;
}

std::vector<RootCluster> subdivide(const AnalyticFunction& fn, const ComplexBox& box, int count,
                                   const RootFinderOptions& o) {
    std::vector<RootCluster> result;
    if (count <= 0) return result;
    std::deque<WorkItem> queue{{box, count, 0}};
    const unsigned threads = std::max(1u, o.threads);

    if (threads == 1) {
        while (!queue.empty()) {
            const WorkItem it = queue.front();
            queue.pop_front();
            Outcome oc = process(fn, it, o);
            if (oc.has_cluster) result.push_back(oc.cluster);
            for (auto& ch : oc.children) queue.push_back(ch);
        }
    } else {
        std::mutex mu;
        std::condition_variable cv;
        int active = 0;
        std::exception_ptr error;
        auto worker = [&] {
            for (;;) {
                WorkItem it;
                {
                    std::unique_lock lk(mu);
                    cv.wait(lk, [&] { return error || !queue.empty() || active == 0; });
                    if (error || queue.empty()) {
                        cv.notify_all();
                        return;
                    }
                    it = queue.front();
                    queue.pop_front();
                    ++active;
                }
                Outcome oc;
                try {
                    oc = process(fn, it, o);
                } catch (...) {
                    std::lock_guard lk(mu);
                    if (!error) error = std::current_exception();
                    --active;
                    cv.notify_all();
                    return;
                }
                {
                    std::lock_guard lk(mu);
                    if (oc.has_cluster) result.push_back(oc.cluster);
                    for (auto& ch : oc.children) queue.push_back(ch);
                    --active;
                }
                cv.notify_all();
            }
        };
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
        if (error) std::rethrow_exception(error);
    }
    std::sort(result.begin(), result.end(), [](const RootCluster& l, const RootCluster& r) {
        if (l.center.real() != r.center.real()) return l.center.real() < r.center.real();
        return l.center.imag() < r.center.imag();
    });
    return result;
}

std::vector<double> as_vector(double tau) {
    return {tau};
}

}  // namespace

ComplexBox ComplexBox::make(double re_min, double re_max, double im_min, double im_max) {
    if (!(re_min < re_max) || !(im_min < im_max)) throw ValidationError("box must have re_min < re_max and im_min < im_max");
    return {re_min, re_max, im_min, im_max};
}

ComplexBox ComplexBox::around(cplx center, double half_width) {
    return make(center.real() - half_width, center.real() + half_width, center.imag() - half_width,
                center.imag() + half_width);
}

double ComplexBox::diameter() const {
    return std::hypot(width(), height());
}

bool ComplexBox::contains(cplx z) const {
    return z.real() > re_min && z.real() < re_max && z.imag() > im_min && z.imag() < im_max;
}

ComplexBox ComplexBox::expanded(double left, double right, double bottom, double top) const {
    return make(re_min - left, re_max + right, im_min - bottom, im_max + top);
}

AnalyticFunction make_function(const Quasipolynomial& qp, std::span<const double> tau) {
    auto q = std::make_shared<const Quasipolynomial>(qp);
    auto t = std::make_shared<const std::vector<double>>(tau.begin(), tau.end());
    q->check_delays(*t);
    AnalyticFunction f;
    f.value = [q, t](cplx z) { return evaluate(*q, z, *t); };
    f.derivative = [q, t](cplx z, int k) { return mixed_derivative(*q, z, *t, k, std::span<const int>{}); };
    f.magnitude = [q, t](cplx z, int k) { return derivative_magnitude(*q, z, *t, k, std::span<const int>{}); };
    f.max_multiplicity = std::max(1, polya_szego_degree(*q));
    for (double d : q->term_delays(*t)) f.max_delay = std::max(f.max_delay, d);
    return f;
}

AnalyticFunction make_function(const PointEvaluator& ev) {
    auto base = make_function(ev.quasipolynomial(), ev.tau0());
    const cplx l0 = ev.lambda0();
    AnalyticFunction f = base;
    f.value = [base, l0](cplx u) { return base.value(l0 + u); };
    f.derivative = [base, l0](cplx u, int k) { return base.derivative(l0 + u, k); };
    f.magnitude = [base, l0](cplx u, int k) { return base.magnitude(l0 + u, k); };
    return f;
}

int winding_count(const AnalyticFunction& f, const ComplexBox& box, const RootFinderOptions& opts) {
    double strictness = 1.0;
    for (int attempt = 0; attempt < 3; ++attempt) {
        const double turns = total_phase(f, box, opts, strictness) / (2.0 * kPi);
        const double r = std::round(turns);
        if (std::abs(turns - r) <= opts.winding_tol) return static_cast<int>(r);
        strictness *= 0.5;
    }
    throw NonIntegerWinding("argument change is not an integer number of turns");
}

int winding_count(const Quasipolynomial& qp, std::span<const double> tau, const ComplexBox& box,
                  const RootFinderOptions& opts) {
    return winding_count(make_function(qp, tau), box, opts);
}

int winding_count(const Quasipolynomial& qp, double tau, const ComplexBox& box, const RootFinderOptions& opts) {
    return winding_count(qp, as_vector(tau), box, opts);
}

int winding_count(const PointEvaluator& ev, const ComplexBox& box, const RootFinderOptions& opts) {
    return winding_count(make_function(ev), box, opts);
}

PolishResult polish_root(const AnalyticFunction& fn, cplx guess, int order, double max_step) {
    const int k = std::max(order, 1);
    cplx z = guess;
    for (int it = 0; it < 100; ++it) {
        const cplx g = derivative_or_value(fn, z, k - 1);
        if (g == 0.0) return {z, true};
        const cplx gp = fn.derivative(z, k);
        if (gp == 0.0 || !std::isfinite(std::abs(gp))) return {guess, false};
        cplx step = g / gp;
        if (!std::isfinite(std::abs(step))) return {guess, false};
        if (std::abs(step) > max_step) step *= max_step / std::abs(step);
        cplx zn = z - step;
        cplx gn = derivative_or_value(fn, zn, k - 1);
        for (int h = 0; h < 12 && std::abs(gn) > std::abs(g); ++h) {
            step *= 0.5;
            zn = z - step;
            gn = derivative_or_value(fn, zn, k - 1);
        }
        z = zn;
        if (std::abs(step) <= 4.0 * kEps * std::max(1.0, std::abs(z))) return {z, true};
        if (std::abs(gn) <= kEps * fn.magnitude(z, k - 1)) return {z, true};
    }
    return {z, false};
}

std::vector<RootCluster> roots_in_exact_box(const AnalyticFunction& f, const ComplexBox& box,
                                            const RootFinderOptions& opts) {
    const int total = winding_count(f, box, opts);
    if (total < 0) throw NumericError("negative winding number: the function has poles or is not analytic");
    return subdivide(f, box, total, opts);
}

std::vector<RootCluster> roots_in_box(const AnalyticFunction& f, const ComplexBox& box,
                                      const RootFinderOptions& opts) {
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    ComplexBox b = box;
    for (int attempt = 0;; ++attempt) {
        try {
            return roots_in_exact_box(f, b, opts);
        } catch (const BoundaryRoot&) {
            if (attempt >= opts.max_jitter) throw;
            const double d = opts.jitter_fraction * box.diameter() * (attempt + 1);
            b = box.expanded(d * u(rng), d * u(rng), d * u(rng), d * u(rng));
        }
    }
}

std::vector<RootCluster> roots_in_box(const Quasipolynomial& qp, std::span<const double> tau, const ComplexBox& box,
                                      const RootFinderOptions& opts) {
    return roots_in_box(make_function(qp, tau), box, opts);
}

std::vector<RootCluster> roots_in_box(const Quasipolynomial& qp, double tau, const ComplexBox& box,
                                      const RootFinderOptions& opts) {
    return roots_in_box(qp, as_vector(tau), box, opts);
}

int multiplicity_at(const Quasipolynomial& qp, std::span<const double> tau, cplx lambda0,
                    const RootFinderOptions& opts) {
    const auto fn = make_function(qp, tau);
    if (!(std::abs(fn.value(lambda0)) < opts.residual_tol * fn.magnitude(lambda0, 0)))
        throw NotARoot("not a root: |Delta| = " + std::to_string(std::abs(fn.value(lambda0))));
    const int cap = polya_szego_degree(qp);
    for (int k = 1;; ++k) {
        if (k > cap) throw CapExceeded("multiplicity would exceed the Polya-Szego degree");
        if (std::abs(fn.derivative(lambda0, k)) >= opts.multiplicity_tol * fn.magnitude(lambda0, k)) return k;
    }
}

int multiplicity_at(const Quasipolynomial& qp, double tau, cplx lambda0, const RootFinderOptions& opts) {
    return multiplicity_at(qp, as_vector(tau), lambda0, opts);
}

double modulus_bound(const Quasipolynomial& qp, std::span<const double> tau, double x) {
    if (qp.kind() != SystemKind::Retarded) throw ValidationError("modulus bound needs a retarded quasipolynomial");
    const RealPolynomial& p0 = qp.poly(0);
    const int n = p0.degree();
    if (n <= 0) throw ValidationError("modulus bound needs deg P_0 >= 1");
    const auto d = qp.term_delays(tau);
    std::vector<double> c(static_cast<size_t>(n), 0.0);
    for (int k = 0; k < n; ++k) c[static_cast<size_t>(k)] = std::abs(p0[k]);
    for (size_t t = 0; t < qp.terms().size(); ++t) {
        if (qp.terms()[t].index == 0) continue;
        const double w = d[t] == 0.0 ? 1.0 : std::exp(-x * d[t]);
        const auto& pc = qp.terms()[t].poly.coeffs();
        for (size_t k = 0; k < pc.size(); ++k) c[k] += std::abs(pc[k]) * w;
    }
    const double an = std::abs(p0[n]);
    auto g = [&](double r) {
        double s = 0.0;
        for (int k = n - 1; k >= 0; --k) s = s * r + c[static_cast<size_t>(k)];
        return an * std::pow(r, n) - s;
    };
    // g has a single positive root; bracket it with the Cauchy bound.
    double hi = 1.0;
    for (double ck : c) hi = std::max(hi, 1.0 + ck / an);
    if (!std::isfinite(hi)) throw NumericError("modulus bound overflow");
    double lo = 0.0;
    if (g(hi) <= 0.0) return hi;
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) > 0.0 ? hi : lo) = mid;
    }
    return hi;
}

int count_unstable(const Quasipolynomial& qp, std::span<const double> tau, const RootFinderOptions& opts,
                   const CountOptions& count) {
    const auto fn = make_function(qp, tau);
    const double r = modulus_bound(qp, tau, 0.0) * 1.01 + 1e-3;
    try {
        if (!count.exclude_origin || std::abs(fn.value(0.0)) > opts.residual_tol * fn.magnitude(0.0, 0))
            return winding_count(fn, ComplexBox::make(0.0, r, -r, r), opts);
        // Notch a square [0, rho] x [-rho, rho] out of the half-box. rho is
        // where the origin's leading Taylor term reaches 1e-8 of the scale,
        // well above the boundary test.
        int m = 1;
        while (m < 64 && std::abs(fn.derivative(0.0, m)) <= opts.multiplicity_tol * fn.magnitude(0.0, m)) ++m;
        const double lead = std::abs(fn.derivative(0.0, m)) / factorial(m);
        const double rho = std::min(1e-2 * r, std::pow(1e-8 * fn.magnitude(0.0, 0) / lead, 1.0 / m));
        return winding_count(fn, ComplexBox::make(rho, r, -r, r), opts) +
               winding_count(fn, ComplexBox::make(0.0, rho, rho, r), opts) +
               winding_count(fn, ComplexBox::make(0.0, rho, -r, -rho), opts);
    } catch (const BoundaryRoot& e) {
        throw ImaginaryAxisRoot("root on the imaginary axis near " + fmt_point(e.where), e.where);
    }
}

int count_unstable(const Quasipolynomial& qp, double tau, const RootFinderOptions& opts, const CountOptions& count) {
    return count_unstable(qp, as_vector(tau), opts, count);
}

std::vector<RootCluster> rightmost_roots(const Quasipolynomial& qp, std::span<const double> tau, int k,
                                         const RootFinderOptions& opts) {
    if (k <= 0) return {};
    if (qp.kind() != SystemKind::Retarded) throw ValidationError("rightmost roots need a retarded quasipolynomial");
    const auto fn = make_function(qp, tau);
    std::vector<RootCluster> found;
    auto by_real_desc = [](const RootCluster& l, const RootCluster& r) {
        if (l.center.real() != r.center.real()) return l.center.real() > r.center.real();
        return l.center.imag() > r.center.imag();
    };

    const double r0 = modulus_bound(qp, tau, 0.0);
    if (fn.max_delay == 0.0) {
        const double r = modulus_bound(qp, tau, -std::numeric_limits<double>::infinity()) * 1.01 + 1e-3;
        found = roots_in_box(fn, ComplexBox::make(-r, r, -r, r), opts);
    } else {
        double x_hi = r0 + 1.0;
        double width = 2.0 / fn.max_delay;
        int total = 0;
        for (int strip = 0; total < k; ++strip) {
            if (strip > 400) throw BudgetExhausted("rightmost scan did not accumulate enough roots");
            double x_lo = x_hi - width;
            std::vector<RootCluster> part;
            for (int attempt = 0;; ++attempt) {
                const double h = modulus_bound(qp, tau, x_lo) * 1.01 + 1e-3;
                if (h > 1e7) throw BudgetExhausted("modulus bound too large for the rightmost scan", x_lo, x_hi, -h, h);
                try {
                    part = roots_in_exact_box(fn, ComplexBox::make(x_lo, x_hi, -h, h), opts);
                    break;
                } catch (const BoundaryRoot&) {
                    if (attempt >= opts.max_jitter) throw;
                    x_lo -= 0.037 * width * (attempt + 1);
                }
            }
            for (const auto& c : part) total += c.multiplicity;
            found.insert(found.end(), part.begin(), part.end());
            if (part.empty()) width *= 1.5;
            x_hi = x_lo;
        }
    }
    std::sort(found.begin(), found.end(), by_real_desc);
    std::vector<RootCluster> out;
    int acc = 0;
    for (const auto& c : found) {
        if (acc >= k) break;
        out.push_back(c);
        acc += c.multiplicity;
    }
    return out;
}

std::vector<RootCluster> rightmost_roots(const Quasipolynomial& qp, double tau, int k,
                                         const RootFinderOptions& opts) {
    return rightmost_roots(qp, as_vector(tau), k, opts);
}

}  // namespace tds
