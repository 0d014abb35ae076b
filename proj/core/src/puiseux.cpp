#include "tds/puiseux.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "tds/errors.hpp"

namespace tds {

namespace {

// D_{i,l} / (i! l!) at the evaluator origin, cached.
class LocalTaylor {
public:
    explicit LocalTaylor(const PointEvaluator& ev) : ev_(ev) {}

    cplx operator()(int i, int l) {
        const auto key = std::make_pair(i, l);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
        const cplx v = ev_.derivative(i, l) / (factorial(i) * factorial(l));
        cache_.emplace(key, v);
        return v;
    }

private:
    const PointEvaluator& ev_;
    std::map<std::pair<int, int>, cplx> cache_;
};

// Coefficient of t^order in Delta(lambda* + u(t), tau* + t^q); u[k] multiplies t^k.
// Terms with lambda-order below kappa vanish identically and are skipped.
cplx series_coefficient(LocalTaylor& taylor, const std::vector<cplx>& u, int p, int q, int order, int kappa) {
    std::vector<cplx> uu(static_cast<size_t>(order) + 1, 0.0);
    for (size_t k = 1; k < uu.size() && k < u.size(); ++k) uu[k] = u[k];
    std::vector<cplx> pw(static_cast<size_t>(order) + 1, 0.0);
    pw[0] = 1.0;
    cplx total = 0.0;
    for (int i = 0; i * p <= order; ++i) {
        if (i > 0) {
            std::vector<cplx> next(pw.size(), 0.0);
            for (size_t a = 0; a < pw.size(); ++a) {
                if (pw[a] == 0.0) continue;
                for (size_t b = 1; a + b < pw.size(); ++b) next[a + b] += pw[a] * uu[b];
            }
            pw = std::move(next);
        }
        if (i < kappa) continue;
        for (int l = 0; i * p + l * q <= order; ++l) {
            const cplx c = pw[static_cast<size_t>(order - l * q)];
            if (c != 0.0) total += taylor(i, l) * c;
        }
    }
    return total;
}

// Extends series (coefficients of t^p, t^{p+1}, ...) to `terms` entries.
// Stops early when the linear coefficient vanishes (repeated leading root).
void refine_series(LocalTaylor& taylor, std::vector<cplx>& series, int p, int q, int n0, int kappa, int terms) {
    std::vector<cplx> u(static_cast<size_t>(p) + 1, 0.0);
    for (size_t k = 0; k < series.size(); ++k) {
        if (u.size() <= static_cast<size_t>(p) + k) u.resize(static_cast<size_t>(p) + k + 1, 0.0);
        u[static_cast<size_t>(p) + k] = series[k];
    }
    for (int s = static_cast<int>(series.size()); s < terms; ++s) {
        u.resize(static_cast<size_t>(p + s) + 1, 0.0);
        const int order = n0 + s;
        u[static_cast<size_t>(p + s)] = 0.0;
        const cplx a = series_coefficient(taylor, u, p, q, order, kappa);
        u[static_cast<size_t>(p + s)] = 1.0;
        const cplx b = series_coefficient(taylor, u, p, q, order, kappa) - a;
        if (std::abs(b) <= 1e-13 * std::max(std::abs(a), 1e-300) || b == 0.0) return;
        const cplx c = -a / b;
        u[static_cast<size_t>(p + s)] = c;
        series.push_back(c);
    }
}

Direction direction_of(double re, double mag, double tol) {
    if (std::abs(re) <= tol * mag) return Direction::Tangential;
    return re > 0.0 ? Direction::EntersCPlus : Direction::EntersCMinus;
}

// Sign of Re sum_k c_k (rot^(p+k)) s^{(p+k)/q} for small s > 0.
Direction decide(const std::vector<cplx>& series, int p, int q, bool backward, const DirectionOptions& opts,
                 int& decided_at) {
    double scale = 0.0;
    for (const auto& c : series) scale = std::max(scale, std::abs(c));
    for (size_t k = 0; k < series.size(); ++k) {
        cplx c = series[k];
        if (std::abs(c) <= opts.zero_tol * scale) continue;
        if (backward) c *= std::polar(1.0, std::numbers::pi * static_cast<double>(p + static_cast<int>(k)) / q);
        const Direction d = direction_of(c.real(), std::abs(c), opts.tangential_tol);
        if (d != Direction::Tangential) {
            decided_at = static_cast<int>(k);
            return d;
        }
    }
    decided_at = static_cast<int>(series.size());
    return Direction::Tangential;
}

void check_root(const PointEvaluator& ev, int m, double tol) {
    if (m < 1) throw ValidationError("multiplicity must be at least 1");
    if (m > ev.cap()) throw CapExceeded("multiplicity above the derivative cap");
    for (int i = 0; i < m; ++i)
        if (std::abs(ev.derivative(i, 0)) > tol * std::max(ev.magnitude(i, 0), 1e-300)) {
            if (i == 0) throw NotARoot("the evaluator origin is not a root");
            throw ValidationError("root multiplicity is " + std::to_string(i) + ", not " + std::to_string(m));
        }
    if (std::abs(ev.derivative(m, 0)) <= tol * ev.magnitude(m, 0))
        throw ValidationError("root multiplicity exceeds " + std::to_string(m));
}

struct Scan {
    std::optional<int> order;
    bool ambiguous = false;
};

// First order n in 1..cap with |d(n)| above zero_tol times the running max of
// the magnitudes.
template <class D, class M>
Scan scan_first_nonzero(int cap, double zero_tol, D&& deriv, M&& mag, int first = 1) {
    Scan out;
    double run = 0.0;
    for (int n = first; n <= cap; ++n) {
        run = std::max(run, mag(n));
        const double v = std::abs(deriv(n));
        const double thr = zero_tol * run;
        if (v > thr && v > 0.0) {
            out.order = n;
            if (v < 10.0 * thr) out.ambiguous = true;
            return out;
        }
        if (v > 0.1 * thr && v > 0.0) out.ambiguous = true;
    }
    return out;
}

int default_cap(const PointEvaluator& ev, const PartialIndexOptions& opts) {
    return opts.cap_n.value_or(polya_szego_degree(ev.quasipolynomial()) + 2);
}

}  // namespace

PartialIndexTable partial_indices(const PointEvaluator& ev, int m, const PartialIndexOptions& opts) {
    if (ev.parameter_count() < 1) throw ValidationError("model has no delay parameter");
    check_root(ev, m, opts.multiplicity_tol);
    PartialIndexTable t;
    t.m = m;
    t.cap_n = default_cap(ev, opts);
    if (m - 1 + t.cap_n > ev.cap()) throw CapExceeded("partial index scan exceeds the derivative cap");
    bool prefix = true;
    for (int i = 0; i < m; ++i) {
        const Scan s = scan_first_nonzero(
            t.cap_n, opts.zero_tol, [&](int n) { return ev.derivative(i, n); },
            [&](int n) { return ev.magnitude(i, n); });
        t.n.push_back(s.order);
        t.ambiguous = t.ambiguous || s.ambiguous;
        if (prefix && !s.order) ++t.kappa;
        else prefix = false;
    }
    return t;
}

NewtonDiagram newton_diagram(const PartialIndexTable& table, int m) {
    if (static_cast<int>(table.n.size()) != m) throw DimensionMismatch("index table size differs from m");
    NewtonDiagram d;
    d.m = m;
    d.kappa = table.kappa;
    for (int i = table.kappa; i < m; ++i)
        if (table.n[static_cast<size_t>(i)]) d.points.push_back({i, *table.n[static_cast<size_t>(i)]});
    d.points.push_back({m, 0});
    return d;
}

std::vector<Segment> polygon_segments(const std::vector<DiagramPoint>& points, int kappa) {
    if (points.empty()) throw ValidationError("empty Newton diagram");
    const DiagramPoint last = *std::max_element(points.begin(), points.end());
    if (last.l != 0) throw ValidationError("Newton diagram must end at (m, 0)");
    std::vector<Segment> out;
    auto start = std::find_if(points.begin(), points.end(), [&](const DiagramPoint& p) { return p.i == kappa; });
    if (start == points.end()) {
        if (kappa == last.i) return out;
        throw ValidationError("Newton diagram has no point at i = kappa");
    }
    DiagramPoint prev = *start;
    while (prev.i < last.i) {
        std::optional<Rational> best;
        for (const auto& p : points) {
            if (p.i <= prev.i) continue;
            const Rational e(prev.l - p.l, p.i - prev.i);
            if (!best || e > *best) best = e;
        }
        Segment seg;
        seg.beta = *best;
        seg.start = prev;
        seg.points.push_back(prev);
        DiagramPoint end = prev;
        for (const auto& p : points) {
            if (p.i <= prev.i) continue;
            if (Rational(prev.l - p.l, p.i - prev.i) == *best) {
                seg.points.push_back(p);
                if (p.i > end.i) end = p;
            }
        }
        std::sort(seg.points.begin(), seg.points.end());
        seg.end = end;
        seg.multiplicity = end.i - prev.i;
        out.push_back(seg);
        prev = end;
    }
    return out;
}

WeierstrassLeading weierstrass_leading(const PointEvaluator& ev, const PartialIndexTable& table, int m) {
    WeierstrassLeading out;
    const cplx dm = ev.derivative(m, 0);
    std::optional<int> last;
    for (int i = 0; i < m; ++i) {
        WeierstrassTerm w;
        w.index = i;
        w.order = table.n[static_cast<size_t>(i)];
        if (w.order) {
            w.coeff = factorial(m) / (factorial(i) * factorial(*w.order) * dm) * ev.derivative(i, *w.order);
            if (last && !(*w.order < *last)) out.valid = false;
            last = w.order;
        }
        out.terms.push_back(w);
    }
    return out;
}

std::vector<BranchPolynomial> branch_polynomials(const std::vector<Segment>& segments, const PointEvaluator& ev,
                                                 int m) {
    const cplx dm = ev.derivative(m, 0);
    std::vector<BranchPolynomial> out;
    for (const auto& seg : segments) {
        BranchPolynomial bp;
        bp.coeffs.assign(static_cast<size_t>(seg.multiplicity) + 1, 0.0);
        double scale = 0.0;
        for (const auto& p : seg.points) {
            const cplx a = factorial(m) / (factorial(p.i) * factorial(p.l) * dm) * ev.derivative(p.i, p.l);
            bp.coeffs[static_cast<size_t>(p.i - seg.start.i)] = a;
            scale = std::max(scale, std::abs(a));
        }
        bp.degenerate = std::abs(bp.coeffs.back()) <= 1e-12 * scale || std::abs(bp.coeffs.front()) <= 1e-12 * scale;
        out.push_back(std::move(bp));
    }
    return out;
}

std::vector<PuiseuxBranch> expand_branches(const std::vector<Segment>& segments,
                                           const std::vector<BranchPolynomial>& polys, const PointEvaluator& ev,
                                           int kappa, const ExpansionOptions& opts) {
    if (segments.size() != polys.size()) throw DimensionMismatch("one branch polynomial per segment expected");
    LocalTaylor taylor(ev);
    std::vector<PuiseuxBranch> out;
    for (size_t h = 0; h < segments.size(); ++h) {
        const Segment& seg = segments[h];
        const auto& c = polys[h].coeffs;
        if (seg.beta <= Rational(0)) throw NotSupported("non-positive Newton polygon slope");
        const int p = static_cast<int>(seg.beta.num()), q = static_cast<int>(seg.beta.den());
        std::vector<cplx> roots;
        int nonzero = 0;
        for (const auto& a : c) nonzero += a != 0.0;
        if (p == 1 && q == seg.multiplicity && nonzero == 2) {
            // Single pair a_lo + a_hi z^q: modulus times the q-th roots of unity.
            const cplx ratio = -c.front() / c.back();
            const double mod = std::pow(std::abs(ratio), 1.0 / q);
            for (int s = 0; s < q; ++s)
                roots.push_back(std::polar(mod, (std::arg(ratio) + 2.0 * std::numbers::pi * s) / q));
        } else {
            roots = polynomial_roots(std::span<const cplx>(c));
        }
        double rscale = 0.0;
        for (const auto& r : roots) rscale = std::max(rscale, std::abs(r));
        const int n0 = seg.start.i * p + seg.start.l * q;
        std::vector<PuiseuxBranch> seg_branches;
        for (size_t k = 0; k < roots.size(); ++k) {
            PuiseuxBranch b;
            b.base = ev.lambda0();
            b.exponent = seg.beta;
            b.leading_coeff = roots[k];
            b.segment = static_cast<int>(h);
            b.conjugacy_size = q;
            b.equation_order = n0;
            for (size_t o = 0; o < roots.size(); ++o)
                if (o != k && std::abs(roots[o] - roots[k]) <= opts.cluster_tol * std::max(1.0, rscale))
                    b.repeated = true;
            b.series.push_back(roots[k]);
            if (!b.repeated && opts.series_terms > 1)
                refine_series(taylor, b.series, p, q, n0, kappa, opts.series_terms);
            int at = 0;
            b.direction = decide({b.leading_coeff}, p, q, false, {.tangential_tol = opts.tangential_tol}, at);
            seg_branches.push_back(std::move(b));
        }
        std::sort(seg_branches.begin(), seg_branches.end(), [](const PuiseuxBranch& a, const PuiseuxBranch& b) {
            if (a.leading_coeff.real() != b.leading_coeff.real()) return a.leading_coeff.real() < b.leading_coeff.real();
            return a.leading_coeff.imag() < b.leading_coeff.imag();
        });
        for (auto& b : seg_branches) out.push_back(std::move(b));
    }
    return out;
}

SplittingClass classify_splitting(const std::vector<Segment>& segments) {
    bool all_regular = true, non_regular = false;
    for (const auto& s : segments) {
        const Rational mb = Rational(s.multiplicity) * s.beta;
        if (mb == Rational(1)) continue;
        all_regular = false;
        if (s.multiplicity > 1 && mb > Rational(1)) non_regular = true;
    }
    if (all_regular) return SplittingClass::CRS;
    if (non_regular) return SplittingClass::NRS;
    return SplittingClass::RS;
}

DirectionReport crossing_direction_multiple(const std::vector<PuiseuxBranch>& branches, const PointEvaluator& ev,
                                            int kappa, const DirectionOptions& opts) {
    DirectionReport rep;
    rep.branches = branches;
    LocalTaylor taylor(ev);
    int forward_plus = 0, backward_plus = 0;
    for (auto& b : rep.branches) {
        const int p = static_cast<int>(b.exponent.num()), q = static_cast<int>(b.exponent.den());
        BranchDirection d;
        int at = 0;
        d.forward = decide(b.series, p, q, false, opts, at);
        int at_b = 0;
        d.backward = decide(b.series, p, q, true, opts, at_b);
        if ((d.forward == Direction::Tangential || d.backward == Direction::Tangential) && !b.repeated) {
            refine_series(taylor, b.series, p, q, b.equation_order, kappa, opts.max_terms);
            d.forward = decide(b.series, p, q, false, opts, at);
            d.backward = decide(b.series, p, q, true, opts, at_b);
        }
        d.decided_at = at;
        b.direction = d.forward;
        if (d.forward == Direction::Tangential || d.backward == Direction::Tangential)
            throw UndecidedDirection("branch with leading coefficient (" + std::to_string(b.leading_coeff.real()) +
                                     ", " + std::to_string(b.leading_coeff.imag()) +
                                     ") stays tangential through " + std::to_string(b.series.size()) + " terms");
        forward_plus += d.forward == Direction::EntersCPlus;
        backward_plus += d.backward == Direction::EntersCPlus;
        rep.directions.push_back(d);
    }
    rep.delta_nu = forward_plus - backward_plus;
    if (!rep.branches.empty() && std::abs(rep.branches.front().base.imag()) > 0.0) rep.delta_nu *= 2;
    return rep;
}

PuiseuxAnalysis analyze_multiple_root(const PointEvaluator& ev, int m, const PartialIndexOptions& idx,
                                      const ExpansionOptions& exp) {
    PuiseuxAnalysis a;
    a.table = partial_indices(ev, m, idx);
    a.diagram = newton_diagram(a.table, m);
    a.diagram.segments = polygon_segments(a.diagram.points, a.table.kappa);
    a.weierstrass = weierstrass_leading(ev, a.table, m);
    a.polynomials = branch_polynomials(a.diagram.segments, ev, m);
    a.branches = expand_branches(a.diagram.segments, a.polynomials, ev, a.table.kappa, exp);
    a.splitting = classify_splitting(a.diagram.segments);
    return a;
}

PartialIndexTable2D partial_indices_2d(const PointEvaluator& ev, int m, int x1_param,
                                       const PartialIndexOptions& opts) {
    if (ev.parameter_count() != 2) throw ValidationError("two-delay analysis needs exactly two delay parameters");
    if (x1_param != 0 && x1_param != 1) throw ValidationError("x1 parameter index must be 0 or 1");
    check_root(ev, m, opts.multiplicity_tol);
    const int x2_param = 1 - x1_param;
    const int cap = default_cap(ev, opts);
    if (m - 1 + 2 * cap > ev.cap()) throw CapExceeded("partial index scan exceeds the derivative cap");
    auto orders = [&](int a, int b) {
        std::vector<int> o(2, 0);
        o[static_cast<size_t>(x1_param)] = a;
        o[static_cast<size_t>(x2_param)] = b;
        return o;
    };
    PartialIndexTable2D t;
    t.m = m;
    t.x1_param = x1_param;
    bool prefix = true;
    for (int i = 0; i < m; ++i) {
        PartialIndex2D e;
        const Scan s1 = scan_first_nonzero(
            cap, opts.zero_tol, [&](int n) { auto o = orders(n, 0); return ev.derivative(i, o); },
            [&](int n) { auto o = orders(n, 0); return ev.magnitude(i, o); });
        const Scan s2 = scan_first_nonzero(
            cap, opts.zero_tol, [&](int n) { auto o = orders(0, n); return ev.derivative(i, o); },
            [&](int n) { auto o = orders(0, n); return ev.magnitude(i, o); });
        e.n1 = s1.order;
        e.n2 = s2.order;
        t.ambiguous = t.ambiguous || s1.ambiguous || s2.ambiguous;
        if (e.n2) {
            e.rho = 0;
        } else if (e.n1) {
            e.rho = *e.n1;
        } else {
            // Mixed orders: smallest x1-order a >= 1 with some nonzero
            // d^{i+a+b}/dz^i dx1^a dx2^b, b = 1..cap.
            for (int a = 1; a <= cap && !e.n_mixed; ++a) {
                const Scan sb = scan_first_nonzero(
                    cap, opts.zero_tol, [&](int b) { auto o = orders(a, b); return ev.derivative(i, o); },
                    [&](int b) { auto o = orders(a, b); return ev.magnitude(i, o); });
                t.ambiguous = t.ambiguous || sb.ambiguous;
                if (sb.order) {
                    e.n_mixed = a;
                    e.eta = *sb.order;
                }
            }
            if (e.n_mixed) e.rho = *e.n_mixed;
            else e.finite = false;
        }
        if (prefix && !e.finite) ++t.kappa;
        else prefix = false;
        t.n.push_back(e);
    }
    return t;
}

TwoDelayExpansion two_delay_expansion(const PointEvaluator& ev, int m, int x1_param, double x2_offset,
                                      const PartialIndexOptions& opts) {
    TwoDelayExpansion out;
    out.table = partial_indices_2d(ev, m, x1_param, opts);
    const int x2_param = 1 - x1_param;
    auto orders = [&](int a, int b) {
        std::vector<int> o(2, 0);
        o[static_cast<size_t>(x1_param)] = a;
        o[static_cast<size_t>(x2_param)] = b;
        return o;
    };
    const cplx fm = ev.derivative(m, 0);
    std::map<int, cplx> coeff_at;  // w_i leading coefficient at x2_offset
    for (int i = out.table.kappa; i < m; ++i) {
        const auto& e = out.table.n[static_cast<size_t>(i)];
        if (!e.finite) continue;
        TwoDelayTerm w;
        w.index = i;
        w.rho = e.rho;
        int a = 0, b = 0;
        if (e.n2) {
            b = *e.n2;
        } else if (e.n1) {
            a = *e.n1;
        } else {
            a = *e.n_mixed;
            b = e.eta;
        }
        w.eta = b;
        const auto o = orders(a, b);
        w.coeff = factorial(m) / (factorial(i) * fm) * ev.derivative(i, o) / (factorial(a) * factorial(b));
        out.leading.push_back(w);
        out.points.push_back({i, w.rho});
        coeff_at[i] = w.coeff * std::pow(x2_offset, static_cast<double>(b));
    }
    out.points.push_back({m, 0});
    coeff_at[m] = 1.0;
    out.segments = polygon_segments(out.points, out.table.kappa);
    for (size_t h = 0; h < out.segments.size(); ++h) {
        const Segment& seg = out.segments[h];
        if (seg.beta < Rational(0)) throw NotSupported("negative Newton polygon slope in the two-delay diagram");
        std::vector<cplx> poly(static_cast<size_t>(seg.multiplicity) + 1, 0.0);
        for (const auto& p : seg.points) poly[static_cast<size_t>(p.i - seg.start.i)] = coeff_at[p.i];
        std::vector<cplx> roots;
        if (poly.front() == 0.0) {
            roots.assign(static_cast<size_t>(seg.multiplicity), 0.0);
        } else {
            roots = polynomial_roots(std::span<const cplx>(poly));
        }
        std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) {
            if (a.real() != b.real()) return a.real() < b.real();
            return a.imag() < b.imag();
        });
        for (const auto& r : roots) out.branches.push_back({seg.beta, r, static_cast<int>(h)});
    }
    return out;
}

const char* to_string(Direction d) {
    switch (d) {
        case Direction::EntersCPlus: return "enters-c-plus";
        case Direction::EntersCMinus: return "enters-c-minus";
        default: return "tangential";
    }
}

const char* to_string(SplittingClass s) {
    switch (s) {
        case SplittingClass::CRS: return "CRS";
        case SplittingClass::RS: return "RS";
        default: return "NRS";
    }
}

}  // namespace tds
