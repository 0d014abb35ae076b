#include "tds/fsc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <string>

#include "parallel.hpp"
#include "tds/errors.hpp"

namespace tds {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kFar = 1e150;  // stands in for a root lost to a leading-coefficient drop

struct ZRoots {
    std::vector<cplx> z;
    bool degree_drop = false;
};

ZRoots z_roots(const BivariatePolynomial& pa, double w) {
    auto c = pa.in_z(cplx(0.0, w));
    const int q = pa.z_degree();
    double scale = 0.0;
    for (int i = 0; i <= q; ++i) scale = std::max(scale, pa.coefficient(i).magnitude_at(w, 0));
    ZRoots out;
    int deg = q;
    while (deg > 0 && std::abs(c[static_cast<size_t>(deg)]) <= 1e-14 * scale) --deg;
    out.degree_drop = deg < q;
    c.resize(static_cast<size_t>(deg) + 1);
    if (deg > 0) out.z = polynomial_roots(std::span<const cplx>(c));
    out.z.resize(static_cast<size_t>(q), cplx(kFar, 0.0));
    return out;
}

// Minimum-cost perfect matching; returns col[row].
std::vector<int> hungarian(const std::vector<std::vector<double>>& a) {
    const int n = static_cast<int>(a.size());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(static_cast<size_t>(n) + 1, 0.0), v(static_cast<size_t>(n) + 1, 0.0);
    std::vector<int> p(static_cast<size_t>(n) + 1, 0), way(static_cast<size_t>(n) + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<size_t>(n) + 1, inf);
        std::vector<char> used(static_cast<size_t>(n) + 1, 0);
        do {
            used[static_cast<size_t>(j0)] = 1;
            const int i0 = p[static_cast<size_t>(j0)];
            int j1 = 0;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<size_t>(j)]) continue;
                const double cur = a[static_cast<size_t>(i0 - 1)][static_cast<size_t>(j - 1)] -
                                   u[static_cast<size_t>(i0)] - v[static_cast<size_t>(j)];
                if (cur < minv[static_cast<size_t>(j)]) {
                    minv[static_cast<size_t>(j)] = cur;
                    way[static_cast<size_t>(j)] = j0;
                }
                if (minv[static_cast<size_t>(j)] < delta) {
                    delta = minv[static_cast<size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<size_t>(j)]) {
                    u[static_cast<size_t>(p[static_cast<size_t>(j)])] += delta;
                    v[static_cast<size_t>(j)] -= delta;
                } else {
                    minv[static_cast<size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<size_t>(j0)];
            p[static_cast<size_t>(j0)] = p[static_cast<size_t>(j1)];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> col(static_cast<size_t>(n));
    for (int j = 1; j <= n; ++j) col[static_cast<size_t>(p[static_cast<size_t>(j)] - 1)] = j - 1;
    return col;
}

std::vector<cplx> thread_step(const std::vector<cplx>& prev, const std::vector<cplx>& next) {
    const size_t n = prev.size();
    std::vector<std::vector<double>> cost(n, std::vector<double>(n));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) cost[i][j] = std::min(std::abs(prev[i] - next[j]), 1e300);
    const auto col = hungarian(cost);
    std::vector<cplx> out(n);
    for (size_t i = 0; i < n; ++i) out[i] = next[static_cast<size_t>(col[i])];
    return out;
}

bool has_collision(const std::vector<cplx>& z, double tol) {
    for (size_t i = 0; i < z.size(); ++i)
        for (size_t j = i + 1; j < z.size(); ++j)
            if (std::abs(z[i] - z[j]) <= tol * std::max(1.0, std::abs(z[i]))) return true;
    return false;
}

double unit_gap(const std::vector<cplx>& z) {
    double g = std::numeric_limits<double>::infinity();
    for (const auto& x : z) g = std::min(g, std::abs(std::abs(x) - 1.0));
    return g;
}

double angle_delay(cplx z, double w) {
    double theta = -std::arg(z);
    if (theta < 0.0) theta += kTwoPi;
    return (theta + 0.0) / w;
}

// Loose multiplicity estimate at a nearly critical point.
int loose_multiplicity(const Quasipolynomial& qp, cplx l, const std::vector<double>& tau, int cap) {
    for (int k = 1; k <= cap; ++k)
        if (std::abs(mixed_derivative(qp, l, tau, k, 0)) > 1e-3 * derivative_magnitude(qp, l, tau, k, 0)) return k;
    return cap;
}

int strict_order(const Quasipolynomial& qp, cplx l, const std::vector<double>& tau, bool in_tau, int cap,
                 double tol) {
    for (int k = 1; k <= cap; ++k) {
        const cplx d = in_tau ? mixed_derivative(qp, l, tau, 0, k) : mixed_derivative(qp, l, tau, k, 0);
        const double m = in_tau ? derivative_magnitude(qp, l, tau, 0, k) : derivative_magnitude(qp, l, tau, k, 0);
        if (std::abs(d) > tol * m) return k;
    }
    return cap + 1;
}

struct Candidate {
    double omega;
    cplx z;
};

}  // namespace

CriticalPair polish_critical_pair(const Quasipolynomial& qp, double omega, double tau, double residual_tol) {
    const int cap = std::max(1, std::min(polya_szego_degree(qp), 12));
    const int n_est = loose_multiplicity(qp, cplx(0.0, omega), {tau}, cap);
    for (int n = n_est; n >= 1; --n) {
        double w = omega, t = tau;
        bool ok = false;
        for (int it = 0; it < 40; ++it) {
            const cplx l(0.0, w);
            const std::vector<double> tv{t};
            // Normal equations of the scaled residuals.
            double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
            for (int k = 0; k < n; ++k) {
                const double m = std::max(derivative_magnitude(qp, l, tv, k, 0), 1e-300);
                const cplx r = mixed_derivative(qp, l, tv, k, 0) / m;
                const cplx jw = cplx(0.0, 1.0) * mixed_derivative(qp, l, tv, k + 1, 0) / m;
                const cplx jt = mixed_derivative(qp, l, tv, k, 1) / m;
                a11 += std::norm(jw);
                a22 += std::norm(jt);
                a12 += (std::conj(jw) * jt).real();
                b1 -= (std::conj(jw) * r).real();
                b2 -= (std::conj(jt) * r).real();
            }
            const double det = a11 * a22 - a12 * a12;
            if (!(std::abs(det) > 1e-300)) break;
            const double dw = (b1 * a22 - b2 * a12) / det;
            const double dt = (a11 * b2 - a12 * b1) / det;
            if (!std::isfinite(dw) || !std::isfinite(dt)) break;
            w += dw;
            t += dt;
            if (std::abs(dw) <= 1e-15 * std::max(1.0, std::abs(w)) &&
                std::abs(dt) <= 1e-15 * std::max(1.0, std::abs(t))) {
                ok = true;
                break;
            }
        }
        if (!(w > 0.0) || !(t >= 0.0) || std::abs(w - omega) > 1e-2 * std::max(1.0, omega)) continue;
        const cplx l(0.0, w);
        const std::vector<double> tv{t};
        bool valid = std::abs(evaluate(qp, l, tv)) <= residual_tol * derivative_magnitude(qp, l, tv, 0, 0);
        for (int k = 1; k < n && valid; ++k)
            valid = std::abs(mixed_derivative(qp, l, tv, k, 0)) <= 1e-7 * derivative_magnitude(qp, l, tv, k, 0);
        (void)ok;
        if (valid) return {w, t, n, true};
    }
    return {omega, tau, 0, false};
}

FrequencySweep sweep(const Quasipolynomial& qp, double omega_lo, double omega_hi, int initial_resolution,
                     const SweepOptions& opts) {
    if (!qp.is_commensurate()) throw ValidationError("frequency sweeping needs commensurate delays");
    if (!(omega_lo >= 0.0) || !(omega_hi > omega_lo)) throw ValidationError("sweep range must satisfy 0 <= lo < hi");
    if (initial_resolution < 2) throw ValidationError("sweep resolution must be at least 2");
    const BivariatePolynomial pa = auxiliary_polynomial(qp);

    std::vector<double> grid(static_cast<size_t>(initial_resolution) + 1);
    for (int i = 0; i <= initial_resolution; ++i)
        grid[static_cast<size_t>(i)] = omega_lo + (omega_hi - omega_lo) * i / initial_resolution;
    if (pa.z_degree() < 1) {
        // no delayed terms: no z-roots, no curves
        FrequencySweep empty;
        empty.qp = std::make_shared<const Quasipolynomial>(qp);
        empty.omega = grid;
        empty.roots.assign(grid.size(), {});
        empty.discriminant.assign(grid.size(), false);
        return empty;
    }

    auto solve = [&](const std::vector<double>& ws) {
        std::vector<ZRoots> out(ws.size());
        detail::parallel_for(ws.size(), opts.threads, [&](size_t i) { out[i] = z_roots(pa, ws[i]); });
        return out;
    };
    std::vector<ZRoots> raw = solve(grid);

    // Two refinement passes near the unit circle and near collisions.
    double band = opts.band;
    for (int pass = 0; pass < 2; ++pass) {
        std::vector<double> extra;
        for (size_t i = 0; i + 1 < grid.size(); ++i) {
            const bool near = std::min(unit_gap(raw[i].z), unit_gap(raw[i + 1].z)) < band;
            const bool coll = raw[i].degree_drop || raw[i + 1].degree_drop ||
                              has_collision(raw[i].z, 1e-3) || has_collision(raw[i + 1].z, 1e-3);
            if (!near && !coll) continue;
            for (int k = 1; k < opts.refine_factor; ++k)
                extra.push_back(grid[i] + (grid[i + 1] - grid[i]) * k / opts.refine_factor);
        }
        if (extra.empty() || grid.size() + extra.size() > static_cast<size_t>(opts.max_points)) break;
        const auto extra_roots = solve(extra);
        std::vector<std::pair<double, ZRoots>> merged;
        merged.reserve(grid.size() + extra.size());
        for (size_t i = 0; i < grid.size(); ++i) merged.emplace_back(grid[i], std::move(raw[i]));
        for (size_t i = 0; i < extra.size(); ++i) merged.emplace_back(extra[i], extra_roots[i]);
        std::sort(merged.begin(), merged.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        grid.clear();
        raw.clear();
        for (auto& m : merged) {
            grid.push_back(m.first);
            raw.push_back(std::move(m.second));
        }
        band /= 8.0;
    }

    FrequencySweep sw;
    sw.qp = std::make_shared<const Quasipolynomial>(qp);
    sw.omega = grid;
    sw.branch_count = pa.z_degree();
    sw.roots.resize(grid.size());
    sw.discriminant.resize(grid.size());
    std::vector<cplx> first = raw[0].z;
    std::sort(first.begin(), first.end(), [](cplx a, cplx b) {
        if (std::abs(a) != std::abs(b)) return std::abs(a) < std::abs(b);
        return std::arg(a) < std::arg(b);
    });
    sw.roots[0] = first;
    for (size_t i = 0; i < grid.size(); ++i) {
        if (i > 0) sw.roots[i] = thread_step(sw.roots[i - 1], raw[i].z);
        sw.discriminant[i] = raw[i].degree_drop || has_collision(raw[i].z, opts.collision_tol);
    }
    return sw;
}

std::vector<CriticalFrequencyRecord> critical_frequencies(const FrequencySweep& sw, const CriticalOptions& opts) {
    const Quasipolynomial& qp = *sw.qp;
    const BivariatePolynomial pa = auxiliary_polynomial(qp);
    const size_t npts = sw.omega.size();

    // Branch position at w: the root nearest the interpolated threaded track.
    auto tracked = [&](int b, size_t i, double w) {
        const double w0 = sw.omega[i], w1 = sw.omega[std::min(i + 1, npts - 1)];
        const double s = w1 > w0 ? (w - w0) / (w1 - w0) : 0.0;
        const cplx guess = sw.roots[i][static_cast<size_t>(b)] * (1.0 - s) +
                           sw.roots[std::min(i + 1, npts - 1)][static_cast<size_t>(b)] * s;
        const auto zr = z_roots(pa, w);
        cplx best = zr.z.front();
        for (const auto& z : zr.z)
            if (std::abs(z - guess) < std::abs(best - guess)) best = z;
        return best;
    };

    std::vector<Candidate> cands;
    for (int b = 0; b < sw.branch_count; ++b) {
        std::vector<double> d(npts);
        for (size_t i = 0; i < npts; ++i) d[i] = sw.modulus(i, b) - 1.0;
        for (size_t i = 0; i < npts; ++i) {
            if (d[i] == 0.0) {
                cands.push_back({sw.omega[i], sw.roots[i][static_cast<size_t>(b)]});
                continue;
            }
            if (i + 1 < npts && d[i] * d[i + 1] < 0.0) {
                double lo = sw.omega[i], hi = sw.omega[i + 1];
                const double slo = d[i];
                for (int it = 0; it < 100 && hi - lo > 1e-16 * hi; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const double dm = std::abs(tracked(b, i, mid)) - 1.0;
                    if (dm == 0.0) {
                        lo = hi = mid;
                        break;
                    }
                    ((dm < 0.0) == (slo < 0.0) ? lo : hi) = mid;
                }
                const double w = 0.5 * (lo + hi);
                cands.push_back({w, tracked(b, i, w)});
            }
            if (i > 0 && i + 1 < npts && std::abs(d[i]) < 0.05 && std::abs(d[i]) <= std::abs(d[i - 1]) &&
                std::abs(d[i]) <= std::abs(d[i + 1]) && d[i - 1] * d[i] > 0.0 && d[i] * d[i + 1] > 0.0) {
                // Golden-section search for a touch without a sign change.
                const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
                double a = sw.omega[i - 1], c = sw.omega[i + 1];
                auto h = [&](double w) {
                    const size_t k = w < sw.omega[i] ? i - 1 : i;
                    return std::abs(std::abs(tracked(b, k, w)) - 1.0);
                };
                double x1 = c - gr * (c - a), x2 = a + gr * (c - a);
                double f1 = h(x1), f2 = h(x2);
                for (int it = 0; it < 120 && c - a > 1e-15 * c; ++it) {
                    if (f1 < f2) {
                        c = x2;
                        x2 = x1;
                        f2 = f1;
                        x1 = c - gr * (c - a);
                        f1 = h(x1);
                    } else {
                        a = x1;
                        x1 = x2;
                        f1 = f2;
                        x2 = a + gr * (c - a);
                        f2 = h(x2);
                    }
                }
                const double w = f1 < f2 ? x1 : x2;
                const double fm = std::min(f1, f2);
                if (fm < opts.tol) {
                    cands.push_back({w, tracked(b, w < sw.omega[i] ? i - 1 : i, w)});
                } else if (fm < 1e3 * opts.tol) {
                    throw NumericError("unresolved tangency near omega = " + std::to_string(w) +
                                       ": a curve stays within " + std::to_string(fm) + " of the unit circle");
                }
            }
        }
    }

    // Polish each candidate as a critical pair and merge duplicates.
    std::vector<double> omegas;
    for (const auto& c : cands) {
        if (!(c.omega > 0.0)) continue;
        const auto cp = polish_critical_pair(qp, c.omega, angle_delay(c.z, c.omega), opts.polish_tol);
        const double w = cp.converged ? cp.omega : c.omega;
        bool dup = false;
        for (double o : omegas) dup = dup || std::abs(o - w) <= 1e-7 * std::max(1.0, w);
        if (!dup) omegas.push_back(w);
    }
    std::sort(omegas.begin(), omegas.end());

    std::vector<CriticalFrequencyRecord> out;
    const int cap = std::max(1, polya_szego_degree(qp));
    for (double w : omegas) {
        const auto zr = z_roots(pa, w);
        std::vector<cplx> unit;
        for (const auto& z : zr.z)
            if (std::abs(std::abs(z) - 1.0) < std::max(opts.tol, 1e-6)) unit.push_back(z);
        for (const auto& cl : cluster_roots(unit, opts.z_cluster_tol)) {
            CriticalFrequencyRecord rec;
            rec.omega = w;
            rec.g = cl.multiplicity;
            rec.z = cl.center / std::abs(cl.center);
            rec.tau0 = angle_delay(rec.z, w);
            const auto cp = polish_critical_pair(qp, w, rec.tau0, opts.polish_tol);
            if (cp.converged && std::abs(cp.tau - rec.tau0) < 1e-5 * std::max(1.0, rec.tau0)) rec.tau0 = cp.tau;
            const cplx l(0.0, w);
            const std::vector<double> tv{rec.tau0};
            rec.n = strict_order(qp, l, tv, false, cap, 1e-7);
            rec.g_derivative = strict_order(qp, l, tv, true, cap, 1e-7);
            out.push_back(rec);
        }
    }
    for (auto& rec : out) rec.var_nf = var_nf(sw, rec, out);
    return out;
}

int var_nf(const FrequencySweep& sw, const CriticalFrequencyRecord& rec,
           const std::vector<CriticalFrequencyRecord>& all) {
    const BivariatePolynomial pa = auxiliary_polynomial(*sw.qp);
    const auto it = std::lower_bound(sw.omega.begin(), sw.omega.end(), rec.omega);
    double step = std::numeric_limits<double>::infinity();
    if (it != sw.omega.end() && it != sw.omega.begin()) step = *it - *(it - 1);
    if (it != sw.omega.end() && it + 1 != sw.omega.end()) step = std::min(step, *(it + 1) - *it);
    if (!std::isfinite(step)) step = 1e-3 * std::max(1.0, rec.omega);

    double neighbour = std::numeric_limits<double>::infinity();
    for (const auto& o : all)
        if (std::abs(o.omega - rec.omega) > 1e-7 * std::max(1.0, rec.omega))
            neighbour = std::min(neighbour, std::abs(o.omega - rec.omega));

    // Above/below classification of the g curves nearest z at w; 0 means
    // a modulus too close to 1 to classify.
    auto classify = [&](double w, int& above) {
        auto zs = z_roots(pa, w).z;
        std::sort(zs.begin(), zs.end(), [&](cplx a, cplx b) { return std::abs(a - rec.z) < std::abs(b - rec.z); });
        above = 0;
        for (int k = 0; k < rec.g && k < static_cast<int>(zs.size()); ++k) {
            const double gap = std::abs(zs[static_cast<size_t>(k)]) - 1.0;
            if (std::abs(gap) < 1e-13) return false;
            if (gap > 0) ++above;
        }
        return true;
    };

    double eps = std::min(step, 0.25 * neighbour);
    for (int attempt = 0; attempt < 12; ++attempt) {
        if (3.0 * eps >= neighbour) {
            eps = neighbour / 4.0;
        }
        if (!(eps > 1e-12 * std::max(1.0, rec.omega)))
            throw ValidationError("var_nf window contaminated by a neighbouring critical frequency");
        bool ambiguous = false, unstable = false;
        int nf[2] = {0, 0};
        for (int side = 0; side < 2 && !ambiguous && !unstable; ++side) {
            const double sgn = side == 0 ? -1.0 : 1.0;
            for (int q = 1; q <= 3; ++q) {
                const double w = rec.omega + sgn * q * eps;
                if (w <= 0.0) {
                    ambiguous = true;
                    break;
                }
                int above = 0;
                if (!classify(w, above)) {
                    ambiguous = true;
                    break;
                }
                if (q == 1) nf[side] = above;
                else if (above != nf[side]) {
                    unstable = true;
                    break;
                }
            }
        }
        if (!ambiguous && !unstable) return nf[1] - nf[0];
        eps = ambiguous && !unstable ? eps * 2.0 : eps / 4.0;
    }
    throw NumericError("var_nf: above/below classification did not stabilize near omega = " +
                       std::to_string(rec.omega));
}

NUProfile nu_profile(const Quasipolynomial& qp, double tau_max, const NUOptions& opts) {
    if (!qp.is_commensurate()) throw ValidationError("NU profile needs commensurate delays");
    if (qp.kind() != SystemKind::Retarded) throw ValidationError("NU profile needs a retarded quasipolynomial");
    if (!(tau_max > 0.0)) throw ValidationError("tau_max must be positive");

    NUProfile prof;
    prof.tau_max = tau_max;
    RealPolynomial sum;
    double abs0 = 0.0;
    for (const auto& t : qp.terms()) {
        sum = sum + t.poly;
        abs0 += std::abs(t.poly[0]);
    }
    prof.origin_invariant = std::abs(sum[0]) <= 1e-14 * abs0;

    const double scale0 = std::max(1.0, modulus_bound(qp, std::vector<double>{1.0}, 0.0));
    for (const auto& r : polynomial_roots(sum, {.cluster_tol = 1e-6})) {
        if (prof.origin_invariant && std::abs(r) <= 1e-7 * scale0) continue;
        if (std::abs(r.real()) <= 1e-10 * scale0)
            throw ValidationError("the delay-free system has a root on the imaginary axis");
        if (r.real() > 0.0) ++prof.nu0;
    }

    // Imaginary roots shared by every term persist for all delays.
    const BivariatePolynomial pa = auxiliary_polynomial(qp);
    const RealPolynomial& p0 = qp.poly(0);
    for (const auto& r : polynomial_roots(p0)) {
        if (std::abs(r.real()) > 1e-9 * std::max(1.0, std::abs(r)) || std::abs(r) <= 1e-9) continue;
        bool all = true;
        for (int i = 0; i <= pa.z_degree() && all; ++i) {
            const auto& p = pa.coefficient(i);
            all = p.is_zero() || std::abs(p(cplx(0.0, r.imag()))) <= 1e-10 * p.magnitude_at(std::abs(r), 0);
        }
        if (all) throw InvariantRoot("imaginary root persisting for every delay at omega = " + std::to_string(r.imag()));
    }

    prof.counts.push_back(prof.nu0);
    if (qp.max_index() >= 1) {
        const double whi = modulus_bound(qp, std::vector<double>{1.0}, 0.0) * 1.01 + 0.1;
        const double wlo = 1e-6 * whi;
        const FrequencySweep sw = sweep(qp, wlo, whi, opts.initial_resolution, opts.sweep);
        prof.critical = critical_frequencies(sw, opts.critical);

        std::map<double, int> events;
        auto add_event = [&](double t, int inc) {
            for (auto& [k, v] : events)
                if (std::abs(k - t) <= 1e-9 * std::max(1.0, t)) {
                    v += inc;
                    return;
                }
            events[t] += inc;
        };
        for (const auto& rec : prof.critical) {
            if (rec.g != rec.g_derivative)
                prof.warnings.push_back("index g differs at omega = " + std::to_string(rec.omega) + ": z-root count " +
                                        std::to_string(rec.g) + ", tau-derivative order " +
                                        std::to_string(rec.g_derivative));
            const double period = kTwoPi / rec.omega;
            for (double t = rec.tau0; t <= tau_max; t += period) {
                if (t <= 0.0) continue;
                add_event(t, 2 * rec.var_nf);
            }
        }
        for (const auto& [t, inc] : events) {
            if (inc == 0) continue;  // NU unchanged: not a breakpoint
            prof.breakpoints.push_back(t);
            prof.counts.push_back(prof.counts.back() + inc);
        }
    }

    for (size_t i = 0; i < prof.counts.size(); ++i)
        if (prof.counts[i] < 0)
            throw ValidationMismatch("invariance prediction went negative", i == 0 ? 0.0 : prof.breakpoints[i - 1],
                                     prof.counts[i], 0);

    if (opts.validate) {
        for (size_t i = 0; i < prof.counts.size(); ++i) {
            const double lo = i == 0 ? 0.0 : prof.breakpoints[i - 1];
            const double hi = i < prof.breakpoints.size() ? prof.breakpoints[i] : tau_max;
            if (!(hi > lo)) continue;
            const double mid = 0.5 * (lo + hi);
            const int counted = count_unstable(qp, mid, opts.roots, {.exclude_origin = prof.origin_invariant});
            if (counted != prof.counts[i])
                throw ValidationMismatch("NU mismatch at tau = " + std::to_string(mid) + ": predicted " +
                                             std::to_string(prof.counts[i]) + ", counted " + std::to_string(counted),
                                         mid, prof.counts[i], counted);
        }
    }

    if (!prof.origin_invariant) {
        for (size_t i = 0; i < prof.counts.size(); ++i) {
            if (prof.counts[i] != 0) continue;
            StabilityInterval si;
            si.lo = i == 0 ? 0.0 : prof.breakpoints[i - 1];
            si.lo_closed = i == 0;
            if (i < prof.breakpoints.size()) {
                si.hi = prof.breakpoints[i];
                si.hi_closed = false;
            } else {
                si.hi = tau_max;
                si.hi_closed = true;
            }
            if (si.hi > si.lo) prof.stability_intervals.push_back(si);
        }
    }
    return prof;
}

}  // namespace tds
