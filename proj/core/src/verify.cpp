#include "gfflab/verify.hpp"

#include <chrono>
#include <cmath>
#include <queue>
#include <set>

#include "gfflab/parallel.hpp"
#include "gfflab/stats.hpp"

namespace gfflab {

namespace {

using Clock = std::chrono::steady_clock;

constexpr long kChunk = 512;

// Purpose tags for per-replica streams, one per independent sampling role.
enum Purpose : uint64_t {
    kIsoOcc = 0xA1,
    kIsoField = 0xA2,
    kClusterId = 0xA3,
    kWick = 0xA4,
    kMassive = 0xA5,
    kPerc = 0xA6,
    kFkg = 0xA7,
    kLocalFin = 0xA8,
    kCouplingEta = 0xA9,
    kCouplingDelta = 0xAA,
    kRefine = 0xAB,
    kRefineBridge = 0xAC,
    kInterfaceStudy = 0xAD,
};

double elapsed(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int workers_of(const RunParams& p) { return p.workers > 0 ? p.workers : default_workers(); }

double combined_tol(double se1, double se2, double k = 4.0) {
    return k * std::sqrt(se1 * se1 + se2 * se2);
}

std::vector<double> harmonic_shift(const Network& net, const BoundaryFunction& u, double shift,
                                   BoundaryFunction& out) {
    std::vector<double> bv = u.boundary_values;
    for (double& v : bv) v += shift;
    out = harmonic_extension(net, bv);
    return bv;
}

double hausdorff(const std::vector<std::array<double, 2>>& a,
                 const std::vector<std::array<double, 2>>& b) {
    if (a.empty() || b.empty()) return a.empty() == b.empty() ? 0.0 : 1e300;
    auto one_sided = [](const std::vector<std::array<double, 2>>& from,
                        const std::vector<std::array<double, 2>>& to) {
        double worst = 0.0;
        for (const auto& p : from) {
            double best = 1e300;
            for (const auto& q : to) {
                double dx = p[0] - q[0], dy = p[1] - q[1];
                best = std::min(best, dx * dx + dy * dy);
            }
            worst = std::max(worst, best);
        }
        return std::sqrt(worst);
    };
    return std::max(one_sided(a, b), one_sided(b, a));
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

void write_reports_csv(std::ostream& os, const std::vector<TestReport>& reports) {
    os << "test,statistic,value,stderr,target,tolerance,pass\n";
    for (const auto& r : reports)
        for (const auto& c : r.checks)
            os << r.name << ',' << c.statistic << ',' << c.value << ',' << c.stderror << ','
               << c.target << ',' << c.tolerance << ',' << (c.pass ? 1 : 0) << '\n';
}

void print_report(std::ostream& os, const TestReport& r) {
    os << "=== " << r.name << " (replicas=" << r.replicas << ", seed=" << r.seed
       << ", runtime=" << r.runtime_seconds << "s)\n";
    for (const auto& c : r.checks)
        os << "  [" << (c.soft ? "SOFT" : (c.pass ? "PASS" : "FAIL")) << "] " << c.statistic
           << " value=" << c.value << " target=" << c.target << " tol=" << c.tolerance
           << " se=" << c.stderror << '\n';
    os << "  => " << (r.passed() ? "PASS" : "FAIL") << '\n';
}

// -- isomorphism ------------------------------------------------------------

TestReport test_isomorphism_discrete(const Network& net, const BoundaryFunction& u,
                                     const RunParams& p) {
    auto t0 = Clock::now();
    LoopSoupSampler ls(net);
    ExcursionSampler es(net);
    const int k = net.interior_count();
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < k - 1 && static_cast<int>(pairs.size()) < 10; ++i)
        pairs.emplace_back(i, (i + k / 2) % k == i ? i + 1 : (i + k / 2) % k);

    struct Part {
        std::vector<stats::MomentAcc> occ_x, occ_x2, fld_x, fld_x2;
        std::vector<stats::MomentAcc> occ_xy, fld_xy;
        std::vector<std::vector<double>> occ_s, fld_s;  // per vertex samples
    };
    auto parts = run_chunked<Part>(p.replicas, workers_of(p), kChunk, [&](long lo, long hi,
                                                                          Part& part) {
        part.occ_x.resize(static_cast<size_t>(k));
        part.occ_x2.resize(static_cast<size_t>(k));
        part.fld_x.resize(static_cast<size_t>(k));
        part.fld_x2.resize(static_cast<size_t>(k));
        part.occ_xy.resize(pairs.size());
        part.fld_xy.resize(pairs.size());
        part.occ_s.resize(static_cast<size_t>(k));
        part.fld_s.resize(static_cast<size_t>(k));
        std::vector<double> occ_v(static_cast<size_t>(k)), fld_v(static_cast<size_t>(k));
        for (long r = lo; r < hi; ++r) {
            RngStream rng1(p.seed, static_cast<uint64_t>(r), kIsoOcc);
            SoupSample soup = ls.sample(0.5, rng1);
            SoupSample exc = es.sample(u, rng1);
            OccupationField L = occupation_field(soup, true);
            OccupationField Le = occupation_field(exc, false);
            RngStream rng2(p.seed, static_cast<uint64_t>(r), kIsoField);
            FieldSample f = sample_discrete_gff(net, u, rng2);
            for (int i = 0; i < k; ++i) {
                int v = net.interior()[static_cast<size_t>(i)];
                occ_v[static_cast<size_t>(i)] =
                    L.values[static_cast<size_t>(v)] + Le.values[static_cast<size_t>(v)];
                fld_v[static_cast<size_t>(i)] =
                    0.5 * f.values[static_cast<size_t>(v)] * f.values[static_cast<size_t>(v)];
            }
            for (int i = 0; i < k; ++i) {
                double a = occ_v[static_cast<size_t>(i)], b = fld_v[static_cast<size_t>(i)];
                part.occ_x[static_cast<size_t>(i)].add(a);
                part.occ_x2[static_cast<size_t>(i)].add(a * a);
                part.fld_x[static_cast<size_t>(i)].add(b);
                part.fld_x2[static_cast<size_t>(i)].add(b * b);
                part.occ_s[static_cast<size_t>(i)].push_back(a);
                part.fld_s[static_cast<size_t>(i)].push_back(b);
            }
            for (size_t q = 0; q < pairs.size(); ++q) {
                part.occ_xy[q].add(occ_v[static_cast<size_t>(pairs[q].first)] *
                                   occ_v[static_cast<size_t>(pairs[q].second)]);
                part.fld_xy[q].add(fld_v[static_cast<size_t>(pairs[q].first)] *
                                   fld_v[static_cast<size_t>(pairs[q].second)]);
            }
        }
    });

    Part all;
    all.occ_x.resize(static_cast<size_t>(k));
    all.occ_x2.resize(static_cast<size_t>(k));
    all.fld_x.resize(static_cast<size_t>(k));
    all.fld_x2.resize(static_cast<size_t>(k));
    all.occ_xy.resize(pairs.size());
    all.fld_xy.resize(pairs.size());
    all.occ_s.resize(static_cast<size_t>(k));
    all.fld_s.resize(static_cast<size_t>(k));
    for (auto& part : parts) {
        for (int i = 0; i < k; ++i) {
            all.occ_x[static_cast<size_t>(i)].merge(part.occ_x[static_cast<size_t>(i)]);
            all.occ_x2[static_cast<size_t>(i)].merge(part.occ_x2[static_cast<size_t>(i)]);
            all.fld_x[static_cast<size_t>(i)].merge(part.fld_x[static_cast<size_t>(i)]);
            all.fld_x2[static_cast<size_t>(i)].merge(part.fld_x2[static_cast<size_t>(i)]);
            auto& so = part.occ_s[static_cast<size_t>(i)];
            auto& sf = part.fld_s[static_cast<size_t>(i)];
            all.occ_s[static_cast<size_t>(i)].insert(all.occ_s[static_cast<size_t>(i)].end(),
                                                     so.begin(), so.end());
            all.fld_s[static_cast<size_t>(i)].insert(all.fld_s[static_cast<size_t>(i)].end(),
                                                     sf.begin(), sf.end());
        }
        for (size_t q = 0; q < pairs.size(); ++q) {
            all.occ_xy[q].merge(part.occ_xy[q]);
            all.fld_xy[q].merge(part.fld_xy[q]);
        }
    }

    TestReport rep;
    rep.name = "isomorphism_discrete";
    rep.seed = p.seed;
    rep.replicas = p.replicas;
    for (int i = 0; i < k; ++i) {
        const auto& a = all.occ_x[static_cast<size_t>(i)];
        const auto& b = all.fld_x[static_cast<size_t>(i)];
        rep.add("mean[v" + std::to_string(net.interior()[static_cast<size_t>(i)]) + "]", a.mean(),
                a.stderr_mean(), b.mean(), combined_tol(a.stderr_mean(), b.stderr_mean(), p.sigma));
        const auto& a2 = all.occ_x2[static_cast<size_t>(i)];
        const auto& b2 = all.fld_x2[static_cast<size_t>(i)];
        rep.add("second_moment[v" + std::to_string(net.interior()[static_cast<size_t>(i)]) + "]",
                a2.mean(), a2.stderr_mean(), b2.mean(),
                combined_tol(a2.stderr_mean(), b2.stderr_mean(), p.sigma));
    }
    for (size_t q = 0; q < pairs.size(); ++q) {
        const auto& a = all.occ_xy[q];
        const auto& b = all.fld_xy[q];
        rep.add("cross_moment[" + std::to_string(q) + "]", a.mean(), a.stderr_mean(), b.mean(),
                combined_tol(a.stderr_mean(), b.stderr_mean(), p.sigma));
    }
    int ks_pass = 0;
    for (int i = 0; i < k; ++i) {
        double pv = stats::ks_two_sample(all.occ_s[static_cast<size_t>(i)],
                                         all.fld_s[static_cast<size_t>(i)]);
        if (pv > 0.01) ++ks_pass;
    }
    rep.add("ks_pass_fraction", static_cast<double>(ks_pass) / k, 0.0, 1.0, 0.05);
    rep.runtime_seconds = elapsed(t0);
    return rep;
}

// -- cluster / first-passage identity -----------------------------------------

TestReport test_cluster_fps_identity(const Network& net, const BoundaryFunction& u, int m,
                                     const RunParams& p) {
    auto t0 = Clock::now();
    RefinedNetwork ref = refine(net, m);
    const Network& work = ref.net();
    BoundaryFunction uw = harmonic_extension(work, u.boundary_values);
    LoopSoupSampler ls(work);
    ExcursionSampler es(work);

    struct Part {
        long equal = 0;
        long total = 0;
    };
    auto parts =
        run_chunked<Part>(p.replicas, workers_of(p), kChunk, [&](long lo, long hi, Part& part) {
            for (long r = lo; r < hi; ++r) {
                RngStream rng(p.seed, static_cast<uint64_t>(r), kClusterId);
                SoupSample soup = ls.sample(0.5, rng);
                SoupSample exc = es.sample(uw, rng);
                FieldSample f = assemble_field(soup, exc, rng);
                MetricSubset fps = first_passage_set(f, 0.0, false);
                MetricSubset un = excursion_cluster_union(build_clusters(soup, exc));
                ++part.total;
                if (fps == un) ++part.equal;
            }
        });
    long equal = 0, total = 0;
    for (auto& part : parts) {
        equal += part.equal;
        total += part.total;
    }
    TestReport rep;
    rep.name = "cluster_fps_identity_m" + std::to_string(m);
    rep.seed = p.seed;
    rep.replicas = p.replicas;
    rep.add("equal_fraction", total ? static_cast<double>(equal) / total : 1.0, 0.0, 1.0, 0.0);
    rep.runtime_seconds = elapsed(t0);
    return rep;
}

// -- Wick moments -------------------------------------------------------------

TestReport test_wick_moments(const Network& net, const BoundaryFunction& u,
                             const std::vector<std::vector<double>>& test_functions,
                             const RunParams& p) {
    auto t0 = Clock::now();
    LoopSoupSampler ls(net);
    ExcursionSampler es(net);
    GreenTable g = green_function(net);
    const int k = net.interior_count();

    const size_t nf = test_functions.size();
    std::vector<double> exact_mean(nf, 0.0), exact_var(nf, 0.0);
    for (size_t q = 0; q < nf; ++q) {
        const auto& f = test_functions[q];
        for (int i = 0; i < k; ++i) {
            int v = net.interior()[static_cast<size_t>(i)];
            double fv = f[static_cast<size_t>(v)];
            double uv = u.extension[static_cast<size_t>(v)];
            exact_mean[q] += fv * 0.5 * (g.values(i, i) + uv * uv);
            for (int j = 0; j < k; ++j) {
                int w = net.interior()[static_cast<size_t>(j)];
                double fw = f[static_cast<size_t>(w)];
                double uw = u.extension[static_cast<size_t>(w)];
                exact_var[q] += 0.5 * fv * g.values(i, j) * g.values(i, j) * fw +
                                fv * uv * g.values(i, j) * uw * fw;
            }
        }
    }

    struct Part {
        std::vector<stats::MomentAcc> centered, sq;
    };
    auto parts =
        run_chunked<Part>(p.replicas, workers_of(p), kChunk, [&](long lo, long hi, Part& part) {
            part.centered.resize(nf);
            part.sq.resize(nf);
            for (long r = lo; r < hi; ++r) {
                RngStream rng(p.seed, static_cast<uint64_t>(r), kWick);
                SoupSample soup = ls.sample(0.5, rng);
                SoupSample exc = es.sample(u, rng);
                OccupationField L = occupation_field(soup, true);
                OccupationField Le = occupation_field(exc, false);
                for (size_t q = 0; q < nf; ++q) {
                    double s = 0.0;
                    for (int i = 0; i < k; ++i) {
                        int v = net.interior()[static_cast<size_t>(i)];
                        s += test_functions[q][static_cast<size_t>(v)] *
                             (L.values[static_cast<size_t>(v)] + Le.values[static_cast<size_t>(v)]);
                    }
                    double c = s - exact_mean[q];
                    part.centered[q].add(c);
                    part.sq[q].add(c * c);
                }
            }
        });
    std::vector<stats::MomentAcc> centered(nf), sq(nf);
    for (auto& part : parts)
        for (size_t q = 0; q < nf; ++q) {
            centered[q].merge(part.centered[q]);
            sq[q].merge(part.sq[q]);
        }

    TestReport rep;
    rep.name = "wick_moments";
    rep.seed = p.seed;
    rep.replicas = p.replicas;
    for (size_t q = 0; q < nf; ++q) {
        rep.add("centered_mean[f" + std::to_string(q) + "]", centered[q].mean(),
                centered[q].stderr_mean(), 0.0, p.sigma * centered[q].stderr_mean());
        rep.add("variance[f" + std::to_string(q) + "]", sq[q].mean(), sq[q].stderr_mean(),
                exact_var[q], p.sigma * sq[q].stderr_mean());
    }
    rep.runtime_seconds = elapsed(t0);
    return rep;
}

// -- massive reweighting -------------------------------------------------------

TestReport test_massive_reweighting(const Network& net, const std::vector<double>& chi_interior,
                                    const RunParams& p) {
    auto t0 = Clock::now();
    const int k = net.interior_count();
    if (chi_interior.size() != static_cast<size_t>(k))
        throw std::invalid_argument("chi must be given per interior vertex");
    for (double c : chi_interior)
        if (c < 0) throw std::invalid_argument("chi must be nonnegative");

    Eigen::MatrixXd target = Eigen::MatrixXd(net.interior_matrix());
    for (int i = 0; i < k; ++i) target(i, i) += chi_interior[static_cast<size_t>(i)];
    target = target.inverse();

    const int npairs = k * (k + 1) / 2;
    struct Part {
        double sw = 0, sw2 = 0;
        std::vector<double> swx, swx2;
    };
    auto parts =
        run_chunked<Part>(p.replicas, workers_of(p), kChunk, [&](long lo, long hi, Part& part) {
            part.swx.assign(static_cast<size_t>(npairs), 0.0);
            part.swx2.assign(static_cast<size_t>(npairs), 0.0);
            Eigen::VectorXd z(k);
            for (long r = lo; r < hi; ++r) {
                RngStream rng(p.seed, static_cast<uint64_t>(r), kMassive);
                for (int i = 0; i < k; ++i) z(i) = rng.normal();
                Eigen::VectorXd phi = net.colored_sample(z);
                double logw = 0.0;
                for (int i = 0; i < k; ++i)
                    logw -= 0.5 * chi_interior[static_cast<size_t>(i)] * phi(i) * phi(i);
                double w = std::exp(logw);
                part.sw += w;
                part.sw2 += w * w;
                int q = 0;
                for (int i = 0; i < k; ++i)
                    for (int j = i; j < k; ++j, ++q) {
                        double x = phi(i) * phi(j);
                        part.swx[static_cast<size_t>(q)] += w * x;
                        part.swx2[static_cast<size_t>(q)] += w * x * x;
                    }
            }
        });
    double sw = 0, sw2 = 0;
    std::vector<double> swx(static_cast<size_t>(npairs), 0.0), swx2(static_cast<size_t>(npairs), 0.0);
    for (auto& part : parts) {
        sw += part.sw;
        sw2 += part.sw2;
        for (int q = 0; q < npairs; ++q) {
            swx[static_cast<size_t>(q)] += part.swx[static_cast<size_t>(q)];
            swx2[static_cast<size_t>(q)] += part.swx2[static_cast<size_t>(q)];
        }
    }
    double ess = sw * sw / sw2;

    TestReport rep;
    rep.name = "massive_reweighting";
    rep.seed = p.seed;
    rep.replicas = p.replicas;
    {
        auto& c = rep.add("ess_fraction", ess / static_cast<double>(p.replicas), 0.0, 1.0, 1.0);
        c.pass = ess >= 0.1 * static_cast<double>(p.replicas);
    }
    int q = 0;
    for (int i = 0; i < k; ++i)
        for (int j = i; j < k; ++j, ++q) {
            double mean = swx[static_cast<size_t>(q)] / sw;
            double varw = swx2[static_cast<size_t>(q)] / sw - mean * mean;
            double se = std::sqrt(std::max(varw, 0.0) / ess);
            rep.add("cov[" + std::to_string(i) + "," + std::to_string(j) + "]", mean, se,
                    target(i, j), p.sigma * se);
        }
    rep.runtime_seconds = elapsed(t0);
    return rep;
}

// -- percolation curves ----------------------------------------------------------

std::pair<std::vector<PercRow>, TestReport> percolation_curve(const std::vector<int>& box_sizes,
                                                              double a,
                                                              const std::vector<double>& thetas,
                                                              const RunParams& p) {
    auto t0 = Clock::now();
    TestReport rep;
    rep.name = "percolation_curve";
    rep.seed = p.seed;
    rep.replicas = p.replicas;
    std::vector<PercRow> rows;
    std::vector<std::vector<double>> curves;  // per N, per theta

    for (int n_box : box_sizes) {
        DomainSpec d;
        d.kind = DomainSpec::Kind::box;
        d.box_half = n_box;
        Network net = lattice_domain(d, 0);
        BoundaryFunction u = BoundaryFunction::constant(net, a);

        struct Part {
            std::vector<long> counts;  // per theta: min_theta <= theta
        };
        auto parts = run_chunked<Part>(
            p.replicas, workers_of(p), kChunk, [&](long lo, long hi, Part& part) {
                part.counts.assign(thetas.size(), 0);
                for (long r = lo; r < hi; ++r) {
                    RngStream rng(p.seed, static_cast<uint64_t>(r),
                                  RngStream::mix(kPerc, static_cast<uint64_t>(n_box)));
                    FieldSample f = sample_discrete_gff(net, u, rng);
                    MetricSubset fps = first_passage_set(f, 0.0, true);
                    double min_theta = 1e300;
                    for (int v = 0; v < net.vertex_count(); ++v)
                        if (fps.vertices[static_cast<size_t>(v)]) {
                            auto c = net.lattice_coord(v);
                            min_theta = std::min(
                                min_theta, static_cast<double>(std::max(std::abs(c[0]),
                                                                        std::abs(c[1]))) /
                                               n_box);
                        }
                    for (size_t t = 0; t < thetas.size(); ++t)
                        if (min_theta <= thetas[t] + 1e-12) ++part.counts[t];
                }
            });
        std::vector<long> counts(thetas.size(), 0);
        for (auto& part : parts)
            for (size_t t = 0; t < thetas.size(); ++t) counts[t] += part.counts[t];

        std::vector<double> curve;
        bool monotone = true;
        double prev = -1;
        for (size_t t = 0; t < thetas.size(); ++t) {
            double prob = static_cast<double>(counts[t]) / static_cast<double>(p.replicas);
            double se = std::sqrt(prob * (1 - prob) / static_cast<double>(p.replicas));
            rows.push_back({n_box, thetas[t], prob, se});
            if (prob < prev) monotone = false;
            prev = prob;
            curve.push_back(prob);
        }
        curves.push_back(curve);
        rep.add("theta_monotone[N=" + std::to_string(n_box) + "]", monotone ? 1.0 : 0.0, 0.0, 1.0,
                0.0);
    }
    double prev_gap = -1;
    bool decreasing = true;
    for (size_t i = 0; i + 1 < curves.size(); ++i) {
        double gap = 0.0;
        for (size_t t = 0; t < thetas.size(); ++t)
            gap = std::max(gap, std::fabs(curves[i][t] - curves[i + 1][t]));
        rep.add("stability_gap[" + std::to_string(box_sizes[i]) + "," +
                    std::to_string(box_sizes[i + 1]) + "]",
                gap, 0.0, 0.0, 1.0, /*soft=*/true);
        if (prev_gap >= 0 && gap > prev_gap) decreasing = false;
        prev_gap = gap;
    }
    rep.add("stability_gap_decreasing", decreasing ? 1.0 : 0.0, 0.0, 1.0, 0.0, /*soft=*/true);
    rep.runtime_seconds = elapsed(t0);
    return {rows, rep};
}

// -- FKG ---------------------------------------------------------------------

TestReport test_fkg(const Network& net, const BoundaryFunction& u, const std::vector<char>& box1,
                    const std::vector<char>& box2, const RunParams& p) {
    auto t0 = Clock::now();
    struct Part {
        stats::CovAcc acc;
        bool used = false;
    };
    auto parts =
        run_chunked<Part>(p.replicas, workers_of(p), kChunk, [&](long lo, long hi, Part& part) {
            part.used = true;
            for (long r = lo; r < hi; ++r) {
                RngStream rng(p.seed, static_cast<uint64_t>(r), kFkg);
                FieldSample f = sample_discrete_gff(net, u, rng);
                MetricSubset fps = first_passage_set(f, 0.0, true);
                double f1 = 0, f2 = 0;
                for (int v = 0; v < net.vertex_count(); ++v) {
                    if (!fps.vertices[static_cast<size_t>(v)]) continue;
                    if (box1[static_cast<size_t>(v)]) f1 = 1;
                    if (box2[static_cast<size_t>(v)]) f2 = 1;
                }
                part.acc.add(f1, f2);
            }
        });
    // Overall covariance plus a batch-means standard error from the chunk
    // covariances.
    stats::CovAcc all;
    stats::MomentAcc batch;
    for (auto& part : parts) {
        if (!part.used || part.acc.count() < 2) continue;
        all.merge(part.acc);
        batch.add(part.acc.covariance());
    }
    double cov = all.covariance();
    double se = batch.count() > 1 ? batch.stderr_mean() : 0.0;

    TestReport rep;
    rep.name = "fkg";
    rep.seed = p.seed;
    rep.replicas = p.replicas;
    auto& c = rep.add("covariance", cov, se, 0.0, p.sigma * se);
    c.pass = cov >= -p.sigma * se;  // one-sided: increasing events correlate nonnegatively
    rep.runtime_seconds = elapsed(t0);
    return rep;
}

// -- local finiteness -----------------------------------------------------------

std::pair<std::vector<LocalFinRow>, TestReport> local_finiteness_stats(
    double disk_radius, const std::vector<int>& levels, double a, double u_const,
    const std::vector<double>& epsilons, const RunParams& p) {
    auto t0 = Clock::now();
    std::vector<LocalFinRow> rows;
    TestReport rep;
    rep.name = "local_finiteness";
    rep.seed = p.seed;
    rep.replicas = p.replicas;

    std::vector<std::vector<double>> q99_by_eps(epsilons.size());
    for (int n : levels) {
        DomainSpec d;
        d.kind = DomainSpec::Kind::disk;
        d.size = disk_radius;
        Network net = lattice_domain(d, n);
        BoundaryFunction u = BoundaryFunction::constant(net, u_const);

        struct Part {
            std::vector<std::vector<long>> counts;  // per eps, per replica
        };
        auto parts = run_chunked<Part>(
            p.replicas, workers_of(p), kChunk, [&](long lo, long hi, Part& part) {
                part.counts.resize(epsilons.size());
                for (long r = lo; r < hi; ++r) {
                    RngStream rng(p.seed, static_cast<uint64_t>(r),
                                  RngStream::mix(kLocalFin, static_cast<uint64_t>(n)));
                    FieldSample f = sample_discrete_gff(net, u, rng);
                    MetricSubset fps = first_passage_set(f, a, true);
                    // Complement components over excluded vertices.
                    std::vector<char> seen(static_cast<size_t>(net.vertex_count()), 0);
                    std::vector<long> big(epsilons.size(), 0);
                    for (int v = 0; v < net.vertex_count(); ++v) {
                        if (fps.vertices[static_cast<size_t>(v)] || seen[static_cast<size_t>(v)])
                            continue;
                        double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
                        std::queue<int> bfs;
                        bfs.push(v);
                        seen[static_cast<size_t>(v)] = 1;
                        while (!bfs.empty()) {
                            int w = bfs.front();
                            bfs.pop();
                            xmin = std::min(xmin, net.position(w)[0]);
                            xmax = std::max(xmax, net.position(w)[0]);
                            ymin = std::min(ymin, net.position(w)[1]);
                            ymax = std::max(ymax, net.position(w)[1]);
                            for (auto [z, ei] : net.neighbors(w))
                                if (!fps.vertices[static_cast<size_t>(z)] &&
                                    !seen[static_cast<size_t>(z)]) {
                                    seen[static_cast<size_t>(z)] = 1;
                                    bfs.push(z);
                                }
                        }
                        double diam = std::max(xmax - xmin, ymax - ymin);
                        for (size_t e = 0; e < epsilons.size(); ++e)
                            if (diam >= epsilons[e] * 2.0 * disk_radius) ++big[e];
                    }
                    for (size_t e = 0; e < epsilons.size(); ++e)
                        part.counts[e].push_back(big[e]);
                }
            });
        for (size_t e = 0; e < epsilons.size(); ++e) {
            std::vector<double> counts;
            for (auto& part : parts)
                if (!part.counts.empty())
                    for (long c : part.counts[e]) counts.push_back(static_cast<double>(c));
            std::sort(counts.begin(), counts.end());
            double mean = 0;
            for (double c : counts) mean += c;
            mean /= counts.empty() ? 1 : static_cast<double>(counts.size());
            double q99 = counts.empty() ? 0 : counts[static_cast<size_t>(0.99 * (counts.size() - 1))];
            rows.push_back({n, epsilons[e], mean, q99});
            q99_by_eps[e].push_back(q99);
        }
    }
    for (size_t e = 0; e < epsilons.size(); ++e) {
        bool stable = true;
        for (size_t i = 0; i + 1 < q99_by_eps[e].size(); ++i)
            if (q99_by_eps[e][i + 1] > q99_by_eps[e][i] + 1) stable = false;
        rep.add("q99_stable[eps=" + std::to_string(epsilons[e]) + "]", stable ? 1.0 : 0.0, 0.0,
                1.0, 0.0, /*soft=*/true);
    }
    rep.runtime_seconds = elapsed(t0);
    return {rows, rep};
}

// -- level-line coupling -----------------------------------------------------------

TestReport level_line_coupling(const Network& net, const BoundaryFunction& u,
                               const BoundaryFunction& u_star, long eta_samples, long delta_draws,
                               const RunParams& p) {
    auto t0 = Clock::now();
    const int nb = net.boundary_count();
    BoundaryFunction u_l, us_l;
    harmonic_shift(net, u, kLambda, u_l);
    harmonic_shift(net, u_star, kLambda, us_l);
    for (int i = 0; i < nb; ++i) {
        if (u_l.boundary_values[static_cast<size_t>(i)] < -1e-12 ||
            us_l.boundary_values[static_cast<size_t>(i)] <
                u_l.boundary_values[static_cast<size_t>(i)] - 1e-12)
            throw std::invalid_argument("coupling needs -lambda <= u <= u_star");
    }
    Eigen::MatrixXd w_delta(nb, nb);
    for (int i = 0; i < nb; ++i)
        for (int j = 0; j < nb; ++j)
            w_delta(i, j) = us_l.boundary_values[static_cast<size_t>(i)] *
                                us_l.boundary_values[static_cast<size_t>(j)] -
                            u_l.boundary_values[static_cast<size_t>(i)] *
                                u_l.boundary_values[static_cast<size_t>(j)];

    LoopSoupSampler ls(net);
    ExcursionSampler es(net);

    struct Part {
        stats::MomentAcc signed_disc, abs_disc;
        long failures = 0;
    };
    auto parts = run_chunked<Part>(
        eta_samples, workers_of(p), 8, [&](long lo, long hi, Part& part) {
            for (long i = lo; i < hi; ++i) {
                RngStream rng(p.seed, static_cast<uint64_t>(i), kCouplingEta);
                SoupSample soup = ls.sample(0.5, rng);
                SoupSample exc = es.sample(u_l, rng);
                MetricSubset un = excursion_cluster_union(build_clusters(soup, exc));
                InterfaceCurve eta;
                try {
                    eta = extract_interface(net, un);
                } catch (const std::exception&) {
                    ++part.failures;
                    continue;
                }
                std::vector<int> cut = crossed_edges(net, eta);
                std::set<int> cut_set(cut.begin(), cut.end());
                double mass = excursion_hitting_mass(net, u_l, us_l, {}, cut);

                long misses = 0;
                for (long d = 0; d < delta_draws; ++d) {
                    // One replica id per (eta, draw) pair so no delta sample
                    // is shared between eta replicas.
                    RngStream rngd(p.seed,
                                   static_cast<uint64_t>(i) * static_cast<uint64_t>(delta_draws) +
                                       static_cast<uint64_t>(d),
                                   kCouplingDelta);
                    SoupSample delta = es.sample_weighted(w_delta, rngd);
                    bool hit = false;
                    for (const auto& traj : delta.trajectories) {
                        for (size_t s = 0; s + 1 < traj.vertices.size() && !hit; ++s) {
                            int ei = net.edge_between(traj.vertices[s], traj.vertices[s + 1]);
                            if (cut_set.count(ei)) hit = true;
                        }
                        if (hit) break;
                    }
                    if (!hit) ++misses;
                }
                double emp = static_cast<double>(misses) / static_cast<double>(delta_draws);
                double disc = emp - std::exp(-mass);
                part.signed_disc.add(disc);
                part.abs_disc.add(std::fabs(disc));
            }
        });
    stats::MomentAcc signed_disc, abs_disc;
    long failures = 0;
    for (auto& part : parts) {
        signed_disc.merge(part.signed_disc);
        abs_disc.merge(part.abs_disc);
        failures += part.failures;
    }

    TestReport rep;
    rep.name = "level_line_coupling";
    rep.seed = p.seed;
    rep.replicas = eta_samples;
    rep.add("mean_discrepancy", signed_disc.mean(), signed_disc.stderr_mean(), 0.0,
            p.sigma * signed_disc.stderr_mean());
    rep.add("mean_abs_discrepancy", abs_disc.mean(), abs_disc.stderr_mean(), 0.0,
            abs_disc.mean() + 1.0, /*soft=*/true);
    rep.add("interface_failures", static_cast<double>(failures), 0.0, 0.0, 0.0);
    rep.runtime_seconds = elapsed(t0);
    return rep;
}

// -- refinement studies ---------------------------------------------------------

std::pair<std::vector<RefineRow>, TestReport> refinement_study(const Network& base,
                                                               const BoundaryFunction& u, double a,
                                                               const std::vector<int>& levels,
                                                               const RunParams& p) {
    auto t0 = Clock::now();
    std::vector<RefinedNetwork> refs;
    for (int m : levels) refs.push_back(refine(base, m));

    struct Part {
        std::vector<std::vector<double>> haus, statgap;  // per level pair
    };
    const size_t npairs = levels.size() > 0 ? levels.size() - 1 : 0;
    auto parts = run_chunked<Part>(
        p.replicas, workers_of(p), 64, [&](long lo, long hi, Part& part) {
            part.haus.resize(npairs);
            part.statgap.resize(npairs);
            for (long r = lo; r < hi; ++r) {
                RngStream rng0(p.seed, static_cast<uint64_t>(r), kRefine);
                FieldSample f0 = sample_discrete_gff(base, u, rng0);
                RngStream rngb(p.seed, static_cast<uint64_t>(r), kRefineBridge);

                std::vector<std::vector<std::array<double, 2>>> pts(levels.size());
                std::vector<double> frac(levels.size(), 0.0);
                for (size_t li = 0; li < levels.size(); ++li) {
                    FieldSample fm = interpolate_field(refs[li], f0, rngb);
                    MetricSubset fps = first_passage_set(fm, a, false);
                    const Network& wn = refs[li].net();
                    long base_in = 0;
                    for (int v = 0; v < wn.vertex_count(); ++v)
                        if (fps.vertices[static_cast<size_t>(v)]) {
                            pts[li].push_back(wn.position(v));
                            if (refs[li].base_vertex(v) >= 0) ++base_in;
                        }
                    frac[li] = static_cast<double>(base_in) / base.vertex_count();
                }
                for (size_t q = 0; q < npairs; ++q) {
                    part.haus[q].push_back(hausdorff(pts[q], pts[q + 1]));
                    part.statgap[q].push_back(std::fabs(frac[q] - frac[q + 1]));
                }
            }
        });

    std::vector<RefineRow> rows;
    TestReport rep;
    rep.name = "refinement_study";
    rep.seed = p.seed;
    rep.replicas = p.replicas;
    double prev = -1;
    bool decreasing = true;
    for (size_t q = 0; q < npairs; ++q) {
        std::vector<double> h, s;
        for (auto& part : parts)
            if (!part.haus.empty()) {
                h.insert(h.end(), part.haus[q].begin(), part.haus[q].end());
                s.insert(s.end(), part.statgap[q].begin(), part.statgap[q].end());
            }
        double mh = median_of(h), ms = median_of(s);
        rows.push_back({levels[q], mh, ms});
        rep.add("median_hausdorff[m=" + std::to_string(levels[q]) + "->" +
                    std::to_string(levels[q + 1]) + "]",
                mh, 0.0, 0.0, 1e300, /*soft=*/true);
        if (prev >= 0 && mh > prev) decreasing = false;
        prev = mh;
    }
    rep.add("median_hausdorff_decreasing", decreasing ? 1.0 : 0.0, 0.0, 1.0, 0.0, /*soft=*/true);
    rep.runtime_seconds = elapsed(t0);
    return {rows, rep};
}

std::pair<std::vector<RefineRow>, TestReport> interface_refinement_study(
    const DomainSpec& domain, const std::vector<int>& levels, const RunParams& p) {
    auto t0 = Clock::now();
    std::vector<Network> nets;
    std::vector<BoundaryFunction> us;
    for (int n : levels) {
        nets.push_back(lattice_domain(domain, n));
        const Network& net = nets.back();
        std::vector<double> bv(static_cast<size_t>(net.boundary_count()), 0.0);
        const auto* b2 = net.arc("B2");
        std::vector<char> in_b2(static_cast<size_t>(net.vertex_count()), 0);
        for (int v : *b2) in_b2[static_cast<size_t>(v)] = 1;
        for (int i = 0; i < net.boundary_count(); ++i)
            bv[static_cast<size_t>(i)] =
                in_b2[static_cast<size_t>(net.boundary()[static_cast<size_t>(i)])] ? -kLambda
                                                                                   : kLambda;
        us.push_back(harmonic_extension(net, bv));
    }

    struct Part {
        std::vector<std::vector<double>> haus;
        long failures = 0;
    };
    const size_t npairs = levels.size() > 0 ? levels.size() - 1 : 0;
    auto parts = run_chunked<Part>(
        p.replicas, workers_of(p), 16, [&](long lo, long hi, Part& part) {
            part.haus.resize(npairs);
            for (long r = lo; r < hi; ++r) {
                std::vector<std::vector<std::array<double, 2>>> pts(levels.size());
                bool ok = true;
                for (size_t li = 0; li < levels.size() && ok; ++li) {
                    const Network& net = nets[li];
                    RngStream rng(p.seed, static_cast<uint64_t>(r),
                                  RngStream::mix(kInterfaceStudy, static_cast<uint64_t>(levels[li])));
                    FieldSample f = sample_discrete_gff(net, us[li], rng);
                    MetricSubset fps = first_passage_set(f, kLambda, true);
                    try {
                        InterfaceCurve eta = extract_interface(net, fps);
                        double s = net.lattice_spacing();
                        double ox = net.position(0)[0] - s * net.lattice_coord(0)[0];
                        double oy = net.position(0)[1] - s * net.lattice_coord(0)[1];
                        for (const auto& face : eta.faces)
                            pts[li].push_back({ox + s * (face[0] + 0.5), oy + s * (face[1] + 0.5)});
                    } catch (const std::exception&) {
                        ++part.failures;
                        ok = false;
                    }
                }
                if (!ok) continue;
                for (size_t q = 0; q < npairs; ++q)
                    part.haus[q].push_back(hausdorff(pts[q], pts[q + 1]));
            }
        });

    std::vector<RefineRow> rows;
    TestReport rep;
    rep.name = "interface_refinement_study";
    rep.seed = p.seed;
    rep.replicas = p.replicas;
    double prev = -1;
    bool decreasing = true;
    long failures = 0;
    for (size_t q = 0; q < npairs; ++q) {
        std::vector<double> h;
        for (auto& part : parts)
            if (!part.haus.empty()) h.insert(h.end(), part.haus[q].begin(), part.haus[q].end());
        double mh = median_of(h);
        rows.push_back({levels[q], mh, 0.0});
        rep.add("median_hausdorff[n=" + std::to_string(levels[q]) + "->" +
                    std::to_string(levels[q + 1]) + "]",
                mh, 0.0, 0.0, 1e300, /*soft=*/true);
        if (prev >= 0 && mh > prev) decreasing = false;
        prev = mh;
    }
    for (auto& part : parts) failures += part.failures;
    rep.add("median_hausdorff_decreasing", decreasing ? 1.0 : 0.0, 0.0, 1.0, 0.0, /*soft=*/true);
    rep.add("interface_failures", static_cast<double>(failures), 0.0, 0.0,
            0.05 * static_cast<double>(p.replicas), /*soft=*/true);
    rep.runtime_seconds = elapsed(t0);
    return {rows, rep};
}

}  // namespace gfflab
