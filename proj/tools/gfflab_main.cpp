// gfflab: experiment runner for network field samplers, soups, first-passage
// sets and the statistical verification suites. One subcommand per
// experiment; every run drops a manifest plus the exact config next to its
// artifacts, and identical (config, seed) pairs produce identical artifacts.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gfflab/clusters.hpp"
#include "gfflab/fps.hpp"
#include "gfflab/gff.hpp"
#include "gfflab/network.hpp"
#include "gfflab/parallel.hpp"
#include "gfflab/soups.hpp"
#include "gfflab/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gfflab;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kSchemaVersion = 1;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- config --

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError(where + ": unknown key \"" + it.key() + "\"");
}

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
}

double num(const json& j, const std::string& key, double fallback) {
    return j.contains(key) ? j.at(key).get<double>() : fallback;
}
long lnum(const json& j, const std::string& key, long fallback) {
    return j.contains(key) ? j.at(key).get<long>() : fallback;
}

std::optional<char> split_of(const json& j, const std::string& where) {
    if (!j.contains("split")) return std::nullopt;
    std::string s = j.at("split").get<std::string>();
    if (s != "x" && s != "y") throw ConfigError(where + ".split must be \"x\" or \"y\"");
    return s[0];
}

Network make_network(const json& cfg) {
    int sources = cfg.contains("preset") + cfg.contains("network") + cfg.contains("domain") +
                  cfg.contains("grid");
    if (sources != 1)
        throw ConfigError("config needs exactly one of preset / network / domain / grid");

    if (cfg.contains("preset")) {
        std::string p = cfg.at("preset").get<std::string>();
        NetworkSpec spec;
        if (p == "p3") {
            spec.vertex_count = 3;
            spec.edges = {{0, 1, 1.0}, {1, 2, 1.0}};
            spec.boundary = {0, 2};
            spec.positions = {{0, 0}, {1, 0}, {2, 0}};
        } else if (p == "triangle") {
            spec.vertex_count = 3;
            spec.edges = {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}};
            spec.boundary = {0};
            spec.positions = {{0, 0}, {1, 0}, {0.5, 0.866}};
        } else {
            throw ConfigError("unknown preset \"" + p + "\" (expected p3 or triangle)");
        }
        return build_network(std::move(spec));
    }
    if (cfg.contains("grid")) {
        const json& g = cfg.at("grid");
        check_keys(g, {"nx", "ny", "split"}, "grid");
        return grid_network(static_cast<int>(lnum(g, "nx", 0)),
                            static_cast<int>(lnum(g, "ny", 0)), split_of(g, "grid"));
    }
    if (cfg.contains("domain")) {
        const json& d = cfg.at("domain");
        check_keys(d, {"kind", "size", "box_half", "level", "split"}, "domain");
        DomainSpec spec;
        std::string kind = d.contains("kind") ? d.at("kind").get<std::string>() : "square";
        if (kind == "square")
            spec.kind = DomainSpec::Kind::square;
        else if (kind == "disk")
            spec.kind = DomainSpec::Kind::disk;
        else if (kind == "box")
            spec.kind = DomainSpec::Kind::box;
        else
            throw ConfigError("domain.kind must be square, disk or box");
        spec.size = num(d, "size", 1.0);
        spec.box_half = static_cast<int>(lnum(d, "box_half", 1));
        spec.split_axis = split_of(d, "domain");
        return lattice_domain(spec, static_cast<int>(lnum(d, "level", 0)));
    }
    const json& n = cfg.at("network");
    check_keys(n, {"vertices", "edges", "boundary", "positions", "arcs"}, "network");
    NetworkSpec spec;
    spec.vertex_count = static_cast<int>(lnum(n, "vertices", 0));
    for (const auto& e : n.at("edges")) {
        if (!e.is_array() || (e.size() != 2 && e.size() != 3))
            throw ConfigError("network.edges entries must be [a, b] or [a, b, conductance]");
        spec.edges.push_back({e.at(0).get<int>(), e.at(1).get<int>(),
                              e.size() == 3 ? e.at(2).get<double>() : 1.0});
    }
    for (const auto& b : n.at("boundary")) spec.boundary.push_back(b.get<int>());
    if (n.contains("positions"))
        for (const auto& p : n.at("positions"))
            spec.positions.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    if (n.contains("arcs"))
        for (auto it = n.at("arcs").begin(); it != n.at("arcs").end(); ++it)
            for (const auto& v : it.value())
                spec.arcs[it.key()].push_back(v.get<int>());
    return build_network(std::move(spec));
}

BoundaryFunction make_boundary(const Network& net, const json& spec, const std::string& where) {
    std::vector<double> bv(static_cast<size_t>(net.boundary_count()), 0.0);
    if (spec.is_number()) {
        std::fill(bv.begin(), bv.end(), spec.get<double>());
    } else if (spec.is_object()) {
        check_keys(spec, {"constant", "values", "arcs"}, where);
        if (spec.contains("constant") + spec.contains("values") + spec.contains("arcs") != 1)
            throw ConfigError(where + " needs exactly one of constant / values / arcs");
        if (spec.contains("constant")) {
            std::fill(bv.begin(), bv.end(), spec.at("constant").get<double>());
        } else if (spec.contains("values")) {
            auto vals = spec.at("values").get<std::vector<double>>();
            if (vals.size() != bv.size())
                throw ConfigError(where + ".values must have one entry per boundary vertex (" +
                                  std::to_string(bv.size()) + ")");
            bv = vals;
        } else {
            std::vector<char> covered(static_cast<size_t>(net.vertex_count()), 0);
            for (auto it = spec.at("arcs").begin(); it != spec.at("arcs").end(); ++it) {
                const auto* arc = net.arc(it.key());
                if (!arc) throw ConfigError(where + ": network has no arc \"" + it.key() + "\"");
                double c = it.value().get<double>();
                for (int v : *arc) covered[static_cast<size_t>(v)] = 1;
                for (int i = 0; i < net.boundary_count(); ++i)
                    if (std::count(arc->begin(), arc->end(),
                                   net.boundary()[static_cast<size_t>(i)]))
                        bv[static_cast<size_t>(i)] = c;
            }
            for (int b : net.boundary())
                if (!covered[static_cast<size_t>(b)])
                    throw ConfigError(where + ".arcs leaves boundary vertex " +
                                      std::to_string(b) + " uncovered");
        }
    } else {
        throw ConfigError(where + " must be a number or an object");
    }
    return harmonic_extension(net, bv);
}

BoundaryFunction boundary_or(const Network& net, const json& cfg, const std::string& key,
                             double fallback) {
    if (cfg.contains(key)) return make_boundary(net, cfg.at(key), key);
    return BoundaryFunction::constant(net, fallback);
}

RunParams run_params(const json& cfg, long default_replicas) {
    RunParams p;
    p.replicas = lnum(cfg, "replicas", default_replicas);
    p.seed = static_cast<uint64_t>(lnum(cfg, "seed", 1));
    p.workers = static_cast<int>(lnum(cfg, "workers", 0));
    p.sigma = num(cfg, "sigma", 4.0);
    if (p.replicas < 1) throw ConfigError("replicas must be positive");
    if (p.sigma <= 0) throw ConfigError("sigma must be positive");
    return p;
}

// --------------------------------------------------------------- manifest --

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

fs::path prepare_out(const json& cfg, const std::string& experiment) {
    fs::path out = cfg.contains("out") ? fs::path(cfg.at("out").get<std::string>())
                                       : fs::path("out") / experiment;
    fs::create_directories(out);
    std::string dump = cfg.dump(2);
    std::ofstream(out / "config.json") << dump << '\n';
    json manifest;
    manifest["schema_version"] = kSchemaVersion;
    manifest["experiment"] = experiment;
    manifest["gfflab_version"] = kVersion;
    manifest["seed"] = lnum(cfg, "seed", 1);
    manifest["replicas"] = cfg.contains("replicas") ? cfg.at("replicas").get<long>() : -1;
    manifest["workers"] = lnum(cfg, "workers", 0);
    char hex[32];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a(dump)));
    manifest["config_hash"] = std::string("fnv1a:") + hex;
    std::ofstream(out / "manifest.json") << manifest.dump(2) << '\n';
    return out;
}

int finish(const fs::path& out, const std::vector<TestReport>& reports) {
    std::ofstream csv(out / "report.csv");
    write_reports_csv(csv, reports);
    bool ok = true;
    for (const auto& r : reports) {
        print_report(std::cout, r);
        ok = ok && r.passed();
    }
    std::cout << (ok ? "RESULT: PASS" : "RESULT: FAIL") << '\n';
    return ok ? 0 : 1;
}

// ------------------------------------------------------------ experiments --

const std::set<std::string> kCommonKeys = {"schema_version", "experiment", "seed",    "replicas",
                                           "workers",        "out",        "preset",  "network",
                                           "domain",         "grid",       "sigma",   "u"};

std::set<std::string> with(std::set<std::string> keys, std::initializer_list<const char*> more) {
    for (const char* k : more) keys.insert(k);
    return keys;
}

void validate_common(const json& cfg, const std::string& experiment,
                     std::initializer_list<const char*> extra) {
    check_keys(cfg, with(kCommonKeys, extra), "config");
    if (cfg.contains("schema_version") && cfg.at("schema_version").get<int>() != kSchemaVersion)
        throw ConfigError("unsupported schema_version (expected " +
                          std::to_string(kSchemaVersion) + ")");
    if (cfg.contains("experiment") && cfg.at("experiment").get<std::string>() != experiment)
        throw ConfigError("config experiment \"" + cfg.at("experiment").get<std::string>() +
                          "\" does not match subcommand \"" + experiment + "\"");
}

int cmd_sample_gff(const json& cfg) {
    validate_common(cfg, "sample-gff", {"m"});
    Network net = make_network(cfg);
    BoundaryFunction u = boundary_or(net, cfg, "u", 0.0);
    RunParams p = run_params(cfg, 1);
    int m = static_cast<int>(lnum(cfg, "m", 0));
    fs::path out = prepare_out(cfg, "sample-gff");

    std::optional<RefinedNetwork> ref;
    if (m > 0) ref.emplace(net, m);
    for (long r = 0; r < p.replicas; ++r) {
        RngStream rng(p.seed, static_cast<uint64_t>(r), 0x5A);
        FieldSample f = sample_discrete_gff(net, u, rng);
        if (ref) {
            RngStream bridge(p.seed, static_cast<uint64_t>(r), 0x5B);
            f = interpolate_field(*ref, f, bridge);
        }
        std::ofstream os(out / ("field_" + std::to_string(r) + ".csv"));
        write_field_csv(os, f);
    }
    std::cout << "wrote " << p.replicas << " field sample(s) to " << out << '\n';
    return 0;
}

int cmd_sample_soup(const json& cfg) {
    validate_common(cfg, "sample-soup", {"alpha", "dump_limit"});
    Network net = make_network(cfg);
    RunParams p = run_params(cfg, 1);
    double alpha = num(cfg, "alpha", 0.5);
    if (alpha <= 0) throw ConfigError("alpha must be positive");
    long dump_limit = lnum(cfg, "dump_limit", 8);
    fs::path out = prepare_out(cfg, "sample-soup");

    LoopSoupSampler sampler(net);
    double total = 0;
    for (long r = 0; r < p.replicas; ++r) {
        RngStream rng(p.seed, static_cast<uint64_t>(r), 0x50);
        SoupSample soup = sampler.sample(alpha, rng);
        total += static_cast<double>(soup.trajectories.size());
        if (r < dump_limit) {
            std::ofstream os(out / ("trajectories_" + std::to_string(r) + ".csv"));
            write_trajectories_csv(os, soup);
        }
    }
    json summary;
    summary["mean_loop_count"] = total / static_cast<double>(p.replicas);
    summary["expected_mass"] = alpha * total_loop_mass(net);
    std::ofstream(out / "summary.json") << summary.dump(2) << '\n';
    std::cout << "mean nontrivial loop count: " << total / static_cast<double>(p.replicas)
              << " (intensity x total mass = " << alpha * total_loop_mass(net) << ")\n";
    return 0;
}

int cmd_fps(const json& cfg) {
    validate_common(cfg, "fps", {"a", "m", "exact_edges", "deterministic"});
    Network net = make_network(cfg);
    BoundaryFunction u = boundary_or(net, cfg, "u", 0.0);
    RunParams p = run_params(cfg, 1);
    double a = num(cfg, "a", 0.0);
    bool exact = cfg.contains("exact_edges") ? cfg.at("exact_edges").get<bool>() : true;
    bool det = cfg.contains("deterministic") && cfg.at("deterministic").get<bool>();
    int m = static_cast<int>(lnum(cfg, "m", 0));
    fs::path out = prepare_out(cfg, "fps");

    std::optional<RefinedNetwork> ref;
    if (m > 0) ref.emplace(net, m);
    const Network& work = ref ? ref->net() : net;
    BoundaryFunction uw = ref ? harmonic_extension(work, u.boundary_values) : u;
    for (long r = 0; r < p.replicas; ++r) {
        RngStream rng(p.seed, static_cast<uint64_t>(r), 0x51);
        FieldSample f = sample_discrete_gff(work, uw, rng);
        MetricSubset fps = first_passage_set(f, a, exact);
        std::ofstream js(out / ("fps_" + std::to_string(r) + ".json"));
        write_subset_json(js, fps);
        if (work.has_positions()) {
            std::ofstream svg(out / ("fps_" + std::to_string(r) + ".svg"));
            render_svg(svg, work, &fps, nullptr, det);
        }
    }
    std::cout << "wrote " << p.replicas << " first-passage sample(s) to " << out << '\n';
    return 0;
}

int cmd_interface(const json& cfg) {
    validate_common(cfg, "interface", {"a", "deterministic"});
    Network net = make_network(cfg);
    if (!net.arc("B1") || !net.arc("B2"))
        throw ConfigError("interface needs a domain/grid with a boundary split");
    BoundaryFunction u;
    if (cfg.contains("u")) {
        u = make_boundary(net, cfg.at("u"), "u");
    } else {
        json arcs;
        arcs["arcs"]["B1"] = kLambda;
        arcs["arcs"]["B2"] = -kLambda;
        u = make_boundary(net, arcs, "u");
    }
    RunParams p = run_params(cfg, 1);
    double a = num(cfg, "a", kLambda);
    bool det = cfg.contains("deterministic") && cfg.at("deterministic").get<bool>();
    fs::path out = prepare_out(cfg, "interface");

    for (long r = 0; r < p.replicas; ++r) {
        RngStream rng(p.seed, static_cast<uint64_t>(r), 0x52);
        FieldSample f = sample_discrete_gff(net, u, rng);
        MetricSubset fps = first_passage_set(f, a, true);
        InterfaceCurve curve = extract_interface(net, fps);
        std::ofstream csv(out / ("interface_" + std::to_string(r) + ".csv"));
        write_interface_csv(csv, curve);
        std::ofstream svg(out / ("interface_" + std::to_string(r) + ".svg"));
        render_svg(svg, net, &fps, &curve, det);
    }
    std::cout << "wrote " << p.replicas << " interface sample(s) to " << out << '\n';
    return 0;
}

int cmd_verify_iso(const json& cfg) {
    validate_common(cfg, "verify-iso", {});
    Network net = make_network(cfg);
    BoundaryFunction u = boundary_or(net, cfg, "u", 1.0);
    RunParams p = run_params(cfg, 100000);
    fs::path out = prepare_out(cfg, "verify-iso");
    return finish(out, {test_isomorphism_discrete(net, u, p)});
}

int cmd_cluster_fps(const json& cfg) {
    validate_common(cfg, "cluster-fps", {"alpha", "m"});
    double alpha = num(cfg, "alpha", 0.5);
    if (std::fabs(alpha - 0.5) > 1e-12)
        throw ConfigError("signed isomorphism stated only at alpha = 1/2");
    Network net = make_network(cfg);
    BoundaryFunction u = boundary_or(net, cfg, "u", 1.0);
    RunParams p = run_params(cfg, 10000);
    int m = static_cast<int>(lnum(cfg, "m", 0));
    fs::path out = prepare_out(cfg, "cluster-fps");
    return finish(out, {test_cluster_fps_identity(net, u, m, p)});
}

int cmd_wick(const json& cfg) {
    validate_common(cfg, "wick", {"test_functions"});
    Network net = make_network(cfg);
    BoundaryFunction u = boundary_or(net, cfg, "u", 1.0);
    RunParams p = run_params(cfg, 100000);
    std::vector<std::vector<double>> fns;
    const json& tf = cfg.contains("test_functions") ? cfg.at("test_functions") : json(3);
    if (tf.is_number_integer()) {
        // n pseudo-random test functions drawn from the master seed.
        RngStream rng(p.seed, 0, 0x53);
        for (long q = 0; q < tf.get<long>(); ++q) {
            std::vector<double> f(static_cast<size_t>(net.vertex_count()), 0.0);
            for (int v : net.interior())
                f[static_cast<size_t>(v)] = 2.0 * rng.uniform01() - 1.0;
            fns.push_back(std::move(f));
        }
    } else {
        for (const auto& row : tf) {
            auto f = row.get<std::vector<double>>();
            if (f.size() != static_cast<size_t>(net.vertex_count()))
                throw ConfigError("test_functions rows need one entry per vertex");
            fns.push_back(std::move(f));
        }
    }
    fs::path out = prepare_out(cfg, "wick");
    return finish(out, {test_wick_moments(net, u, fns, p)});
}

int cmd_massive(const json& cfg) {
    validate_common(cfg, "massive", {"chi"});
    Network net = make_network(cfg);
    RunParams p = run_params(cfg, 100000);
    std::vector<double> chi(static_cast<size_t>(net.interior_count()), 1.0);
    if (cfg.contains("chi")) {
        if (cfg.at("chi").is_number())
            std::fill(chi.begin(), chi.end(), cfg.at("chi").get<double>());
        else
            chi = cfg.at("chi").get<std::vector<double>>();
    }
    fs::path out = prepare_out(cfg, "massive");
    return finish(out, {test_massive_reweighting(net, chi, p)});
}

int cmd_perc_curve(const json& cfg) {
    validate_common(cfg, "perc-curve", {"a", "box_sizes", "thetas"});
    RunParams p = run_params(cfg, 10000);
    double a = num(cfg, "a", 0.0);
    std::vector<int> ns = cfg.contains("box_sizes")
                              ? cfg.at("box_sizes").get<std::vector<int>>()
                              : std::vector<int>{8, 16, 32};
    std::vector<double> thetas;
    if (cfg.contains("thetas"))
        thetas = cfg.at("thetas").get<std::vector<double>>();
    else
        for (int t = 1; t <= 9; ++t) thetas.push_back(0.1 * t);
    fs::path out = prepare_out(cfg, "perc-curve");
    auto [rows, rep] = percolation_curve(ns, a, thetas, p);
    std::ofstream csv(out / "perc.csv");
    csv << "half_width,theta,probability,stderr\n";
    for (const auto& r : rows)
        csv << r.half_width << ',' << r.theta << ',' << r.probability << ',' << r.stderror << '\n';
    return finish(out, {rep});
}

std::vector<char> coord_box(const Network& net, const json& b, const std::string& where) {
    check_keys(b, {"xmin", "xmax", "ymin", "ymax"}, where);
    std::vector<char> mask(static_cast<size_t>(net.vertex_count()), 0);
    for (int v = 0; v < net.vertex_count(); ++v) {
        const auto& p = net.position(v);
        if (p[0] >= num(b, "xmin", -1e300) && p[0] <= num(b, "xmax", 1e300) &&
            p[1] >= num(b, "ymin", -1e300) && p[1] <= num(b, "ymax", 1e300))
            mask[static_cast<size_t>(v)] = 1;
    }
    return mask;
}

int cmd_fkg(const json& cfg) {
    validate_common(cfg, "fkg", {"box1", "box2"});
    Network net = make_network(cfg);
    BoundaryFunction u = boundary_or(net, cfg, "u", 0.0);
    RunParams p = run_params(cfg, 100000);
    if (!cfg.contains("box1") || !cfg.contains("box2"))
        throw ConfigError("fkg needs box1 and box2 coordinate ranges");
    std::vector<char> b1 = coord_box(net, cfg.at("box1"), "box1");
    std::vector<char> b2 = coord_box(net, cfg.at("box2"), "box2");
    fs::path out = prepare_out(cfg, "fkg");
    return finish(out, {test_fkg(net, u, b1, b2, p)});
}

int cmd_local_finiteness(const json& cfg) {
    validate_common(cfg, "local-finiteness",
                    {"disk_radius", "levels", "a", "u_const", "epsilons"});
    RunParams p = run_params(cfg, 2000);
    double radius = num(cfg, "disk_radius", 1.0);
    double a = num(cfg, "a", 0.5);
    double u_const = num(cfg, "u_const", 0.0);
    std::vector<int> levels = cfg.contains("levels") ? cfg.at("levels").get<std::vector<int>>()
                                                     : std::vector<int>{3, 4};
    std::vector<double> eps = cfg.contains("epsilons")
                                  ? cfg.at("epsilons").get<std::vector<double>>()
                                  : std::vector<double>{0.1, 0.2};
    fs::path out = prepare_out(cfg, "local-finiteness");
    auto [rows, rep] = local_finiteness_stats(radius, levels, a, u_const, eps, p);
    std::ofstream csv(out / "local_finiteness.csv");
    csv << "level,epsilon,mean_count,q99\n";
    for (const auto& r : rows)
        csv << r.level << ',' << r.epsilon << ',' << r.mean_count << ',' << r.q99 << '\n';
    return finish(out, {rep});
}

int cmd_coupling(const json& cfg) {
    validate_common(cfg, "coupling", {"u_star", "eta_samples", "delta_draws"});
    Network net = make_network(cfg);
    if (!cfg.contains("u") || !cfg.contains("u_star"))
        throw ConfigError("coupling needs boundary data u and u_star");
    BoundaryFunction u = make_boundary(net, cfg.at("u"), "u");
    BoundaryFunction us = make_boundary(net, cfg.at("u_star"), "u_star");
    RunParams p = run_params(cfg, 200);
    long etas = lnum(cfg, "eta_samples", p.replicas);
    long draws = lnum(cfg, "delta_draws", 500);
    fs::path out = prepare_out(cfg, "coupling");
    return finish(out, {level_line_coupling(net, u, us, etas, draws, p)});
}

int cmd_refine_study(const json& cfg) {
    validate_common(cfg, "refine-study", {"kind", "a", "levels"});
    RunParams p = run_params(cfg, 200);
    std::string kind = cfg.contains("kind") ? cfg.at("kind").get<std::string>() : "fps";
    std::vector<int> levels = cfg.contains("levels") ? cfg.at("levels").get<std::vector<int>>()
                                                     : std::vector<int>{0, 1, 2};
    fs::path out = prepare_out(cfg, "refine-study");
    std::vector<RefineRow> rows;
    TestReport rep;
    if (kind == "fps") {
        Network net = make_network(cfg);
        BoundaryFunction u = boundary_or(net, cfg, "u", 1.0);
        std::tie(rows, rep) = refinement_study(net, u, num(cfg, "a", 0.0), levels, p);
    } else if (kind == "interface") {
        if (!cfg.contains("domain"))
            throw ConfigError("interface refine-study needs a split domain");
        const json& d = cfg.at("domain");
        check_keys(d, {"kind", "size", "box_half", "level", "split"}, "domain");
        DomainSpec spec;
        std::string dk = d.contains("kind") ? d.at("kind").get<std::string>() : "square";
        spec.kind = dk == "disk" ? DomainSpec::Kind::disk : DomainSpec::Kind::square;
        spec.size = num(d, "size", 1.0);
        spec.split_axis = split_of(d, "domain");
        if (!spec.split_axis) throw ConfigError("interface refine-study needs domain.split");
        std::tie(rows, rep) = interface_refinement_study(spec, levels, p);
    } else {
        throw ConfigError("refine-study kind must be fps or interface");
    }
    std::ofstream csv(out / "refine.csv");
    csv << "level,median_hausdorff,median_stat_gap\n";
    for (const auto& r : rows)
        csv << r.level << ',' << r.median_hausdorff << ',' << r.median_stat_gap << '\n';
    return finish(out, {rep});
}

// -------------------------------------------------------------- dispatch --

int dispatch(const std::string& cmd, const json& cfg) {
    if (cmd == "sample-gff") return cmd_sample_gff(cfg);
    if (cmd == "sample-soup") return cmd_sample_soup(cfg);
    if (cmd == "fps") return cmd_fps(cfg);
    if (cmd == "interface") return cmd_interface(cfg);
    if (cmd == "verify-iso") return cmd_verify_iso(cfg);
    if (cmd == "cluster-fps") return cmd_cluster_fps(cfg);
    if (cmd == "wick") return cmd_wick(cfg);
    if (cmd == "massive") return cmd_massive(cfg);
    if (cmd == "perc-curve") return cmd_perc_curve(cfg);
    if (cmd == "fkg") return cmd_fkg(cfg);
    if (cmd == "local-finiteness") return cmd_local_finiteness(cfg);
    if (cmd == "coupling") return cmd_coupling(cfg);
    if (cmd == "refine-study") return cmd_refine_study(cfg);
    throw ConfigError("unknown experiment \"" + cmd + "\"");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gfflab: field, soup and first-passage experiments on electrical networks"};
    app.require_subcommand(1);

    struct Common {
        std::string config;
        std::optional<long> seed, replicas, workers;
        std::optional<std::string> out;
        std::optional<double> alpha, a;
        std::optional<int> m;
        bool deterministic = false;
    };
    std::map<std::string, Common> opts;

    const std::vector<std::string> commands = {
        "sample-gff", "sample-soup", "fps",       "interface",        "verify-iso",
        "cluster-fps", "wick",       "massive",   "perc-curve",       "fkg",
        "local-finiteness", "coupling", "refine-study", "run"};
    for (const auto& name : commands) {
        auto* sub = app.add_subcommand(name);
        auto& o = opts[name];
        if (name == "run")
            sub->add_option("config", o.config, "experiment config file")->required();
        else
            sub->add_option("--config", o.config, "experiment config file");
        sub->add_option("--seed", o.seed, "master seed");
        sub->add_option("--replicas", o.replicas, "number of replicas");
        sub->add_option("--workers", o.workers, "worker thread count");
        sub->add_option("--out", o.out, "output directory");
        if (name == "sample-soup" || name == "cluster-fps")
            sub->add_option("--alpha", o.alpha, "loop-soup intensity");
        if (name == "fps" || name == "interface" || name == "perc-curve" ||
            name == "refine-study")
            sub->add_option("--level", o.a, "flood level a");
        if (name == "sample-gff" || name == "fps" || name == "cluster-fps")
            sub->add_option("--m", o.m, "dyadic refinement level");
        if (name == "fps" || name == "interface")
            sub->add_flag("--deterministic", o.deterministic, "omit SVG timestamp metadata");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    std::string cmd = app.get_subcommands().front()->get_name();
    const Common& o = opts[cmd];
    try {
        json cfg = o.config.empty() ? json::object() : load_config(o.config);
        if (cmd == "run") {
            if (!cfg.contains("experiment"))
                throw ConfigError("run config needs an \"experiment\" key");
            cmd = cfg.at("experiment").get<std::string>();
        }
        if (o.seed) cfg["seed"] = *o.seed;
        if (o.replicas) cfg["replicas"] = *o.replicas;
        if (o.workers) cfg["workers"] = *o.workers;
        if (o.out) cfg["out"] = *o.out;
        if (o.alpha) cfg["alpha"] = *o.alpha;
        if (o.a) cfg["a"] = *o.a;
        if (o.m) cfg["m"] = *o.m;
        if (o.deterministic) cfg["deterministic"] = true;
        return dispatch(cmd, cfg);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
