#include "varsample/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <thread>

#include "varsample/complexes.hpp"
#include "varsample/reach.hpp"
#include "varsample/sample.hpp"

namespace vs {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct RunConfig {
    std::string input_path;
    std::string output_dir = ".";
    std::uint64_t seed = 0;
    int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    bool canonical_output = false;
    bool require_certificate = false;
    bool emit_obj = false;

    TrackSettings track;

    std::optional<double> epsilon;
    double epsilon0 = 0.0;
    std::optional<double> delta_override;
    std::optional<double> b2_override;
    std::optional<double> wfs_override;
    std::optional<int> dim_override;
    int max_dim = 2;
    std::string complex_kind = "vr";
    std::string coeff = "gf2";
    std::vector<std::string> var_order;
};

struct PhaseClock {
    std::chrono::steady_clock::time_point wall = std::chrono::steady_clock::now();
    std::clock_t cpu = std::clock();

    // returns (wall seconds, cpu seconds) since construction or last lap
    std::pair<double, double> lap() {
        auto now_wall = std::chrono::steady_clock::now();
        auto now_cpu = std::clock();
        std::pair<double, double> out{
            std::chrono::duration<double>(now_wall - wall).count(),
            static_cast<double>(now_cpu - cpu) / CLOCKS_PER_SEC};
        wall = now_wall;
        cpu = now_cpu;
        return out;
    }
};

PolySystem load_system(const RunConfig& cfg) {
    std::ifstream in(cfg.input_path);
    if (!in) throw input_error("cannot open input file: " + cfg.input_path);
    std::stringstream buf;
    buf << in.rdbuf();
    std::optional<std::vector<std::string>> order;
    if (!cfg.var_order.empty()) order = cfg.var_order;
    return parse_system(buf.str(), order);
}

void write_file(const fs::path& path, const std::string& contents) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot write output file: " + path.string());
    out << contents;
}

void write_json_file(const fs::path& path, const json& j) {
    write_file(path, j.dump(2) + "\n");
}

json sample_json(const Sample& S, bool canonical, const json& timing) {
    json j;
    j["schema"] = "varsample.sample.v1";
    j["n"] = S.n;
    j["var_names"] = S.var_names;
    j["delta"] = S.delta;
    if (S.epsilon_target) j["epsilon"] = *S.epsilon_target;
    else j["epsilon"] = nullptr;
    if (S.epsilon_certified) j["epsilon_certified"] = *S.epsilon_certified;
    else j["epsilon_certified"] = nullptr;
    j["seed"] = S.seed;
    if (S.b2_used) j["b2"] = *S.b2_used;
    else j["b2"] = nullptr;
    if (S.wfs_declared) j["wfs_declared"] = *S.wfs_declared;
    else j["wfs_declared"] = nullptr;
    j["wfs_is_b2_fallback"] = S.wfs_is_fallback;
    j["basic_count"] = S.basic_count;
    j["extra_count"] = S.extra_count;
    j["total_count"] = static_cast<long long>(S.points.size());
    j["paths_tracked"] = S.paths_tracked;
    j["generic_paths"] = S.generic_paths;
    json fams = json::array();
    for (const auto& f : S.families) {
        json jf;
        jf["kind"] = f.extra ? "extra" : "basic";
        jf["k"] = f.k;
        jf["t"] = f.t;
        jf["slices"] = f.slices;
        jf["start_size"] = f.start_size;
        jf["paths"] = f.paths;
        jf["generic_paths"] = f.generic_paths;
        fams.push_back(jf);
    }
    j["families"] = fams;
    constexpr std::size_t kMaxInlinePoints = 100000;
    if (S.points.size() <= kMaxInlinePoints) {
        json pts = json::array();
        for (const auto& p : S.points) {
            json row = json::array();
            for (int i = 0; i < p.size(); ++i) row.push_back(p[i]);
            pts.push_back(row);
        }
        j["points"] = pts;
        j["points_omitted"] = false;
    } else {
        j["points_omitted"] = true;  // see sample.csv for the cloud
    }
    if (!canonical) j["timing"] = timing;
    return j;
}

json bottleneck_json(const BottleneckReport& rep) {
    json j;
    j["schema"] = "varsample.bottlenecks.v1";
    j["finite"] = rep.finite;
    if (rep.b2) j["b2"] = *rep.b2;
    else j["b2"] = nullptr;
    if (rep.min_pair_distance) j["min_pair_distance"] = *rep.min_pair_distance;
    else j["min_pair_distance"] = nullptr;
    if (rep.wfs_declared) j["wfs_declared"] = *rep.wfs_declared;
    else j["wfs_declared"] = nullptr;
    j["wfs_is_b2_fallback"] = rep.wfs_is_fallback;
    j["paths_tracked"] = rep.paths_tracked;
    j["diagnosis"] = rep.diagnosis;
    json pairs = json::array();
    for (const auto& p : rep.pairs) {
        json jp;
        json x = json::array(), y = json::array();
        for (int i = 0; i < p.x.size(); ++i) x.push_back(p.x[i]);
        for (int i = 0; i < p.y.size(); ++i) y.push_back(p.y[i]);
        jp["x"] = x;
        jp["y"] = y;
        jp["radius"] = p.radius;
        jp["isolated"] = p.isolated;
        pairs.push_back(jp);
    }
    j["pairs"] = pairs;
    return j;
}

std::string plot_script() {
    return R"(#!/usr/bin/env python3
"""Scatter plot of sample.csv (first two or three coordinates)."""
import csv, sys

path = sys.argv[1] if len(sys.argv) > 1 else "sample.csv"
with open(path) as fh:
    rows = list(csv.reader(fh))
head, data = rows[0], rows[1:]
ncoord = len(head) - 1
xs = [[float(r[i]) for r in data] for i in range(min(3, ncoord))]

import matplotlib.pyplot as plt
fig = plt.figure()
if len(xs) >= 3:
    ax = fig.add_subplot(projection="3d")
    ax.scatter(xs[0], xs[1], xs[2], s=2)
else:
    ax = fig.add_subplot()
    ax.scatter(xs[0], xs[1], s=2)
    ax.set_aspect("equal")
ax.set_xlabel(head[0]); ax.set_ylabel(head[1])
plt.savefig("sample.png", dpi=160)
print("wrote sample.png")
)";
}

TotalSampleOptions make_opts(const RunConfig& cfg) {
    TotalSampleOptions opts;
    opts.delta_override = cfg.delta_override;
    opts.b2_override = cfg.b2_override;
    opts.wfs_override = cfg.wfs_override;
    opts.dim_override = cfg.dim_override;
    return opts;
}

int cmd_sample(RunConfig& cfg) {
    PolySystem F = load_system(cfg);
    fs::create_directories(cfg.output_dir);
    PhaseClock clock;

    // bottleneck phase timed separately from sampling ("a+b")
    Box box = bounding_box(F, cfg.track);
    TotalSampleOptions opts = make_opts(cfg);
    opts.box_override = box;
    if (!opts.b2_override && !opts.delta_override) {
        BottleneckReport rep = bottlenecks(F, cfg.track, box, cfg.wfs_override);
        if (!rep.finite)
            throw numeric_error("bottleneck locus not finite (" + rep.diagnosis +
                                "); supply --b2-override to proceed");
        opts.b2_override = rep.b2;
        if (!opts.wfs_override) opts.wfs_override = rep.wfs_declared;
    }
    auto [wall_a, cpu_a] = clock.lap();

    double eps = cfg.epsilon.value_or(std::numeric_limits<double>::infinity());
    if (!cfg.epsilon && !cfg.delta_override)
        throw input_error("sample: --epsilon is required unless --delta is given");
    Sample S = total_sample(F, eps, cfg.track, opts);
    if (!cfg.epsilon) {
        S.epsilon_target.reset();
        S.epsilon_certified.reset();
    }
    auto [wall_b, cpu_b] = clock.lap();

    json timing;
    timing["bottlenecks_wall_s"] = wall_a;
    timing["bottlenecks_cpu_s"] = cpu_a;
    timing["sampling_wall_s"] = wall_b;
    timing["sampling_cpu_s"] = cpu_b;

    {
        std::ofstream csv(fs::path(cfg.output_dir) / "sample.csv");
        write_sample_csv(S, csv);
    }
    write_json_file(fs::path(cfg.output_dir) / "sample.json",
                    sample_json(S, cfg.canonical_output, timing));
    if (cfg.emit_obj) {
        std::ofstream obj(fs::path(cfg.output_dir) / "sample.obj");
        write_sample_obj(S, obj);
    }
    write_file(fs::path(cfg.output_dir) / "plot_sample.py", plot_script());

    std::cout << "sample: " << S.points.size() << " points (basic " << S.basic_count
              << ", extra " << S.extra_count << "), delta " << S.delta << ", paths "
              << S.paths_tracked << "\n";
    if (cfg.require_certificate && !S.epsilon_certified)
        throw certificate_error("sample is not certified epsilon-dense");
    return 0;
}

int cmd_bottlenecks(RunConfig& cfg) {
    PolySystem F = load_system(cfg);
    fs::create_directories(cfg.output_dir);
    BottleneckReport rep = bottlenecks(F, cfg.track, std::nullopt, cfg.wfs_override);
    write_json_file(fs::path(cfg.output_dir) / "bottlenecks.json", bottleneck_json(rep));
    if (rep.finite)
        std::cout << "b2 = " << *rep.b2 << " (" << rep.pairs.size() << " pairs, "
                  << rep.paths_tracked << " paths)\n";
    else
        std::cout << "bottleneck locus not finite: " << rep.diagnosis << "\n";
    return 0;
}

int cmd_reach(RunConfig& cfg) {
    PolySystem F = load_system(cfg);
    fs::create_directories(cfg.output_dir);
    if (cfg.epsilon0 <= 0) throw input_error("reach: --epsilon0 must be positive");
    ReachEstimate est = reach_lower_bound(F, cfg.epsilon0, cfg.track, make_opts(cfg));

    json j;
    j["schema"] = "varsample.reach.v1";
    j["m"] = est.m;
    j["epsilon"] = est.epsilon;
    j["lower_bound"] = est.lower_bound;
    j["D"] = est.D;
    j["iterations"] = est.iterations;
    j["sample_certified"] = est.sample_certified;
    j["sample_size"] = static_cast<long long>(est.sample.points.size());
    j["basic_count"] = est.sample.basic_count;
    j["extra_count"] = est.sample.extra_count;
    j["paths_tracked"] = est.sample.paths_tracked;
    j["delta"] = est.sample.delta;
    json pts = json::array();
    for (const auto& [e, h] : est.per_point) {
        json row = json::array();
        for (int i = 0; i < e.size(); ++i) row.push_back(e[i]);
        row.push_back(h);
        pts.push_back(row);
    }
    j["per_point"] = pts;
    write_json_file(fs::path(cfg.output_dir) / "reach.json", j);

    std::cout << "tau_X > " << est.lower_bound << "\n";
    return 0;
}

int cmd_homology(RunConfig& cfg) {
    PolySystem F = load_system(cfg);
    fs::create_directories(cfg.output_dir);
    if (!cfg.epsilon || *cfg.epsilon <= 0)
        throw input_error("homology: --epsilon must be positive");
    const double eps = *cfg.epsilon;
    const bool use_cech = cfg.complex_kind == "cech";
    const bool rational = cfg.coeff == "rational";

    // cech certificates need an (eps/2)-sample; the vr path samples at eps
    double sample_eps = use_cech ? eps / 2.0 : eps;
    Sample S = total_sample(F, sample_eps, cfg.track, make_opts(cfg));

    BettiReport rep;
    std::optional<double> min_eta;
    if (use_cech) {
        SimplicialComplex K = build_cech(S.points, eps, cfg.max_dim);
        rep = betti(K, cfg.max_dim - 1, rational);
        try {
            SphereSplit split = split_on_sphere(F);
            for (const auto& p : S.points) {
                double h = eta(split.forms, p / p.norm());
                min_eta = min_eta ? std::min(*min_eta, h) : h;
            }
        } catch (const input_error&) {
            // no local-reach bound available for this input class
        }
        rep = certify(std::move(rep), eps, S.wfs_declared.value_or(0.0), CertifyMode::reach,
                      min_eta, S.epsilon_certified.has_value());
    } else {
        SimplicialComplex K = build_modified_vr(S.points, eps);
        rep = betti(K, 1, rational);
        double wfs = S.wfs_declared.value_or(0.0);
        rep = certify(std::move(rep), eps, wfs, CertifyMode::wfs);
    }

    if (rep.certificate == Certificate::none)
        std::cerr << "warning: homology certificate not established (" << rep.inequality
                  << ")\n";

    json j;
    j["schema"] = "varsample.homology.v1";
    j["complex"] = use_cech ? "cech" : "modified_vr";
    j["epsilon"] = eps;
    j["coeff"] = rep.coeff_field;
    j["betti"] = rep.betti;
    j["certificate"] = rep.certificate == Certificate::none
                           ? "none"
                           : (rep.certificate == Certificate::wfs_based ? "wfs_based"
                                                                        : "reach_based");
    j["inequality"] = rep.inequality;
    j["inequality_holds"] = rep.inequality_holds;
    if (S.wfs_declared) j["wfs_declared"] = *S.wfs_declared;
    else j["wfs_declared"] = nullptr;
    j["wfs_is_b2_fallback"] = S.wfs_is_fallback;
    if (min_eta) j["min_eta"] = *min_eta;
    j["sample_size"] = static_cast<long long>(S.points.size());
    j["sample_epsilon"] = sample_eps;
    if (S.epsilon_certified) j["sample_certified"] = true;
    else j["sample_certified"] = false;
    write_json_file(fs::path(cfg.output_dir) / "homology.json", j);

    std::cout << "betti =";
    for (auto b : rep.betti) std::cout << " " << b;
    std::cout << " (certificate: " << j["certificate"].get<std::string>() << ")\n";
    if (cfg.require_certificate && rep.certificate == Certificate::none)
        throw certificate_error("homology certificate not established");
    return 0;
}

int cmd_solve(RunConfig& cfg) {
    PolySystem F = load_system(cfg);
    fs::create_directories(cfg.output_dir);
    SolutionSet S = solve_square(F, cfg.track);
    json j;
    j["schema"] = "varsample.solve.v1";
    j["paths_tracked"] = S.paths_tracked;
    j["converged"] = static_cast<long long>(S.points.size());
    json statuses = json::array();
    for (auto st : S.path_status) {
        switch (st) {
            case PathStatus::converged: statuses.push_back("converged"); break;
            case PathStatus::diverged: statuses.push_back("diverged"); break;
            case PathStatus::singular_endpoint: statuses.push_back("singular_endpoint"); break;
            case PathStatus::truncated: statuses.push_back("truncated"); break;
        }
    }
    j["path_status"] = statuses;
    json pts = json::array();
    for (std::size_t i = 0; i < S.points.size(); ++i) {
        json p;
        json re = json::array(), im = json::array();
        for (int k = 0; k < S.points[i].size(); ++k) {
            re.push_back(S.points[i][k].real());
            im.push_back(S.points[i][k].imag());
        }
        p["re"] = re;
        p["im"] = im;
        p["residual"] = S.residuals[i];
        p["multiplicity"] = S.multiplicity[i];
        pts.push_back(p);
    }
    j["points"] = pts;
    write_json_file(fs::path(cfg.output_dir) / "solutions.json", j);
    std::cout << "converged " << S.points.size() << " of " << S.paths_tracked << " paths\n";
    return 0;
}

void apply_env_config(RunConfig& cfg) {
    const char* path = std::getenv("VARSAMPLE_CONFIG");
    if (!path || !*path) return;
    std::ifstream in(path);
    if (!in) throw input_error(std::string("VARSAMPLE_CONFIG points to an unreadable file: ") + path);
    json j = json::parse(in, nullptr, true, true);
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("workers")) cfg.workers = j["workers"].get<int>();
    if (j.contains("newton_tol")) cfg.track.newton_tol = j["newton_tol"].get<double>();
    if (j.contains("real_tol")) cfg.track.real_tol = j["real_tol"].get<double>();
    if (j.contains("dedup_tol")) cfg.track.dedup_tol = j["dedup_tol"].get<double>();
    if (j.contains("step_init")) cfg.track.step_init = j["step_init"].get<double>();
    if (j.contains("step_min")) cfg.track.step_min = j["step_min"].get<double>();
    if (j.contains("step_max")) cfg.track.step_max = j["step_max"].get<double>();
    if (j.contains("max_steps")) cfg.track.max_steps = j["max_steps"].get<int>();
    if (j.contains("max_paths")) cfg.track.max_paths = j["max_paths"].get<long long>();
    if (j.contains("endgame_t")) cfg.track.endgame_t = j["endgame_t"].get<double>();
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    RunConfig cfg;

    CLI::App app{"varsample: dense sampling, bottlenecks, reach bounds and homology of "
                 "smooth compact real algebraic varieties"};
    app.require_subcommand(1);

    try {
        apply_env_config(cfg);
    } catch (const std::exception& e) {
        std::cout << json{{"error", e.what()}, {"kind", "input"}}.dump() << "\n";
        return 2;
    }

    auto add_common = [&](CLI::App* sub, bool needs_input = true) {
        if (needs_input)
            sub->add_option("input", cfg.input_path, "polynomial system file")->required();
        sub->add_option("--seed", cfg.seed, "run seed (determines all randomness)");
        sub->add_option("--workers", cfg.workers, "worker pool size")->check(CLI::PositiveNumber);
        sub->add_option("--output-dir,-o", cfg.output_dir, "output directory");
        sub->add_flag("--canonical-output", cfg.canonical_output,
                      "omit timing fields for byte-identical outputs");
        sub->add_option("--vars", cfg.var_order, "explicit variable order (comma separated)")
            ->delimiter(',');
        sub->add_option("--newton-tol", cfg.track.newton_tol, "Newton corrector tolerance");
        sub->add_option("--real-tol", cfg.track.real_tol, "imaginary-part threshold");
        sub->add_option("--dedup-tol", cfg.track.dedup_tol, "point dedup tolerance");
        sub->add_option("--max-paths", cfg.track.max_paths, "path budget for one solve");
        sub->add_option("--max-steps", cfg.track.max_steps, "step cap per path");
    };

    CLI::App* sample = app.add_subcommand("sample", "certified epsilon-dense sample");
    add_common(sample);
    double eps_val = 0.0, delta_val = 0.0, b2_val = 0.0, wfs_val = 0.0;
    int dim_val = 0;
    sample->add_option("--epsilon", eps_val, "target density");
    sample->add_option("--delta", delta_val, "grid size override");
    sample->add_option("--b2-override", b2_val, "declared narrowest bottleneck radius");
    sample->add_option("--wfs-override", wfs_val, "declared weak feature size");
    sample->add_option("--dim", dim_val, "variety dimension override");
    sample->add_flag("--obj", cfg.emit_obj, "also write sample.obj");
    sample->add_flag("--require-certificate", cfg.require_certificate,
                     "exit 4 unless the sample is certified");

    CLI::App* bneck = app.add_subcommand("bottlenecks", "bottleneck pairs and b2");
    add_common(bneck);
    bneck->add_option("--wfs-override", wfs_val, "declared weak feature size");

    CLI::App* reach = app.add_subcommand("reach", "certified lower bound on the reach");
    add_common(reach);
    reach->add_option("--epsilon0", cfg.epsilon0, "initial density target")->required();
    reach->add_option("--delta", delta_val, "grid size override");
    reach->add_option("--b2-override", b2_val, "declared narrowest bottleneck radius");

    CLI::App* hom = app.add_subcommand("homology", "Betti numbers from a certified sample");
    add_common(hom);
    hom->add_option("--epsilon", eps_val, "complex scale")->required();
    hom->add_option("--delta", delta_val, "grid size override");
    hom->add_option("--b2-override", b2_val, "declared narrowest bottleneck radius");
    hom->add_option("--wfs-override", wfs_val, "declared weak feature size");
    hom->add_option("--max-dim", cfg.max_dim, "top simplex dimension (cech)")
        ->check(CLI::Range(1, 4));
    hom->add_option("--complex", cfg.complex_kind, "complex kind")
        ->check(CLI::IsMember({"vr", "cech"}));
    hom->add_option("--coeff", cfg.coeff, "homology coefficients")
        ->check(CLI::IsMember({"gf2", "rational"}));
    hom->add_flag("--require-certificate", cfg.require_certificate,
                  "exit 4 unless a certificate is established");

    CLI::App* solve = app.add_subcommand("solve", "debug: solve a square system");
    add_common(solve);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cout << json{{"error", e.what()}, {"kind", "usage"}}.dump() << "\n";
        return 2;
    }

    cfg.track.rng_seed = cfg.seed;
    cfg.track.workers = cfg.workers;
    if (sample->count("--epsilon") || hom->count("--epsilon")) cfg.epsilon = eps_val;
    if (sample->count("--delta") || reach->count("--delta") || hom->count("--delta"))
        cfg.delta_override = delta_val;
    if (sample->count("--b2-override") || reach->count("--b2-override") ||
        hom->count("--b2-override"))
        cfg.b2_override = b2_val;
    if (sample->count("--wfs-override") || bneck->count("--wfs-override") ||
        hom->count("--wfs-override"))
        cfg.wfs_override = wfs_val;
    if (sample->count("--dim")) cfg.dim_override = dim_val;

    try {
        if (sample->parsed()) return cmd_sample(cfg);
        if (bneck->parsed()) return cmd_bottlenecks(cfg);
        if (reach->parsed()) return cmd_reach(cfg);
        if (hom->parsed()) return cmd_homology(cfg);
        if (solve->parsed()) return cmd_solve(cfg);
    } catch (const certificate_error& e) {
        std::cout << json{{"error", e.what()}, {"kind", "certificate"}}.dump() << "\n";
        return 4;
    } catch (const input_error& e) {
        std::cout << json{{"error", e.what()}, {"kind", "input"}}.dump() << "\n";
        return 2;
    } catch (const numeric_error& e) {
        std::cout << json{{"error", e.what()}, {"kind", "numeric"}}.dump() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cout << json{{"error", e.what()}, {"kind", "internal"}}.dump() << "\n";
        return 3;
    }
    return 2;
}

}  // namespace vs
