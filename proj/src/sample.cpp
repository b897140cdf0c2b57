#include "varsample/sample.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "varsample/parallel.hpp"
#include "varsample/rng.hpp"

namespace vs {

GridSpec GridSpec::from_seed(double delta, const Box& box, int n, int d,
                             std::uint64_t seed) {
    if (delta <= 0) throw input_error("grid: delta must be positive");
    GridSpec g;
    g.delta = delta;
    g.box = box;
    g.n = n;
    g.d = d;
    g.translation.resize(n);
    SeedStream rng(seed, rng_tag::grid_translation);
    for (int i = 0; i < n; ++i) g.translation[i] = delta * rng.unit();
    return g;
}

GridSpec GridSpec::with_translation(double delta, const Box& box, int n, int d,
                                    const Eigen::VectorXd& translation) {
    if (delta <= 0) throw input_error("grid: delta must be positive");
    GridSpec g;
    g.delta = delta;
    g.box = box;
    g.n = n;
    g.d = d;
    g.translation = translation;
    return g;
}

std::vector<double> GridSpec::axis_values(int axis) const {
    double lo = box.center[axis] - box.half_width;
    double hi = box.center[axis] + box.half_width;
    double tr = translation[axis];
    long long m_lo = static_cast<long long>(std::ceil((lo - tr) / delta));
    long long m_hi = static_cast<long long>(std::floor((hi - tr) / delta));
    std::vector<double> vals;
    vals.reserve(std::max<long long>(0, m_hi - m_lo + 1));
    for (long long m = m_lo; m <= m_hi; ++m) vals.push_back(tr + delta * m);
    return vals;
}

double choose_delta(double epsilon, double b2, int n) {
    if (epsilon <= 0 || b2 <= 0) throw input_error("choose_delta: epsilon and b2 must be positive");
    return 0.99 * std::min(epsilon, 2.0 * b2) / std::sqrt(static_cast<double>(n));
}

std::string Sample::provenance_string(std::size_t i) const {
    const PointTag& tag = tags[i];
    const SampleFamily& fam = families[tag.family];
    Eigen::VectorXd g = grid_point(tag);
    std::ostringstream out;
    out << (fam.extra ? "extra" : "basic") << "|k=" << fam.k << "|t=";
    for (std::size_t j = 0; j < fam.t.size(); ++j) {
        if (j) out << ";";
        out << fam.t[j];
    }
    out << "|g=";
    char buf[40];
    for (int j = 0; j < g.size(); ++j) {
        if (j) out << ";";
        std::snprintf(buf, sizeof buf, "%.17g", g[j]);
        out << buf;
    }
    return out.str();
}

Eigen::VectorXd Sample::grid_point(const PointTag& tag) const {
    const SampleFamily& fam = families[tag.family];
    Eigen::VectorXd g(fam.k);
    long long idx = tag.grid_index;
    for (int j = fam.k - 1; j >= 0; --j) {
        long long sz = static_cast<long long>(fam.axes[j].size());
        g[j] = fam.axes[j][idx % sz];
        idx /= sz;
    }
    return g;
}

namespace {

std::vector<std::vector<int>> combinations(int n, int k) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(k);
    for (int i = 0; i < k; ++i) cur[i] = i;
    if (k == 0 || k > n) return out;
    for (;;) {
        out.push_back(cur);
        int i = k - 1;
        while (i >= 0 && cur[i] == n - k + i) --i;
        if (i < 0) break;
        ++cur[i];
        for (int j = i + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
    }
    return out;
}

// Exact duplicate removal within tol: lexicographic sort, window scan on the
// first coordinate, union-find clusters, keep the smallest original index.
void dedup_sample(std::vector<Eigen::VectorXd>& pts, std::vector<PointTag>& tags,
                  double tol) {
    const std::size_t n = pts.size();
    if (n < 2) return;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& pa = pts[a];
        const auto& pb = pts[b];
        for (int i = 0; i < pa.size(); ++i) {
            if (pa[i] != pb[i]) return pa[i] < pb[i];
        }
        return a < b;
    });
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    const double tol2 = tol * tol;
    for (std::size_t ii = 0; ii < n; ++ii) {
        std::size_t i = order[ii];
        for (std::size_t jj = ii + 1; jj < n; ++jj) {
            std::size_t j = order[jj];
            if (pts[j][0] - pts[i][0] > tol) break;
            if ((pts[i] - pts[j]).squaredNorm() <= tol2) {
                std::size_t ri = find(i), rj = find(j);
                if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
            }
        }
    }
    std::vector<Eigen::VectorXd> out_pts;
    std::vector<PointTag> out_tags;
    out_pts.reserve(n);
    out_tags.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (find(i) == i) {
            out_pts.push_back(std::move(pts[i]));
            out_tags.push_back(tags[i]);
        }
    }
    pts = std::move(out_pts);
    tags = std::move(out_tags);
}

// Shared engine for the basic and extra samples: iterate slice families,
// run the per-grid-point parameter homotopies in blocks, keep canonical
// (family, grid) order.
Sample run_families(const PolySystem& F, const GridSpec& grid,
                    const TrackSettings& settings, bool extra,
                    const Eigen::VectorXd& q) {
    Sample S;
    S.n = F.num_vars();
    S.var_names = F.var_names();
    S.delta = grid.delta;
    S.seed = settings.rng_seed;

    const int n = grid.n;
    std::vector<int> ks;
    if (extra) {
        for (int k = 1; k <= grid.d - 1; ++k) ks.push_back(k);
    } else {
        ks.push_back(grid.d);
    }

    for (int k : ks) {
        for (const auto& t : combinations(n, k)) {
            SampleFamily fam;
            fam.extra = extra;
            fam.k = k;
            fam.t = t;
            for (int axis : t) fam.axes.push_back(grid.axis_values(axis));

            long long ntasks = 1;
            for (const auto& ax : fam.axes) ntasks *= static_cast<long long>(ax.size());
            if (std::any_of(fam.axes.begin(), fam.axes.end(),
                            [](const auto& ax) { return ax.empty(); }))
                ntasks = 0;

            SliceFamily family(F, t, settings,
                               extra ? std::optional<Eigen::VectorXd>(q) : std::nullopt);
            fam.generic_paths = family.generic_paths();
            fam.start_size = family.start_size();
            fam.slices = ntasks;
            fam.paths = ntasks * static_cast<long long>(family.start_size());

            int family_id = static_cast<int>(S.families.size());
            const long long kBlock = 65536;
            for (long long base = 0; base < ntasks; base += kBlock) {
                long long count = std::min(kBlock, ntasks - base);
                std::vector<SliceFamily::Result> results(count);
                parallel_for(static_cast<std::size_t>(count), settings.workers,
                             [&](std::size_t bi) {
                                 long long idx = base + static_cast<long long>(bi);
                                 Eigen::VectorXd g(k);
                                 long long rem = idx;
                                 for (int j = k - 1; j >= 0; --j) {
                                     long long sz = static_cast<long long>(fam.axes[j].size());
                                     g[j] = fam.axes[j][rem % sz];
                                     rem /= sz;
                                 }
                                 results[bi] = family.at(g);
                             });
                for (long long bi = 0; bi < count; ++bi) {
                    for (auto& p : results[bi].points) {
                        S.points.push_back(std::move(p));
                        S.tags.push_back({family_id, base + bi});
                    }
                }
            }
            S.paths_tracked += fam.paths;
            S.generic_paths += fam.generic_paths;
            S.families.push_back(std::move(fam));
        }
    }

    dedup_sample(S.points, S.tags, settings.dedup_tol);
    for (std::size_t i = 0; i < S.points.size(); ++i) {
        if (S.families[S.tags[i].family].extra) ++S.extra_count;
        else ++S.basic_count;
    }
    return S;
}

}  // namespace

Sample basic_sample(const PolySystem& F, const GridSpec& grid,
                    const TrackSettings& settings) {
    settings.validate();
    if (grid.d < 1) throw input_error("basic_sample: variety dimension must be >= 1");
    return run_families(F, grid, settings, false, Eigen::VectorXd());
}

Sample extra_sample(const PolySystem& F, const GridSpec& grid, const Eigen::VectorXd& q,
                    const TrackSettings& settings) {
    settings.validate();
    Sample S;
    if (grid.d < 2) {  // curves have no extra sample
        S.n = F.num_vars();
        S.var_names = F.var_names();
        S.delta = grid.delta;
        S.seed = settings.rng_seed;
        return S;
    }
    return run_families(F, grid, settings, true, q);
}

Sample merge_samples(Sample a, Sample b) {
    if (a.n == 0) return b;
    if (b.n == 0) return a;
    if (a.n != b.n) throw input_error("merge_samples: dimension mismatch");
    int offset = static_cast<int>(a.families.size());
    for (auto& fam : b.families) a.families.push_back(std::move(fam));
    for (std::size_t i = 0; i < b.points.size(); ++i) {
        a.points.push_back(std::move(b.points[i]));
        PointTag tag = b.tags[i];
        tag.family += offset;
        a.tags.push_back(tag);
    }
    a.paths_tracked += b.paths_tracked;
    a.generic_paths += b.generic_paths;
    a.basic_count += b.basic_count;
    a.extra_count += b.extra_count;
    return a;
}

Sample total_sample(const PolySystem& F, double epsilon, const TrackSettings& settings,
                    const TotalSampleOptions& opts) {
    settings.validate();
    if (epsilon <= 0) throw input_error("total_sample: epsilon must be positive");
    const int n = F.num_vars();
    const int d = opts.dim_override.value_or(n - F.codim());
    if (d < 1) throw input_error("total_sample: variety dimension must be >= 1");

    Box box = opts.box_override ? *opts.box_override : bounding_box(F, settings);

    std::optional<double> b2 = opts.b2_override;
    std::optional<double> wfs = opts.wfs_override;
    bool wfs_fallback = false;
    if (!b2 && !(opts.delta_override)) {
        BottleneckReport rep = bottlenecks(F, settings, box, opts.wfs_override);
        if (!rep.finite)
            throw numeric_error("total_sample: bottleneck locus not finite (" + rep.diagnosis +
                                "); supply a b2 override to proceed");
        b2 = rep.b2;
        if (!wfs) { wfs = rep.wfs_declared; wfs_fallback = rep.wfs_is_fallback; }
    }
    if (!wfs && b2) { wfs = b2; wfs_fallback = true; }

    double delta =
        opts.delta_override ? *opts.delta_override : choose_delta(epsilon, *b2, n);

    GridSpec grid = GridSpec::from_seed(delta, box, n, d, settings.rng_seed);
    Sample S = basic_sample(F, grid, settings);
    if (d >= 2) {
        SeedStream rng(settings.rng_seed, rng_tag::extra_q);
        Eigen::VectorXd q(n);
        for (int i = 0; i < n; ++i) q[i] = box.center[i] + rng.uniform(-0.7, 0.7);
        Sample E2 = extra_sample(F, grid, q, settings);
        S = merge_samples(std::move(S), std::move(E2));
        dedup_sample(S.points, S.tags, settings.dedup_tol);
        S.basic_count = S.extra_count = 0;
        for (std::size_t i = 0; i < S.points.size(); ++i) {
            if (S.families[S.tags[i].family].extra) ++S.extra_count;
            else ++S.basic_count;
        }
    }

    S.epsilon_target = epsilon;
    S.b2_used = b2;
    S.wfs_declared = wfs;
    S.wfs_is_fallback = wfs_fallback;
    if (b2 && delta * std::sqrt(static_cast<double>(n)) < std::min(epsilon, 2.0 * (*b2)))
        S.epsilon_certified = epsilon;
    return S;
}

void write_sample_csv(const Sample& S, std::ostream& out) {
    for (int i = 0; i < S.n; ++i) {
        if (i) out << ",";
        out << (i < static_cast<int>(S.var_names.size()) ? S.var_names[i]
                                                         : "x" + std::to_string(i));
    }
    out << ",provenance\n";
    char buf[40];
    for (std::size_t p = 0; p < S.points.size(); ++p) {
        for (int i = 0; i < S.n; ++i) {
            if (i) out << ",";
            std::snprintf(buf, sizeof buf, "%.17g", S.points[p][i]);
            out << buf;
        }
        out << "," << S.provenance_string(p) << "\n";
    }
}

void write_sample_obj(const Sample& S, std::ostream& out) {
    // point cloud as OBJ vertices; dimensions beyond the third are dropped
    // (coordinate projection), missing ones padded with zero
    char buf[40];
    for (const auto& p : S.points) {
        out << "v";
        for (int i = 0; i < 3; ++i) {
            double v = i < S.n ? p[i] : 0.0;
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << " " << buf;
        }
        out << "\n";
    }
}

}  // namespace vs
