#pragma once

// Experiment harness: JSON configuration, noise injection, stability sweeps,
// CSV and SVG output, and boundary-record CSV serialisation.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wavesrc/core_grid.hpp"
#include "wavesrc/elastic.hpp"
#include "wavesrc/electromagnetic.hpp"
#include "wavesrc/reconstruction.hpp"
#include "wavesrc/source.hpp"
#include "wavesrc/types.hpp"

namespace wavesrc {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct ResolutionConfig {
    std::string preset = "default";  ///< coarse | default | fine | custom
    std::vector<int> surface;        ///< {M} in 2D, {polar, azimuth} in 3D (custom only)
    int source_grid = 0;
    int recon_grid = 0;

    bool operator==(const ResolutionConfig&) const = default;
};

struct SourceConfig {
    std::string name = "bump";             ///< bump | bump_mean | nonradiating
    std::vector<double> center;            ///< empty: origin
    std::optional<double> radius;          ///< empty: R_hat - |center|
    std::vector<double> amplitude;         ///< empty: built-in default
    std::vector<double> linear;            ///< empty: built-in default
    std::optional<double> kappa;           ///< nonradiating only; empty: pi / R

    bool operator==(const SourceConfig&) const = default;
};

struct ExperimentConfig {
    std::string physics = "elastic2d";  ///< elastic2d | elastic3d | em
    double lambda = 1.0;
    double mu = 1.0;
    double R = 1.0;
    double R_hat = 0.5;
    std::vector<int> N{2, 4, 8};
    std::vector<double> noise{0.0, 0.01};
    std::optional<std::uint64_t> seed = 1;
    int n_seeds = 1;
    ResolutionConfig resolution;
    SourceConfig source;
    std::optional<double> smoothness_m;  ///< metadata only
    std::optional<double> bound_M;       ///< metadata only
    bool record_wall_time = false;

    bool operator==(const ExperimentConfig&) const = default;

    int dimension() const { return physics == "elastic2d" ? 2 : 3; }
    bool is_elastic() const { return physics != "em"; }
    double margin() const { return 0.5 * (R - R_hat); }
    int max_N() const { return *std::max_element(N.begin(), N.end()); }

    void validate() const
    {
        if (physics != "elastic2d" && physics != "elastic3d" && physics != "em") {
            throw ConfigError("physics", "must be one of elastic2d, elastic3d, em");
        }
        if (!(R > 0.0) || !std::isfinite(R)) {
            throw ConfigError("R", "must be positive");
        }
        if (!(R_hat > 0.0) || !(R_hat < R)) {
            throw ConfigError("R_hat", "must satisfy 0 < R_hat < R");
        }
        if (is_elastic() && (!(mu > 0.0) || !(lambda + mu > 0.0))) {
            throw ConfigError("mu", "Lame constants must satisfy mu > 0 and lambda + mu > 0");
        }
        if (N.empty()) {
            throw ConfigError("N", "list must not be empty");
        }
        for (int n : N) {
            if (n < 1) throw ConfigError("N", "entries must be at least 1");
        }
        if (noise.empty()) {
            throw ConfigError("noise", "list must not be empty");
        }
        bool noisy = false;
        for (double s : noise) {
            if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("noise", "levels must be finite and nonnegative");
            noisy = noisy || s > 0.0;
        }
        if (noisy && !seed) {
            throw ConfigError("seed", "required when a noise level is positive");
        }
        if (n_seeds < 1) {
            throw ConfigError("n_seeds", "must be at least 1");
        }
        const std::string& p = resolution.preset;
        if (p != "coarse" && p != "default" && p != "fine" && p != "custom") {
            throw ConfigError("resolution.preset", "must be coarse, default, fine or custom");
        }
        if (p == "custom") {
            const std::size_t want = dimension() == 2 ? 1 : 2;
            if (resolution.surface.size() != want) {
                throw ConfigError("resolution.surface", "needs " + std::to_string(want) + " entries");
            }
            for (int s : resolution.surface) {
                if (s < 8) throw ConfigError("resolution.surface", "entries must be at least 8");
            }
            if (resolution.source_grid < 4) throw ConfigError("resolution.source_grid", "must be at least 4");
            if (resolution.recon_grid < 4) throw ConfigError("resolution.recon_grid", "must be at least 4");
        }
        const std::string& s = source.name;
        if (s != "bump" && s != "bump_mean" && s != "nonradiating") {
            throw ConfigError("source.name", "must be bump, bump_mean or nonradiating");
        }
        if (s == "nonradiating" && is_elastic()) {
            throw ConfigError("source.name", "nonradiating sources are electromagnetic only");
        }
        if (s == "bump_mean" && !is_elastic()) {
            throw ConfigError("source.name", "bump_mean is elastic only");
        }
        const std::size_t d = static_cast<std::size_t>(dimension());
        if (!source.center.empty() && source.center.size() != d) {
            throw ConfigError("source.center", "dimension mismatch");
        }
        if (!source.amplitude.empty() && source.amplitude.size() != d) {
            throw ConfigError("source.amplitude", "dimension mismatch");
        }
        if (!source.linear.empty() && source.linear.size() != d) {
            throw ConfigError("source.linear", "dimension mismatch");
        }
        double c = 0.0;
        for (double v : source.center) c += v * v;
        c = std::sqrt(c);
        const double r = source.radius.value_or(R_hat - c);
        if (!(r > 0.0) || c + r > R_hat * (1.0 + 1e-12)) {
            throw ConfigError("source.radius", "support must be a ball inside B_R_hat");
        }
        if (source.kappa && !(*source.kappa > 0.0)) {
            throw ConfigError("source.kappa", "must be positive");
        }
    }
};

/// Surface, source-grid and reconstruction-grid sizes after applying the preset.
struct Resolution {
    SurfaceResolution surface;
    int source_grid = 0;
    int recon_grid = 0;
};

inline Resolution resolve(const ExperimentConfig& c)
{
    const bool two = c.dimension() == 2;
    const std::string& p = c.resolution.preset;
    if (p == "custom") {
        return {{c.resolution.surface[0], two ? 0 : c.resolution.surface[1]},
                c.resolution.source_grid,
                c.resolution.recon_grid};
    }
    const int level = p == "coarse" ? 0 : (p == "default" ? 1 : 2);
    if (two) {
        static const int M[] = {64, 128, 256};
        static const int src[] = {32, 64, 128};
        static const int rec[] = {64, 128, 256};
        return {{M[level], 0}, src[level], rec[level]};
    }
    static const int polar[] = {8, 16, 32};
    static const int src[] = {16, 32, 48};
    static const int rec[] = {32, 48, 64};
    return {{polar[level], 2 * polar[level]}, src[level], rec[level]};
}

namespace detail {

template <typename T>
void read_optional(const json& j, const char* key, T& out)
{
    if (j.contains(key) && !j.at(key).is_null()) {
        out = j.at(key).get<T>();
    }
}

} // namespace detail

inline json to_json(const ExperimentConfig& c)
{
    json j;
    j["physics"] = c.physics;
    j["lambda"] = c.lambda;
    j["mu"] = c.mu;
    j["R"] = c.R;
    j["R_hat"] = c.R_hat;
    j["N"] = c.N;
    j["noise"] = c.noise;
    j["seed"] = c.seed ? json(*c.seed) : json(nullptr);
    j["n_seeds"] = c.n_seeds;
    j["resolution"] = {{"preset", c.resolution.preset},
                       {"surface", c.resolution.surface},
                       {"source_grid", c.resolution.source_grid},
                       {"recon_grid", c.resolution.recon_grid}};
    json s;
    s["name"] = c.source.name;
    s["center"] = c.source.center;
    s["radius"] = c.source.radius ? json(*c.source.radius) : json(nullptr);
    s["amplitude"] = c.source.amplitude;
    s["linear"] = c.source.linear;
    s["kappa"] = c.source.kappa ? json(*c.source.kappa) : json(nullptr);
    j["source"] = s;
    j["metadata"] = {{"m", c.smoothness_m ? json(*c.smoothness_m) : json(nullptr)},
                     {"M", c.bound_M ? json(*c.bound_M) : json(nullptr)}};
    j["record_wall_time"] = c.record_wall_time;
    return j;
}

/// Fills defaults for absent keys and validates.
inline ExperimentConfig config_from_json(const json& j)
{
    if (!j.is_object()) {
        throw ConfigError("<root>", "configuration must be a JSON object");
    }
    ExperimentConfig c;
    std::string field = "<root>";
    try {
        field = "physics";
        detail::read_optional(j, "physics", c.physics);
        field = "lambda";
        detail::read_optional(j, "lambda", c.lambda);
        field = "mu";
        detail::read_optional(j, "mu", c.mu);
        field = "R";
        detail::read_optional(j, "R", c.R);
        field = "R_hat";
        detail::read_optional(j, "R_hat", c.R_hat);
        field = "N";
        detail::read_optional(j, "N", c.N);
        field = "noise";
        detail::read_optional(j, "noise", c.noise);
        field = "seed";
        if (j.contains("seed")) {
            c.seed = j.at("seed").is_null() ? std::nullopt : std::optional<std::uint64_t>(j.at("seed").get<std::uint64_t>());
        }
        field = "n_seeds";
        detail::read_optional(j, "n_seeds", c.n_seeds);
        field = "resolution";
        if (j.contains("resolution")) {
            const json& r = j.at("resolution");
            if (r.is_string()) {
                c.resolution.preset = r.get<std::string>();
            } else {
                field = "resolution.preset";
                detail::read_optional(r, "preset", c.resolution.preset);
                field = "resolution.surface";
                detail::read_optional(r, "surface", c.resolution.surface);
                field = "resolution.source_grid";
                detail::read_optional(r, "source_grid", c.resolution.source_grid);
                field = "resolution.recon_grid";
                detail::read_optional(r, "recon_grid", c.resolution.recon_grid);
            }
        }
        if (j.contains("source")) {
            const json& s = j.at("source");
            field = "source.name";
            detail::read_optional(s, "name", c.source.name);
            field = "source.center";
            detail::read_optional(s, "center", c.source.center);
            field = "source.radius";
            if (s.contains("radius") && !s.at("radius").is_null()) c.source.radius = s.at("radius").get<double>();
            field = "source.amplitude";
            detail::read_optional(s, "amplitude", c.source.amplitude);
            field = "source.linear";
            detail::read_optional(s, "linear", c.source.linear);
            field = "source.kappa";
            if (s.contains("kappa") && !s.at("kappa").is_null()) c.source.kappa = s.at("kappa").get<double>();
        }
        if (j.contains("metadata")) {
            const json& m = j.at("metadata");
            field = "metadata.m";
            if (m.contains("m") && !m.at("m").is_null()) c.smoothness_m = m.at("m").get<double>();
            field = "metadata.M";
            if (m.contains("M") && !m.at("M").is_null()) c.bound_M = m.at("M").get<double>();
        }
        field = "record_wall_time";
        detail::read_optional(j, "record_wall_time", c.record_wall_time);
    } catch (const json::exception& e) {
        throw ConfigError(field, std::string("wrong type: ") + e.what());
    }
    c.validate();
    return c;
}

inline ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("<file>", "cannot open " + path);
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("<file>", std::string("parse failure: ") + e.what());
    }
    return config_from_json(j);
}

inline void save_config(const ExperimentConfig& c, const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    out << to_json(c).dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Sources built from the configuration
// ---------------------------------------------------------------------------

namespace detail {

template <int D>
Point<D> vector_or(const std::vector<double>& v, const Point<D>& fallback)
{
    if (v.empty()) return fallback;
    Point<D> p;
    for (int i = 0; i < D; ++i) p[i] = v[i];
    return p;
}

template <int D>
BumpTerm<D> config_bump(const ExperimentConfig& c, const Point<D>& center, double radius, bool potential)
{
    BumpTerm<D> t;
    t.center = center;
    t.radius = radius;
    Point<D> amp;
    Point<D> lin;
    if constexpr (D == 2) {
        amp = Point<2>(1.0, -0.5);
        lin = Point<2>(0.8, 0.3);
    } else {
        amp = potential ? Point<3>(0.3, -0.5, 1.0) : Point<3>(1.0, -0.5, 0.25);
        lin = Point<3>(0.8, 0.3, -0.2);
    }
    t.amplitude = vector_or<D>(c.source.amplitude, amp).template cast<cdouble>();
    t.polynomial.linear = vector_or<D>(c.source.linear, lin) / radius;
    return t;
}

} // namespace detail

template <int D>
Point<D> source_center(const ExperimentConfig& c)
{
    return detail::vector_or<D>(c.source.center, Point<D>::Zero());
}

template <int D>
double source_radius(const ExperimentConfig& c)
{
    return c.source.radius.value_or(c.R_hat - source_center<D>(c).norm());
}

/// Elastic force density named by the configuration.
template <int D>
SourceDescriptor<D> make_elastic_source(const ExperimentConfig& c)
{
    const Point<D> center = source_center<D>(c);
    const double radius = source_radius<D>(c);
    SmoothVectorField<D> field;
    field.terms.push_back(detail::config_bump<D>(c, center, radius, false));
    if (c.source.name == "bump") {
        field = make_zero_mean(field, center, radius);
        SourceDescriptor<D> s = make_source(field, center, radius);
        s.zero_mean = true;
        return s;
    }
    return make_source(field, center, radius);
}

/// Current density named by the configuration.
inline CurrentDescriptor make_em_source(const ExperimentConfig& c)
{
    const Point<3> center = source_center<3>(c);
    const double radius = source_radius<3>(c);
    SmoothVectorField<3> potential;
    potential.terms.push_back(detail::config_bump<3>(c, center, radius, true));
    if (c.source.name == "nonradiating") {
        return nonradiating_source(potential, center, radius, c.source.kappa.value_or(pi / c.R));
    }
    return make_curl_source(potential, center, radius);
}

// ---------------------------------------------------------------------------
// Noise
// ---------------------------------------------------------------------------

/// SplitMix64 finaliser, used to derive independent per-record streams.
inline std::uint64_t mix_seed(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t record_seed(std::uint64_t seed, std::uint64_t key) { return mix_seed(mix_seed(seed) ^ key); }

namespace detail {

template <int D>
double channel_rms(const std::vector<CVector<D>>& v)
{
    double s = 0.0;
    for (const auto& x : v) s += x.squaredNorm();
    return v.empty() ? 0.0 : std::sqrt(s / (static_cast<double>(v.size()) * D));
}

// Complex Gaussian with E|z|^2 = sigma^2 per component.
template <int D>
void perturb(std::vector<CVector<D>>& v, double sigma, std::mt19937_64& gen)
{
    std::normal_distribution<double> normal(0.0, sigma / std::sqrt(2.0));
    for (auto& x : v) {
        for (int i = 0; i < D; ++i) {
            const double re = normal(gen);
            const double im = normal(gen);
            x[i] += cdouble(re, im);
        }
    }
}

inline void check_level(double level)
{
    if (!(level >= 0.0) || !std::isfinite(level)) {
        throw InvalidArgument("noise level must be finite and nonnegative");
    }
}

} // namespace detail

/// Independent complex Gaussian noise on u and Du, sigma = level * channel RMS.
template <int D>
ElasticBoundaryRecord<D> add_noise(const ElasticBoundaryRecord<D>& rec, double level, std::uint64_t seed)
{
    detail::check_level(level);
    ElasticBoundaryRecord<D> out = rec;
    if (level == 0.0) return out;
    std::mt19937_64 gen(seed);
    detail::perturb<D>(out.u, level * detail::channel_rms<D>(rec.u), gen);
    detail::perturb<D>(out.du, level * detail::channel_rms<D>(rec.du), gen);
    return out;
}

/// Independent complex Gaussian noise on E x nu and H x nu, kept tangential.
inline EMBoundaryRecord add_noise(const EMBoundaryRecord& rec, double level, std::uint64_t seed)
{
    detail::check_level(level);
    EMBoundaryRecord out = rec;
    if (level == 0.0) return out;
    std::mt19937_64 gen(seed);
    detail::perturb<3>(out.e_cross_nu, level * detail::channel_rms<3>(rec.e_cross_nu) * std::sqrt(1.5), gen);
    detail::perturb<3>(out.h_cross_nu, level * detail::channel_rms<3>(rec.h_cross_nu) * std::sqrt(1.5), gen);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const CVector<3> n = rec.quadrature->normals[i].cast<cdouble>();
        out.e_cross_nu[i] -= bilinear<3>(n, out.e_cross_nu[i]) * n;
        out.h_cross_nu[i] -= bilinear<3>(n, out.h_cross_nu[i]) * n;
    }
    return out;
}

template <int D>
ElasticLatticeRecords<D> add_noise(const ElasticLatticeRecords<D>& recs, double level, std::uint64_t seed)
{
    ElasticLatticeRecords<D> out = recs;
    for (auto& [shell, r] : out.compressional) r = add_noise<D>(r, level, record_seed(seed, 2ULL * shell));
    for (auto& [shell, r] : out.shear) r = add_noise<D>(r, level, record_seed(seed, 2ULL * shell + 1));
    return out;
}

inline EMLatticeRecords add_noise(const EMLatticeRecords& recs, double level, std::uint64_t seed)
{
    EMLatticeRecords out = recs;
    for (auto& [shell, r] : out.records) r = add_noise(r, level, record_seed(seed, 2ULL * shell));
    return out;
}

// ---------------------------------------------------------------------------
// Stability sweep
// ---------------------------------------------------------------------------

struct StabilityRow {
    std::string physics;
    int dim = 2;
    int N = 0;
    double noise_level = 0.0;
    std::uint64_t seed = 0;
    std::string epsilon_kind;
    double epsilon = 0.0;
    double recon_rel_l2 = 0.0;
    double truncation_tail = 0.0;
    double wall_time_s = 0.0;
    double coefficient_error = 0.0;  ///< not serialised
    bool decomposition_holds = true; ///< not serialised

    bool operator==(const StabilityRow& o) const
    {
        return physics == o.physics && dim == o.dim && N == o.N && noise_level == o.noise_level && seed == o.seed
            && epsilon_kind == o.epsilon_kind && epsilon == o.epsilon && recon_rel_l2 == o.recon_rel_l2
            && truncation_tail == o.truncation_tail && wall_time_s == o.wall_time_s;
    }
};

/// omega^{d-1} ||u(., omega)||^2 (or kappa^2 ||E x nu||^2) for the tail plot.
struct TailSample {
    double frequency = 0.0;
    double weighted_norm = 0.0;
};

struct StabilityReport {
    std::vector<StabilityRow> rows;
    std::vector<TailSample> tail;

    bool rows_finite() const
    {
        for (const auto& r : rows) {
            for (double v : {r.epsilon, r.recon_rel_l2, r.truncation_tail, r.wall_time_s}) {
                if (!std::isfinite(v) || v < 0.0) return false;
            }
        }
        return true;
    }
};

namespace detail {

template <int D>
std::shared_ptr<const SurfaceQuadrature<D>> config_quadrature(const ExperimentConfig& c, const Resolution& res)
{
    return std::make_shared<const SurfaceQuadrature<D>>(make_surface_quadrature<D>(c.R, res.surface));
}

template <int D>
StabilityReport elastic_sweep(const ExperimentConfig& c)
{
    const Resolution res = resolve(c);
    const ElasticMedium medium{c.lambda, c.mu};
    const SourceDescriptor<D> src = make_elastic_source<D>(c);
    const auto q = config_quadrature<D>(c, res);
    ElasticForwardOptions opt;
    opt.source_grid = res.source_grid;
    opt.min_margin = c.margin();
    const int nmax = c.max_N();
    const ElasticLatticeRecords<D> clean = elastic_lattice_records<D>(src, medium, c.R, nmax, q, opt);
    std::optional<std::array<ElasticBoundaryRecord<D>, 2>> statics;
    if (!src.zero_mean) {
        statics = std::array<ElasticBoundaryRecord<D>, 2>{
            elastic_boundary_data<D>(src, ElasticFrequency(static_frequencies[0], medium), medium, q, opt),
            elastic_boundary_data<D>(src, ElasticFrequency(static_frequencies[1], medium), medium, q, opt)};
    }
    const BoxGrid<D> grid = make_box_grid<D>(c.R, res.recon_grid);
    std::map<int, FourierLattice<D>> truth;

    StabilityReport report;
    for (const auto& [shell, r] : clean.compressional) {
        const double w = r.frequency.omega;
        report.tail.push_back({w, std::pow(w, D - 1) * elastic_measurement_norm<D>(r)});
    }
    for (const auto& [shell, r] : clean.shear) {
        const double w = r.frequency.omega;
        report.tail.push_back({w, std::pow(w, D - 1) * elastic_measurement_norm<D>(r)});
    }
    std::sort(report.tail.begin(), report.tail.end(),
              [](const TailSample& a, const TailSample& b) { return a.frequency < b.frequency; });

    for (double level : c.noise) {
        const int seeds = level > 0.0 ? c.n_seeds : 1;
        for (int k = 0; k < seeds; ++k) {
            const std::uint64_t seed = c.seed.value_or(0) + static_cast<std::uint64_t>(k);
            const ElasticLatticeRecords<D> data = add_noise<D>(clean, level, seed);
            std::optional<CVector<D>> mean;
            if (statics) {
                const auto a = add_noise<D>((*statics)[0], level, record_seed(seed, 1ULL << 40));
                const auto b = add_noise<D>((*statics)[1], level, record_seed(seed, (1ULL << 40) + 1));
                mean = static_mean_recover<D>(a, b, level > 0.0 ? 1.0 : 1e-3).integral;
            }
            for (int N : c.N) {
                const auto start = std::chrono::steady_clock::now();
                FourierLattice<D> lattice = elastic_lattice_recover<D>(data, N);
                if (mean) {
                    MultiIndex<D> zero{};
                    lattice.set(zero, *mean / std::pow(2.0 * c.R, D));
                }
                const ReconstructionReport<D> rep = reconstruct<D>(lattice, grid, src);
                const EpsilonSummary eps = epsilon2<D>(data, N);
                const double wall =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
                StabilityRow row;
                row.physics = c.physics;
                row.dim = D;
                row.N = N;
                row.noise_level = level;
                row.seed = seed;
                row.epsilon_kind = to_string(eps.kind);
                row.epsilon = eps.value;
                row.recon_rel_l2 = rep.relative_l2;
                row.truncation_tail = rep.truncation_tail;
                row.coefficient_error = rep.coefficient_error;
                row.decomposition_holds = rep.decomposition_holds();
                row.wall_time_s = c.record_wall_time ? wall : 0.0;
                report.rows.push_back(row);
            }
        }
    }
    return report;
}

inline StabilityReport em_sweep(const ExperimentConfig& c)
{
    const Resolution res = resolve(c);
    const CurrentDescriptor src = make_em_source(c);
    const auto q = config_quadrature<3>(c, res);
    EMForwardOptions opt;
    opt.source_grid = res.source_grid;
    opt.min_margin = c.margin();
    const EMLatticeRecords clean = em_lattice_records(src, c.R, c.max_N(), q, opt);
    const BoxGrid<3> grid = make_box_grid<3>(c.R, res.recon_grid);

    StabilityReport report;
    for (const auto& [shell, r] : clean.records) {
        report.tail.push_back({r.kappa, r.kappa * r.kappa * em_measurement_norm(r)});
    }
    for (double level : c.noise) {
        const int seeds = level > 0.0 ? c.n_seeds : 1;
        for (int k = 0; k < seeds; ++k) {
            const std::uint64_t seed = c.seed.value_or(0) + static_cast<std::uint64_t>(k);
            const EMLatticeRecords data = add_noise(clean, level, seed);
            for (int N : c.N) {
                const auto start = std::chrono::steady_clock::now();
                const FourierLattice<3> lattice = em_lattice_recover(data, N);
                const ReconstructionReport<3> rep = reconstruct<3>(lattice, grid, src);
                const EpsilonSummary eps = epsilon5(data, N);
                const double wall =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
                StabilityRow row;
                row.physics = c.physics;
                row.dim = 3;
                row.N = N;
                row.noise_level = level;
                row.seed = seed;
                row.epsilon_kind = to_string(eps.kind);
                row.epsilon = eps.value;
                row.recon_rel_l2 = rep.relative_l2;
                row.truncation_tail = rep.truncation_tail;
                row.coefficient_error = rep.coefficient_error;
                row.decomposition_holds = rep.decomposition_holds();
                row.wall_time_s = c.record_wall_time ? wall : 0.0;
                report.rows.push_back(row);
            }
        }
    }
    return report;
}

} // namespace detail

/// Error versus N for every noise level and seed.
inline StabilityReport run_stability_sweep(const ExperimentConfig& c)
{
    c.validate();
    try {
        if (c.physics == "elastic2d") return detail::elastic_sweep<2>(c);
        if (c.physics == "elastic3d") return detail::elastic_sweep<3>(c);
        return detail::em_sweep(c);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw NumericError("sweep (" + c.physics + ", R=" + std::to_string(c.R) + "): " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

inline constexpr const char* sweep_csv_header =
    "physics,dim,N,noise_level,seed,epsilon_kind,epsilon,recon_rel_l2,truncation_tail,wall_time_s";

inline std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string sweep_csv(const StabilityReport& report)
{
    std::string s = sweep_csv_header;
    s += '\n';
    for (const auto& r : report.rows) {
        s += r.physics + ',' + std::to_string(r.dim) + ',' + std::to_string(r.N) + ',' + format_double(r.noise_level)
            + ',' + std::to_string(r.seed) + ',' + r.epsilon_kind + ',' + format_double(r.epsilon) + ','
            + format_double(r.recon_rel_l2) + ',' + format_double(r.truncation_tail) + ','
            + format_double(r.wall_time_s) + '\n';
    }
    return s;
}

inline std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline StabilityReport parse_sweep_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != sweep_csv_header) {
        throw InvalidArgument("unexpected sweep CSV header");
    }
    StabilityReport rep;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto c = split_csv_line(line);
        if (c.size() != 10) throw InvalidArgument("malformed sweep CSV row");
        StabilityRow r;
        r.physics = c[0];
        r.dim = std::stoi(c[1]);
        r.N = std::stoi(c[2]);
        r.noise_level = std::stod(c[3]);
        r.seed = std::stoull(c[4]);
        r.epsilon_kind = c[5];
        r.epsilon = std::stod(c[6]);
        r.recon_rel_l2 = std::stod(c[7]);
        r.truncation_tail = std::stod(c[8]);
        r.wall_time_s = std::stod(c[9]);
        rep.rows.push_back(r);
    }
    return rep;
}

struct PlotSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

/// Minimal log-log line plot as SVG.
inline std::string loglog_svg(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                              const std::vector<PlotSeries>& series)
{
    const double W = 640, H = 480, L = 80, Rm = 160, T = 40, B = 60;
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            if (x <= 0.0 || y <= 0.0) continue;
            x0 = std::min(x0, std::log10(x));
            x1 = std::max(x1, std::log10(x));
            y0 = std::min(y0, std::log10(y));
            y1 = std::max(y1, std::log10(y));
        }
    }
    if (x0 > x1) {
        x0 = 0.0;
        x1 = 1.0;
        y0 = 0.0;
        y1 = 1.0;
    }
    if (x1 - x0 < 1e-12) x1 = x0 + 1.0;
    if (y1 - y0 < 1e-12) y1 = y0 + 1.0;
    auto px = [&](double x) { return L + (std::log10(x) - x0) / (x1 - x0) * (W - L - Rm); };
    auto py = [&](double y) { return H - B - (std::log10(y) - y0) / (y1 - y0) * (H - T - B); };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title << "</text>\n";
    o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - Rm << "\" height=\"" << H - T - B
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    o << "<text x=\"" << (L + W - Rm) / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">" << xlabel
      << "</text>\n";
    o << "<text x=\"20\" y=\"" << (T + H - B) / 2 << "\" transform=\"rotate(-90 20 " << (T + H - B) / 2
      << ")\" text-anchor=\"middle\">" << ylabel << "</text>\n";
    for (int e = static_cast<int>(std::ceil(y0)); e <= static_cast<int>(std::floor(y1)); ++e) {
        o << "<text x=\"" << L - 8 << "\" y=\"" << py(std::pow(10.0, e)) + 4 << "\" text-anchor=\"end\" font-size=\"11\">1e"
          << e << "</text>\n";
    }
    for (int e = static_cast<int>(std::ceil(x0)); e <= static_cast<int>(std::floor(x1)); ++e) {
        o << "<text x=\"" << px(std::pow(10.0, e)) << "\" y=\"" << H - B + 16
          << "\" text-anchor=\"middle\" font-size=\"11\">1e" << e << "</text>\n";
    }
    for (std::size_t k = 0; k < series.size(); ++k) {
        const char* color = colors[k % 6];
        o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, y] : series[k].points) {
            if (x > 0.0 && y > 0.0) o << px(x) << ',' << py(y) << ' ';
        }
        o << "\"/>\n";
        o << "<text x=\"" << W - Rm + 10 << "\" y=\"" << T + 16 + 18 * k << "\" fill=\"" << color
          << "\" font-size=\"12\">" << series[k].label << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

/// Writes sweep.csv, error_vs_N.svg and tail.svg; returns the paths.
inline std::vector<std::string> emit_outputs(const StabilityReport& report, const std::string& out_dir)
{
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    auto write = [](const fs::path& p, const std::string& text) {
        std::ofstream out(p, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + p.string());
        out << text;
        if (!out) throw std::runtime_error("write failed for " + p.string());
        return p.string();
    };
    std::vector<std::string> paths;
    paths.push_back(write(fs::path(out_dir) / "sweep.csv", sweep_csv(report)));

    // median error over seeds for each (noise, N)
    std::map<double, std::map<int, std::vector<double>>> errors;
    for (const auto& r : report.rows) errors[r.noise_level][r.N].push_back(r.recon_rel_l2);
    std::vector<PlotSeries> series;
    for (auto& [level, byN] : errors) {
        PlotSeries s;
        s.label = "noise " + format_double(level);
        for (auto& [N, v] : byN) {
            std::sort(v.begin(), v.end());
            s.points.emplace_back(N, v[v.size() / 2]);
        }
        series.push_back(s);
    }
    paths.push_back(write(fs::path(out_dir) / "error_vs_N.svg",
                          loglog_svg("Reconstruction error", "N", "relative L2 error", series)));
    PlotSeries tail{"weighted boundary norm", {}};
    for (const auto& t : report.tail) tail.points.emplace_back(t.frequency, t.weighted_norm);
    paths.push_back(
        write(fs::path(out_dir) / "tail.svg", loglog_svg("High-frequency tail", "frequency", "weighted norm", {tail})));
    return paths;
}

// ---------------------------------------------------------------------------
// Boundary-record CSV
// ---------------------------------------------------------------------------

inline constexpr const char* record_csv_header =
    "physics,dim,record,wave,omega,kappa,node,x1,x2,x3,nu1,nu2,nu3,weight,"
    "a1_re,a1_im,a2_re,a2_im,a3_re,a3_im,b1_re,b1_im,b2_re,b2_im,b3_re,b3_im";

namespace detail {

template <int D>
void append_record_rows(std::string& s, const std::string& physics, const std::string& key, const std::string& wave,
                        double omega, double kappa, const SurfaceQuadrature<D>& q, const std::vector<CVector<D>>& a,
                        const std::vector<CVector<D>>& b)
{
    for (std::size_t i = 0; i < q.size(); ++i) {
        s += physics + ',' + std::to_string(D) + ',' + key + ',' + wave + ',' + format_double(omega) + ','
            + format_double(kappa) + ',' + std::to_string(i);
        for (int k = 0; k < 3; ++k) s += ',' + format_double(k < D ? q.nodes[i][k] : 0.0);
        for (int k = 0; k < 3; ++k) s += ',' + format_double(k < D ? q.normals[i][k] : 0.0);
        s += ',' + format_double(q.weights[i]);
        for (const auto* v : {&a[i], &b[i]}) {
            for (int k = 0; k < 3; ++k) {
                const cdouble z = k < D ? (*v)[k] : cdouble(0.0);
                s += ',' + format_double(z.real()) + ',' + format_double(z.imag());
            }
        }
        s += '\n';
    }
}

struct RecordRows {
    std::string physics;
    int dim = 0;
    std::string wave;
    double omega = 0.0;
    double kappa = 0.0;
    std::vector<std::array<double, 7>> geometry;  // x, nu, w
    std::vector<std::array<cdouble, 6>> values;   // a, b
};

inline std::map<std::string, RecordRows> parse_record_rows(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != record_csv_header) {
        throw InvalidArgument("unexpected record CSV header");
    }
    std::map<std::string, RecordRows> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto c = split_csv_line(line);
        if (c.size() != 26) throw InvalidArgument("malformed record CSV row");
        RecordRows& r = out[c[2]];
        r.physics = c[0];
        r.dim = std::stoi(c[1]);
        r.wave = c[3];
        r.omega = std::stod(c[4]);
        r.kappa = std::stod(c[5]);
        if (static_cast<std::size_t>(std::stoul(c[6])) != r.geometry.size()) {
            throw InvalidArgument("record CSV nodes out of order");
        }
        std::array<double, 7> g;
        for (int k = 0; k < 7; ++k) g[k] = std::stod(c[7 + k]);
        r.geometry.push_back(g);
        std::array<cdouble, 6> v;
        for (int k = 0; k < 6; ++k) v[k] = cdouble(std::stod(c[14 + 2 * k]), std::stod(c[15 + 2 * k]));
        r.values.push_back(v);
    }
    return out;
}

template <int D>
std::shared_ptr<const SurfaceQuadrature<D>> quadrature_from_rows(const RecordRows& r, double radius)
{
    auto q = std::make_shared<SurfaceQuadrature<D>>();
    q->radius = radius;
    for (const auto& g : r.geometry) {
        Point<D> x, n;
        for (int k = 0; k < D; ++k) {
            x[k] = g[k];
            n[k] = g[3 + k];
        }
        q->nodes.push_back(x);
        q->normals.push_back(n);
        q->weights.push_back(g[6]);
    }
    return q;
}

template <int D>
void split_values(const RecordRows& r, std::vector<CVector<D>>& a, std::vector<CVector<D>>& b)
{
    for (const auto& v : r.values) {
        CVector<D> x, y;
        for (int k = 0; k < D; ++k) {
            x[k] = v[k];
            y[k] = v[3 + k];
        }
        a.push_back(x);
        b.push_back(y);
    }
}

} // namespace detail

/// Elastic records as CSV: a = u, b = Du.  Keys p:<|n|^2>, s:<|n|^2>, static:<i>.
template <int D>
std::string elastic_records_csv(const std::string& physics, const ElasticLatticeRecords<D>& recs,
                                const std::vector<ElasticBoundaryRecord<D>>& statics = {})
{
    std::string s = record_csv_header;
    s += '\n';
    auto emit = [&](const std::string& key, const std::string& wave, const ElasticBoundaryRecord<D>& r, double kappa) {
        detail::append_record_rows<D>(s, physics, key, wave, r.frequency.omega, kappa, *r.quadrature, r.u, r.du);
    };
    for (const auto& [shell, r] : recs.compressional) emit("p:" + std::to_string(shell), "p", r, r.frequency.kappa_p());
    for (const auto& [shell, r] : recs.shear) emit("s:" + std::to_string(shell), "s", r, r.frequency.kappa_s());
    for (std::size_t i = 0; i < statics.size(); ++i) {
        emit("static:" + std::to_string(i), "static", statics[i], statics[i].frequency.kappa_s());
    }
    return s;
}

/// Electromagnetic records as CSV: a = E x nu, b = H x nu.  Keys em:<|n|^2>.
inline std::string em_records_csv(const EMLatticeRecords& recs)
{
    std::string s = record_csv_header;
    s += '\n';
    for (const auto& [shell, r] : recs.records) {
        detail::append_record_rows<3>(s, "em", "em:" + std::to_string(shell), "em", r.kappa, r.kappa, *r.quadrature,
                                      r.e_cross_nu, r.h_cross_nu);
    }
    return s;
}

template <int D>
struct ParsedElasticRecords {
    ElasticLatticeRecords<D> lattice;
    std::vector<ElasticBoundaryRecord<D>> statics;
};

template <int D>
ParsedElasticRecords<D> parse_elastic_records(const std::string& text, double R, const ElasticMedium& medium)
{
    ParsedElasticRecords<D> out;
    out.lattice.R = R;
    out.lattice.medium = medium;
    std::shared_ptr<const SurfaceQuadrature<D>> q;
    std::map<int, ElasticBoundaryRecord<D>> statics;
    for (const auto& [key, rows] : detail::parse_record_rows(text)) {
        if (rows.dim != D) throw InvalidArgument("record dimension mismatch");
        if (!q) q = detail::quadrature_from_rows<D>(rows, R);
        ElasticBoundaryRecord<D> r;
        r.frequency = ElasticFrequency(rows.omega, medium);
        r.quadrature = q;
        detail::split_values<D>(rows, r.u, r.du);
        r.validate();
        const auto colon = key.find(':');
        const int index = std::stoi(key.substr(colon + 1));
        if (rows.wave == "p") {
            out.lattice.compressional.emplace(index, r);
        } else if (rows.wave == "s") {
            out.lattice.shear.emplace(index, r);
        } else {
            statics.emplace(index, r);
        }
    }
    for (auto& [i, r] : statics) out.statics.push_back(r);
    return out;
}

inline EMLatticeRecords parse_em_records(const std::string& text, double R)
{
    EMLatticeRecords out;
    out.R = R;
    std::shared_ptr<const SurfaceQuadrature<3>> q;
    for (const auto& [key, rows] : detail::parse_record_rows(text)) {
        if (rows.dim != 3) throw InvalidArgument("record dimension mismatch");
        if (!q) q = detail::quadrature_from_rows<3>(rows, R);
        EMBoundaryRecord r;
        r.kappa = rows.kappa;
        r.quadrature = q;
        detail::split_values<3>(rows, r.e_cross_nu, r.h_cross_nu);
        r.validate();
        out.records.emplace(std::stoi(key.substr(key.find(':') + 1)), r);
    }
    return out;
}

/// Lattice coefficients as CSV.
template <int D>
std::string lattice_csv(const FourierLattice<D>& lattice)
{
    std::string s = "n1,n2,n3,c1_re,c1_im,c2_re,c2_im,c3_re,c3_im\n";
    for (const auto& [n, c] : lattice.coefficients) {
        for (int k = 0; k < 3; ++k) s += (k ? "," : "") + std::to_string(k < D ? n[k] : 0);
        for (int k = 0; k < 3; ++k) {
            const cdouble z = k < D ? c[k] : cdouble(0.0);
            s += ',' + format_double(z.real()) + ',' + format_double(z.imag());
        }
        s += '\n';
    }
    return s;
}

} // namespace wavesrc
