// wavesrc_lab: forward simulation, reconstruction and stability sweeps.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "wavesrc/wavesrc.hpp"

namespace fs = std::filesystem;
using namespace wavesrc;

namespace {

constexpr int exit_config = 2;
constexpr int exit_tolerance = 3;

struct Options {
    std::string config;
    std::string out = "out";
    std::string records;
    std::optional<std::uint64_t> seed;
    std::string resolution;
};

ExperimentConfig load(const Options& o)
{
    ExperimentConfig c;
    if (!o.config.empty()) {
        c = load_config(o.config);
    }
    if (o.seed) c.seed = *o.seed;
    if (!o.resolution.empty()) c.resolution.preset = o.resolution;
    c.validate();
    return c;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_file(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

template <int D>
std::string elastic_forward(const ExperimentConfig& c)
{
    const Resolution res = resolve(c);
    const ElasticMedium m{c.lambda, c.mu};
    const auto src = make_elastic_source<D>(c);
    auto q = std::make_shared<const SurfaceQuadrature<D>>(make_surface_quadrature<D>(c.R, res.surface));
    ElasticForwardOptions opt;
    opt.source_grid = res.source_grid;
    opt.min_margin = c.margin();
    const auto recs = elastic_lattice_records<D>(src, m, c.R, c.max_N(), q, opt);
    std::vector<ElasticBoundaryRecord<D>> statics;
    if (!src.zero_mean) {
        for (double w : static_frequencies) {
            statics.push_back(elastic_boundary_data<D>(src, ElasticFrequency(w, m), m, q, opt));
        }
    }
    return elastic_records_csv<D>(c.physics, recs, statics);
}

std::string em_forward(const ExperimentConfig& c)
{
    const Resolution res = resolve(c);
    const auto src = make_em_source(c);
    auto q = std::make_shared<const SurfaceQuadrature<3>>(make_surface_quadrature<3>(c.R, res.surface));
    EMForwardOptions opt;
    opt.source_grid = res.source_grid;
    opt.min_margin = c.margin();
    return em_records_csv(em_lattice_records(src, c.R, c.max_N(), q, opt));
}

void write_report(const fs::path& path, const ExperimentConfig& c, int N, double rel, double tail, double coef)
{
    json j{{"physics", c.physics}, {"N", N}, {"recon_rel_l2", rel}, {"truncation_tail", tail},
           {"coefficient_error", coef}};
    write_file(path, j.dump(2) + "\n");
}

template <int D>
void elastic_recover(const ExperimentConfig& c, const std::string& text, const fs::path& out)
{
    const Resolution res = resolve(c);
    const ElasticMedium m{c.lambda, c.mu};
    const auto parsed = parse_elastic_records<D>(text, c.R, m);
    const auto src = make_elastic_source<D>(c);
    const int N = c.max_N();
    FourierLattice<D> lattice = elastic_lattice_recover<D>(parsed.lattice, N);
    if (parsed.statics.size() == 2) {
        const auto mean = static_mean_recover<D>(parsed.statics[0], parsed.statics[1]);
        lattice.set(MultiIndex<D>{}, mean.integral / std::pow(2.0 * c.R, D));
    }
    const auto rep = reconstruct<D>(lattice, make_box_grid<D>(c.R, res.recon_grid), src);
    write_file(out / "lattice.csv", lattice_csv<D>(lattice));
    write_report(out / "report.json", c, N, rep.relative_l2, rep.truncation_tail, rep.coefficient_error);
    std::printf("N=%d recon_rel_l2=%.6g truncation_tail=%.6g\n", N, rep.relative_l2, rep.truncation_tail);
}

void em_recover(const ExperimentConfig& c, const std::string& text, const fs::path& out)
{
    const Resolution res = resolve(c);
    const auto recs = parse_em_records(text, c.R);
    const int N = c.max_N();
    const auto lattice = em_lattice_recover(recs, N);
    const auto rep = reconstruct<3>(lattice, make_box_grid<3>(c.R, res.recon_grid), make_em_source(c));
    write_file(out / "lattice.csv", lattice_csv<3>(lattice));
    write_report(out / "report.json", c, N, rep.relative_l2, rep.truncation_tail, rep.coefficient_error);
    std::printf("N=%d recon_rel_l2=%.6g truncation_tail=%.6g\n", N, rep.relative_l2, rep.truncation_tail);
}

int cmd_forward(const Options& o)
{
    const ExperimentConfig c = load(o);
    fs::create_directories(o.out);
    std::string csv;
    if (c.physics == "elastic2d") {
        csv = elastic_forward<2>(c);
    } else if (c.physics == "elastic3d") {
        csv = elastic_forward<3>(c);
    } else {
        csv = em_forward(c);
    }
    const fs::path path = fs::path(o.out) / "records.csv";
    write_file(path, csv);
    save_config(c, (fs::path(o.out) / "config.json").string());
    std::printf("%s\n", path.string().c_str());
    return 0;
}

int cmd_recover(const Options& o)
{
    const ExperimentConfig c = load(o);
    const std::string records = o.records.empty() ? (fs::path(o.out) / "records.csv").string() : o.records;
    const std::string text = read_file(records);
    fs::create_directories(o.out);
    if (c.physics == "elastic2d") {
        elastic_recover<2>(c, text, o.out);
    } else if (c.physics == "elastic3d") {
        elastic_recover<3>(c, text, o.out);
    } else {
        em_recover(c, text, o.out);
    }
    return 0;
}

int cmd_sweep(const Options& o)
{
    const ExperimentConfig c = load(o);
    const StabilityReport report = run_stability_sweep(c);
    for (const auto& p : emit_outputs(report, o.out)) {
        std::printf("%s\n", p.c_str());
    }
    return 0;
}

int cmd_selftest()
{
    int failed = 0;
    for (const auto& r : run_selftest()) {
        std::printf("%s %s value=%.3g tol=%.3g%s%s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.value,
                    r.tolerance, r.detail.empty() ? "" : " ", r.detail.c_str());
        failed += r.passed ? 0 : 1;
    }
    return failed == 0 ? 0 : exit_tolerance;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Forward simulation and multi-frequency source reconstruction for elastic and electromagnetic waves"};
    app.require_subcommand(1);
    Options o;
    auto add_common = [&o](CLI::App* sub) {
        sub->add_option("--config", o.config, "experiment configuration (JSON)");
        sub->add_option("--out", o.out, "output directory");
        sub->add_option("--seed", o.seed, "RNG seed");
        sub->add_option("--resolution", o.resolution, "coarse | default | fine | custom");
    };
    CLI::App* forward = app.add_subcommand("forward", "emit boundary records at the lattice frequencies");
    CLI::App* recover = app.add_subcommand("recover", "records to lattice and reconstruction");
    CLI::App* sweep = app.add_subcommand("sweep", "stability study over N and noise");
    CLI::App* selftest = app.add_subcommand("selftest", "run invariant checks");
    for (CLI::App* s : {forward, recover, sweep, selftest}) add_common(s);
    recover->add_option("--records", o.records, "records CSV (default <out>/records.csv)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_config;
    }

    try {
        if (*forward) return cmd_forward(o);
        if (*recover) return cmd_recover(o);
        if (*sweep) return cmd_sweep(o);
        return cmd_selftest();
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return exit_config;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
