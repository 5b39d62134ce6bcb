// Command-line experiment runner: simulate the training-time perturbation
// phase on a synthetic source, fit a codebook offline, score quantization
// at inference, and emit deterministic JSON/CSV artifacts.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "vpq/cli_version.hpp"
#include "vpq/codebook.hpp"
#include "vpq/config.hpp"
#include "vpq/io.hpp"
#include "vpq/pipeline.hpp"
#include "vpq/selftest.hpp"

namespace {

namespace fs = std::filesystem;

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);  // binary keeps LF endings everywhere
    if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
    os << content;
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

std::string report_json(const vpq::RunReport& report) {
    nlohmann::json j;
    j["mode"] = report.mode;
    j["K_effective"] = report.K_effective;
    j["cvu"] = report.cvu;
    j["mse"] = report.mse;
    j["median_radius"] = report.median_radius;
    j["median_error"] = report.median_error;
    j["acceptance_rate"] = report.acceptance_rate;
    j["support_rejection_rate"] = report.support_rejection_rate;
    j["defaulted_params"] = report.defaulted_params;
    return j.dump(2) + "\n";
}

std::string usage_csv(const std::vector<std::uint64_t>& usage) {
    std::uint64_t total = 0;
    for (std::uint64_t c : usage) total += c;
    std::string out = "code,count,frequency\n";
    for (std::size_t i = 0; i < usage.size(); ++i) {
        const double f =
            total == 0 ? 0.0 : static_cast<double>(usage[i]) / static_cast<double>(total);
        out += std::to_string(i) + "," + std::to_string(usage[i]) + "," +
               vpq::format_double(f) + "\n";
    }
    return out;
}

int cmd_run(const std::string& config_path) {
    if (!fs::exists(config_path))
        throw std::invalid_argument("config file not found: " + config_path);
    const vpq::ExperimentConfig cfg = vpq::parse_experiment_config_file(config_path);
    const vpq::RunReport report = vpq::run_pipeline(cfg);

    fs::create_directories(cfg.out_dir);
    write_text_file(fs::path(cfg.out_dir) / "report.json", report_json(report));
    write_text_file(fs::path(cfg.out_dir) / "usage.csv", usage_csv(report.usage));

    std::cout << "mode " << report.mode << ", K_effective " << report.K_effective << "\n"
              << "cvu " << report.cvu << ", mse " << report.mse << "\n"
              << "acceptance_rate " << report.acceptance_rate << ", support_rejection_rate "
              << report.support_rejection_rate << "\n"
              << "median_radius " << report.median_radius << ", median_error "
              << report.median_error << "\n"
              << "wall times (s): queue " << report.wall_queue_s << ", perturb "
              << report.wall_perturb_s << ", fit " << report.wall_fit_s << ", eval "
              << report.wall_eval_s << "\n"
              << "wrote " << (fs::path(cfg.out_dir) / "report.json").string() << " and "
              << (fs::path(cfg.out_dir) / "usage.csv").string() << "\n";
    return 0;
}

int cmd_figure(std::size_t levels, std::size_t samples, std::uint64_t seed,
               const std::string& out_path) {
    const auto rows = vpq::figure_fsp_vs_fsq(levels, samples, seed);
    std::string csv = "scheme,reproduction_value,probability_mass\n";
    for (const auto& r : rows) {
        csv += r.scheme + "," + vpq::format_double(r.reproduction_value) + "," +
               vpq::format_double(r.probability_mass) + "\n";
    }
    write_text_file(out_path, csv);
    std::cout << "wrote " << out_path << " (" << rows.size() << " rows)\n";
    return 0;
}

int cmd_codebook(const std::string& input, std::size_t K, std::uint64_t seed,
                 std::size_t max_iter, double tol, const std::string& out_path) {
    if (!fs::exists(input)) throw std::invalid_argument("latent dump not found: " + input);
    const vpq::SampleSet samples = vpq::read_latent_dump(input);
    const auto [cb, report] = vpq::kmeans_fit(samples, K, seed, max_iter, tol);
    vpq::write_codebook_file(out_path, cb);

    nlohmann::json sidecar;
    sidecar["K"] = cb.size();
    sidecar["dim"] = cb.dim;
    sidecar["seed"] = seed;
    sidecar["iterations"] = report.iterations;
    sidecar["inertia"] = report.final_inertia;
    write_text_file(out_path + ".json", sidecar.dump(2) + "\n");

    std::cout << "fit " << cb.size() << " codes of dim " << cb.dim << " from "
              << samples.size() << " samples in " << report.iterations << " iterations"
              << (report.converged ? " (converged)" : " (iteration cap)") << "\n"
              << "inertia " << report.final_inertia << "\n"
              << "wrote " << out_path << " and " << out_path << ".json\n";
    return 0;
}

int cmd_quantize(const std::string& input, const std::string& codebook_path,
                 const std::string& out_path) {
    if (!fs::exists(input)) throw std::invalid_argument("latent dump not found: " + input);
    if (!fs::exists(codebook_path))
        throw std::invalid_argument("codebook not found: " + codebook_path);
    const vpq::SampleSet samples = vpq::read_latent_dump(input);
    const vpq::Codebook cb = vpq::read_codebook_file(codebook_path);
    if (samples.dim() != cb.dim)
        throw std::invalid_argument("dump dimension does not match codebook dimension");

    std::string csv = "index,error\n";
    std::vector<std::uint64_t> counts(cb.size(), 0);
    double sq_sum = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto a = vpq::quantize(samples.row(i), cb);
        ++counts[a.index];
        sq_sum += a.error * a.error;
        csv += std::to_string(a.index) + "," + vpq::format_double(a.error) + "\n";
    }
    write_text_file(out_path, csv);

    const double n = static_cast<double>(samples.size());
    std::cout << "quantized " << samples.size() << " vectors against " << cb.size()
              << " codes\n";
    if (samples.size() > 0) {
        std::cout << "mse " << sq_sum / (n * static_cast<double>(samples.dim())) << ", cvu "
                  << vpq::cvu(vpq::UsageCounts::from_counts(counts)) << "\n";
    }
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Codebook-free latent quantization benchmark"};
    app.set_version_flag("--version", std::string(vpq::kCliVersion));
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run an experiment from a config file");
    std::string config_path;
    run->add_option("--config", config_path, "Experiment config file")->required();

    auto* figure = app.add_subcommand(
        "figure", "Output-distribution table for the two fixed scalar quantizers");
    std::size_t fig_levels = 4;
    std::size_t fig_samples = 100000;
    std::uint64_t fig_seed = 1;
    std::string fig_out;
    figure->add_option("--levels", fig_levels, "Level count L")->required();
    figure->add_option("--samples", fig_samples, "Number of uniform draws")->required();
    figure->add_option("--seed", fig_seed, "Seed")->required();
    figure->add_option("--out", fig_out, "Output CSV path")->required();

    auto* codebook = app.add_subcommand("codebook", "Fit a codebook from a latent dump");
    std::string cb_input;
    std::size_t cb_k = 0;
    std::uint64_t cb_seed = 1;
    std::size_t cb_max_iter = 100;
    double cb_tol = 1e-6;
    std::string cb_out;
    codebook->add_option("--input", cb_input, "Latent dump file")->required();
    codebook->add_option("--k", cb_k, "Number of codes")->required();
    codebook->add_option("--seed", cb_seed, "Seed");
    codebook->add_option("--max-iter", cb_max_iter, "Iteration cap");
    codebook->add_option("--tol", cb_tol, "Centroid-shift convergence threshold");
    codebook->add_option("--out", cb_out, "Output codebook file")->required();

    auto* quantize = app.add_subcommand("quantize", "Assign a latent dump to a saved codebook");
    std::string q_input;
    std::string q_codebook;
    std::string q_out;
    quantize->add_option("--input", q_input, "Latent dump file")->required();
    quantize->add_option("--codebook", q_codebook, "Codebook file")->required();
    quantize->add_option("--out", q_out, "Output CSV path")->required();

    auto* selftest = app.add_subcommand("selftest", "Run the built-in invariant checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (run->parsed()) return cmd_run(config_path);
        if (figure->parsed()) return cmd_figure(fig_levels, fig_samples, fig_seed, fig_out);
        if (codebook->parsed())
            return cmd_codebook(cb_input, cb_k, cb_seed, cb_max_iter, cb_tol, cb_out);
        if (quantize->parsed()) return cmd_quantize(q_input, q_codebook, q_out);
        if (selftest->parsed()) return vpq::run_selftest(std::cout) ? 0 : 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
