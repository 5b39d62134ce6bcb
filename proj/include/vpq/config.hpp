#pragma once

/// \file config.hpp
/// Experiment configuration: a flat key-value text format with [section]
/// headers, '#' or ';' comments, and repeatable `component` lines for
/// mixture sources. Unknown keys are rejected so a typo cannot silently
/// fall back to a default. Grammar documented in the README.

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "vpq/fsp.hpp"
#include "vpq/sources.hpp"
#include "vpq/types.hpp"

namespace vpq {

enum class RunMode { vp, fsp, fsq, gaussian_grid };

inline const char* run_mode_name(RunMode m) {
    switch (m) {
        case RunMode::vp: return "vp";
        case RunMode::fsp: return "fsp";
        case RunMode::fsq: return "fsq";
        case RunMode::gaussian_grid: return "gaussian_grid";
    }
    throw std::invalid_argument("run_mode_name: unknown mode");
}

inline RunMode parse_run_mode(const std::string& s) {
    if (s == "vp") return RunMode::vp;
    if (s == "fsp") return RunMode::fsp;
    if (s == "fsq") return RunMode::fsq;
    if (s == "gaussian_grid") return RunMode::gaussian_grid;
    throw std::invalid_argument("unknown mode: " + s);
}

struct ExperimentConfig {
    SourceSpec source;
    RunMode mode = RunMode::vp;

    std::size_t K = 0;                 // vp target codebook size
    std::vector<std::size_t> levels;   // fsp / fsq per-dimension levels
    std::size_t bins = 0;              // gaussian_grid bins per dimension

    double eta = 1.0;
    std::size_t knn_k = 3;
    std::size_t queue_capacity = 65536;
    double subsample_fraction = 0.05;

    std::size_t queue_fill = 200000;   // source draws offered to the queue
    std::size_t fit_budget = 100000;   // source draws clustered offline
    std::size_t eval_budget = 100000;  // source draws scored at inference

    double mixture_p = 0.5;
    ActivationKind activation = ActivationKind::normal_cdf;

    std::uint64_t seed = 1;
    std::string out_dir = ".";

    // Parameters that stayed at defaults which have no published basis;
    // echoed into the run report.
    std::vector<std::string> defaulted;

    void validate() const {
        source.validate();
        require(eta > 0.0 && std::isfinite(eta), "config: eta must be positive");
        require(knn_k >= 1, "config: knn_k must be >= 1");
        require(queue_capacity >= 1, "config: queue_capacity must be >= 1");
        require(subsample_fraction > 0.0 && subsample_fraction <= 1.0,
                "config: subsample_fraction must be in (0,1]");
        require(queue_fill >= 1 && fit_budget >= 1 && eval_budget >= 1,
                "config: all sample budgets must be >= 1");
        require(mixture_p >= 0.0 && mixture_p <= 1.0, "config: mixture_p must be in [0,1]");
        switch (mode) {
            case RunMode::vp:
                require(K >= 1, "config: mode vp requires K");
                break;
            case RunMode::fsp:
            case RunMode::fsq:
                require(!levels.empty(), "config: scalar modes require levels (or a preset K)");
                require(levels.size() == source.dim,
                        "config: levels length must equal source dim");
                for (std::size_t L : levels) require(L >= 2, "config: levels must all be >= 2");
                break;
            case RunMode::gaussian_grid:
                require(bins >= 2, "config: mode gaussian_grid requires bins >= 2");
                break;
        }
    }
};

namespace detail {

struct RawConfig {
    // "section.key" -> values in file order; only `source.component` may repeat
    std::map<std::string, std::vector<std::string>> entries;

    bool has(const std::string& key) const { return entries.count(key) > 0; }

    const std::string& get(const std::string& key) const {
        const auto it = entries.find(key);
        require(it != entries.end(), "config: missing required key " + key);
        return it->second.front();
    }
};

inline std::string strip(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline RawConfig parse_raw_config(std::istream& is) {
    RawConfig raw;
    std::string line;
    std::string section;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto cut = line.find_first_of("#;");
        if (cut != std::string::npos) line.erase(cut);
        line = strip(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            require(line.back() == ']', "config line " + std::to_string(lineno) +
                                            ": unterminated section header");
            section = strip(line.substr(1, line.size() - 2));
            require(!section.empty(),
                    "config line " + std::to_string(lineno) + ": empty section name");
            continue;
        }
        const auto eq = line.find('=');
        require(eq != std::string::npos,
                "config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        require(!key.empty(), "config line " + std::to_string(lineno) + ": empty key");
        require(!section.empty(),
                "config line " + std::to_string(lineno) + ": key outside any [section]");
        const std::string full = section + "." + key;
        if (!raw.entries[full].empty() && full != "source.component") {
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": duplicate key " + full);
        }
        raw.entries[full].push_back(value);
    }
    return raw;
}

inline double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        require(pos == v.size(), "config: trailing junk in " + key);
        return x;
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument("config: cannot parse " + key + " as a number: " + v);
    } catch (const std::out_of_range&) {
        throw std::invalid_argument("config: value out of range for " + key + ": " + v);
    }
}

inline std::uint64_t to_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const unsigned long long x = std::stoull(v, &pos);
        require(pos == v.size(), "config: trailing junk in " + key);
        return static_cast<std::uint64_t>(x);
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument("config: cannot parse " + key + " as an integer: " + v);
    } catch (const std::out_of_range&) {
        throw std::invalid_argument("config: value out of range for " + key + ": " + v);
    }
}

inline std::vector<double> to_doubles(const std::string& key, const std::string& v) {
    std::istringstream ss(v);
    std::vector<double> out;
    std::string tok;
    while (ss >> tok) out.push_back(to_double(key, tok));
    require(!out.empty(), "config: empty list for " + key);
    return out;
}

inline std::vector<std::size_t> to_sizes(const std::string& key, const std::string& v) {
    std::istringstream ss(v);
    std::vector<std::size_t> out;
    std::string tok;
    while (ss >> tok) out.push_back(static_cast<std::size_t>(to_u64(key, tok)));
    require(!out.empty(), "config: empty list for " + key);
    return out;
}

inline const std::map<std::string, int>& known_config_keys() {
    static const std::map<std::string, int> keys = {
        {"source.kind", 0},      {"source.dim", 0},      {"source.seed", 0},
        {"source.lo", 0},        {"source.hi", 0},       {"source.mean", 0},
        {"source.variance", 0},  {"source.component", 0}, {"source.inner", 0},
        {"source.outer", 0},     {"run.mode", 0},        {"run.K", 0},
        {"run.levels", 0},       {"run.bins", 0},        {"run.eta", 0},
        {"run.knn_k", 0},        {"run.queue_capacity", 0},
        {"run.subsample_fraction", 0},                   {"run.queue_fill", 0},
        {"run.fit_budget", 0},   {"run.eval_budget", 0}, {"run.mixture_p", 0},
        {"run.activation", 0},   {"run.seed", 0},        {"run.out_dir", 0},
    };
    return keys;
}

}  // namespace detail

/// Parses and validates a full experiment description. Throws
/// std::invalid_argument on any malformed, unknown, or inconsistent entry.
inline ExperimentConfig parse_experiment_config(std::istream& is) {
    using detail::to_double;
    using detail::to_doubles;
    using detail::to_sizes;
    using detail::to_u64;

    const auto raw = detail::parse_raw_config(is);
    for (const auto& [key, values] : raw.entries) {
        require(detail::known_config_keys().count(key) > 0, "config: unknown key " + key);
        (void)values;
    }

    ExperimentConfig cfg;
    cfg.mode = parse_run_mode(raw.get("run.mode"));

    SourceSpec& src = cfg.source;
    src.kind = parse_source_kind(raw.get("source.kind"));
    src.dim = static_cast<std::size_t>(to_u64("source.dim", raw.get("source.dim")));
    if (raw.has("run.seed")) cfg.seed = to_u64("run.seed", raw.get("run.seed"));
    src.seed = raw.has("source.seed") ? to_u64("source.seed", raw.get("source.seed")) : cfg.seed;

    if (raw.has("source.lo")) src.cube_lo = to_double("source.lo", raw.get("source.lo"));
    if (raw.has("source.hi")) src.cube_hi = to_double("source.hi", raw.get("source.hi"));
    if (raw.has("source.mean")) src.mean = to_doubles("source.mean", raw.get("source.mean"));
    if (raw.has("source.variance"))
        src.variance = to_doubles("source.variance", raw.get("source.variance"));
    if (raw.has("source.inner"))
        src.inner_radius = to_double("source.inner", raw.get("source.inner"));
    if (raw.has("source.outer"))
        src.outer_radius = to_double("source.outer", raw.get("source.outer"));
    if (raw.has("source.component")) {
        for (const std::string& line : raw.entries.at("source.component")) {
            const auto nums = to_doubles("source.component", line);
            require(nums.size() == src.dim + 2,
                    "config: source.component needs weight, dim means, sigma");
            MixtureComponent c;
            c.weight = nums.front();
            c.mean.assign(nums.begin() + 1, nums.end() - 1);
            c.sigma = nums.back();
            src.components.push_back(std::move(c));
        }
    }

    if (raw.has("run.K")) cfg.K = static_cast<std::size_t>(to_u64("run.K", raw.get("run.K")));
    if (raw.has("run.levels")) cfg.levels = to_sizes("run.levels", raw.get("run.levels"));
    if (raw.has("run.bins"))
        cfg.bins = static_cast<std::size_t>(to_u64("run.bins", raw.get("run.bins")));
    if (raw.has("run.eta")) cfg.eta = to_double("run.eta", raw.get("run.eta"));
    if (raw.has("run.knn_k"))
        cfg.knn_k = static_cast<std::size_t>(to_u64("run.knn_k", raw.get("run.knn_k")));
    if (raw.has("run.queue_capacity"))
        cfg.queue_capacity =
            static_cast<std::size_t>(to_u64("run.queue_capacity", raw.get("run.queue_capacity")));
    if (raw.has("run.subsample_fraction"))
        cfg.subsample_fraction =
            to_double("run.subsample_fraction", raw.get("run.subsample_fraction"));
    if (raw.has("run.queue_fill"))
        cfg.queue_fill =
            static_cast<std::size_t>(to_u64("run.queue_fill", raw.get("run.queue_fill")));
    if (raw.has("run.fit_budget"))
        cfg.fit_budget =
            static_cast<std::size_t>(to_u64("run.fit_budget", raw.get("run.fit_budget")));
    if (raw.has("run.eval_budget"))
        cfg.eval_budget =
            static_cast<std::size_t>(to_u64("run.eval_budget", raw.get("run.eval_budget")));
    if (raw.has("run.mixture_p"))
        cfg.mixture_p = to_double("run.mixture_p", raw.get("run.mixture_p"));
    if (raw.has("run.activation")) {
        const std::string& a = raw.get("run.activation");
        if (a == "tanh_rescaled") cfg.activation = ActivationKind::tanh_rescaled;
        else if (a == "normal_cdf") cfg.activation = ActivationKind::normal_cdf;
        else if (a == "sigmoid") cfg.activation = ActivationKind::sigmoid;
        else throw std::invalid_argument("config: unknown activation " + a);
    }
    if (raw.has("run.out_dir")) cfg.out_dir = raw.get("run.out_dir");

    // Scalar modes may borrow a preset level allocation from K.
    if ((cfg.mode == RunMode::fsp || cfg.mode == RunMode::fsq) && cfg.levels.empty() &&
        cfg.K >= 1) {
        cfg.levels = default_levels(cfg.K);
    }

    // Defaults without a published basis, when left in place and relevant.
    const bool uses_mh = cfg.mode == RunMode::vp;
    if (!raw.has("run.eta")) cfg.defaulted.push_back("eta");
    if (uses_mh && !raw.has("run.knn_k")) cfg.defaulted.push_back("knn_k");
    if (uses_mh && !raw.has("run.queue_capacity")) cfg.defaulted.push_back("queue_capacity");
    if (uses_mh && !raw.has("run.subsample_fraction"))
        cfg.defaulted.push_back("subsample_fraction");
    if (uses_mh && !raw.has("run.queue_fill")) cfg.defaulted.push_back("queue_fill");
    if (uses_mh && !raw.has("run.fit_budget")) cfg.defaulted.push_back("fit_budget");
    if (!raw.has("run.eval_budget")) cfg.defaulted.push_back("eval_budget");

    cfg.validate();
    return cfg;
}

inline ExperimentConfig parse_experiment_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("cannot open config file: " + path);
    return parse_experiment_config(is);
}

}  // namespace vpq
