#pragma once

/// \file pipeline.hpp
/// End-to-end experiment phases: fill the sample queue from a synthetic
/// source, perturb an evaluation batch, fit a codebook offline, quantize a
/// fresh batch, and report utilization and distortion. Also the scalar
/// quantizer pipeline and the FSP-vs-FSQ output-distribution table.
///
/// Determinism contract: every phase derives its randomness from the run
/// seed through fixed substream keys, so a rerun with the same config
/// reproduces every number exactly. Wall times are informational and never
/// enter serialized outputs.

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vpq/codebook.hpp"
#include "vpq/config.hpp"
#include "vpq/fsp.hpp"
#include "vpq/metrics.hpp"
#include "vpq/perturb.hpp"
#include "vpq/sample_queue.hpp"
#include "vpq/sources.hpp"
#include "vpq/types.hpp"

namespace vpq {

struct RunReport {
    std::string mode;
    std::uint64_t K_effective = 0;
    double cvu = 0.0;
    double mse = 0.0;
    double median_radius = 0.0;           // median R(z) over the perturb batch (vp only)
    double median_error = 0.0;            // median inference quantization error
    double acceptance_rate = 0.0;         // vp only; 0 for scalar modes
    double support_rejection_rate = 0.0;  // vp only; 0 for scalar modes
    std::vector<std::uint64_t> usage;     // per-code / per-token counts
    std::vector<std::string> defaulted_params;

    // Informational only; excluded from serialized reports so reruns stay
    // byte-identical.
    double wall_queue_s = 0.0;
    double wall_perturb_s = 0.0;
    double wall_fit_s = 0.0;
    double wall_eval_s = 0.0;
};

namespace detail {

// Substream keys for the run seed; fixed so phases stay independent of
// each other's draw counts.
inline constexpr std::uint64_t kQueueStream = 1;
inline constexpr std::uint64_t kPerturbStream = 2;
inline constexpr std::uint64_t kFitStream = 3;
inline constexpr std::uint64_t kScalarStream = 4;

// Source batch streams per phase.
inline constexpr std::uint64_t kSourceQueue = 0;
inline constexpr std::uint64_t kSourcePerturb = 1;
inline constexpr std::uint64_t kSourceFit = 2;
inline constexpr std::uint64_t kSourceEval = 3;

class PhaseTimer {
public:
    PhaseTimer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

/// Training-time simulation plus offline codebook generation and
/// inference-time scoring for the vector-perturbation mode.
inline RunReport run_vp_pipeline(const ExperimentConfig& cfg) {
    cfg.validate();
    require(cfg.mode == RunMode::vp, "run_vp_pipeline: mode must be vp");
    require(cfg.fit_budget >= cfg.K, "config: fit_budget must be >= K");

    const Rng base(cfg.seed);
    RunReport report;
    report.mode = run_mode_name(cfg.mode);
    report.K_effective = cfg.K;
    report.defaulted_params = cfg.defaulted;

    // Phase 1: stream source batches through the subsampling queue.
    detail::PhaseTimer t_queue;
    SampleQueue queue(cfg.queue_capacity, cfg.source.dim);
    {
        Rng queue_rng = base.substream(detail::kQueueStream);
        const auto draws = sample_source(cfg.source, cfg.queue_fill, detail::kSourceQueue);
        constexpr std::size_t kChunk = 4096;
        for (std::size_t off = 0; off < draws.size(); off += kChunk) {
            const std::size_t len = std::min(kChunk, draws.size() - off);
            queue.push_subsampled(std::span(draws).subspan(off, len), cfg.subsample_fraction,
                                  queue_rng);
        }
    }
    const SampleSet snapshot = queue.snapshot();
    require(snapshot.size() >= cfg.knn_k,
            "config: queue too small for knn_k; raise queue_fill or subsample_fraction");
    report.wall_queue_s = t_queue.seconds();

    // Phase 2: one MH step per evaluation point against the snapshot.
    detail::PhaseTimer t_perturb;
    {
        PerturbConfig pcfg;
        pcfg.radius.codebook_size = cfg.K;
        pcfg.radius.eta = cfg.eta;
        pcfg.radius.knn_k = cfg.knn_k;
        pcfg.dim = cfg.source.dim;
        const auto batch = sample_source(cfg.source, cfg.eval_budget, detail::kSourcePerturb);
        const auto outcomes =
            perturb_batch(batch, snapshot, pcfg, base.substream(detail::kPerturbStream));
        std::vector<double> radii;
        radii.reserve(outcomes.size());
        std::size_t accepted = 0;
        std::size_t support_rejected = 0;
        for (const auto& o : outcomes) {
            radii.push_back(o.radius);
            if (o.accepted) ++accepted;
            if (o.rejected_by_support) ++support_rejected;
        }
        report.median_radius = median(std::move(radii));
        const double n = static_cast<double>(outcomes.size());
        report.acceptance_rate = static_cast<double>(accepted) / n;
        report.support_rejection_rate = static_cast<double>(support_rejected) / n;
    }
    report.wall_perturb_s = t_perturb.seconds();

    // Phase 3: offline clustering on a fresh training dump.
    detail::PhaseTimer t_fit;
    Codebook cb;
    {
        const auto fit_draws = sample_source(cfg.source, cfg.fit_budget, detail::kSourceFit);
        const SampleSet fit_set = SampleSet::from_vectors(fit_draws, cfg.source.dim);
        auto [fitted, fit_report] =
            kmeans_fit(fit_set, cfg.K, base.substream_seed(detail::kFitStream));
        (void)fit_report;
        cb = std::move(fitted);
    }
    report.wall_fit_s = t_fit.seconds();

    // Phase 4: nearest-code assignment of a fresh batch.
    detail::PhaseTimer t_eval;
    {
        const auto eval_draws = sample_source(cfg.source, cfg.eval_budget, detail::kSourceEval);
        const auto assignment = quantize_batch(eval_draws, cb);
        std::vector<LatentVector> codes;
        codes.reserve(eval_draws.size());
        std::vector<double> errors;
        errors.reserve(eval_draws.size());
        for (std::size_t i = 0; i < eval_draws.size(); ++i) {
            const auto code = cb.code(assignment.indices[i]);
            codes.emplace_back(code.begin(), code.end());
            errors.push_back(distance(eval_draws[i], codes.back()));
        }
        report.mse = mse(eval_draws, codes);
        report.median_error = median(std::move(errors));
        report.usage = assignment.counts;
        report.cvu = cvu(UsageCounts::from_counts(assignment.counts));
    }
    report.wall_eval_s = t_eval.seconds();
    return report;
}

/// Scalar quantizer scoring: activation (unless the source already lives
/// on the unit cube), per-dimension quantization, token packing, CVU over
/// token ids, MSE in the quantized space.
inline RunReport run_scalar_pipeline(const ExperimentConfig& cfg) {
    cfg.validate();
    require(cfg.mode == RunMode::fsp || cfg.mode == RunMode::fsq ||
                cfg.mode == RunMode::gaussian_grid,
            "run_scalar_pipeline: mode must be fsp, fsq, or gaussian_grid");

    RunReport report;
    report.mode = run_mode_name(cfg.mode);
    report.defaulted_params = cfg.defaulted;

    const std::size_t d = cfg.source.dim;
    std::vector<std::size_t> token_levels;
    if (cfg.mode == RunMode::gaussian_grid) {
        token_levels.assign(d, cfg.bins);
    } else {
        token_levels = cfg.levels;
    }
    const std::uint64_t vocab = level_product(token_levels);
    require(vocab <= (std::uint64_t(1) << 20),
            "config: token vocabulary too large for usage accounting");
    report.K_effective = vocab;

    const bool bypass_activation = cfg.source.kind == SourceKind::uniform_cube;
    if (cfg.mode != RunMode::gaussian_grid && bypass_activation) {
        require(cfg.source.cube_lo >= 0.0 && cfg.source.cube_hi <= 1.0,
                "config: uniform_cube source must stay in [0,1] for scalar modes");
    }

    FspConfig fcfg;
    fcfg.levels = token_levels;
    fcfg.eta = cfg.eta;
    fcfg.activation = cfg.activation;
    fcfg.mixture_p = cfg.mixture_p;

    detail::PhaseTimer t_eval;
    const auto draws = sample_source(cfg.source, cfg.eval_budget, detail::kSourceEval);
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(vocab), 0);
    std::vector<LatentVector> inputs;
    std::vector<LatentVector> outputs;
    inputs.reserve(draws.size());
    outputs.reserve(draws.size());
    std::vector<double> errors;
    errors.reserve(draws.size());

    GaussianGrid grid(cfg.mode == RunMode::gaussian_grid ? cfg.bins : 2);
    for (const auto& raw : draws) {
        ScalarQuantized q;
        if (cfg.mode == RunMode::gaussian_grid) {
            q = grid.quantize(raw);
            inputs.push_back(raw);
        } else {
            LatentVector z = bypass_activation ? raw : activate(raw, cfg.activation);
            q = cfg.mode == RunMode::fsp ? fsp_quantize(z, fcfg) : fsq_quantize(z, token_levels);
            inputs.push_back(std::move(z));
        }
        ++counts[static_cast<std::size_t>(index_pack(q.indices, token_levels))];
        errors.push_back(distance(inputs.back(), q.value));
        outputs.push_back(std::move(q.value));
    }
    report.mse = mse(inputs, outputs);
    report.median_error = median(std::move(errors));
    report.usage = counts;
    report.cvu = cvu(UsageCounts::from_counts(std::move(counts)));
    report.wall_eval_s = t_eval.seconds();
    return report;
}

inline RunReport run_pipeline(const ExperimentConfig& cfg) {
    return cfg.mode == RunMode::vp ? run_vp_pipeline(cfg) : run_scalar_pipeline(cfg);
}

struct FigureRow {
    std::string scheme;        // "fsp" or "fsq"
    double reproduction_value = 0.0;
    double probability_mass = 0.0;
};

/// Empirical output distributions of the two fixed scalar quantizers on a
/// uniform source: L centroid rows, then L boundary-grid rows. Masses per
/// scheme sum to 1.
inline std::vector<FigureRow> figure_fsp_vs_fsq(std::size_t L, std::size_t n,
                                                std::uint64_t seed) {
    require(L >= 2, "figure: L must be >= 2");
    require(n >= 1, "figure: n must be >= 1");
    Rng rng(seed);
    std::vector<std::uint64_t> fsp_counts(L, 0);
    std::vector<std::uint64_t> fsq_counts(L, 0);
    const std::vector<std::size_t> levels{L};
    FspConfig fcfg;
    fcfg.levels = levels;
    for (std::size_t i = 0; i < n; ++i) {
        const LatentVector z{rng.uniform01()};
        ++fsp_counts[fsp_quantize(z, fcfg).indices[0]];
        ++fsq_counts[fsq_quantize(z, levels).indices[0]];
    }
    std::vector<FigureRow> rows;
    rows.reserve(2 * L);
    const double inv = 1.0 / static_cast<double>(n);
    const auto cents = centroids(L);
    for (std::size_t l = 0; l < L; ++l)
        rows.push_back({"fsp", cents[l], static_cast<double>(fsp_counts[l]) * inv});
    for (std::size_t l = 0; l < L; ++l)
        rows.push_back({"fsq", static_cast<double>(l) / static_cast<double>(L - 1),
                        static_cast<double>(fsq_counts[l]) * inv});
    return rows;
}

}  // namespace vpq
