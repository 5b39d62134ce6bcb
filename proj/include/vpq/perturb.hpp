#pragma once

/// \file perturb.hpp
/// Metropolis-Hastings vector perturbation: uniform-ball proposal around
/// the current latent, a support check that keeps the reverse move
/// proposable, and a kNN-density acceptance ratio. One MH step per call.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "vpq/density.hpp"
#include "vpq/rng.hpp"
#include "vpq/types.hpp"

namespace vpq {

struct PerturbConfig {
    RadiusParams radius;
    std::size_t dim = 0;

    void validate() const {
        radius.validate();
        require(dim >= 1, "PerturbConfig: dim must be >= 1");
    }
};

struct PerturbOutcome {
    LatentVector result;          // z if rejected, the proposal if accepted
    LatentVector proposal;
    double log_alpha = 0.0;       // log acceptance ratio, unclamped
    double radius = 0.0;          // R(z) = eta * DM(z), the proposal ball radius
    bool accepted = false;
    bool rejected_by_support = false;
};

/// Uniform draw from the closed ball of given radius around `center`:
/// direction v ~ N(0, I), length radius * rho^(1/d) with rho ~ U[0,1).
/// The result never lies outside the ball; accumulated rounding is
/// squeezed back in.
inline LatentVector sample_ball(std::span<const double> center, double radius, Rng& rng) {
    const std::size_t d = center.size();
    require(d >= 1, "sample_ball: empty center");
    require(radius >= 0.0 && std::isfinite(radius), "sample_ball: bad radius");
    check_vector(center, d, "sample_ball center");

    LatentVector offset(d);
    double norm2 = 0.0;
    do {
        norm2 = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            offset[j] = rng.normal();
            norm2 += offset[j] * offset[j];
        }
    } while (std::sqrt(norm2) < 1e-30);

    const double r = radius * std::pow(rng.uniform01(), 1.0 / static_cast<double>(d));
    const double scale = r / std::sqrt(norm2);
    for (std::size_t j = 0; j < d; ++j) offset[j] *= scale;

    LatentVector out(d);
    for (;;) {
        for (std::size_t j = 0; j < d; ++j) out[j] = center[j] + offset[j];
        double dist2 = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double t = out[j] - center[j];
            dist2 += t * t;
        }
        if (std::sqrt(dist2) <= radius) break;
        const double shrink = (radius / std::sqrt(dist2)) * (1.0 - 1e-12);
        for (std::size_t j = 0; j < d; ++j) offset[j] *= shrink;
    }
    return out;
}

namespace detail {

struct MhTerms {
    double log_ratio = 0.0;
    bool support_ok = false;
};

/// Assembles the support flag and log ratio from precomputed distances.
/// log_ratio = d * (log Dk(z) + log DM(z) - log Dk(z') - log DM(z')),
/// every distance floored before the log. Support holds when the move
/// length does not exceed eta * DM(z').
inline MhTerms mh_terms(double move_dist, double dk_z, double dM_z, double dk_p, double dM_p,
                        double eta, std::size_t dim) {
    const auto flog = [](double v) { return std::log(std::max(v, kDistanceFloor)); };
    MhTerms t;
    t.support_ok = move_dist <= eta * dM_p;
    t.log_ratio =
        static_cast<double>(dim) * (flog(dk_z) + flog(dM_z) - flog(dk_p) - flog(dM_p));
    return t;
}

/// (Dk, DM) at `q` regardless of the ordering of knn_k and M.
inline std::pair<double, double> density_radius_pair(std::span<const double> q,
                                                     const SampleSet& samples, std::size_t knn_k,
                                                     std::size_t M) {
    const auto [lo, hi] = std::minmax(knn_k, M);
    const auto [d_lo, d_hi] = knn_distance_pair(q, samples, lo, hi);
    return knn_k <= M ? std::pair{d_lo, d_hi} : std::pair{d_hi, d_lo};
}

inline void validate_perturb_inputs(std::span<const double> z, const SampleSet& samples,
                                    const PerturbConfig& cfg) {
    cfg.validate();
    require(samples.dim() == cfg.dim, "perturb: sample set dimension mismatch");
    require(samples.size() >= cfg.radius.knn_k, "perturb: sample set smaller than knn_k");
    check_vector(z, cfg.dim, "perturb input");
}

/// Accept-reject on a prepared proposal; (dk_z, dM_z) precomputed so the
/// caller's radius query is reused.
inline PerturbOutcome accept_reject(std::span<const double> z, LatentVector proposal,
                                    double dk_z, double dM_z, const SampleSet& samples,
                                    const PerturbConfig& cfg, std::size_t M, Rng& rng) {
    PerturbOutcome out;
    out.proposal = std::move(proposal);
    out.radius = cfg.radius.eta * dM_z;

    if (std::equal(z.begin(), z.end(), out.proposal.begin(), out.proposal.end())) {
        out.result = out.proposal;
        out.accepted = true;
        out.log_alpha = 0.0;
        return out;
    }

    const auto [dk_p, dM_p] = density_radius_pair(out.proposal, samples, cfg.radius.knn_k, M);
    const auto terms = mh_terms(distance(z, out.proposal), dk_z, dM_z, dk_p, dM_p,
                                cfg.radius.eta, cfg.dim);
    out.log_alpha = terms.log_ratio;

    if (!terms.support_ok) {
        out.result.assign(z.begin(), z.end());
        out.rejected_by_support = true;
        return out;
    }
    if (terms.log_ratio >= 0.0 || rng.uniform01() < std::exp(terms.log_ratio)) {
        out.result = out.proposal;
        out.accepted = true;
    } else {
        out.result.assign(z.begin(), z.end());
    }
    return out;
}

}  // namespace detail

/// Log acceptance ratio and support flag for an externally supplied
/// proposal. All four distance queries run against the one snapshot.
inline std::pair<double, bool> acceptance_log_ratio(std::span<const double> z,
                                                    std::span<const double> z_prop,
                                                    const SampleSet& samples,
                                                    const PerturbConfig& cfg) {
    detail::validate_perturb_inputs(z, samples, cfg);
    check_vector(z_prop, cfg.dim, "acceptance_log_ratio proposal");
    const std::size_t M = cell_count(samples.size(), cfg.radius.codebook_size);
    const auto [dk_z, dM_z] = detail::density_radius_pair(z, samples, cfg.radius.knn_k, M);
    const auto [dk_p, dM_p] = detail::density_radius_pair(z_prop, samples, cfg.radius.knn_k, M);
    const auto terms = detail::mh_terms(distance(z, z_prop), dk_z, dM_z, dk_p, dM_p,
                                        cfg.radius.eta, cfg.dim);
    return {terms.log_ratio, terms.support_ok};
}

/// One MH accept-reject step on a caller-chosen proposal. Exercises the
/// exact production decision path with the proposal pinned, which makes
/// acceptance frequencies measurable against hand-computed ratios.
inline PerturbOutcome perturb_with_proposal(std::span<const double> z, LatentVector proposal,
                                            const SampleSet& samples, const PerturbConfig& cfg,
                                            Rng& rng) {
    detail::validate_perturb_inputs(z, samples, cfg);
    check_vector(proposal, cfg.dim, "perturb proposal");
    const std::size_t M = cell_count(samples.size(), cfg.radius.codebook_size);
    const auto [dk_z, dM_z] = detail::density_radius_pair(z, samples, cfg.radius.knn_k, M);
    return detail::accept_reject(z, std::move(proposal), dk_z, dM_z, samples, cfg, M, rng);
}

/// One full MH step: radius R(z) = eta * DM(z), uniform-ball proposal,
/// support check, density-ratio accept-reject. Rejection of either kind
/// returns z itself.
inline PerturbOutcome perturb(std::span<const double> z, const SampleSet& samples,
                              const PerturbConfig& cfg, Rng& rng) {
    detail::validate_perturb_inputs(z, samples, cfg);
    const std::size_t M = cell_count(samples.size(), cfg.radius.codebook_size);
    const auto [dk_z, dM_z] = detail::density_radius_pair(z, samples, cfg.radius.knn_k, M);
    LatentVector proposal = sample_ball(z, cfg.radius.eta * dM_z, rng);
    return detail::accept_reject(z, std::move(proposal), dk_z, dM_z, samples, cfg, M, rng);
}

/// Elementwise perturb with the RNG substream for element i keyed by i.
/// Outcomes depend only on (element, index, seed), so evaluation order
/// cannot change them.
inline std::vector<PerturbOutcome> perturb_batch(std::span<const LatentVector> batch,
                                                 const SampleSet& samples,
                                                 const PerturbConfig& cfg, const Rng& rng) {
    std::vector<PerturbOutcome> out;
    out.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        Rng sub = rng.substream(static_cast<std::uint64_t>(i));
        out.push_back(perturb(batch[i], samples, cfg, sub));
    }
    return out;
}

}  // namespace vpq
