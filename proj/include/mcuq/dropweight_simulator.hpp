#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "mcuq/mc_tensor.hpp"

namespace mcuq {

/// Synthetic stochastic-classifier configuration. Each item gets a base
/// logit vector favoring its true class; a difficulty_mix fraction of items
/// additionally gets a competing logit on a second class strong enough to
/// mislead the argmax, producing the high-uncertainty error-prone population
/// the downstream statistics are exercised against. Every pass perturbs the
/// logits with i.i.d. zero-mean Gaussian noise of scale noise_scale before
/// the softmax.
struct SimConfig {
    std::size_t n_items = 1000;
    std::size_t n_classes = 4;
    std::size_t n_passes = 50;
    double concentration = 3.0;  // true-class logit height
    double noise_scale = 1.0;    // per-pass logit perturbation scale
    double difficulty_mix = 0.3; // fraction of deliberately ambiguous items
    std::uint64_t seed = 42;

    void validate() const;
};

struct SimResult {
    McSampleSet set;
    LabelSet labels;
};

/// Deterministic for a given config: same seed, same bytes.
///
/// Random streams are fixed for reproducibility: two mt19937_64 generators
/// (one for per-item structure, one for pass noise, see simulator_streams in
/// the .cpp), uniform doubles from the top 53 bits, normals via Box-Muller
/// on two uniforms.
SimResult simulate(const SimConfig& config);

struct GroupStats {
    std::size_t count = 0;
    std::optional<double> error_rate;    // absent when the group is empty
    std::optional<double> mean_sigma;
    std::optional<double> mean_entropy;
};

struct SimSummary {
    GroupStats clean;
    GroupStats ambiguous;
    double overall_accuracy = 0;
};

/// Per-group counts, error rates, and mean uncertainties for a tensor that
/// simulate() produced from this config (group membership is re-derived from
/// the seed).
SimSummary describe(const SimConfig& config, const McSampleSet& set, const LabelSet& labels);

namespace detail {

/// Seedable generator with fixed derived draws; the simulator's entire
/// stream layout is expressed through these three calls. mt19937_64 output
/// is bit-specified by the standard, and the mappings below avoid
/// std::uniform_real_distribution / std::normal_distribution, whose streams
/// vary across standard libraries.
class SimRng {
public:
    explicit SimRng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1): top 53 bits of one engine output, times 2^-53.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller (two uniforms per call, cosine branch).
    double normal();

    /// Uniform integer in [0, n): floor(uniform01() * n).
    std::size_t uniform_index(std::size_t n);

private:
    std::mt19937_64 engine_;
};

struct ItemLatent {
    std::size_t true_class = 0;
    bool ambiguous = false;
    std::size_t competing_class = 0;
    double competing_weight = 0;  // uniform in [0,1): strength of the misleading class
    double strength = 0;          // uniform in [0,1): per-item evidence quality
};

std::vector<ItemLatent> draw_latents(const SimConfig& config);

}  // namespace detail

}  // namespace mcuq
