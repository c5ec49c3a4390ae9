#include "mcuq/dropweight_simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mcuq/uncertainty_metrics.hpp"

namespace mcuq {

namespace detail {

double SimRng::normal() {
    // u1 in (0,1] so the log is finite; the sine branch is discarded to keep
    // the stream layout one-call-per-value.
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t SimRng::uniform_index(std::size_t n) {
    const auto k = static_cast<std::size_t>(uniform01() * static_cast<double>(n));
    return std::min(k, n - 1);
}

// simulator_streams: two independent generators so the noise stream does not
// depend on how many draws the per-item structure consumed.
//   latent stream: mt19937_64(seed); per item, in order: true-class uniform,
//     ambiguity uniform, competing-class uniform, competing-weight uniform,
//     strength uniform (always all five, even for clean items).
//   noise stream: mt19937_64(seed ^ 0x9E3779B97F4A7C15); one normal per
//     (pass, item, class) in [t][i][c] order.
constexpr std::uint64_t kNoiseStreamXor = 0x9E3779B97F4A7C15ull;

std::vector<ItemLatent> draw_latents(const SimConfig& config) {
    SimRng rng(config.seed);
    std::vector<ItemLatent> latents(config.n_items);
    for (auto& latent : latents) {
        latent.true_class = rng.uniform_index(config.n_classes);
        latent.ambiguous = rng.uniform01() < config.difficulty_mix;
        const std::size_t k = rng.uniform_index(config.n_classes - 1);
        latent.competing_class = k >= latent.true_class ? k + 1 : k;
        latent.competing_weight = rng.uniform01();
        latent.strength = rng.uniform01();
    }
    return latents;
}

}  // namespace detail

namespace {

// Per-item evidence quality: the true-class logit is the configured
// concentration scaled into [lo, lo+span) by the strength latent, so easy
// and hard items coexist and errors grade smoothly with uncertainty.
constexpr double kStrengthLow = 0.85;
constexpr double kStrengthSpan = 0.3;
// Ambiguous items put their competing logit slightly above their true-class
// logit, so the ambiguous population is both high-uncertainty and
// error-prone.
constexpr double kCompetingLow = 1.05;
constexpr double kCompetingSpan = 0.45;

void softmax_into(std::span<const double> logits, std::span<double> out) {
    const double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (std::size_t c = 0; c < logits.size(); ++c) {
        out[c] = std::exp(logits[c] - m);
        sum += out[c];
    }
    for (std::size_t c = 0; c < logits.size(); ++c) out[c] /= sum;
}

}  // namespace

void SimConfig::validate() const {
    if (n_items < 1) throw ValidationError("n_items must be >= 1");
    if (n_classes < 2) throw ValidationError("n_classes must be >= 2");
    if (n_passes < 1) throw ValidationError("n_passes must be >= 1");
    if (!(std::isfinite(concentration) && concentration > 0))
        throw ValidationError("concentration must be > 0");
    if (!(std::isfinite(noise_scale) && noise_scale >= 0))
        throw ValidationError("noise_scale must be >= 0");
    if (!(std::isfinite(difficulty_mix) && difficulty_mix >= 0 && difficulty_mix <= 1))
        throw ValidationError("difficulty_mix must be in [0,1]");
}

SimResult simulate(const SimConfig& config) {
    config.validate();
    const auto latents = detail::draw_latents(config);

    const std::size_t t_count = config.n_passes;
    const std::size_t n = config.n_items;
    const std::size_t c_count = config.n_classes;

    std::vector<std::vector<double>> base_logits(n, std::vector<double>(c_count, 0.0));
    std::vector<std::int32_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& latent = latents[i];
        const double own = config.concentration * (kStrengthLow + kStrengthSpan * latent.strength);
        base_logits[i][latent.true_class] = own;
        if (latent.ambiguous)
            base_logits[i][latent.competing_class] =
                own * (kCompetingLow + kCompetingSpan * latent.competing_weight);
        labels[i] = static_cast<std::int32_t>(latent.true_class);
    }

    detail::SimRng noise(config.seed ^ detail::kNoiseStreamXor);
    std::vector<double> probs(t_count * n * c_count);
    std::vector<double> logits(c_count);
    for (std::size_t t = 0; t < t_count; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < c_count; ++c)
                logits[c] = base_logits[i][c] + config.noise_scale * noise.normal();
            softmax_into(logits, std::span<double>(probs).subspan((t * n + i) * c_count, c_count));
        }
    }
    return {McSampleSet(t_count, n, c_count, std::move(probs)), LabelSet(std::move(labels))};
}

SimSummary describe(const SimConfig& config, const McSampleSet& set, const LabelSet& labels) {
    config.validate();
    if (set.items() != config.n_items || set.passes() != config.n_passes ||
        set.classes() != config.n_classes)
        throw ValidationError("set dimensions do not match the config");
    labels.validate_against(set.items(), set.classes());

    const auto latents = detail::draw_latents(config);
    const auto items = compute_all(set);

    struct Accum {
        std::size_t count = 0, errors = 0;
        double sigma_sum = 0, entropy_sum = 0;
    } clean, ambiguous;

    std::size_t hits = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const bool correct =
            items[i].predicted_class == static_cast<std::size_t>(labels.at(i));
        if (correct) ++hits;
        Accum& g = latents[i].ambiguous ? ambiguous : clean;
        ++g.count;
        if (!correct) ++g.errors;
        g.sigma_sum += items[i].sigma_uncertainty;
        g.entropy_sum += items[i].entropy;
    }

    auto to_stats = [](const Accum& a) {
        GroupStats s;
        s.count = a.count;
        if (a.count > 0) {
            const double n = static_cast<double>(a.count);
            s.error_rate = static_cast<double>(a.errors) / n;
            s.mean_sigma = a.sigma_sum / n;
            s.mean_entropy = a.entropy_sum / n;
        }
        return s;
    };
    SimSummary summary;
    summary.clean = to_stats(clean);
    summary.ambiguous = to_stats(ambiguous);
    summary.overall_accuracy =
        static_cast<double>(hits) / static_cast<double>(items.size());
    return summary;
}

}  // namespace mcuq
