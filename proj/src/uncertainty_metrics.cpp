#include "mcuq/uncertainty_metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace mcuq {

namespace {

void check_item(const McSampleSet& set, std::size_t item) {
    if (item >= set.items())
        throw std::out_of_range("item index " + std::to_string(item) + " out of range (N=" +
                                std::to_string(set.items()) + ")");
}

// Population variance per class: (1/T) sum (p - mean)^2, two-pass.
std::vector<double> per_class_variance(const McSampleSet& set, std::size_t item,
                                       const std::vector<double>& mean) {
    const std::size_t t_count = set.passes();
    std::vector<double> var(set.classes(), 0.0);
    for (std::size_t t = 0; t < t_count; ++t) {
        auto row = set.row(t, item);
        for (std::size_t c = 0; c < var.size(); ++c) {
            const double d = row[c] - mean[c];
            var[c] += d * d;
        }
    }
    for (double& v : var) v /= static_cast<double>(t_count);
    return var;
}

}  // namespace

std::span<const Metric> all_metrics() {
    static constexpr std::array<Metric, 7> kAll = {
        Metric::sigma,          Metric::entropy,        Metric::mutual_information,
        Metric::feinman,        Metric::leibig,         Metric::kwon_aleatoric,
        Metric::kwon_epistemic,
    };
    return kAll;
}

std::string metric_name(Metric m) {
    switch (m) {
        case Metric::sigma: return "sigma";
        case Metric::entropy: return "entropy";
        case Metric::mutual_information: return "mi";
        case Metric::feinman: return "feinman";
        case Metric::leibig: return "leibig";
        case Metric::kwon_aleatoric: return "kwon-aleatoric";
        case Metric::kwon_epistemic: return "kwon-epistemic";
    }
    throw std::logic_error("unknown metric");
}

Metric parse_metric(const std::string& name) {
    for (Metric m : all_metrics())
        if (metric_name(m) == name) return m;
    throw UsageError("unknown metric '" + name +
                     "' (expected sigma|entropy|mi|feinman|leibig|kwon-aleatoric|kwon-epistemic)");
}

double metric_value(const ItemUncertainty& item, Metric m) {
    switch (m) {
        case Metric::sigma: return item.sigma_uncertainty;
        case Metric::entropy: return item.entropy;
        case Metric::mutual_information: return item.mutual_information;
        case Metric::feinman: return item.feinman;
        case Metric::leibig: return item.leibig;
        case Metric::kwon_aleatoric: return item.kwon_aleatoric;
        case Metric::kwon_epistemic: return item.kwon_epistemic;
    }
    throw std::logic_error("unknown metric");
}

std::size_t argmax_lowest(std::span<const double> values) {
    // std::max_element keeps the first of equal maxima, which is the tie rule.
    return static_cast<std::size_t>(
        std::max_element(values.begin(), values.end()) - values.begin());
}

double shannon_entropy(std::span<const double> probs) {
    double h = 0.0;
    for (double p : probs)
        if (p > 0.0) h -= p * std::log(p);
    return h;
}

std::vector<double> predictive_mean(const McSampleSet& set, std::size_t item) {
    check_item(set, item);
    const std::size_t t_count = set.passes();
    std::vector<double> mean(set.classes(), 0.0);
    for (std::size_t t = 0; t < t_count; ++t) {
        auto row = set.row(t, item);
        for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += row[c];
    }
    for (double& v : mean) v /= static_cast<double>(t_count);
    return mean;
}

std::size_t predicted_class(const McSampleSet& set, std::size_t item) {
    return argmax_lowest(predictive_mean(set, item));
}

std::vector<double> per_class_std(const McSampleSet& set, std::size_t item) {
    auto var = per_class_variance(set, item, predictive_mean(set, item));
    for (double& v : var) v = std::sqrt(v);
    return var;
}

double sigma_uncertainty(const McSampleSet& set, std::size_t item) {
    auto stds = per_class_std(set, item);
    double s = 0.0;
    for (double v : stds) s += v;
    return s / static_cast<double>(stds.size());
}

double predictive_entropy(const McSampleSet& set, std::size_t item) {
    return shannon_entropy(predictive_mean(set, item));
}

double mutual_information(const McSampleSet& set, std::size_t item) {
    check_item(set, item);
    double mean_pass_entropy = 0.0;
    for (std::size_t t = 0; t < set.passes(); ++t)
        mean_pass_entropy += shannon_entropy(set.row(t, item));
    mean_pass_entropy /= static_cast<double>(set.passes());
    // Jensen gives nonnegativity analytically; clamp the float dust.
    return std::max(0.0, predictive_entropy(set, item) - mean_pass_entropy);
}

double feinman_uncertainty(const McSampleSet& set, std::size_t item) {
    auto var = per_class_variance(set, item, predictive_mean(set, item));
    double trace = 0.0;
    for (double v : var) trace += v;
    return trace;
}

double leibig_uncertainty(const McSampleSet& set, std::size_t item) {
    auto mean = predictive_mean(set, item);
    auto var = per_class_variance(set, item, mean);
    return std::sqrt(var[argmax_lowest(mean)]);
}

KwonDecomposition kwon_decomposition(const McSampleSet& set, std::size_t item) {
    check_item(set, item);
    auto mean = predictive_mean(set, item);
    auto var = per_class_variance(set, item, mean);
    KwonDecomposition k;
    for (std::size_t t = 0; t < set.passes(); ++t)
        for (double p : set.row(t, item)) k.aleatoric += p * (1.0 - p);
    k.aleatoric /= static_cast<double>(set.passes());
    for (double v : var) k.epistemic += v;
    return k;
}

namespace {

ItemUncertainty compute_item(const McSampleSet& set, std::size_t item) {
    ItemUncertainty r;
    r.item = item;
    r.mean_probs = predictive_mean(set, item);
    r.predicted_class = argmax_lowest(r.mean_probs);

    const auto var = per_class_variance(set, item, r.mean_probs);
    double std_sum = 0.0, trace = 0.0;
    for (double v : var) {
        std_sum += std::sqrt(v);
        trace += v;
    }
    r.sigma_uncertainty = std_sum / static_cast<double>(var.size());
    r.feinman = trace;
    r.kwon_epistemic = trace;
    r.leibig = std::sqrt(var[r.predicted_class]);

    r.entropy = shannon_entropy(r.mean_probs);
    double mean_pass_entropy = 0.0, aleatoric = 0.0;
    for (std::size_t t = 0; t < set.passes(); ++t) {
        auto row = set.row(t, item);
        mean_pass_entropy += shannon_entropy(row);
        for (double p : row) aleatoric += p * (1.0 - p);
    }
    const double t_count = static_cast<double>(set.passes());
    r.mutual_information = std::max(0.0, r.entropy - mean_pass_entropy / t_count);
    r.kwon_aleatoric = aleatoric / t_count;
    return r;
}

}  // namespace

std::vector<ItemUncertainty> compute_all(const McSampleSet& set, unsigned n_threads) {
    const std::size_t n = set.items();
    std::vector<ItemUncertainty> out(n);
    if (n_threads == 0) n_threads = std::max(1u, std::thread::hardware_concurrency());
    n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, n));

    if (n_threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = compute_item(set, i);
        return out;
    }
    // Contiguous chunks, each worker writing its own slots: output is
    // independent of the thread count.
    std::vector<std::thread> workers;
    workers.reserve(n_threads);
    const std::size_t chunk = (n + n_threads - 1) / n_threads;
    for (unsigned w = 0; w < n_threads; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        workers.emplace_back([&set, &out, begin, end] {
            for (std::size_t i = begin; i < end; ++i) out[i] = compute_item(set, i);
        });
    }
    for (auto& w : workers) w.join();
    return out;
}

std::vector<double> normalize_metric(std::span<const double> values) {
    if (values.empty()) throw ValidationError("normalize_metric: empty input");
    for (double v : values)
        if (!std::isfinite(v)) throw ValidationError("normalize_metric: non-finite input");
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it, hi = *hi_it;
    std::vector<double> out(values.size());
    if (lo == hi) return out;  // all-equal input maps to all zeros
    const double range = hi - lo;
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - lo) / range;
    return out;
}

}  // namespace mcuq
