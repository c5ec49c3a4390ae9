#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mcuq/mc_tensor.hpp"
#include "mcuq/selective_classification.hpp"
#include "mcuq/uncertainty_metrics.hpp"

namespace mcuq {

enum class CorrectnessGroup { correct, erroneous };

/// Five-number summary. Quartiles use medians of the lower/upper halves of
/// the sorted data, excluding the middle element when the count is odd;
/// half-medians of even length interpolate linearly (mean of the two middle
/// values). min/max are the raw extremes, no whisker trimming.
struct BoxplotStats {
    double min = 0;
    double q1 = 0;
    double median = 0;
    double q3 = 0;
    double max = 0;
    std::size_t count = 0;
};

struct BoxplotSummary : BoxplotStats {
    CorrectnessGroup group = CorrectnessGroup::correct;
};

/// Headline error-uncertainty relationship for one metric. Degenerate
/// statistics are carried as empty optionals instead of NaN: spearman_rho is
/// absent when the binned series is constant or has fewer than three bins,
/// wasserstein is absent when either correctness group is empty.
struct CorrelationReport {
    std::optional<double> spearman_rho;
    std::optional<double> wasserstein;
    std::size_t n_correct = 0;
    std::size_t n_error = 0;
};

/// Pearson correlation of fractional (average-tie) ranks. Returns nullopt
/// when either series is constant after ranking. Throws on length mismatch,
/// fewer than 3 points, or non-finite input.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

/// Exact 1-Wasserstein distance between two empirical distributions: the
/// area between their sorted CDFs. For equal sizes n this reduces to
/// (1/n) * sum |a_(i) - b_(i)| over sorted order.
double wasserstein_1d(std::span<const double> a, std::span<const double> b);

/// Partition uncertainties by prediction correctness, preserving relative
/// order within each group.
std::pair<std::vector<double>, std::vector<double>> split_by_correctness(
    std::span<const double> uncertainties, std::span<const std::size_t> predictions,
    const LabelSet& labels);

BoxplotStats boxplot_summary(std::span<const double> values);

/// Items sorted by uncertainty, split into n_bins contiguous equal-count
/// bins (remainder spread to the earliest bins); each point is (mean bin
/// uncertainty, bin accuracy). Adjacent bins whose mean uncertainties tie
/// are merged so the x axis stays strictly increasing.
CurveSeries binned_uncertainty_accuracy(std::span<const double> uncertainties,
                                        const std::vector<bool>& correct, std::size_t n_bins);

/// Spearman over the binned (uncertainty, error-rate) series plus the
/// Wasserstein distance between the correct-group and erroneous-group
/// uncertainty distributions.
CorrelationReport error_uncertainty_report(const McSampleSet& set, const LabelSet& labels,
                                           Metric metric, std::size_t n_bins = 20);
CorrelationReport error_uncertainty_report(std::span<const ItemUncertainty> items,
                                           const LabelSet& labels, Metric metric,
                                           std::size_t n_bins = 20);

}  // namespace mcuq
