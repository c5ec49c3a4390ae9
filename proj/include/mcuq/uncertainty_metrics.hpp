#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mcuq/mc_tensor.hpp"

namespace mcuq {

/// Everything the pipeline derives per item from the T sampled softmax rows.
///
/// Conventions shared by all metrics: natural-log entropies, population
/// (1/T) variances, argmax ties broken toward the lowest class index.
struct ItemUncertainty {
    std::size_t item = 0;
    std::size_t predicted_class = 0;
    std::vector<double> mean_probs;
    double sigma_uncertainty = 0;   // mean over classes of the per-class std
    double entropy = 0;             // Shannon entropy of mean_probs, nats
    double mutual_information = 0;  // entropy minus mean per-pass entropy
    double feinman = 0;             // trace of the empirical covariance
    double leibig = 0;              // std of the predicted class's probability
    double kwon_aleatoric = 0;      // mean over passes of sum p(1-p)
    double kwon_epistemic = 0;      // trace of the empirical covariance
};

enum class Metric {
    sigma,
    entropy,
    mutual_information,
    feinman,
    leibig,
    kwon_aleatoric,
    kwon_epistemic,
};

/// All seven metrics, in a stable order for report iteration.
std::span<const Metric> all_metrics();

/// CLI spellings: sigma, entropy, mi, feinman, leibig, kwon-aleatoric,
/// kwon-epistemic.
std::string metric_name(Metric m);
Metric parse_metric(const std::string& name);
double metric_value(const ItemUncertainty& item, Metric m);

std::vector<double> predictive_mean(const McSampleSet& set, std::size_t item);
std::size_t predicted_class(const McSampleSet& set, std::size_t item);
std::vector<double> per_class_std(const McSampleSet& set, std::size_t item);
double sigma_uncertainty(const McSampleSet& set, std::size_t item);
double predictive_entropy(const McSampleSet& set, std::size_t item);
double mutual_information(const McSampleSet& set, std::size_t item);
double feinman_uncertainty(const McSampleSet& set, std::size_t item);
double leibig_uncertainty(const McSampleSet& set, std::size_t item);

struct KwonDecomposition {
    double aleatoric = 0;
    double epistemic = 0;
};
KwonDecomposition kwon_decomposition(const McSampleSet& set, std::size_t item);

/// One record per item, ordered by item index. Items are processed across
/// n_threads workers (0 = hardware concurrency); output is identical for any
/// thread count.
std::vector<ItemUncertainty> compute_all(const McSampleSet& set, unsigned n_threads = 0);

/// Min-max normalization onto [0,1]; an all-equal input maps to all zeros.
/// Throws ValidationError on empty or non-finite input.
std::vector<double> normalize_metric(std::span<const double> values);

/// First index attaining the maximum (ties -> lowest index).
std::size_t argmax_lowest(std::span<const double> values);

/// -sum p ln p with 0 ln 0 := 0, in nats.
double shannon_entropy(std::span<const double> probs);

}  // namespace mcuq
