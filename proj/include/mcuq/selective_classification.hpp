#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcuq/mc_tensor.hpp"
#include "mcuq/uncertainty_metrics.hpp"

namespace mcuq {

/// Per-item accept/reject decision together with the quantities that
/// produced it: margin = P1 - P2 of the predictive mean, threshold =
/// epsilon * std of the predicted class. accepted <=> margin >= threshold.
struct SelectionOutcome {
    std::size_t item = 0;
    bool accepted = false;
    double margin = 0;
    double threshold = 0;
    std::size_t predicted_class = 0;
    std::optional<bool> correct;  // present iff labels were supplied
};

struct AcceptanceDecision {
    bool accepted = false;
    double margin = 0;
    double threshold = 0;
};

/// Cost parameters of the accuracy-rejection quotient: alpha per accepted
/// misclassification, beta per rejection.
struct ArqParams {
    double epsilon = 0;
    double alpha = 1;
    double beta = 0;
    void validate() const;  // finite and nonnegative
};

struct CurvePoint {
    double x = 0;
    double y = 0;
};

/// Ordered (x, y) series with strictly increasing x, plus axis metadata.
class CurveSeries {
public:
    CurveSeries(std::string x_label, std::string y_label, std::vector<CurvePoint> points);

    const std::string& x_label() const { return x_label_; }
    const std::string& y_label() const { return y_label_; }
    const std::vector<CurvePoint>& points() const { return points_; }

    /// Two-column CSV: "<x_label>,<y_label>" header, one row per point,
    /// values with 12 significant digits.
    std::string to_csv() const;

private:
    std::string x_label_;
    std::string y_label_;
    std::vector<CurvePoint> points_;
};

/// Margin test: accept iff P1 - P2 >= epsilon * std(argmax class), where P1
/// and P2 are the two largest components of the predictive mean. epsilon = 0
/// or a zero std always accepts.
AcceptanceDecision acceptance_rule(std::span<const double> mean_probs,
                                   std::span<const double> class_stds, double epsilon);

/// Fraction of predictions equal to their label.
double accuracy(std::span<const std::size_t> predictions, const LabelSet& labels);

/// (1/N) * [#(accepted & correct) - alpha * #(accepted & wrong)
///          - beta * #(rejected)]. Every outcome must carry a correct flag.
double arq(std::span<const SelectionOutcome> outcomes, const ArqParams& params);

/// Decide every item of the set at one epsilon. Labels, when present, fill
/// the correct flags.
std::vector<SelectionOutcome> evaluate_selection(const McSampleSet& set, double epsilon,
                                                 const std::optional<LabelSet>& labels);

/// Same, reusing precomputed per-item records plus the predicted-class stds
/// they already carry (leibig is exactly the argmax-class std).
std::vector<SelectionOutcome> evaluate_selection(std::span<const ItemUncertainty> items,
                                                 double epsilon,
                                                 const std::optional<LabelSet>& labels);

/// One ARQ value per epsilon; x = epsilon.
CurveSeries arq_sweep(const McSampleSet& set, const LabelSet& labels,
                      std::span<const double> epsilons, double alpha, double beta);
CurveSeries arq_sweep(std::span<const ItemUncertainty> items, const LabelSet& labels,
                      std::span<const double> epsilons, double alpha, double beta);

/// For each referral fraction r, refer the ceil(r*N) most-uncertain items
/// (ties by item index, lower index referred first) and report accuracy on
/// the remainder; an empty remainder reports 1.0.
CurveSeries referral_curve(std::span<const double> uncertainties,
                           const std::vector<bool>& correct,
                           std::span<const double> fractions);

/// For each threshold u, accuracy over items with normalized uncertainty
/// <= u; an empty retained set reports 1.0. Input must lie in [0,1].
CurveSeries accuracy_vs_threshold(std::span<const double> normalized_uncertainties,
                                  const std::vector<bool>& correct,
                                  std::span<const double> thresholds);

}  // namespace mcuq
