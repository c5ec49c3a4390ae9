#include "mcuq/selective_classification.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace mcuq {

namespace {

std::string format_value(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void require_strictly_increasing(std::span<const double> xs, const char* what) {
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (!(xs[i] > xs[i - 1]))
            throw ValidationError(std::string(what) + " must be strictly increasing");
}

std::vector<SelectionOutcome> decide(std::span<const ItemUncertainty> items, double epsilon,
                                     const std::optional<LabelSet>& labels) {
    if (epsilon < 0 || !std::isfinite(epsilon))
        throw ValidationError("epsilon must be finite and nonnegative");
    if (labels && labels->size() != items.size())
        throw ValidationError("label count does not match item count");
    std::vector<SelectionOutcome> out(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto& it = items[i];
        // it.leibig is the std of the argmax class, the sigma in the rule.
        const double top = it.mean_probs[it.predicted_class];
        double second = 0.0;
        bool have_second = false;
        for (std::size_t c = 0; c < it.mean_probs.size(); ++c) {
            if (c == it.predicted_class) continue;
            if (!have_second || it.mean_probs[c] > second) {
                second = it.mean_probs[c];
                have_second = true;
            }
        }
        SelectionOutcome& o = out[i];
        o.item = it.item;
        o.predicted_class = it.predicted_class;
        o.margin = top - second;
        o.threshold = epsilon * it.leibig;
        o.accepted = o.margin >= o.threshold;
        if (labels) o.correct = static_cast<std::size_t>(labels->at(i)) == it.predicted_class;
    }
    return out;
}

}  // namespace

void ArqParams::validate() const {
    if (!(std::isfinite(epsilon) && epsilon >= 0))
        throw ValidationError("epsilon must be finite and nonnegative");
    if (!(std::isfinite(alpha) && alpha >= 0))
        throw ValidationError("alpha must be finite and nonnegative");
    if (!(std::isfinite(beta) && beta >= 0))
        throw ValidationError("beta must be finite and nonnegative");
}

CurveSeries::CurveSeries(std::string x_label, std::string y_label, std::vector<CurvePoint> points)
    : x_label_(std::move(x_label)), y_label_(std::move(y_label)), points_(std::move(points)) {
    for (std::size_t i = 1; i < points_.size(); ++i)
        if (!(points_[i].x > points_[i - 1].x))
            throw ValidationError("curve x values must be strictly increasing");
}

std::string CurveSeries::to_csv() const {
    std::string out = x_label_ + "," + y_label_ + "\n";
    for (const auto& p : points_) {
        out += format_value(p.x);
        out += ',';
        out += format_value(p.y);
        out += '\n';
    }
    return out;
}

AcceptanceDecision acceptance_rule(std::span<const double> mean_probs,
                                   std::span<const double> class_stds, double epsilon) {
    if (mean_probs.size() < 2) throw ValidationError("acceptance rule needs C >= 2");
    if (class_stds.size() != mean_probs.size())
        throw ValidationError("class_stds length does not match mean_probs");
    if (epsilon < 0 || !std::isfinite(epsilon))
        throw ValidationError("epsilon must be finite and nonnegative");
    for (double s : class_stds)
        if (s < 0 || !std::isfinite(s)) throw ValidationError("class std must be >= 0");

    const std::size_t top = argmax_lowest(mean_probs);
    double second = -1.0;
    for (std::size_t c = 0; c < mean_probs.size(); ++c) {
        if (c == top) continue;
        second = std::max(second, mean_probs[c]);
    }
    AcceptanceDecision d;
    d.margin = mean_probs[top] - second;
    d.threshold = epsilon * class_stds[top];
    d.accepted = d.margin >= d.threshold;
    return d;
}

double accuracy(std::span<const std::size_t> predictions, const LabelSet& labels) {
    if (predictions.empty()) throw ValidationError("accuracy over an empty set is undefined");
    if (predictions.size() != labels.size())
        throw ValidationError("prediction/label length mismatch");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i)
        if (predictions[i] == static_cast<std::size_t>(labels.at(i))) ++hits;
    return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

double arq(std::span<const SelectionOutcome> outcomes, const ArqParams& params) {
    params.validate();
    if (outcomes.empty()) throw ValidationError("arq over an empty set is undefined");
    std::size_t accepted_correct = 0, accepted_wrong = 0, rejected = 0;
    for (const auto& o : outcomes) {
        if (!o.correct) throw SemanticError("arq requires labels for every outcome");
        if (!o.accepted)
            ++rejected;
        else if (*o.correct)
            ++accepted_correct;
        else
            ++accepted_wrong;
    }
    const double n = static_cast<double>(outcomes.size());
    return (static_cast<double>(accepted_correct) - params.alpha * static_cast<double>(accepted_wrong) -
            params.beta * static_cast<double>(rejected)) /
           n;
}

std::vector<SelectionOutcome> evaluate_selection(std::span<const ItemUncertainty> items,
                                                 double epsilon,
                                                 const std::optional<LabelSet>& labels) {
    return decide(items, epsilon, labels);
}

std::vector<SelectionOutcome> evaluate_selection(const McSampleSet& set, double epsilon,
                                                 const std::optional<LabelSet>& labels) {
    return decide(compute_all(set), epsilon, labels);
}

CurveSeries arq_sweep(std::span<const ItemUncertainty> items, const LabelSet& labels,
                      std::span<const double> epsilons, double alpha, double beta) {
    require_strictly_increasing(epsilons, "epsilons");
    if (!epsilons.empty() && epsilons.front() < 0)
        throw ValidationError("epsilons must be nonnegative");
    std::optional<LabelSet> opt_labels(labels);
    std::vector<CurvePoint> points;
    points.reserve(epsilons.size());
    for (double eps : epsilons) {
        auto outcomes = decide(items, eps, opt_labels);
        points.push_back({eps, arq(outcomes, ArqParams{eps, alpha, beta})});
    }
    return CurveSeries("epsilon", "arq", std::move(points));
}

CurveSeries arq_sweep(const McSampleSet& set, const LabelSet& labels,
                      std::span<const double> epsilons, double alpha, double beta) {
    const auto items = compute_all(set);
    return arq_sweep(items, labels, epsilons, alpha, beta);
}

CurveSeries referral_curve(std::span<const double> uncertainties,
                           const std::vector<bool>& correct,
                           std::span<const double> fractions) {
    if (uncertainties.size() != correct.size())
        throw ValidationError("uncertainty/correct length mismatch");
    if (uncertainties.empty()) throw ValidationError("referral over an empty set");
    require_strictly_increasing(fractions, "fractions");
    if (!fractions.empty() && (fractions.front() < 0 || fractions.back() > 1))
        throw ValidationError("fractions must lie in [0,1]");

    const std::size_t n = uncertainties.size();
    // Referral order: most uncertain first, ties by lower item index.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (uncertainties[a] != uncertainties[b]) return uncertainties[a] > uncertainties[b];
        return a < b;
    });
    // correct_after[k] = #correct among the items still retained after
    // referring the first k of the order.
    std::vector<std::size_t> correct_after(n + 1, 0);
    for (std::size_t k = n; k-- > 0;)
        correct_after[k] = correct_after[k + 1] + (correct[order[k]] ? 1 : 0);

    std::vector<CurvePoint> points;
    points.reserve(fractions.size());
    for (double r : fractions) {
        const auto referred = std::min<std::size_t>(
            n, static_cast<std::size_t>(std::ceil(r * static_cast<double>(n))));
        const std::size_t kept = n - referred;
        const double acc = kept == 0
                               ? 1.0
                               : static_cast<double>(correct_after[referred]) /
                                     static_cast<double>(kept);
        points.push_back({r, acc});
    }
    return CurveSeries("referred_fraction", "retained_accuracy", std::move(points));
}

CurveSeries accuracy_vs_threshold(std::span<const double> normalized_uncertainties,
                                  const std::vector<bool>& correct,
                                  std::span<const double> thresholds) {
    if (normalized_uncertainties.size() != correct.size())
        throw ValidationError("uncertainty/correct length mismatch");
    if (normalized_uncertainties.empty()) throw ValidationError("empty input");
    for (double u : normalized_uncertainties)
        if (!(u >= 0.0 && u <= 1.0))
            throw ValidationError("uncertainties must be normalized to [0,1]");
    require_strictly_increasing(thresholds, "thresholds");

    const std::size_t n = normalized_uncertainties.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return normalized_uncertainties[a] < normalized_uncertainties[b];
    });
    std::vector<double> sorted_u(n);
    std::vector<std::size_t> correct_prefix(n + 1, 0);
    for (std::size_t k = 0; k < n; ++k) {
        sorted_u[k] = normalized_uncertainties[order[k]];
        correct_prefix[k + 1] = correct_prefix[k] + (correct[order[k]] ? 1 : 0);
    }

    std::vector<CurvePoint> points;
    points.reserve(thresholds.size());
    for (double u : thresholds) {
        const auto kept = static_cast<std::size_t>(
            std::upper_bound(sorted_u.begin(), sorted_u.end(), u) - sorted_u.begin());
        const double acc = kept == 0 ? 1.0
                                     : static_cast<double>(correct_prefix[kept]) /
                                           static_cast<double>(kept);
        points.push_back({u, acc});
    }
    return CurveSeries("uncertainty_threshold", "accuracy", std::move(points));
}

}  // namespace mcuq
