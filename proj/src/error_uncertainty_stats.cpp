#include "mcuq/error_uncertainty_stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mcuq {

namespace {

std::vector<double> fractional_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        // 1-based ranks i+1..j+1 share their average.
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double median_sorted(std::span<const double> v) {
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

}  // namespace

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ValidationError("spearman: length mismatch");
    if (x.size() < 3) throw ValidationError("spearman needs at least 3 points");
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
            throw ValidationError("spearman: non-finite input");

    const auto rx = fractional_ranks(x);
    const auto ry = fractional_ranks(y);
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = rx[i] - mx;
        const double dy = ry[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;  // constant series: undefined
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double wasserstein_1d(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw ValidationError("wasserstein_1d: empty input");
    for (double v : a)
        if (!std::isfinite(v)) throw ValidationError("wasserstein_1d: non-finite input");
    for (double v : b)
        if (!std::isfinite(v)) throw ValidationError("wasserstein_1d: non-finite input");

    std::vector<double> sa(a.begin(), a.end());
    std::vector<double> sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());

    // Sweep the merged support; between consecutive breakpoints the two CDFs
    // are constant, so the area contribution is |Fa - Fb| * dt.
    const double wa = 1.0 / static_cast<double>(sa.size());
    const double wb = 1.0 / static_cast<double>(sb.size());
    std::size_t i = 0, j = 0;
    double fa = 0.0, fb = 0.0;
    double prev = 0.0;
    double total = 0.0;
    bool started = false;
    while (i < sa.size() || j < sb.size()) {
        const double v = (j >= sb.size() || (i < sa.size() && sa[i] <= sb[j])) ? sa[i] : sb[j];
        if (started) total += std::abs(fa - fb) * (v - prev);
        while (i < sa.size() && sa[i] == v) {
            fa += wa;
            ++i;
        }
        while (j < sb.size() && sb[j] == v) {
            fb += wb;
            ++j;
        }
        prev = v;
        started = true;
    }
    return total;
}

std::pair<std::vector<double>, std::vector<double>> split_by_correctness(
    std::span<const double> uncertainties, std::span<const std::size_t> predictions,
    const LabelSet& labels) {
    if (uncertainties.size() != predictions.size() || predictions.size() != labels.size())
        throw ValidationError("split_by_correctness: length mismatch");
    std::vector<double> correct, erroneous;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i] == static_cast<std::size_t>(labels.at(i)))
            correct.push_back(uncertainties[i]);
        else
            erroneous.push_back(uncertainties[i]);
    }
    return {std::move(correct), std::move(erroneous)};
}

BoxplotStats boxplot_summary(std::span<const double> values) {
    if (values.empty()) throw ValidationError("boxplot_summary: empty input");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    BoxplotStats s;
    s.count = v.size();
    s.min = v.front();
    s.max = v.back();
    s.median = median_sorted(v);
    if (v.size() == 1) {
        s.q1 = s.q3 = v[0];
        return s;
    }
    const std::size_t half = v.size() / 2;  // middle element excluded when odd
    s.q1 = median_sorted(std::span<const double>(v.data(), half));
    s.q3 = median_sorted(std::span<const double>(v.data() + (v.size() - half), half));
    return s;
}

namespace {

struct Bin {
    double sum_u = 0;
    std::size_t n_correct = 0;
    std::size_t count = 0;
    double mean_u() const { return sum_u / static_cast<double>(count); }
};

std::vector<Bin> build_bins(std::span<const double> uncertainties,
                            const std::vector<bool>& correct, std::size_t n_bins) {
    const std::size_t n = uncertainties.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (uncertainties[a] != uncertainties[b]) return uncertainties[a] < uncertainties[b];
        return a < b;
    });

    const std::size_t base = n / n_bins;
    const std::size_t remainder = n % n_bins;
    std::vector<Bin> bins;
    bins.reserve(n_bins);
    std::size_t pos = 0;
    for (std::size_t b = 0; b < n_bins; ++b) {
        Bin bin;
        const std::size_t size = base + (b < remainder ? 1 : 0);
        for (std::size_t k = 0; k < size; ++k, ++pos) {
            bin.sum_u += uncertainties[order[pos]];
            bin.n_correct += correct[order[pos]] ? 1 : 0;
            ++bin.count;
        }
        bins.push_back(bin);
    }
    // Merge bins whose mean uncertainty fails to strictly increase (possible
    // only with heavily tied values).
    std::vector<Bin> merged;
    for (const auto& bin : bins) {
        if (!merged.empty() && bin.mean_u() <= merged.back().mean_u()) {
            merged.back().sum_u += bin.sum_u;
            merged.back().n_correct += bin.n_correct;
            merged.back().count += bin.count;
        } else {
            merged.push_back(bin);
        }
    }
    return merged;
}

}  // namespace

CurveSeries binned_uncertainty_accuracy(std::span<const double> uncertainties,
                                        const std::vector<bool>& correct, std::size_t n_bins) {
    if (uncertainties.size() != correct.size())
        throw ValidationError("binned_uncertainty_accuracy: length mismatch");
    if (n_bins < 2) throw ValidationError("binned_uncertainty_accuracy needs n_bins >= 2");
    if (uncertainties.size() < n_bins)
        throw ValidationError("binned_uncertainty_accuracy: too few items for " +
                              std::to_string(n_bins) + " bins");
    for (double u : uncertainties)
        if (!std::isfinite(u)) throw ValidationError("non-finite uncertainty");

    const auto bins = build_bins(uncertainties, correct, n_bins);
    std::vector<CurvePoint> points;
    points.reserve(bins.size());
    for (const auto& bin : bins)
        points.push_back(
            {bin.mean_u(), static_cast<double>(bin.n_correct) / static_cast<double>(bin.count)});
    return CurveSeries("mean_uncertainty", "accuracy", std::move(points));
}

CorrelationReport error_uncertainty_report(std::span<const ItemUncertainty> items,
                                           const LabelSet& labels, Metric metric,
                                           std::size_t n_bins) {
    if (labels.size() != items.size())
        throw ValidationError("label count does not match item count");
    if (items.empty()) throw ValidationError("error_uncertainty_report: empty input");
    if (n_bins < 2) throw ValidationError("error_uncertainty_report needs n_bins >= 2");

    const std::size_t n = items.size();
    std::vector<double> values(n);
    std::vector<std::size_t> predictions(n);
    std::vector<bool> correct(n);
    for (std::size_t i = 0; i < n; ++i) {
        values[i] = metric_value(items[i], metric);
        predictions[i] = items[i].predicted_class;
        correct[i] = predictions[i] == static_cast<std::size_t>(labels.at(i));
    }

    CorrelationReport report;
    auto [correct_u, error_u] = split_by_correctness(values, predictions, labels);
    report.n_correct = correct_u.size();
    report.n_error = error_u.size();
    if (!correct_u.empty() && !error_u.empty())
        report.wasserstein = wasserstein_1d(correct_u, error_u);

    // Small sets degrade to one item per bin rather than failing.
    const auto bins = build_bins(values, correct, std::min(n_bins, n));
    if (bins.size() >= 3) {
        std::vector<double> bin_u(bins.size()), bin_err(bins.size());
        for (std::size_t b = 0; b < bins.size(); ++b) {
            bin_u[b] = bins[b].mean_u();
            bin_err[b] = 1.0 - static_cast<double>(bins[b].n_correct) /
                                   static_cast<double>(bins[b].count);
        }
        report.spearman_rho = spearman(bin_u, bin_err);
    }
    return report;
}

CorrelationReport error_uncertainty_report(const McSampleSet& set, const LabelSet& labels,
                                           Metric metric, std::size_t n_bins) {
    const auto items = compute_all(set);
    return error_uncertainty_report(items, labels, metric, n_bins);
}

}  // namespace mcuq
