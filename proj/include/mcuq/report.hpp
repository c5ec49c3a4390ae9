#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mcuq/mc_tensor.hpp"
#include "mcuq/uncertainty_metrics.hpp"

namespace mcuq {

/// "START:STOP:STEP" inclusive grid.
struct GridSpec {
    double start = 0;
    double stop = 0;
    double step = 0;

    static GridSpec parse(const std::string& text);
    std::vector<double> values() const;
    std::string to_string() const;
};

struct AnalysisOptions {
    std::filesystem::path input;
    std::optional<McsFormat> format;  // empty: inferred from the extension
    Metric metric = Metric::sigma;
    std::size_t bins = 20;
    unsigned threads = 0;  // scheduling only; never alters results
    // select
    std::optional<double> epsilon;
    std::optional<GridSpec> epsilon_grid;
    double alpha = 1.0;
    double beta = 0.0;
    bool alpha_explicit = false;
    bool beta_explicit = false;
    // curves
    GridSpec fractions{0.0, 1.0, 0.1};
    GridSpec thresholds{0.0, 1.0, 0.05};
    std::string out;  // echoed into the report config
};

// Each run_* returns the finished artifact text; writing it anywhere is the
// caller's business. Reports are byte-deterministic: sorted keys, 12
// significant digits, independent of the thread count.

/// Full uncertainty report: per-item metrics plus, when labels are present,
/// accuracy, per-metric correlation/boxplot summaries, and the binned
/// accuracy curve for the selected metric.
std::string run_metrics(const AnalysisOptions& options);

/// Metrics report extended with accept/reject decisions: per-item outcomes
/// and ARQ at a single epsilon, or an ARQ curve over an epsilon grid.
std::string run_select(const AnalysisOptions& options);

struct CurvesOutput {
    std::string referral_csv;
    std::string threshold_csv;
};

/// Referral curve plus accuracy-vs-tolerated-uncertainty curve for the
/// selected metric, as two-column CSV.
CurvesOutput run_curves(const AnalysisOptions& options);

McsFormat infer_format(const std::filesystem::path& path, std::optional<McsFormat> requested);

std::string sha256_hex(std::string_view bytes);

}  // namespace mcuq
