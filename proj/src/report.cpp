#include "mcuq/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "mcuq/error_uncertainty_stats.hpp"
#include "mcuq/json_writer.hpp"
#include "mcuq/selective_classification.hpp"

namespace mcuq {

namespace {

constexpr int kReportVersion = 1;

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("read failure: " + path.string());
    return std::move(buf).str();
}

std::string format_value(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

struct LoadedInput {
    LoadedSampleSet data;
    std::string digest;
    McsFormat format;
};

LoadedInput load_input(const AnalysisOptions& options) {
    const McsFormat format = infer_format(options.input, options.format);
    auto data = load_mcs(options.input, format);
    return {std::move(data), sha256_hex(read_file(options.input)), format};
}

void write_boxplot(JsonWriter& w, const BoxplotStats& b) {
    w.begin_object();
    w.key("count");
    w.value(b.count);
    w.key("max");
    w.value(b.max);
    w.key("median");
    w.value(b.median);
    w.key("min");
    w.value(b.min);
    w.key("q1");
    w.value(b.q1);
    w.key("q3");
    w.value(b.q3);
    w.end_object();
}

void write_curve(JsonWriter& w, const std::string& name, const CurveSeries& curve) {
    w.begin_object();
    w.key("name");
    w.value(name);
    w.key("points");
    w.begin_array();
    for (const auto& p : curve.points()) {
        w.begin_array();
        w.value(p.x);
        w.value(p.y);
        w.end_array();
    }
    w.end_array();
    w.key("x_label");
    w.value(curve.x_label());
    w.key("y_label");
    w.value(curve.y_label());
    w.end_object();
}

// Keys alphabetical within the object; threads deliberately not echoed, it
// cannot change any number in the report.
void write_config_tail(JsonWriter& w, const AnalysisOptions& options, McsFormat format) {
    w.key("format");
    w.value(format == McsFormat::csv ? "csv" : "binary");
    w.key("input");
    w.value(options.input.string());
    w.key("metric");
    w.value(metric_name(options.metric));
    w.key("out");
    w.value(options.out);
}

void write_items(JsonWriter& w, const std::vector<ItemUncertainty>& items,
                 const std::vector<SelectionOutcome>* outcomes) {
    w.key("items");
    w.begin_array();
    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto& it = items[i];
        w.begin_object();
        w.key("entropy");
        w.value(it.entropy);
        w.key("feinman");
        w.value(it.feinman);
        w.key("item");
        w.value(it.item);
        w.key("kwon-aleatoric");
        w.value(it.kwon_aleatoric);
        w.key("kwon-epistemic");
        w.value(it.kwon_epistemic);
        w.key("leibig");
        w.value(it.leibig);
        w.key("mean_probs");
        w.begin_array();
        for (double p : it.mean_probs) w.value(p);
        w.end_array();
        w.key("mi");
        w.value(it.mutual_information);
        w.key("predicted_class");
        w.value(it.predicted_class);
        if (outcomes) {
            const auto& o = (*outcomes)[i];
            w.key("selection");
            w.begin_object();
            w.key("accepted");
            w.value(o.accepted);
            if (o.correct) {
                w.key("correct");
                w.value(*o.correct);
            }
            w.key("margin");
            w.value(o.margin);
            w.key("threshold");
            w.value(o.threshold);
            w.end_object();
        }
        w.key("sigma");
        w.value(it.sigma_uncertainty);
        w.end_object();
    }
    w.end_array();
}

// summary.correlations + summary.boxplots computed for every metric;
// summary.accuracy from the argmax predictions. Only meaningful with labels.
void write_labeled_summary(JsonWriter& w, const std::vector<ItemUncertainty>& items,
                           const LabelSet& labels, std::size_t bins,
                           const std::optional<double>& arq_value) {
    std::vector<std::size_t> predictions(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) predictions[i] = items[i].predicted_class;

    w.key("accuracy");
    w.value(accuracy(predictions, labels));
    if (arq_value) {
        w.key("arq");
        w.value(*arq_value);
    }

    w.key("boxplots");
    w.begin_object();
    for (Metric m : all_metrics()) {
        std::vector<double> values(items.size());
        for (std::size_t i = 0; i < items.size(); ++i) values[i] = metric_value(items[i], m);
        auto [correct_u, error_u] = split_by_correctness(values, predictions, labels);
        w.key(metric_name(m));
        w.begin_object();
        if (!correct_u.empty()) {
            w.key("correct");
            write_boxplot(w, boxplot_summary(correct_u));
        }
        if (!error_u.empty()) {
            w.key("erroneous");
            write_boxplot(w, boxplot_summary(error_u));
        }
        w.end_object();
    }
    w.end_object();

    w.key("correlations");
    w.begin_object();
    for (Metric m : all_metrics()) {
        const auto report = error_uncertainty_report(items, labels, m, bins);
        w.key(metric_name(m));
        w.begin_object();
        w.key("n_correct");
        w.value(report.n_correct);
        w.key("n_error");
        w.value(report.n_error);
        w.key("spearman_degenerate");
        w.value(!report.spearman_rho.has_value());
        if (report.spearman_rho) {
            w.key("spearman_rho");
            w.value(*report.spearman_rho);
        }
        if (report.wasserstein) {
            w.key("wasserstein");
            w.value(*report.wasserstein);
        }
        w.key("wasserstein_unavailable");
        w.value(!report.wasserstein.has_value());
        w.end_object();
    }
    w.end_object();
}

std::vector<bool> correctness_flags(const std::vector<ItemUncertainty>& items,
                                    const LabelSet& labels) {
    std::vector<bool> correct(items.size());
    for (std::size_t i = 0; i < items.size(); ++i)
        correct[i] = items[i].predicted_class == static_cast<std::size_t>(labels.at(i));
    return correct;
}

}  // namespace

GridSpec GridSpec::parse(const std::string& text) {
    GridSpec g;
    double parts[3];
    std::size_t start = 0;
    for (int k = 0; k < 3; ++k) {
        const std::size_t pos = text.find(':', start);
        const bool last = k == 2;
        if (last != (pos == std::string::npos))
            throw UsageError("grid must be START:STOP:STEP, got '" + text + "'");
        const std::string field = text.substr(start, last ? std::string::npos : pos - start);
        try {
            std::size_t used = 0;
            parts[k] = std::stod(field, &used);
            if (used != field.size()) throw std::invalid_argument(field);
        } catch (const std::exception&) {
            throw UsageError("bad grid number '" + field + "' in '" + text + "'");
        }
        start = pos + 1;
    }
    g.start = parts[0];
    g.stop = parts[1];
    g.step = parts[2];
    if (!(std::isfinite(g.start) && std::isfinite(g.stop) && std::isfinite(g.step)))
        throw UsageError("grid bounds must be finite");
    if (g.step <= 0) throw UsageError("grid step must be > 0");
    if (g.stop < g.start) throw UsageError("grid stop must be >= start");
    if ((g.stop - g.start) / g.step > 1e7) throw UsageError("grid has too many points");
    return g;
}

std::vector<double> GridSpec::values() const {
    const auto count =
        static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> out(count);
    for (std::size_t k = 0; k < count; ++k) out[k] = start + static_cast<double>(k) * step;
    return out;
}

std::string GridSpec::to_string() const {
    return format_value(start) + ":" + format_value(stop) + ":" + format_value(step);
}

McsFormat infer_format(const std::filesystem::path& path, std::optional<McsFormat> requested) {
    if (requested) return *requested;
    const auto ext = path.extension().string();
    if (ext == ".csv") return McsFormat::csv;
    if (ext == ".mcs") return McsFormat::binary;
    throw UsageError("cannot infer format from extension '" + ext +
                     "'; pass --format csv|binary");
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256 digest failure");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned i = 0; i < len; ++i) {
        out += kHex[md[i] >> 4];
        out += kHex[md[i] & 0xf];
    }
    return out;
}

std::string run_metrics(const AnalysisOptions& options) {
    auto input = load_input(options);
    const auto& set = input.data.set;
    const auto& labels = input.data.labels;
    const auto items = compute_all(set, options.threads);

    JsonWriter w;
    w.begin_object();
    w.key("config");
    w.begin_object();
    w.key("bins");
    w.value(options.bins);
    w.key("command");
    w.value("metrics");
    write_config_tail(w, options, input.format);
    w.end_object();

    w.key("curves");
    w.begin_array();
    if (labels && items.size() >= options.bins && options.bins >= 2) {
        std::vector<double> values(items.size());
        for (std::size_t i = 0; i < items.size(); ++i)
            values[i] = metric_value(items[i], options.metric);
        const auto curve =
            binned_uncertainty_accuracy(values, correctness_flags(items, *labels), options.bins);
        write_curve(w, "binned_accuracy_" + metric_name(options.metric), curve);
    }
    w.end_array();

    w.key("dims");
    w.begin_object();
    w.key("c");
    w.value(set.classes());
    w.key("n");
    w.value(set.items());
    w.key("t");
    w.value(set.passes());
    w.end_object();

    w.key("input_digest");
    w.value(input.digest);

    write_items(w, items, nullptr);

    w.key("summary");
    w.begin_object();
    if (labels) write_labeled_summary(w, items, *labels, options.bins, std::nullopt);
    w.end_object();

    w.key("version");
    w.value(kReportVersion);
    w.end_object();
    return w.str();
}

std::string run_select(const AnalysisOptions& options) {
    if (options.epsilon && options.epsilon_grid)
        throw UsageError("--epsilon and --epsilon-grid are mutually exclusive");
    auto input = load_input(options);
    const auto& set = input.data.set;
    const auto& labels = input.data.labels;
    if (!labels && (options.alpha_explicit || options.beta_explicit))
        throw SemanticError("--alpha/--beta require labeled input (ARQ needs ground truth)");
    const bool sweep_mode = options.epsilon_grid.has_value();
    if (sweep_mode && !labels)
        throw SemanticError("--epsilon-grid requires labeled input (the curve is ARQ)");

    const auto items = compute_all(set, options.threads);
    const double epsilon = options.epsilon.value_or(0.0);

    std::optional<std::vector<SelectionOutcome>> outcomes;
    std::optional<double> arq_value;
    std::optional<CurveSeries> sweep;
    if (sweep_mode) {
        const auto grid = options.epsilon_grid->values();
        sweep = arq_sweep(items, *labels, grid, options.alpha, options.beta);
    } else {
        outcomes = evaluate_selection(items, epsilon, labels);
        if (labels)
            arq_value = arq(*outcomes, ArqParams{epsilon, options.alpha, options.beta});
    }

    JsonWriter w;
    w.begin_object();
    w.key("config");
    w.begin_object();
    w.key("alpha");
    w.value(options.alpha);
    w.key("beta");
    w.value(options.beta);
    w.key("bins");
    w.value(options.bins);
    w.key("command");
    w.value("select");
    if (sweep_mode) {
        w.key("epsilon_grid");
        w.value(options.epsilon_grid->to_string());
    } else {
        w.key("epsilon");
        w.value(epsilon);
    }
    write_config_tail(w, options, input.format);
    w.end_object();

    w.key("curves");
    w.begin_array();
    if (sweep) write_curve(w, "arq_sweep", *sweep);
    w.end_array();

    w.key("dims");
    w.begin_object();
    w.key("c");
    w.value(set.classes());
    w.key("n");
    w.value(set.items());
    w.key("t");
    w.value(set.passes());
    w.end_object();

    w.key("input_digest");
    w.value(input.digest);

    write_items(w, items, outcomes ? &*outcomes : nullptr);

    w.key("summary");
    w.begin_object();
    if (labels) write_labeled_summary(w, items, *labels, options.bins, arq_value);
    w.end_object();

    w.key("version");
    w.value(kReportVersion);
    w.end_object();
    return w.str();
}

CurvesOutput run_curves(const AnalysisOptions& options) {
    auto input = load_input(options);
    const auto& labels = input.data.labels;
    if (!labels) throw SemanticError("curves require labeled input");

    const auto items = compute_all(input.data.set, options.threads);
    std::vector<double> values(items.size());
    for (std::size_t i = 0; i < items.size(); ++i)
        values[i] = metric_value(items[i], options.metric);
    const auto correct = correctness_flags(items, *labels);

    CurvesOutput out;
    out.referral_csv =
        referral_curve(values, correct, options.fractions.values()).to_csv();
    out.threshold_csv =
        accuracy_vs_threshold(normalize_metric(values), correct, options.thresholds.values())
            .to_csv();
    return out;
}

}  // namespace mcuq
