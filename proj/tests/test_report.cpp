#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mcuq/dropweight_simulator.hpp"
#include "mcuq/report.hpp"
#include "mcuq/selective_classification.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace mcuq;
using namespace mcuq::testing;

#ifndef MCUQ_GOLDEN_DIR
#error "MCUQ_GOLDEN_DIR must point at tests/golden"
#endif

namespace {

const SimConfig& fixture_config() {
    static SimConfig cfg = [] {
        SimConfig c;
        c.n_items = 800;
        c.n_classes = 4;
        c.n_passes = 25;
        c.difficulty_mix = 0.3;
        c.seed = 7;
        return c;
    }();
    return cfg;
}

std::filesystem::path fixture_path(const TempDir& dir, bool with_labels) {
    auto result = simulate(fixture_config());
    const auto path = dir.file(with_labels ? "fix.mcs" : "fix_nolabel.mcs");
    save_mcs(result.set, with_labels ? std::optional<LabelSet>(result.labels) : std::nullopt,
             path, McsFormat::binary);
    return path;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("grid spec parsing") {
    const auto g = GridSpec::parse("0:30:0.5");
    CHECK(g.values().size() == 61);
    CHECK(g.values().front() == 0.0);
    CHECK(g.values().back() == 30.0);
    CHECK(g.to_string() == "0:30:0.5");
    CHECK(GridSpec::parse("0:1:0.1").values().size() == 11);
    CHECK_THROWS_AS(GridSpec::parse("1:0:0.5"), UsageError);
    CHECK_THROWS_AS(GridSpec::parse("0:1:0"), UsageError);
    CHECK_THROWS_AS(GridSpec::parse("0:1"), UsageError);
    CHECK_THROWS_AS(GridSpec::parse("a:b:c"), UsageError);
}

TEST_CASE("sha256 known vector") {
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("format inference") {
    CHECK(infer_format("x.mcs", std::nullopt) == McsFormat::binary);
    CHECK(infer_format("x.csv", std::nullopt) == McsFormat::csv);
    CHECK(infer_format("x.dat", McsFormat::csv) == McsFormat::csv);
    CHECK_THROWS_AS(infer_format("x.dat", std::nullopt), UsageError);
}

TEST_CASE("metrics report carries the documented schema") {
    TempDir dir("report_schema");
    AnalysisOptions opts;
    opts.input = fixture_path(dir, true);
    const auto text = run_metrics(opts);
    const auto j = nlohmann::json::parse(text);

    CHECK(j.at("version") == 1);
    CHECK(j.at("dims").at("t") == 25);
    CHECK(j.at("dims").at("n") == 800);
    CHECK(j.at("dims").at("c") == 4);
    CHECK(j.at("items").size() == 800);
    CHECK(j.at("input_digest").get<std::string>().size() == 64);
    CHECK(j.at("config").at("command") == "metrics");
    CHECK(j.at("summary").contains("accuracy"));
    for (const char* name :
         {"sigma", "entropy", "mi", "feinman", "leibig", "kwon-aleatoric", "kwon-epistemic"}) {
        CHECK(j.at("summary").at("correlations").contains(name));
        CHECK(j.at("summary").at("boxplots").contains(name));
    }
    CHECK(j.at("curves").size() == 1);
    CHECK(j.at("curves")[0].at("name") == "binned_accuracy_sigma");
    // items are free of selection blocks in metrics mode
    CHECK_FALSE(j.at("items")[0].contains("selection"));
}

TEST_CASE("unlabeled input degrades cleanly") {
    TempDir dir("report_nolabel");
    AnalysisOptions opts;
    opts.input = fixture_path(dir, false);
    const auto j = nlohmann::json::parse(run_metrics(opts));
    CHECK_FALSE(j.at("summary").contains("accuracy"));
    CHECK_FALSE(j.at("summary").contains("correlations"));
    CHECK(j.at("curves").empty());
    CHECK(j.at("items").size() == 800);
}

TEST_CASE("reports are byte-identical across runs and thread counts") {
    TempDir dir("report_det");
    AnalysisOptions opts;
    opts.input = fixture_path(dir, true);
    opts.threads = 1;
    const auto base = run_metrics(opts);
    for (unsigned threads : {1u, 2u, 8u}) {
        opts.threads = threads;
        CHECK(run_metrics(opts) == base);
    }
    opts.epsilon = 2.0;
    opts.threads = 1;
    const auto select_base = run_select(opts);
    for (unsigned threads : {2u, 8u}) {
        opts.threads = threads;
        CHECK(run_select(opts) == select_base);
    }
}

TEST_CASE("select at epsilon 0 accepts everything; free arq equals accuracy") {
    TempDir dir("select_eps0");
    AnalysisOptions opts;
    opts.input = fixture_path(dir, true);
    opts.epsilon = 0.0;
    opts.alpha = 0.0;
    opts.beta = 0.0;
    const auto j = nlohmann::json::parse(run_select(opts));
    for (const auto& item : j.at("items"))
        CHECK(item.at("selection").at("accepted") == true);
    CHECK(j.at("summary").at("arq") == j.at("summary").at("accuracy"));
    CHECK(j.at("config").at("epsilon") == 0.0);
}

TEST_CASE("select semantics without labels") {
    TempDir dir("select_nolabel");
    AnalysisOptions opts;
    opts.input = fixture_path(dir, false);
    opts.epsilon = 1.0;
    // selection itself is label-free
    const auto j = nlohmann::json::parse(run_select(opts));
    CHECK(j.at("items")[0].contains("selection"));
    CHECK_FALSE(j.at("summary").contains("arq"));
    // explicit costs or a sweep need ground truth
    opts.beta = 0.5;
    opts.beta_explicit = true;
    CHECK_THROWS_AS(run_select(opts), SemanticError);
    opts.beta_explicit = false;
    opts.epsilon.reset();
    opts.epsilon_grid = GridSpec{0, 5, 1};
    CHECK_THROWS_AS(run_select(opts), SemanticError);
}

TEST_CASE("select sweep matches the extended-precision golden file") {
    TempDir dir("sweep_golden");
    auto [set, labels] = simulate(fixture_config());
    const auto grid = GridSpec{0.0, 30.0, 0.5}.values();

    // Oracle: margins/stds from compensated long-double recomputation,
    // integer decision counts, ARQ assembled in double.
    const std::size_t n = set.items();
    std::vector<double> margin(n), top_std(n);
    std::vector<bool> correct(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto brute = oracle::brute_metrics(set, i);
        double second = -1.0;
        for (std::size_t c = 0; c < brute.mean.size(); ++c) {
            if (c == brute.predicted) continue;
            second = std::max(second, brute.mean[c]);
        }
        margin[i] = brute.mean[brute.predicted] - second;
        top_std[i] = brute.leibig;
        correct[i] = brute.predicted == static_cast<std::size_t>(labels.at(i));
    }
    double min_gap = 1e300;
    std::vector<CurvePoint> expected;
    for (const double eps : grid) {
        std::size_t acc_ok = 0, acc_bad = 0;
        for (std::size_t i = 0; i < n; ++i) {
            min_gap = std::min(min_gap, std::abs(margin[i] - eps * top_std[i]));
            if (margin[i] >= eps * top_std[i])
                (correct[i] ? acc_ok : acc_bad)++;
        }
        expected.push_back({eps, (static_cast<double>(acc_ok) - 1.0 * acc_bad) / n});
    }
    // no decision sits near the threshold: double vs long double cannot disagree
    CHECK(min_gap > 1e-9);
    const auto oracle_csv = CurveSeries("epsilon", "arq", expected).to_csv();

    const auto golden_path = std::filesystem::path(MCUQ_GOLDEN_DIR) / "arq_sweep.csv";
    if (std::getenv("MCUQ_REGEN_GOLDEN")) {
        std::ofstream out(golden_path, std::ios::binary);
        out << oracle_csv;
    }
    CHECK(oracle_csv == slurp(golden_path));

    // implementation path, through the full report
    AnalysisOptions opts;
    opts.input = fixture_path(dir, true);
    opts.epsilon_grid = GridSpec{0.0, 30.0, 0.5};
    const auto j = nlohmann::json::parse(run_select(opts));
    REQUIRE(j.at("curves").size() == 1);
    std::vector<CurvePoint> got;
    for (const auto& p : j.at("curves")[0].at("points"))
        got.push_back({p[0].get<double>(), p[1].get<double>()});
    CHECK(CurveSeries("epsilon", "arq", got).to_csv() == slurp(golden_path));
}

TEST_CASE("config echo reproduces the report byte for byte") {
    TempDir dir("echo");
    AnalysisOptions opts;
    opts.input = fixture_path(dir, true);
    opts.metric = Metric::entropy;
    opts.bins = 10;
    opts.out = (dir.path() / "r.json").string();
    const auto first = run_metrics(opts);
    const auto j = nlohmann::json::parse(first);

    AnalysisOptions replay;
    replay.input = j.at("config").at("input").get<std::string>();
    replay.format = j.at("config").at("format") == "csv" ? McsFormat::csv : McsFormat::binary;
    replay.metric = parse_metric(j.at("config").at("metric").get<std::string>());
    replay.bins = j.at("config").at("bins").get<std::size_t>();
    replay.out = j.at("config").at("out").get<std::string>();
    CHECK(run_metrics(replay) == first);
}

TEST_CASE("curves output") {
    TempDir dir("curves");
    AnalysisOptions opts;
    opts.input = fixture_path(dir, true);
    const auto curves = run_curves(opts);

    // 11 referral rows under the default fraction grid, plus the header
    auto count_lines = [](const std::string& s) {
        std::size_t n = 0;
        for (char c : s) n += c == '\n';
        return n;
    };
    CHECK(count_lines(curves.referral_csv) == 12);
    CHECK(curves.referral_csv.substr(0, curves.referral_csv.find('\n')) ==
          "referred_fraction,retained_accuracy");
    CHECK(count_lines(curves.threshold_csv) == 22);

    // the r=0 row equals plain accuracy from the metrics report
    const auto j = nlohmann::json::parse(run_metrics(opts));
    const double accuracy = j.at("summary").at("accuracy").get<double>();
    std::istringstream lines(curves.referral_csv);
    std::string header, first_row;
    std::getline(lines, header);
    std::getline(lines, first_row);
    CHECK(first_row.substr(0, 2) == "0,");
    CHECK(std::stod(first_row.substr(2)) == doctest::Approx(accuracy).epsilon(1e-12));

    // different metrics sort differently, so the curves differ
    AnalysisOptions entropy_opts = opts;
    entropy_opts.metric = Metric::entropy;
    const auto entropy_curves = run_curves(entropy_opts);
    CHECK(entropy_curves.referral_csv != curves.referral_csv);

    AnalysisOptions unlabeled = opts;
    unlabeled.input = fixture_path(dir, false);
    CHECK_THROWS_AS(run_curves(unlabeled), SemanticError);
}

TEST_CASE("bad inputs raise the documented error classes") {
    TempDir dir("report_errors");
    AnalysisOptions opts;
    opts.input = dir.file("missing.mcs");
    CHECK_THROWS_AS(run_metrics(opts), IoError);
    {
        std::ofstream out(dir.file("garbage.mcs"), std::ios::binary);
        out << "not an mcs file at all";
    }
    opts.input = dir.file("garbage.mcs");
    CHECK_THROWS_AS(run_metrics(opts), FormatError);
}
