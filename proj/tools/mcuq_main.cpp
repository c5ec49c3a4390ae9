#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mcuq/dropweight_simulator.hpp"
#include "mcuq/json_writer.hpp"
#include "mcuq/patch_extractor.hpp"
#include "mcuq/report.hpp"

namespace {

using namespace mcuq;

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << text;
    if (!out) throw IoError("write failure: " + path.string());
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty())
        std::cout << text;
    else
        write_text(out_path, text);
}

struct CliFlags {
    std::string input;
    std::string format;
    std::string metric = "sigma";
    std::size_t bins = 20;
    unsigned threads = 0;
    std::string out;

    AnalysisOptions to_options() const {
        AnalysisOptions o;
        o.input = input;
        if (!format.empty())
            o.format = format == "csv" ? McsFormat::csv : McsFormat::binary;
        o.metric = parse_metric(metric);
        if (bins < 2) throw UsageError("--bins must be at least 2");
        o.bins = bins;
        o.threads = threads;
        o.out = out;
        return o;
    }
};

void add_common_flags(CLI::App* cmd, CliFlags& flags) {
    cmd->add_option("--input", flags.input, "input sample file (.mcs or .csv)")->required();
    cmd->add_option("--format", flags.format, "input format (default: by extension)")
        ->check(CLI::IsMember({"csv", "binary"}));
    cmd->add_option("--metric", flags.metric,
                    "uncertainty metric: sigma|entropy|mi|feinman|leibig|kwon-aleatoric|kwon-epistemic");
    cmd->add_option("--bins", flags.bins, "bin count for binned statistics")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--threads", flags.threads, "worker threads (0 = all cores)");
    cmd->add_option("--out", flags.out, "output path (default: stdout)");
}

int run(int argc, char** argv) {
    CLI::App app{"Monte-Carlo prediction uncertainty toolkit"};
    app.require_subcommand(1);

    // metrics
    auto* metrics_cmd = app.add_subcommand("metrics", "per-item uncertainty metrics report (JSON)");
    CliFlags metrics_flags;
    add_common_flags(metrics_cmd, metrics_flags);

    // select
    auto* select_cmd =
        app.add_subcommand("select", "accept/reject decisions and ARQ report (JSON)");
    CliFlags select_flags;
    add_common_flags(select_cmd, select_flags);
    double epsilon = 0;
    std::string epsilon_grid;
    double alpha = 1.0, beta = 0.0;
    auto* epsilon_opt =
        select_cmd->add_option("--epsilon", epsilon, "acceptance threshold multiplier");
    auto* grid_opt = select_cmd->add_option("--epsilon-grid", epsilon_grid,
                                            "sweep grid START:STOP:STEP (default 0:30:0.5)");
    auto* alpha_opt = select_cmd->add_option("--alpha", alpha, "misclassification cost");
    auto* beta_opt = select_cmd->add_option("--beta", beta, "rejection cost");
    epsilon_opt->excludes(grid_opt);

    // curves
    auto* curves_cmd =
        app.add_subcommand("curves", "referral + accuracy-vs-threshold curves (CSV)");
    CliFlags curves_flags;
    add_common_flags(curves_cmd, curves_flags);
    std::string fractions_grid = "0:1:0.1";
    std::string thresholds_grid = "0:1:0.05";
    curves_cmd->add_option("--fractions", fractions_grid, "referral fractions START:STOP:STEP");
    curves_cmd->add_option("--thresholds", thresholds_grid,
                           "uncertainty thresholds START:STOP:STEP");

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "generate a synthetic labeled .mcs file");
    SimConfig sim;
    std::string sim_out;
    sim_cmd->add_option("--items", sim.n_items, "item count")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--classes", sim.n_classes, "class count")->check(CLI::Range(2, 1 << 20));
    sim_cmd->add_option("--passes", sim.n_passes, "MC passes per item")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--concentration", sim.concentration, "true-class logit height");
    sim_cmd->add_option("--noise", sim.noise_scale, "logit noise scale");
    sim_cmd->add_option("--mix", sim.difficulty_mix, "fraction of ambiguous items");
    sim_cmd->add_option("--seed", sim.seed, "RNG seed");
    sim_cmd->add_option("--out", sim_out, "output .mcs path")->required();

    // patches
    auto* patches_cmd = app.add_subcommand("patches", "tile a slide image into tissue patches");
    std::string slide_path, outdir;
    std::size_t patch_size = 200;
    double keep_threshold = 0.25;
    TissueThresholds tissue;
    patches_cmd->add_option("--slide", slide_path, "input image (.ppm P6 or .rgb8 + .json)")
        ->required();
    patches_cmd->add_option("--size", patch_size, "patch edge length in pixels")
        ->check(CLI::PositiveNumber);
    patches_cmd->add_option("--threshold", keep_threshold, "minimum tissue fraction to keep")
        ->check(CLI::Range(0.0, 1.0));
    patches_cmd->add_option("--luma-max", tissue.luma_max, "tissue test: maximum luma");
    patches_cmd->add_option("--chroma-min", tissue.chroma_min, "tissue test: minimum chroma");
    patches_cmd->add_option("--outdir", outdir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // prints help, exit 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    if (*metrics_cmd) {
        emit(run_metrics(metrics_flags.to_options()), metrics_flags.out);
        return 0;
    }

    if (*select_cmd) {
        AnalysisOptions o = select_flags.to_options();
        if (*epsilon_opt) o.epsilon = epsilon;
        if (*grid_opt)
            o.epsilon_grid = GridSpec::parse(epsilon_grid);
        else if (!*epsilon_opt)
            o.epsilon_grid = GridSpec{0.0, 30.0, 0.5};  // default: sweep mode
        o.alpha = alpha;
        o.beta = beta;
        o.alpha_explicit = alpha_opt->count() > 0;
        o.beta_explicit = beta_opt->count() > 0;
        emit(run_select(o), select_flags.out);
        return 0;
    }

    if (*curves_cmd) {
        AnalysisOptions o = curves_flags.to_options();
        o.fractions = GridSpec::parse(fractions_grid);
        o.thresholds = GridSpec::parse(thresholds_grid);
        if (o.out.empty())
            throw UsageError("curves requires --out PREFIX (writes PREFIX.referral.csv "
                             "and PREFIX.threshold.csv)");
        auto curves = run_curves(o);
        write_text(o.out + ".referral.csv", curves.referral_csv);
        write_text(o.out + ".threshold.csv", curves.threshold_csv);
        return 0;
    }

    if (*sim_cmd) {
        auto result = simulate(sim);
        save_mcs(result.set, result.labels, sim_out, McsFormat::binary);
        JsonWriter w;
        w.begin_object();
        w.key("concentration");
        w.value(sim.concentration);
        w.key("difficulty_mix");
        w.value(sim.difficulty_mix);
        w.key("n_classes");
        w.value(sim.n_classes);
        w.key("n_items");
        w.value(sim.n_items);
        w.key("n_passes");
        w.value(sim.n_passes);
        w.key("noise_scale");
        w.value(sim.noise_scale);
        w.key("seed");
        w.value(static_cast<std::uint64_t>(sim.seed));
        w.end_object();
        std::filesystem::path sidecar(sim_out);
        sidecar.replace_extension(".json");
        write_text(sidecar, w.str());
        return 0;
    }

    if (*patches_cmd) {
        const auto image = load_slide(slide_path);
        const std::string slide_id = std::filesystem::path(slide_path).stem().string();
        auto result = extract(image, patch_size, keep_threshold, tissue, slide_id);
        std::filesystem::create_directories(outdir);
        std::size_t kept_index = 0;
        for (const auto& record : result.manifest) {
            if (!record.kept) continue;
            const auto name = slide_id + "_y" + std::to_string(record.grid_y) + "_x" +
                              std::to_string(record.grid_x) + ".ppm";
            save_ppm(result.kept[kept_index++], std::filesystem::path(outdir) / name);
        }
        write_text(std::filesystem::path(outdir) / (slide_id + "_manifest.csv"),
                   manifest_csv(result.manifest));
        std::cout << "kept " << kept_index << " of " << result.manifest.size() << " patches\n";
        return 0;
    }

    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const SemanticError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
}
