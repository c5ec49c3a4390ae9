#include <doctest.h>

#include <fstream>

#include "mcuq/dropweight_simulator.hpp"
#include "mcuq/uncertainty_metrics.hpp"
#include "test_util.hpp"

using namespace mcuq;
using namespace mcuq::testing;

TEST_CASE("random stream stability") {
    // Frozen draws: any change to the stream definitions must fail here.
    detail::SimRng u(1);
    CHECK(u.uniform01() == doctest::Approx(0.13387664401253263).epsilon(1e-15));
    CHECK(u.uniform01() == doctest::Approx(0.13640703636619722).epsilon(1e-15));
    CHECK(u.uniform01() == doctest::Approx(0.45121490384453811).epsilon(1e-15));

    detail::SimRng n(1);
    CHECK(n.normal() == doctest::Approx(0.35099249780849107).epsilon(1e-12));
    CHECK(n.normal() == doctest::Approx(1.0859449105047105).epsilon(1e-12));

    detail::SimRng idx(42);
    CHECK(idx.uniform_index(7) == 5);
    CHECK(idx.uniform_index(7) == 4);
    CHECK(idx.uniform_index(7) == 5);
}

TEST_CASE("config validation") {
    SimConfig cfg;
    cfg.n_classes = 1;
    CHECK_THROWS_AS(simulate(cfg), ValidationError);
    cfg = SimConfig{};
    cfg.noise_scale = -0.1;
    CHECK_THROWS_AS(simulate(cfg), ValidationError);
    cfg = SimConfig{};
    cfg.difficulty_mix = 1.5;
    CHECK_THROWS_AS(simulate(cfg), ValidationError);
    cfg = SimConfig{};
    cfg.concentration = 0.0;
    CHECK_THROWS_AS(simulate(cfg), ValidationError);
}

TEST_CASE("zero noise collapses every pass and all epistemic metrics") {
    SimConfig cfg;
    cfg.n_items = 30;
    cfg.n_passes = 8;
    cfg.noise_scale = 0.0;
    cfg.seed = 3;
    auto [set, labels] = simulate(cfg);
    for (std::size_t i = 0; i < set.items(); ++i) {
        for (std::size_t t = 1; t < set.passes(); ++t)
            for (std::size_t c = 0; c < set.classes(); ++c)
                CHECK(set.prob(t, i, c) == set.prob(0, i, c));
    }
    // identical rows: the epistemic metrics vanish to float dust
    for (const auto& item : compute_all(set)) {
        CHECK(item.sigma_uncertainty <= 1e-14);
        CHECK(item.mutual_information <= 1e-14);
        CHECK(item.feinman <= 1e-14);
        CHECK(item.leibig <= 1e-14);
        CHECK(item.kwon_epistemic <= 1e-14);
    }
}

TEST_CASE("same seed gives identical bytes, different seed does not") {
    TempDir dir("sim_det");
    SimConfig cfg;
    cfg.n_items = 40;
    cfg.n_passes = 6;
    cfg.seed = 12345;

    auto a = simulate(cfg);
    auto b = simulate(cfg);
    CHECK(a.set.probs() == b.set.probs());
    CHECK(a.labels.values() == b.labels.values());

    save_mcs(a.set, a.labels, dir.file("a.mcs"), McsFormat::binary);
    save_mcs(b.set, b.labels, dir.file("b.mcs"), McsFormat::binary);
    std::ifstream fa(dir.file("a.mcs"), std::ios::binary), fb(dir.file("b.mcs"), std::ios::binary);
    const std::string bytes_a{std::istreambuf_iterator<char>(fa), {}};
    const std::string bytes_b{std::istreambuf_iterator<char>(fb), {}};
    CHECK(bytes_a == bytes_b);

    cfg.seed = 54321;
    auto c = simulate(cfg);
    CHECK(c.set.probs() != a.set.probs());
}

TEST_CASE("rows are valid softmax output, no repairs needed") {
    SimConfig cfg;
    cfg.n_items = 50;
    cfg.seed = 9;
    auto [set, labels] = simulate(cfg);
    CHECK(set.max_row_sum_deviation() <= 1e-12);
    labels.validate_against(set.items(), set.classes());
}

TEST_CASE("ambiguous items err more and carry more sigma") {
    SimConfig cfg;
    cfg.n_items = 5000;
    cfg.n_classes = 4;
    cfg.n_passes = 50;
    cfg.difficulty_mix = 0.3;
    cfg.seed = 42;
    auto [set, labels] = simulate(cfg);
    const auto summary = describe(cfg, set, labels);
    REQUIRE(summary.clean.count > 0);
    REQUIRE(summary.ambiguous.count > 0);
    CHECK(summary.clean.count + summary.ambiguous.count == 5000);
    CHECK(*summary.ambiguous.error_rate > *summary.clean.error_rate);
    CHECK(*summary.ambiguous.mean_sigma > *summary.clean.mean_sigma);
    CHECK(*summary.ambiguous.mean_entropy > *summary.clean.mean_entropy);
}

TEST_CASE("describe flags empty groups and matches recomputation") {
    SimConfig cfg;
    cfg.n_items = 60;
    cfg.difficulty_mix = 0.0;
    cfg.seed = 17;
    auto [set, labels] = simulate(cfg);
    const auto summary = describe(cfg, set, labels);
    CHECK(summary.ambiguous.count == 0);
    CHECK_FALSE(summary.ambiguous.error_rate.has_value());
    CHECK_FALSE(summary.ambiguous.mean_sigma.has_value());
    REQUIRE(summary.clean.count == 60);

    // recompute the clean-group means directly
    const auto items = compute_all(set);
    double sigma_sum = 0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        sigma_sum += items[i].sigma_uncertainty;
        if (items[i].predicted_class == static_cast<std::size_t>(labels.at(i))) ++hits;
    }
    CHECK(*summary.clean.mean_sigma == doctest::Approx(sigma_sum / 60.0).epsilon(1e-15));
    CHECK(summary.overall_accuracy == doctest::Approx(hits / 60.0).epsilon(1e-15));
    CHECK(*summary.clean.error_rate == doctest::Approx(1.0 - hits / 60.0).epsilon(1e-15));
}

TEST_CASE("describe with zero noise reports zero epistemic means") {
    SimConfig cfg;
    cfg.n_items = 25;
    cfg.noise_scale = 0.0;
    cfg.seed = 5;
    auto [set, labels] = simulate(cfg);
    const auto summary = describe(cfg, set, labels);
    CHECK(*summary.clean.mean_sigma <= 1e-14);
}

TEST_CASE("mean sigma is nondecreasing in noise scale") {
    double previous = -1.0;
    for (const double noise : {0.0, 0.5, 1.0, 2.0}) {
        double total = 0.0;
        std::size_t count = 0;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            SimConfig cfg;
            cfg.n_items = 120;
            cfg.n_passes = 20;
            cfg.noise_scale = noise;
            cfg.seed = seed;
            auto [set, labels] = simulate(cfg);
            for (const auto& item : compute_all(set)) {
                total += item.sigma_uncertainty;
                ++count;
            }
        }
        const double mean = total / static_cast<double>(count);
        CHECK(mean >= previous);
        previous = mean;
    }
}

TEST_CASE("describe rejects mismatched dimensions") {
    SimConfig cfg;
    cfg.n_items = 10;
    cfg.seed = 1;
    auto [set, labels] = simulate(cfg);
    cfg.n_items = 11;
    CHECK_THROWS_AS(describe(cfg, set, labels), ValidationError);
}
