#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcuq/errors.hpp"

namespace mcuq {

// Row sums farther than this from 1 indicate logits or corrupted data, not
// softmax drift, and are rejected outright.
inline constexpr double kRowSumHardTolerance = 1e-3;
// Rows already within this of 1 are left untouched by renormalize(); this is
// also what makes renormalize idempotent bit-for-bit.
inline constexpr double kRowSumRenormalizedTolerance = 1e-12;

enum class McsFormat { csv, binary };

/// Dense T x N x C tensor of per-pass softmax outputs, pass-major
/// ([t][i][c]), immutable after construction.
///
/// Construction validates: T >= 1, N >= 1, C >= 2, every value finite and in
/// [0,1], and every (t, i) row summing to 1 within kRowSumHardTolerance.
/// Values are held as doubles; the binary file stores float32 and widens on
/// load.
class McSampleSet {
public:
    McSampleSet(std::size_t passes, std::size_t items, std::size_t classes,
                std::vector<double> probs,
                std::vector<std::string> class_names = {});

    std::size_t passes() const { return t_; }
    std::size_t items() const { return n_; }
    std::size_t classes() const { return c_; }

    double prob(std::size_t t, std::size_t i, std::size_t c) const {
        return probs_[(t * n_ + i) * c_ + c];
    }
    /// The C probabilities of item i under pass t.
    std::span<const double> row(std::size_t t, std::size_t i) const {
        return {probs_.data() + (t * n_ + i) * c_, c_};
    }
    const std::vector<double>& probs() const { return probs_; }
    const std::vector<std::string>& class_names() const { return class_names_; }

    /// Largest |row sum - 1| across all (t, i) rows.
    double max_row_sum_deviation() const;

private:
    std::size_t t_ = 0;
    std::size_t n_ = 0;
    std::size_t c_ = 0;
    std::vector<double> probs_;
    std::vector<std::string> class_names_;
};

/// Ground-truth class index per item. Bounds against a class count are
/// checked when the set is paired with samples (validate_against).
class LabelSet {
public:
    explicit LabelSet(std::vector<std::int32_t> labels);

    std::size_t size() const { return labels_.size(); }
    std::int32_t at(std::size_t i) const { return labels_.at(i); }
    const std::vector<std::int32_t>& values() const { return labels_; }

    /// Throws ValidationError unless size() == n_items and every label < n_classes.
    void validate_against(std::size_t n_items, std::size_t n_classes) const;

private:
    std::vector<std::int32_t> labels_;
};

/// Self-describing header of the binary ".mcs" container.
struct Manifest {
    int format_version = 1;
    std::size_t t = 0;
    std::size_t n = 0;
    std::size_t c = 0;
    bool has_labels = false;
    std::vector<std::string> class_names;
};

struct LoadedSampleSet {
    McSampleSet set;
    std::optional<LabelSet> labels;
};

// File formats
//
// CSV: header "t,item,p0,...,p{C-1}" with an optional trailing "label"
// column whose values appear on t=0 rows only; one row per (t, item);
// decimal floats; UTF-8; LF line endings.
//
// Binary (".mcs"): magic "MCS1", then a 4-byte little-endian unsigned
// manifest length L, then L bytes of UTF-8 JSON (format_version, T, N, C,
// has_labels, class_names), then N little-endian int32 labels iff
// has_labels, then T*N*C little-endian IEEE-754 float32 values in [t][i][c]
// order. No padding anywhere.

LoadedSampleSet load_mcs(const std::filesystem::path& path, McsFormat format);

void save_mcs(const McSampleSet& set, const std::optional<LabelSet>& labels,
              const std::filesystem::path& path, McsFormat format);

/// Rescales each row by the reciprocal of its sum so rows sum to 1 within
/// 1e-12. Rows already within 1e-12 are copied bit-for-bit, which makes the
/// operation idempotent. Rows farther than kRowSumHardTolerance from 1 never
/// exist in a constructed set.
McSampleSet renormalize(const McSampleSet& set);

}  // namespace mcuq
