#include "mcuq/mc_tensor.hpp"

#include <algorithm>
#include <bit>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace mcuq {

namespace {

double row_sum(std::span<const double> row) {
    double s = 0.0;
    for (double v : row) s += v;
    return s;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("read failure: " + path.string());
    return std::move(buf).str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failure: " + path.string());
}

// 12 significant digits; round-trips any float32-origin value well within
// the documented 1e-9 CSV bound.
std::string format_value(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::uint32_t read_u32_le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void append_u32_le(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

double parse_double(std::string_view field, const char* what, std::size_t line_no) {
    // std::from_chars<double> is available in libstdc++ 11
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        throw FormatError(std::string("line ") + std::to_string(line_no) + ": bad " + what +
                          " value '" + std::string(field) + "'");
    return value;
}

std::uint64_t parse_index(std::string_view field, const char* what, std::size_t line_no) {
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size())
        throw FormatError(std::string("line ") + std::to_string(line_no) + ": bad " + what +
                          " value '" + std::string(field) + "'");
    return value;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

struct CsvRow {
    std::uint64_t t = 0;
    std::uint64_t item = 0;
    std::vector<double> probs;
    std::optional<std::int32_t> label;
};

LoadedSampleSet load_csv(const std::filesystem::path& path) {
    const std::string text = read_file(path);

    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t pos = text.find('\n', start);
        if (pos == std::string_view::npos) pos = text.size();
        std::string_view line(text.data() + start, pos - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        start = pos + 1;
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty()) throw FormatError("empty CSV file: " + path.string());

    // Header: t,item,p0,...,p{C-1}[,label]
    auto header = split_csv_line(lines[0]);
    if (header.size() < 4 || header[0] != "t" || header[1] != "item")
        throw FormatError("malformed CSV header (expected t,item,p0,...): " + path.string());
    bool has_labels = header.back() == "label";
    std::size_t n_prob_cols = header.size() - 2 - (has_labels ? 1 : 0);
    if (n_prob_cols < 2)
        throw FormatError("CSV needs at least two probability columns");
    for (std::size_t c = 0; c < n_prob_cols; ++c) {
        if (header[2 + c] != "p" + std::to_string(c))
            throw FormatError("malformed CSV header: expected p" + std::to_string(c) +
                              ", got '" + std::string(header[2 + c]) + "'");
    }

    std::vector<CsvRow> rows;
    rows.reserve(lines.size() - 1);
    std::uint64_t max_t = 0, max_item = 0;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        if (lines[li].empty()) continue;
        auto fields = split_csv_line(lines[li]);
        CsvRow row;
        row.t = parse_index(fields[0], "t", li + 1);
        row.item = parse_index(fields[1], "item", li + 1);
        bool label_expected = has_labels && row.t == 0;
        std::size_t min_fields = 2 + n_prob_cols + (label_expected ? 1 : 0);
        std::size_t max_fields = 2 + n_prob_cols + (has_labels ? 1 : 0);
        if (fields.size() < min_fields || fields.size() > max_fields)
            throw FormatError("line " + std::to_string(li + 1) + ": expected " +
                              std::to_string(min_fields) + " fields, got " +
                              std::to_string(fields.size()));
        row.probs.resize(n_prob_cols);
        for (std::size_t c = 0; c < n_prob_cols; ++c)
            row.probs[c] = parse_double(fields[2 + c], "probability", li + 1);
        if (label_expected) {
            auto v = parse_index(fields[2 + n_prob_cols], "label", li + 1);
            row.label = static_cast<std::int32_t>(v);
        }
        max_t = std::max(max_t, row.t);
        max_item = std::max(max_item, row.item);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw FormatError("CSV has no data rows: " + path.string());

    const std::size_t t_count = static_cast<std::size_t>(max_t) + 1;
    const std::size_t n_count = static_cast<std::size_t>(max_item) + 1;
    const std::size_t c_count = n_prob_cols;
    if (rows.size() != t_count * n_count)
        throw FormatError("dimension mismatch: " + std::to_string(rows.size()) +
                          " rows for T=" + std::to_string(t_count) +
                          ", N=" + std::to_string(n_count));

    std::vector<double> probs(t_count * n_count * c_count, -1.0);
    std::vector<char> seen(t_count * n_count, 0);
    std::vector<std::int32_t> labels(has_labels ? n_count : 0, 0);
    std::vector<char> label_seen(has_labels ? n_count : 0, 0);
    for (auto& row : rows) {
        std::size_t cell = static_cast<std::size_t>(row.t) * n_count + row.item;
        if (seen[cell])
            throw FormatError("duplicate row for (t=" + std::to_string(row.t) +
                              ", item=" + std::to_string(row.item) + ")");
        seen[cell] = 1;
        std::copy(row.probs.begin(), row.probs.end(), probs.begin() + cell * c_count);
        if (row.label) {
            labels[row.item] = *row.label;
            label_seen[row.item] = 1;
        }
    }
    if (has_labels)
        for (std::size_t i = 0; i < n_count; ++i)
            if (!label_seen[i])
                throw FormatError("label column declared but missing for item " +
                                  std::to_string(i));

    McSampleSet set(t_count, n_count, c_count, std::move(probs));
    std::optional<LabelSet> label_set;
    if (has_labels) {
        label_set.emplace(std::move(labels));
        label_set->validate_against(n_count, c_count);
    }
    return {std::move(set), std::move(label_set)};
}

void save_csv(const McSampleSet& set, const std::optional<LabelSet>& labels,
              const std::filesystem::path& path) {
    std::string out;
    out.reserve(set.probs().size() * 16);
    out += "t,item";
    for (std::size_t c = 0; c < set.classes(); ++c) {
        out += ",p";
        out += std::to_string(c);
    }
    if (labels) out += ",label";
    out += '\n';
    for (std::size_t t = 0; t < set.passes(); ++t) {
        for (std::size_t i = 0; i < set.items(); ++i) {
            out += std::to_string(t);
            out += ',';
            out += std::to_string(i);
            for (double v : set.row(t, i)) {
                out += ',';
                out += format_value(v);
            }
            if (labels && t == 0) {
                out += ',';
                out += std::to_string(labels->at(i));
            }
            out += '\n';
        }
    }
    write_file(path, out);
}

constexpr char kMagic[4] = {'M', 'C', 'S', '1'};

LoadedSampleSet load_binary(const std::filesystem::path& path) {
    const std::string bytes = read_file(path);
    const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw FormatError("bad magic bytes (not an MCS1 file): " + path.string());
    const std::uint32_t manifest_len = read_u32_le(data + 4);
    if (bytes.size() < 8 + static_cast<std::size_t>(manifest_len))
        throw FormatError("truncated manifest: " + path.string());

    Manifest m;
    try {
        auto j = nlohmann::json::parse(bytes.substr(8, manifest_len));
        m.format_version = j.at("format_version").get<int>();
        m.t = j.at("T").get<std::size_t>();
        m.n = j.at("N").get<std::size_t>();
        m.c = j.at("C").get<std::size_t>();
        m.has_labels = j.at("has_labels").get<bool>();
        if (j.contains("class_names") && !j["class_names"].is_null())
            m.class_names = j["class_names"].get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad manifest JSON: ") + e.what());
    }
    if (m.format_version != 1)
        throw FormatError("unsupported format_version " + std::to_string(m.format_version));
    if (m.t < 1 || m.n < 1 || m.c < 1)
        throw FormatError("manifest declares non-positive dimensions");

    std::size_t offset = 8 + manifest_len;
    const std::size_t label_bytes = m.has_labels ? m.n * 4 : 0;
    const std::size_t value_count = m.t * m.n * m.c;
    if (bytes.size() != offset + label_bytes + value_count * 4)
        throw FormatError("payload size does not match declared dimensions: " + path.string());

    std::optional<LabelSet> labels;
    if (m.has_labels) {
        std::vector<std::int32_t> raw(m.n);
        for (std::size_t i = 0; i < m.n; ++i)
            raw[i] = static_cast<std::int32_t>(read_u32_le(data + offset + i * 4));
        labels.emplace(std::move(raw));
        offset += label_bytes;
    }

    std::vector<double> probs(value_count);
    for (std::size_t k = 0; k < value_count; ++k) {
        const std::uint32_t u = read_u32_le(data + offset + k * 4);
        probs[k] = static_cast<double>(std::bit_cast<float>(u));
    }

    McSampleSet set(m.t, m.n, m.c, std::move(probs), std::move(m.class_names));
    if (labels) labels->validate_against(set.items(), set.classes());
    return {std::move(set), std::move(labels)};
}

void save_binary(const McSampleSet& set, const std::optional<LabelSet>& labels,
                 const std::filesystem::path& path) {
    nlohmann::json j;
    j["format_version"] = 1;
    j["T"] = set.passes();
    j["N"] = set.items();
    j["C"] = set.classes();
    j["has_labels"] = static_cast<bool>(labels);
    if (!set.class_names().empty()) j["class_names"] = set.class_names();
    const std::string manifest = j.dump();

    std::string out;
    out.reserve(8 + manifest.size() + set.probs().size() * 4);
    out.append(kMagic, 4);
    append_u32_le(out, static_cast<std::uint32_t>(manifest.size()));
    out += manifest;
    if (labels)
        for (std::size_t i = 0; i < labels->size(); ++i)
            append_u32_le(out, static_cast<std::uint32_t>(labels->at(i)));
    for (double v : set.probs())
        append_u32_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    write_file(path, out);
}

}  // namespace

McSampleSet::McSampleSet(std::size_t passes, std::size_t items, std::size_t classes,
                         std::vector<double> probs, std::vector<std::string> class_names)
    : t_(passes), n_(items), c_(classes), probs_(std::move(probs)),
      class_names_(std::move(class_names)) {
    if (t_ < 1) throw ValidationError("T must be >= 1");
    if (n_ < 1) throw ValidationError("N must be >= 1");
    if (c_ < 2) throw ValidationError("C must be >= 2");
    if (probs_.size() != t_ * n_ * c_)
        throw ValidationError("probability array has " + std::to_string(probs_.size()) +
                              " values, expected T*N*C = " + std::to_string(t_ * n_ * c_));
    if (!class_names_.empty() && class_names_.size() != c_)
        throw ValidationError("class_names length does not match C");
    for (double v : probs_) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0)
            throw ValidationError("probability out of [0,1]: " + format_value(v));
    }
    for (std::size_t t = 0; t < t_; ++t) {
        for (std::size_t i = 0; i < n_; ++i) {
            const double s = row_sum(row(t, i));
            if (std::abs(s - 1.0) > kRowSumHardTolerance)
                throw ValidationError("row sum out of tolerance at (t=" + std::to_string(t) +
                                      ", item=" + std::to_string(i) + "): sum=" + format_value(s));
        }
    }
}

double McSampleSet::max_row_sum_deviation() const {
    double worst = 0.0;
    for (std::size_t t = 0; t < t_; ++t)
        for (std::size_t i = 0; i < n_; ++i)
            worst = std::max(worst, std::abs(row_sum(row(t, i)) - 1.0));
    return worst;
}

LabelSet::LabelSet(std::vector<std::int32_t> labels) : labels_(std::move(labels)) {
    for (auto v : labels_)
        if (v < 0) throw ValidationError("negative label index");
}

void LabelSet::validate_against(std::size_t n_items, std::size_t n_classes) const {
    if (labels_.size() != n_items)
        throw ValidationError("label count " + std::to_string(labels_.size()) +
                              " does not match item count " + std::to_string(n_items));
    for (auto v : labels_)
        if (static_cast<std::size_t>(v) >= n_classes)
            throw ValidationError("label " + std::to_string(v) + " out of range for C=" +
                                  std::to_string(n_classes));
}

LoadedSampleSet load_mcs(const std::filesystem::path& path, McsFormat format) {
    if (!std::filesystem::exists(path))
        throw IoError("no such file: " + path.string());
    return format == McsFormat::csv ? load_csv(path) : load_binary(path);
}

void save_mcs(const McSampleSet& set, const std::optional<LabelSet>& labels,
              const std::filesystem::path& path, McsFormat format) {
    if (labels) labels->validate_against(set.items(), set.classes());
    if (format == McsFormat::csv)
        save_csv(set, labels, path);
    else
        save_binary(set, labels, path);
}

McSampleSet renormalize(const McSampleSet& set) {
    std::vector<double> probs(set.probs().size());
    const std::size_t c = set.classes();
    for (std::size_t t = 0; t < set.passes(); ++t) {
        for (std::size_t i = 0; i < set.items(); ++i) {
            auto row = set.row(t, i);
            const std::size_t base = (t * set.items() + i) * c;
            const double s = row_sum(row);
            if (std::abs(s - 1.0) <= kRowSumRenormalizedTolerance) {
                std::copy(row.begin(), row.end(), probs.begin() + base);
            } else {
                for (std::size_t k = 0; k < c; ++k) probs[base + k] = row[k] / s;
            }
        }
    }
    return McSampleSet(set.passes(), set.items(), set.classes(), std::move(probs),
                       set.class_names());
}

}  // namespace mcuq
