#pragma once

#include <cassert>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mcuq {

/// Streaming JSON emitter with byte-stable output: 2-space indentation,
/// doubles always printed with 12 significant digits (%.12g), keys emitted
/// in whatever order the caller supplies (report code supplies them sorted).
/// nlohmann::json is used for parsing throughout the project; reports are
/// written through this instead because golden-file comparisons need a fixed
/// float format, not shortest-round-trip.
class JsonWriter {
public:
    void begin_object() { open('{'); }
    void end_object() { close('}'); }
    void begin_array() { open('['); }
    void end_array() { close(']'); }

    void key(std::string_view name) {
        comma_if_needed();
        append_string(name);
        out_ += ": ";
        pending_value_ = true;
    }

    void value(double v) {
        if (v != v || v > 1.7976931348623157e308 || v < -1.7976931348623157e308)
            throw std::logic_error("JsonWriter: non-finite value");
        comma_if_needed();
        char buf[48];
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        out_ += buf;
    }
    void value(std::int64_t v) {
        comma_if_needed();
        out_ += std::to_string(v);
    }
    void value(std::uint64_t v) {
        comma_if_needed();
        out_ += std::to_string(v);
    }
    void value(int v) { value(static_cast<std::int64_t>(v)); }
    void value(bool v) {
        comma_if_needed();
        out_ += v ? "true" : "false";
    }
    void value(std::string_view v) {
        comma_if_needed();
        append_string(v);
    }
    void value(const char* v) { value(std::string_view(v)); }
    void null_value() {
        comma_if_needed();
        out_ += "null";
    }

    std::string str() {
        assert(stack_.empty());
        out_ += '\n';
        return std::move(out_);
    }

private:
    struct Frame {
        char closer;
        bool any = false;
    };

    void open(char opener) {
        comma_if_needed();
        out_ += opener;
        stack_.push_back({opener == '{' ? '}' : ']'});
    }

    void close(char closer) {
        assert(!stack_.empty() && stack_.back().closer == closer);
        const bool any = stack_.back().any;
        stack_.pop_back();
        if (any) {
            out_ += '\n';
            indent();
        }
        out_ += closer;
    }

    void comma_if_needed() {
        if (pending_value_) {
            pending_value_ = false;
            return;  // value right after a key: no comma, no newline
        }
        if (stack_.empty()) return;
        if (stack_.back().any) out_ += ',';
        stack_.back().any = true;
        out_ += '\n';
        indent();
    }

    void indent() { out_.append(stack_.size() * 2, ' '); }

    void append_string(std::string_view s) {
        out_ += '"';
        for (char ch : s) {
            switch (ch) {
                case '"': out_ += "\\\""; break;
                case '\\': out_ += "\\\\"; break;
                case '\n': out_ += "\\n"; break;
                case '\r': out_ += "\\r"; break;
                case '\t': out_ += "\\t"; break;
                default:
                    if (static_cast<unsigned char>(ch) < 0x20) {
                        char buf[8];
                        std::snprintf(buf, sizeof(buf), "\\u%04x", ch);
                        out_ += buf;
                    } else {
                        out_ += ch;
                    }
            }
        }
        out_ += '"';
    }

    std::string out_;
    std::vector<Frame> stack_;
    bool pending_value_ = false;
};

}  // namespace mcuq
