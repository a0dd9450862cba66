#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace paccert {

// Minimal streaming JSON emitter. Doubles are printed with std::to_chars so
// the shortest round-trip representation is emitted; report digests stay
// stable across runs.
class JsonWriter {
public:
    explicit JsonWriter(std::ostream& out) : out_(out) {}

    JsonWriter& begin_object() {
        comma();
        out_ << '{';
        stack_.push_back(false);
        return *this;
    }
    JsonWriter& end_object() {
        out_ << '}';
        stack_.pop_back();
        mark();
        return *this;
    }
    JsonWriter& begin_array() {
        comma();
        out_ << '[';
        stack_.push_back(false);
        return *this;
    }
    JsonWriter& end_array() {
        out_ << ']';
        stack_.pop_back();
        mark();
        return *this;
    }

    JsonWriter& key(std::string_view k) {
        comma();
        write_string(k);
        out_ << ':';
        pending_value_ = true;
        return *this;
    }

    JsonWriter& value(double v) {
        comma();
        if (std::isfinite(v)) {
            char buf[32];
            auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
            out_.write(buf, p - buf);
        } else {
            // JSON has no inf/nan; emit as string to keep parsers alive.
            out_ << (std::isnan(v) ? "\"nan\"" : (v > 0 ? "\"inf\"" : "\"-inf\""));
        }
        mark();
        return *this;
    }
    JsonWriter& value(std::int64_t v) {
        comma();
        out_ << v;
        mark();
        return *this;
    }
    JsonWriter& value(std::uint64_t v) {
        comma();
        out_ << v;
        mark();
        return *this;
    }
    JsonWriter& value(int v) { return value(static_cast<std::int64_t>(v)); }
    JsonWriter& value(bool v) {
        comma();
        out_ << (v ? "true" : "false");
        mark();
        return *this;
    }
    JsonWriter& value(std::string_view v) {
        comma();
        write_string(v);
        mark();
        return *this;
    }
    JsonWriter& value(const char* v) { return value(std::string_view(v)); }

    template <typename T>
    JsonWriter& kv(std::string_view k, T v) {
        key(k);
        return value(v);
    }

private:
    void comma() {
        if (pending_value_) {
            pending_value_ = false;
            return;
        }
        if (!stack_.empty() && stack_.back()) out_ << ',';
    }
    void mark() {
        if (!stack_.empty()) stack_.back() = true;
    }
    void write_string(std::string_view s) {
        out_ << '"';
        for (char c : s) {
            switch (c) {
                case '"': out_ << "\\\""; break;
                case '\\': out_ << "\\\\"; break;
                case '\n': out_ << "\\n"; break;
                case '\t': out_ << "\\t"; break;
                case '\r': out_ << "\\r"; break;
                default:
                    if (static_cast<unsigned char>(c) < 0x20) {
                        char buf[8];
                        std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                        out_ << buf;
                    } else {
                        out_ << c;
                    }
            }
        }
        out_ << '"';
    }

    std::ostream& out_;
    std::vector<bool> stack_;
    bool pending_value_ = false;
};

}  // namespace paccert
