#pragma once

#include <stdexcept>
#include <string>

namespace paccert {

// Malformed input file (IDX, trajectory, checkpoint). Carries the byte
// offset at which parsing gave up, -1 if not applicable.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, long long byte_offset = -1)
        : std::runtime_error(byte_offset >= 0
                                 ? what + " (byte offset " + std::to_string(byte_offset) + ")"
                                 : what),
          byte_offset_(byte_offset) {}

    long long byte_offset() const { return byte_offset_; }

private:
    long long byte_offset_;
};

// Invalid run configuration; the CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace paccert
