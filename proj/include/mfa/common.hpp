#pragma once

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mfa {

/// Input that could not be parsed; carries the 1-based line number when known.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string msg, long line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg),
          line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

/// Numerical failure (rank deficiency, non-convergence, ...). CLI exit code 3.
class NumericError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// All floating-point text output goes through here: 10 significant digits.
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

/// FNV-1a 64-bit, used for input digests in run manifests.
inline uint64_t fnv1a64(std::string_view data, uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string to_hex(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace mfa
