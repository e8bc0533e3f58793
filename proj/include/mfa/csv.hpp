#pragma once

#include <cerrno>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "mfa/common.hpp"

namespace mfa {

/// Minimal CSV reader: quoted fields with "" escapes, configurable delimiter,
/// tolerant of trailing \r. Embedded newlines inside quotes are supported.
class CsvReader {
public:
    explicit CsvReader(std::istream& in, char delimiter = ',')
        : in_(in), delim_(delimiter) {}

    long line() const { return line_; }

    /// Reads one record into `fields`. Returns false on clean EOF.
    bool read_row(std::vector<std::string>& fields) {
        fields.clear();
        int c = in_.get();
        while (c == '\n') { // skip blank lines
            ++line_;
            c = in_.get();
        }
        if (c == EOF) return false;
        ++line_;
        std::string field;
        bool quoted = false;
        for (;; c = in_.get()) {
            if (quoted) {
                if (c == EOF) throw ParseError("unterminated quoted field", line_);
                if (c == '"') {
                    int peek = in_.peek();
                    if (peek == '"') {
                        in_.get();
                        field += '"';
                    } else {
                        quoted = false;
                    }
                } else {
                    field += static_cast<char>(c);
                }
                continue;
            }
            if (c == '"' && field.empty()) {
                quoted = true;
            } else if (c == static_cast<int>(delim_)) {
                fields.push_back(std::move(field));
                field.clear();
            } else if (c == '\n' || c == EOF) {
                if (!field.empty() && field.back() == '\r') field.pop_back();
                fields.push_back(std::move(field));
                return true;
            } else {
                field += static_cast<char>(c);
            }
        }
    }

private:
    std::istream& in_;
    char delim_;
    long line_ = 0;
};

inline void write_csv_field(std::ostream& out, const std::string& s, char delim = ',') {
    bool needs_quote = s.find(delim) != std::string::npos ||
                       s.find('"') != std::string::npos ||
                       s.find('\n') != std::string::npos;
    if (!needs_quote) {
        out << s;
        return;
    }
    out << '"';
    for (char c : s) {
        if (c == '"') out << '"';
        out << c;
    }
    out << '"';
}

inline double parse_double_field(const std::string& s, long line) {
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0' || errno == ERANGE)
        throw ParseError("invalid number '" + s + "'", line);
    return v;
}

inline long long parse_int_field(const std::string& s, long line) {
    errno = 0;
    char* end = nullptr;
    long long v = std::strtoll(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0' || errno == ERANGE)
        throw ParseError("invalid integer '" + s + "'", line);
    return v;
}

} // namespace mfa
