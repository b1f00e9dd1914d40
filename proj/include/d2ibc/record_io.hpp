#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "signals.hpp"

namespace d2ibc {

// 17 significant digits: every double survives a write/read cycle unchanged.
inline std::string format_decimal(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        out.push_back(trim(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

inline bool parse_double(std::string_view tok, double& out) {
    if (tok.empty()) return false;
    if (tok.front() == '+') tok.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return ec == std::errc() && ptr == tok.data() + tok.size();
}

} // namespace detail

// Reads "t,u,y" (canonical) or "u,y" rows; the header line is optional.
// The t column, when present, is informational: indices are reassigned to 1-L..0.
inline DataRecord parse_record(std::istream& in) {
    std::vector<double> u;
    std::vector<double> y;
    std::string line;
    std::size_t line_no = 0;
    int columns = -1;
    int u_col = 0;
    int y_col = 1;
    bool saw_content = false;

    while (std::getline(in, line)) {
        ++line_no;
        const auto view = detail::trim(line);
        if (view.empty() || view.front() == '#') continue;
        auto fields = detail::split_csv(view);

        if (!saw_content) {
            saw_content = true;
            double probe = 0.0;
            if (!detail::parse_double(fields.front(), probe)) {
                if (fields.size() == 3 && fields[0] == "t" && fields[1] == "u" && fields[2] == "y") {
                    columns = 3;
                    u_col = 1;
                    y_col = 2;
                } else if (fields.size() == 2 && fields[0] == "u" && fields[1] == "y") {
                    columns = 2;
                } else {
                    throw ParseError("unrecognized header '" + std::string(view) + "'", line_no);
                }
                continue;
            }
        }

        if (columns < 0) {
            if (fields.size() != 2 && fields.size() != 3) {
                throw ParseError("expected 2 or 3 columns, found " + std::to_string(fields.size()), line_no);
            }
            columns = static_cast<int>(fields.size());
            u_col = columns == 3 ? 1 : 0;
            y_col = columns == 3 ? 2 : 1;
        }
        if (fields.size() != static_cast<std::size_t>(columns)) {
            throw ParseError("expected " + std::to_string(columns) + " columns, found " +
                                 std::to_string(fields.size()),
                             line_no);
        }
        double values[3] = {0.0, 0.0, 0.0};
        for (int c = 0; c < columns; ++c) {
            if (!detail::parse_double(fields[c], values[c])) {
                throw ParseError("malformed number '" + std::string(fields[c]) + "'", line_no);
            }
            if (!std::isfinite(values[c])) {
                throw ValidationError("line " + std::to_string(line_no) + ": non-finite value '" +
                                      std::string(fields[c]) + "'");
            }
        }
        u.push_back(values[u_col]);
        y.push_back(values[y_col]);
    }
    if (u.empty()) throw ParseError("record contains no samples", line_no);
    return DataRecord(std::move(u), std::move(y));
}

inline DataRecord load_record(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open record file '" + path + "'");
    return parse_record(in);
}

inline void write_record(std::ostream& out, const DataRecord& record) {
    out << "t,u,y\n";
    for (TimeIndex t = record.first(); t <= 0; ++t) {
        out << t << ',' << format_decimal(record.u().at(t)) << ',' << format_decimal(record.y().at(t)) << '\n';
    }
}

inline void save_record(const std::string& path, const DataRecord& record) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write record file '" + path + "'");
    write_record(out, record);
}

} // namespace d2ibc
