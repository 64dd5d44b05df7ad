#pragma once

// Sample matrix files.
//
// Text ("sensorseq-matrix 1"): a magic line, then a tab-separated header
//   user_id  wall_time_ms  delta_ms  y  w  category  <column names...>
// and one line per row. y and category are "-" when absent. Floats use the
// shortest representation that round-trips.
//
// Binary: "SSQM" + u32 version + u32 column count + length-prefixed names +
// u64 row count + rows (length-prefixed user id, i64 wall time, i64 delta,
// i8 y, f64 w, length-prefixed category, f32 x[columns]). Little endian.

#include <array>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "sensorseq/encoder.hpp"
#include "sensorseq/error.hpp"

namespace sensorseq {

struct SampleMatrix {
    std::vector<std::string> columns;
    RowStreams users;
};

enum class MatrixFormat { text, binary };

namespace detail {

template <class F>
inline void put_float(std::string& out, F v) {
    std::array<char, 64> buf{};
    auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    out.append(buf.data(), p);
}

template <class F>
inline F parse_float(std::string_view s, std::size_t line) {
    F v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw IoError("matrix: bad number '" + std::string(s) + "' on line " + std::to_string(line));
    return v;
}

inline std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find('\t', start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

template <class T>
inline void put_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
inline T get_pod(std::istream& in) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw IoError("matrix: truncated binary file");
    return v;
}

inline void put_str(std::ostream& out, const std::string& s) {
    put_pod<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_str(std::istream& in) {
    const auto n = get_pod<std::uint32_t>(in);
    std::string s(n, '\0');
    if (n > 0 && !in.read(s.data(), n)) throw IoError("matrix: truncated binary file");
    return s;
}

}  // namespace detail

inline void write_matrix_text(std::ostream& out, const SampleMatrix& m) {
    out << "sensorseq-matrix 1\n";
    out << "user_id\twall_time_ms\tdelta_ms\ty\tw\tcategory";
    for (const auto& c : m.columns) out << '\t' << c;
    out << '\n';
    std::string line;
    for (const auto& [user, rows] : m.users) {
        for (const auto& r : rows) {
            if (r.x.size() != m.columns.size()) throw ShapeMismatch("row width differs from column count");
            line.clear();
            line += user;
            line += '\t';
            line += std::to_string(r.wall_time_ms);
            line += '\t';
            line += std::to_string(r.delta_ms);
            line += '\t';
            line += r.labeled() ? std::to_string(static_cast<int>(r.y)) : "-";
            line += '\t';
            detail::put_float(line, r.w);
            line += '\t';
            line += r.category.empty() ? "-" : r.category;
            for (float v : r.x) {
                line += '\t';
                if (v == 0.0f)
                    line += '0';
                else
                    detail::put_float(line, v);
            }
            line += '\n';
            out << line;
        }
    }
}

inline SampleMatrix read_matrix_text(std::istream& in) {
    SampleMatrix m;
    std::string line;
    if (!std::getline(in, line) || line != "sensorseq-matrix 1") throw IoError("matrix: bad magic line");
    if (!std::getline(in, line)) throw IoError("matrix: missing header");
    const auto header = detail::split_tabs(line);
    if (header.size() < 6 || header[0] != "user_id") throw IoError("matrix: bad header");
    for (std::size_t i = 6; i < header.size(); ++i) m.columns.emplace_back(header[i]);
    std::size_t lineno = 2;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = detail::split_tabs(line);
        if (f.size() != header.size()) throw IoError("matrix: wrong field count on line " + std::to_string(lineno));
        SampleRow r;
        r.user_id = std::string(f[0]);
        r.wall_time_ms = detail::parse_float<std::int64_t>(f[1], lineno);
        r.delta_ms = detail::parse_float<std::int64_t>(f[2], lineno);
        r.y = f[3] == "-" ? kNoLabel : static_cast<std::int8_t>(detail::parse_float<int>(f[3], lineno));
        r.w = detail::parse_float<double>(f[4], lineno);
        if (f[5] != "-") r.category = std::string(f[5]);
        r.x.reserve(m.columns.size());
        for (std::size_t i = 6; i < f.size(); ++i) r.x.push_back(detail::parse_float<float>(f[i], lineno));
        auto& bucket = m.users[r.user_id];
        bucket.push_back(std::move(r));
    }
    return m;
}

inline void write_matrix_binary(std::ostream& out, const SampleMatrix& m) {
    out.write("SSQM", 4);
    detail::put_pod<std::uint32_t>(out, 1);
    detail::put_pod<std::uint32_t>(out, static_cast<std::uint32_t>(m.columns.size()));
    for (const auto& c : m.columns) detail::put_str(out, c);
    detail::put_pod<std::uint64_t>(out, row_count(m.users));
    for (const auto& [user, rows] : m.users) {
        for (const auto& r : rows) {
            if (r.x.size() != m.columns.size()) throw ShapeMismatch("row width differs from column count");
            detail::put_str(out, user);
            detail::put_pod(out, r.wall_time_ms);
            detail::put_pod(out, r.delta_ms);
            detail::put_pod(out, r.y);
            detail::put_pod(out, r.w);
            detail::put_str(out, r.category);
            out.write(reinterpret_cast<const char*>(r.x.data()),
                      static_cast<std::streamsize>(r.x.size() * sizeof(float)));
        }
    }
}

inline SampleMatrix read_matrix_binary(std::istream& in) {
    SampleMatrix m;
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "SSQM", 4) != 0) throw IoError("matrix: bad binary magic");
    if (detail::get_pod<std::uint32_t>(in) != 1) throw IoError("matrix: unsupported binary version");
    const auto ncols = detail::get_pod<std::uint32_t>(in);
    for (std::uint32_t i = 0; i < ncols; ++i) m.columns.push_back(detail::get_str(in));
    const auto nrows = detail::get_pod<std::uint64_t>(in);
    for (std::uint64_t i = 0; i < nrows; ++i) {
        SampleRow r;
        r.user_id = detail::get_str(in);
        r.wall_time_ms = detail::get_pod<std::int64_t>(in);
        r.delta_ms = detail::get_pod<std::int64_t>(in);
        r.y = detail::get_pod<std::int8_t>(in);
        r.w = detail::get_pod<double>(in);
        r.category = detail::get_str(in);
        r.x.resize(ncols);
        if (ncols > 0 && !in.read(reinterpret_cast<char*>(r.x.data()), ncols * sizeof(float)))
            throw IoError("matrix: truncated binary file");
        m.users[r.user_id].push_back(std::move(r));
    }
    return m;
}

inline void write_matrix(std::ostream& out, const SampleMatrix& m, MatrixFormat fmt) {
    if (fmt == MatrixFormat::binary)
        write_matrix_binary(out, m);
    else
        write_matrix_text(out, m);
}

/// Sniffs the format from the first bytes.
inline SampleMatrix read_matrix(std::istream& in) {
    char first[4] = {};
    in.read(first, 4);
    const bool binary = in.gcount() == 4 && std::memcmp(first, "SSQM", 4) == 0;
    in.clear();
    in.seekg(0);
    return binary ? read_matrix_binary(in) : read_matrix_text(in);
}

}  // namespace sensorseq
