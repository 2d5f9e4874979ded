#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "nph/errors.hpp"
#include "nph/patterns.hpp"

namespace nph {

enum class PatternFormat { Csv, Nphb };

inline PatternFormat format_from_path(const std::filesystem::path& path) {
    return path.extension() == ".nphb" ? PatternFormat::Nphb : PatternFormat::Csv;
}

namespace detail {

inline std::string fmt_double(double v) {
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

inline bool parse_double(std::string_view token, double& out) {
    const char* first = token.data();
    const char* last = token.data() + token.size();
    while (first < last && (*first == ' ' || *first == '\t')) ++first;
    while (last > first && (*(last - 1) == ' ' || *(last - 1) == '\t' || *(last - 1) == '\r')) {
        --last;
    }
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last && first != last;
}

inline void put_u32(std::ostream& os, std::uint32_t v) {
    std::array<unsigned char, 4> b{};
    for (int i = 0; i < 4; ++i) b[static_cast<std::size_t>(i)] = (v >> (8 * i)) & 0xff;
    os.write(reinterpret_cast<const char*>(b.data()), 4);
}

inline void put_u64(std::ostream& os, std::uint64_t v) {
    std::array<unsigned char, 8> b{};
    for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(i)] = (v >> (8 * i)) & 0xff;
    os.write(reinterpret_cast<const char*>(b.data()), 8);
}

inline void put_f64(std::ostream& os, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(os, bits);
}

class Reader {
public:
    Reader(std::istream& is, const std::string& name) : is_(is), name_(name) {}

    void bytes(void* dst, std::size_t n) {
        is_.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(is_.gcount()) != n) {
            throw TruncatedFileError(name_ + ": truncated at byte " +
                                     std::to_string(offset_ + static_cast<std::size_t>(
                                                                  std::max<std::streamsize>(
                                                                      0, is_.gcount()))));
        }
        offset_ += n;
    }

    std::uint32_t u32() {
        std::array<unsigned char, 4> b{};
        bytes(b.data(), 4);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
        return v;
    }

    std::uint64_t u64() {
        std::array<unsigned char, 8> b{};
        bytes(b.data(), 8);
        std::uint64_t v = 0;
        for (int i = 7; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
        return v;
    }

    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }

    std::size_t offset() const { return offset_; }

private:
    std::istream& is_;
    std::string name_;
    std::size_t offset_ = 0;
};

constexpr std::uint64_t kMaxPatternCells = std::uint64_t{1} << 34;  // 128 GiB of f64

}  // namespace detail

// ------------------------------- NPHB binary ---------------------------------
//
// Layout (little-endian): magic "NPHB", u32 version = 1, u64 d, u64 M,
// d*M f64 column-major memories, u8 contamination flag, then d*M f64
// contamination when the flag is 1. Round-trips bit-exactly.

inline void save_patterns_nphb(const MemoryStore& store, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FileOpenError("cannot open " + path.string() + " for writing");
    os.write("NPHB", 4);
    detail::put_u32(os, 1);
    detail::put_u64(os, static_cast<std::uint64_t>(store.dim()));
    detail::put_u64(os, static_cast<std::uint64_t>(store.count()));
    for (Index mu = 0; mu < store.count(); ++mu) {
        for (Index i = 0; i < store.dim(); ++i) detail::put_f64(os, store.memories()(i, mu));
    }
    os.put(store.has_contamination() ? '\x01' : '\x00');
    if (store.has_contamination()) {
        for (Index mu = 0; mu < store.count(); ++mu) {
            for (Index i = 0; i < store.dim(); ++i) {
                detail::put_f64(os, store.contamination()(i, mu));
            }
        }
    }
    if (!os) throw IoError("write failed for " + path.string());
}

inline MemoryStore load_patterns_nphb(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FileOpenError("cannot open " + path.string());
    detail::Reader in(is, path.string());
    std::array<char, 4> magic{};
    in.bytes(magic.data(), 4);
    if (std::string_view(magic.data(), 4) != "NPHB") {
        throw BadMagicError(path.string() + ": not an NPHB file");
    }
    const std::uint32_t version = in.u32();
    if (version != 1) {
        throw BadMagicError(path.string() + ": unsupported version " + std::to_string(version));
    }
    const std::uint64_t d = in.u64();
    const std::uint64_t m = in.u64();
    if (d == 0 || m == 0 || d > detail::kMaxPatternCells / std::max<std::uint64_t>(1, m)) {
        throw DimensionOverflowError(path.string() + ": implausible dimensions " +
                                     std::to_string(d) + "x" + std::to_string(m));
    }
    Matrix memories(static_cast<Index>(d), static_cast<Index>(m));
    for (Index mu = 0; mu < memories.cols(); ++mu) {
        for (Index i = 0; i < memories.rows(); ++i) memories(i, mu) = in.f64();
    }
    unsigned char flag = 0;
    in.bytes(&flag, 1);
    if (!memories.allFinite()) {
        throw NonFiniteValueError(path.string() + ": non-finite pattern value");
    }
    if (flag == 0) return MemoryStore(std::move(memories));
    Matrix contamination(memories.rows(), memories.cols());
    for (Index mu = 0; mu < contamination.cols(); ++mu) {
        for (Index i = 0; i < contamination.rows(); ++i) contamination(i, mu) = in.f64();
    }
    if (!contamination.allFinite()) {
        throw NonFiniteValueError(path.string() + ": non-finite contamination value");
    }
    return MemoryStore(std::move(memories), std::move(contamination));
}

// ---------------------------------- CSV --------------------------------------
//
// One pattern per row, d comma-separated columns; an optional non-numeric
// first line is treated as a header. Stored column-major internally, so
// ingestion transposes. Doubles are written shortest-round-trip, so
// save/load round-trips bit-exactly (clean memories only; contamination
// needs the binary format).

inline MemoryStore load_patterns_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw FileOpenError("cannot open " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    bool maybe_header = true;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        std::vector<double> row;
        std::size_t start = 0;
        bool bad = false;
        while (start <= line.size()) {
            std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) comma = line.size();
            double v = 0.0;
            if (!detail::parse_double(std::string_view(line).substr(start, comma - start), v)) {
                bad = true;
                break;
            }
            row.push_back(v);
            start = comma + 1;
            if (comma == line.size()) break;
        }
        if (bad) {
            if (maybe_header && rows.empty()) {
                maybe_header = false;
                continue;  // header line
            }
            throw CsvParseError(path.string() + ": row " + std::to_string(lineno) +
                                " has a non-numeric field");
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw CsvParseError(path.string() + ": row " + std::to_string(lineno) + " has " +
                                std::to_string(row.size()) + " fields, expected " +
                                std::to_string(rows.front().size()));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw CsvParseError(path.string() + ": no data rows");
    const Index m = static_cast<Index>(rows.size());
    const Index d = static_cast<Index>(rows.front().size());
    Matrix memories(d, m);
    for (Index mu = 0; mu < m; ++mu) {
        for (Index i = 0; i < d; ++i) {
            const double v = rows[static_cast<std::size_t>(mu)][static_cast<std::size_t>(i)];
            memories(i, mu) = v;
        }
    }
    if (!memories.allFinite()) {
        throw NonFiniteValueError(path.string() + ": non-finite pattern value");
    }
    return MemoryStore(std::move(memories));
}

inline void save_patterns_csv(const MemoryStore& store, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw FileOpenError("cannot open " + path.string() + " for writing");
    for (Index mu = 0; mu < store.count(); ++mu) {
        for (Index i = 0; i < store.dim(); ++i) {
            if (i) os << ',';
            os << detail::fmt_double(store.memories()(i, mu));
        }
        os << '\n';
    }
    if (!os) throw IoError("write failed for " + path.string());
}

inline MemoryStore load_patterns(const std::filesystem::path& path, PatternFormat format) {
    return format == PatternFormat::Nphb ? load_patterns_nphb(path) : load_patterns_csv(path);
}

inline void save_patterns(const MemoryStore& store, const std::filesystem::path& path,
                          PatternFormat format) {
    if (format == PatternFormat::Nphb) {
        save_patterns_nphb(store, path);
    } else {
        save_patterns_csv(store, path);
    }
}

/// Queries share the pattern-file formats: one vector per CSV row.
inline Matrix load_query_rows(const std::filesystem::path& path, PatternFormat format) {
    const MemoryStore staged = load_patterns(path, format);
    return staged.memories().transpose();
}

inline void write_text_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream os(path);
    if (!os) throw FileOpenError("cannot open " + path.string() + " for writing");
    os << content;
    if (!os) throw IoError("write failed for " + path.string());
}

}  // namespace nph
