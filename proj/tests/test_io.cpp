#include <gtest/gtest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

#include "nph/experiments.hpp"
#include "nph/io.hpp"

namespace {

namespace fs = std::filesystem;
using nph::Matrix;
using nph::MemoryStore;

fs::path temp_file(const std::string& name) {
    return fs::temp_directory_path() / ("nph_io_test_" + name);
}

MemoryStore contaminated_store() {
    const MemoryStore clean = nph::gen_sphere_patterns(7, 5, 1.0, 42);
    const MemoryStore noise = nph::gen_sphere_patterns(7, 5, 0.01, 43);
    return MemoryStore(clean.memories(), noise.memories());
}

TEST(Nphb, RoundTripIsBitExact) {
    const auto path = temp_file("roundtrip.nphb");
    const MemoryStore store = contaminated_store();
    nph::save_patterns(store, path, nph::PatternFormat::Nphb);
    const MemoryStore loaded = nph::load_patterns(path, nph::PatternFormat::Nphb);
    EXPECT_EQ(loaded.memories(), store.memories());
    ASSERT_TRUE(loaded.has_contamination());
    EXPECT_EQ(loaded.contamination(), store.contamination());
    fs::remove(path);
}

TEST(Nphb, RejectsBadMagicAndVersion) {
    const auto path = temp_file("magic.nphb");
    {
        std::ofstream os(path, std::ios::binary);
        os << "XXXX";
        os.write("\0\0\0\0\0\0\0\0", 8);
    }
    EXPECT_THROW(nph::load_patterns_nphb(path), nph::BadMagicError);
    {
        std::ofstream os(path, std::ios::binary);
        os << "NPHB";
        const std::uint32_t version = 9;
        os.write(reinterpret_cast<const char*>(&version), 4);
    }
    EXPECT_THROW(nph::load_patterns_nphb(path), nph::BadMagicError);
    fs::remove(path);
}

TEST(Nphb, TruncationReportsByteOffset) {
    const auto path = temp_file("trunc.nphb");
    const MemoryStore store = nph::gen_sphere_patterns(4, 3, 1.0, 1);
    nph::save_patterns(store, path, nph::PatternFormat::Nphb);
    const auto full_size = fs::file_size(path);
    fs::resize_file(path, full_size - 9);
    try {
        nph::load_patterns_nphb(path);
        FAIL() << "expected TruncatedFileError";
    } catch (const nph::TruncatedFileError& e) {
        EXPECT_NE(std::string(e.what()).find("byte"), std::string::npos);
    }
    fs::remove(path);
}

TEST(Nphb, ImplausibleDimensionsRejected) {
    const auto path = temp_file("overflow.nphb");
    {
        std::ofstream os(path, std::ios::binary);
        os << "NPHB";
        const std::uint32_t version = 1;
        os.write(reinterpret_cast<const char*>(&version), 4);
        const std::uint64_t d = std::uint64_t{1} << 40;
        const std::uint64_t m = std::uint64_t{1} << 40;
        os.write(reinterpret_cast<const char*>(&d), 8);
        os.write(reinterpret_cast<const char*>(&m), 8);
    }
    EXPECT_THROW(nph::load_patterns_nphb(path), nph::DimensionOverflowError);
    fs::remove(path);
}

TEST(Nphb, NonFiniteValuesRejected) {
    const auto path = temp_file("nan.nphb");
    const MemoryStore store = nph::gen_sphere_patterns(2, 2, 1.0, 2);
    nph::save_patterns(store, path, nph::PatternFormat::Nphb);
    {
        // Overwrite the first payload double with a NaN bit pattern.
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(4 + 4 + 8 + 8);
        const std::uint64_t nan_bits = 0x7ff8000000000000ull;
        f.write(reinterpret_cast<const char*>(&nan_bits), 8);
    }
    EXPECT_THROW(nph::load_patterns_nphb(path), nph::NonFiniteValueError);
    fs::remove(path);
}

TEST(Csv, RoundTripIsBitExact) {
    const auto path = temp_file("roundtrip.csv");
    const MemoryStore store = nph::gen_sphere_patterns(6, 4, 1.0, 3);
    nph::save_patterns(store, path, nph::PatternFormat::Csv);
    const MemoryStore loaded = nph::load_patterns(path, nph::PatternFormat::Csv);
    EXPECT_EQ(loaded.memories(), store.memories());
    fs::remove(path);
}

TEST(Csv, HeaderIsOptional) {
    const auto path = temp_file("header.csv");
    nph::write_text_file(path, "a,b,c\n1,2,3\n4,5,6\n");
    const MemoryStore store = nph::load_patterns(path, nph::PatternFormat::Csv);
    EXPECT_EQ(store.dim(), 3);
    EXPECT_EQ(store.count(), 2);
    EXPECT_DOUBLE_EQ(store.memories()(0, 1), 4.0);
    fs::remove(path);
}

TEST(Csv, RaggedRowsNameTheRow) {
    const auto path = temp_file("ragged.csv");
    nph::write_text_file(path, "1,2,3\n4,5,6\n7,8\n");
    try {
        nph::load_patterns(path, nph::PatternFormat::Csv);
        FAIL() << "expected CsvParseError";
    } catch (const nph::CsvParseError& e) {
        EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos);
    }
    fs::remove(path);
}

TEST(Csv, NonNumericAfterDataFails) {
    const auto path = temp_file("nonnum.csv");
    nph::write_text_file(path, "1,2\n3,oops\n");
    EXPECT_THROW(nph::load_patterns(path, nph::PatternFormat::Csv), nph::CsvParseError);
    fs::remove(path);
}

TEST(Csv, QueriesLoadAsRows) {
    const auto path = temp_file("queries.csv");
    nph::write_text_file(path, "1,0,0\n0,1,0\n");
    const Matrix rows = nph::load_query_rows(path, nph::PatternFormat::Csv);
    EXPECT_EQ(rows.rows(), 2);
    EXPECT_EQ(rows.cols(), 3);
    EXPECT_DOUBLE_EQ(rows(1, 1), 1.0);
    fs::remove(path);
}

TEST(Io, FormatSniffing) {
    EXPECT_EQ(nph::format_from_path("store.nphb"), nph::PatternFormat::Nphb);
    EXPECT_EQ(nph::format_from_path("store.csv"), nph::PatternFormat::Csv);
    EXPECT_EQ(nph::format_from_path("store.txt"), nph::PatternFormat::Csv);
}

TEST(Io, MissingFile) {
    EXPECT_THROW(nph::load_patterns("/nonexistent/nope.csv", nph::PatternFormat::Csv),
                 nph::FileOpenError);
}

}  // namespace
