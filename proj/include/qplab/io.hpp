#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace qplab {

// Version of every CSV column layout written by the runner; bumped whenever a
// column is added, removed or reordered.
inline constexpr int kCsvSchemaVersion = 1;

const char* library_version();

// In-memory CSV with a header row, '.' decimals and LF line endings. Numbers
// are printed with 17 significant digits so that output bytes identify the
// doubles exactly.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> columns);

    void row(const std::vector<double>& values);
    void row_cells(const std::vector<std::string>& cells);

    const std::vector<std::string>& columns() const noexcept { return columns_; }
    std::size_t rows() const noexcept { return rows_; }
    const std::string& text() const noexcept { return text_; }

    static std::string number(double x);

private:
    std::vector<std::string> columns_;
    std::string text_;
    std::size_t rows_ = 0;
};

// SHA-1 of "blob <size>\0<bytes>", the id git gives the same file.
std::string git_blob_hash(const std::string& bytes);

// Writes tables into an output directory and finishes with manifest.json:
// config echo, per-file blob hashes, a content hash over all of them, and
// versions. Nothing in the manifest depends on time or host, so identical
// runs give identical bytes.
class RunWriter {
public:
    RunWriter(std::filesystem::path dir, std::string subcommand, std::string config_text);

    void write(const std::string& name, const CsvTable& table);
    // Returns the content hash.
    std::string finish();

    const std::filesystem::path& dir() const noexcept { return dir_; }

private:
    struct Entry {
        std::string name;
        std::vector<std::string> columns;
        std::size_t rows = 0;
        std::size_t bytes = 0;
        std::string blob;
    };
    std::filesystem::path dir_;
    std::string subcommand_;
    std::string config_text_;
    std::vector<Entry> entries_;
};

}  // namespace qplab
