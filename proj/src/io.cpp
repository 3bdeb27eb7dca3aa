#include "qplab/io.hpp"

#include <openssl/evp.h>
#include <openssl/opensslv.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "qplab/errors.hpp"

#ifndef QPLAB_VERSION
#define QPLAB_VERSION "0.0.0"
#endif

namespace qplab {

namespace fs = std::filesystem;

const char* library_version() { return QPLAB_VERSION; }

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (i) text_ += ',';
        text_ += columns_[i];
    }
    text_ += '\n';
}

std::string CsvTable::number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void CsvTable::row(const std::vector<double>& values) {
    if (values.size() != columns_.size()) throw SizeError("csv row width does not match the header");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) text_ += ',';
        text_ += number(values[i]);
    }
    text_ += '\n';
    ++rows_;
}

void CsvTable::row_cells(const std::vector<std::string>& cells) {
    if (cells.size() != columns_.size()) throw SizeError("csv row width does not match the header");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) text_ += ',';
        text_ += cells[i];
    }
    text_ += '\n';
    ++rows_;
}

std::string git_blob_hash(const std::string& bytes) {
    const std::string head = "blob " + std::to_string(bytes.size()) + '\0';
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    const bool ok = ctx && EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) &&
                    EVP_DigestUpdate(ctx, head.data(), head.size()) &&
                    EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) && EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    if (!ok) throw Error("sha1 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

RunWriter::RunWriter(fs::path dir, std::string subcommand, std::string config_text)
    : dir_(std::move(dir)), subcommand_(std::move(subcommand)), config_text_(std::move(config_text)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) {
        throw ConfigError("cannot create output directory '" + dir_.string() + "': " + ec.message());
    }
}

namespace {

void write_file(const fs::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ConfigError("cannot write '" + p.string() + "'");
}

}  // namespace

void RunWriter::write(const std::string& name, const CsvTable& table) {
    write_file(dir_ / name, table.text());
    entries_.push_back({name, table.columns(), table.rows(), table.text().size(), git_blob_hash(table.text())});
}

std::string RunWriter::finish() {
    auto sorted = entries_;
    std::sort(sorted.begin(), sorted.end(), [](const Entry& a, const Entry& b) { return a.name < b.name; });
    // tree-like listing of the outputs plus the config echo
    std::string listing = git_blob_hash(config_text_) + "  config\n";
    for (const auto& e : sorted) listing += e.blob + "  " + e.name + "\n";
    const std::string content = git_blob_hash(listing);

    nlohmann::ordered_json m;
    m["tool"] = "qplab";
    m["subcommand"] = subcommand_;
    m["versions"] = {{"qplab", QPLAB_VERSION},
                     {"csv_schema", kCsvSchemaVersion},
                     {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                     {"openssl", OPENSSL_VERSION_TEXT},
#if defined(__clang__)
                     {"compiler", "clang " __clang_version__},
#elif defined(__GNUC__)
                     {"compiler", "gcc " __VERSION__},
#endif
                     {"cxx_standard", static_cast<long>(__cplusplus)}};
    m["config"] = config_text_;
    m["config_hash"] = git_blob_hash(config_text_);
    auto files = nlohmann::ordered_json::array();
    for (const auto& e : entries_) {
        files.push_back({{"name", e.name}, {"columns", e.columns}, {"rows", e.rows}, {"bytes", e.bytes},
                         {"git_blob_sha1", e.blob}});
    }
    m["outputs"] = files;
    m["content_hash"] = content;
    write_file(dir_ / "manifest.json", m.dump(2) + "\n");
    return content;
}

}  // namespace qplab
