#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace hierid {

// Shortest decimal form that parses back to the same double (std::to_chars),
// so re-serializing a parsed file is byte-identical.
std::string fmt_double(double v);

double parse_double(const std::string& s);

// Minimal CSV: no quoting, comma separator; fine for the numeric tables this
// project emits.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

}  // namespace hierid
