#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace floodcare {

// Header-indexed CSV with RFC 4180 quoting. Blank lines are skipped.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<int> lines;  // 1-based source line of each row

    // -1 when absent.
    int column(std::string_view name) const;
};

CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);

    void add_row(std::vector<std::string> fields);
    std::string str() const;

private:
    std::string out_;
    std::size_t width_;
};

std::string csv_field(std::string_view value);

}  // namespace floodcare
