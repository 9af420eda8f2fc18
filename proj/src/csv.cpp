#include "floodcare/csv.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "floodcare/model.hpp"

namespace floodcare {

int CsvTable::column(std::string_view name) const {
    for (std::size_t c = 0; c < header.size(); ++c)
        if (header[c] == name) return static_cast<int>(c);
    return -1;
}

CsvTable parse_csv(std::string_view text) {
    CsvTable table;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool any = false;
    int line = 1;
    int record_line = 1;

    auto finish_record = [&] {
        record.push_back(std::move(field));
        field.clear();
        const bool blank = record.size() == 1 && record.front().empty() && !any;
        if (!blank) {
            if (table.header.empty()) {
                table.header = std::move(record);
            } else {
                table.rows.push_back(std::move(record));
                table.lines.push_back(record_line);
            }
        }
        record.clear();
        any = false;
    };

    for (std::size_t n = 0; n < text.size(); ++n) {
        const char ch = text[n];
        if (quoted) {
            if (ch == '"') {
                if (n + 1 < text.size() && text[n + 1] == '"') {
                    field.push_back('"');
                    ++n;
                } else {
                    quoted = false;
                }
            } else {
                if (ch == '\n') ++line;
                field.push_back(ch);
            }
            continue;
        }
        switch (ch) {
            case '"': quoted = true; any = true; break;
            case ',': record.push_back(std::move(field)); field.clear(); any = true; break;
            case '\r': break;
            case '\n':
                finish_record();
                ++line;
                record_line = line;
                break;
            default: field.push_back(ch); any = true;
        }
    }
    if (quoted) throw ConfigError(fmt::format("line {}: unterminated quoted field", record_line));
    if (any || !field.empty()) finish_record();
    if (!table.header.empty() && !table.header.front().empty() &&
        table.header.front().rfind("\xEF\xBB\xBF", 0) == 0)
        table.header.front().erase(0, 3);
    return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(fmt::format("cannot open {}", path.string()));
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_csv(buffer.str());
    } catch (const ConfigError& e) {
        throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

std::string csv_field(std::string_view value) {
    if (value.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(value);
    std::string out = "\"";
    for (char ch : value) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : width_(header.size()) {
    add_row(std::move(header));
}

void CsvWriter::add_row(std::vector<std::string> fields) {
    if (fields.size() != width_) throw ConfigError("CSV row width does not match header");
    for (std::size_t c = 0; c < fields.size(); ++c) {
        if (c > 0) out_.push_back(',');
        out_ += csv_field(fields[c]);
    }
    out_.push_back('\n');
}

std::string CsvWriter::str() const { return out_; }

}  // namespace floodcare
