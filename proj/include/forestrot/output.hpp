#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "forestrot/error.hpp"

namespace forestrot::io {

using json = nlohmann::json;

/// 17 significant digits, '.' separator regardless of locale; inf/nan spelled out.
inline std::string format_number(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return fmt::format("{:.17g}", x);
}

/// JSON has no inf/nan; those are written as strings.
inline json number(double x)
{
    if (std::isfinite(x)) return x;
    return format_number(x);
}

using Cell = std::variant<double, std::int64_t, std::string>;

inline std::string format_cell(const Cell& c)
{
    if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
    if (const auto* i = std::get_if<std::int64_t>(&c)) return fmt::format("{}", *i);
    const auto& s = std::get<std::string>(c);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (const char ch : s) {
        if (ch == '"') quoted += '"';
        quoted += ch;
    }
    return quoted + "\"";
}

/// Comma-separated table with a leading "# key=value ..." provenance line.
class CsvTable {
public:
    CsvTable(std::vector<std::string> columns, std::string provenance)
        : columns_(std::move(columns)), provenance_(std::move(provenance))
    {}

    void add(std::vector<Cell> row)
    {
        if (row.size() != columns_.size())
            throw std::logic_error(fmt::format("csv row has {} cells, expected {}", row.size(), columns_.size()));
        rows_.push_back(std::move(row));
    }

    std::string str() const
    {
        std::string out = "# " + provenance_ + "\n";
        for (std::size_t i = 0; i < columns_.size(); ++i) out += (i ? "," : "") + columns_[i];
        out += "\n";
        for (const auto& row : rows_) {
            for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_cell(row[i]);
            out += "\n";
        }
        return out;
    }

    std::size_t size() const { return rows_.size(); }

private:
    std::vector<std::string> columns_;
    std::string provenance_;
    std::vector<std::vector<Cell>> rows_;
};

inline void write_text(const std::filesystem::path& path, std::string_view text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

/// Two-space indented dump with a trailing newline.
inline std::string json_text(const json& j) { return j.dump(2) + "\n"; }

} // namespace forestrot::io
