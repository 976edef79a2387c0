// Tabular output as CSV or JSON, and the matching parsers.
#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "core.hpp"

namespace rmprod::io
{
using Json = nlohmann::ordered_json;

/*!
 * A table with free-form metadata.  Cells are numbers, strings or booleans;
 * NaN is written as "nan" in CSV and null in JSON.
 */
struct Table
{
    Json meta = Json::object();
    std::vector<std::string> columns;
    std::vector<std::vector<Json>> rows;

    void add_row(std::vector<Json> row)
    {
        if (row.size() != columns.size())
            throw PreconditionError("row width does not match the header");
        rows.push_back(std::move(row));
    }
};

enum class Format
{
    csv,
    json
};

inline Format parse_format(std::string const& s)
{
    if (s == "csv")
        return Format::csv;
    if (s == "json")
        return Format::json;
    throw PreconditionError("unknown format '" + s + "'");
}

class IoError : public Error
{
  public:
    using Error::Error;
};

namespace detail
{
inline std::string format_number(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string quote(std::string const& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s)
    {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + '"';
}

inline std::string format_cell(Json const& v)
{
    if (v.is_number_integer())
        return std::to_string(v.get<long long>());
    if (v.is_number())
        return format_number(v.get<double>());
    if (v.is_boolean())
        return v.get<bool>() ? "true" : "false";
    if (v.is_null())
        return "nan";
    if (v.is_string())
        return quote(v.get<std::string>());
    return quote(v.dump());
}

inline std::vector<std::string> split_csv_line(std::string const& line)
{
    std::vector<std::string> out;
    std::string cur;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i)
    {
        char c = line[i];
        if (in_quotes)
        {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"')
            {
                cur += '"';
                ++i;
            }
            else if (c == '"')
                in_quotes = false;
            else
                cur += c;
        }
        else if (c == '"')
            in_quotes = true;
        else if (c == ',')
        {
            out.push_back(cur);
            cur.clear();
        }
        else
            cur += c;
    }
    out.push_back(cur);
    return out;
}

inline Json parse_cell(std::string const& s)
{
    if (s == "true")
        return true;
    if (s == "false")
        return false;
    if (s == "nan")
        return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf")
        return std::numeric_limits<double>::infinity();
    if (s == "-inf")
        return -std::numeric_limits<double>::infinity();
    if (!s.empty())
    {
        char* end = nullptr;
        long long i = std::strtoll(s.c_str(), &end, 10);
        if (*end == '\0')
            return i;
        double d = std::strtod(s.c_str(), &end);
        if (*end == '\0')
            return d;
    }
    return s;
}

inline Json cell_to_json(Json const& v)
{
    if (v.is_number_float() && !std::isfinite(v.get<double>()))
        return nullptr;
    return v;
}
}  // namespace detail

//! CSV: '#' metadata line holding compact JSON, then header and rows.
inline std::string to_csv(Table const& t)
{
    std::ostringstream os;
    os << "# meta: " << t.meta.dump() << '\n';
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        os << (i ? "," : "") << detail::quote(t.columns[i]);
    os << '\n';
    for (auto const& row : t.rows)
    {
        for (std::size_t i = 0; i < row.size(); ++i)
            os << (i ? "," : "") << detail::format_cell(row[i]);
        os << '\n';
    }
    return os.str();
}

inline std::string to_json(Table const& t)
{
    Json j;
    j["meta"] = t.meta;
    j["columns"] = t.columns;
    Json rows = Json::array();
    for (auto const& row : t.rows)
    {
        Json r = Json::array();
        for (auto const& c : row)
            r.push_back(detail::cell_to_json(c));
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    // shortest representation that round-trips to the same double
    return j.dump(1) + '\n';
}

inline std::string serialize(Table const& t, Format f)
{
    return f == Format::csv ? to_csv(t) : to_json(t);
}

inline Table parse_csv(std::string const& text)
{
    Table t;
    std::istringstream is(text);
    std::string line;
    bool have_header = false;
    while (std::getline(is, line))
    {
        if (line.empty())
            continue;
        if (line[0] == '#')
        {
            std::string const key = "# meta: ";
            if (line.compare(0, key.size(), key) == 0)
                t.meta = Json::parse(line.substr(key.size()));
            continue;
        }
        auto cells = detail::split_csv_line(line);
        if (!have_header)
        {
            t.columns = cells;
            have_header = true;
            continue;
        }
        if (cells.size() != t.columns.size())
            throw IoError("CSV row width does not match the header");
        std::vector<Json> row;
        for (auto const& c : cells)
            row.push_back(detail::parse_cell(c));
        t.rows.push_back(std::move(row));
    }
    if (!have_header)
        throw IoError("CSV has no header row");
    return t;
}

inline Table parse_json(std::string const& text)
{
    Json j = Json::parse(text);
    Table t;
    t.meta = j.at("meta");
    t.columns = j.at("columns").get<std::vector<std::string>>();
    for (auto const& r : j.at("rows"))
    {
        std::vector<Json> row;
        for (auto const& c : r)
            row.push_back(c.is_null()
                              ? Json(std::numeric_limits<double>::quiet_NaN())
                              : c);
        if (row.size() != t.columns.size())
            throw IoError("JSON row width does not match the header");
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline Table parse(std::string const& text, Format f)
{
    return f == Format::csv ? parse_csv(text) : parse_json(text);
}

inline void write_file(std::string const& path, std::string const& content)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw IoError("cannot open '" + path + "' for writing");
    os << content;
    if (!os)
        throw IoError("write to '" + path + "' failed");
}

inline std::string read_file(std::string const& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw IoError("cannot open '" + path + "' for reading");
    return {std::istreambuf_iterator<char>(is), {}};
}

}  // namespace rmprod::io
