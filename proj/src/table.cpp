#include "fademac/table.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fademac {

void
Table::add_row(std::vector<Cell> row)
{
    if (row.size() != columns.size())
    {
        throw std::invalid_argument("table row has " + std::to_string(row.size()) +
                                    " cells, header has " + std::to_string(columns.size()));
    }
    rows.push_back(std::move(row));
}

std::size_t
Table::column(const std::string& name) const
{
    for (std::size_t i = 0; i < columns.size(); ++i)
    {
        if (columns[i] == name)
        {
            return i;
        }
    }
    throw std::out_of_range("no column named " + name);
}

double
Table::number(std::size_t row, const std::string& name) const
{
    const Cell& c = rows.at(row).at(column(name));
    if (const auto* d = std::get_if<double>(&c))
    {
        return *d;
    }
    if (const auto* i = std::get_if<std::int64_t>(&c))
    {
        return static_cast<double>(*i);
    }
    throw std::invalid_argument("column " + name + " is not numeric");
}

std::string
format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

void
write_field(std::ostream& out, const std::string& s)
{
    if (s.find_first_of(",\"\n\r") == std::string::npos)
    {
        out << s;
        return;
    }
    out << '"';
    for (char c : s)
    {
        if (c == '"')
        {
            out << '"';
        }
        out << c;
    }
    out << '"';
}

void
write_cell(std::ostream& out, const Cell& c)
{
    std::visit(
        [&out](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>)
            {
                out << format_double(v);
            }
            else if constexpr (std::is_same_v<T, std::int64_t>)
            {
                out << v;
            }
            else
            {
                write_field(out, v);
            }
        },
        c);
}

} // namespace

void
write_csv(const Table& table, std::ostream& out)
{
    for (std::size_t i = 0; i < table.columns.size(); ++i)
    {
        if (i > 0)
        {
            out << ',';
        }
        write_field(out, table.columns[i]);
    }
    out << '\n';
    for (const auto& row : table.rows)
    {
        for (std::size_t i = 0; i < row.size(); ++i)
        {
            if (i > 0)
            {
                out << ',';
            }
            write_cell(out, row[i]);
        }
        out << '\n';
    }
}

std::string
to_csv_string(const Table& table)
{
    std::ostringstream ss;
    write_csv(table, ss);
    return ss.str();
}

void
emit_csv(const Table& table, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
    {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    write_csv(table, out);
    out.flush();
    if (!out)
    {
        throw std::runtime_error("write failed for " + path.string());
    }
}

std::vector<std::vector<std::string>>
parse_csv(const std::string& text)
{
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool any = false;
    for (std::size_t i = 0; i < text.size(); ++i)
    {
        const char c = text[i];
        any = true;
        if (quoted)
        {
            if (c == '"' && i + 1 < text.size() && text[i + 1] == '"')
            {
                field += '"';
                ++i;
            }
            else if (c == '"')
            {
                quoted = false;
            }
            else
            {
                field += c;
            }
        }
        else if (c == '"')
        {
            quoted = true;
        }
        else if (c == ',')
        {
            row.push_back(std::move(field));
            field.clear();
        }
        else if (c == '\n')
        {
            row.push_back(std::move(field));
            field.clear();
            rows.push_back(std::move(row));
            row.clear();
            any = false;
        }
        else
        {
            field += c;
        }
    }
    if (any)
    {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace fademac
