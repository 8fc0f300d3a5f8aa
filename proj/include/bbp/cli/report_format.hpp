#pragma once

#include <algorithm>
#include <iomanip>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "../error.hpp"

namespace bbp::cli {

//---------------------------------------------------------------------------//
/*!
 * Ordered list of string fields. Every record carries a "record" field
 * naming its kind (config, row, check, result, summary).
 */
class Record
{
  public:
    Record() = default;
    explicit Record(std::string kind) { set("record", std::move(kind)); }

    Record& set(std::string key, std::string value)
    {
        for (auto& f : fields_)
        {
            if (f.first == key)
            {
                f.second = std::move(value);
                return *this;
            }
        }
        fields_.emplace_back(std::move(key), std::move(value));
        return *this;
    }

    std::string const* find(std::string const& key) const
    {
        for (auto const& f : fields_)
        {
            if (f.first == key)
                return &f.second;
        }
        return nullptr;
    }

    std::string get(std::string const& key) const
    {
        auto const* v = find(key);
        bbp::detail::require(v != nullptr, ErrorCode::ParseError, "record has no field '" + key + "'");
        return *v;
    }

    std::vector<std::pair<std::string, std::string>> const& fields() const noexcept { return fields_; }
    bool operator==(Record const&) const = default;

  private:
    std::vector<std::pair<std::string, std::string>> fields_;
};

//! Records printed as key=value lines, closed by a one-line JSON summary.
struct Document
{
    std::vector<Record> records;
    Record summary{"summary"};

    bool operator==(Document const&) const = default;
};

namespace detail {

inline bool needs_escape(char c)
{
    return c == '%' || c == '=' || c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '{';
}

inline std::string escape(std::string const& s)
{
    std::ostringstream out;
    for (char c : s)
    {
        if (needs_escape(c))
            out << '%' << std::uppercase << std::hex << std::setw(2) << std::setfill('0')
                << static_cast<int>(static_cast<unsigned char>(c));
        else
            out << c;
    }
    return out.str();
}

inline int hex_digit(char c)
{
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    bbp::detail::fail(ErrorCode::ParseError, "bad escape in structured output");
}

inline std::string unescape(std::string const& s)
{
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i)
    {
        if (s[i] != '%')
        {
            out.push_back(s[i]);
            continue;
        }
        bbp::detail::require(i + 2 < s.size(), ErrorCode::ParseError, "truncated escape in structured output");
        out.push_back(static_cast<char>(hex_digit(s[i + 1]) * 16 + hex_digit(s[i + 2])));
        i += 2;
    }
    return out;
}

}  // namespace detail

inline std::string render_line(Record const& r)
{
    std::string line;
    for (auto const& [k, v] : r.fields())
    {
        if (!line.empty())
            line.push_back(' ');
        line += detail::escape(k) + "=" + detail::escape(v);
    }
    return line;
}

inline std::string render_json(Record const& r)
{
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (auto const& [k, v] : r.fields())
        j[k] = v;
    return j.dump();
}

//! Machine-readable form: one line per record, then the summary as JSON.
inline std::string render_machine(Document const& doc)
{
    std::string out;
    for (auto const& r : doc.records)
        out += render_line(r) + "\n";
    out += render_json(doc.summary) + "\n";
    return out;
}

inline Record parse_line(std::string const& line)
{
    Record r;
    std::istringstream in(line);
    std::string token;
    while (in >> token)
    {
        auto eq = token.find('=');
        bbp::detail::require(eq != std::string::npos, ErrorCode::ParseError, "field without '=': " + token);
        r.set(detail::unescape(token.substr(0, eq)), detail::unescape(token.substr(eq + 1)));
    }
    return r;
}

inline Document parse_machine(std::string const& text)
{
    Document doc;
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        lines.push_back(line);
    bbp::detail::require(!lines.empty() && !lines.back().empty() && lines.back().front() == '{', ErrorCode::ParseError,
                         "structured output must end with a JSON summary line");
    for (std::size_t i = 0; i + 1 < lines.size(); ++i)
        doc.records.push_back(parse_line(lines[i]));
    nlohmann::ordered_json j;
    try
    {
        j = nlohmann::ordered_json::parse(lines.back());
    }
    catch (nlohmann::json::exception const& e)
    {
        bbp::detail::fail(ErrorCode::ParseError, std::string("bad summary line: ") + e.what());
    }
    bbp::detail::require(j.is_object(), ErrorCode::ParseError, "summary line is not an object");
    doc.summary = Record();
    for (auto it = j.begin(); it != j.end(); ++it)
    {
        bbp::detail::require(it.value().is_string(), ErrorCode::ParseError, "summary values must be strings");
        doc.summary.set(it.key(), it.value().get<std::string>());
    }
    return doc;
}

//! Human-readable form: aligned "key: value" blocks.
inline std::string render_human(Document const& doc)
{
    std::ostringstream out;
    auto block = [&](Record const& r) {
        std::size_t width = 0;
        for (auto const& f : r.fields())
            width = std::max(width, f.first.size());
        for (auto const& [k, v] : r.fields())
        {
            if (k == "record")
                continue;
            out << "  " << std::left << std::setw(static_cast<int>(width)) << k << "  " << v << "\n";
        }
    };
    for (auto const& r : doc.records)
    {
        out << "[" << (r.find("record") ? *r.find("record") : std::string("record")) << "]\n";
        block(r);
    }
    out << "[summary]\n";
    block(doc.summary);
    return out.str();
}

}  // namespace bbp::cli
