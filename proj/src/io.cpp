#include "khess/io.hpp"

#include "khess/errors.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace khess::io {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep)) out.push_back(trim(item));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

double parse_number(const std::string& text, std::size_t line, const std::string& what) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (!text.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (text.empty() || ec != std::errc() || ptr != last || !std::isfinite(value)) {
        throw ParseError("invalid number '" + text + "' for " + what +
                             (line ? " on line " + std::to_string(line) : std::string()),
                         line);
    }
    return value;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;
};

// Reads a numeric CSV whose header must start with `required` and may add
// the names in `optional`, in that order.
Table read_table(const std::filesystem::path& path, const std::vector<std::string>& required,
                 const std::vector<std::string>& optional) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    std::string text;
    std::size_t line_no = 0;
    Table table;
    while (std::getline(in, text)) {
        ++line_no;
        if (trim(text).empty()) continue;
        if (table.header.empty()) {
            table.header = split(trim(text), ',');
            const std::size_t cols = table.header.size();
            bool ok = cols >= required.size() && cols <= required.size() + optional.size();
            for (std::size_t j = 0; ok && j < cols; ++j) {
                const auto& expected = j < required.size() ? required[j] : optional[j - required.size()];
                ok = table.header[j] == expected;
            }
            if (!ok) {
                std::string want;
                for (const auto& r : required) want += (want.empty() ? "" : ",") + r;
                for (const auto& o : optional) want += "[," + o + "]";
                throw ParseError(path.string() + ": bad header on line " + std::to_string(line_no) + ", expected " + want,
                                 line_no);
            }
            table.columns.resize(cols);
            continue;
        }
        const auto fields = split(trim(text), ',');
        if (fields.size() != table.header.size()) {
            throw ParseError(path.string() + ": line " + std::to_string(line_no) + " has " +
                                 std::to_string(fields.size()) + " fields, expected " +
                                 std::to_string(table.header.size()),
                             line_no);
        }
        for (std::size_t j = 0; j < fields.size(); ++j) {
            table.columns[j].push_back(parse_number(fields[j], line_no, path.string() + " column " + table.header[j]));
        }
    }
    if (table.header.empty()) throw ParseError(path.string() + ": empty file");
    return table;
}

std::string fmt(double x) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, ptr);
}

}  // namespace

RadialProfile read_profile_csv(const std::filesystem::path& path) {
    auto t = read_table(path, {"r", "u", "du"}, {"d2u"});
    RadialGrid grid = [&] {
        try {
            return RadialGrid::from_nodes(t.columns[0]);
        } catch (const DomainError& e) {
            throw ParseError(path.string() + ": " + e.what());
        }
    }();
    std::optional<std::vector<double>> d2u;
    if (t.columns.size() == 4) d2u = std::move(t.columns[3]);
    return RadialProfile(std::move(grid), std::move(t.columns[1]), std::move(t.columns[2]), std::move(d2u));
}

std::string profile_csv(const RadialProfile& profile) {
    std::string out = profile.d2u() ? "r,u,du,d2u\n" : "r,u,du\n";
    for (std::size_t i = 0; i < profile.size(); ++i) {
        out += fmt(profile.grid()[i]) + "," + fmt(profile.u()[i]) + "," + fmt(profile.du()[i]);
        if (profile.d2u()) out += "," + fmt((*profile.d2u())[i]);
        out += "\n";
    }
    return out;
}

Nonlinearity read_g_table_csv(const std::filesystem::path& path) {
    auto t = read_table(path, {"s", "g"}, {"gprime"});
    std::vector<double> gp;
    if (t.columns.size() == 3) gp = std::move(t.columns[2]);
    try {
        return Nonlinearity::tabulated(std::move(t.columns[0]), std::move(t.columns[1]), std::move(gp));
    } catch (const DomainError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

std::string g_table_csv(const Nonlinearity::Table& table) {
    std::string out = "s,g,gprime\n";
    for (std::size_t i = 0; i < table.s.size(); ++i) {
        out += fmt(table.s[i]) + "," + fmt(table.g[i]) + "," + fmt(table.gprime[i]) + "\n";
    }
    return out;
}

Nonlinearity parse_nonlinearity(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string rest = colon == std::string::npos ? std::string() : spec.substr(colon + 1);
    if (kind == "table") {
        if (rest.empty()) throw ParseError("table nonlinearity needs a path");
        return read_g_table_csv(rest);
    }
    const auto args = split(rest, ':');
    auto arg = [&](std::size_t i) { return parse_number(args[i], 0, "nonlinearity '" + spec + "'"); };
    if (kind == "const" && args.size() == 1) return Nonlinearity::constant(arg(0));
    if (kind == "exp" && args.size() == 1) return Nonlinearity::exponential(arg(0));
    if (kind == "power" && args.size() == 2) return Nonlinearity::power(arg(0), arg(1));
    throw ParseError("unknown nonlinearity '" + spec + "' (expected const:<c>, exp:<lambda>, power:<lambda>:<p>, table:<path>)");
}

HFunction parse_h(const std::string& spec_in) {
    std::string spec = spec_in;
    if (spec.rfind("h=", 0) == 0) spec = spec.substr(2);
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string rest = colon == std::string::npos ? std::string() : spec.substr(colon + 1);
    try {
        if (kind == "zero" && colon == std::string::npos) return HFunction::zero();
        if (kind == "table") {
            if (rest.empty()) throw ParseError("h table needs a path");
            auto t = read_table(rest, {"r", "h"}, {});
            return HFunction::tabulated(std::move(t.columns[0]), std::move(t.columns[1]));
        }
        const auto args = split(rest, ':');
        auto arg = [&](std::size_t i) { return parse_number(args[i], 0, "h spec '" + spec_in + "'"); };
        if (kind == "const" && args.size() == 1) return HFunction::constant(arg(0));
        if (kind == "pow" && args.size() == 2) return HFunction::power(arg(0), arg(1));
    } catch (const DomainError& e) {
        throw ParseError("h spec '" + spec_in + "': " + e.what());
    }
    throw ParseError("unknown h spec '" + spec_in + "' (expected zero, const:<a>, pow:<a>:<b>, table:<path>)");
}

std::vector<Bump> read_bump_csv(const std::filesystem::path& path) {
    auto t = read_table(path, {"center", "width"}, {});
    std::vector<Bump> out;
    for (std::size_t i = 0; i < t.columns[0].size(); ++i) {
        if (!(t.columns[1][i] > 0.0)) throw ParseError(path.string() + ": bump width must be positive");
        out.push_back({t.columns[0][i], t.columns[1][i]});
    }
    return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw Error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace khess::io
