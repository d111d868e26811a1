// SPDX-License-Identifier: Apache-2.0
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "moop/error.hpp"
#include "moop/hybrid.hpp"

namespace moop {

namespace {

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

double parse_double(std::string_view text, const std::string& where) {
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw ParseError(where, "not a number: '" + std::string(text) + "'");
    return v;
}

} // namespace

std::vector<std::string> objective_names(ProblemKind kind, int k_profits) {
    std::vector<std::string> names;
    if (k_profits == 1) {
        names.push_back("profit");
    } else {
        for (int k = 1; k <= k_profits; ++k) names.push_back("profit" + std::to_string(k));
    }
    if (kind != ProblemKind::profits) names.push_back("neg_length");
    return names;
}

void write_front_csv(const std::filesystem::path& path, std::span<const EvaluatedSolution> front, ProblemKind kind) {
    std::ostringstream out;
    const int k = front.empty() ? (kind == ProblemKind::mixed ? 1 : 2)
                                : static_cast<int>(front.front().objectives.size()) - 1;
    for (const auto& name : objective_names(kind, k)) out << name << ',';
    out << "route\n";
    for (const auto& sol : front) {
        for (double v : project(sol.objectives, kind)) out << format_double(v) << ',';
        out << 0;
        for (City c : sol.tour) out << ';' << c;
        out << ";0\n";
    }
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw std::runtime_error("cannot write front file " + path.string());
    file << out.str();
    if (!file) throw std::runtime_error("write failed for front file " + path.string());
}

std::vector<FrontRow> read_front_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string(), "cannot open front file");
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path.string() + ":1", "missing header");
    std::size_t columns = 1;
    for (char c : line) columns += c == ',';
    const bool has_route = line.ends_with("route");
    std::vector<FrontRow> rows;
    for (int lineno = 2; std::getline(in, line); ++lineno) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(lineno);
        std::vector<std::string_view> cells;
        std::string_view rest = line;
        for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos; rest.remove_prefix(pos + 1))
            cells.push_back(rest.substr(0, pos));
        cells.push_back(rest);
        if (cells.size() != columns)
            throw ParseError(where, "expected " + std::to_string(columns) + " fields, found " + std::to_string(cells.size()));
        FrontRow row;
        const std::size_t n_obj = has_route ? columns - 1 : columns;
        for (std::size_t i = 0; i < n_obj; ++i) row.objectives.push_back(parse_double(cells[i], where));
        if (has_route) {
            std::string_view r = cells.back();
            while (!r.empty()) {
                const auto pos = r.find(';');
                const auto tok = r.substr(0, pos);
                int c = 0;
                const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), c);
                if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
                    throw ParseError(where, "bad route entry '" + std::string(tok) + "'");
                row.route.push_back(c);
                if (pos == std::string_view::npos) break;
                r.remove_prefix(pos + 1);
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace moop
