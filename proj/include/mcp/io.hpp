#pragma once

// Sidecar file formats: performance definitions and machine descriptions.
//
//   perf <ref> serial a=<float> [n=<float>]
//   perf <ref> perfect a=<float> [n=<float>]
//   perf <ref> amdahl a=<float> s=<float> [n=<float>]
//   perf <ref> table (P,t);(P,t);... [n=<float>]
//
// Machine files are key=value lines:
//   nodes, cores_per_node, lambda_core, p_static, p_dyn, alpha,
//   f_levels=<f>,<f>,...   reliability=<first>-<last>:<multiplier>  (repeatable)

#include <cerrno>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include "mcp/machine.hpp"
#include "mcp/mmd.hpp"
#include "mcp/perf.hpp"

namespace mcp {

namespace detail {

inline double parse_double(std::string_view s, int line, int col, const char* what) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError(ParseError::Kind::Syntax, line, col, std::string("expected ") + what);
    return v;
}

inline long parse_long(std::string_view s, int line, int col, const char* what) {
    long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError(ParseError::Kind::Syntax, line, col, std::string("expected ") + what);
    return v;
}

template <class F>
void for_each_line(std::string_view text, F&& fn) {
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
        auto tokens = tokenize_line(strip_comment(raw));
        if (!tokens.empty()) fn(line_no, tokens);
    }
}

}  // namespace detail

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::map<std::string, PerfModel> parse_perf_file(std::string_view text) {
    std::map<std::string, PerfModel> out;
    detail::for_each_line(text, [&](int line, const std::vector<detail::Token>& tk) {
        detail::LineParser p(line, tk);
        if (tk[0].text != "perf") p.fail(tk[0], "expected 'perf'");
        auto ref = p.identifier(1, "performance reference");
        if (out.count(ref)) p.fail(tk[1], "duplicate performance reference '" + ref + "'");
        const auto& kind = p.at(2, "serial, perfect, amdahl or table");

        auto build = [&]() -> PerfModel {
            if (kind.text == "table") {
                const auto& points = p.at(3, "table points (P,t);(P,t)");
                auto kv = p.pairs(4, {"n"});
                double n = kv.count("n") ? detail::parse_double(kv.at("n").text, line, kv.at("n").column, "number") : 1;
                std::vector<std::pair<int, double>> pts;
                std::string_view rest = points.text;
                while (!rest.empty()) {
                    auto semi = rest.find(';');
                    auto item = rest.substr(0, semi);
                    rest = semi == std::string_view::npos ? std::string_view{} : rest.substr(semi + 1);
                    if (item.size() < 5 || item.front() != '(' || item.back() != ')')
                        p.fail(points, "expected (P,t) point");
                    item = item.substr(1, item.size() - 2);
                    auto comma = item.find(',');
                    if (comma == std::string_view::npos) p.fail(points, "expected (P,t) point");
                    auto procs = detail::parse_long(item.substr(0, comma), line, points.column, "integer P");
                    auto t = detail::parse_double(item.substr(comma + 1), line, points.column, "time");
                    pts.emplace_back(static_cast<int>(procs), t);
                }
                return PerfModel::table(std::move(pts), n);
            }
            std::set<std::string> allowed{"a", "n"};
            if (kind.text == "amdahl") allowed.insert("s");
            auto kv = p.pairs(3, allowed);
            auto num = [&](const char* key, std::optional<double> dflt) {
                auto it = kv.find(key);
                if (it == kv.end()) {
                    if (!dflt) p.fail_at_end(std::string("expected ") + key + "=<float>");
                    return *dflt;
                }
                return detail::parse_double(it->second.text, line, it->second.column, "number");
            };
            const double a = num("a", std::nullopt), n = num("n", 1.0);
            if (kind.text == "serial") return PerfModel::serial(a, n);
            if (kind.text == "perfect") return PerfModel::perfect(a, n);
            if (kind.text == "amdahl") return PerfModel::amdahl(a, num("s", std::nullopt), n);
            p.fail(kind, "expected serial, perfect, amdahl or table");
        };
        try {
            out.emplace(ref, build());
        } catch (const std::invalid_argument& e) {
            throw ParseError(ParseError::Kind::Syntax, line, kind.column, e.what());
        }
    });
    return out;
}

inline MachineModel parse_machine_file(std::string_view text) {
    MachineModel m;
    m.energy.f_levels = {1.0};
    std::set<std::string> seen;
    detail::for_each_line(text, [&](int line, const std::vector<detail::Token>& tk) {
        detail::LineParser p(line, tk);
        if (tk.size() != 1) p.fail(tk[1], "expected one key=value per line");
        auto kv = p.pairs(0, {"nodes", "cores_per_node", "lambda_core", "p_static", "p_dyn", "alpha", "f_levels",
                               "reliability"});
        const auto& [key, val] = *kv.begin();
        if (key != "reliability" && !seen.insert(key).second) p.fail(tk[0], "duplicate key '" + key + "'");
        auto dbl = [&] { return detail::parse_double(val.text, line, val.column, "number"); };
        if (key == "nodes") {
            m.nodes = static_cast<int>(detail::parse_long(val.text, line, val.column, "integer"));
        } else if (key == "cores_per_node") {
            m.cores_per_node = static_cast<int>(detail::parse_long(val.text, line, val.column, "integer"));
        } else if (key == "lambda_core") {
            m.lambda_core = dbl();
        } else if (key == "p_static") {
            m.energy.p_static = dbl();
        } else if (key == "p_dyn") {
            m.energy.p_dyn = dbl();
        } else if (key == "alpha") {
            m.energy.alpha = dbl();
        } else if (key == "f_levels") {
            m.energy.f_levels.clear();
            std::string_view rest = val.text;
            while (!rest.empty()) {
                auto comma = rest.find(',');
                m.energy.f_levels.push_back(
                    detail::parse_double(rest.substr(0, comma), line, val.column, "frequency level"));
                rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
            }
        } else {
            auto dash = val.text.find('-');
            auto colon = val.text.find(':');
            if (dash == std::string_view::npos || colon == std::string_view::npos || colon < dash)
                p.fail(val, "expected <first>-<last>:<multiplier>");
            ReliabilityClass rc;
            rc.first_node = static_cast<int>(detail::parse_long(val.text.substr(0, dash), line, val.column, "node"));
            rc.last_node = static_cast<int>(
                detail::parse_long(val.text.substr(dash + 1, colon - dash - 1), line, val.column, "node"));
            rc.multiplier = detail::parse_double(val.text.substr(colon + 1), line, val.column, "multiplier");
            m.reliability.push_back(rc);
        }
    });
    try {
        m.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError(ParseError::Kind::Syntax, 0, 0, e.what());
    }
    return m;
}

}  // namespace mcp
