#pragma once

// MMD: line-oriented plain-text multiscale model description.
//
//   model <name>
//   submodel <id> dt=<float><unit> total=<float><unit> dx=<float><unit> extent=<float><unit>
//            [multiplicity=<int>|dynamic] [role=<hint>] [perf=<ref>]
//   couple <from> -> <to> kind=<init|per_cycle|final> [bytes=<int>]
//   pattern <ES|HMC|RC-static|RC-dynamic|RC-exchange|auto>
//
// Time units: s, ms, us, d. Space units: m, mm, um. `#` starts a comment.

#include <cctype>
#include <charconv>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mcp/model.hpp"

namespace mcp {

class ParseError : public std::runtime_error {
public:
    enum class Kind { Syntax, DuplicateId, UnknownEndpoint, NonpositiveScale };

    ParseError(Kind kind, int line, int column, const std::string& message)
        : std::runtime_error("line " + std::to_string(line) + ":" + std::to_string(column) + ": " + message),
          kind_(kind), line_(line), column_(column), message_(message) {}

    Kind kind() const { return kind_; }
    int line() const { return line_; }
    int column() const { return column_; }
    const std::string& message() const { return message_; }

private:
    Kind kind_;
    int line_;
    int column_;
    std::string message_;
};

/// Source line of every declaration, for line-addressed diagnostics.
struct SourceMap {
    int model_line = 0;
    std::vector<int> submodel_lines;
    std::vector<int> coupling_lines;

    int line_of(const Diagnostic& d) const {
        switch (d.subject) {
        case Subject::Submodel: return d.index < submodel_lines.size() ? submodel_lines[d.index] : 0;
        case Subject::Coupling: return d.index < coupling_lines.size() ? coupling_lines[d.index] : 0;
        case Subject::Model: return model_line;
        }
        return 0;
    }
};

struct ParsedModel {
    MultiscaleModel model;
    SourceMap lines;
};

namespace detail {

struct Token {
    std::string_view text;
    int column;  // 1-based
};

inline std::vector<Token> tokenize_line(std::string_view line) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i >= line.size()) break;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        out.push_back({line.substr(i, j - i), static_cast<int>(i) + 1});
        i = j;
    }
    return out;
}

inline bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (char c : s) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) return false;
    }
    return true;
}

enum class Dimension { Time, Space };

struct UnitScale {
    std::string_view suffix;
    double factor;
};

inline constexpr UnitScale kTimeUnits[] = {{"ms", 1e-3}, {"us", 1e-6}, {"s", 1.0}, {"d", 86400.0}};
inline constexpr UnitScale kSpaceUnits[] = {{"mm", 1e-3}, {"um", 1e-6}, {"m", 1.0}};

class LineParser {
public:
    LineParser(int line_no, std::vector<Token> tokens) : line_(line_no), tokens_(std::move(tokens)) {}

    [[noreturn]] void fail(const Token& t, const std::string& msg,
                           ParseError::Kind kind = ParseError::Kind::Syntax) const {
        throw ParseError(kind, line_, t.column, msg);
    }

    [[noreturn]] void fail_at_end(const std::string& msg) const {
        int col = 1;
        if (!tokens_.empty()) col = tokens_.back().column + static_cast<int>(tokens_.back().text.size());
        throw ParseError(ParseError::Kind::Syntax, line_, col, msg);
    }

    const Token& at(std::size_t i, const char* expected) const {
        if (i >= tokens_.size()) fail_at_end(std::string("expected ") + expected);
        return tokens_[i];
    }

    std::string identifier(std::size_t i, const char* what) const {
        const auto& t = at(i, what);
        if (!is_identifier(t.text)) fail(t, std::string("expected ") + what);
        return std::string(t.text);
    }

    std::size_t size() const { return tokens_.size(); }
    int line() const { return line_; }

    /// key=value pairs from position `from` onwards; rejects duplicates and unknown keys.
    std::map<std::string, Token> pairs(std::size_t from, const std::set<std::string>& allowed) const {
        std::map<std::string, Token> out;
        for (std::size_t i = from; i < tokens_.size(); ++i) {
            const auto& t = tokens_[i];
            auto eq = t.text.find('=');
            if (eq == std::string_view::npos || eq == 0) fail(t, "expected key=value");
            std::string key(t.text.substr(0, eq));
            if (!allowed.count(key)) fail(t, "unknown key '" + key + "'");
            Token value{t.text.substr(eq + 1), t.column + static_cast<int>(eq) + 1};
            if (value.text.empty()) fail(value, "expected value for '" + key + "'");
            if (!out.emplace(key, value).second) fail(t, "duplicate key '" + key + "'");
        }
        return out;
    }

    double quantity(const Token& t, Dimension dim) const {
        std::string_view s = t.text;
        double v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr == s.data()) fail(t, "expected number with unit");
        std::string_view unit(ptr, static_cast<std::size_t>(s.data() + s.size() - ptr));
        const char* expected = dim == Dimension::Time ? "time unit (s, ms, us, d)" : "length unit (m, mm, um)";
        if (unit.empty()) fail(t, std::string("expected ") + expected);
        double factor = 0;
        if (dim == Dimension::Time) {
            for (const auto& u : kTimeUnits) if (u.suffix == unit) factor = u.factor;
        } else {
            for (const auto& u : kSpaceUnits) if (u.suffix == unit) factor = u.factor;
        }
        if (factor == 0) fail(t, std::string("expected ") + expected);
        if (!(v > 0)) fail(t, "nonpositive scale value", ParseError::Kind::NonpositiveScale);
        return v * factor;
    }

    std::uint64_t unsigned_int(const Token& t, const char* what) const {
        std::uint64_t v = 0;
        auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc() || ptr != t.text.data() + t.text.size()) fail(t, std::string("expected ") + what);
        return v;
    }

private:
    int line_;
    std::vector<Token> tokens_;
};

inline std::string_view strip_comment(std::string_view line) {
    auto hash = line.find('#');
    return hash == std::string_view::npos ? line : line.substr(0, hash);
}

}  // namespace detail

/// Parses MMD text; also returns the source line of every declaration.
inline ParsedModel parse_model_source(std::string_view text) {
    using detail::Dimension;
    ParsedModel out;
    auto& m = out.model;
    bool have_model = false, have_pattern = false;

    struct PendingCoupling {
        int line;
        detail::Token from, to;
    };
    std::vector<PendingCoupling> pending;
    std::map<std::string, int> ids;

    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);

        auto tokens = detail::tokenize_line(detail::strip_comment(raw));
        if (tokens.empty()) continue;
        detail::LineParser p(line_no, tokens);
        const auto kw = tokens[0];

        if (kw.text == "model") {
            if (have_model) p.fail(kw, "duplicate model declaration");
            m.name = p.identifier(1, "model name");
            if (p.size() > 2) p.fail(tokens[2], "unexpected token after model name");
            out.lines.model_line = line_no;
            have_model = true;
        } else if (kw.text == "submodel") {
            Submodel s;
            s.id = p.identifier(1, "submodel id");
            if (ids.count(s.id))
                p.fail(tokens[1], "duplicate submodel id '" + s.id + "'", ParseError::Kind::DuplicateId);
            auto kv = p.pairs(2, {"dt", "total", "dx", "extent", "multiplicity", "role", "perf"});
            for (const char* req : {"dt", "total", "dx", "extent"}) {
                if (!kv.count(req)) p.fail_at_end(std::string("expected ") + req + "=<value>");
            }
            s.dt = p.quantity(kv.at("dt"), Dimension::Time);
            s.t_total = p.quantity(kv.at("total"), Dimension::Time);
            s.dx = p.quantity(kv.at("dx"), Dimension::Space);
            s.x_total = p.quantity(kv.at("extent"), Dimension::Space);
            if (auto it = kv.find("multiplicity"); it != kv.end()) {
                if (it->second.text == "dynamic") {
                    s.multiplicity = Multiplicity::dynamic();
                } else {
                    auto k = p.unsigned_int(it->second, "positive integer or 'dynamic'");
                    if (k < 1 || k > 1'000'000) p.fail(it->second, "expected positive integer or 'dynamic'");
                    s.multiplicity = Multiplicity::fixed(static_cast<int>(k));
                }
            }
            if (auto it = kv.find("role"); it != kv.end()) {
                auto r = role_hint_from_string(it->second.text);
                if (!r) p.fail(it->second, "expected role (primary, auxiliary, macro, micro, replica, master, none)");
                s.role_hint = *r;
            }
            if (auto it = kv.find("perf"); it != kv.end()) {
                if (!detail::is_identifier(it->second.text)) p.fail(it->second, "expected performance reference");
                s.perf = std::string(it->second.text);
            }
            ids.emplace(s.id, static_cast<int>(m.submodels.size()));
            m.submodels.push_back(std::move(s));
            out.lines.submodel_lines.push_back(line_no);
        } else if (kw.text == "couple") {
            Coupling c;
            c.from = p.identifier(1, "source submodel id");
            const auto& arrow = p.at(2, "'->'");
            if (arrow.text != "->") p.fail(arrow, "expected '->'");
            c.to = p.identifier(3, "target submodel id");
            auto kv = p.pairs(4, {"kind", "bytes"});
            if (!kv.count("kind")) p.fail_at_end("expected kind=<init|per_cycle|final>");
            auto kind = coupling_kind_from_string(kv.at("kind").text);
            if (!kind) p.fail(kv.at("kind"), "expected init, per_cycle or final");
            c.kind = *kind;
            if (auto it = kv.find("bytes"); it != kv.end()) c.payload_bytes = p.unsigned_int(it->second, "byte count");
            pending.push_back({line_no, tokens[1], tokens[3]});
            m.couplings.push_back(std::move(c));
            out.lines.coupling_lines.push_back(line_no);
        } else if (kw.text == "pattern") {
            if (have_pattern) p.fail(kw, "duplicate pattern declaration");
            const auto& t = p.at(1, "pattern kind");
            auto h = pattern_hint_from_string(t.text);
            if (!h) p.fail(t, "expected ES, HMC, RC-static, RC-dynamic, RC-exchange or auto");
            if (p.size() > 2) p.fail(tokens[2], "unexpected token after pattern");
            m.pattern_hint = *h;
            have_pattern = true;
        } else {
            p.fail(kw, "expected 'model', 'submodel', 'couple' or 'pattern'");
        }
    }

    // Endpoints may refer to submodels declared later in the file.
    for (const auto& pc : pending) {
        for (const auto& t : {pc.from, pc.to}) {
            if (!ids.count(std::string(t.text)))
                throw ParseError(ParseError::Kind::UnknownEndpoint, pc.line, t.column,
                                 "unknown coupling endpoint '" + std::string(t.text) + "'");
        }
    }
    if (m.submodels.empty()) throw ParseError(ParseError::Kind::Syntax, line_no, 1, "expected at least one submodel");
    if (!have_model) m.name = "model";
    return out;
}

inline MultiscaleModel parse_model(std::string_view text) { return parse_model_source(text).model; }

namespace detail {
inline std::string exact(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
}  // namespace detail

/// Pretty-printer; parse_model(render_model(m)) == m for any valid model.
inline std::string render_model(const MultiscaleModel& m) {
    std::ostringstream os;
    os << "model " << m.name << "\n";
    for (const auto& s : m.submodels) {
        os << "submodel " << s.id << " dt=" << detail::exact(s.dt) << "s total=" << detail::exact(s.t_total)
           << "s dx=" << detail::exact(s.dx) << "m extent=" << detail::exact(s.x_total) << "m";
        if (s.multiplicity.is_dynamic()) {
            os << " multiplicity=dynamic";
        } else if (s.multiplicity.count() != 1) {
            os << " multiplicity=" << s.multiplicity.count();
        }
        if (s.role_hint) os << " role=" << to_string(*s.role_hint);
        if (s.perf) os << " perf=" << *s.perf;
        os << "\n";
    }
    for (const auto& c : m.couplings) {
        os << "couple " << c.from << " -> " << c.to << " kind=" << to_string(c.kind);
        if (c.payload_bytes) os << " bytes=" << c.payload_bytes;
        os << "\n";
    }
    if (m.pattern_hint) os << "pattern " << to_string(*m.pattern_hint) << "\n";
    return os.str();
}

}  // namespace mcp
