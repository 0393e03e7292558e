#include "timelyhls/hls_source.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "timelyhls/errors.hpp"
#include "util.hpp"

namespace timelyhls {

std::string to_string(PragmaKind kind) {
    switch (kind) {
    case PragmaKind::PIPELINE: return "PIPELINE";
    case PragmaKind::UNROLL: return "UNROLL";
    case PragmaKind::ARRAY_PARTITION: return "ARRAY_PARTITION";
    case PragmaKind::DATAFLOW: return "DATAFLOW";
    case PragmaKind::INTERFACE: return "INTERFACE";
    case PragmaKind::INLINE: return "INLINE";
    }
    return "PIPELINE";
}

std::string to_string(PartitionType type) {
    switch (type) {
    case PartitionType::cyclic: return "cyclic";
    case PartitionType::block: return "block";
    case PartitionType::complete: return "complete";
    }
    return "cyclic";
}

std::optional<PragmaKind> pragma_kind_from_string(std::string_view s) {
    for (auto k : {PragmaKind::PIPELINE, PragmaKind::UNROLL, PragmaKind::ARRAY_PARTITION, PragmaKind::DATAFLOW,
                   PragmaKind::INTERFACE, PragmaKind::INLINE})
        if (iequals(s, to_string(k))) return k;
    return std::nullopt;
}

std::optional<PartitionType> partition_type_from_string(std::string_view s) {
    for (auto t : {PartitionType::cyclic, PartitionType::block, PartitionType::complete})
        if (iequals(s, to_string(t))) return t;
    return std::nullopt;
}

std::string to_string(AnchorKind kind) {
    return kind == AnchorKind::function_body_start ? "function_body_start" : "loop_body_start";
}

std::string to_string(DiffChange change) {
    switch (change) {
    case DiffChange::added: return "added";
    case DiffChange::removed: return "removed";
    case DiffChange::changed: return "changed";
    }
    return "added";
}

bool PragmaDirective::same_directive(const PragmaDirective& o) const {
    return std::tie(kind, ii, factor, variable, partition_type, dim, mode) ==
           std::tie(o.kind, o.ii, o.factor, o.variable, o.partition_type, o.dim, o.mode);
}

void validate(const PragmaDirective& d) {
    auto reject = [&](const char* field) {
        throw ContractError(std::string("field '") + field + "' does not apply to " + to_string(d.kind));
    };
    const bool pipeline = d.kind == PragmaKind::PIPELINE;
    const bool unroll = d.kind == PragmaKind::UNROLL;
    const bool partition = d.kind == PragmaKind::ARRAY_PARTITION;
    const bool interface = d.kind == PragmaKind::INTERFACE;
    if (d.ii && !pipeline) reject("ii");
    if (d.factor && !(unroll || partition)) reject("factor");
    if (d.variable && !(partition || interface)) reject("variable");
    if (d.partition_type && !partition) reject("partition_type");
    if (d.dim && !partition) reject("dim");
    if (d.mode && !interface) reject("mode");
    if (d.ii && *d.ii < 1) throw ContractError("ii must be >= 1");
    if (d.factor && *d.factor < 1) throw ContractError("factor must be >= 1");
    if (d.dim && *d.dim < 0) throw ContractError("dim must be >= 0");
    if (d.variable && d.variable->empty()) throw ContractError("empty variable");
    if (d.mode && d.mode->empty()) throw ContractError("empty mode");
}

std::string serialize_pragma(const PragmaDirective& d, PragmaStyle style) {
    const bool legacy = style == PragmaStyle::legacy;
    std::string out = "#pragma HLS ";
    out += legacy ? to_lower(to_string(d.kind)) : to_string(d.kind);
    switch (d.kind) {
    case PragmaKind::PIPELINE:
        if (d.ii) out += " II=" + std::to_string(*d.ii);
        break;
    case PragmaKind::UNROLL:
        if (d.factor) out += " factor=" + std::to_string(*d.factor);
        break;
    case PragmaKind::ARRAY_PARTITION:
        if (d.variable) out += " variable=" + *d.variable;
        if (d.partition_type) out += (legacy ? " " : " type=") + to_string(*d.partition_type);
        if (d.factor) out += " factor=" + std::to_string(*d.factor);
        if (d.dim) out += " dim=" + std::to_string(*d.dim);
        break;
    case PragmaKind::INTERFACE:
        if (d.mode) out += (legacy ? " " : " mode=") + *d.mode;
        if (d.variable) out += " port=" + *d.variable;
        break;
    case PragmaKind::DATAFLOW:
    case PragmaKind::INLINE:
        break;
    }
    return out;
}

namespace {

bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Returns the text after `#pragma HLS` when `line` is an HLS pragma.
std::optional<std::string_view> pragma_body(std::string_view line) {
    auto skip_ws = [&](std::size_t i) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        return i;
    };
    std::size_t i = skip_ws(0);
    if (i >= line.size() || line[i] != '#') return std::nullopt;
    i = skip_ws(i + 1);
    if (line.substr(i, 6) != "pragma") return std::nullopt;
    i += 6;
    std::size_t j = skip_ws(i);
    if (j == i) return std::nullopt;
    if (!iequals(line.substr(j, 3), "HLS")) return std::nullopt;
    j += 3;
    if (j < line.size() && is_ident_char(line[j])) return std::nullopt;
    return line.substr(j);
}

const std::set<std::string> kInterfaceModes = {
    "m_axi", "s_axilite", "axis", "ap_none", "ap_vld", "ap_ack", "ap_hs", "ap_ovld",
    "ap_fifo", "ap_memory", "bram", "ap_ctrl_none", "ap_ctrl_hs", "ap_ctrl_chain", "ap_stable"};

// Splits the option text into tokens, gluing `key = value` into `key=value`.
std::vector<std::string> option_tokens(std::string_view body) {
    if (auto c = body.find("//"); c != std::string_view::npos) body = body.substr(0, c);
    std::vector<std::string> raw;
    std::istringstream ss{std::string(body)};
    for (std::string tok; ss >> tok;) raw.push_back(tok);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        std::string tok = raw[i];
        if (tok == "=" && !out.empty() && i + 1 < raw.size()) {
            out.back() += "=" + raw[++i];
            continue;
        }
        if (tok.size() > 1 && tok.back() == '=' && i + 1 < raw.size()) {
            tok += raw[++i];
        } else if (tok.size() > 1 && tok.front() == '=' && !out.empty()) {
            out.back() += tok;
            continue;
        }
        out.push_back(tok);
    }
    return out;
}

long long parse_count(const std::string& value, const std::string& token, std::size_t line, long long min) {
    auto v = parse_int(value);
    if (!v || *v < min)
        throw ParseError("line " + std::to_string(line) + ": invalid value in '" + token + "'", line, token);
    return *v;
}

PragmaDirective parse_directive(PragmaKind kind, const std::vector<std::string>& options, std::size_t line,
                                std::vector<PragmaWarning>& warnings) {
    PragmaDirective d;
    d.kind = kind;
    d.source_line = line;
    auto warn = [&](const std::string& tok) {
        warnings.push_back({line, "ignored option '" + tok + "' on " + to_string(kind)});
    };
    for (const auto& tok : options) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) {
            const auto flag = to_lower(tok);
            if (kind == PragmaKind::ARRAY_PARTITION) {
                if (auto t = partition_type_from_string(flag)) {
                    d.partition_type = t;
                    continue;
                }
            } else if (kind == PragmaKind::INTERFACE && kInterfaceModes.count(flag)) {
                d.mode = flag;
                continue;
            }
            warn(tok);
            continue;
        }
        const auto key = to_lower(tok.substr(0, eq));
        const auto value = tok.substr(eq + 1);
        auto bad = [&]() {
            return ParseError("line " + std::to_string(line) + ": invalid value in '" + tok + "'", line, tok);
        };
        if (value.empty()) throw bad();
        switch (kind) {
        case PragmaKind::PIPELINE:
            if (key == "ii") {
                d.ii = parse_count(value, tok, line, 1);
                continue;
            }
            break;
        case PragmaKind::UNROLL:
            if (key == "factor") {
                d.factor = parse_count(value, tok, line, 1);
                continue;
            }
            break;
        case PragmaKind::ARRAY_PARTITION:
            if (key == "variable") {
                d.variable = value;
                continue;
            }
            if (key == "type") {
                auto t = partition_type_from_string(value);
                if (!t) throw bad();
                d.partition_type = t;
                continue;
            }
            if (key == "factor") {
                d.factor = parse_count(value, tok, line, 1);
                continue;
            }
            if (key == "dim") {
                d.dim = parse_count(value, tok, line, 0);
                continue;
            }
            break;
        case PragmaKind::INTERFACE:
            if (key == "mode") {
                d.mode = to_lower(value);
                continue;
            }
            if (key == "port" || key == "variable") {
                d.variable = value;
                continue;
            }
            break;
        case PragmaKind::DATAFLOW:
        case PragmaKind::INLINE:
            break;
        }
        warn(tok);
    }
    return d;
}

}  // namespace

bool is_hls_pragma_line(std::string_view line) { return pragma_body(line).has_value(); }

PragmaParse parse_pragmas_detailed(std::string_view text) {
    PragmaParse result;
    const auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        auto body = pragma_body(lines[i]);
        if (!body) continue;
        auto tokens = option_tokens(*body);
        if (tokens.empty()) {
            result.warnings.push_back({line_no, "empty #pragma HLS"});
            continue;
        }
        auto kind = pragma_kind_from_string(tokens.front());
        if (!kind) {
            result.warnings.push_back({line_no, "unknown pragma kind '" + tokens.front() + "' kept verbatim"});
            continue;
        }
        tokens.erase(tokens.begin());
        result.directives.push_back(parse_directive(*kind, tokens, line_no, result.warnings));
    }
    return result;
}

std::vector<PragmaDirective> parse_pragmas(std::string_view text) {
    return parse_pragmas_detailed(text).directives;
}

// ---------------------------------------------------------------------------
// Lexical anchor scan

namespace {

struct Token {
    std::string text;
    std::size_t line = 0;
    bool ident = false;
};

std::vector<Token> lex(std::string_view src) {
    std::vector<Token> tokens;
    std::size_t line = 1;
    bool line_start = true;  // only whitespace seen so far on this line
    std::size_t i = 0;
    const std::size_t n = src.size();
    while (i < n) {
        const char c = src[i];
        if (c == '\n') {
            ++line;
            line_start = true;
            ++i;
            continue;
        }
        if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
            ++i;
            continue;
        }
        if (c == '#' && line_start) {
            // Preprocessor line, honoring backslash continuations.
            while (i < n && src[i] != '\n') {
                if (src[i] == '\\' && i + 1 < n && src[i + 1] == '\n') {
                    ++line;
                    i += 2;
                    continue;
                }
                ++i;
            }
            continue;
        }
        line_start = false;
        if (c == '/' && i + 1 < n && src[i + 1] == '/') {
            while (i < n && src[i] != '\n') ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && src[i + 1] == '*') {
            i += 2;
            while (i < n && !(src[i] == '*' && i + 1 < n && src[i + 1] == '/')) {
                if (src[i] == '\n') ++line;
                ++i;
            }
            i = std::min(n, i + 2);
            continue;
        }
        if (c == '"' || c == '\'') {
            const std::size_t start_line = line;
            const std::size_t start = i;
            ++i;
            while (i < n && src[i] != c) {
                if (src[i] == '\\' && i + 1 < n) ++i;
                if (src[i] == '\n') ++line;
                ++i;
            }
            i = std::min(n, i + 1);
            tokens.push_back({std::string(src.substr(start, i - start)), start_line, false});
            continue;
        }
        if (is_ident_char(c)) {
            std::size_t j = i;
            while (j < n && is_ident_char(src[j])) ++j;
            const bool ident = !std::isdigit(static_cast<unsigned char>(c));
            tokens.push_back({std::string(src.substr(i, j - i)), line, ident});
            i = j;
            continue;
        }
        if (c == ':' && i + 1 < n && src[i + 1] == ':') {
            tokens.push_back({"::", line, false});
            i += 2;
            continue;
        }
        tokens.push_back({std::string(1, c), line, false});
        ++i;
    }
    return tokens;
}

const std::set<std::string> kNonFunctionKeywords = {"if",     "for",    "while",  "switch", "catch",
                                                    "return", "sizeof", "alignof", "decltype", "do"};
const std::set<std::string> kTrailingQualifiers = {"const", "noexcept", "override", "final", "volatile", "&", "&&"};

enum class ScopeKind { function, loop, ns, other };

struct Scope {
    ScopeKind kind;
    std::size_t open_line;
    std::optional<std::size_t> anchor;  // index into result
};

struct BracelessLoop {
    std::size_t brace_depth;
    std::size_t paren_depth;
};

}  // namespace

std::vector<AnchorPoint> find_anchors(std::string_view text) {
    const auto tokens = lex(text);
    std::vector<AnchorPoint> anchors;
    std::vector<Scope> scopes;
    std::vector<BracelessLoop> braceless;
    std::vector<std::size_t> paren_stack;
    std::map<std::size_t, std::size_t> paren_match;  // ')' index -> '(' index

    // Pre-match parentheses so headers and function signatures can be found.
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (tokens[i].text == "(") paren_stack.push_back(i);
        if (tokens[i].text == ")" && !paren_stack.empty()) {
            paren_match[i] = paren_stack.back();
            paren_stack.pop_back();
        }
    }
    std::map<std::size_t, std::size_t> paren_close;  // '(' -> ')'
    for (auto [close, open] : paren_match) paren_close[open] = close;

    std::string current_function;
    std::size_t loops_in_function = 0;
    std::size_t paren_depth = 0;

    auto loop_depth = [&]() {
        std::size_t d = braceless.size();
        for (const auto& s : scopes)
            if (s.kind == ScopeKind::loop) ++d;
        return d;
    };
    auto inside_function = [&]() {
        return std::any_of(scopes.begin(), scopes.end(), [](const Scope& s) { return s.kind == ScopeKind::function; });
    };
    auto close_braceless_at = [&](std::size_t brace_depth) {
        while (!braceless.empty() && braceless.back().brace_depth == brace_depth &&
               braceless.back().paren_depth == paren_depth)
            braceless.pop_back();
    };

    // Index of a loop header keyword whose body opens at `{`, set while the
    // header's parentheses are being skipped.
    std::optional<std::size_t> pending_loop_brace;  // token index of '{' for loop body
    std::optional<AnchorPoint> pending_loop_anchor;

    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto& tok = tokens[i];
        if (tok.text == "(") {
            ++paren_depth;
            continue;
        }
        if (tok.text == ")") {
            if (paren_depth) --paren_depth;
            continue;
        }
        if ((tok.text == "for" || tok.text == "while") && tok.ident) {
            if (i + 1 >= tokens.size() || tokens[i + 1].text != "(") continue;
            auto close_it = paren_close.find(i + 1);
            if (close_it == paren_close.end())
                throw ParseError("line " + std::to_string(tok.line) + ": unterminated loop header", tok.line, tok.text);
            const std::size_t close = close_it->second;
            const std::size_t next = close + 1;
            // `} while (...);` closes a do-while.
            if (tok.text == "while" && next < tokens.size() && tokens[next].text == ";") continue;

            AnchorPoint a;
            a.kind = AnchorKind::loop_body_start;
            a.function = inside_function() ? current_function : std::string{};
            a.nesting_depth = loop_depth() + 1;
            ++loops_in_function;
            if (i >= 2 && tokens[i - 1].text == ":" && tokens[i - 2].ident &&
                (i < 3 || (tokens[i - 3].text != "?" && tokens[i - 3].text != "case"))) {
                a.label = tokens[i - 2].text;
            } else {
                a.label = (a.function.empty() ? std::string("loop") : a.function + "_loop") +
                          std::to_string(loops_in_function);
            }
            if (next < tokens.size() && tokens[next].text == "{") {
                a.line = tokens[next].line;
                pending_loop_brace = next;
                pending_loop_anchor = a;
            } else {
                a.line = tokens[close].line;
                a.braced = false;
                a.end_line = a.line;
                anchors.push_back(a);
                braceless.push_back({scopes.size(), paren_depth});
            }
            // Skip the header; parentheses inside it are balanced by construction.
            i = close;
            continue;
        }
        if (tok.text == "{") {
            Scope scope{ScopeKind::other, tok.line, std::nullopt};
            if (pending_loop_brace == i) {
                scope.kind = ScopeKind::loop;
                scope.anchor = anchors.size();
                anchors.push_back(*pending_loop_anchor);
                pending_loop_brace.reset();
                pending_loop_anchor.reset();
            } else if (i > 0 && (tokens[i - 1].text.front() == '"' ||
                                 (tokens[i - 1].text == "namespace") ||
                                 (i > 1 && tokens[i - 2].text == "namespace"))) {
                scope.kind = ScopeKind::ns;
            } else if (std::all_of(scopes.begin(), scopes.end(),
                                   [](const Scope& s) { return s.kind == ScopeKind::ns; })) {
                // Walk back over trailing qualifiers to a ')'.
                std::size_t j = i;
                while (j > 0 && kTrailingQualifiers.count(tokens[j - 1].text)) --j;
                if (j > 0 && tokens[j - 1].text == ")") {
                    auto open_it = paren_match.find(j - 1);
                    if (open_it != paren_match.end() && open_it->second > 0) {
                        const auto& name = tokens[open_it->second - 1];
                        if (name.ident && !kNonFunctionKeywords.count(name.text)) {
                            scope.kind = ScopeKind::function;
                            current_function = name.text;
                            loops_in_function = 0;
                            AnchorPoint a;
                            a.kind = AnchorKind::function_body_start;
                            a.label = name.text;
                            a.line = tok.line;
                            a.nesting_depth = 0;
                            a.function = name.text;
                            scope.anchor = anchors.size();
                            anchors.push_back(a);
                        }
                    }
                }
            }
            scopes.push_back(scope);
            continue;
        }
        if (tok.text == "}") {
            if (scopes.empty())
                throw ParseError("line " + std::to_string(tok.line) + ": unbalanced '}'", tok.line, "}");
            const Scope scope = scopes.back();
            scopes.pop_back();
            if (scope.anchor) anchors[*scope.anchor].end_line = tok.line;
            if (scope.kind == ScopeKind::function) current_function.clear();
            close_braceless_at(scopes.size());
            continue;
        }
        if (tok.text == ";") close_braceless_at(scopes.size());
    }
    if (!scopes.empty()) {
        const auto line = scopes.front().open_line;
        throw ParseError("line " + std::to_string(line) + ": unbalanced '{'", line, "{");
    }
    std::stable_sort(anchors.begin(), anchors.end(),
                     [](const AnchorPoint& a, const AnchorPoint& b) { return a.line < b.line; });
    return anchors;
}

std::vector<std::string> code_tokens(std::string_view text) {
    std::vector<std::string> out;
    for (auto& tok : lex(text)) out.push_back(std::move(tok.text));
    return out;
}

SourceUnit make_source_unit(std::string text, std::string path) {
    SourceUnit unit;
    unit.path = std::move(path);
    unit.pragmas = parse_pragmas(text);
    unit.anchors = find_anchors(text);
    unit.text = std::move(text);
    return unit;
}

const AnchorPoint* enclosing_anchor(const std::vector<AnchorPoint>& anchors, std::size_t line) {
    const AnchorPoint* best = nullptr;
    for (const auto& a : anchors) {
        if (!a.braced || !(a.line < line && line <= a.end_line)) continue;
        if (!best || a.line > best->line) best = &a;
    }
    return best;
}

SourceUnit strip_pragmas(const SourceUnit& unit) {
    std::string out;
    out.reserve(unit.text.size());
    for (auto line : split_lines_keep(unit.text)) {
        std::string_view content = line;
        if (!content.empty() && content.back() == '\n') content.remove_suffix(1);
        if (is_hls_pragma_line(content)) continue;
        out += line;
    }
    return make_source_unit(std::move(out), unit.path);
}

namespace {

bool same_slot(const PragmaDirective& a, const PragmaDirective& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == PragmaKind::ARRAY_PARTITION || a.kind == PragmaKind::INTERFACE) return a.variable == b.variable;
    return true;
}

std::string leading_ws(std::string_view line) {
    std::size_t i = 0;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    return std::string(line.substr(0, i));
}

}  // namespace

SourceUnit inject_pragma(const SourceUnit& unit, const AnchorPoint& anchor, const PragmaDirective& d,
                         PragmaStyle style) {
    validate(d);
    if (std::find(unit.anchors.begin(), unit.anchors.end(), anchor) == unit.anchors.end())
        throw ContractError("anchor '" + anchor.label + "' does not belong to this unit");
    if (!anchor.braced)
        throw ContractError("loop '" + anchor.label + "' has no braced body to hold a pragma");
    if (anchor.end_line == anchor.line)
        throw ContractError("anchor '" + anchor.label + "' opens and closes on one line");

    for (const auto& existing : unit.pragmas) {
        const auto* scope = enclosing_anchor(unit.anchors, existing.source_line);
        if (scope && *scope == anchor && same_slot(existing, d))
            throw ConflictError(to_string(d.kind) + " already present at '" + anchor.label + "' (line " +
                                std::to_string(existing.source_line) + ")");
    }

    const auto lines = split_lines_keep(unit.text);
    // Match the body's first line when there is one, else indent one level.
    std::string indent = leading_ws(lines[anchor.line - 1]) + "    ";
    if (anchor.line + 1 < anchor.end_line && anchor.line < lines.size()) {
        std::string_view next = lines[anchor.line];
        if (!trim(next).empty()) indent = leading_ws(next);
    }

    std::string out;
    out.reserve(unit.text.size() + 64);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        out += lines[i];
        if (i + 1 == anchor.line) {
            if (out.empty() || out.back() != '\n') out += '\n';
            out += indent + serialize_pragma(d, style) + "\n";
        }
    }
    return make_source_unit(std::move(out), unit.path);
}

std::vector<PragmaDiffEntry> diff_pragmas(const SourceUnit& base, const SourceUnit& optimized) {
    using Key = std::tuple<int, std::string, std::string>;
    auto keyed = [](const SourceUnit& unit) {
        std::map<Key, PragmaDirective> out;
        for (const auto& p : unit.pragmas) {
            const auto* scope = enclosing_anchor(unit.anchors, p.source_line);
            Key key{static_cast<int>(p.kind), scope ? scope->label : std::string{}, p.variable.value_or("")};
            out.insert_or_assign(key, p);
        }
        return out;
    };
    const auto before = keyed(base);
    const auto after = keyed(optimized);

    std::vector<PragmaDiffEntry> entries;
    auto entry = [](DiffChange change, const Key& key) {
        PragmaDiffEntry e;
        e.change = change;
        e.kind = static_cast<PragmaKind>(std::get<0>(key));
        e.anchor_label = std::get<1>(key);
        e.variable = std::get<2>(key);
        return e;
    };
    for (const auto& [key, d] : before) {
        auto it = after.find(key);
        if (it == after.end()) {
            auto e = entry(DiffChange::removed, key);
            e.before = d;
            entries.push_back(std::move(e));
        } else if (!d.same_directive(it->second)) {
            auto e = entry(DiffChange::changed, key);
            e.before = d;
            e.after = it->second;
            entries.push_back(std::move(e));
        }
    }
    for (const auto& [key, d] : after) {
        if (before.count(key)) continue;
        auto e = entry(DiffChange::added, key);
        e.after = d;
        entries.push_back(std::move(e));
    }
    std::sort(entries.begin(), entries.end(), [](const PragmaDiffEntry& a, const PragmaDiffEntry& b) {
        return std::tie(a.kind, a.anchor_label, a.variable) < std::tie(b.kind, b.anchor_label, b.variable);
    });
    return entries;
}

}  // namespace timelyhls
