#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace timelyhls {

enum class PragmaKind { PIPELINE, UNROLL, ARRAY_PARTITION, DATAFLOW, INTERFACE, INLINE };
enum class PartitionType { cyclic, block, complete };

std::string to_string(PragmaKind kind);
std::string to_string(PartitionType type);
std::optional<PragmaKind> pragma_kind_from_string(std::string_view s);  // case-insensitive
std::optional<PartitionType> partition_type_from_string(std::string_view s);

/// One `#pragma HLS ...` directive. Fields that do not apply to `kind` stay
/// empty; `source_line` is 1-based.
struct PragmaDirective {
    PragmaKind kind = PragmaKind::PIPELINE;
    std::optional<long long> ii;                       // PIPELINE
    std::optional<long long> factor;                   // UNROLL, ARRAY_PARTITION
    std::optional<std::string> variable;               // ARRAY_PARTITION, INTERFACE
    std::optional<PartitionType> partition_type;       // ARRAY_PARTITION
    std::optional<long long> dim;                      // ARRAY_PARTITION
    std::optional<std::string> mode;                   // INTERFACE
    std::size_t source_line = 0;

    // Field-for-field equality ignoring source_line.
    bool same_directive(const PragmaDirective& other) const;
    bool operator==(const PragmaDirective&) const = default;
};

// Throws ContractError when a field is set that does not belong to the kind,
// or a numeric field is out of range.
void validate(const PragmaDirective& d);

/// Surface syntax used when writing directives back into source.
///  - vitis:  `#pragma HLS ARRAY_PARTITION variable=a type=cyclic factor=4 dim=1`
///  - legacy: `#pragma HLS array_partition variable=a cyclic factor=4 dim=1`
enum class PragmaStyle { vitis, legacy };

std::string serialize_pragma(const PragmaDirective& d, PragmaStyle style = PragmaStyle::vitis);

struct PragmaWarning {
    std::size_t line = 0;
    std::string message;
};

struct PragmaParse {
    std::vector<PragmaDirective> directives;
    std::vector<PragmaWarning> warnings;
};

// True for any `#pragma HLS` line, recognized kind or not.
bool is_hls_pragma_line(std::string_view line);

// Recognized directives in line order. Unknown kinds and unmodeled options
// become warnings; a malformed value (`II=abc`) throws ParseError.
PragmaParse parse_pragmas_detailed(std::string_view text);
std::vector<PragmaDirective> parse_pragmas(std::string_view text);

enum class AnchorKind { function_body_start, loop_body_start };

std::string to_string(AnchorKind kind);

struct AnchorPoint {
    AnchorKind kind = AnchorKind::function_body_start;
    std::string label;           // function name, loop label, or `<function>_loop<k>`
    std::size_t line = 0;        // line holding the opening brace (header line if unbraced)
    std::size_t nesting_depth = 0;
    std::size_t end_line = 0;    // line holding the closing brace
    bool braced = true;
    std::string function;        // enclosing function ("" at file scope)

    bool operator==(const AnchorPoint&) const = default;
};

// Lexical scan: one function anchor per top-level function definition and
// one loop anchor per for/while statement. Comments, literals and
// preprocessor lines are skipped. Unbalanced braces throw ParseError.
std::vector<AnchorPoint> find_anchors(std::string_view text);

// C/C++ tokens with comments, whitespace and preprocessor lines removed.
std::vector<std::string> code_tokens(std::string_view text);

struct SourceUnit {
    std::string path;
    std::string text;
    std::vector<PragmaDirective> pragmas;
    std::vector<AnchorPoint> anchors;
};

SourceUnit make_source_unit(std::string text, std::string path = {});

// Innermost braced anchor whose body contains `line`, or nullptr.
const AnchorPoint* enclosing_anchor(const std::vector<AnchorPoint>& anchors, std::size_t line);

SourceUnit strip_pragmas(const SourceUnit& unit);

SourceUnit inject_pragma(const SourceUnit& unit, const AnchorPoint& anchor, const PragmaDirective& d,
                         PragmaStyle style = PragmaStyle::vitis);

enum class DiffChange { added, removed, changed };

std::string to_string(DiffChange change);

struct PragmaDiffEntry {
    DiffChange change = DiffChange::added;
    PragmaKind kind = PragmaKind::PIPELINE;
    std::string anchor_label;
    std::string variable;
    std::optional<PragmaDirective> before;
    std::optional<PragmaDirective> after;
};

// Directives are keyed by (kind, enclosing anchor label, variable).
std::vector<PragmaDiffEntry> diff_pragmas(const SourceUnit& base, const SourceUnit& optimized);

}  // namespace timelyhls
