#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace timelyhls {

enum class DeviceTier { low_cost, midrange, high_end };

std::string to_string(DeviceTier tier);
DeviceTier device_tier_from_string(std::string_view s);

/// A device record: resource capacities plus the two-scalar speed model used
/// by the analytical simulator (clock period and delay per logic level).
struct FpgaTarget {
    std::string family;
    std::string part;
    long long luts = 0;
    long long ffs = 0;
    long long dsps = 0;
    long long brams = 0;  // 18Kb block equivalents
    double default_clock_ns = 0.0;
    double logic_delay_ns = 0.0;
    DeviceTier tier = DeviceTier::midrange;

    bool operator==(const FpgaTarget&) const = default;
};

// Throws ValidationError when a count or delay is not positive.
void validate(const FpgaTarget& target);

enum class DocKind { architecture_note, pragma_template, heuristic };

std::string to_string(DocKind kind);
DocKind doc_kind_from_string(std::string_view s);

struct KnowledgeDoc {
    std::string id;
    DocKind kind = DocKind::heuristic;
    std::vector<std::string> applicable_families;  // empty = every family
    std::string title;
    std::string body;

    bool applies_to(std::string_view family) const;
    bool operator==(const KnowledgeDoc&) const = default;
};

/// Immutable BM25 index over a document set. Built once by `build_index`;
/// safe to share between threads afterwards.
struct KbIndex {
    std::vector<KnowledgeDoc> docs;
    std::map<std::string, std::size_t> term_stats;          // term -> document frequency
    std::vector<std::size_t> doc_lengths;                   // tokens per doc
    std::vector<std::map<std::string, std::size_t>> term_freqs;  // per doc
    double avg_doc_length = 0.0;

    // Position of `doc_id` in `docs`; throws NotFound.
    std::size_t position_of(std::string_view doc_id) const;
};

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

struct KnowledgeBase {
    std::vector<FpgaTarget> targets;
    KbIndex index;

    const FpgaTarget& target(std::string_view part) const;  // throws NotFound
};

// Lowercases and splits on every non-alphanumeric byte; empty terms dropped.
std::vector<std::string> tokenize(std::string_view text);

// Documents are indexed on "title body".
KbIndex build_index(std::vector<KnowledgeDoc> docs);

std::vector<FpgaTarget> load_targets(const std::filesystem::path& targets_json);
KnowledgeDoc parse_doc(std::string_view text, const std::string& origin);

// Reads `<kb_dir>/targets.json` and every `<kb_dir>/docs/*.md` (sorted by
// file name). Throws ConfigError for a missing layout and ValidationError for
// duplicate parts/ids or malformed front-matter.
KnowledgeBase ingest(const std::filesystem::path& kb_dir);

/// BM25 with the non-negative idf ln(1 + (N - df + 0.5) / (df + 0.5)).
/// Repeated query terms contribute once per occurrence.
double bm25_score(const KbIndex& index, const std::vector<std::string>& query_terms,
                  std::string_view doc_id, Bm25Params params = {});

struct ScoredDoc {
    const KnowledgeDoc* doc = nullptr;
    double score = 0.0;
};

// Family-filtered, ranked by (score desc, id asc), truncated to k.
std::vector<ScoredDoc> retrieve_scored(const KbIndex& index, std::string_view query,
                                       const FpgaTarget& target, std::size_t k,
                                       Bm25Params params = {});

std::vector<KnowledgeDoc> retrieve(const KbIndex& index, std::string_view query,
                                   const FpgaTarget& target, std::size_t k);

// Canonical JSON text of the index; byte-identical for equal inputs.
std::string serialize_index(const KbIndex& index);

}  // namespace timelyhls
