#include "timelyhls/kb.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "timelyhls/errors.hpp"
#include "util.hpp"

namespace timelyhls {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(DeviceTier tier) {
    switch (tier) {
    case DeviceTier::low_cost: return "low_cost";
    case DeviceTier::midrange: return "midrange";
    case DeviceTier::high_end: return "high_end";
    }
    return "midrange";
}

DeviceTier device_tier_from_string(std::string_view s) {
    if (s == "low_cost") return DeviceTier::low_cost;
    if (s == "midrange") return DeviceTier::midrange;
    if (s == "high_end") return DeviceTier::high_end;
    throw ValidationError("unknown device tier '" + std::string(s) + "'");
}

std::string to_string(DocKind kind) {
    switch (kind) {
    case DocKind::architecture_note: return "architecture_note";
    case DocKind::pragma_template: return "pragma_template";
    case DocKind::heuristic: return "heuristic";
    }
    return "heuristic";
}

DocKind doc_kind_from_string(std::string_view s) {
    if (s == "architecture_note") return DocKind::architecture_note;
    if (s == "pragma_template") return DocKind::pragma_template;
    if (s == "heuristic") return DocKind::heuristic;
    throw ValidationError("unknown document kind '" + std::string(s) + "'");
}

void validate(const FpgaTarget& t) {
    auto fail = [&](const char* field) {
        throw ValidationError("target '" + t.part + "': " + field + " must be > 0");
    };
    if (t.part.empty()) throw ValidationError("target with empty part number");
    if (t.family.empty()) throw ValidationError("target '" + t.part + "': empty family");
    if (t.luts <= 0) fail("luts");
    if (t.ffs <= 0) fail("ffs");
    if (t.dsps <= 0) fail("dsps");
    if (t.brams <= 0) fail("brams");
    if (!(t.default_clock_ns > 0)) fail("default_clock_ns");
    if (!(t.logic_delay_ns > 0)) fail("logic_delay_ns");
}

bool KnowledgeDoc::applies_to(std::string_view family) const {
    if (applicable_families.empty()) return true;
    return std::find(applicable_families.begin(), applicable_families.end(), family) !=
           applicable_families.end();
}

std::size_t KbIndex::position_of(std::string_view doc_id) const {
    for (std::size_t i = 0; i < docs.size(); ++i)
        if (docs[i].id == doc_id) return i;
    throw NotFound("no document with id '" + std::string(doc_id) + "'");
}

const FpgaTarget& KnowledgeBase::target(std::string_view part) const {
    for (const auto& t : targets)
        if (t.part == part) return t;
    throw NotFound("unknown part '" + std::string(part) + "'");
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> terms;
    std::string current;
    for (char c : text) {
        auto uc = static_cast<unsigned char>(c);
        if (std::isalnum(uc)) {
            current += static_cast<char>(std::tolower(uc));
        } else if (!current.empty()) {
            terms.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) terms.push_back(std::move(current));
    return terms;
}

KbIndex build_index(std::vector<KnowledgeDoc> docs) {
    KbIndex index;
    index.docs = std::move(docs);
    std::size_t total = 0;
    for (const auto& doc : index.docs) {
        std::map<std::string, std::size_t> tf;
        auto terms = tokenize(doc.title + " " + doc.body);
        for (auto& term : terms) ++tf[term];
        for (const auto& [term, count] : tf) ++index.term_stats[term];
        index.doc_lengths.push_back(terms.size());
        index.term_freqs.push_back(std::move(tf));
        total += terms.size();
    }
    index.avg_doc_length =
        index.docs.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(index.docs.size());
    return index;
}

namespace {

const std::set<std::string> kTargetKeys = {
    "family", "part", "luts", "ffs", "dsps", "brams", "default_clock_ns", "logic_delay_ns", "tier"};

FpgaTarget target_from_json(const json& j, std::size_t position) {
    if (!j.is_object())
        throw ValidationError("targets[" + std::to_string(position) + "] is not an object");
    for (const auto& key : kTargetKeys)
        if (!j.contains(key))
            throw ValidationError("targets[" + std::to_string(position) + "] missing '" + key + "'");
    for (const auto& [key, value] : j.items())
        if (!kTargetKeys.count(key))
            throw ValidationError("targets[" + std::to_string(position) + "] has unknown key '" + key +
                                  "'");
    FpgaTarget t;
    try {
        t.family = j.at("family").get<std::string>();
        t.part = j.at("part").get<std::string>();
        t.luts = j.at("luts").get<long long>();
        t.ffs = j.at("ffs").get<long long>();
        t.dsps = j.at("dsps").get<long long>();
        t.brams = j.at("brams").get<long long>();
        t.default_clock_ns = j.at("default_clock_ns").get<double>();
        t.logic_delay_ns = j.at("logic_delay_ns").get<double>();
        t.tier = device_tier_from_string(j.at("tier").get<std::string>());
    } catch (const json::exception& e) {
        throw ValidationError("targets[" + std::to_string(position) + "]: " + e.what());
    }
    validate(t);
    return t;
}

}  // namespace

std::vector<FpgaTarget> load_targets(const fs::path& targets_json) {
    if (!fs::is_regular_file(targets_json))
        throw ConfigError("missing targets file " + targets_json.string());
    json j;
    try {
        j = json::parse(read_file(targets_json));
    } catch (const json::parse_error& e) {
        throw ValidationError(targets_json.string() + ": " + e.what());
    }
    if (!j.is_array()) throw ValidationError(targets_json.string() + ": expected a JSON array");
    std::vector<FpgaTarget> targets;
    std::map<std::string, std::size_t> seen;
    for (std::size_t i = 0; i < j.size(); ++i) {
        auto t = target_from_json(j[i], i);
        auto [it, inserted] = seen.emplace(t.part, i);
        if (!inserted)
            throw ValidationError("duplicate part '" + t.part + "' at targets[" +
                                  std::to_string(it->second) + "] and targets[" + std::to_string(i) +
                                  "]");
        targets.push_back(std::move(t));
    }
    return targets;
}

KnowledgeDoc parse_doc(std::string_view text, const std::string& origin) {
    auto lines = split_lines(text);
    auto bad = [&](const std::string& why) -> ValidationError {
        return ValidationError(origin + ": malformed front-matter: " + why);
    };
    if (lines.empty() || trim(lines[0]) != "---") throw bad("first line must be '---'");
    std::size_t close = 0;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]) == "---") {
            close = i;
            break;
        }
    }
    if (close == 0) throw bad("no closing '---'");

    std::map<std::string, std::string> fields;
    for (std::size_t i = 1; i < close; ++i) {
        auto line = trim(lines[i]);
        if (line.empty()) continue;
        auto colon = line.find(':');
        if (colon == std::string::npos) throw bad("line " + std::to_string(i + 1) + " has no ':'");
        auto key = trim(line.substr(0, colon));
        auto value = trim(line.substr(colon + 1));
        if (key != "id" && key != "kind" && key != "families" && key != "title")
            throw bad("unknown key '" + key + "'");
        if (!fields.emplace(key, value).second) throw bad("repeated key '" + key + "'");
    }
    for (const char* required : {"id", "kind", "title"})
        if (!fields.count(required) || fields[required].empty())
            throw bad(std::string("missing '") + required + "'");

    KnowledgeDoc doc;
    doc.id = fields["id"];
    try {
        doc.kind = doc_kind_from_string(fields["kind"]);
    } catch (const ValidationError& e) {
        throw bad(e.what());
    }
    doc.title = fields["title"];
    if (auto it = fields.find("families"); it != fields.end()) {
        std::stringstream ss(it->second);
        std::string family;
        while (std::getline(ss, family, ',')) {
            family = trim(family);
            if (!family.empty()) doc.applicable_families.push_back(family);
        }
    }
    std::string body;
    for (std::size_t i = close + 1; i < lines.size(); ++i) {
        body += lines[i];
        body += '\n';
    }
    doc.body = trim(body);
    if (doc.body.empty()) throw ValidationError(origin + ": empty document body");
    return doc;
}

KnowledgeBase ingest(const fs::path& kb_dir) {
    if (!fs::is_directory(kb_dir)) throw ConfigError("knowledge base directory not found: " + kb_dir.string());
    auto docs_dir = kb_dir / "docs";
    if (!fs::is_directory(docs_dir)) throw ConfigError("missing docs/ directory in " + kb_dir.string());

    KnowledgeBase kb;
    kb.targets = load_targets(kb_dir / "targets.json");

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(docs_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".md") files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    std::vector<KnowledgeDoc> docs;
    std::map<std::string, std::string> origin_of;
    for (const auto& file : files) {
        auto doc = parse_doc(read_file(file), file.filename().string());
        auto [it, inserted] = origin_of.emplace(doc.id, file.filename().string());
        if (!inserted)
            throw ValidationError("duplicate document id '" + doc.id + "' in " + it->second + " and " +
                                  file.filename().string());
        docs.push_back(std::move(doc));
    }
    kb.index = build_index(std::move(docs));
    return kb;
}

double bm25_score(const KbIndex& index, const std::vector<std::string>& query_terms,
                  std::string_view doc_id, Bm25Params params) {
    const std::size_t pos = index.position_of(doc_id);
    const auto& tf = index.term_freqs[pos];
    const double n_docs = static_cast<double>(index.docs.size());
    const double length_ratio =
        index.avg_doc_length > 0 ? static_cast<double>(index.doc_lengths[pos]) / index.avg_doc_length : 0.0;
    const double norm = params.k1 * (1.0 - params.b + params.b * length_ratio);

    double score = 0.0;
    for (const auto& term : query_terms) {
        auto it = tf.find(term);
        if (it == tf.end()) continue;
        const double df = static_cast<double>(index.term_stats.at(term));
        const double idf = std::log(1.0 + (n_docs - df + 0.5) / (df + 0.5));
        const double f = static_cast<double>(it->second);
        score += idf * f * (params.k1 + 1.0) / (f + norm);
    }
    return score;
}

std::vector<ScoredDoc> retrieve_scored(const KbIndex& index, std::string_view query,
                                       const FpgaTarget& target, std::size_t k, Bm25Params params) {
    if (k == 0) throw ContractError("retrieve: k must be >= 1");
    const auto terms = tokenize(query);
    std::vector<ScoredDoc> ranked;
    for (const auto& doc : index.docs) {
        if (!doc.applies_to(target.family)) continue;
        ranked.push_back({&doc, bm25_score(index, terms, doc.id, params)});
    }
    std::sort(ranked.begin(), ranked.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc->id < b.doc->id;
    });
    if (ranked.size() > k) ranked.resize(k);
    return ranked;
}

std::vector<KnowledgeDoc> retrieve(const KbIndex& index, std::string_view query, const FpgaTarget& target,
                                   std::size_t k) {
    std::vector<KnowledgeDoc> out;
    for (const auto& scored : retrieve_scored(index, query, target, k)) out.push_back(*scored.doc);
    return out;
}

std::string serialize_index(const KbIndex& index) {
    nlohmann::ordered_json j;
    j["avg_doc_length"] = index.avg_doc_length;
    auto& docs = j["docs"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < index.docs.size(); ++i) {
        const auto& d = index.docs[i];
        nlohmann::ordered_json jd;
        jd["id"] = d.id;
        jd["kind"] = to_string(d.kind);
        jd["families"] = d.applicable_families;
        jd["title"] = d.title;
        jd["body"] = d.body;
        jd["length"] = index.doc_lengths[i];
        jd["term_freqs"] = index.term_freqs[i];
        docs.push_back(std::move(jd));
    }
    j["term_stats"] = index.term_stats;
    return j.dump(2);
}

}  // namespace timelyhls
