#pragma once

#include <chrono>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "timelyhls/hls_source.hpp"
#include "timelyhls/kb.hpp"

namespace timelyhls {

enum class PromptStage { initial, hls_repair, rtl_repair };

std::string to_string(PromptStage stage);
PromptStage prompt_stage_from_string(std::string_view s);

struct PromptBundle {
    std::string system;
    std::string user;
    std::vector<std::string> context_docs;  // ids, in retrieval order
    PromptStage stage = PromptStage::initial;

    bool operator==(const PromptBundle&) const = default;
};

// Prompt text as archived: system, user, doc ids and stage in one file.
std::string render_prompt(const PromptBundle& prompt);

// ---------------------------------------------------------------------------
// Tool feedback handed from the refinement loop to the generator

enum class DigestOrigin { hls_stage, rtl_stage };
enum class FailureKind {
    syntax_error,
    resource_binding,
    pipeline_violation,
    functional_mismatch,
    timing_violation,
    critical_path,
    resource_overflow,
};

std::string to_string(DigestOrigin origin);
std::string to_string(FailureKind kind);
DigestOrigin digest_origin_from_string(std::string_view s);
FailureKind failure_kind_from_string(std::string_view s);

// Upper-case section heading used in feedback prompts, e.g. "TIMING".
std::string heading(FailureKind kind);

struct DigestEntry {
    FailureKind kind = FailureKind::syntax_error;
    std::string excerpt;

    bool operator==(const DigestEntry&) const = default;
};

struct FeedbackDigest {
    DigestOrigin origin = DigestOrigin::hls_stage;
    std::vector<DigestEntry> categories;

    bool operator==(const FeedbackDigest&) const = default;
};

// ---------------------------------------------------------------------------
// Prompt construction (pure)

extern const char* const kSystemPrompt;

// `clock_ns` of 0 falls back to the target's default clock.
PromptBundle build_initial_prompt(const SourceUnit& kernel, std::string_view objective, const FpgaTarget& target,
                                  const std::vector<KnowledgeDoc>& docs, double clock_ns = 0.0);

// Throws ContractError on a digest without categories.
PromptBundle build_feedback_prompt(const PromptBundle& prev, std::string_view prev_code,
                                   const FeedbackDigest& feedback);

// ---------------------------------------------------------------------------
// Generation backends

struct GenerationResult {
    std::string raw;
    std::string code;
    std::string backend;
    std::chrono::milliseconds latency{0};
};

enum class BackendKind { http_chat, scripted };

std::string to_string(BackendKind kind);
BackendKind backend_kind_from_string(std::string_view s);

struct BackendConfig {
    BackendKind kind = BackendKind::scripted;
    std::optional<std::string> endpoint;
    std::optional<std::string> model;
    double temperature = 0.7;
    int max_retries = 3;
    std::optional<std::filesystem::path> script_path;
    std::chrono::seconds request_timeout{120};
};

// Throws ConfigError.
void validate(const BackendConfig& cfg);

// Applies TIMELYHLS_LLM_ENDPOINT when set.
BackendConfig with_env_overrides(BackendConfig cfg);

class GenerationBackend {
public:
    virtual ~GenerationBackend() = default;
    virtual GenerationResult generate(const PromptBundle& prompt) = 0;
    virtual std::string name() const = 0;
};

struct ScriptEntry {
    std::string stage;  // a PromptStage name or "*" for any stage
    std::string response;
};

std::vector<ScriptEntry> parse_script(std::string_view json_text);

/// Replays canned responses. Each stage has its own queue consumed in file
/// order; "*" entries serve any stage once its own queue is empty.
class ScriptedBackend final : public GenerationBackend {
public:
    explicit ScriptedBackend(const std::vector<ScriptEntry>& entries);
    static ScriptedBackend from_file(const std::filesystem::path& path);

    GenerationResult generate(const PromptBundle& prompt) override;
    std::string name() const override { return "scripted"; }

private:
    std::map<std::string, std::deque<std::string>> queues_;
};

/// Chat-completion client: POSTs {model, temperature, messages} and reads
/// choices[0].message.content. Transport failures, 429 and 5xx are retried
/// with 1 s, 2 s, 4 s... backoff through `sleep`.
class HttpChatBackend final : public GenerationBackend {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    explicit HttpChatBackend(BackendConfig cfg, Sleeper sleep = {});

    GenerationResult generate(const PromptBundle& prompt) override;
    std::string name() const override { return "http_chat"; }

private:
    BackendConfig cfg_;
    Sleeper sleep_;
};

std::unique_ptr<GenerationBackend> make_backend(const BackendConfig& cfg);

// Content of the longest ``` fenced block (language tag dropped, surrounding
// whitespace trimmed). Without fences, text starting with `#include`, `void `
// or `int ` is returned whole. Otherwise throws ExtractionError.
std::string extract_code_block(std::string_view raw);

}  // namespace timelyhls
