#include "timelyhls/llm.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "timelyhls/errors.hpp"
#include "util.hpp"

namespace timelyhls {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(PromptStage stage) {
    switch (stage) {
    case PromptStage::initial: return "initial";
    case PromptStage::hls_repair: return "hls_repair";
    case PromptStage::rtl_repair: return "rtl_repair";
    }
    return "initial";
}

PromptStage prompt_stage_from_string(std::string_view s) {
    for (auto st : {PromptStage::initial, PromptStage::hls_repair, PromptStage::rtl_repair})
        if (to_string(st) == s) return st;
    throw ConfigError("unknown prompt stage '" + std::string(s) + "'");
}

std::string to_string(DigestOrigin origin) {
    return origin == DigestOrigin::hls_stage ? "hls_stage" : "rtl_stage";
}

DigestOrigin digest_origin_from_string(std::string_view s) {
    if (s == "hls_stage") return DigestOrigin::hls_stage;
    if (s == "rtl_stage") return DigestOrigin::rtl_stage;
    throw ConfigError("unknown digest origin '" + std::string(s) + "'");
}

namespace {

constexpr FailureKind kAllKinds[] = {
    FailureKind::syntax_error,        FailureKind::resource_binding, FailureKind::pipeline_violation,
    FailureKind::functional_mismatch, FailureKind::timing_violation, FailureKind::critical_path,
    FailureKind::resource_overflow,
};

}  // namespace

std::string to_string(FailureKind kind) {
    switch (kind) {
    case FailureKind::syntax_error: return "syntax_error";
    case FailureKind::resource_binding: return "resource_binding";
    case FailureKind::pipeline_violation: return "pipeline_violation";
    case FailureKind::functional_mismatch: return "functional_mismatch";
    case FailureKind::timing_violation: return "timing_violation";
    case FailureKind::critical_path: return "critical_path";
    case FailureKind::resource_overflow: return "resource_overflow";
    }
    return "syntax_error";
}

FailureKind failure_kind_from_string(std::string_view s) {
    for (auto k : kAllKinds)
        if (to_string(k) == s) return k;
    throw ConfigError("unknown failure kind '" + std::string(s) + "'");
}

std::string heading(FailureKind kind) {
    switch (kind) {
    case FailureKind::syntax_error: return "SYNTAX ERROR";
    case FailureKind::resource_binding: return "RESOURCE BINDING";
    case FailureKind::pipeline_violation: return "PIPELINE VIOLATION";
    case FailureKind::functional_mismatch: return "FUNCTIONAL MISMATCH";
    case FailureKind::timing_violation: return "TIMING";
    case FailureKind::critical_path: return "CRITICAL PATH";
    case FailureKind::resource_overflow: return "RESOURCE OVERFLOW";
    }
    return "SYNTAX ERROR";
}

std::string render_prompt(const PromptBundle& p) {
    std::string out = "=== stage ===\n" + to_string(p.stage) + "\n=== context_docs ===\n";
    for (const auto& id : p.context_docs) out += id + "\n";
    out += "=== system ===\n" + p.system + "\n=== user ===\n" + p.user;
    if (out.empty() || out.back() != '\n') out += "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Prompts

const char* const kSystemPrompt =
    "You are an FPGA high-level synthesis engineer. You rewrite C/C++ kernels for AMD Vitis HLS, "
    "adding or adjusting #pragma HLS directives so the design synthesizes, fits the target device, "
    "matches the reference behaviour and closes timing at the requested clock. "
    "Answer with the complete kernel source in a single ```cpp fenced block.";

namespace {

constexpr std::string_view kSourceHeading = "## Kernel source\n";
constexpr std::string_view kOriginalHeading = "## Original task\n";
constexpr std::string_view kPreviousHeading = "## Previous attempt\n";

std::string fenced(std::string_view lang, std::string_view body) {
    std::string out = "```" + std::string(lang) + "\n" + std::string(body);
    if (out.back() != '\n') out += "\n";
    return out + "```\n";
}

// Objective, target and reference sections of the first prompt; carried
// unchanged through every repair prompt.
std::string task_context(const PromptBundle& prev) {
    const std::string& u = prev.user;
    if (prev.stage == PromptStage::initial) {
        const auto at = u.find(kSourceHeading);
        return at == std::string::npos ? u : u.substr(0, at);
    }
    const auto begin = u.find(kOriginalHeading);
    const auto end = u.find(kPreviousHeading);
    if (begin == std::string::npos || end == std::string::npos || end < begin) return u;
    return u.substr(begin + kOriginalHeading.size(), end - begin - kOriginalHeading.size());
}

}  // namespace

PromptBundle build_initial_prompt(const SourceUnit& kernel, std::string_view objective, const FpgaTarget& target,
                                  const std::vector<KnowledgeDoc>& docs, double clock_ns) {
    const double clock = clock_ns > 0 ? clock_ns : target.default_clock_ns;
    PromptBundle p;
    p.system = kSystemPrompt;
    p.stage = PromptStage::initial;
    std::string u;
    u += "## Objective\n" + trim(objective) + "\n\n";
    u += "## Target device\n";
    u += "Family: " + target.family + "\n";
    u += "Part: " + target.part + "\n";
    u += "Tier: " + to_string(target.tier) + "\n";
    u += "LUTs: " + std::to_string(target.luts) + "\n";
    u += "FFs: " + std::to_string(target.ffs) + "\n";
    u += "DSPs: " + std::to_string(target.dsps) + "\n";
    u += "BRAM (18Kb): " + std::to_string(target.brams) + "\n";
    u += "Clock period: " + format_fixed(clock, 2) + " ns\n\n";
    u += "## Reference material\n";
    if (docs.empty()) u += "(no documents retrieved)\n";
    for (const auto& d : docs) {
        p.context_docs.push_back(d.id);
        u += "### [" + d.id + "] " + d.title + "\n" + trim(d.body) + "\n\n";
    }
    if (docs.empty()) u += "\n";
    u += std::string(kSourceHeading) + fenced("cpp", kernel.text) + "\n";
    u += "## Output format\n"
         "Return the complete kernel as one ```cpp fenced block. Keep the top function signature, "
         "loop labels and computed results unchanged; only add or adjust HLS directives.\n";
    p.user = std::move(u);
    return p;
}

PromptBundle build_feedback_prompt(const PromptBundle& prev, std::string_view prev_code,
                                   const FeedbackDigest& feedback) {
    if (feedback.categories.empty()) throw ContractError("feedback prompt needs a non-empty digest");
    PromptBundle p;
    p.system = prev.system;
    p.context_docs = prev.context_docs;
    p.stage = feedback.origin == DigestOrigin::hls_stage ? PromptStage::hls_repair : PromptStage::rtl_repair;

    std::string u;
    u += std::string(kOriginalHeading) + task_context(prev);
    u += std::string(kPreviousHeading) + fenced("cpp", prev_code) + "\n";
    u += feedback.origin == DigestOrigin::hls_stage ? "## Tool feedback: HLS synthesis and C simulation\n"
                                                    : "## Tool feedback: RTL synthesis and RTL simulation\n";
    std::vector<std::string> names;
    for (const auto& c : feedback.categories) {
        names.push_back(heading(c.kind));
        u += "### " + heading(c.kind) + "\n" + fenced("", c.excerpt) + "\n";
    }
    u += "## Instructions\n"
         "The previous attempt failed these checks: " + join(names, ", ") + ". "
         "Fix every listed failure without changing what the kernel computes, and return the complete "
         "corrected kernel as one ```cpp fenced block.\n";
    p.user = std::move(u);
    return p;
}

// ---------------------------------------------------------------------------
// Backends

std::string to_string(BackendKind kind) { return kind == BackendKind::http_chat ? "http_chat" : "scripted"; }

BackendKind backend_kind_from_string(std::string_view s) {
    if (s == "http_chat" || s == "http") return BackendKind::http_chat;
    if (s == "scripted") return BackendKind::scripted;
    throw ConfigError("unknown backend '" + std::string(s) + "'");
}

void validate(const BackendConfig& cfg) {
    if (!(cfg.temperature >= 0.0 && cfg.temperature <= 2.0))
        throw ConfigError("backend temperature must be in [0, 2], got " + format_double(cfg.temperature));
    if (cfg.max_retries < 0) throw ConfigError("backend max_retries must be >= 0");
    if (cfg.kind == BackendKind::http_chat && (!cfg.endpoint || !cfg.model))
        throw ConfigError("http_chat backend requires endpoint and model");
    if (cfg.kind == BackendKind::scripted && !cfg.script_path)
        throw ConfigError("scripted backend requires script_path");
}

BackendConfig with_env_overrides(BackendConfig cfg) {
    if (const char* ep = std::getenv("TIMELYHLS_LLM_ENDPOINT"); ep && *ep) cfg.endpoint = ep;
    return cfg;
}

std::vector<ScriptEntry> parse_script(std::string_view text) {
    std::vector<ScriptEntry> out;
    try {
        const json j = json::parse(text);
        if (!j.is_array()) throw ConfigError("script must be a JSON array of {stage, response}");
        for (const auto& e : j) {
            ScriptEntry s{e.at("stage").get<std::string>(), e.at("response").get<std::string>()};
            if (s.stage != "*") prompt_stage_from_string(s.stage);
            out.push_back(std::move(s));
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("script: ") + e.what());
    }
    return out;
}

ScriptedBackend::ScriptedBackend(const std::vector<ScriptEntry>& entries) {
    for (const auto& e : entries) queues_[e.stage].push_back(e.response);
}

ScriptedBackend ScriptedBackend::from_file(const fs::path& path) {
    try {
        return ScriptedBackend(parse_script(read_file(path)));
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

GenerationResult ScriptedBackend::generate(const PromptBundle& prompt) {
    const std::string stage = to_string(prompt.stage);
    std::deque<std::string>* q = nullptr;
    for (const auto& key : {stage, std::string("*")}) {
        auto it = queues_.find(key);
        if (it != queues_.end() && !it->second.empty()) {
            q = &it->second;
            break;
        }
    }
    if (!q) throw ScriptExhausted("script has no response left for stage " + stage);
    GenerationResult r;
    r.raw = std::move(q->front());
    q->pop_front();
    r.backend = name();
    r.code = extract_code_block(r.raw);
    return r;
}

namespace {

struct Url {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

Url split_url(const std::string& url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) throw ConfigError("endpoint '" + url + "' is not an absolute URL");
    // Built without OpenSSL, so plain http only (a local proxy can terminate TLS).
    if (url.compare(0, scheme, "http") != 0)
        throw ConfigError("endpoint '" + url + "': only http:// endpoints are supported");
    const auto slash = url.find('/', scheme + 3);
    if (slash == std::string::npos) return {url, "/"};
    return {url.substr(0, slash), url.substr(slash)};
}

}  // namespace

HttpChatBackend::HttpChatBackend(BackendConfig cfg, Sleeper sleep) : cfg_(std::move(cfg)), sleep_(std::move(sleep)) {
    validate(cfg_);
    split_url(*cfg_.endpoint);
    if (!sleep_) sleep_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

GenerationResult HttpChatBackend::generate(const PromptBundle& prompt) {
    const Url url = split_url(*cfg_.endpoint);
    json body = {{"model", *cfg_.model},
                 {"temperature", cfg_.temperature},
                 {"messages", json::array({{{"role", "system"}, {"content", prompt.system}},
                                           {{"role", "user"}, {"content", prompt.user}}})}};
    const std::string payload = body.dump();
    httplib::Headers headers;
    if (const char* key = std::getenv("TIMELYHLS_LLM_API_KEY"); key && *key)
        headers.emplace("Authorization", std::string("Bearer ") + key);

    const auto start = std::chrono::steady_clock::now();
    std::string last_error;
    std::chrono::milliseconds backoff{1000};
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
        if (attempt > 0) {
            sleep_(backoff);
            backoff *= 2;
        }
        httplib::Client client(url.origin);
        client.set_connection_timeout(std::chrono::seconds(10));
        client.set_read_timeout(cfg_.request_timeout);
        auto res = client.Post(url.path, headers, payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw BackendError("HTTP " + std::to_string(res->status) + " from " + *cfg_.endpoint + ": " + res->body);
        GenerationResult r;
        try {
            r.raw = json::parse(res->body).at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception& e) {
            throw BackendError(std::string("malformed chat completion response: ") + e.what());
        }
        r.backend = name();
        r.latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
        r.code = extract_code_block(r.raw);
        return r;
    }
    throw BackendError("giving up after " + std::to_string(cfg_.max_retries + 1) + " attempts: " + last_error);
}

std::unique_ptr<GenerationBackend> make_backend(const BackendConfig& cfg) {
    validate(cfg);
    if (cfg.kind == BackendKind::scripted)
        return std::make_unique<ScriptedBackend>(ScriptedBackend::from_file(*cfg.script_path));
    return std::make_unique<HttpChatBackend>(with_env_overrides(cfg));
}

// ---------------------------------------------------------------------------
// Code extraction

namespace {

bool is_lang_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '+' || c == '#' || c == '.' || c == '-';
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

std::string_view trim_view(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

}  // namespace

std::string extract_code_block(std::string_view raw) {
    std::optional<std::string_view> best;
    std::size_t pos = 0;
    for (;;) {
        const auto open = raw.find("```", pos);
        if (open == std::string_view::npos) break;
        std::size_t body = open + 3;
        while (body < raw.size() && is_lang_char(raw[body])) ++body;
        const auto close = raw.find("```", body);
        if (close == std::string_view::npos) break;
        const auto content = trim_view(raw.substr(body, close - body));
        if (!best || content.size() > best->size()) best = content;
        pos = close + 3;
    }
    if (best) return std::string(*best);
    const auto whole = trim_view(raw);
    for (std::string_view lead : {"#include", "void ", "int "})
        if (whole.substr(0, lead.size()) == lead) return std::string(whole);
    throw ExtractionError("response contains no fenced code block and does not look like C/C++ source");
}

}  // namespace timelyhls
