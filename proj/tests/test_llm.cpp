#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <random>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "test_support.hpp"
#include "timelyhls/errors.hpp"
#include "timelyhls/llm.hpp"

using namespace timelyhls;
using testing_support::TempDir;

namespace {

FpgaTarget artix() {
    FpgaTarget t;
    t.family = "Artix-7";
    t.part = "xc7a200tfbg676-2";
    t.luts = 134600;
    t.ffs = 269200;
    t.dsps = 740;
    t.brams = 730;
    t.default_clock_ns = 3.33;
    t.logic_delay_ns = 0.75;
    t.tier = DeviceTier::low_cost;
    return t;
}

const char* kMatmul = "void matmul(int A[4][4], int B[4][4], int C[4][4]) {\n"
                      "row:\n    for (int i = 0; i < 4; i++) {\n        C[i][0] = A[i][0] * B[0][0];\n    }\n}\n";

std::vector<KnowledgeDoc> two_docs() {
    return {{"tmpl-pipeline", DocKind::pragma_template, {}, "Pipelining loops", "Use PIPELINE II=1."},
            {"arch-7series", DocKind::architecture_note, {"Artix-7"}, "7-series fabric", "DSP48E1 slices."}};
}

}  // namespace

TEST_CASE("initial prompt layout") {
    const auto unit = make_source_unit(kMatmul);
    const auto p = build_initial_prompt(unit, "Minimize latency.", artix(), two_docs());
    CHECK(p.stage == PromptStage::initial);
    CHECK(p.context_docs == std::vector<std::string>{"tmpl-pipeline", "arch-7series"});
    CHECK(p.system == kSystemPrompt);
    const auto& u = p.user;
    const auto obj = u.find("Minimize latency.");
    const auto part = u.find("xc7a200tfbg676-2");
    const auto dsp = u.find("DSPs: 740");
    const auto doc = u.find("Use PIPELINE II=1.");
    const auto src = u.find("void matmul(");
    REQUIRE(obj != std::string::npos);
    REQUIRE(src != std::string::npos);
    CHECK(obj < part);
    CHECK(part < dsp);
    CHECK(dsp < doc);
    CHECK(doc < src);
    CHECK(u.find("Clock period: 3.33 ns") != std::string::npos);
    CHECK(u.find("BRAM (18Kb): 730") != std::string::npos);

    CHECK(build_initial_prompt(unit, "Minimize latency.", artix(), two_docs()) == p);
    const auto empty = build_initial_prompt(unit, "Minimize latency.", artix(), {});
    CHECK(empty.context_docs.empty());
    CHECK(empty.user.find("void matmul(") != std::string::npos);
    CHECK(build_initial_prompt(unit, "x", artix(), {}, 5.0).user.find("Clock period: 5.00 ns") != std::string::npos);
}

TEST_CASE("feedback prompt carries context and categorized excerpts") {
    const auto unit = make_source_unit(kMatmul);
    const auto first = build_initial_prompt(unit, "Minimize latency.", artix(), two_docs());

    FeedbackDigest mismatch{DigestOrigin::hls_stage,
                            {{FailureKind::functional_mismatch, "ERROR: [SIM 211-100] testbench output mismatch at 3"}}};
    const auto repair = build_feedback_prompt(first, "void matmul() {}", mismatch);
    CHECK(repair.stage == PromptStage::hls_repair);
    CHECK(repair.context_docs == first.context_docs);
    const auto head = repair.user.find("### FUNCTIONAL MISMATCH");
    REQUIRE(head != std::string::npos);
    CHECK(repair.user.find("testbench output mismatch at 3", head) != std::string::npos);
    CHECK(repair.user.find("void matmul() {}") != std::string::npos);
    CHECK(repair.user.find("xc7a200tfbg676-2") != std::string::npos);

    FeedbackDigest timing{DigestOrigin::rtl_stage, {{FailureKind::timing_violation, "WNS(ns) = -0.08"}}};
    const auto rtl = build_feedback_prompt(repair, "void matmul() { /* v2 */ }", timing);
    CHECK(rtl.stage == PromptStage::rtl_repair);
    const auto th = rtl.user.find("### TIMING");
    REQUIRE(th != std::string::npos);
    CHECK(rtl.user.find("-0.08", th) != std::string::npos);
    // Context is carried once, not nested prompt-in-prompt.
    CHECK(rtl.user.find("/* v2 */") != std::string::npos);
    CHECK(rtl.user.find("testbench output mismatch") == std::string::npos);
    CHECK(rtl.user.find("## Original task") == rtl.user.rfind("## Original task"));
    CHECK(rtl.user.find("Minimize latency.") != std::string::npos);

    CHECK_THROWS_AS(build_feedback_prompt(first, "x", FeedbackDigest{}), ContractError);
}

TEST_CASE("extract_code_block rules") {
    CHECK(extract_code_block("before ```cpp int f(){return 0;} ``` after") == "int f(){return 0;}");
    const std::string small(10, 'a');
    const std::string big = "int g() {" + std::string(190, ' ') + "}";
    CHECK(extract_code_block("```\n" + small + "\n```\ntext\n```c++\n" + big + "\n```") == big);
    CHECK(extract_code_block("#include <ap_int.h>\nvoid f() {}\n") == "#include <ap_int.h>\nvoid f() {}");
    CHECK(extract_code_block("void f() {}") == "void f() {}");
    CHECK_THROWS_AS(extract_code_block("Here is some prose without any code."), ExtractionError);
    CHECK_THROWS_AS(extract_code_block(""), ExtractionError);

    std::mt19937 rng(3);
    const char alphabet[] = "`ab c\n#{}";
    for (int i = 0; i < 2000; ++i) {
        std::string s;
        for (int n = static_cast<int>(rng() % 60); n > 0; --n) s += alphabet[rng() % (sizeof alphabet - 1)];
        std::string code;
        try {
            code = extract_code_block(s);
        } catch (const ExtractionError&) {
            continue;
        }
        CHECK(s.find(code) != std::string::npos);
    }
}

TEST_CASE("scripted backend queues per stage") {
    ScriptedBackend b({{"initial", "```cpp\nint a;\n```"}, {"hls_repair", "```\nint b;\n```"}, {"*", "int c;"}});
    PromptBundle p;
    auto r = b.generate(p);
    CHECK(r.code == "int a;");
    CHECK(r.backend == "scripted");
    CHECK(r.latency.count() == 0);
    p.stage = PromptStage::rtl_repair;
    CHECK(b.generate(p).code == "int c;");
    p.stage = PromptStage::hls_repair;
    CHECK(b.generate(p).code == "int b;");
    CHECK_THROWS_AS(b.generate(p), ScriptExhausted);

    ScriptedBackend two({{"initial", "int x;"}, {"initial", "int y;"}});
    PromptBundle q;
    two.generate(q);
    two.generate(q);
    CHECK_THROWS_AS(two.generate(q), ScriptExhausted);

    ScriptedBackend prose(std::vector<ScriptEntry>{{"initial", "no code here"}});
    CHECK_THROWS_AS(prose.generate(q), ExtractionError);

    TempDir dir;
    testing_support::write(dir / "s.json", R"([{"stage": "initial", "response": "int z;"}])");
    CHECK(ScriptedBackend::from_file(dir / "s.json").generate(q).code == "int z;");
    testing_support::write(dir / "bad.json", R"([{"stage": "later", "response": "int z;"}])");
    CHECK_THROWS_AS(ScriptedBackend::from_file(dir / "bad.json"), ConfigError);
}

TEST_CASE("backend config validation") {
    BackendConfig cfg;
    CHECK_THROWS_AS(validate(cfg), ConfigError);  // scripted without script
    cfg.script_path = "x.json";
    CHECK_NOTHROW(validate(cfg));
    cfg.temperature = 2.5;
    CHECK_THROWS_AS(validate(cfg), ConfigError);
    cfg.temperature = 0.7;
    cfg.kind = BackendKind::http_chat;
    CHECK_THROWS_AS(validate(cfg), ConfigError);
    cfg.endpoint = "http://localhost:1/v1/chat/completions";
    cfg.model = "m";
    CHECK_NOTHROW(validate(cfg));
    cfg.endpoint = "https://api.example.com/v1/chat/completions";
    CHECK_THROWS_AS(HttpChatBackend{cfg}, ConfigError);
    cfg.endpoint = "localhost/v1";
    CHECK_THROWS_AS(HttpChatBackend{cfg}, ConfigError);
}

TEST_CASE("http backend against a local server") {
    httplib::Server server;
    std::atomic<int> calls{0};
    std::string seen_body;
    std::string seen_auth;
    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        if (calls++ < 2) {
            res.status = 503;
            return;
        }
        seen_body = req.body;
        seen_auth = req.get_header_value("Authorization");
        nlohmann::json reply = {{"choices", {{{"message", {{"role", "assistant"}, {"content", "ok ```cpp\nint r;\n```"}}}}}}};
        res.set_content(reply.dump(), "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread th([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    ::setenv("TIMELYHLS_LLM_API_KEY", "secret", 1);
    BackendConfig cfg;
    cfg.kind = BackendKind::http_chat;
    cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
    cfg.model = "test-model";
    std::vector<long long> sleeps;
    HttpChatBackend backend(cfg, [&](std::chrono::milliseconds d) { sleeps.push_back(d.count()); });
    PromptBundle p;
    p.system = "sys";
    p.user = "usr";
    const auto r = backend.generate(p);
    CHECK(r.code == "int r;");
    CHECK(sleeps == std::vector<long long>{1000, 2000});
    const auto body = nlohmann::json::parse(seen_body);
    CHECK(body["model"] == "test-model");
    CHECK(body["temperature"] == 0.7);
    CHECK(body["messages"][0]["role"] == "system");
    CHECK(body["messages"][1]["content"] == "usr");
    CHECK(seen_auth == "Bearer secret");

    calls = -100;  // always failing from here on
    cfg.max_retries = 1;
    sleeps.clear();
    HttpChatBackend failing(cfg, [&](std::chrono::milliseconds d) { sleeps.push_back(d.count()); });
    CHECK_THROWS_AS(failing.generate(p), BackendError);
    CHECK(sleeps == std::vector<long long>{1000});

    server.stop();
    th.join();
    ::unsetenv("TIMELYHLS_LLM_API_KEY");

    ::setenv("TIMELYHLS_LLM_ENDPOINT", "http://example.invalid/x", 1);
    CHECK(with_env_overrides(cfg).endpoint == "http://example.invalid/x");
    ::unsetenv("TIMELYHLS_LLM_ENDPOINT");
}
