#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "audit/config.hpp"
#include "audit/errors.hpp"

#include <filesystem>
#include <fstream>
#include <string>

using namespace audit;

namespace {

ErrorCode parse_code(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const AuditError& e) {
        return e.code();
    }
    REQUIRE(false);
    return ErrorCode::ParseError;
}

std::string write_temp(const std::string& text) {
    static int n = 0;
    auto p = std::filesystem::temp_directory_path() /
             ("audit_cfg_" + std::to_string(++n) + ".toml");
    std::ofstream(p) << text;
    return p.string();
}

const char* kMinimal = R"(
[run]
seed = 7
[generation]
mock_profile = "data/mock_profiles/demo.json"
[judge]
mock_profile = "data/mock_profiles/demo.json"
)";

} // namespace

TEST_CASE("value types parse") {
    ConfigDoc doc = parse_config_text(
        "# top comment\n"
        "[run]\n"
        "run_id = \"alpha beta\" # trailing comment\n"
        "seed = -3\n"
        "temperature = 0.25\n"
        "force = true\n"
        "quoted_hash = \"a # not a comment\"\n"
        "escapes = \"tab\\there \\\"quoted\\\" back\\\\slash\\n\"\n"
        "hypotheses = [\"h1\", \"h4\"]\n"
        "empty = []\n");
    const auto& run = doc.at("run");
    CHECK(std::get<std::string>(run.at("run_id")) == "alpha beta");
    CHECK(std::get<std::int64_t>(run.at("seed")) == -3);
    CHECK(std::get<double>(run.at("temperature")) == doctest::Approx(0.25));
    CHECK(std::get<bool>(run.at("force")) == true);
    CHECK(std::get<std::string>(run.at("quoted_hash")) == "a # not a comment");
    CHECK(std::get<std::string>(run.at("escapes")) == "tab\there \"quoted\" back\\slash\n");
    CHECK(std::get<std::vector<std::string>>(run.at("hypotheses")) ==
          std::vector<std::string>{"h1", "h4"});
    CHECK(std::get<std::vector<std::string>>(run.at("empty")).empty());
}

TEST_CASE("malformed documents are rejected") {
    CHECK(parse_code("key_outside = 1\n[run]\n") == ErrorCode::ConfigError);
    CHECK(parse_code("[run]\nseed = 1\nseed = 2\n") == ErrorCode::ConfigError);
    CHECK(parse_code("[run]\nnot a pair\n") == ErrorCode::ConfigError);
    CHECK(parse_code("[run]\nx = \"unterminated\n") == ErrorCode::ConfigError);
    CHECK(parse_code("[run\nx = 1\n") == ErrorCode::ConfigError);
    CHECK(parse_code("[run]\nx = what\n") == ErrorCode::ConfigError);
    CHECK(parse_code("[run]\nx = [1, 2]\n") == ErrorCode::ConfigError);
}

TEST_CASE("load_run_config fills defaults and normalizes hypotheses") {
    RunConfig cfg = load_run_config(write_temp(
        "[run]\nseed = 9\nhypotheses = [\"h4\", \"h1\", \"h4\"]\n"
        "[generation]\nmock_profile = \"m.json\"\n[judge]\nmock_profile = \"m.json\"\n"));
    CHECK(cfg.run_id == "default");
    CHECK(cfg.seed == 9);
    CHECK(cfg.seed_set);
    CHECK(cfg.n_per_prompt == 20);
    CHECK(cfg.hypotheses == std::vector<std::string>{"h1", "h4"});
    CHECK(cfg.generation.model_id == "generation-model");
    CHECK(cfg.judge.model_id == "judge-model");
    CHECK(cfg.run_dir() == "runs/default");
}

TEST_CASE("unknown sections and keys are rejected") {
    CHECK_THROWS_AS(load_run_config(write_temp("[nope]\nx = 1\n")), AuditError);
    CHECK_THROWS_AS(load_run_config(write_temp("[run]\nseed = 1\ntypo_key = 2\n")), AuditError);
    CHECK_THROWS_AS(load_run_config(write_temp("[decoding]\nseed = 1\n")), AuditError);
    CHECK_THROWS_AS(load_run_config(write_temp("missing.toml.nope")), AuditError);
}

TEST_CASE("validate guards the knobs") {
    RunConfig good = load_run_config(write_temp(kMinimal));
    CHECK_NOTHROW(good.validate());

    RunConfig cfg = good;
    cfg.seed_set = false;
    CHECK_THROWS_AS(cfg.validate(), AuditError);

    cfg = good;
    cfg.n_permutations = 99; // published floor for the permutation test
    CHECK_THROWS_AS(cfg.validate(), AuditError);

    cfg = good;
    cfg.hypotheses = {"h5"};
    CHECK_THROWS_AS(cfg.validate(), AuditError);

    cfg = good;
    cfg.hypotheses.clear();
    CHECK_THROWS_AS(cfg.validate(), AuditError);

    cfg = good;
    cfg.generation.mock_profile.clear(); // no base_url either
    CHECK_THROWS_AS(cfg.validate(), AuditError);

    cfg = good;
    cfg.decoding.top_p = 0.0;
    CHECK_THROWS_AS(cfg.validate(), AuditError);

    cfg = good;
    cfg.n_per_prompt = 0;
    CHECK_THROWS_AS(cfg.validate(), AuditError);

    cfg = good;
    cfg.run_id = "";
    CHECK_THROWS_AS(cfg.validate(), AuditError);
}

TEST_CASE("digest tracks semantic fields only") {
    RunConfig a = load_run_config(write_temp(kMinimal));
    RunConfig b = load_run_config(write_temp(kMinimal));
    CHECK(a.digest() == b.digest());
    CHECK(a.digest().size() == 32);

    b.seed = 8;
    CHECK(a.digest() != b.digest());

    b = a;
    b.output_dir = "elsewhere"; // reports must not change across output roots
    CHECK(a.digest() == b.digest());

    b = a;
    b.config_path = "other.toml";
    CHECK(a.digest() == b.digest());
}

TEST_CASE("the demo config in the repository parses") {
    RunConfig cfg = load_run_config(std::string(AUDIT_DATA_DIR) + "/configs/mock_demo.toml");
    CHECK(cfg.run_id == "mock-demo");
    CHECK(cfg.seed == 42);
    CHECK(cfg.n_per_prompt == 2);
    CHECK(cfg.topic_samples == 4);
    CHECK(cfg.n_permutations == 200);
    CHECK(cfg.generation.model_id == "mock-writer");
    CHECK_NOTHROW(cfg.validate());

    RunConfig live = load_run_config(std::string(AUDIT_DATA_DIR) + "/configs/live_example.toml");
    CHECK(live.generation.base_url == "http://localhost:8000/v1");
    CHECK_NOTHROW(live.validate());
}
