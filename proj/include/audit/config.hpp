#pragma once

#include "audit/llm_client.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace audit {

// Minimal TOML-style document: [section] headers, key = value pairs, values
// are quoted strings, integers, floats, booleans, or single-line arrays of
// quoted strings. '#' starts a comment.
using ConfigValue = std::variant<std::string, std::int64_t, double, bool, std::vector<std::string>>;
using ConfigDoc = std::map<std::string, std::map<std::string, ConfigValue>>;

ConfigDoc parse_config_text(const std::string& text);

struct EndpointConfig {
    std::string model_id;
    std::string base_url;
    std::string api_key_env;
    double request_timeout_s = 60.0;
    int max_concurrency = 4;
    int max_retries = 3;
    std::string mock_profile; // nonempty selects the deterministic mock backend
};

struct RunConfig {
    std::string config_path;
    std::string run_id = "default";
    std::int64_t seed = 0;
    bool seed_set = false;
    int n_per_prompt = 20;
    int judge_votes = 1;
    int topic_samples = 50;
    int n_permutations = 1000;
    std::vector<std::string> hypotheses = {"h1", "h2", "h3", "h4"};
    std::string output_dir = "runs";
    std::string bundle_path = "data/bundle.json";
    std::string judge_examples_dir = "data/judge_examples";
    EndpointConfig generation;
    EndpointConfig judge;
    DecodingConfig decoding;
    bool force = false; // skip the bundle-hash gate (CLI flag)

    std::string run_dir() const;
    // Stable fingerprint of every semantic field, for report provenance.
    std::string digest() const;
    // Throws ConfigError on invalid combinations; call after flag overrides.
    void validate() const;
};

RunConfig load_run_config(const std::string& path);

} // namespace audit
