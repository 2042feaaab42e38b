#pragma once

#include "audit/llm_client.hpp"

#include <json.hpp>

#include <string>
#include <utility>
#include <vector>

namespace audit {

struct InjectSpec {
    std::string keyword;
    double prob = 0.0;
};

struct MockRule {
    std::string label;
    std::vector<std::string> match_any; // lowercase substrings; empty matches everything
    std::string base_text;
    std::vector<InjectSpec> inject;
    std::vector<std::pair<std::string, double>> topics; // categorical distribution
};

struct MockProfile {
    std::string name;
    int topics_per_sample = 10;
    std::vector<MockRule> rules;
    std::vector<std::string> judge_yes_if_contains;

    static MockProfile parse(const nlohmann::json& doc);
    static MockProfile load(const std::string& path);
};

// Deterministic stand-in for a chat endpoint: output is a pure function of
// (profile, decoding seed, messages, sample_index). Detects its role from the
// request text: topic-extraction prompts, YES/NO judge prompts, or free
// generation.
class MockBackend : public Backend {
  public:
    explicit MockBackend(MockProfile profile, std::string model_id = "mock");
    std::string model_id() const override;
    std::string complete(const ChatMessages& messages, const DecodingConfig& decoding,
                         int sample_index) override;
    int max_concurrency() const override;
    // Fixed timestamp so stored corpora are byte-reproducible.
    std::string now() const override;

  private:
    const MockRule& match_rule(const std::string& lower_text) const;

    MockProfile profile_;
    std::string model_id_;
};

} // namespace audit
