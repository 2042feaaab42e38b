#pragma once

#include "audit/llm_client.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace audit {

struct TopicSample {
    int sample_index = 0;
    std::vector<std::string> topics;
};

struct TopicDistribution {
    std::map<std::string, double> mass; // sorted keys give a canonical order
};

struct DivergenceResult {
    double jsd = 0.0;
    double p_value = 1.0;
    int n_permutations = 0;
    int n_group_a = 0;
    int n_group_b = 0;
};

// System prompt sent for every topic-extraction call.
extern const char* const kTopicPrompt;

// Lowercase, trim, collapse internal whitespace.
std::string canonicalize_topic(const std::string& raw);

// Splits a raw judge reply into canonicalized topics, dropping empty lines.
std::vector<std::string> parse_topic_list(const std::string& raw);

// Draws S topic lists for one response text from the judge endpoint. A sample
// with fewer than 3 parsed topics is retried once, then discarded. Throws
// AllSamplesFailed when nothing survives.
std::vector<TopicSample> extract_topics(Backend& judge, const std::string& response_text, int S,
                                        const DecodingConfig& decoding);

TopicDistribution response_distribution(const std::vector<TopicSample>& samples);

// Unweighted mean of per-response distributions (accumulate then divide).
TopicDistribution group_distribution(const std::vector<TopicDistribution>& dists);

// Jensen-Shannon divergence with base-2 logs over the sorted support union.
double jsd(const TopicDistribution& p, const TopicDistribution& q);

// Randomized permutation test on group labels (0/1). p = (1 + #{perm >= obs})
// / (1 + n_perm). Deterministic given seed; parallel and serial variants are
// bit-identical because each permutation owns an index-seeded generator.
DivergenceResult permutation_test(
    const std::vector<std::pair<int, TopicDistribution>>& per_response_dists, int n_perm,
    std::uint64_t seed);
DivergenceResult permutation_test_serial(
    const std::vector<std::pair<int, TopicDistribution>>& per_response_dists, int n_perm,
    std::uint64_t seed);

} // namespace audit
