#pragma once

#include <string>
#include <vector>

namespace audit {

struct TermSet {
    std::vector<std::string> terms;
    std::vector<std::string> stems;
};

// Builds a TermSet by Porter-stemming each term. Terms default to the four
// diversity-coded audit words.
TermSet make_term_set(
    const std::vector<std::string>& terms = {"respect", "diverse", "inclusive", "fair"});

struct LexicalScore {
    std::string group;
    double mean_occurrences_per_response = 0.0;
    double pct_responses_with_any = 0.0;
    int n_responses = 0;
};

// Tokenizes on non-letters, lowercases, stems each token, and counts tokens
// whose stem equals any termset stem.
int count_matches(const std::string& text, const TermSet& termset);

// Per-text match counts; parallelized when OpenMP is available.
std::vector<int> count_matches_all(const std::vector<std::string>& texts, const TermSet& termset);
// Serial reference implementation; must produce identical output.
std::vector<int> count_matches_all_serial(const std::vector<std::string>& texts,
                                          const TermSet& termset);

LexicalScore group_scores(const std::vector<std::string>& responses, const std::string& group,
                          const TermSet& termset);

} // namespace audit
