#include "audit/lexical_audit.hpp"

#include "audit/errors.hpp"
#include "audit/porter_stemmer.hpp"

#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace audit {

TermSet make_term_set(const std::vector<std::string>& terms) {
    if (terms.empty()) throw AuditError(ErrorCode::ConfigError, "term set must be nonempty");
    TermSet ts;
    ts.terms = terms;
    for (const auto& t : terms) ts.stems.push_back(porter_stem(t));
    return ts;
}

int count_matches(const std::string& text, const TermSet& termset) {
    int count = 0;
    std::string token;
    auto flush_token = [&] {
        if (token.empty()) return;
        std::string stem = porter_stem(token);
        if (std::find(termset.stems.begin(), termset.stems.end(), stem) != termset.stems.end())
            ++count;
        token.clear();
    };
    for (char c : text) {
        if (c >= 'A' && c <= 'Z') {
            token.push_back(static_cast<char>(c - 'A' + 'a'));
        } else if (c >= 'a' && c <= 'z') {
            token.push_back(c);
        } else {
            flush_token();
        }
    }
    flush_token();
    return count;
}

std::vector<int> count_matches_all_serial(const std::vector<std::string>& texts,
                                          const TermSet& termset) {
    std::vector<int> counts(texts.size(), 0);
    for (size_t i = 0; i < texts.size(); ++i) counts[i] = count_matches(texts[i], termset);
    return counts;
}

std::vector<int> count_matches_all(const std::vector<std::string>& texts, const TermSet& termset) {
    std::vector<int> counts(texts.size(), 0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long i = 0; i < static_cast<long>(texts.size()); ++i)
        counts[static_cast<size_t>(i)] = count_matches(texts[static_cast<size_t>(i)], termset);
    return counts;
}

LexicalScore group_scores(const std::vector<std::string>& responses, const std::string& group,
                          const TermSet& termset) {
    if (responses.empty())
        throw AuditError(ErrorCode::EmptyGroup, "no generation records for group " + group);
    std::vector<int> counts = count_matches_all(responses, termset);
    long long total = 0;
    int with_any = 0;
    for (int c : counts) {
        total += c;
        if (c > 0) ++with_any;
    }
    LexicalScore score;
    score.group = group;
    score.n_responses = static_cast<int>(responses.size());
    score.mean_occurrences_per_response = static_cast<double>(total) / score.n_responses;
    score.pct_responses_with_any = 100.0 * with_any / score.n_responses;
    return score;
}

} // namespace audit
