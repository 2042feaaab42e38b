#include "audit/topic_audit.hpp"

#include "audit/util.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace audit {

const char* const kTopicPrompt =
    "You are an assistant that can identify and extract high-level topics from text that are "
    "single words or short phrases. Identify ten topics for the provided text. Avoid using words "
    "in the provided text. Ensure that your topics are single-word nouns or short noun phrases.\n"
    "Do not provide any explanation or justification. Do not preface your response with a header.\n"
    "Your response should be a newline separated list.";

std::string canonicalize_topic(const std::string& raw) {
    return canonicalize_spaces(raw);
}

std::vector<std::string> parse_topic_list(const std::string& raw) {
    std::vector<std::string> topics;
    for (const auto& line : split(raw, '\n')) {
        std::string topic = canonicalize_topic(line);
        if (!topic.empty()) topics.push_back(std::move(topic));
    }
    return topics;
}

std::vector<TopicSample> extract_topics(Backend& judge, const std::string& response_text, int S,
                                        const DecodingConfig& decoding) {
    if (S < 1) throw AuditError(ErrorCode::ConfigError, "topic sample count must be >= 1");
    if (response_text.empty())
        throw AuditError(ErrorCode::EmptyGroup, "cannot extract topics from an empty response");

    const ChatMessages messages = {{"system", kTopicPrompt}, {"user", response_text}};
    std::vector<TopicSample> kept;
    std::string last_error = "every sample produced fewer than 3 topics";

    for (int s = 0; s < S; ++s) {
        bool stored = false;
        for (int attempt = 0; attempt < 2 && !stored; ++attempt) {
            int call_index = attempt == 0 ? s : S + s; // retry draws a fresh stream
            DecodingConfig d = decoding;
            if (d.seed) d.seed = *decoding.seed + call_index;
            try {
                std::vector<std::string> topics = parse_topic_list(
                    judge.complete(messages, d, call_index));
                if (topics.size() >= 3) {
                    kept.push_back(TopicSample{s, std::move(topics)});
                    stored = true;
                }
            } catch (const AuditError& e) {
                last_error = e.what();
            }
        }
    }

    if (kept.empty()) throw AuditError(ErrorCode::AllSamplesFailed, last_error);
    return kept;
}

TopicDistribution response_distribution(const std::vector<TopicSample>& samples) {
    std::map<std::string, long long> counts;
    long long total = 0;
    for (const auto& sample : samples)
        for (const auto& topic : sample.topics) {
            ++counts[topic];
            ++total;
        }
    if (total == 0) throw AuditError(ErrorCode::EmptyGroup, "no topics in any sample");
    TopicDistribution dist;
    for (const auto& [topic, count] : counts)
        dist.mass[topic] = static_cast<double>(count) / static_cast<double>(total);
    return dist;
}

TopicDistribution group_distribution(const std::vector<TopicDistribution>& dists) {
    if (dists.empty()) throw AuditError(ErrorCode::EmptyGroup, "no distributions to aggregate");
    TopicDistribution out;
    for (const auto& dist : dists)
        for (const auto& [topic, mass] : dist.mass) out.mass[topic] += mass;
    const double k = static_cast<double>(dists.size());
    for (auto& [topic, mass] : out.mass) mass /= k;
    return out;
}

namespace {

double clamp_unit(double v) {
    if (v < 0.0) return 0.0;
    if (v > 1.0) return 1.0;
    return v;
}

double jsd_terms(double accp, double accq) {
    return clamp_unit(0.5 * accp + 0.5 * accq);
}

double jsd_dense(const std::vector<double>& p, const std::vector<double>& q) {
    double accp = 0.0, accq = 0.0;
    for (size_t t = 0; t < p.size(); ++t) {
        const double m = 0.5 * (p[t] + q[t]);
        if (p[t] > 0.0) accp += p[t] * std::log2(p[t] / m);
        if (q[t] > 0.0) accq += q[t] * std::log2(q[t] / m);
    }
    return jsd_terms(accp, accq);
}

struct DenseInput {
    size_t vocab_size = 0;
    std::vector<std::vector<double>> vecs;
    std::vector<char> in_a; // observed assignment
    int n_a = 0;
    int n_b = 0;
};

DenseInput densify(const std::vector<std::pair<int, TopicDistribution>>& labeled) {
    std::map<std::string, size_t> vocab;
    for (const auto& [label, dist] : labeled)
        for (const auto& [topic, mass] : dist.mass) vocab.emplace(topic, 0);
    size_t next = 0;
    for (auto& [topic, index] : vocab) index = next++;

    DenseInput in;
    in.vocab_size = next;
    in.vecs.reserve(labeled.size());
    in.in_a.reserve(labeled.size());
    for (const auto& [label, dist] : labeled) {
        if (label != 0 && label != 1)
            throw AuditError(ErrorCode::DegenerateGroups, "group labels must be 0 or 1");
        std::vector<double> v(next, 0.0);
        for (const auto& [topic, mass] : dist.mass) v[vocab.at(topic)] = mass;
        in.vecs.push_back(std::move(v));
        in.in_a.push_back(label == 0 ? 1 : 0);
        (label == 0 ? in.n_a : in.n_b) += 1;
    }
    if (in.n_a == 0 || in.n_b == 0)
        throw AuditError(ErrorCode::DegenerateGroups, "both groups must be nonempty");
    return in;
}

// Group-mean JSD for one assignment; responses are accumulated in ascending
// index order so equal membership sets give bit-identical statistics.
double assignment_stat(const DenseInput& in, const std::vector<char>& in_a, std::vector<double>& a,
                       std::vector<double>& b) {
    std::fill(a.begin(), a.end(), 0.0);
    std::fill(b.begin(), b.end(), 0.0);
    for (size_t i = 0; i < in.vecs.size(); ++i) {
        std::vector<double>& dst = in_a[i] ? a : b;
        const std::vector<double>& src = in.vecs[i];
        for (size_t t = 0; t < src.size(); ++t) dst[t] += src[t];
    }
    for (size_t t = 0; t < a.size(); ++t) a[t] /= in.n_a;
    for (size_t t = 0; t < b.size(); ++t) b[t] /= in.n_b;
    return jsd_dense(a, b);
}

double permuted_stat(const DenseInput& in, std::uint64_t seed, int perm_index,
                     std::vector<int>& idx, std::vector<char>& mask, std::vector<double>& a,
                     std::vector<double>& b) {
    std::mt19937_64 rng(
        splitmix64(seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(perm_index + 1))));
    const size_t n = in.vecs.size();
    idx.resize(n);
    for (size_t i = 0; i < n; ++i) idx[i] = static_cast<int>(i);
    for (size_t k = n - 1; k > 0; --k) {
        size_t j = static_cast<size_t>(rng() % (k + 1));
        std::swap(idx[k], idx[j]);
    }
    mask.assign(n, 0);
    for (int i = 0; i < in.n_a; ++i) mask[static_cast<size_t>(idx[static_cast<size_t>(i)])] = 1;
    return assignment_stat(in, mask, a, b);
}

DivergenceResult run_permutation_test(
    const std::vector<std::pair<int, TopicDistribution>>& labeled, int n_perm, std::uint64_t seed,
    bool parallel) {
    if (n_perm < 100)
        throw AuditError(ErrorCode::ConfigError, "permutation count must be >= 100");
    DenseInput in = densify(labeled);

    std::vector<double> a(in.vocab_size), b(in.vocab_size);
    const double observed = assignment_stat(in, in.in_a, a, b);

    long long exceed = 0;
    if (parallel) {
#ifdef _OPENMP
#pragma omp parallel
        {
            std::vector<double> pa(in.vocab_size), pb(in.vocab_size);
            std::vector<int> idx;
            std::vector<char> mask;
#pragma omp for reduction(+ : exceed) schedule(static)
            for (int i = 0; i < n_perm; ++i)
                if (permuted_stat(in, seed, i, idx, mask, pa, pb) >= observed) ++exceed;
        }
#else
        parallel = false;
#endif
    }
    if (!parallel) {
        std::vector<int> idx;
        std::vector<char> mask;
        for (int i = 0; i < n_perm; ++i)
            if (permuted_stat(in, seed, i, idx, mask, a, b) >= observed) ++exceed;
    }

    DivergenceResult result;
    result.jsd = observed;
    result.p_value = static_cast<double>(1 + exceed) / static_cast<double>(1 + n_perm);
    result.n_permutations = n_perm;
    result.n_group_a = in.n_a;
    result.n_group_b = in.n_b;
    return result;
}

} // namespace

double jsd(const TopicDistribution& p, const TopicDistribution& q) {
    double accp = 0.0, accq = 0.0;
    auto ip = p.mass.begin();
    auto iq = q.mass.begin();
    while (ip != p.mass.end() || iq != q.mass.end()) {
        double pi = 0.0, qi = 0.0;
        if (iq == q.mass.end() || (ip != p.mass.end() && ip->first < iq->first)) {
            pi = (ip++)->second;
        } else if (ip == p.mass.end() || iq->first < ip->first) {
            qi = (iq++)->second;
        } else {
            pi = (ip++)->second;
            qi = (iq++)->second;
        }
        const double m = 0.5 * (pi + qi);
        if (pi > 0.0) accp += pi * std::log2(pi / m);
        if (qi > 0.0) accq += qi * std::log2(qi / m);
    }
    return jsd_terms(accp, accq);
}

DivergenceResult permutation_test(
    const std::vector<std::pair<int, TopicDistribution>>& per_response_dists, int n_perm,
    std::uint64_t seed) {
    return run_permutation_test(per_response_dists, n_perm, seed, true);
}

DivergenceResult permutation_test_serial(
    const std::vector<std::pair<int, TopicDistribution>>& per_response_dists, int n_perm,
    std::uint64_t seed) {
    return run_permutation_test(per_response_dists, n_perm, seed, false);
}

} // namespace audit
