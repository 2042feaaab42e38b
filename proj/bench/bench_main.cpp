// Times the OpenMP kernels against their serial references and checks that
// both produce identical results. Build with -DCMAKE_BUILD_TYPE=Release for
// meaningful numbers.

#include "audit/lexical_audit.hpp"
#include "audit/topic_audit.hpp"

#include <chrono>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

using namespace audit;
using Clock = std::chrono::steady_clock;

namespace {

template <typename Fn>
double time_s(Fn&& fn) {
    auto t0 = Clock::now();
    fn();
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<std::pair<int, TopicDistribution>> synth_distributions(int n_responses, int vocab) {
    std::mt19937_64 rng(12345);
    std::uniform_int_distribution<int> topic(0, vocab - 1);
    std::uniform_int_distribution<int> arity(5, 15);
    std::uniform_real_distribution<double> weight(0.2, 1.0);
    std::vector<std::pair<int, TopicDistribution>> out;
    for (int i = 0; i < n_responses; ++i) {
        TopicDistribution d;
        int k = arity(rng);
        double total = 0.0;
        for (int j = 0; j < k; ++j) {
            double w = weight(rng);
            d.mass["topic" + std::to_string(topic(rng))] += w;
            total += w;
        }
        for (auto& [name, m] : d.mass) m /= total;
        out.push_back({i % 2, std::move(d)});
    }
    return out;
}

std::vector<std::string> synth_texts(int n) {
    const char* words[] = {"the",  "tenant",    "asked",   "about", "fairness", "policy",
                           "team", "inclusive", "diverse", "plans", "respect",  "told"};
    std::mt19937_64 rng(777);
    std::uniform_int_distribution<int> pick(0, 11);
    std::uniform_int_distribution<int> len(40, 120);
    std::vector<std::string> texts;
    texts.reserve(n);
    for (int i = 0; i < n; ++i) {
        std::string t;
        int k = len(rng);
        for (int j = 0; j < k; ++j) {
            t += words[pick(rng)];
            t += ' ';
        }
        texts.push_back(std::move(t));
    }
    return texts;
}

} // namespace

int main() {
    {
        auto dists = synth_distributions(400, 300);
        const int n_perm = 2000;
        DivergenceResult serial, parallel;
        double ts = time_s([&] { serial = permutation_test_serial(dists, n_perm, 99); });
        double tp = time_s([&] { parallel = permutation_test(dists, n_perm, 99); });
        bool same = serial.jsd == parallel.jsd && serial.p_value == parallel.p_value;
        std::printf("permutation test  (400 responses x %d perms): serial %.3fs parallel %.3fs "
                    "speedup %.2fx identical=%s\n",
                    n_perm, ts, tp, ts / tp, same ? "yes" : "NO");
        if (!same) return 1;
    }
    {
        auto texts = synth_texts(100000);
        TermSet termset = make_term_set();
        std::vector<int> serial, parallel;
        double ts = time_s([&] { serial = count_matches_all_serial(texts, termset); });
        double tp = time_s([&] { parallel = count_matches_all(texts, termset); });
        bool same = serial == parallel;
        std::printf("lexical scan      (100k texts): serial %.3fs parallel %.3fs speedup %.2fx "
                    "identical=%s\n",
                    ts, tp, ts / tp, same ? "yes" : "NO");
        if (!same) return 1;
    }
    return 0;
}
