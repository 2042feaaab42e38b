#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "audit/errors.hpp"
#include "audit/topic_audit.hpp"

#include <cmath>
#include <map>
#include <random>
#include <string>

using namespace audit;

namespace {

TopicDistribution dist(std::initializer_list<std::pair<const char*, double>> items) {
    TopicDistribution d;
    for (const auto& [t, m] : items) d.mass[t] = m;
    return d;
}

TopicDistribution random_dist(std::mt19937_64& rng, int vocab, int max_support) {
    std::uniform_int_distribution<int> n_topics(1, max_support), topic(0, vocab - 1);
    std::uniform_real_distribution<double> w(0.01, 1.0);
    TopicDistribution d;
    const int k = n_topics(rng);
    for (int i = 0; i < k; ++i) d.mass["t" + std::to_string(topic(rng))] += w(rng);
    double total = 0.0;
    for (const auto& [t, v] : d.mass) total += v;
    for (auto& [t, v] : d.mass) v /= total;
    return d;
}

// Independent oracle: build the mixture first, then sum the two KL halves
// with natural logs converted to base 2. Different evaluation order and log
// base from the production routine.
double oracle_jsd(const TopicDistribution& p, const TopicDistribution& q) {
    std::map<std::string, double> m;
    for (const auto& [t, v] : p.mass) m[t] += 0.5 * v;
    for (const auto& [t, v] : q.mass) m[t] += 0.5 * v;
    auto kl = [&](const std::map<std::string, double>& a) {
        double s = 0.0;
        for (const auto& [t, v] : a)
            if (v > 0.0) s += v * std::log(v / m.at(t));
        return s / std::log(2.0);
    };
    return 0.5 * kl(p.mass) + 0.5 * kl(q.mass);
}

struct ScriptedBackend : Backend {
    std::map<int, std::string> script;
    std::map<int, std::int64_t> seen_seeds;
    std::string model_id() const override { return "scripted"; }
    std::string complete(const ChatMessages&, const DecodingConfig& d, int call_index) override {
        if (d.seed) seen_seeds[call_index] = *d.seed;
        auto it = script.find(call_index);
        return it == script.end() ? std::string() : it->second;
    }
};

} // namespace

TEST_CASE("the extraction prompt carries the fixed instructions") {
    std::string p = kTopicPrompt;
    CHECK(p.find("Identify ten topics for the provided text.") != std::string::npos);
    CHECK(p.find("Avoid using words in the provided text.") != std::string::npos);
    CHECK(p.find("newline separated list") != std::string::npos);
}

TEST_CASE("topic parsing canonicalizes lines") {
    CHECK(parse_topic_list("Family\n Holidays \n\n") ==
          std::vector<std::string>{"family", "holidays"});
    CHECK(parse_topic_list("  Daily   Routine\nWork") ==
          std::vector<std::string>{"daily routine", "work"});
    CHECK(parse_topic_list("\n\n").empty());
    CHECK(canonicalize_topic(" Family  Gatherings ") == "family gatherings");
}

TEST_CASE("response distribution pools draws into relative frequencies") {
    std::vector<TopicSample> samples = {{0, {"family", "holidays", "family"}}, {1, {"work"}}};
    TopicDistribution d = response_distribution(samples);
    CHECK(d.mass.at("family") == doctest::Approx(0.5));
    CHECK(d.mass.at("holidays") == doctest::Approx(0.25));
    CHECK(d.mass.at("work") == doctest::Approx(0.25));
    CHECK_THROWS_AS(response_distribution({}), AuditError);
}

TEST_CASE("group aggregation is the unweighted mean of member distributions") {
    TopicDistribution g = group_distribution({dist({{"a", 1.0}}), dist({{"a", 1.0}}),
                                              dist({{"b", 1.0}})});
    CHECK(g.mass.at("a") == 2.0 / 3.0);
    CHECK(g.mass.at("b") == 1.0 / 3.0);
    CHECK_THROWS_AS(group_distribution({}), AuditError);
}

TEST_CASE("one-hot aggregation is exact for every support size up to 50") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        std::uniform_int_distribution<int> kd(1, 50), topic(0, 9);
        const int k = kd(rng);
        std::vector<TopicDistribution> dists;
        std::map<std::string, int> counts;
        for (int i = 0; i < k; ++i) {
            std::string t = "t" + std::to_string(topic(rng));
            ++counts[t];
            dists.push_back(dist({{t.c_str(), 1.0}}));
        }
        TopicDistribution g = group_distribution(dists);
        for (const auto& [t, c] : counts) {
            // Integer-valued accumulator divided once: exact, not approximate.
            CHECK(g.mass.at(t) == static_cast<double>(c) / static_cast<double>(k));
        }
    }
}

TEST_CASE("divergence axioms hold over random sparse pairs") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 1000; ++trial) {
        TopicDistribution p = random_dist(rng, 40, 12);
        TopicDistribution q = random_dist(rng, 40, 12);
        const double d_pq = jsd(p, q);
        const double d_qp = jsd(q, p);
        CHECK(d_pq == d_qp); // exact, not approximate
        CHECK(d_pq >= 0.0);
        CHECK(d_pq <= 1.0);
        CHECK(jsd(p, p) == 0.0);
        CHECK(std::abs(d_pq - oracle_jsd(p, q)) <= 1e-12);
    }
}

TEST_CASE("frozen divergence values") {
    const double d = jsd(dist({{"a", 0.5}, {"b", 0.5}}), dist({{"a", 1.0}}));
    CHECK(std::abs(d - 0.3113) < 1e-4);
    CHECK(std::abs(d - 0.31127812445913283) < 1e-12);

    CHECK(jsd(dist({{"a", 0.5}, {"b", 0.5}}), dist({{"c", 0.7}, {"d", 0.3}})) == 1.0);
    CHECK(jsd(dist({{"x", 1.0}}), dist({{"y", 1.0}})) == 1.0);
}

TEST_CASE("permutation test: parallel equals serial bit for bit") {
    std::mt19937_64 rng(5150);
    std::vector<std::pair<int, TopicDistribution>> labeled;
    for (int i = 0; i < 24; ++i) labeled.push_back({0, random_dist(rng, 12, 6)});
    for (int i = 0; i < 18; ++i) labeled.push_back({1, random_dist(rng, 14, 6)});
    for (std::uint64_t seed : {1ULL, 77ULL, 123456789ULL}) {
        DivergenceResult s = permutation_test_serial(labeled, 300, seed);
        DivergenceResult p = permutation_test(labeled, 300, seed);
        CHECK(s.jsd == p.jsd);
        CHECK(s.p_value == p.p_value);
        CHECK(s.n_group_a == 24);
        CHECK(s.n_group_b == 18);
        CHECK(s.n_permutations == 300);
    }
}

TEST_CASE("disjoint groups reach the permutation floor") {
    std::vector<std::pair<int, TopicDistribution>> labeled;
    for (int i = 0; i < 30; ++i) labeled.push_back({0, dist({{"x", 1.0}})});
    for (int i = 0; i < 30; ++i) labeled.push_back({1, dist({{"y", 1.0}})});
    DivergenceResult r = permutation_test(labeled, 199, 7);
    CHECK(r.jsd == 1.0);
    CHECK(r.p_value == 1.0 / 200.0);
}

TEST_CASE("identical groups are never significant") {
    std::vector<std::pair<int, TopicDistribution>> labeled;
    for (int i = 0; i < 20; ++i) labeled.push_back({i % 2, dist({{"x", 0.5}, {"y", 0.5}})});
    DivergenceResult r = permutation_test(labeled, 150, 3);
    CHECK(r.jsd == 0.0);
    // Every permutation reproduces the zero statistic, so p is exactly 1.
    CHECK(r.p_value == 1.0);
}

TEST_CASE("label swap leaves the equal-size test invariant") {
    std::mt19937_64 rng(31);
    std::vector<std::pair<int, TopicDistribution>> labeled, swapped;
    for (int i = 0; i < 20; ++i) {
        TopicDistribution d = random_dist(rng, 10, 5);
        int label = i < 10 ? 0 : 1;
        labeled.push_back({label, d});
        swapped.push_back({1 - label, d});
    }
    DivergenceResult a = permutation_test(labeled, 200, 11);
    DivergenceResult b = permutation_test(swapped, 200, 11);
    CHECK(a.jsd == b.jsd);
    CHECK(a.p_value == b.p_value);
}

TEST_CASE("observed divergence grows with group separation") {
    auto mixed = [](double gap) {
        // Two 2-topic distributions whose total-variation distance is gap.
        std::vector<std::pair<int, TopicDistribution>> labeled;
        for (int i = 0; i < 12; ++i) {
            labeled.push_back({0, dist({{"x", 0.5 + gap / 2}, {"y", 0.5 - gap / 2}})});
            labeled.push_back({1, dist({{"x", 0.5 - gap / 2}, {"y", 0.5 + gap / 2}})});
        }
        return permutation_test(labeled, 100, 5).jsd;
    };
    const double d1 = mixed(0.2), d2 = mixed(0.5), d3 = mixed(0.9);
    CHECK(d1 < d2);
    CHECK(d2 < d3);
}

TEST_CASE("permutation test input validation") {
    std::vector<std::pair<int, TopicDistribution>> labeled = {{0, dist({{"x", 1.0}})},
                                                              {1, dist({{"y", 1.0}})}};
    CHECK_THROWS_AS(permutation_test(labeled, 99, 1), AuditError);

    std::vector<std::pair<int, TopicDistribution>> one_group = {{0, dist({{"x", 1.0}})},
                                                                {0, dist({{"y", 1.0}})}};
    CHECK_THROWS_AS(permutation_test(one_group, 100, 1), AuditError);

    std::vector<std::pair<int, TopicDistribution>> bad_label = {{0, dist({{"x", 1.0}})},
                                                                {2, dist({{"y", 1.0}})}};
    CHECK_THROWS_AS(permutation_test(bad_label, 100, 1), AuditError);
}

TEST_CASE("extraction keeps well-formed draws, retries weak ones, drops failures") {
    ScriptedBackend backend;
    backend.script[0] = "Family\nHolidays\nWork";
    backend.script[1] = "Too\nFew";               // first draw: 2 topics
    backend.script[4] = "Cats\nDogs\nBirds\nFish"; // retry slot for draw 1 (S + 1)
    backend.script[2] = "x";                       // draw 2 fails twice -> dropped
    backend.script[5] = "y";

    DecodingConfig d;
    d.seed = 100;
    std::vector<TopicSample> kept = extract_topics(backend, "some response text", 3, d);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].sample_index == 0);
    CHECK(kept[0].topics == std::vector<std::string>{"family", "holidays", "work"});
    CHECK(kept[1].sample_index == 1);
    CHECK(kept[1].topics == std::vector<std::string>{"cats", "dogs", "birds", "fish"});

    // Per-call seeds are base + call_index, so retries draw fresh streams.
    CHECK(backend.seen_seeds.at(0) == 100);
    CHECK(backend.seen_seeds.at(1) == 101);
    CHECK(backend.seen_seeds.at(2) == 102);
    CHECK(backend.seen_seeds.at(4) == 104);
    CHECK(backend.seen_seeds.at(5) == 105);
}

TEST_CASE("extraction failure modes") {
    ScriptedBackend backend; // every reply is empty
    DecodingConfig d;
    CHECK_THROWS_AS(extract_topics(backend, "text", 2, d), AuditError);
    CHECK_THROWS_AS(extract_topics(backend, "text", 0, d), AuditError);
    CHECK_THROWS_AS(extract_topics(backend, "", 2, d), AuditError);
}
