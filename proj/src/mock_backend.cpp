#include "audit/mock_backend.hpp"

#include "audit/util.hpp"

#include <cmath>
#include <random>

namespace audit {

using nlohmann::json;

MockProfile MockProfile::parse(const json& doc) {
    MockProfile p;
    try {
        p.name = doc.at("name").get<std::string>();
        p.topics_per_sample = doc.value("topics_per_sample", 10);
        for (const auto& jr : doc.at("rules")) {
            MockRule rule;
            rule.label = jr.at("label").get<std::string>();
            for (const auto& m : jr.value("match_any", json::array()))
                rule.match_any.push_back(to_lower_ascii(m.get<std::string>()));
            rule.base_text = jr.at("base_text").get<std::string>();
            for (const auto& ji : jr.value("inject", json::array()))
                rule.inject.push_back({ji.at("keyword").get<std::string>(), ji.at("prob").get<double>()});
            if (jr.contains("topics"))
                for (const auto& [topic, mass] : jr.at("topics").items())
                    rule.topics.emplace_back(topic, mass.get<double>());
            p.rules.push_back(std::move(rule));
        }
        if (doc.contains("judge"))
            for (const auto& m : doc.at("judge").value("yes_if_contains", json::array()))
                p.judge_yes_if_contains.push_back(to_lower_ascii(m.get<std::string>()));
    } catch (const json::exception& e) {
        throw AuditError(ErrorCode::InvalidProfile, std::string("malformed mock profile: ") + e.what());
    }

    if (p.name.empty()) throw AuditError(ErrorCode::InvalidProfile, "profile name must be nonempty");
    if (p.topics_per_sample < 1)
        throw AuditError(ErrorCode::InvalidProfile, "topics_per_sample must be >= 1");
    if (p.rules.empty()) throw AuditError(ErrorCode::InvalidProfile, "profile needs at least one rule");
    for (const auto& rule : p.rules) {
        for (const auto& inj : rule.inject)
            if (!(inj.prob >= 0.0 && inj.prob <= 1.0))
                throw AuditError(ErrorCode::InvalidProfile,
                                 "injection probability outside [0,1] in rule " + rule.label);
        if (!rule.topics.empty()) {
            double sum = 0.0;
            for (const auto& [topic, mass] : rule.topics) {
                if (!(mass >= 0.0 && mass <= 1.0))
                    throw AuditError(ErrorCode::InvalidProfile,
                                     "topic probability outside [0,1] in rule " + rule.label);
                sum += mass;
            }
            if (std::abs(sum - 1.0) > 1e-9)
                throw AuditError(ErrorCode::InvalidProfile,
                                 "topic distribution of rule " + rule.label + " sums to " +
                                     std::to_string(sum) + ", not 1");
        }
    }
    return p;
}

MockProfile MockProfile::load(const std::string& path) {
    json doc = json::parse(read_file(path), nullptr, false);
    if (doc.is_discarded())
        throw AuditError(ErrorCode::InvalidProfile, "mock profile is not valid JSON: " + path);
    return parse(doc);
}

MockBackend::MockBackend(MockProfile profile, std::string model_id)
    : profile_(std::move(profile)), model_id_(std::move(model_id)) {}

std::string MockBackend::model_id() const {
    return model_id_;
}

int MockBackend::max_concurrency() const {
    return 8;
}

std::string MockBackend::now() const {
    return "2000-01-01T00:00:00Z";
}

const MockRule& MockBackend::match_rule(const std::string& lower_text) const {
    for (const auto& rule : profile_.rules) {
        if (rule.match_any.empty()) return rule;
        for (const auto& pattern : rule.match_any)
            if (lower_text.find(pattern) != std::string::npos) return rule;
    }
    throw AuditError(ErrorCode::InvalidProfile,
                     "no mock rule matched; add a fallback rule with empty match_any");
}

std::string MockBackend::complete(const ChatMessages& messages, const DecodingConfig& decoding,
                                  int sample_index) {
    std::string all_text;
    for (const auto& m : messages) {
        all_text += m.content;
        all_text += '\n';
    }
    const std::string lower = to_lower_ascii(all_text);

    std::uint64_t h = fnv1a_64(profile_.name);
    h = splitmix64(h ^ static_cast<std::uint64_t>(decoding.seed ? *decoding.seed : 0));
    for (const auto& m : messages) {
        h = splitmix64(h ^ fnv1a_64(m.role));
        h = splitmix64(h ^ fnv1a_64(m.content));
    }
    h = splitmix64(h ^ static_cast<std::uint64_t>(sample_index));
    std::mt19937_64 rng(h);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    if (lower.find("identify ten topics") != std::string::npos) {
        const MockRule& rule = match_rule(lower);
        if (rule.topics.empty())
            throw AuditError(ErrorCode::InvalidProfile,
                             "rule " + rule.label + " has no topic distribution");
        std::string out;
        for (int i = 0; i < profile_.topics_per_sample; ++i) {
            double u = unit(rng);
            double cum = 0.0;
            std::string pick = rule.topics.back().first;
            for (const auto& [topic, mass] : rule.topics) {
                cum += mass;
                if (u < cum) {
                    pick = topic;
                    break;
                }
            }
            if (!pick.empty() && pick[0] >= 'a' && pick[0] <= 'z')
                pick[0] = static_cast<char>(pick[0] - 'a' + 'A');
            out += pick;
            out += '\n';
        }
        return out;
    }

    if (lower.find("answer yes or no") != std::string::npos) {
        std::string user_text;
        for (const auto& m : messages)
            if (m.role == "user") user_text = m.content;
        const std::string user_lower = to_lower_ascii(user_text);
        for (const auto& marker : profile_.judge_yes_if_contains)
            if (marker.empty() || user_lower.find(marker) != std::string::npos)
                return "YES — the marker keyword is present.";
        return "NO — no marker keyword found.";
    }

    const MockRule& rule = match_rule(lower);
    std::string out = rule.base_text;
    for (const auto& inj : rule.inject) {
        double u = unit(rng);
        if (u < inj.prob) {
            out += " It was ";
            out += inj.keyword;
            out += '.';
        }
    }
    return out;
}

} // namespace audit
