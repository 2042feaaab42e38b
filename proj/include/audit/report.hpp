#pragma once

#include "audit/identity_matrix.hpp"
#include "audit/judge_audit.hpp"
#include "audit/lexical_audit.hpp"
#include "audit/topic_audit.hpp"

#include <json.hpp>

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace audit {

struct LexicalCell {
    std::string model;
    Context context;
    Role role;
    LexicalScore score; // carries group name
};

struct JudgeCell {
    std::string model;
    JudgeScore score;
    double delta = 0.0; // same value on both group rows of a cell
};

struct TopicCell {
    std::string model;
    Context context;
    Role role;
    DivergenceResult result;
};

struct TopTopics {
    Context context;
    Role role;
    std::string group;
    std::vector<std::pair<std::string, double>> topics; // (topic, mass), descending
};

struct AuditReport {
    nlohmann::json provenance;
    std::set<std::string> hypotheses;

    std::vector<LexicalCell> lexical;
    std::map<std::string, LexicalScore> lexical_overall; // by group

    std::vector<JudgeCell> judge;
    std::map<std::string, double> overall_delta; // by question name

    std::vector<TopicCell> topics;
    std::vector<TopTopics> top_topics;
};

// Deterministic SVG heatmap with per-cell value annotations. Diverging scale
// is centered at zero; the sequential scale starts at white.
std::string render_heatmap(const std::vector<std::vector<double>>& grid,
                           const std::vector<std::string>& row_labels,
                           const std::vector<std::string>& col_labels, bool diverging);

std::string lexical_csv(const AuditReport& report);
std::string judge_csv(const AuditReport& report);
std::string topics_csv(const AuditReport& report);
std::string top_topics_text(const AuditReport& report, std::size_t k = 15);
nlohmann::json report_json(const AuditReport& report);
std::string summary_table(const AuditReport& report);

// Writes every artifact for the enabled hypotheses under report_dir.
void write_report(const AuditReport& report, const std::string& report_dir);

} // namespace audit
