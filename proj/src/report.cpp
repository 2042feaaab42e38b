#include "audit/report.hpp"

#include "audit/errors.hpp"
#include "audit/util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace audit {
namespace {

std::string fmt1(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    if (std::strcmp(buf, "-0.0") == 0) return "0.0";
    return buf;
}

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default: out += c;
        }
    }
    return out;
}

struct Rgb {
    int r, g, b;
};

Rgb lerp(Rgb a, Rgb b, double t) {
    auto mix = [&](int x, int y) { return (int)std::lround(x + (y - x) * t); };
    return {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b)};
}

std::string css(Rgb c) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", c.r, c.g, c.b);
    return buf;
}

const Rgb kWhite{255, 255, 255};
const Rgb kBlue{33, 102, 172};
const Rgb kRed{178, 24, 43};

std::string role_file_tag(Role role) {
    return role == Role::IdentityUser ? "user" : "model";
}

std::string question_file_tag(QuestionId q) {
    std::string s = question_name(q);
    return to_lower_ascii(s);
}

void write_text_file(const fs::path& path, const std::string& text) {
    write_file(path.string(), text);
}

// Sorted distinct model names across a report section.
template <typename Cells>
std::vector<std::string> model_axis(const Cells& cells) {
    std::set<std::string> models;
    for (const auto& c : cells) models.insert(c.model);
    return {models.begin(), models.end()};
}

const Context kContextOrder[] = {Context::Housing, Context::Medical, Context::Persona,
                                 Context::Recommendation, Context::Work};

} // namespace

std::string render_heatmap(const std::vector<std::vector<double>>& grid,
                           const std::vector<std::string>& row_labels,
                           const std::vector<std::string>& col_labels, bool diverging) {
    if (grid.empty() || grid[0].empty())
        throw AuditError(ErrorCode::EmptyGrid, "heatmap grid has no cells");
    const std::size_t rows = grid.size();
    const std::size_t cols = grid[0].size();
    for (const auto& row : grid)
        if (row.size() != cols)
            throw AuditError(ErrorCode::EmptyGrid, "heatmap grid rows have unequal lengths");
    if (row_labels.size() != rows || col_labels.size() != cols)
        throw AuditError(ErrorCode::EmptyGrid, "heatmap labels do not match grid shape");

    double lo = grid[0][0], hi = grid[0][0];
    for (const auto& row : grid)
        for (double v : row) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    // Scale denominator; keeps flat/all-zero grids rendered as white.
    double span = diverging ? std::max(std::abs(lo), std::abs(hi)) : std::max(hi, 0.0);
    if (span <= 0.0) span = 1.0;

    const int cell_w = 84, cell_h = 30;
    const int left = 150, top = 54, pad = 8;
    const int width = left + (int)cols * cell_w + pad;
    const int height = top + (int)rows * cell_h + pad;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    svg << "<style>text{font-family:monospace;font-size:11px;}</style>\n";
    svg << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";

    for (std::size_t c = 0; c < cols; ++c) {
        int x = left + (int)c * cell_w + cell_w / 2;
        svg << "<text x=\"" << x << "\" y=\"" << top - 10
            << "\" text-anchor=\"middle\">" << xml_escape(col_labels[c]) << "</text>\n";
    }
    for (std::size_t r = 0; r < rows; ++r) {
        int y = top + (int)r * cell_h + cell_h / 2 + 4;
        svg << "<text x=\"" << left - 8 << "\" y=\"" << y
            << "\" text-anchor=\"end\">" << xml_escape(row_labels[r]) << "</text>\n";
    }

    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            double v = grid[r][c];
            double t = std::clamp(v / span, -1.0, 1.0);
            Rgb fill;
            if (diverging)
                fill = t < 0 ? lerp(kWhite, kBlue, -t) : lerp(kWhite, kRed, t);
            else
                fill = lerp(kWhite, kBlue, std::max(t, 0.0));
            bool deep = std::abs(t) > 0.6;
            int x = left + (int)c * cell_w;
            int y = top + (int)r * cell_h;
            svg << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell_w
                << "\" height=\"" << cell_h << "\" fill=\"" << css(fill)
                << "\" stroke=\"#cccccc\"/>\n";
            svg << "<text x=\"" << x + cell_w / 2 << "\" y=\"" << y + cell_h / 2 + 4
                << "\" text-anchor=\"middle\" fill=\"" << (deep ? "white" : "#202020")
                << "\">" << fmt1(v) << "</text>\n";
        }
    }
    svg << "</svg>\n";
    return svg.str();
}

std::string lexical_csv(const AuditReport& report) {
    std::ostringstream out;
    out << "model,context,role,group,metric,value,n\n";
    auto emit = [&](const std::string& model, const std::string& context, const std::string& role,
                    const LexicalScore& s) {
        out << model << ',' << context << ',' << role << ',' << s.group
            << ",mean_occurrences," << fmt6(s.mean_occurrences_per_response) << ',' << s.n_responses
            << '\n';
        out << model << ',' << context << ',' << role << ',' << s.group << ",pct_with_any,"
            << fmt6(s.pct_responses_with_any) << ',' << s.n_responses << '\n';
    };
    for (const auto& cell : report.lexical)
        emit(cell.model, context_name(cell.context), role_name(cell.role), cell.score);
    for (const auto& [group, s] : report.lexical_overall) {
        (void)group;
        emit("all", "all", "all", s);
    }
    return out.str();
}

std::string judge_csv(const AuditReport& report) {
    std::ostringstream out;
    out << "model,context,role,question,group,pct_yes,n,delta_queer\n";
    for (const auto& cell : report.judge) {
        const JudgeScore& s = cell.score;
        out << cell.model << ',' << context_name(s.context) << ',' << role_name(s.role) << ','
            << question_name(s.question) << ',' << s.group << ',' << fmt6(s.pct_yes) << ',' << s.n
            << ',' << fmt6(cell.delta) << '\n';
    }
    return out.str();
}

std::string topics_csv(const AuditReport& report) {
    std::ostringstream out;
    out << "model,context,role,jsd,p_value,n_perm\n";
    for (const auto& cell : report.topics) {
        out << cell.model << ',' << context_name(cell.context) << ',' << role_name(cell.role) << ','
            << fmt6(cell.result.jsd) << ',' << fmt6(cell.result.p_value) << ','
            << cell.result.n_permutations << '\n';
    }
    return out.str();
}

std::string top_topics_text(const AuditReport& report, std::size_t k) {
    std::ostringstream out;
    for (const auto& entry : report.top_topics) {
        out << context_name(entry.context) << " / " << role_name(entry.role) << " / "
            << entry.group << '\n';
        std::size_t n = std::min(k, entry.topics.size());
        for (std::size_t i = 0; i < n; ++i)
            out << "  " << entry.topics[i].first << ' ' << fmt6(entry.topics[i].second) << '\n';
        out << '\n';
    }
    return out.str();
}

nlohmann::json report_json(const AuditReport& report) {
    nlohmann::json j;
    j["provenance"] = report.provenance;
    j["hypotheses"] = report.hypotheses;

    if (report.hypotheses.count("h1")) {
        nlohmann::json cells = nlohmann::json::array();
        for (const auto& cell : report.lexical) {
            cells.push_back({{"model", cell.model},
                             {"context", context_name(cell.context)},
                             {"role", role_name(cell.role)},
                             {"group", cell.score.group},
                             {"mean_occurrences", cell.score.mean_occurrences_per_response},
                             {"pct_with_any", cell.score.pct_responses_with_any},
                             {"n", cell.score.n_responses}});
        }
        nlohmann::json overall;
        for (const auto& [group, s] : report.lexical_overall)
            overall[group] = {{"mean_occurrences", s.mean_occurrences_per_response},
                              {"pct_with_any", s.pct_responses_with_any},
                              {"n", s.n_responses}};
        j["lexical"] = {{"cells", cells}, {"overall", overall}};
    }
    if (report.hypotheses.count("h2") || report.hypotheses.count("h3")) {
        nlohmann::json cells = nlohmann::json::array();
        for (const auto& cell : report.judge) {
            const JudgeScore& s = cell.score;
            cells.push_back({{"model", cell.model},
                             {"context", context_name(s.context)},
                             {"role", role_name(s.role)},
                             {"question", question_name(s.question)},
                             {"group", s.group},
                             {"pct_yes", s.pct_yes},
                             {"n", s.n},
                             {"delta_queer", cell.delta}});
        }
        j["judge"] = {{"cells", cells}, {"overall_delta", report.overall_delta}};
    }
    if (report.hypotheses.count("h4")) {
        nlohmann::json cells = nlohmann::json::array();
        for (const auto& cell : report.topics) {
            cells.push_back({{"model", cell.model},
                             {"context", context_name(cell.context)},
                             {"role", role_name(cell.role)},
                             {"jsd", cell.result.jsd},
                             {"p_value", cell.result.p_value},
                             {"n_perm", cell.result.n_permutations},
                             {"n_queer", cell.result.n_group_a},
                             {"n_not_queer", cell.result.n_group_b}});
        }
        j["topics"] = cells;
    }
    return j;
}

std::string summary_table(const AuditReport& report) {
    std::ostringstream out;
    if (report.hypotheses.count("h1")) {
        out << "Lexical audit (mean diversity-term occurrences per response):\n";
        for (const auto& [group, s] : report.lexical_overall)
            out << "  " << group << ": mean=" << fmt6(s.mean_occurrences_per_response)
                << " pct_with_any=" << fmt6(s.pct_responses_with_any) << " n=" << s.n_responses
                << '\n';
    }
    if (report.hypotheses.count("h2") || report.hypotheses.count("h3")) {
        out << "Judge audit (delta_queer = %YES Queer - %YES NotQueer, pooled):\n";
        for (const auto& [q, d] : report.overall_delta)
            out << "  " << q << ": " << fmt6(d) << '\n';
    }
    if (report.hypotheses.count("h4")) {
        out << "Topic divergence (Jensen-Shannon, base 2):\n";
        for (const auto& cell : report.topics)
            out << "  " << cell.model << ' ' << context_name(cell.context) << '/'
                << role_name(cell.role) << ": jsd=" << fmt6(cell.result.jsd)
                << " p=" << fmt6(cell.result.p_value) << '\n';
    }
    return out.str();
}

void write_report(const AuditReport& report, const std::string& report_dir) {
    fs::create_directories(report_dir);
    const fs::path dir(report_dir);

    if (report.hypotheses.count("h1")) write_text_file(dir / "lexical.csv", lexical_csv(report));

    if (report.hypotheses.count("h2") || report.hypotheses.count("h3")) {
        write_text_file(dir / "judge.csv", judge_csv(report));
        std::vector<std::string> models = model_axis(report.judge);
        std::set<QuestionId> questions;
        for (const auto& cell : report.judge) questions.insert(cell.score.question);
        for (QuestionId q : questions) {
            for (Role role : {Role::IdentityUser, Role::IdentityModel}) {
                std::vector<std::string> row_labels;
                std::vector<std::vector<double>> grid;
                for (Context ctx : kContextOrder) {
                    std::vector<double> row;
                    bool any = false;
                    for (const auto& model : models) {
                        double v = 0.0;
                        for (const auto& cell : report.judge) {
                            if (cell.model == model && cell.score.question == q &&
                                cell.score.context == ctx && cell.score.role == role) {
                                v = cell.delta;
                                any = true;
                                break;
                            }
                        }
                        row.push_back(v);
                    }
                    if (any) {
                        grid.push_back(std::move(row));
                        row_labels.push_back(context_name(ctx));
                    }
                }
                if (grid.empty()) continue;
                std::string name =
                    "delta_" + question_file_tag(q) + "_" + role_file_tag(role) + ".svg";
                write_text_file(dir / name, render_heatmap(grid, row_labels, models, true));
            }
        }
    }

    if (report.hypotheses.count("h4")) {
        write_text_file(dir / "topics.csv", topics_csv(report));
        write_text_file(dir / "top_topics.txt", top_topics_text(report));
        std::vector<std::string> models = model_axis(report.topics);
        for (Role role : {Role::IdentityUser, Role::IdentityModel}) {
            std::vector<std::string> row_labels;
            std::vector<std::vector<double>> grid;
            for (Context ctx : kContextOrder) {
                std::vector<double> row;
                bool any = false;
                for (const auto& model : models) {
                    double v = 0.0;
                    for (const auto& cell : report.topics) {
                        if (cell.model == model && cell.context == ctx && cell.role == role) {
                            v = cell.result.jsd;
                            any = true;
                            break;
                        }
                    }
                    row.push_back(v);
                }
                if (any) {
                    grid.push_back(std::move(row));
                    row_labels.push_back(context_name(ctx));
                }
            }
            if (grid.empty()) continue;
            std::string name = "jsd_" + role_file_tag(role) + ".svg";
            write_text_file(dir / name, render_heatmap(grid, row_labels, models, false));
        }
    }

    write_text_file(dir / "report.json", report_json(report).dump(2) + "\n");
}

} // namespace audit
