#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "audit/errors.hpp"
#include "audit/report.hpp"
#include "audit/util.hpp"

#include <filesystem>
#include <set>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace audit;

namespace {

AuditReport tiny_report() {
    AuditReport r;
    r.provenance = {{"run_id", "t"}, {"seed", 1}};
    r.hypotheses = {"h1", "h2", "h3", "h4"};

    r.lexical.push_back({"m1", Context::Housing, Role::IdentityUser,
                         {"Queer", 1.25, 75.0, 8}});
    r.lexical.push_back({"m1", Context::Housing, Role::IdentityUser,
                         {"NotQueer", 0.5, 25.0, 8}});
    r.lexical_overall["Queer"] = {"Queer", 1.25, 75.0, 8};
    r.lexical_overall["NotQueer"] = {"NotQueer", 0.5, 25.0, 8};

    JudgeScore q{"Queer", QuestionId::Q1, Context::Housing, Role::IdentityUser, 80.0, 10};
    JudgeScore nq{"NotQueer", QuestionId::Q1, Context::Housing, Role::IdentityUser, 30.0, 10};
    r.judge.push_back({"m1", q, 50.0});
    r.judge.push_back({"m1", nq, 50.0});
    r.overall_delta["Q1"] = 50.0;

    DivergenceResult dv;
    dv.jsd = 0.42;
    dv.p_value = 0.0099;
    dv.n_permutations = 199;
    dv.n_group_a = 12;
    dv.n_group_b = 12;
    r.topics.push_back({"m1", Context::Housing, Role::IdentityUser, dv});
    r.top_topics.push_back({Context::Housing, Role::IdentityUser, "Queer",
                            {{"community", 0.6}, {"identity", 0.4}}});
    return r;
}

} // namespace

TEST_CASE("heatmap output is deterministic svg with cell annotations") {
    std::vector<std::vector<double>> grid = {{0.0}};
    std::string svg = render_heatmap(grid, {"row"}, {"col"}, false);
    CHECK(svg.rfind("<svg ", 0) == 0);
    CHECK(svg.find(">0.0<") != std::string::npos);
    CHECK(svg.find(">row<") != std::string::npos);
    CHECK(svg.find(">col<") != std::string::npos);
    CHECK(svg == render_heatmap(grid, {"row"}, {"col"}, false));

    // A zero cell must not print as "-0.0" even if the double is negative zero.
    CHECK(render_heatmap({{-0.0}}, {"r"}, {"c"}, true).find(">0.0<") != std::string::npos);
}

TEST_CASE("heatmap validates grid shape") {
    CHECK_THROWS_AS(render_heatmap({}, {}, {}, false), AuditError);
    CHECK_THROWS_AS(render_heatmap({{}}, {"r"}, {}, false), AuditError);
    CHECK_THROWS_AS(render_heatmap({{1.0}, {1.0, 2.0}}, {"a", "b"}, {"c"}, false), AuditError);
    CHECK_THROWS_AS(render_heatmap({{1.0}}, {"a", "b"}, {"c"}, false), AuditError);
    CHECK_THROWS_AS(render_heatmap({{1.0}}, {"a"}, {}, false), AuditError);
}

TEST_CASE("diverging and sequential scales color the same magnitudes differently") {
    // Diverging: negative extreme maps toward blue, positive toward red.
    std::string div = render_heatmap({{-50.0, 50.0}}, {"r"}, {"a", "b"}, true);
    CHECK(div.find("#2166ac") != std::string::npos); // full blue at -span
    CHECK(div.find("#b2182b") != std::string::npos); // full red at +span

    // Sequential: the max maps to full blue, never red.
    std::string seq = render_heatmap({{0.0, 1.0}}, {"r"}, {"a", "b"}, false);
    CHECK(seq.find("#2166ac") != std::string::npos);
    CHECK(seq.find("#b2182b") == std::string::npos);
    CHECK(seq.find("#ffffff") != std::string::npos); // zero stays white

    // Flat all-zero grids render as white rather than dividing by zero.
    std::string flat = render_heatmap({{0.0, 0.0}}, {"r"}, {"a", "b"}, true);
    CHECK(flat.find("#ffffff") != std::string::npos);

    // Labels are XML-escaped.
    std::string esc = render_heatmap({{1.0}}, {"a<b"}, {"c&d"}, false);
    CHECK(esc.find("a&lt;b") != std::string::npos);
    CHECK(esc.find("c&amp;d") != std::string::npos);
}

TEST_CASE("csv renderings match the fixed column layouts") {
    AuditReport r = tiny_report();

    CHECK(lexical_csv(r) ==
          "model,context,role,group,metric,value,n\n"
          "m1,Housing,IdentityUser,Queer,mean_occurrences,1.25,8\n"
          "m1,Housing,IdentityUser,Queer,pct_with_any,75,8\n"
          "m1,Housing,IdentityUser,NotQueer,mean_occurrences,0.5,8\n"
          "m1,Housing,IdentityUser,NotQueer,pct_with_any,25,8\n"
          "all,all,all,NotQueer,mean_occurrences,0.5,8\n"
          "all,all,all,NotQueer,pct_with_any,25,8\n"
          "all,all,all,Queer,mean_occurrences,1.25,8\n"
          "all,all,all,Queer,pct_with_any,75,8\n");

    CHECK(judge_csv(r) ==
          "model,context,role,question,group,pct_yes,n,delta_queer\n"
          "m1,Housing,IdentityUser,Q1,Queer,80,10,50\n"
          "m1,Housing,IdentityUser,Q1,NotQueer,30,10,50\n");

    CHECK(topics_csv(r) ==
          "model,context,role,jsd,p_value,n_perm\n"
          "m1,Housing,IdentityUser,0.42,0.0099,199\n");

    CHECK(top_topics_text(r) ==
          "Housing / IdentityUser / Queer\n"
          "  community 0.6\n"
          "  identity 0.4\n"
          "\n");
    CHECK(top_topics_text(r, 1) ==
          "Housing / IdentityUser / Queer\n"
          "  community 0.6\n"
          "\n");
}

TEST_CASE("report json gates sections by enabled hypotheses") {
    AuditReport r = tiny_report();
    nlohmann::json full = report_json(r);
    CHECK(full.contains("lexical"));
    CHECK(full.contains("judge"));
    CHECK(full.contains("topics"));
    CHECK(full["provenance"]["run_id"] == "t");
    CHECK(full["lexical"]["overall"]["Queer"]["mean_occurrences"] == 1.25);
    CHECK(full["judge"]["overall_delta"]["Q1"] == 50.0);
    CHECK(full["judge"]["cells"][0]["delta_queer"] == 50.0);
    CHECK(full["topics"][0]["jsd"] == 0.42);
    CHECK(full["topics"][0]["n_queer"] == 12);

    r.hypotheses = {"h1"};
    nlohmann::json lex_only = report_json(r);
    CHECK(lex_only.contains("lexical"));
    CHECK(!lex_only.contains("judge"));
    CHECK(!lex_only.contains("topics"));

    r.hypotheses = {"h3"};
    nlohmann::json judge_only = report_json(r);
    CHECK(!judge_only.contains("lexical"));
    CHECK(judge_only.contains("judge"));
    CHECK(!judge_only.contains("topics"));
}

TEST_CASE("summary table mentions each enabled section") {
    AuditReport r = tiny_report();
    std::string s = summary_table(r);
    CHECK(s.find("Lexical audit") != std::string::npos);
    CHECK(s.find("delta_queer") != std::string::npos);
    CHECK(s.find("Jensen-Shannon") != std::string::npos);
    CHECK(s.find("Q1: 50") != std::string::npos);

    r.hypotheses = {"h4"};
    std::string topics_only = summary_table(r);
    CHECK(topics_only.find("Lexical") == std::string::npos);
    CHECK(topics_only.find("jsd=0.42") != std::string::npos);
}

TEST_CASE("write_report emits exactly the artifacts for the enabled hypotheses") {
    fs::path dir = fs::temp_directory_path() / "audit_report_test";
    fs::remove_all(dir);

    AuditReport r = tiny_report();
    write_report(r, dir.string());

    std::set<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir)) names.insert(entry.path().filename());
    CHECK(names == std::set<std::string>{"lexical.csv", "judge.csv", "delta_q1_user.svg",
                                         "topics.csv", "top_topics.txt", "jsd_user.svg",
                                         "report.json"});

    std::string judge_svg = read_file((dir / "delta_q1_user.svg").string());
    CHECK(judge_svg.find(">50.0<") != std::string::npos);
    CHECK(judge_svg.find(">m1<") != std::string::npos);
    CHECK(judge_svg.find(">Housing<") != std::string::npos);
    std::string json_text = read_file((dir / "report.json").string());
    CHECK(json_text.back() == '\n');
    CHECK(nlohmann::json::parse(json_text) == report_json(r));

    fs::remove_all(dir);

    // Lexical-only run writes only its own files.
    r.hypotheses = {"h1"};
    write_report(r, dir.string());
    names.clear();
    for (const auto& entry : fs::directory_iterator(dir)) names.insert(entry.path().filename());
    CHECK(names == std::set<std::string>{"lexical.csv", "report.json"});
    fs::remove_all(dir);
}
