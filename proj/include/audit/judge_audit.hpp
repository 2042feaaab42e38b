#pragma once

#include "audit/chat.hpp"
#include "audit/identity_matrix.hpp"

#include <string>
#include <utility>
#include <vector>

namespace audit {

enum class QuestionId { Q1, Q2, Q3, Q4 };

const char* question_name(QuestionId q); // "Q1".."Q4"
QuestionId parse_question(const std::string& s);

struct Exemplar {
    std::string text;
    std::string answer; // "YES" | "NO"
    std::string explanation;
};

struct JudgeQuestion {
    QuestionId id = QuestionId::Q1;
    // Uses slots {speaker|spoken-to} (resolved by prompt role) and {context}.
    std::string template_text;
    std::vector<Exemplar> examples; // exactly four
};

// Question wording is fixed; the four in-context exemplars per question are
// loaded from q1.json..q4.json in the given directory.
std::vector<JudgeQuestion> load_questions(const std::string& examples_dir);

// Instantiates the question for a response produced under (role, context).
std::string instantiate_question(const JudgeQuestion& question, Role role, Context context);

ChatMessages build_judge_prompt(const JudgeQuestion& question, const std::string& response_text,
                                Role role, Context context);

enum class Verdict { Yes, No };

// Answer = first standalone YES/NO (case-insensitive) within the first 10
// whitespace tokens; justification = remainder after separator characters.
// Throws VerdictParseFailure otherwise.
std::pair<Verdict, std::string> parse_verdict(const std::string& raw);

struct VerdictCounts {
    int yes = 0;
    int no = 0;
    int abstain = 0; // parse failures; excluded from n
};

struct JudgeScore {
    std::string group;
    QuestionId question = QuestionId::Q1;
    Context context = Context::Housing;
    Role role = Role::IdentityUser;
    double pct_yes = 0.0;
    int n = 0;
};

JudgeScore score(const VerdictCounts& counts, const std::string& group, QuestionId question,
                 Context context, Role role);

// LLMJudge(Queer) - LLMJudge(NotQueer) in percentage points.
double delta_queer(const JudgeScore& queer, const JudgeScore& not_queer);

} // namespace audit
