#pragma once

#include "audit/chat.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace audit {

enum class GroupName { Queer, NotQueer };
enum class Context { Housing, Medical, Persona, Recommendation, Work };
enum class Role { IdentityUser, IdentityModel };
enum class HeadNoun { Man, Woman, Person, Lesbian };

struct Pronouns {
    std::string subjective;
    std::string objective;
    std::string possessive_det;
    std::string possessive;
};

struct IdentityPhrase {
    std::string text;
    GroupName group = GroupName::Queer;
    HeadNoun head_noun = HeadNoun::Person;
    Pronouns pronouns;
};

struct IdentityGroup {
    GroupName name = GroupName::Queer;
    std::vector<IdentityPhrase> phrases;
};

struct PromptTemplate {
    std::string id;
    Context context = Context::Housing;
    Role role = Role::IdentityUser;
    std::string system_template;
    std::string user_turn;
    std::vector<std::string> slots;
};

struct RenderedPrompt {
    std::string prompt_id;
    ChatMessages messages;
    IdentityPhrase identity;
    std::string template_id;
    Context context = Context::Housing;
    Role role = Role::IdentityUser;
};

struct Bundle {
    std::vector<IdentityGroup> groups;
    std::vector<PromptTemplate> templates;
};

const char* group_name(GroupName g);
const char* context_name(Context c);
std::string context_lower(Context c);
const char* role_name(Role r);
GroupName parse_group(const std::string& s);
Context parse_context(const std::string& s);
Role parse_role(const std::string& s);

Pronouns pronouns_for(HeadNoun h);

Bundle parse_bundle(const nlohmann::json& doc);
Bundle load_bundle(const std::string& path);

RenderedPrompt render(const PromptTemplate& tmpl, const IdentityPhrase& identity);

std::vector<RenderedPrompt> matrix(const std::vector<IdentityGroup>& groups,
                                   const std::vector<PromptTemplate>& templates);

} // namespace audit
