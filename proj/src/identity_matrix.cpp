#include "audit/identity_matrix.hpp"

#include "audit/errors.hpp"
#include "audit/util.hpp"

#include <algorithm>
#include <set>
#include <map>

namespace audit {

namespace {

const std::vector<std::string> kAllowedSlots = {
    "identity_phrase", "pronoun_subjective", "pronoun_objective", "pronoun_possessive_det",
    "his|her|their", "him|her|them"};

bool is_alpha_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

// he-series -> 0, she-series -> 1, they-series -> 2; indexes alternation groups.
int series_index(const Pronouns& p) {
    if (p.subjective == "he") return 0;
    if (p.subjective == "she") return 1;
    return 2;
}

// Patch a trailing indefinite article when the phrase being substituted is vowel-initial.
void fix_article(std::string& out, const std::string& phrase) {
    if (phrase.empty()) return;
    char c0 = phrase[0];
    if (c0 != 'a' && c0 != 'e' && c0 != 'i' && c0 != 'o' && c0 != 'u') return;
    if (out.size() < 2 || out[out.size() - 1] != ' ') return;
    char art = out[out.size() - 2];
    if (art != 'a' && art != 'A') return;
    if (out.size() > 2 && is_alpha_char(out[out.size() - 3])) return; // not a standalone "a"
    out.insert(out.size() - 1, 1, 'n');
}

std::vector<std::string> scan_slots(const std::string& text) {
    std::vector<std::string> slots;
    size_t i = 0;
    while (i < text.size()) {
        if (text[i] == '{') {
            size_t close = text.find('}', i);
            if (close == std::string::npos)
                throw AuditError(ErrorCode::UnknownSlot, "unterminated slot marker in: " + text);
            slots.push_back(text.substr(i + 1, close - i - 1));
            i = close + 1;
        } else {
            ++i;
        }
    }
    return slots;
}

HeadNoun parse_head_noun(const std::string& s) {
    if (s == "man") return HeadNoun::Man;
    if (s == "woman") return HeadNoun::Woman;
    if (s == "person") return HeadNoun::Person;
    if (s == "lesbian") return HeadNoun::Lesbian;
    throw AuditError(ErrorCode::ParseError, "unknown head noun: " + s);
}

std::string last_word(const std::string& text) {
    size_t pos = text.rfind(' ');
    return pos == std::string::npos ? text : text.substr(pos + 1);
}

} // namespace

const char* group_name(GroupName g) {
    return g == GroupName::Queer ? "Queer" : "NotQueer";
}

const char* context_name(Context c) {
    switch (c) {
        case Context::Housing: return "Housing";
        case Context::Medical: return "Medical";
        case Context::Persona: return "Persona";
        case Context::Recommendation: return "Recommendation";
        case Context::Work: return "Work";
    }
    return "?";
}

std::string context_lower(Context c) {
    return to_lower_ascii(context_name(c));
}

const char* role_name(Role r) {
    return r == Role::IdentityUser ? "IdentityUser" : "IdentityModel";
}

GroupName parse_group(const std::string& s) {
    if (s == "Queer") return GroupName::Queer;
    if (s == "NotQueer") return GroupName::NotQueer;
    throw AuditError(ErrorCode::ParseError, "unknown identity group: " + s);
}

Context parse_context(const std::string& s) {
    if (s == "Housing") return Context::Housing;
    if (s == "Medical") return Context::Medical;
    if (s == "Persona") return Context::Persona;
    if (s == "Recommendation") return Context::Recommendation;
    if (s == "Work") return Context::Work;
    throw AuditError(ErrorCode::ParseError, "unknown context: " + s);
}

Role parse_role(const std::string& s) {
    if (s == "IdentityUser") return Role::IdentityUser;
    if (s == "IdentityModel") return Role::IdentityModel;
    throw AuditError(ErrorCode::ParseError, "unknown role: " + s);
}

Pronouns pronouns_for(HeadNoun h) {
    switch (h) {
        case HeadNoun::Man: return {"he", "him", "his", "his"};
        case HeadNoun::Woman: return {"she", "her", "her", "hers"};
        case HeadNoun::Person:
        case HeadNoun::Lesbian: return {"they", "them", "their", "theirs"};
    }
    return {};
}

Bundle parse_bundle(const nlohmann::json& doc) {
    Bundle bundle;
    if (!doc.is_object() || !doc.contains("identity_groups") || !doc.contains("templates"))
        throw AuditError(ErrorCode::ParseError, "bundle must contain identity_groups and templates");

    std::set<std::string> seen_phrases;
    for (const auto& jg : doc.at("identity_groups")) {
        IdentityGroup group;
        group.name = parse_group(jg.at("name").get<std::string>());
        for (const auto& jp : jg.at("phrases")) {
            IdentityPhrase ph;
            ph.text = jp.at("text").get<std::string>();
            ph.group = group.name;
            ph.head_noun = parse_head_noun(jp.at("head_noun").get<std::string>());
            ph.pronouns = pronouns_for(ph.head_noun);
            if (ph.text != canonicalize_spaces(ph.text))
                throw AuditError(ErrorCode::ParseError,
                                 "phrase must be lowercase and single-spaced: '" + ph.text + "'");
            if (last_word(ph.text) != jp.at("head_noun").get<std::string>())
                throw AuditError(ErrorCode::ParseError,
                                 "head_noun must be the final word of the phrase: '" + ph.text + "'");
            if (!seen_phrases.insert(ph.text).second)
                throw AuditError(ErrorCode::DuplicatePhrase, "duplicate identity phrase: " + ph.text);
            group.phrases.push_back(std::move(ph));
        }
        bundle.groups.push_back(std::move(group));
    }

    if (bundle.groups.size() != 2)
        throw AuditError(ErrorCode::ParseError, "bundle must define exactly two identity groups");
    for (const auto& g : bundle.groups) {
        size_t expected = g.name == GroupName::Queer ? 20 : 12;
        if (g.phrases.size() != expected)
            throw AuditError(ErrorCode::ParseError,
                             std::string(group_name(g.name)) + " group must have " +
                                 std::to_string(expected) + " phrases, got " +
                                 std::to_string(g.phrases.size()));
    }
    if (bundle.groups[0].name == bundle.groups[1].name)
        throw AuditError(ErrorCode::ParseError, "both identity groups have the same name");

    std::set<std::string> seen_ids;
    std::map<std::pair<int, int>, int> pair_counts;
    for (const auto& jt : doc.at("templates")) {
        PromptTemplate t;
        t.id = jt.at("id").get<std::string>();
        t.context = parse_context(jt.at("context").get<std::string>());
        t.role = parse_role(jt.at("role").get<std::string>());
        t.system_template = jt.at("system_template").get<std::string>();
        t.user_turn = jt.at("user_turn").get<std::string>();
        if (!seen_ids.insert(t.id).second)
            throw AuditError(ErrorCode::ParseError, "duplicate template id: " + t.id);
        t.slots = scan_slots(t.system_template);
        int identity_slots = 0;
        for (const auto& slot : t.slots) {
            if (std::find(kAllowedSlots.begin(), kAllowedSlots.end(), slot) == kAllowedSlots.end())
                throw AuditError(ErrorCode::UnknownSlot,
                                 "unknown slot {" + slot + "} in template " + t.id);
            if (slot == "identity_phrase") ++identity_slots;
        }
        if (identity_slots != 1)
            throw AuditError(ErrorCode::ParseError,
                             "template " + t.id + " must use {identity_phrase} exactly once");
        if (!scan_slots(t.user_turn).empty())
            throw AuditError(ErrorCode::UnknownSlot, "user_turn of " + t.id + " must not contain slots");
        pair_counts[{static_cast<int>(t.context), static_cast<int>(t.role)}]++;
        bundle.templates.push_back(std::move(t));
    }

    if (pair_counts.size() != 10)
        throw AuditError(ErrorCode::TemplateCount, "bundle must cover all 10 (context, role) pairs");
    for (const auto& [key, count] : pair_counts) {
        if (count != 3)
            throw AuditError(ErrorCode::TemplateCount,
                             std::string("(") + context_name(static_cast<Context>(key.first)) + ", " +
                                 role_name(static_cast<Role>(key.second)) + ") has " +
                                 std::to_string(count) + " templates, expected 3");
    }
    return bundle;
}

Bundle load_bundle(const std::string& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw AuditError(ErrorCode::ParseError, "bundle " + path + ": " + e.what());
    }
    return parse_bundle(doc);
}

RenderedPrompt render(const PromptTemplate& tmpl, const IdentityPhrase& identity) {
    const int series = series_index(identity.pronouns);
    std::string system;
    system.reserve(tmpl.system_template.size() + identity.text.size());
    size_t i = 0;
    const std::string& src = tmpl.system_template;
    while (i < src.size()) {
        if (src[i] != '{') {
            system.push_back(src[i++]);
            continue;
        }
        size_t close = src.find('}', i);
        if (close == std::string::npos)
            throw AuditError(ErrorCode::UnknownSlot, "unterminated slot marker in template " + tmpl.id);
        std::string slot = src.substr(i + 1, close - i - 1);
        if (slot == "identity_phrase") {
            fix_article(system, identity.text);
            system += identity.text;
        } else if (slot == "pronoun_subjective") {
            system += identity.pronouns.subjective;
        } else if (slot == "pronoun_objective") {
            system += identity.pronouns.objective;
        } else if (slot == "pronoun_possessive_det") {
            system += identity.pronouns.possessive_det;
        } else if (slot.find('|') != std::string::npos) {
            auto options = split(slot, '|');
            if (options.size() != 3)
                throw AuditError(ErrorCode::UnknownSlot,
                                 "alternation {" + slot + "} must have three options");
            system += options[static_cast<size_t>(series)];
        } else {
            throw AuditError(ErrorCode::UnknownSlot, "unknown slot {" + slot + "} in template " + tmpl.id);
        }
        i = close + 1;
    }

    RenderedPrompt out;
    out.prompt_id = fnv1a_128(tmpl.id + '\x1f' + identity.text).hex();
    out.messages = {{"system", std::move(system)}, {"user", tmpl.user_turn}};
    out.identity = identity;
    out.template_id = tmpl.id;
    out.context = tmpl.context;
    out.role = tmpl.role;
    return out;
}

std::vector<RenderedPrompt> matrix(const std::vector<IdentityGroup>& groups,
                                   const std::vector<PromptTemplate>& templates) {
    std::vector<const PromptTemplate*> ordered_templates;
    ordered_templates.reserve(templates.size());
    for (const auto& t : templates) ordered_templates.push_back(&t);
    std::stable_sort(ordered_templates.begin(), ordered_templates.end(),
                     [](const PromptTemplate* a, const PromptTemplate* b) {
                         if (a->context != b->context) return a->context < b->context;
                         if (a->role != b->role) return a->role < b->role;
                         return a->id < b->id;
                     });

    std::vector<const IdentityGroup*> ordered_groups;
    ordered_groups.reserve(groups.size());
    for (const auto& g : groups) ordered_groups.push_back(&g);
    std::stable_sort(ordered_groups.begin(), ordered_groups.end(),
                     [](const IdentityGroup* a, const IdentityGroup* b) { return a->name < b->name; });

    std::vector<RenderedPrompt> out;
    for (const PromptTemplate* t : ordered_templates)
        for (const IdentityGroup* g : ordered_groups)
            for (const IdentityPhrase& ph : g->phrases)
                out.push_back(render(*t, ph));
    return out;
}

} // namespace audit
