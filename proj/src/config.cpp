#include "audit/config.hpp"

#include "audit/util.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <set>
#include <sstream>

namespace audit {

namespace {

bool looks_like_integer(const std::string& s) {
    if (s.empty()) return false;
    size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

bool looks_like_float(const std::string& s) {
    if (s.empty()) return false;
    char* end = nullptr;
    std::strtod(s.c_str(), &end);
    return end && *end == '\0';
}

std::string parse_quoted(const std::string& raw, const std::string& where) {
    if (raw.size() < 2 || raw.front() != '"' || raw.back() != '"')
        throw AuditError(ErrorCode::ConfigError, where + ": expected a double-quoted string");
    std::string out;
    for (size_t i = 1; i + 1 < raw.size(); ++i) {
        char c = raw[i];
        if (c == '\\') {
            if (i + 2 >= raw.size())
                throw AuditError(ErrorCode::ConfigError, where + ": dangling escape");
            char next = raw[++i];
            if (next == '"') out.push_back('"');
            else if (next == '\\') out.push_back('\\');
            else if (next == 'n') out.push_back('\n');
            else if (next == 't') out.push_back('\t');
            else throw AuditError(ErrorCode::ConfigError, where + ": unsupported escape");
        } else if (c == '"') {
            throw AuditError(ErrorCode::ConfigError, where + ": stray quote inside string");
        } else {
            out.push_back(c);
        }
    }
    return out;
}

ConfigValue parse_value(const std::string& raw, const std::string& where) {
    if (raw.empty()) throw AuditError(ErrorCode::ConfigError, where + ": empty value");
    if (raw.front() == '"') return parse_quoted(raw, where);
    if (raw.front() == '[') {
        if (raw.back() != ']')
            throw AuditError(ErrorCode::ConfigError, where + ": unterminated array");
        std::vector<std::string> items;
        std::string body = raw.substr(1, raw.size() - 2);
        size_t i = 0;
        while (i < body.size()) {
            while (i < body.size() && (body[i] == ' ' || body[i] == '\t' || body[i] == ',')) ++i;
            if (i >= body.size()) break;
            if (body[i] != '"')
                throw AuditError(ErrorCode::ConfigError, where + ": arrays hold quoted strings only");
            size_t close = i + 1;
            while (close < body.size() && body[close] != '"') {
                if (body[close] == '\\') ++close;
                ++close;
            }
            if (close >= body.size())
                throw AuditError(ErrorCode::ConfigError, where + ": unterminated string in array");
            items.push_back(parse_quoted(body.substr(i, close - i + 1), where));
            i = close + 1;
        }
        return items;
    }
    if (raw == "true") return true;
    if (raw == "false") return false;
    if (looks_like_integer(raw)) return static_cast<std::int64_t>(std::stoll(raw));
    if (looks_like_float(raw)) return std::stod(raw);
    throw AuditError(ErrorCode::ConfigError, where + ": cannot parse value '" + raw + "'");
}

// Strips comments that start outside quoted strings.
std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (c == '\\' && in_string) {
            ++i;
            continue;
        }
        if (c == '"') in_string = !in_string;
        else if (c == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

} // namespace

ConfigDoc parse_config_text(const std::string& text) {
    ConfigDoc doc;
    std::string section;
    int line_no = 0;
    std::istringstream in(text);
    std::string raw_line;
    while (std::getline(in, raw_line)) {
        ++line_no;
        std::string line(trim(strip_comment(raw_line)));
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(line_no);
        if (line.front() == '[') {
            if (line.back() != ']')
                throw AuditError(ErrorCode::ConfigError, where + ": unterminated section header");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            if (section.empty())
                throw AuditError(ErrorCode::ConfigError, where + ": empty section name");
            doc[section];
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw AuditError(ErrorCode::ConfigError, where + ": expected key = value");
        std::string key(trim(line.substr(0, eq)));
        std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) throw AuditError(ErrorCode::ConfigError, where + ": empty key");
        if (section.empty())
            throw AuditError(ErrorCode::ConfigError, where + ": key outside any [section]");
        if (doc[section].count(key))
            throw AuditError(ErrorCode::ConfigError, where + ": duplicate key " + key);
        doc[section][key] = parse_value(value, where + " (" + section + "." + key + ")");
    }
    return doc;
}

namespace {

template <typename T>
T get_as(const ConfigValue& v, const std::string& where);

template <>
std::string get_as<std::string>(const ConfigValue& v, const std::string& where) {
    if (auto* s = std::get_if<std::string>(&v)) return *s;
    throw AuditError(ErrorCode::ConfigError, where + ": expected a string");
}

template <>
std::int64_t get_as<std::int64_t>(const ConfigValue& v, const std::string& where) {
    if (auto* i = std::get_if<std::int64_t>(&v)) return *i;
    throw AuditError(ErrorCode::ConfigError, where + ": expected an integer");
}

template <>
double get_as<double>(const ConfigValue& v, const std::string& where) {
    if (auto* d = std::get_if<double>(&v)) return *d;
    if (auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    throw AuditError(ErrorCode::ConfigError, where + ": expected a number");
}

template <>
std::vector<std::string> get_as<std::vector<std::string>>(const ConfigValue& v,
                                                          const std::string& where) {
    if (auto* a = std::get_if<std::vector<std::string>>(&v)) return *a;
    throw AuditError(ErrorCode::ConfigError, where + ": expected an array of strings");
}

struct SectionReader {
    const std::string section;
    const std::map<std::string, ConfigValue>* values;
    std::set<std::string> consumed;

    template <typename T>
    void read(const char* key, T& into) {
        if (!values) return;
        auto it = values->find(key);
        if (it == values->end()) return;
        into = get_as<T>(it->second, section + "." + key);
        consumed.insert(key);
    }

    void read_int(const char* key, int& into) {
        std::int64_t v = into;
        read(key, v);
        into = static_cast<int>(v);
    }

    void check_unknown() const {
        if (!values) return;
        for (const auto& [key, value] : *values)
            if (!consumed.count(key))
                throw AuditError(ErrorCode::ConfigError,
                                 "unknown config key " + section + "." + key);
    }
};

void read_endpoint(const ConfigDoc& doc, const std::string& section, EndpointConfig& ep) {
    auto it = doc.find(section);
    SectionReader r{section, it == doc.end() ? nullptr : &it->second, {}};
    r.read("model_id", ep.model_id);
    r.read("base_url", ep.base_url);
    r.read("api_key_env", ep.api_key_env);
    r.read("request_timeout_s", ep.request_timeout_s);
    r.read_int("max_concurrency", ep.max_concurrency);
    r.read_int("max_retries", ep.max_retries);
    r.read("mock_profile", ep.mock_profile);
    r.check_unknown();
}

} // namespace

std::string RunConfig::run_dir() const {
    return (std::filesystem::path(output_dir) / run_id).string();
}

std::string RunConfig::digest() const {
    std::ostringstream ss;
    ss << run_id << '\x1f' << seed << '\x1f' << n_per_prompt << '\x1f' << judge_votes << '\x1f'
       << topic_samples << '\x1f' << n_permutations << '\x1f';
    for (const auto& h : hypotheses) ss << h << ',';
    ss << '\x1f' << bundle_path << '\x1f' << judge_examples_dir << '\x1f';
    for (const EndpointConfig* ep : {&generation, &judge})
        ss << ep->model_id << '\x1f' << ep->base_url << '\x1f' << ep->mock_profile << '\x1f';
    ss << decoding.temperature << '\x1f' << decoding.max_tokens << '\x1f' << decoding.top_p;
    return fnv1a_128(ss.str()).hex();
}

void RunConfig::validate() const {
    if (!seed_set)
        throw AuditError(ErrorCode::ConfigError, "seed is required ([run] seed or --seed)");
    if (run_id.empty()) throw AuditError(ErrorCode::ConfigError, "run_id must be nonempty");
    if (n_per_prompt < 1) throw AuditError(ErrorCode::ConfigError, "n_per_prompt must be >= 1");
    if (judge_votes < 1) throw AuditError(ErrorCode::ConfigError, "judge_votes must be >= 1");
    if (topic_samples < 1) throw AuditError(ErrorCode::ConfigError, "topic_samples must be >= 1");
    if (n_permutations < 100)
        throw AuditError(ErrorCode::ConfigError, "n_permutations must be >= 100");
    if (hypotheses.empty())
        throw AuditError(ErrorCode::ConfigError, "hypotheses subset must be nonempty");
    for (const auto& h : hypotheses)
        if (h != "h1" && h != "h2" && h != "h3" && h != "h4")
            throw AuditError(ErrorCode::ConfigError, "unknown hypothesis: " + h);
    if (decoding.temperature < 0)
        throw AuditError(ErrorCode::ConfigError, "temperature must be >= 0");
    if (decoding.max_tokens < 1) throw AuditError(ErrorCode::ConfigError, "max_tokens must be >= 1");
    if (!(decoding.top_p > 0.0 && decoding.top_p <= 1.0))
        throw AuditError(ErrorCode::ConfigError, "top_p must be in (0, 1]");
    for (const EndpointConfig* ep : {&generation, &judge}) {
        if (ep->mock_profile.empty() && ep->base_url.empty())
            throw AuditError(ErrorCode::ConfigError,
                             "each endpoint needs either base_url or mock_profile");
        if (ep->max_concurrency < 1)
            throw AuditError(ErrorCode::ConfigError, "max_concurrency must be >= 1");
        if (ep->max_retries < 0)
            throw AuditError(ErrorCode::ConfigError, "max_retries must be >= 0");
    }
}

RunConfig load_run_config(const std::string& path) {
    ConfigDoc doc;
    try {
        doc = parse_config_text(read_file(path));
    } catch (const AuditError& e) {
        if (e.code() == ErrorCode::IoError)
            throw AuditError(ErrorCode::ConfigError, std::string("cannot read config: ") + e.what());
        throw;
    }
    for (const auto& [section, values] : doc)
        if (section != "run" && section != "generation" && section != "judge" &&
            section != "decoding")
            throw AuditError(ErrorCode::ConfigError, "unknown config section [" + section + "]");

    RunConfig cfg;
    cfg.config_path = path;
    {
        auto it = doc.find("run");
        SectionReader r{"run", it == doc.end() ? nullptr : &it->second, {}};
        r.read("run_id", cfg.run_id);
        std::int64_t seed_value = 0;
        size_t before = r.consumed.size();
        r.read("seed", seed_value);
        if (r.consumed.size() > before) {
            cfg.seed = seed_value;
            cfg.seed_set = true;
        }
        r.read_int("n_per_prompt", cfg.n_per_prompt);
        r.read_int("judge_votes", cfg.judge_votes);
        r.read_int("topic_samples", cfg.topic_samples);
        r.read_int("n_permutations", cfg.n_permutations);
        r.read("hypotheses", cfg.hypotheses);
        r.read("output_dir", cfg.output_dir);
        r.read("bundle", cfg.bundle_path);
        r.read("judge_examples_dir", cfg.judge_examples_dir);
        r.check_unknown();
    }
    read_endpoint(doc, "generation", cfg.generation);
    read_endpoint(doc, "judge", cfg.judge);
    {
        auto it = doc.find("decoding");
        SectionReader r{"decoding", it == doc.end() ? nullptr : &it->second, {}};
        r.read("temperature", cfg.decoding.temperature);
        r.read_int("max_tokens", cfg.decoding.max_tokens);
        r.read("top_p", cfg.decoding.top_p);
        r.check_unknown();
    }
    if (cfg.generation.model_id.empty()) cfg.generation.model_id = "generation-model";
    if (cfg.judge.model_id.empty()) cfg.judge.model_id = "judge-model";

    // Sort and dedupe the hypothesis subset into canonical order.
    std::set<std::string> hs(cfg.hypotheses.begin(), cfg.hypotheses.end());
    cfg.hypotheses.assign(hs.begin(), hs.end());
    return cfg;
}

} // namespace audit
