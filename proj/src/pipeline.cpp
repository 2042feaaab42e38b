#include "audit/pipeline.hpp"

#include "audit/corpus_store.hpp"
#include "audit/judge_audit.hpp"
#include "audit/lexical_audit.hpp"
#include "audit/mock_backend.hpp"
#include "audit/report.hpp"
#include "audit/topic_audit.hpp"
#include "audit/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include <fcntl.h>
#include <signal.h>
#include <unistd.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace audit {
namespace {

bool has_hypothesis(const RunConfig& cfg, const std::string& h) {
    return std::find(cfg.hypotheses.begin(), cfg.hypotheses.end(), h) != cfg.hypotheses.end();
}

std::string bundle_digest(const std::string& bundle_path) {
    return fnv1a_128(read_file(bundle_path)).hex();
}

json decoding_json(const DecodingConfig& d) {
    json j{{"temperature", d.temperature}, {"max_tokens", d.max_tokens}, {"top_p", d.top_p}};
    if (d.seed) j["seed"] = *d.seed;
    return j;
}

// Creates the manifest on first use; on resume, refuses to mix corpora built
// from a different bundle or seed (unless forced).
json open_manifest(CorpusStore& store, const RunConfig& cfg, const std::string& hash) {
    if (!store.has_manifest()) {
        json m{{"schema_version", 1},
               {"run_id", cfg.run_id},
               {"bundle_path", cfg.bundle_path},
               {"bundle_hash", hash},
               {"config_digest", cfg.digest()},
               {"seed", cfg.seed},
               {"n_per_prompt", cfg.n_per_prompt},
               {"judge_votes", cfg.judge_votes},
               {"topic_samples", cfg.topic_samples},
               {"n_permutations", cfg.n_permutations},
               {"hypotheses", cfg.hypotheses},
               {"generation_model", cfg.generation.model_id},
               {"judge_model", cfg.judge.model_id},
               {"counts", json::object()}};
        store.write_manifest(m);
        return m;
    }
    json m = store.read_manifest();
    if (!cfg.force) {
        std::string stored = m.value("bundle_hash", "");
        if (stored != hash)
            throw AuditError(ErrorCode::BundleMismatch,
                             "bundle hash " + hash + " does not match this run's manifest (" +
                                 stored + "); pass --force to override");
        if (m.contains("seed") && m["seed"].get<std::int64_t>() != cfg.seed)
            throw AuditError(ErrorCode::ConfigError,
                             "seed " + std::to_string(cfg.seed) +
                                 " does not match the seed this run was started with (" +
                                 m["seed"].dump() + ")");
    }
    return m;
}

void update_counts(CorpusStore& store, json& manifest) {
    for (Purpose p : {Purpose::Generation, Purpose::JudgeQ1, Purpose::JudgeQ2, Purpose::JudgeQ3,
                      Purpose::JudgeQ4, Purpose::Topics})
        manifest["counts"][purpose_name(p)] = store.count(p);
    store.write_manifest(manifest);
}

struct StageFailure {
    std::size_t index = 0;
    ErrorCode code = ErrorCode::EndpointFailure;
    std::string message;
};

// Runs produce(i) for i in [0, n) on a bounded worker pool, committing results
// serially in index order so corpus appends stay deterministic. Stops
// scheduling after an auth/config failure; transient per-call failures are
// collected so completed work is still persisted.
std::vector<StageFailure> run_stage(std::size_t n, int workers, const std::string& label,
                                    const std::function<json(std::size_t)>& produce,
                                    const std::function<void(std::size_t, json&&)>& commit) {
    std::vector<StageFailure> failures;
    if (n == 0) return failures;
    workers = std::max(1, workers);
    const std::size_t chunk = std::max<std::size_t>((std::size_t)workers * 4, 32);

    struct Slot {
        json record;
        bool failed = false;
        ErrorCode code = ErrorCode::EndpointFailure;
        std::string message;
    };

    for (std::size_t lo = 0; lo < n; lo += chunk) {
        const std::size_t hi = std::min(n, lo + chunk);
        std::vector<Slot> slots(hi - lo);
        std::atomic<std::size_t> next{lo};
        auto work = [&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= hi) break;
                Slot& slot = slots[i - lo];
                try {
                    slot.record = produce(i);
                } catch (const AuditError& e) {
                    slot.failed = true;
                    slot.code = e.code();
                    slot.message = e.what();
                } catch (const std::exception& e) {
                    slot.failed = true;
                    slot.message = e.what();
                }
            }
        };
        std::vector<std::thread> pool;
        const std::size_t nthreads = std::min<std::size_t>((std::size_t)workers, hi - lo);
        pool.reserve(nthreads);
        for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();

        bool fatal = false;
        for (std::size_t i = lo; i < hi; ++i) {
            Slot& slot = slots[i - lo];
            if (slot.failed) {
                failures.push_back({i, slot.code, slot.message});
                if (slot.code == ErrorCode::AuthError || slot.code == ErrorCode::ConfigError)
                    fatal = true;
            } else {
                commit(i, std::move(slot.record));
            }
        }
        std::fprintf(stderr, "%s: %zu/%zu\n", label.c_str(), hi, n);
        if (fatal) break;
    }
    return failures;
}

void throw_if_failed(const std::vector<StageFailure>& failures, const std::string& label) {
    if (failures.empty()) return;
    throw AuditError(failures[0].code, label + ": " + std::to_string(failures.size()) +
                                           " call(s) failed; first: " + failures[0].message);
}

void require_complete(const CorpusStore& store, const std::vector<RenderedPrompt>& prompts,
                      const std::string& model_id, int n, Purpose purpose) {
    std::vector<CorpusKey> missing = store.missing(prompts, model_id, n, purpose);
    if (missing.empty()) return;
    std::string msg = std::string(purpose_name(purpose)) + " corpus is missing " +
                      std::to_string(missing.size()) + " record(s); first:";
    const std::size_t show = std::min<std::size_t>(missing.size(), 10);
    for (std::size_t i = 0; i < show; ++i) msg += " " + missing[i].describe();
    throw AuditError(ErrorCode::IncompleteCorpus, msg);
}

struct GenInfo {
    std::string text;
    Context context = Context::Housing;
    Role role = Role::IdentityUser;
    std::string group;
    std::string model_id;
};

std::map<std::pair<std::string, int>, GenInfo> generation_index(const CorpusStore& store) {
    std::map<std::pair<std::string, int>, GenInfo> index;
    for (const json& rec : store.scan(Purpose::Generation)) {
        GenInfo info;
        info.text = rec.at("text").get<std::string>();
        info.context = parse_context(rec.at("context").get<std::string>());
        info.role = parse_role(rec.at("role").get<std::string>());
        info.group = rec.at("group").get<std::string>();
        info.model_id = rec.at("model_id").get<std::string>();
        index[{rec.at("prompt_id").get<std::string>(), rec.at("sample_index").get<int>()}] =
            std::move(info);
    }
    return index;
}

Purpose purpose_for(QuestionId q) {
    switch (q) {
    case QuestionId::Q1: return Purpose::JudgeQ1;
    case QuestionId::Q2: return Purpose::JudgeQ2;
    case QuestionId::Q3: return Purpose::JudgeQ3;
    default: return Purpose::JudgeQ4;
    }
}

std::vector<QuestionId> enabled_questions(const RunConfig& cfg) {
    std::vector<QuestionId> qs;
    if (has_hypothesis(cfg, "h2"))
        qs.insert(qs.end(), {QuestionId::Q1, QuestionId::Q2, QuestionId::Q3});
    if (has_hypothesis(cfg, "h3")) qs.push_back(QuestionId::Q4);
    return qs;
}

} // namespace

std::unique_ptr<Backend> make_backend(const EndpointConfig& endpoint) {
    if (!endpoint.mock_profile.empty()) {
        MockProfile profile = MockProfile::load(endpoint.mock_profile);
        return std::make_unique<MockBackend>(std::move(profile), endpoint.model_id);
    }
    ModelEndpoint e;
    e.model_id = endpoint.model_id;
    e.base_url = endpoint.base_url;
    e.api_key_env = endpoint.api_key_env;
    e.request_timeout_s = endpoint.request_timeout_s;
    e.max_concurrency = endpoint.max_concurrency;
    e.max_retries = endpoint.max_retries;
    return std::make_unique<HttpBackend>(std::move(e));
}

RunLock::RunLock(const std::string& run_dir) {
    fs::create_directories(run_dir);
    path_ = (fs::path(run_dir) / ".lock").string();
    for (int attempt = 0; attempt < 2; ++attempt) {
        int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd >= 0) {
            std::string body = std::to_string(::getpid()) + "\n";
            ssize_t n = ::write(fd, body.c_str(), body.size());
            (void)n;
            ::close(fd);
            held_ = true;
            return;
        }
        std::string body;
        try {
            body = read_file(path_);
        } catch (const AuditError&) {
        }
        long pid = std::strtol(body.c_str(), nullptr, 10);
        bool alive = pid > 0 && pid != (long)::getpid() &&
                     (::kill((pid_t)pid, 0) == 0 || errno == EPERM);
        if (alive)
            throw AuditError(ErrorCode::LockHeld, "run directory is locked by running pid " +
                                                      std::to_string(pid) + " (" + path_ + ")");
        std::error_code ec;
        fs::remove(path_, ec); // stale lock from a dead process
    }
    throw AuditError(ErrorCode::LockHeld, "could not acquire " + path_);
}

RunLock::~RunLock() {
    if (held_) {
        std::error_code ec;
        fs::remove(path_, ec);
    }
}

int exit_code_for(ErrorCode code) {
    switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::ParseError:
    case ErrorCode::InvalidProfile:
    case ErrorCode::UnknownSlot:
    case ErrorCode::DuplicatePhrase:
    case ErrorCode::TemplateCount:
    case ErrorCode::BundleMismatch: return 2;
    case ErrorCode::IncompleteCorpus: return 3;
    case ErrorCode::AuthError:
    case ErrorCode::RateLimited:
    case ErrorCode::Timeout:
    case ErrorCode::EndpointFailure:
    case ErrorCode::AllSamplesFailed:
    case ErrorCode::MalformedResponse: return 4;
    default: return 1;
    }
}

int cmd_generate(const RunConfig& cfg) {
    Bundle bundle = load_bundle(cfg.bundle_path);
    std::vector<RenderedPrompt> prompts = matrix(bundle.groups, bundle.templates);
    std::map<std::string, const RenderedPrompt*> by_id;
    for (const auto& p : prompts) by_id[p.prompt_id] = &p;

    RunLock lock(cfg.run_dir());
    CorpusStore store(cfg.run_dir());
    const std::string hash = bundle_digest(cfg.bundle_path);
    json manifest = open_manifest(store, cfg, hash);

    auto backend = make_backend(cfg.generation);
    std::vector<CorpusKey> missing =
        store.missing(prompts, backend->model_id(), cfg.n_per_prompt, Purpose::Generation);
    std::fprintf(stderr, "generate: %zu stored, %zu missing of %zu total\n",
                 store.count(Purpose::Generation), missing.size(),
                 prompts.size() * (std::size_t)cfg.n_per_prompt);

    auto produce = [&](std::size_t i) -> json {
        const CorpusKey& key = missing[i];
        const RenderedPrompt& prompt = *by_id.at(key.prompt_id);
        DecodingConfig d = cfg.decoding;
        d.seed = cfg.seed + key.sample_index;
        std::string text = backend->complete(prompt.messages, d, key.sample_index);
        return json{{"prompt_id", key.prompt_id},
                    {"model_id", key.model_id},
                    {"sample_index", key.sample_index},
                    {"sub_index", 0},
                    {"text", text},
                    {"created_at", backend->now()},
                    {"decoding", decoding_json(d)},
                    {"template_id", prompt.template_id},
                    {"context", context_name(prompt.context)},
                    {"role", role_name(prompt.role)},
                    {"group", group_name(prompt.identity.group)},
                    {"identity", prompt.identity.text}};
    };
    auto commit = [&](std::size_t, json&& rec) {
        store.append(Purpose::Generation, std::move(rec));
    };
    auto failures =
        run_stage(missing.size(), backend->max_concurrency(), "generation", produce, commit);
    store.flush_all();
    update_counts(store, manifest);
    throw_if_failed(failures, "generation");
    std::fprintf(stderr, "generate: corpus complete (%zu records)\n",
                 store.count(Purpose::Generation));
    return 0;
}

int cmd_judge(const RunConfig& cfg) {
    std::vector<QuestionId> wanted = enabled_questions(cfg);
    if (wanted.empty()) {
        std::fprintf(stderr, "judge: neither h2 nor h3 is enabled; nothing to do\n");
        return 0;
    }
    Bundle bundle = load_bundle(cfg.bundle_path);
    std::vector<RenderedPrompt> prompts = matrix(bundle.groups, bundle.templates);
    std::vector<JudgeQuestion> questions = load_questions(cfg.judge_examples_dir);

    RunLock lock(cfg.run_dir());
    CorpusStore store(cfg.run_dir());
    const std::string hash = bundle_digest(cfg.bundle_path);
    json manifest = open_manifest(store, cfg, hash);
    require_complete(store, prompts, cfg.generation.model_id, cfg.n_per_prompt,
                     Purpose::Generation);

    auto gen = generation_index(store);
    auto backend = make_backend(cfg.judge);

    for (QuestionId qid : wanted) {
        const JudgeQuestion* question = nullptr;
        for (const auto& q : questions)
            if (q.id == qid) question = &q;
        const Purpose purpose = purpose_for(qid);
        std::vector<CorpusKey> missing =
            store.missing(prompts, backend->model_id(), cfg.judge_votes, purpose);
        const std::string label = std::string("judge ") + question_name(qid);
        std::fprintf(stderr, "%s: %zu stored, %zu missing\n", label.c_str(),
                     store.count(purpose), missing.size());

        auto produce = [&](std::size_t i) -> json {
            const CorpusKey& key = missing[i];
            const GenInfo& info = gen.at({key.prompt_id, key.sample_index});
            ChatMessages messages =
                build_judge_prompt(*question, info.text, info.role, info.context);
            std::string answer, justification, raw;
            // A reply with no recognizable YES/NO gets a few fresh draws, then
            // the vote is stored as an abstention.
            for (int attempt = 0;; ++attempt) {
                const int call_index = key.sub_index + attempt * 1000;
                DecodingConfig d = cfg.decoding;
                d.seed = cfg.seed + call_index;
                raw = backend->complete(messages, d, call_index);
                try {
                    auto [verdict, why] = parse_verdict(raw);
                    answer = verdict == Verdict::Yes ? "yes" : "no";
                    justification = why;
                    break;
                } catch (const AuditError& e) {
                    if (e.code() != ErrorCode::VerdictParseFailure) throw;
                    if (attempt >= 3) {
                        answer = "abstain";
                        break;
                    }
                }
            }
            return json{{"prompt_id", key.prompt_id},
                        {"model_id", key.model_id},
                        {"sample_index", key.sample_index},
                        {"sub_index", key.sub_index},
                        {"question", question_name(qid)},
                        {"answer", answer},
                        {"justification", justification},
                        {"raw", raw},
                        {"created_at", backend->now()},
                        {"generation_model", info.model_id},
                        {"context", context_name(info.context)},
                        {"role", role_name(info.role)},
                        {"group", info.group}};
        };
        auto commit = [&](std::size_t, json&& rec) { store.append(purpose, std::move(rec)); };
        auto failures =
            run_stage(missing.size(), backend->max_concurrency(), label, produce, commit);
        store.flush_all();
        update_counts(store, manifest);
        throw_if_failed(failures, label);
    }
    std::fprintf(stderr, "judge: corpus complete\n");
    return 0;
}

int cmd_topics(const RunConfig& cfg) {
    if (!has_hypothesis(cfg, "h4")) {
        std::fprintf(stderr, "topics: h4 is not enabled; nothing to do\n");
        return 0;
    }
    Bundle bundle = load_bundle(cfg.bundle_path);
    std::vector<RenderedPrompt> prompts = matrix(bundle.groups, bundle.templates);

    RunLock lock(cfg.run_dir());
    CorpusStore store(cfg.run_dir());
    const std::string hash = bundle_digest(cfg.bundle_path);
    json manifest = open_manifest(store, cfg, hash);
    require_complete(store, prompts, cfg.generation.model_id, cfg.n_per_prompt,
                     Purpose::Generation);

    auto gen = generation_index(store);
    auto backend = make_backend(cfg.judge);
    std::vector<CorpusKey> missing =
        store.missing(prompts, backend->model_id(), cfg.topic_samples, Purpose::Topics);
    std::fprintf(stderr, "topics: %zu stored, %zu missing\n", store.count(Purpose::Topics),
                 missing.size());

    auto produce = [&](std::size_t i) -> json {
        const CorpusKey& key = missing[i];
        const GenInfo& info = gen.at({key.prompt_id, key.sample_index});
        ChatMessages messages{{"system", kTopicPrompt}, {"user", info.text}};
        std::vector<std::string> topics;
        std::string raw;
        // Fewer than 3 parsed topics earns one fresh draw, then the draw is
        // stored as discarded so it is never re-attempted.
        for (int attempt = 0; attempt < 2; ++attempt) {
            const int call_index =
                attempt == 0 ? key.sub_index : cfg.topic_samples + key.sub_index;
            DecodingConfig d = cfg.decoding;
            d.seed = cfg.seed + call_index;
            raw = backend->complete(messages, d, call_index);
            topics = parse_topic_list(raw);
            if (topics.size() >= 3) break;
        }
        bool discarded = topics.size() < 3;
        if (discarded) topics.clear();
        return json{{"prompt_id", key.prompt_id},
                    {"model_id", key.model_id},
                    {"sample_index", key.sample_index},
                    {"sub_index", key.sub_index},
                    {"topics", topics},
                    {"discarded", discarded},
                    {"raw", raw},
                    {"created_at", backend->now()},
                    {"generation_model", info.model_id},
                    {"context", context_name(info.context)},
                    {"role", role_name(info.role)},
                    {"group", info.group}};
    };
    auto commit = [&](std::size_t, json&& rec) { store.append(Purpose::Topics, std::move(rec)); };
    auto failures =
        run_stage(missing.size(), backend->max_concurrency(), "topics", produce, commit);
    store.flush_all();
    update_counts(store, manifest);
    throw_if_failed(failures, "topics");
    std::fprintf(stderr, "topics: corpus complete (%zu records)\n", store.count(Purpose::Topics));
    return 0;
}

int cmd_analyze(const RunConfig& cfg) {
    Bundle bundle = load_bundle(cfg.bundle_path);
    std::vector<RenderedPrompt> prompts = matrix(bundle.groups, bundle.templates);

    RunLock lock(cfg.run_dir());
    CorpusStore store(cfg.run_dir());
    if (!store.has_manifest())
        throw AuditError(ErrorCode::IncompleteCorpus,
                         "no manifest under " + cfg.run_dir() + "; run generate first");
    json manifest = store.read_manifest();
    const std::string hash = bundle_digest(cfg.bundle_path);
    if (!cfg.force && manifest.value("bundle_hash", "") != hash)
        throw AuditError(ErrorCode::BundleMismatch,
                         "bundle hash " + hash + " does not match this run's manifest (" +
                             manifest.value("bundle_hash", "") + "); pass --force to override");

    require_complete(store, prompts, cfg.generation.model_id, cfg.n_per_prompt,
                     Purpose::Generation);
    for (QuestionId qid : enabled_questions(cfg))
        require_complete(store, prompts, cfg.judge.model_id, cfg.judge_votes, purpose_for(qid));
    if (has_hypothesis(cfg, "h4"))
        require_complete(store, prompts, cfg.judge.model_id, cfg.topic_samples, Purpose::Topics);

    AuditReport report;
    report.hypotheses.insert(cfg.hypotheses.begin(), cfg.hypotheses.end());
    report.provenance = json{{"run_id", cfg.run_id},
                             {"seed", cfg.seed},
                             {"bundle_hash", hash},
                             {"config_digest", cfg.digest()},
                             {"generation_model", cfg.generation.model_id},
                             {"judge_model", cfg.judge.model_id},
                             {"n_prompts", prompts.size()},
                             {"n_per_prompt", cfg.n_per_prompt},
                             {"judge_votes", cfg.judge_votes},
                             {"topic_samples", cfg.topic_samples},
                             {"n_permutations", cfg.n_permutations},
                             {"counts", manifest.value("counts", json::object())}};

    if (has_hypothesis(cfg, "h1")) {
        TermSet termset = make_term_set();
        std::map<std::tuple<std::string, int, int, std::string>, std::vector<std::string>> cells;
        std::map<std::string, std::vector<std::string>> overall;
        for (const json& rec : store.scan(Purpose::Generation)) {
            std::string model = rec.at("model_id").get<std::string>();
            int ctx = (int)parse_context(rec.at("context").get<std::string>());
            int role = (int)parse_role(rec.at("role").get<std::string>());
            std::string group = rec.at("group").get<std::string>();
            std::string text = rec.at("text").get<std::string>();
            cells[{std::move(model), ctx, role, group}].push_back(text);
            overall[group].push_back(std::move(text));
        }
        for (const auto& [key, texts] : cells) {
            LexicalCell cell;
            cell.model = std::get<0>(key);
            cell.context = (Context)std::get<1>(key);
            cell.role = (Role)std::get<2>(key);
            cell.score = group_scores(texts, std::get<3>(key), termset);
            report.lexical.push_back(std::move(cell));
        }
        for (const auto& [group, texts] : overall)
            report.lexical_overall[group] = group_scores(texts, group, termset);
    }

    std::vector<QuestionId> questions = enabled_questions(cfg);
    if (!questions.empty()) {
        std::map<std::tuple<std::string, int, int, int, std::string>, VerdictCounts> counts;
        std::map<std::pair<int, std::string>, VerdictCounts> pooled;
        for (QuestionId qid : questions) {
            for (const json& rec : store.scan(purpose_for(qid))) {
                std::string model = rec.at("generation_model").get<std::string>();
                int ctx = (int)parse_context(rec.at("context").get<std::string>());
                int role = (int)parse_role(rec.at("role").get<std::string>());
                std::string group = rec.at("group").get<std::string>();
                std::string answer = rec.at("answer").get<std::string>();
                auto bump = [&](VerdictCounts& c) {
                    if (answer == "yes")
                        ++c.yes;
                    else if (answer == "no")
                        ++c.no;
                    else
                        ++c.abstain;
                };
                bump(counts[{std::move(model), (int)qid, ctx, role, group}]);
                bump(pooled[{(int)qid, group}]);
            }
        }
        std::map<std::tuple<std::string, int, int, int>, std::map<std::string, JudgeScore>> cells;
        for (const auto& [key, vc] : counts) {
            if (vc.yes + vc.no == 0) continue; // every vote abstained
            const auto& [model, q, ctx, role, group] = key;
            cells[{model, q, ctx, role}][group] =
                score(vc, group, (QuestionId)q, (Context)ctx, (Role)role);
        }
        for (const auto& [key, groups] : cells) {
            double delta = 0.0;
            auto qi = groups.find("Queer");
            auto ni = groups.find("NotQueer");
            if (qi != groups.end() && ni != groups.end())
                delta = delta_queer(qi->second, ni->second);
            for (const auto& [group, s] : groups) {
                (void)group;
                report.judge.push_back({std::get<0>(key), s, delta});
            }
        }
        for (QuestionId qid : questions) {
            auto qi = pooled.find({(int)qid, "Queer"});
            auto ni = pooled.find({(int)qid, "NotQueer"});
            if (qi == pooled.end() || ni == pooled.end()) continue;
            if (qi->second.yes + qi->second.no == 0 || ni->second.yes + ni->second.no == 0)
                continue;
            JudgeScore sq =
                score(qi->second, "Queer", qid, Context::Housing, Role::IdentityUser);
            JudgeScore sn =
                score(ni->second, "NotQueer", qid, Context::Housing, Role::IdentityUser);
            report.overall_delta[question_name(qid)] = delta_queer(sq, sn);
        }
    }

    if (has_hypothesis(cfg, "h4")) {
        std::map<std::tuple<std::string, int, int>, std::vector<std::pair<int, TopicDistribution>>>
            cells;
        std::map<std::tuple<int, int, std::string>, std::vector<TopicDistribution>> pools;
        std::vector<json> rows = store.scan(Purpose::Topics);
        std::size_t i = 0;
        while (i < rows.size()) {
            const std::string pid = rows[i].at("prompt_id").get<std::string>();
            const int sidx = rows[i].at("sample_index").get<int>();
            std::vector<TopicSample> samples;
            std::size_t j = i;
            for (; j < rows.size(); ++j) {
                const json& r = rows[j];
                if (r.at("prompt_id").get<std::string>() != pid ||
                    r.at("sample_index").get<int>() != sidx)
                    break;
                if (r.value("discarded", false)) continue;
                TopicSample ts;
                ts.sample_index = r.at("sub_index").get<int>();
                for (const auto& t : r.at("topics")) ts.topics.push_back(t.get<std::string>());
                if (!ts.topics.empty()) samples.push_back(std::move(ts));
            }
            if (!samples.empty()) {
                const json& head = rows[i];
                TopicDistribution dist = response_distribution(samples);
                std::string model = head.at("generation_model").get<std::string>();
                int ctx = (int)parse_context(head.at("context").get<std::string>());
                int role = (int)parse_role(head.at("role").get<std::string>());
                std::string group = head.at("group").get<std::string>();
                int label = group == "Queer" ? 0 : 1;
                cells[{std::move(model), ctx, role}].push_back({label, dist});
                pools[{ctx, role, std::move(group)}].push_back(std::move(dist));
            }
            i = j;
        }
        for (const auto& [key, dists] : cells) {
            TopicCell cell;
            cell.model = std::get<0>(key);
            cell.context = (Context)std::get<1>(key);
            cell.role = (Role)std::get<2>(key);
            const std::uint64_t cell_seed = splitmix64(
                (std::uint64_t)cfg.seed ^ fnv1a_64(cell.model + "|" + context_name(cell.context) +
                                                   "|" + role_name(cell.role)));
            cell.result = permutation_test(dists, cfg.n_permutations, cell_seed);
            report.topics.push_back(std::move(cell));
        }
        for (const auto& [key, dists] : pools) {
            TopTopics entry;
            entry.context = (Context)std::get<0>(key);
            entry.role = (Role)std::get<1>(key);
            entry.group = std::get<2>(key);
            TopicDistribution gd = group_distribution(dists);
            entry.topics.assign(gd.mass.begin(), gd.mass.end());
            std::sort(entry.topics.begin(), entry.topics.end(),
                      [](const auto& a, const auto& b) {
                          if (a.second != b.second) return a.second > b.second;
                          return a.first < b.first;
                      });
            report.top_topics.push_back(std::move(entry));
        }
    }

    const std::string report_dir = (fs::path(cfg.run_dir()) / "report").string();
    write_report(report, report_dir);
    std::string summary = summary_table(report);
    std::fputs(summary.c_str(), stdout);
    std::fprintf(stdout, "report written to %s\n", report_dir.c_str());
    return 0;
}

int run_command(const std::string& command, const RunConfig& cfg) {
    try {
        cfg.validate();
        if (command == "generate") return cmd_generate(cfg);
        if (command == "judge") return cmd_judge(cfg);
        if (command == "topics") return cmd_topics(cfg);
        if (command == "analyze") return cmd_analyze(cfg);
        throw AuditError(ErrorCode::ConfigError, "unknown command: " + command);
    } catch (const AuditError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

} // namespace audit
