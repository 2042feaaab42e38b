#include "audit/config.hpp"
#include "audit/errors.hpp"
#include "audit/pipeline.hpp"
#include "audit/util.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <set>
#include <string>
#include <vector>

int main(int argc, char** argv) {
    CLI::App app{"narrative-audit: batch bias audit over chat-completion endpoints"};
    app.require_subcommand(1);

    std::string config_path, run_id, hypotheses, mock;
    long long seed = 0;
    bool force = false;

    const std::pair<const char*, const char*> commands[] = {
        {"generate", "sample responses for every identity-by-template prompt"},
        {"judge", "collect YES/NO judge votes over the stored responses"},
        {"topics", "extract topic lists from the stored responses"},
        {"analyze", "score the stored corpus and write the report (no network)"},
    };
    for (const auto& [name, desc] : commands) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", config_path, "run configuration file")->required();
        sub->add_option("--run-id", run_id, "override [run] run_id");
        sub->add_option("--seed", seed, "override [run] seed");
        sub->add_option("--hypotheses", hypotheses, "comma-separated subset of h1,h2,h3,h4");
        sub->add_option("--mock", mock,
                        "mock profile path; overrides both endpoints with the deterministic mock");
        sub->add_flag("--force", force, "skip the bundle-hash and seed guards");
    }

    CLI11_PARSE(app, argc, argv);
    CLI::App* sub = app.get_subcommands().front();

    try {
        audit::RunConfig cfg = audit::load_run_config(config_path);
        if (sub->count("--run-id")) cfg.run_id = run_id;
        if (sub->count("--seed")) {
            cfg.seed = seed;
            cfg.seed_set = true;
        }
        if (sub->count("--hypotheses")) {
            std::set<std::string> hs;
            for (const auto& h : audit::split(hypotheses, ','))
                hs.insert(std::string(audit::trim(h)));
            cfg.hypotheses.assign(hs.begin(), hs.end());
        }
        if (sub->count("--mock")) {
            cfg.generation.mock_profile = mock;
            cfg.judge.mock_profile = mock;
        }
        if (force) cfg.force = true;
        return audit::run_command(sub->get_name(), cfg);
    } catch (const audit::AuditError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return audit::exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
