#pragma once

#include "audit/config.hpp"
#include "audit/errors.hpp"
#include "audit/llm_client.hpp"

#include <memory>
#include <string>

namespace audit {

// MockBackend when the endpoint names a mock profile, HttpBackend otherwise.
std::unique_ptr<Backend> make_backend(const EndpointConfig& endpoint);

// Pid lockfile guarding one run directory against concurrent writers. A lock
// left behind by a dead process is reclaimed.
class RunLock {
  public:
    explicit RunLock(const std::string& run_dir);
    ~RunLock();
    RunLock(const RunLock&) = delete;
    RunLock& operator=(const RunLock&) = delete;

  private:
    std::string path_;
    bool held_ = false;
};

int exit_code_for(ErrorCode code);

// Stage entry points; throw AuditError on failure, return 0 on success.
int cmd_generate(const RunConfig& cfg);
int cmd_judge(const RunConfig& cfg);
int cmd_topics(const RunConfig& cfg);
int cmd_analyze(const RunConfig& cfg);

// Dispatches a subcommand, mapping AuditError to the documented exit codes.
int run_command(const std::string& command, const RunConfig& cfg);

} // namespace audit
