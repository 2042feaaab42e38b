#pragma once

#include "audit/chat.hpp"
#include "audit/errors.hpp"
#include "audit/identity_matrix.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace audit {

struct DecodingConfig {
    double temperature = 0.6;
    int max_tokens = 512;
    double top_p = 1.0;
    std::optional<std::int64_t> seed;
};

struct ModelEndpoint {
    std::string model_id;
    std::string base_url;
    std::string api_key_env;
    double request_timeout_s = 60.0;
    int max_concurrency = 4;
    int max_retries = 3;
    double backoff_base_s = 1.0; // tests shrink this to avoid slow retries
};

struct TokenUsage {
    long long prompt_tokens = 0;
    long long completion_tokens = 0;
};

struct ResponseRecord {
    std::string prompt_id;
    std::string model_id;
    int sample_index = 0;
    std::string text;
    DecodingConfig decoding;
    std::string created_at;
    std::optional<TokenUsage> usage;
};

class Backend {
  public:
    virtual ~Backend() = default;
    virtual std::string model_id() const = 0;
    // sample_index disambiguates repeated draws over identical messages.
    virtual std::string complete(const ChatMessages& messages, const DecodingConfig& decoding,
                                 int sample_index) = 0;
    virtual int max_concurrency() const { return 1; }
    virtual std::string now() const;
};

// OpenAI-compatible chat-completions client with bounded in-flight requests,
// exponential backoff on 429/5xx/transport errors, and no retry on 401/403.
class HttpBackend : public Backend {
  public:
    explicit HttpBackend(ModelEndpoint endpoint);
    ~HttpBackend() override;
    std::string model_id() const override;
    std::string complete(const ChatMessages& messages, const DecodingConfig& decoding,
                         int sample_index) override;
    int max_concurrency() const override;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct SampleError {
    int sample_index = 0;
    ErrorCode code;
    std::string message;
};

struct SampleResult {
    std::vector<ResponseRecord> records; // sorted by sample_index
    std::vector<SampleError> errors;     // per failed index
};

// Draws n samples (indices 0..n-1) for one rendered prompt, issuing requests
// with bounded parallelism. Per-sample seed = decoding.seed + index when set.
// Throws AllSamplesFailed only if every sample fails.
SampleResult sample_n(Backend& backend, const RenderedPrompt& prompt, int n,
                      const DecodingConfig& decoding);

} // namespace audit
