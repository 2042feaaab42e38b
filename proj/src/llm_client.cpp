#include "audit/llm_client.hpp"

#include "audit/util.hpp"

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <random>
#include <thread>

namespace audit {

using nlohmann::json;

std::string Backend::now() const {
    return iso8601_now();
}

namespace {

class Semaphore {
  public:
    explicit Semaphore(int count) : count_(count) {}
    void acquire() {
        std::unique_lock<std::mutex> lock(mu_);
        cv_.wait(lock, [&] { return count_ > 0; });
        --count_;
    }
    void release() {
        {
            std::lock_guard<std::mutex> lock(mu_);
            ++count_;
        }
        cv_.notify_one();
    }

  private:
    std::mutex mu_;
    std::condition_variable cv_;
    int count_;
};

struct SemaphoreGuard {
    Semaphore& sem;
    explicit SemaphoreGuard(Semaphore& s) : sem(s) { sem.acquire(); }
    ~SemaphoreGuard() { sem.release(); }
};

// Splits "http://host:8000/v1" into origin and path prefix.
void split_url(const std::string& base_url, std::string& origin, std::string& prefix) {
    size_t scheme = base_url.find("://");
    size_t path = scheme == std::string::npos ? base_url.find('/')
                                              : base_url.find('/', scheme + 3);
    if (path == std::string::npos) {
        origin = base_url;
        prefix.clear();
    } else {
        origin = base_url.substr(0, path);
        prefix = base_url.substr(path);
        while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    }
}

double jittered_backoff_s(double base_s, int attempt) {
    double delay = base_s * std::pow(2.0, attempt);
    delay = std::min(delay, 30.0);
    thread_local std::mt19937_64 rng{std::random_device{}()};
    std::uniform_real_distribution<double> jitter(0.8, 1.2);
    return delay * jitter(rng);
}

bool is_timeout_error(httplib::Error err) {
    return err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
           err == httplib::Error::Write;
}

} // namespace

struct HttpBackend::Impl {
    ModelEndpoint endpoint;
    std::string origin;
    std::string prefix;
    std::string api_key;
    Semaphore in_flight;

    explicit Impl(ModelEndpoint ep)
        : endpoint(std::move(ep)), in_flight(std::max(1, endpoint.max_concurrency)) {
        split_url(endpoint.base_url, origin, prefix);
        if (!endpoint.api_key_env.empty()) {
            const char* key = std::getenv(endpoint.api_key_env.c_str());
            if (!key)
                throw AuditError(ErrorCode::ConfigError,
                                 "environment variable " + endpoint.api_key_env + " is not set");
            api_key = key;
        }
    }
};

HttpBackend::HttpBackend(ModelEndpoint endpoint) : impl_(std::make_unique<Impl>(std::move(endpoint))) {}
HttpBackend::~HttpBackend() = default;

std::string HttpBackend::model_id() const {
    return impl_->endpoint.model_id;
}

int HttpBackend::max_concurrency() const {
    return impl_->endpoint.max_concurrency;
}

std::string HttpBackend::complete(const ChatMessages& messages, const DecodingConfig& decoding,
                                  int /*sample_index*/) {
    json body;
    body["model"] = impl_->endpoint.model_id;
    body["messages"] = json::array();
    for (const auto& m : messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});
    body["temperature"] = decoding.temperature;
    body["max_tokens"] = decoding.max_tokens;
    body["top_p"] = decoding.top_p;
    if (decoding.seed) body["seed"] = *decoding.seed;
    const std::string payload = body.dump();
    const std::string path = impl_->prefix + "/chat/completions";

    const int max_retries = std::max(0, impl_->endpoint.max_retries);
    for (int attempt = 0;; ++attempt) {
        httplib::Result res = [&] {
            SemaphoreGuard guard(impl_->in_flight);
            httplib::Client cli(impl_->origin);
            auto timeout = std::chrono::duration<double>(impl_->endpoint.request_timeout_s);
            cli.set_connection_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(timeout));
            cli.set_read_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(timeout));
            cli.set_write_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(timeout));
            httplib::Headers headers;
            if (!impl_->api_key.empty()) headers.emplace("Authorization", "Bearer " + impl_->api_key);
            return cli.Post(path, headers, payload, "application/json");
        }();

        bool retryable = false;
        ErrorCode code = ErrorCode::EndpointFailure;
        std::string detail;

        if (!res) {
            retryable = true;
            code = is_timeout_error(res.error()) ? ErrorCode::Timeout : ErrorCode::EndpointFailure;
            detail = "transport error: " + httplib::to_string(res.error());
        } else if (res->status == 200) {
            json doc = json::parse(res->body, nullptr, false);
            if (doc.is_discarded() || !doc.contains("choices") || doc["choices"].empty() ||
                !doc["choices"][0].contains("message") ||
                !doc["choices"][0]["message"].contains("content") ||
                !doc["choices"][0]["message"]["content"].is_string())
                throw AuditError(ErrorCode::MalformedResponse,
                                 "response missing choices[0].message.content");
            return doc["choices"][0]["message"]["content"].get<std::string>();
        } else if (res->status == 401 || res->status == 403) {
            throw AuditError(ErrorCode::AuthError,
                             "authentication failed (HTTP " + std::to_string(res->status) + ")");
        } else if (res->status == 429) {
            retryable = true;
            code = ErrorCode::RateLimited;
            detail = "HTTP 429";
        } else if (res->status >= 500) {
            retryable = true;
            code = ErrorCode::EndpointFailure;
            detail = "HTTP " + std::to_string(res->status);
        } else {
            throw AuditError(ErrorCode::EndpointFailure,
                             "HTTP " + std::to_string(res->status) + ": " + res->body);
        }

        if (!retryable || attempt >= max_retries)
            throw AuditError(code, detail + " after " + std::to_string(attempt + 1) + " attempt(s)");
        double delay = jittered_backoff_s(impl_->endpoint.backoff_base_s, attempt);
        std::this_thread::sleep_for(std::chrono::duration<double>(delay));
    }
}

SampleResult sample_n(Backend& backend, const RenderedPrompt& prompt, int n,
                      const DecodingConfig& decoding) {
    if (n < 1) throw AuditError(ErrorCode::ConfigError, "sample count must be >= 1");
    std::vector<std::optional<ResponseRecord>> slots(static_cast<size_t>(n));
    std::vector<std::optional<SampleError>> fails(static_cast<size_t>(n));

    std::atomic<int> next{0};
    auto work = [&] {
        while (true) {
            int i = next.fetch_add(1);
            if (i >= n) return;
            DecodingConfig d = decoding;
            if (d.seed) d.seed = *decoding.seed + i;
            try {
                ResponseRecord rec;
                rec.prompt_id = prompt.prompt_id;
                rec.model_id = backend.model_id();
                rec.sample_index = i;
                rec.text = backend.complete(prompt.messages, d, i);
                rec.decoding = d;
                rec.created_at = backend.now();
                slots[static_cast<size_t>(i)] = std::move(rec);
            } catch (const AuditError& e) {
                fails[static_cast<size_t>(i)] = SampleError{i, e.code(), e.what()};
            } catch (const std::exception& e) {
                fails[static_cast<size_t>(i)] = SampleError{i, ErrorCode::EndpointFailure, e.what()};
            }
        }
    };

    int workers = std::min(n, std::max(1, backend.max_concurrency()));
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    SampleResult result;
    for (int i = 0; i < n; ++i) {
        if (slots[static_cast<size_t>(i)]) result.records.push_back(std::move(*slots[static_cast<size_t>(i)]));
        else if (fails[static_cast<size_t>(i)]) result.errors.push_back(*fails[static_cast<size_t>(i)]);
    }
    if (result.records.empty())
        throw AuditError(ErrorCode::AllSamplesFailed,
                         "all " + std::to_string(n) + " samples failed; first: " +
                             (result.errors.empty() ? "unknown" : result.errors.front().message));
    return result;
}

} // namespace audit
