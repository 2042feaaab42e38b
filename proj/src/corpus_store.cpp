#include "audit/corpus_store.hpp"

#include "audit/errors.hpp"
#include "audit/util.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <tuple>

namespace fs = std::filesystem;

namespace audit {

using nlohmann::json;

const char* purpose_name(Purpose p) {
    switch (p) {
        case Purpose::Generation: return "generation";
        case Purpose::JudgeQ1: return "judge_q1";
        case Purpose::JudgeQ2: return "judge_q2";
        case Purpose::JudgeQ3: return "judge_q3";
        case Purpose::JudgeQ4: return "judge_q4";
        case Purpose::Topics: return "topics";
    }
    return "?";
}

std::string purpose_filename(Purpose p) {
    return std::string(purpose_name(p)) + ".jsonl";
}

Purpose parse_purpose(const std::string& s) {
    for (Purpose p : {Purpose::Generation, Purpose::JudgeQ1, Purpose::JudgeQ2, Purpose::JudgeQ3,
                      Purpose::JudgeQ4, Purpose::Topics})
        if (s == purpose_name(p)) return p;
    throw AuditError(ErrorCode::ParseError, "unknown purpose: " + s);
}

bool operator<(const CorpusKey& a, const CorpusKey& b) {
    return std::tie(a.prompt_id, a.model_id, a.sample_index, a.purpose, a.sub_index) <
           std::tie(b.prompt_id, b.model_id, b.sample_index, b.purpose, b.sub_index);
}

bool operator==(const CorpusKey& a, const CorpusKey& b) {
    return std::tie(a.prompt_id, a.model_id, a.sample_index, a.purpose, a.sub_index) ==
           std::tie(b.prompt_id, b.model_id, b.sample_index, b.purpose, b.sub_index);
}

std::string CorpusKey::describe() const {
    return std::string(purpose_name(purpose)) + ":" + prompt_id + ":" + model_id + ":" +
           std::to_string(sample_index) + ":" + std::to_string(sub_index);
}

CorpusKey key_of(const json& record, Purpose purpose) {
    try {
        CorpusKey key;
        key.prompt_id = record.at("prompt_id").get<std::string>();
        key.model_id = record.at("model_id").get<std::string>();
        key.sample_index = record.at("sample_index").get<int>();
        key.sub_index = record.value("sub_index", 0);
        key.purpose = purpose;
        return key;
    } catch (const json::exception& e) {
        throw AuditError(ErrorCode::IoError, std::string("record missing key fields: ") + e.what());
    }
}

struct CorpusStore::PurposeFile {
    Purpose purpose = Purpose::Generation;
    std::string path;
    std::set<CorpusKey> keys;
    std::vector<json> records;
    std::FILE* out = nullptr;
    int unflushed = 0;
    std::mutex mu;

    ~PurposeFile() {
        if (out) std::fclose(out);
    }

    // Loads existing records, dropping a torn trailing line left by a crash.
    void open_and_repair() {
        if (!fs::exists(path)) return;
        std::string content = read_file(path);
        if (!content.empty() && content.back() != '\n') {
            size_t last_newline = content.rfind('\n');
            content = last_newline == std::string::npos ? std::string()
                                                        : content.substr(0, last_newline + 1);
            fs::resize_file(path, content.size());
        }
        size_t start = 0;
        int line_no = 0;
        while (start < content.size()) {
            size_t end = content.find('\n', start);
            std::string line = content.substr(start, end - start);
            start = end + 1;
            ++line_no;
            if (trim(line).empty()) continue;
            json record = json::parse(line, nullptr, false);
            if (record.is_discarded())
                throw AuditError(ErrorCode::IoError, path + ":" + std::to_string(line_no) +
                                                         ": unparseable interior line");
            CorpusKey key = key_of(record, purpose);
            if (!keys.insert(key).second)
                throw AuditError(ErrorCode::IoError,
                                 path + ": duplicate key on disk: " + key.describe());
            records.push_back(std::move(record));
        }
    }

    void append(const json& record) {
        std::lock_guard<std::mutex> lock(mu);
        CorpusKey key = key_of(record, purpose);
        if (keys.count(key))
            throw AuditError(ErrorCode::DuplicateKey, "key already stored: " + key.describe());
        if (!out) {
            out = std::fopen(path.c_str(), "ab");
            if (!out) throw AuditError(ErrorCode::IoError, "cannot open for append: " + path);
        }
        std::string line = record.dump();
        line.push_back('\n');
        if (std::fwrite(line.data(), 1, line.size(), out) != line.size())
            throw AuditError(ErrorCode::IoError, "short write to " + path);
        if (++unflushed >= 100) {
            std::fflush(out);
            unflushed = 0;
        }
        keys.insert(key);
        records.push_back(record);
    }

    void flush() {
        std::lock_guard<std::mutex> lock(mu);
        if (out) std::fflush(out);
        unflushed = 0;
    }
};

CorpusStore::CorpusStore(const std::string& run_dir) : dir_(run_dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw AuditError(ErrorCode::IoError, "cannot create " + dir_ + ": " + ec.message());
    int i = 0;
    for (Purpose p : {Purpose::Generation, Purpose::JudgeQ1, Purpose::JudgeQ2, Purpose::JudgeQ3,
                      Purpose::JudgeQ4, Purpose::Topics}) {
        files_[i] = std::make_unique<PurposeFile>();
        files_[i]->purpose = p;
        files_[i]->path = (fs::path(dir_) / purpose_filename(p)).string();
        files_[i]->open_and_repair();
        ++i;
    }
}

CorpusStore::~CorpusStore() = default;

const std::string& CorpusStore::run_dir() const {
    return dir_;
}

CorpusStore::PurposeFile& CorpusStore::file_for(Purpose purpose) {
    return *files_[static_cast<int>(purpose)];
}

const CorpusStore::PurposeFile& CorpusStore::file_for(Purpose purpose) const {
    return *files_[static_cast<int>(purpose)];
}

bool CorpusStore::has_manifest() const {
    return fs::exists(fs::path(dir_) / "manifest.json");
}

json CorpusStore::read_manifest() const {
    std::string path = (fs::path(dir_) / "manifest.json").string();
    json doc = json::parse(read_file(path), nullptr, false);
    if (doc.is_discarded()) throw AuditError(ErrorCode::IoError, "corrupt manifest: " + path);
    return doc;
}

void CorpusStore::write_manifest(const json& manifest) {
    fs::path final_path = fs::path(dir_) / "manifest.json";
    fs::path tmp_path = fs::path(dir_) / "manifest.json.tmp";
    write_file(tmp_path.string(), manifest.dump(2) + "\n");
    std::error_code ec;
    fs::rename(tmp_path, final_path, ec);
    if (ec)
        throw AuditError(ErrorCode::IoError,
                         "cannot replace " + final_path.string() + ": " + ec.message());
}

void CorpusStore::append(Purpose purpose, const json& record) {
    file_for(purpose).append(record);
}

void CorpusStore::flush(Purpose purpose) {
    file_for(purpose).flush();
}

void CorpusStore::flush_all() {
    for (auto& f : files_) f->flush();
}

std::size_t CorpusStore::count(Purpose purpose) const {
    return file_for(purpose).records.size();
}

bool CorpusStore::contains(const CorpusKey& key) const {
    return file_for(key.purpose).keys.count(key) > 0;
}

std::vector<json> CorpusStore::scan(Purpose purpose) const {
    const PurposeFile& f = file_for(purpose);
    std::vector<json> sorted = f.records;
    std::stable_sort(sorted.begin(), sorted.end(), [&](const json& a, const json& b) {
        return key_of(a, purpose) < key_of(b, purpose);
    });
    return sorted;
}

std::vector<CorpusKey> CorpusStore::missing(const std::vector<RenderedPrompt>& prompts,
                                            const std::string& model_id, int n,
                                            Purpose purpose) const {
    if (n < 1) throw AuditError(ErrorCode::ConfigError, "per-key count must be >= 1");
    std::vector<CorpusKey> out;
    if (purpose == Purpose::Generation) {
        for (const auto& prompt : prompts)
            for (int s = 0; s < n; ++s) {
                CorpusKey key{prompt.prompt_id, model_id, s, purpose, 0};
                if (!contains(key)) out.push_back(std::move(key));
            }
        return out;
    }
    // Judge and topic work hangs off stored generation records.
    for (const auto& record : scan(Purpose::Generation)) {
        CorpusKey gen_key = key_of(record, Purpose::Generation);
        for (int v = 0; v < n; ++v) {
            CorpusKey key{gen_key.prompt_id, model_id, gen_key.sample_index, purpose, v};
            if (!contains(key)) out.push_back(std::move(key));
        }
    }
    return out;
}

} // namespace audit
