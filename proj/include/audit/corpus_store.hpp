#pragma once

#include "audit/identity_matrix.hpp"

#include <json.hpp>

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace audit {

enum class Purpose { Generation, JudgeQ1, JudgeQ2, JudgeQ3, JudgeQ4, Topics };

const char* purpose_name(Purpose p);        // "generation", "judge_q1", ..., "topics"
std::string purpose_filename(Purpose p);    // "generation.jsonl", ...
Purpose parse_purpose(const std::string& s);

struct CorpusKey {
    std::string prompt_id;
    std::string model_id;
    int sample_index = 0; // generation draw, or the judged generation record's index
    Purpose purpose = Purpose::Generation;
    int sub_index = 0;    // judge vote index or topic draw index

    friend bool operator<(const CorpusKey& a, const CorpusKey& b);
    friend bool operator==(const CorpusKey& a, const CorpusKey& b);
    std::string describe() const;
};

// Append-only JSONL store over one run directory. One file per purpose;
// duplicate keys are rejected; writes are flushed every 100 appends and on
// close; a torn trailing line (crash artifact) is dropped at open.
class CorpusStore {
  public:
    explicit CorpusStore(const std::string& run_dir);
    ~CorpusStore();

    const std::string& run_dir() const;

    bool has_manifest() const;
    nlohmann::json read_manifest() const;
    void write_manifest(const nlohmann::json& manifest); // atomic replace

    // record must carry prompt_id, model_id, sample_index, sub_index.
    void append(Purpose purpose, const nlohmann::json& record);
    void flush(Purpose purpose);
    void flush_all();

    std::size_t count(Purpose purpose) const;
    bool contains(const CorpusKey& key) const;
    // Records sorted by key.
    std::vector<nlohmann::json> scan(Purpose purpose) const;

    // Keys of the requested cross-product not yet stored. For Generation, n is
    // samples per prompt. For judge/topic purposes, n is votes/draws per
    // stored generation record, so generation must be populated first.
    std::vector<CorpusKey> missing(const std::vector<RenderedPrompt>& prompts,
                                   const std::string& model_id, int n, Purpose purpose) const;

  private:
    struct PurposeFile;
    PurposeFile& file_for(Purpose purpose);
    const PurposeFile& file_for(Purpose purpose) const;

    std::string dir_;
    std::unique_ptr<PurposeFile> files_[6];
};

CorpusKey key_of(const nlohmann::json& record, Purpose purpose);

} // namespace audit
