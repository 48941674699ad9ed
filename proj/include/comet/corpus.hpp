#pragma once

#include <map>
#include <string>
#include <vector>

namespace comet {

struct Sample {
    std::string id;
    std::string old_code;
    std::string new_code;
    std::string old_comment;
    std::string new_comment;  // empty in predict mode
};

enum class CorpusMode { Train, Predict };

struct CorpusLoadResult {
    std::vector<Sample> samples;
    std::size_t skipped = 0;  // malformed, invalid or duplicate-id lines
    std::vector<std::string> warnings;
};

// JSONL corpus, one object per line with the Sample string fields. The
// field map renames external field names onto the internal ones without
// changing the Sample contract. Malformed lines are skipped and counted;
// duplicate ids keep the first occurrence. Throws std::runtime_error when
// the file cannot be read.
CorpusLoadResult load_corpus(const std::string& path, CorpusMode mode,
                             const std::map<std::string, std::string>&
                                 field_map = {});

}  // namespace comet
