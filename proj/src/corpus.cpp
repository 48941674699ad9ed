#include "comet/corpus.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include "comet/tokenize.hpp"

#include "json.hpp"

namespace comet {

namespace {

std::string mapped_field(const nlohmann::json& obj, const std::string& name,
                         const std::map<std::string, std::string>& field_map) {
    // field_map: internal name -> external name
    auto it = field_map.find(name);
    const std::string& key = it == field_map.end() ? name : it->second;
    if (!obj.contains(key) || !obj.at(key).is_string()) return "";
    return obj.at(key).get<std::string>();
}

}  // namespace

CorpusLoadResult load_corpus(const std::string& path, CorpusMode mode,
                             const std::map<std::string, std::string>& field_map) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read corpus file: " + path);

    CorpusLoadResult result;
    std::set<std::string> seen_ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object()) {
            ++result.skipped;
            continue;
        }
        Sample s;
        s.id = mapped_field(obj, "id", field_map);
        s.old_code = mapped_field(obj, "old_code", field_map);
        s.new_code = mapped_field(obj, "new_code", field_map);
        s.old_comment = mapped_field(obj, "old_comment", field_map);
        s.new_comment = mapped_field(obj, "new_comment", field_map);
        if (s.id.empty()) s.id = "line-" + std::to_string(line_no);

        if (s.old_code.empty() || s.new_code.empty() || s.old_comment.empty()) {
            ++result.skipped;
            continue;
        }
        if (mode == CorpusMode::Train) {
            if (s.new_comment.empty()) {
                ++result.skipped;
                continue;
            }
            auto old_tokens = token_texts(clean_comment(s.old_comment));
            auto new_tokens = token_texts(clean_comment(s.new_comment));
            if (old_tokens == new_tokens) {
                ++result.skipped;
                continue;
            }
        }
        if (!seen_ids.insert(s.id).second) {
            ++result.skipped;
            continue;
        }
        result.samples.push_back(std::move(s));
    }
    if (result.samples.empty())
        result.warnings.push_back("corpus is empty: " + path);
    return result;
}

}  // namespace comet
