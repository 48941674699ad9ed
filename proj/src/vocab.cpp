#include "comet/vocab.hpp"

#include <algorithm>

namespace comet {

const char* Vocabulary::pad_text() { return "<PAD>"; }
const char* Vocabulary::unk_text() { return "<UNK>"; }
const char* Vocabulary::bos_text() { return "<BOS>"; }
const char* Vocabulary::eos_text() { return "<EOS>"; }

Vocabulary::Vocabulary() {
    add(pad_text());
    add(unk_text());
    add(bos_text());
    add(eos_text());
}

int Vocabulary::add(const std::string& text) {
    auto it = index_.find(text);
    if (it != index_.end()) return it->second;
    int id = static_cast<int>(tokens_.size());
    index_.emplace(text, id);
    tokens_.push_back(text);
    return id;
}

int Vocabulary::lookup(const std::string& text) const {
    auto it = index_.find(text);
    return it == index_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(const std::string& text) const {
    return index_.count(text) > 0;
}

Vocabulary Vocabulary::build(const std::map<std::string, long>& counts,
                             std::size_t cap,
                             const std::vector<std::string>& extra_reserved) {
    Vocabulary vocab;
    for (const auto& extra : extra_reserved) vocab.add(extra);

    std::vector<std::pair<std::string, long>> ranked(counts.begin(),
                                                     counts.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) {
                         if (a.second != b.second) return a.second > b.second;
                         return a.first < b.first;
                     });
    for (const auto& [text, count] : ranked) {
        (void)count;
        if (static_cast<std::size_t>(vocab.size()) >= cap + 4) break;
        vocab.add(text);
    }
    return vocab;
}

}  // namespace comet
