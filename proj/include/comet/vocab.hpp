#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace comet {

// Token-index bijection with reserved entries. The script stream reserves
// the action keywords and sentinels on top of the four specials.
class Vocabulary {
public:
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;
    static constexpr int kBos = 2;
    static constexpr int kEos = 3;

    static const char* pad_text();
    static const char* unk_text();
    static const char* bos_text();
    static const char* eos_text();

    Vocabulary();

    // Most frequent `cap` tokens on top of specials and extras.
    static Vocabulary build(const std::map<std::string, long>& counts,
                            std::size_t cap,
                            const std::vector<std::string>& extra_reserved = {});

    int add(const std::string& text);       // idempotent
    int lookup(const std::string& text) const;  // kUnk when absent
    bool contains(const std::string& text) const;
    const std::string& token(int index) const { return tokens_[index]; }
    int size() const { return static_cast<int>(tokens_.size()); }

    const std::vector<std::string>& tokens() const { return tokens_; }

private:
    std::unordered_map<std::string, int> index_;
    std::vector<std::string> tokens_;
};

}  // namespace comet
