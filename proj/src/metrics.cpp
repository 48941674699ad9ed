#include "comet/metrics.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace comet {

std::size_t levenshtein(const WordSeq& a, const WordSeq& b) {
    const std::size_t n = a.size(), m = b.size();
    std::vector<std::size_t> prev(m + 1), cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= m; ++j) {
            std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

namespace {

const WordSeq& top1(const EvalRecord& r) {
    if (r.predictions.empty())
        throw std::invalid_argument("record without predictions");
    return r.predictions.front();
}

}  // namespace

double aed(const std::vector<EvalRecord>& records) {
    if (records.empty()) throw std::invalid_argument("empty record set");
    double total = 0.0;
    for (const auto& r : records)
        total += static_cast<double>(levenshtein(top1(r), r.gold));
    return total / static_cast<double>(records.size());
}

RedResult red(const std::vector<EvalRecord>& records) {
    RedResult result;
    double total = 0.0;
    std::size_t counted = 0;
    for (const auto& r : records) {
        std::size_t denom = levenshtein(r.old_comment, r.gold);
        if (denom == 0) {
            ++result.excluded_degenerate;
            continue;
        }
        total += static_cast<double>(levenshtein(top1(r), r.gold)) /
                 static_cast<double>(denom);
        ++counted;
    }
    if (counted == 0)
        throw std::invalid_argument("all records have identical old and gold");
    result.value = total / static_cast<double>(counted);
    return result;
}

double accuracy(const std::vector<EvalRecord>& records) {
    return recall_at_k(records, 1);
}

double recall_at_k(const std::vector<EvalRecord>& records, std::size_t k) {
    if (records.empty()) return 0.0;
    std::size_t hits = 0;
    for (const auto& r : records) {
        std::size_t top = std::min(k, r.predictions.size());
        for (std::size_t i = 0; i < top; ++i)
            if (r.predictions[i] == r.gold) {
                ++hits;
                break;
            }
    }
    return static_cast<double>(hits) / static_cast<double>(records.size());
}

namespace {

using NgramCounts = std::map<WordSeq, long>;

NgramCounts ngrams(const WordSeq& seq, std::size_t n) {
    NgramCounts counts;
    if (seq.size() < n) return counts;
    for (std::size_t i = 0; i + n <= seq.size(); ++i)
        ++counts[WordSeq(seq.begin() + i, seq.begin() + i + n)];
    return counts;
}

long total(const NgramCounts& c) {
    long t = 0;
    for (const auto& [g, k] : c) t += k;
    return t;
}

long clipped_matches(const NgramCounts& hyp, const NgramCounts& ref) {
    long m = 0;
    for (const auto& [g, k] : hyp) {
        auto it = ref.find(g);
        if (it != ref.end()) m += std::min(k, it->second);
    }
    return m;
}

// counts of a minus b, clamped at zero
NgramCounts diff_counts(const NgramCounts& a, const NgramCounts& b) {
    NgramCounts out;
    for (const auto& [g, k] : a) {
        auto it = b.find(g);
        long rem = k - (it == b.end() ? 0 : it->second);
        if (rem > 0) out[g] = rem;
    }
    return out;
}

NgramCounts min_counts(const NgramCounts& a, const NgramCounts& b) {
    NgramCounts out;
    for (const auto& [g, k] : a) {
        auto it = b.find(g);
        if (it != b.end()) out[g] = std::min(k, it->second);
    }
    return out;
}

double f1(double p, double r) {
    return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

double sari_sentence(const WordSeq& src, const WordSeq& hyp,
                     const WordSeq& ref) {
    double add_sum = 0.0, keep_sum = 0.0, del_sum = 0.0;
    int levels = 0;
    for (std::size_t n = 1; n <= 4; ++n) {
        NgramCounts s = ngrams(src, n);
        NgramCounts h = ngrams(hyp, n);
        NgramCounts r = ngrams(ref, n);
        if (s.empty() && h.empty() && r.empty()) continue;  // too short
        ++levels;

        NgramCounts hyp_new = diff_counts(h, s);
        NgramCounts ref_new = diff_counts(r, s);
        long add_correct = clipped_matches(hyp_new, ref_new);
        long hyp_new_n = total(hyp_new);
        long ref_new_n = total(ref_new);
        double p_add = hyp_new_n ? static_cast<double>(add_correct) / hyp_new_n : 0.0;
        double r_add = ref_new_n ? static_cast<double>(add_correct) / ref_new_n : 0.0;
        add_sum += f1(p_add, r_add);

        NgramCounts kept = min_counts(s, h);
        NgramCounts keep_ref = min_counts(s, r);
        long keep_correct = clipped_matches(kept, keep_ref);
        long kept_n = total(kept);
        long keep_ref_n = total(keep_ref);
        double p_keep = kept_n ? static_cast<double>(keep_correct) / kept_n : 0.0;
        double r_keep =
            keep_ref_n ? static_cast<double>(keep_correct) / keep_ref_n : 0.0;
        keep_sum += f1(p_keep, r_keep);

        NgramCounts deleted = diff_counts(s, h);
        NgramCounts del_ref = diff_counts(s, r);
        long del_correct = clipped_matches(deleted, del_ref);
        long del_n = total(deleted);
        double p_del = del_n ? static_cast<double>(del_correct) / del_n : 0.0;
        del_sum += p_del;
    }
    if (levels == 0) return 0.0;
    double add = add_sum / levels;
    double keep = keep_sum / levels;
    double del = del_sum / levels;
    return 100.0 * (add + keep + del) / 3.0;
}

}  // namespace

double gleu(const std::vector<EvalRecord>& records) {
    long matches = 0, hyp_total = 0, ref_total = 0;
    for (const auto& r : records) {
        const WordSeq& hyp = top1(r);
        for (std::size_t n = 1; n <= 4; ++n) {
            NgramCounts h = ngrams(hyp, n);
            NgramCounts g = ngrams(r.gold, n);
            matches += clipped_matches(h, g);
            hyp_total += total(h);
            ref_total += total(g);
        }
    }
    if (hyp_total == 0 || ref_total == 0) return 0.0;
    double p = static_cast<double>(matches) / static_cast<double>(hyp_total);
    double rec = static_cast<double>(matches) / static_cast<double>(ref_total);
    return 100.0 * std::min(p, rec);
}

double sari(const std::vector<EvalRecord>& records) {
    if (records.empty()) return 0.0;
    double acc = 0.0;
    for (const auto& r : records)
        acc += sari_sentence(r.old_comment, top1(r), r.gold);
    return acc / static_cast<double>(records.size());
}

EvalReport evaluate(const std::vector<EvalRecord>& records) {
    EvalReport report;
    report.n = records.size();
    report.accuracy = accuracy(records);
    report.recall_at_5 = recall_at_k(records, 5);
    report.aed = aed(records);
    RedResult r = red(records);
    report.red = r.value;
    report.excluded_degenerate = r.excluded_degenerate;
    report.gleu = gleu(records);
    report.sari = sari(records);
    return report;
}

}  // namespace comet
