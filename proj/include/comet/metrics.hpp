#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace comet {

using WordSeq = std::vector<std::string>;

// One evaluation record: old comment x, gold y, ranked predictions.
struct EvalRecord {
    WordSeq old_comment;
    WordSeq gold;
    std::vector<WordSeq> predictions;
};

// Token-level Levenshtein distance (insert/delete/substitute, unit costs).
std::size_t levenshtein(const WordSeq& a, const WordSeq& b);

// Mean word-level edit distance of the top-1 predictions to gold.
double aed(const std::vector<EvalRecord>& records);

struct RedResult {
    double value = 0.0;
    std::size_t excluded_degenerate = 0;  // records with d(x, y) == 0
};
// Mean of d(pred, gold) / d(old, gold); degenerate records are excluded
// and counted. Throws std::invalid_argument when nothing remains.
RedResult red(const std::vector<EvalRecord>& records);

double accuracy(const std::vector<EvalRecord>& records);
double recall_at_k(const std::vector<EvalRecord>& records, std::size_t k);

// Corpus-level n-gram overlap (orders 1..4 pooled): 100 * min(p, r) of
// reference-clipped matches.
double gleu(const std::vector<EvalRecord>& records);

// Mean sentence-level SARI: add/keep F1 and delete precision against the
// source and reference, n-gram orders 1..4 (orders beyond every sequence's
// length are skipped), scaled to 0..100.
double sari(const std::vector<EvalRecord>& records);

struct EvalReport {
    double accuracy = 0.0;
    double recall_at_5 = 0.0;
    double aed = 0.0;
    double red = 0.0;
    double gleu = 0.0;
    double sari = 0.0;
    std::size_t n = 0;
    std::size_t excluded_degenerate = 0;
};

EvalReport evaluate(const std::vector<EvalRecord>& records);

}  // namespace comet
