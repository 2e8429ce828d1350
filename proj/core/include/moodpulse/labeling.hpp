#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "moodpulse/affect.hpp"

namespace moodpulse {

/// Category -> word set. Categories may be absent (an emotion lexicon without `love`, say).
class Lexicon {
public:
    void add(AffectCategory c, std::string word);
    bool has(AffectCategory c) const noexcept { return !words_[index_of(c)].empty(); }
    const std::unordered_set<std::string>& words(AffectCategory c) const noexcept { return words_[index_of(c)]; }

    /// NRC-style lines: `word<TAB>category` or `word<TAB>category<TAB>0|1`.
    /// Unknown categories (e.g. positive/negative) are ignored; words are lowercased.
    static Lexicon load(std::istream& in);
    static Lexicon load_file(const std::string& path);

private:
    std::array<std::unordered_set<std::string>, kCategoryCount> words_;
};

LabelVector label_with_lexicon(std::span<const std::string> tokens, const Lexicon& lexicon);

class WordVectorTable {
public:
    explicit WordVectorTable(std::size_t dim);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return vectors_.size(); }

    /// Throws DataError on wrong length or NaN components.
    void insert(std::string token, std::vector<double> vec);
    const std::vector<double>* find(const std::string& token) const;

    /// Text format `token v1 ... vd`; a leading word2vec `count dim` header line is skipped.
    static WordVectorTable load(std::istream& in);
    static WordVectorTable load_file(const std::string& path);

private:
    std::size_t dim_;
    std::unordered_map<std::string, std::vector<double>> vectors_;
};

struct DDRConfig {
    double threshold = 0.3;
    std::size_t min_covered_tokens = 1;
};

/// Cosine similarity between the mean vector of covered document tokens and the mean vector of
/// covered dictionary words. nullopt means "uncovered": fewer than `min_covered_tokens` tokens
/// in the table, no covered dictionary word, or a zero-norm mean.
std::optional<double> ddr_score(std::span<const std::string> tokens,
                                const std::unordered_set<std::string>& dictionary_words,
                                const WordVectorTable& table,
                                std::size_t min_covered_tokens = 1);

/// Precomputes dictionary centroids so a corpus can be labeled without re-averaging per post.
class DDRLabeler {
public:
    DDRLabeler(const Lexicon& dictionaries, const WordVectorTable& table, DDRConfig config);

    /// Uncovered documents get the all-off vector.
    LabelVector label(std::span<const std::string> tokens) const;
    std::optional<double> score(std::span<const std::string> tokens, AffectCategory c) const;

private:
    std::optional<std::vector<double>> document_mean(std::span<const std::string> tokens) const;

    const WordVectorTable* table_;
    DDRConfig config_;
    std::array<std::optional<std::vector<double>>, kCategoryCount> centroids_;
};

struct LabelTable {
    std::map<std::string, LabelVector> labels;
    std::size_t unknown_ids = 0;    // rows whose id is not in the corpus
    std::size_t missing_posts = 0;  // corpus posts without a row (assigned all-off)
};

/// CSV with header `id` + the 21 category columns (any order) holding 0/1.
/// Throws ParseError on malformed rows and DataError on conflicting duplicate ids.
/// When `corpus_ids` is given the result covers exactly those ids.
LabelTable load_labels(std::istream& in, const std::vector<std::string>* corpus_ids = nullptr);
void write_labels(std::ostream& out, const std::vector<std::pair<std::string, LabelVector>>& rows);

struct CategoryScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
    std::size_t true_positive = 0;
    std::size_t false_positive = 0;
    std::size_t false_negative = 0;
};

/// Per-category binary scores over the ids present in both maps. Throws DataError on an empty
/// intersection. Precision (recall) is 0 when its denominator is 0; F1 is 0 when P + R = 0.
std::array<CategoryScore, kCategoryCount> f1_scores(const std::map<std::string, LabelVector>& predicted,
                                                    const std::map<std::string, LabelVector>& gold);

}  // namespace moodpulse
