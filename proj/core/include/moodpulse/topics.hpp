#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

namespace moodpulse {

struct TopicConfig {
    std::size_t n_topics = 10;
    std::size_t top_k_keywords = 10;
    std::size_t window_days = 3;
    double jaccard_new_threshold = 0.2;
    std::size_t min_docs = 20;
    std::uint64_t rng_seed = 0;
    std::size_t max_iterations = 100;
    std::unordered_set<std::string> stopwords;

    /// Throws ConfigError when an invariant fails.
    void validate() const;
};

struct Topic {
    std::size_t id = 0;
    std::vector<std::string> keywords;
    std::vector<double> scores;  // parallel to keywords
    std::size_t size = 0;        // documents in the cluster
};

using TokenList = std::vector<std::string>;

/// TF-IDF (or supplied) document vectors, spherical k-means with k = min(n_topics, |docs|/5),
/// class-based TF-IDF keywords. Returns nullopt when |docs| < min_docs.
/// `doc_vectors`, when given, must be parallel to `docs` with equal, non-zero lengths.
std::optional<std::vector<Topic>> extract_topics(std::span<const TokenList> docs, const TopicConfig& config,
                                                 const std::vector<std::vector<double>>* doc_vectors = nullptr);

/// Jaccard similarity of two keyword sets; 1 when both are empty.
double keyword_jaccard(std::span<const std::string> a, std::span<const std::string> b);

struct EmergingTopicReport {
    std::vector<Topic> before;
    std::vector<Topic> after;
    std::vector<std::size_t> emerging;             // indices into `after`
    std::vector<std::vector<double>> jaccard;      // after x before
    bool unexplained = false;
    std::string reason;
    std::size_t before_docs = 0;
    std::size_t after_docs = 0;
};

/// Topics in each window; an after-topic is emerging when its Jaccard with every before-topic is
/// below the threshold. Either window under min_docs flags the report unexplained.
EmergingTopicReport emerging_topics(std::span<const TokenList> before_docs, std::span<const TokenList> after_docs,
                                    const TopicConfig& config,
                                    const std::vector<std::vector<double>>* before_vectors = nullptr,
                                    const std::vector<std::vector<double>>* after_vectors = nullptr);

inline constexpr double kNpmiEpsilon = 1e-12;

/// Mean over topics of the average pairwise NPMI, from document co-occurrence in `reference`.
/// The joint probability is smoothed by `epsilon`; a pair that never co-occurs scores -1 and a pair
/// present in every document scores 1.
/// Pairs with a keyword absent from the reference are skipped; nullopt when every pair is
/// skipped or no topic has two keywords.
std::optional<double> npmi_coherence(std::span<const Topic> topics, std::span<const TokenList> reference,
                                     double epsilon = kNpmiEpsilon);

/// Unique terms / total terms across each topic's first `top_n` keywords.
/// Throws DataError when there are no keywords at all.
double topic_diversity(std::span<const Topic> topics, std::size_t top_n = 25);

}  // namespace moodpulse
