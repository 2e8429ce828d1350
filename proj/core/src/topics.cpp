#include "moodpulse/topics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <unordered_map>

#include "moodpulse/error.hpp"

namespace moodpulse {

void TopicConfig::validate() const {
    if (n_topics == 0) throw ConfigError("n_topics must be positive");
    if (top_k_keywords == 0) throw ConfigError("top_k_keywords must be positive");
    if (window_days == 0) throw ConfigError("topic window_days must be positive");
    if (!(jaccard_new_threshold >= 0.0 && jaccard_new_threshold <= 1.0))
        throw ConfigError("jaccard_new_threshold must lie in [0, 1]");
    if (min_docs == 0) throw ConfigError("min_docs must be positive");
    if (max_iterations == 0) throw ConfigError("max_iterations must be positive");
}

namespace {

using SparseVec = std::vector<std::pair<std::size_t, double>>;

struct Embedding {
    std::size_t dim = 0;
    std::vector<SparseVec> rows;
};

void l2_normalise(SparseVec& v) {
    double n = 0.0;
    for (const auto& [i, x] : v) n += x * x;
    if (n <= 0.0) return;
    n = std::sqrt(n);
    for (auto& [i, x] : v) x /= n;
}

Embedding tfidf(std::span<const TokenList> docs) {
    std::map<std::string, std::size_t> vocab;
    for (const auto& d : docs)
        for (const auto& t : d) vocab.emplace(t, 0);
    std::size_t next = 0;
    for (auto& [w, id] : vocab) id = next++;

    std::vector<std::size_t> df(vocab.size(), 0);
    std::vector<std::map<std::size_t, double>> counts(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
        for (const auto& t : docs[i]) counts[i][vocab.at(t)] += 1.0;
        for (const auto& [id, c] : counts[i]) ++df[id];
    }
    const double n = static_cast<double>(docs.size());
    Embedding e;
    e.dim = vocab.size();
    e.rows.resize(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
        for (const auto& [id, c] : counts[i]) {
            double idf = std::log((1.0 + n) / (1.0 + static_cast<double>(df[id]))) + 1.0;
            e.rows[i].emplace_back(id, c * idf);
        }
        l2_normalise(e.rows[i]);
    }
    return e;
}

Embedding external(const std::vector<std::vector<double>>& vectors, std::size_t n_docs) {
    if (vectors.size() != n_docs)
        throw DataError("document vectors (" + std::to_string(vectors.size()) + ") do not match documents (" +
                        std::to_string(n_docs) + ")");
    Embedding e;
    e.dim = vectors.empty() ? 0 : vectors.front().size();
    if (e.dim == 0 && n_docs > 0) throw DataError("document vectors must be non-empty");
    e.rows.resize(n_docs);
    for (std::size_t i = 0; i < n_docs; ++i) {
        if (vectors[i].size() != e.dim) throw DataError("document vectors have unequal lengths");
        for (std::size_t j = 0; j < e.dim; ++j) {
            if (!std::isfinite(vectors[i][j])) throw DataError("document vector contains non-finite values");
            if (vectors[i][j] != 0.0) e.rows[i].emplace_back(j, vectors[i][j]);
        }
        l2_normalise(e.rows[i]);
    }
    return e;
}

double dot(const SparseVec& a, const std::vector<double>& centre) {
    double s = 0.0;
    for (const auto& [i, x] : a) s += x * centre[i];
    return s;
}

// Spherical k-means; returns the cluster of every row.
std::vector<std::size_t> spherical_kmeans(const Embedding& e, std::size_t k, std::uint64_t seed,
                                          std::size_t max_iterations) {
    const std::size_t n = e.rows.size();
    auto dense = [&](const SparseVec& v) {
        std::vector<double> d(e.dim, 0.0);
        for (const auto& [i, x] : v) d[i] = x;
        return d;
    };

    std::vector<std::vector<double>> centres;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    centres.push_back(dense(e.rows[pick(rng)]));
    std::vector<double> closest(n, std::numeric_limits<double>::infinity());
    while (centres.size() < k) {
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            closest[i] = std::min(closest[i], 1.0 - dot(e.rows[i], centres.back()));
            if (closest[i] > far_d) {
                far_d = closest[i];
                far = i;
            }
        }
        centres.push_back(dense(e.rows[far]));
    }

    std::vector<std::size_t> assign(n, k);
    for (std::size_t iter = 0; iter < max_iterations; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_s = -std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                double s = dot(e.rows[i], centres[c]);
                if (s > best_s) {
                    best_s = s;
                    best = c;
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }
        if (!changed) break;
        for (std::size_t c = 0; c < k; ++c) {
            std::vector<double> sum(e.dim, 0.0);
            bool any = false;
            for (std::size_t i = 0; i < n; ++i) {
                if (assign[i] != c) continue;
                any = true;
                for (const auto& [j, x] : e.rows[i]) sum[j] += x;
            }
            if (!any) continue;  // keep the old centre
            double norm = 0.0;
            for (double v : sum) norm += v * v;
            if (norm > 0.0) {
                norm = std::sqrt(norm);
                for (double& v : sum) v /= norm;
            }
            centres[c] = std::move(sum);
        }
    }
    return assign;
}

}  // namespace

std::optional<std::vector<Topic>> extract_topics(std::span<const TokenList> docs, const TopicConfig& config,
                                                 const std::vector<std::vector<double>>* doc_vectors) {
    config.validate();
    if (docs.size() < config.min_docs) return std::nullopt;
    if (docs.empty()) return std::vector<Topic>{};

    auto e = doc_vectors ? external(*doc_vectors, docs.size()) : tfidf(docs);
    const std::size_t k = std::max<std::size_t>(1, std::min(config.n_topics, docs.size() / 5));
    auto assign = spherical_kmeans(e, k, config.rng_seed, config.max_iterations);

    // Per-cluster term counts over non-empty clusters.
    std::vector<std::map<std::string, double>> tf(k);
    std::vector<std::size_t> sizes(k, 0);
    std::vector<double> tokens(k, 0.0);
    for (std::size_t i = 0; i < docs.size(); ++i) {
        ++sizes[assign[i]];
        for (const auto& t : docs[i]) {
            tf[assign[i]][t] += 1.0;
            tokens[assign[i]] += 1.0;
        }
    }
    std::vector<std::size_t> live;
    for (std::size_t c = 0; c < k; ++c)
        if (sizes[c] > 0) live.push_back(c);
    std::unordered_map<std::string, std::size_t> clusters_with;
    for (auto c : live)
        for (const auto& [w, cnt] : tf[c]) ++clusters_with[w];

    const double n_clusters = static_cast<double>(live.size());
    std::vector<Topic> topics;
    for (auto c : live) {
        std::vector<std::pair<double, std::string>> weighted;
        for (const auto& [w, cnt] : tf[c]) {
            if (w.empty() || config.stopwords.count(w)) continue;
            double weight = (cnt / tokens[c]) * std::log(1.0 + n_clusters / static_cast<double>(clusters_with[w]));
            weighted.emplace_back(weight, w);
        }
        std::sort(weighted.begin(), weighted.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        Topic t;
        t.size = sizes[c];
        for (std::size_t i = 0; i < weighted.size() && i < config.top_k_keywords; ++i) {
            t.keywords.push_back(weighted[i].second);
            t.scores.push_back(weighted[i].first);
        }
        topics.push_back(std::move(t));
    }
    std::stable_sort(topics.begin(), topics.end(), [](const Topic& a, const Topic& b) { return a.size > b.size; });
    for (std::size_t i = 0; i < topics.size(); ++i) topics[i].id = i;
    return topics;
}

double keyword_jaccard(std::span<const std::string> a, std::span<const std::string> b) {
    std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    if (sa.empty() && sb.empty()) return 1.0;
    std::size_t inter = 0;
    for (const auto& w : sa) inter += sb.count(w);
    return static_cast<double>(inter) / static_cast<double>(sa.size() + sb.size() - inter);
}

EmergingTopicReport emerging_topics(std::span<const TokenList> before_docs, std::span<const TokenList> after_docs,
                                    const TopicConfig& config, const std::vector<std::vector<double>>* before_vectors,
                                    const std::vector<std::vector<double>>* after_vectors) {
    config.validate();
    EmergingTopicReport r;
    r.before_docs = before_docs.size();
    r.after_docs = after_docs.size();
    auto before = extract_topics(before_docs, config, before_vectors);
    auto after = extract_topics(after_docs, config, after_vectors);
    if (!before || !after) {
        r.unexplained = true;
        r.reason = "insufficient documents (before " + std::to_string(before_docs.size()) + ", after " +
                   std::to_string(after_docs.size()) + ", need " + std::to_string(config.min_docs) + ")";
        if (before) r.before = std::move(*before);
        if (after) r.after = std::move(*after);
        return r;
    }
    r.before = std::move(*before);
    r.after = std::move(*after);
    for (std::size_t i = 0; i < r.after.size(); ++i) {
        std::vector<double> row;
        bool fresh = true;
        for (const auto& b : r.before) {
            double j = keyword_jaccard(r.after[i].keywords, b.keywords);
            row.push_back(j);
            if (j >= config.jaccard_new_threshold) fresh = false;
        }
        r.jaccard.push_back(std::move(row));
        if (fresh) r.emerging.push_back(i);
    }
    return r;
}

std::optional<double> npmi_coherence(std::span<const Topic> topics, std::span<const TokenList> reference,
                                     double epsilon) {
    if (reference.empty()) return std::nullopt;
    std::vector<std::set<std::string>> docs;
    docs.reserve(reference.size());
    for (const auto& d : reference) docs.emplace_back(d.begin(), d.end());
    const double n = static_cast<double>(docs.size());
    auto freq = [&](const std::string& a, const std::string* b) {
        std::size_t c = 0;
        for (const auto& d : docs)
            if (d.count(a) && (!b || d.count(*b))) ++c;
        return static_cast<double>(c) / n;
    };

    double total = 0.0;
    std::size_t scored_topics = 0;
    for (const auto& t : topics) {
        double sum = 0.0;
        std::size_t pairs = 0;
        for (std::size_t i = 0; i < t.keywords.size(); ++i) {
            for (std::size_t j = i + 1; j < t.keywords.size(); ++j) {
                double p1 = freq(t.keywords[i], nullptr), p2 = freq(t.keywords[j], nullptr);
                if (p1 == 0.0 || p2 == 0.0) continue;
                double p12 = freq(t.keywords[i], &t.keywords[j]);
                double v;
                if (p12 >= 1.0) {
                    v = 1.0;
                } else if (p12 == 0.0) {
                    v = -1.0;
                } else {
                    double joint = p12 + epsilon;
                    v = std::log(joint / (p1 * p2)) / -std::log(joint);
                }
                sum += std::clamp(v, -1.0, 1.0);
                ++pairs;
            }
        }
        if (pairs == 0) continue;
        total += sum / static_cast<double>(pairs);
        ++scored_topics;
    }
    if (scored_topics == 0) return std::nullopt;
    return total / static_cast<double>(scored_topics);
}

double topic_diversity(std::span<const Topic> topics, std::size_t top_n) {
    std::set<std::string> unique;
    std::size_t total = 0;
    for (const auto& t : topics) {
        for (std::size_t i = 0; i < t.keywords.size() && i < top_n; ++i) {
            unique.insert(t.keywords[i]);
            ++total;
        }
    }
    if (total == 0) throw DataError("topic diversity needs at least one keyword");
    return static_cast<double>(unique.size()) / static_cast<double>(total);
}

}  // namespace moodpulse
