#include "moodpulse/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "csv.hpp"
#include "moodpulse/error.hpp"

namespace moodpulse {

void Lexicon::add(AffectCategory c, std::string word) { words_[index_of(c)].insert(detail::to_lower_ascii(word)); }

Lexicon Lexicon::load(std::istream& in) {
    Lexicon lex;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        detail::normalize_line(line, ++lineno == 1);
        if (detail::trim(line).empty() || line.front() == '#') continue;
        std::vector<std::string_view> cols;
        std::string_view rest = line;
        for (auto tab = rest.find('\t'); tab != std::string_view::npos; tab = rest.find('\t')) {
            cols.push_back(rest.substr(0, tab));
            rest.remove_prefix(tab + 1);
        }
        cols.push_back(rest);
        if (cols.size() < 2 || cols.size() > 3) throw ParseError(lineno, "expected word<TAB>category[<TAB>0|1]");
        if (cols.size() == 3) {
            auto flag = detail::trim(cols[2]);
            if (flag == "0") continue;
            if (flag != "1") throw ParseError(lineno, "association flag must be 0 or 1");
        }
        auto word = detail::trim(cols[0]);
        auto cat = parse_category(detail::to_lower_ascii(detail::trim(cols[1])));
        if (!cat || word.empty()) continue;
        lex.add(*cat, std::string(word));
    }
    return lex;
}

Lexicon Lexicon::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read lexicon '" + path + "'");
    return load(in);
}

LabelVector label_with_lexicon(std::span<const std::string> tokens, const Lexicon& lexicon) {
    LabelVector out;
    for (auto c : all_categories()) {
        const auto& words = lexicon.words(c);
        if (words.empty()) continue;
        for (const auto& t : tokens) {
            if (words.count(t)) {
                out.set(c);
                break;
            }
        }
    }
    return out;
}

WordVectorTable::WordVectorTable(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw DataError("word vector dimension must be positive");
}

void WordVectorTable::insert(std::string token, std::vector<double> vec) {
    if (vec.size() != dim_)
        throw DataError("vector for '" + token + "' has length " + std::to_string(vec.size()) + ", expected " +
                        std::to_string(dim_));
    for (double v : vec)
        if (std::isnan(v)) throw DataError("vector for '" + token + "' contains NaN");
    vectors_[std::move(token)] = std::move(vec);
}

const std::vector<double>* WordVectorTable::find(const std::string& token) const {
    auto it = vectors_.find(token);
    return it == vectors_.end() ? nullptr : &it->second;
}

WordVectorTable WordVectorTable::load(std::istream& in) {
    std::optional<WordVectorTable> table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        detail::normalize_line(line, ++lineno == 1);
        std::istringstream fields(line);
        std::string token;
        if (!(fields >> token)) continue;
        std::vector<double> vec;
        std::string num;
        while (fields >> num) {
            auto v = detail::parse_real(num);
            if (!v) throw ParseError(lineno, "non-numeric vector component '" + num + "'");
            vec.push_back(*v);
        }
        // word2vec text header: "<count> <dim>"
        if (lineno == 1 && vec.size() == 1 && detail::parse_int(token)) continue;
        if (vec.empty()) throw ParseError(lineno, "token without vector");
        if (!table) table.emplace(vec.size());
        try {
            table->insert(std::move(token), std::move(vec));
        } catch (const DataError& e) {
            throw ParseError(lineno, e.what());
        }
    }
    if (!table) throw DataError("word vector file is empty");
    return std::move(*table);
}

WordVectorTable WordVectorTable::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read word vectors '" + path + "'");
    return load(in);
}

namespace {

std::optional<std::vector<double>> mean_vector(const std::vector<const std::vector<double>*>& rows, std::size_t dim) {
    if (rows.empty()) return std::nullopt;
    std::vector<double> m(dim, 0.0);
    for (const auto* r : rows)
        for (std::size_t i = 0; i < dim; ++i) m[i] += (*r)[i];
    double norm = 0.0;
    for (double& v : m) {
        v /= static_cast<double>(rows.size());
        norm += v * v;
    }
    if (norm == 0.0 || !std::isfinite(norm)) return std::nullopt;
    return m;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    double c = dot / (std::sqrt(na) * std::sqrt(nb));
    return std::clamp(c, -1.0, 1.0);
}

}  // namespace

std::optional<double> ddr_score(std::span<const std::string> tokens, const std::unordered_set<std::string>& dictionary_words,
                                const WordVectorTable& table, std::size_t min_covered_tokens) {
    std::vector<const std::vector<double>*> doc, dict;
    for (const auto& t : tokens)
        if (auto* v = table.find(t)) doc.push_back(v);
    if (doc.size() < std::max<std::size_t>(min_covered_tokens, 1)) return std::nullopt;
    for (const auto& w : dictionary_words)
        if (auto* v = table.find(w)) dict.push_back(v);
    auto dm = mean_vector(doc, table.dim());
    auto cm = mean_vector(dict, table.dim());
    if (!dm || !cm) return std::nullopt;
    return cosine(*dm, *cm);
}

DDRLabeler::DDRLabeler(const Lexicon& dictionaries, const WordVectorTable& table, DDRConfig config)
    : table_(&table), config_(config) {
    if (config.threshold < -1.0 || config.threshold > 1.0) throw ConfigError("DDR threshold must lie in [-1, 1]");
    for (auto c : all_categories()) {
        std::vector<const std::vector<double>*> rows;
        for (const auto& w : dictionaries.words(c))
            if (auto* v = table.find(w)) rows.push_back(v);
        centroids_[index_of(c)] = mean_vector(rows, table.dim());
    }
}

std::optional<std::vector<double>> DDRLabeler::document_mean(std::span<const std::string> tokens) const {
    std::vector<const std::vector<double>*> rows;
    for (const auto& t : tokens)
        if (auto* v = table_->find(t)) rows.push_back(v);
    if (rows.size() < std::max<std::size_t>(config_.min_covered_tokens, 1)) return std::nullopt;
    return mean_vector(rows, table_->dim());
}

std::optional<double> DDRLabeler::score(std::span<const std::string> tokens, AffectCategory c) const {
    const auto& centroid = centroids_[index_of(c)];
    if (!centroid) return std::nullopt;
    auto doc = document_mean(tokens);
    if (!doc) return std::nullopt;
    return cosine(*doc, *centroid);
}

LabelVector DDRLabeler::label(std::span<const std::string> tokens) const {
    LabelVector out;
    auto doc = document_mean(tokens);
    if (!doc) return out;
    for (auto c : all_categories()) {
        const auto& centroid = centroids_[index_of(c)];
        if (centroid && cosine(*doc, *centroid) >= config_.threshold) out.set(c);
    }
    return out;
}

LabelTable load_labels(std::istream& in, const std::vector<std::string>* corpus_ids) {
    LabelTable table;
    std::string line;
    std::size_t lineno = 0;
    std::optional<detail::CsvHeader> header;
    std::size_t id_col = 0;
    std::array<std::optional<std::size_t>, kCategoryCount> cat_cols{};

    std::unordered_set<std::string> known;
    if (corpus_ids) known.insert(corpus_ids->begin(), corpus_ids->end());

    while (std::getline(in, line)) {
        ++lineno;
        detail::normalize_line(line, lineno == 1);
        if (!header) {
            if (detail::trim(line).empty()) continue;
            header = detail::parse_csv_header(line);
            auto id = header->find("id");
            if (!id) throw ParseError(lineno, "label header must contain an 'id' column");
            id_col = *id;
            for (auto c : all_categories()) cat_cols[index_of(c)] = header->find(category_name(c));
            for (const auto& name : header->names)
                if (name != "id" && !parse_category(name))
                    throw ParseError(lineno, "unknown label column '" + name + "'");
            continue;
        }
        if (detail::trim(line).empty()) continue;
        auto fields = detail::split_csv_line(line);
        if (!fields || fields->size() != header->names.size())
            throw ParseError(lineno, "expected " + std::to_string(header->names.size()) + " fields");
        std::string id(detail::trim((*fields)[id_col]));
        if (id.empty()) throw ParseError(lineno, "empty id");
        LabelVector v;
        for (auto c : all_categories()) {
            auto col = cat_cols[index_of(c)];
            if (!col) continue;
            auto f = detail::trim((*fields)[*col]);
            if (f == "1") {
                v.set(c);
            } else if (f != "0" && !f.empty()) {
                throw ParseError(lineno, "label '" + std::string(category_name(c)) + "' must be 0 or 1");
            }
        }
        if (corpus_ids && !known.count(id)) {
            ++table.unknown_ids;
            continue;
        }
        auto [it, inserted] = table.labels.emplace(id, v);
        if (!inserted && !(it->second == v)) throw DataError("conflicting label rows for id '" + id + "'");
    }
    if (corpus_ids) {
        for (const auto& id : *corpus_ids) {
            if (!table.labels.count(id)) {
                table.labels.emplace(id, LabelVector{});
                ++table.missing_posts;
            }
        }
    }
    return table;
}

void write_labels(std::ostream& out, const std::vector<std::pair<std::string, LabelVector>>& rows) {
    out << "id";
    for (auto c : all_categories()) out << ',' << category_name(c);
    out << '\n';
    for (const auto& [id, v] : rows) {
        out << detail::csv_escape(id);
        for (auto c : all_categories()) out << ',' << (v.test(c) ? '1' : '0');
        out << '\n';
    }
}

std::array<CategoryScore, kCategoryCount> f1_scores(const std::map<std::string, LabelVector>& predicted,
                                                    const std::map<std::string, LabelVector>& gold) {
    std::array<CategoryScore, kCategoryCount> scores{};
    std::size_t shared = 0;
    for (const auto& [id, g] : gold) {
        auto it = predicted.find(id);
        if (it == predicted.end()) continue;
        ++shared;
        for (auto c : all_categories()) {
            auto& s = scores[index_of(c)];
            bool p = it->second.test(c), t = g.test(c);
            if (p && t) ++s.true_positive;
            if (p && !t) ++s.false_positive;
            if (!p && t) ++s.false_negative;
        }
    }
    if (shared == 0) throw DataError("predicted and gold labels share no ids");
    for (auto& s : scores) {
        s.support = s.true_positive + s.false_negative;
        auto tp = static_cast<double>(s.true_positive);
        s.precision = s.true_positive + s.false_positive ? tp / static_cast<double>(s.true_positive + s.false_positive) : 0.0;
        s.recall = s.support ? tp / static_cast<double>(s.support) : 0.0;
        s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    }
    return scores;
}

}  // namespace moodpulse
