#include "moodpulse/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "csv.hpp"
#include "moodpulse/evaluation.hpp"
#include "moodpulse/reaction.hpp"
#include "moodpulse/seeding.hpp"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace moodpulse {

std::string_view stage_name(Stage s) noexcept {
    switch (s) {
        case Stage::ingest: return "ingest";
        case Stage::label: return "label";
        case Stage::series: return "series";
        case Stage::detect: return "detect";
        case Stage::measure: return "measure";
        case Stage::explain: return "explain";
        case Stage::evaluate: return "evaluate";
        case Stage::report: return "report";
    }
    return "unknown";
}

int exit_code(Stage s) noexcept {
    switch (s) {
        case Stage::ingest: return 3;
        case Stage::label: return 4;
        case Stage::series: return 5;
        case Stage::detect: return 6;
        case Stage::measure: return 7;
        case Stage::explain: return 8;
        case Stage::evaluate:
        case Stage::report: return 9;
    }
    return 1;
}

StageError::StageError(Stage stage, const std::string& what)
    : Error(std::string(stage_name(stage)) + ": " + what), stage_(stage) {}

std::string_view library_version() noexcept { return MOODPULSE_VERSION; }

namespace {

const char* const kPosts = "posts.jsonl";
const char* const kLabels = "labels.csv";
const char* const kSeries = "timeseries.csv";
const char* const kChangepoints = "changepoints.json";
const char* const kReactions = "reactions.json";
const char* const kTopics = "topics.json";
const char* const kEval = "eval.json";

template <typename F>
void guarded(Stage stage, F&& body) {
    try {
        body();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

std::ifstream open_in(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DataError("cannot read '" + p.string() + "'");
    return in;
}

void write_text(const fs::path& p, const std::string& body) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << body;
    out.close();
    if (!out) throw DataError("cannot write '" + p.string() + "'");
}

template <typename W>
void write_with(const fs::path& p, W&& writer) {
    std::ostringstream buf;
    writer(buf);
    write_text(p, buf.str());
}

ojson real(double v) {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return detail::round6(v);
}

ojson real(std::optional<double> v) { return v ? real(*v) : ojson(nullptr); }

std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::vector<PreprocessedPost> load_posts(const fs::path& dir) {
    auto in = open_in(dir / kPosts);
    return read_preprocessed(in);
}

std::vector<std::string> ids_of(const std::vector<PreprocessedPost>& posts) {
    std::vector<std::string> ids;
    ids.reserve(posts.size());
    for (const auto& p : posts) ids.push_back(p.id);
    return ids;
}

LabelTable load_stage_labels(const fs::path& dir, const std::vector<std::string>& ids) {
    auto in = open_in(dir / kLabels);
    return load_labels(in, &ids);
}

SeriesSet load_series(const fs::path& dir) {
    auto in = open_in(dir / kSeries);
    return read_series_csv(in);
}

std::vector<ChangePoint> load_changepoints(const fs::path& dir) {
    auto in = open_in(dir / kChangepoints);
    return read_changepoints_json(in);
}

std::unordered_set<std::string> stopword_set(const PipelineConfig& c) {
    if (c.stopwords.empty()) return {};
    return load_wordlist(c.stopwords.string());
}

DetectorConfig seeded_detector(const PipelineConfig& c) {
    auto d = c.detector;
    d.rng_seed = c.seed;
    return d;
}

// ---- INI handling ---------------------------------------------------------------------------

using Tree = boost::property_tree::ptree;

class IniReader {
public:
    IniReader(const Tree& tree, fs::path base) : tree_(tree), base_(std::move(base)) {}

    std::optional<std::string> get(const std::string& section, const std::string& key) {
        used_.insert(section + "." + key);
        auto sec = tree_.get_child_optional(section);
        if (!sec) return std::nullopt;
        auto v = sec->get_optional<std::string>(key);
        if (!v) return std::nullopt;
        return std::string(detail::trim(*v));
    }

    void path(const std::string& section, const std::string& key, fs::path& out) {
        if (auto v = get(section, key)) {
            if (v->empty()) {
                out.clear();
                return;
            }
            fs::path p(*v);
            out = p.is_absolute() ? p : (base_ / p).lexically_normal();
        }
    }

    void text(const std::string& section, const std::string& key, std::string& out) {
        if (auto v = get(section, key)) out = *v;
    }

    void real(const std::string& section, const std::string& key, double& out) {
        if (auto v = get(section, key)) out = parse_real_or_throw(section, key, *v);
    }

    void real(const std::string& section, const std::string& key, std::optional<double>& out) {
        if (auto v = get(section, key)) {
            if (v->empty() || *v == "auto") {
                out.reset();
            } else {
                out = parse_real_or_throw(section, key, *v);
            }
        }
    }

    template <typename T>
    void count(const std::string& section, const std::string& key, T& out) {
        if (auto v = get(section, key)) {
            auto n = detail::parse_int(*v);
            if (!n || *n < 0) throw ConfigError(section + "." + key + " must be a non-negative integer");
            out = static_cast<T>(*n);
        }
    }

    void flag(const std::string& section, const std::string& key, bool& out) {
        if (auto v = get(section, key)) {
            auto s = detail::to_lower_ascii(*v);
            if (s == "1" || s == "true" || s == "yes" || s == "on") {
                out = true;
            } else if (s == "0" || s == "false" || s == "no" || s == "off") {
                out = false;
            } else {
                throw ConfigError(section + "." + key + " must be a boolean");
            }
        }
    }

    void reject_unknown() const {
        for (const auto& [section, keys] : tree_) {
            if (keys.empty() && !keys.data().empty())
                throw ConfigError("key '" + section + "' outside any section");
            for (const auto& [key, value] : keys)
                if (!used_.count(section + "." + key)) throw ConfigError("unknown config key " + section + "." + key);
        }
    }

private:
    static double parse_real_or_throw(const std::string& section, const std::string& key, const std::string& v) {
        auto d = detail::parse_real(v);
        if (!d || !std::isfinite(*d)) throw ConfigError(section + "." + key + " must be a real number");
        return *d;
    }

    const Tree& tree_;
    fs::path base_;
    std::set<std::string> used_;
};

std::string labeler_name(LabelerMode m) {
    switch (m) {
        case LabelerMode::precomputed: return "precomputed";
        case LabelerMode::lexicon: return "lexicon";
        case LabelerMode::ddr: return "ddr";
    }
    return "";
}

}  // namespace

PipelineConfig load_config(const fs::path& file) {
    Tree tree;
    try {
        boost::property_tree::ini_parser::read_ini(file.string(), tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError("cannot read config '" + file.string() + "': " + e.message() + " (line " +
                          std::to_string(e.line()) + ")");
    }
    PipelineConfig c;
    IniReader r(tree, file.has_parent_path() ? file.parent_path() : fs::path("."));

    r.path("paths", "corpus", c.paths.corpus);
    if (auto f = r.get("paths", "format")) {
        auto fmt = parse_input_format(*f);
        if (!fmt) throw ConfigError("paths.format must be jsonl or csv");
        c.paths.format = *fmt;
    }
    r.path("paths", "labels", c.paths.labels);
    r.path("paths", "lexicon", c.paths.lexicon);
    r.path("paths", "vectors", c.paths.vectors);
    r.path("paths", "verdicts", c.paths.verdicts);
    r.path("paths", "doc_vectors", c.paths.doc_vectors);
    r.path("paths", "gold_labels", c.paths.gold_labels);
    r.path("paths", "output", c.paths.output);

    r.text("preprocess", "time_zone", c.time_zone);
    r.path("preprocess", "emoji_table", c.emoji_table);
    r.path("preprocess", "hashtag_wordlist", c.hashtag_wordlist);
    r.path("preprocess", "stopwords", c.stopwords);
    if (auto m = r.get("preprocess", "on_malformed")) {
        auto p = parse_malformed_policy(*m);
        if (!p) throw ConfigError("preprocess.on_malformed must be skip or fail");
        c.on_malformed = *p;
    }
    r.flag("preprocess", "dedupe_exact", c.dedupe_exact);

    if (auto m = r.get("labeler", "mode")) {
        if (*m == "precomputed") {
            c.labeler = LabelerMode::precomputed;
        } else if (*m == "lexicon") {
            c.labeler = LabelerMode::lexicon;
        } else if (*m == "ddr") {
            c.labeler = LabelerMode::ddr;
        } else {
            throw ConfigError("labeler.mode must be precomputed, lexicon or ddr");
        }
    }
    r.real("labeler", "ddr_threshold", c.ddr.threshold);
    r.count("labeler", "ddr_min_covered_tokens", c.ddr.min_covered_tokens);

    auto& d = c.detector;
    r.count("detector", "window_days", d.window_days);
    r.count("detector", "stride_days", d.stride_days);
    r.real("detector", "confidence_threshold", d.confidence_threshold);
    r.count("detector", "bootstrap_iters", d.bootstrap_iters);
    r.real("detector", "hazard", d.hazard);
    r.real("detector", "mu0", d.bocpd_prior.mu0);
    r.real("detector", "kappa0", d.bocpd_prior.kappa0);
    r.real("detector", "alpha0", d.bocpd_prior.alpha0);
    r.real("detector", "beta0", d.bocpd_prior.beta0);
    r.count("detector", "runlength_cut", d.bocpd_runlength_cut);
    r.count("detector", "burn_in", d.bocpd_burn_in);
    r.count("detector", "merge_window_days", d.merge_window_days);
    r.real("detector", "cusum_min_shift_z", d.cusum_min_shift_z);
    r.flag("detector", "cusum_localize", d.cusum_localize);

    if (auto t = r.get("measure", "ttest")) {
        if (*t == "welch") {
            c.ttest = TTestKind::welch;
        } else if (*t == "pooled") {
            c.ttest = TTestKind::pooled;
        } else {
            throw ConfigError("measure.ttest must be welch or pooled");
        }
    }

    r.count("topics", "n_topics", c.topics.n_topics);
    r.count("topics", "top_k_keywords", c.topics.top_k_keywords);
    r.count("topics", "window_days", c.topics.window_days);
    r.real("topics", "jaccard_new_threshold", c.topics.jaccard_new_threshold);
    r.count("topics", "min_docs", c.topics.min_docs);
    r.count("topics", "max_iterations", c.topics.max_iterations);

    r.count("evaluate", "grouping_window_days", c.grouping_window_days);

    if (auto s = r.get("run", "seed")) {
        auto n = detail::parse_int(*s);
        if (!n || *n < 0) throw ConfigError("run.seed must be a non-negative integer");
        c.seed = static_cast<std::uint64_t>(*n);
    }
    r.count("run", "threads", c.threads);

    r.reject_unknown();
    c.validate();
    return c;
}

void PipelineConfig::validate() const {
    detector.validate();
    topics.validate();
    TimeZone::locate(time_zone);
    if (threads == 0) throw ConfigError("run.threads must be positive");
    if (paths.output.empty()) throw ConfigError("paths.output must be set");
    switch (labeler) {
        case LabelerMode::precomputed:
            if (paths.labels.empty()) throw ConfigError("labeler mode precomputed needs paths.labels");
            break;
        case LabelerMode::lexicon:
            if (paths.lexicon.empty()) throw ConfigError("labeler mode lexicon needs paths.lexicon");
            break;
        case LabelerMode::ddr:
            if (paths.lexicon.empty() || paths.vectors.empty())
                throw ConfigError("labeler mode ddr needs paths.lexicon and paths.vectors");
            if (ddr.threshold < -1.0 || ddr.threshold > 1.0) throw ConfigError("ddr_threshold must lie in [-1, 1]");
            break;
    }
}

std::string PipelineConfig::canonical() const {
    std::map<std::string, std::string> kv;
    auto p = [](const fs::path& x) { return x.generic_string(); };
    auto r = [](double v) { return detail::format_real(v); };
    auto o = [&](const std::optional<double>& v) { return v ? r(*v) : std::string("auto"); };
    kv["paths.corpus"] = p(paths.corpus);
    kv["paths.format"] = paths.format == InputFormat::jsonl ? "jsonl" : "csv";
    kv["paths.labels"] = p(paths.labels);
    kv["paths.lexicon"] = p(paths.lexicon);
    kv["paths.vectors"] = p(paths.vectors);
    kv["paths.verdicts"] = p(paths.verdicts);
    kv["paths.doc_vectors"] = p(paths.doc_vectors);
    kv["paths.gold_labels"] = p(paths.gold_labels);
    kv["preprocess.time_zone"] = time_zone;
    kv["preprocess.emoji_table"] = p(emoji_table);
    kv["preprocess.hashtag_wordlist"] = p(hashtag_wordlist);
    kv["preprocess.stopwords"] = p(stopwords);
    kv["preprocess.on_malformed"] = on_malformed == MalformedPolicy::skip ? "skip" : "fail";
    kv["preprocess.dedupe_exact"] = dedupe_exact ? "true" : "false";
    kv["labeler.mode"] = labeler_name(labeler);
    kv["labeler.ddr_threshold"] = r(ddr.threshold);
    kv["labeler.ddr_min_covered_tokens"] = std::to_string(ddr.min_covered_tokens);
    kv["detector.window_days"] = std::to_string(detector.window_days);
    kv["detector.stride_days"] = std::to_string(detector.stride_days);
    kv["detector.confidence_threshold"] = r(detector.confidence_threshold);
    kv["detector.bootstrap_iters"] = std::to_string(detector.bootstrap_iters);
    kv["detector.hazard"] = r(detector.hazard);
    kv["detector.mu0"] = o(detector.bocpd_prior.mu0);
    kv["detector.kappa0"] = r(detector.bocpd_prior.kappa0);
    kv["detector.alpha0"] = r(detector.bocpd_prior.alpha0);
    kv["detector.beta0"] = o(detector.bocpd_prior.beta0);
    kv["detector.runlength_cut"] = std::to_string(detector.bocpd_runlength_cut);
    kv["detector.burn_in"] = std::to_string(detector.bocpd_burn_in);
    kv["detector.merge_window_days"] = std::to_string(detector.merge_window_days);
    kv["detector.cusum_min_shift_z"] = r(detector.cusum_min_shift_z);
    kv["detector.cusum_localize"] = detector.cusum_localize ? "true" : "false";
    kv["measure.ttest"] = ttest == TTestKind::welch ? "welch" : "pooled";
    kv["topics.n_topics"] = std::to_string(topics.n_topics);
    kv["topics.top_k_keywords"] = std::to_string(topics.top_k_keywords);
    kv["topics.window_days"] = std::to_string(topics.window_days);
    kv["topics.jaccard_new_threshold"] = r(topics.jaccard_new_threshold);
    kv["topics.min_docs"] = std::to_string(topics.min_docs);
    kv["topics.max_iterations"] = std::to_string(topics.max_iterations);
    kv["evaluate.grouping_window_days"] = std::to_string(grouping_window_days);
    kv["run.seed"] = std::to_string(seed);
    std::string out;
    for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
    return out;
}

std::uint64_t PipelineConfig::hash() const { return fnv1a64(canonical()); }

// ---- stages ----------------------------------------------------------------------------------

void stage_ingest(const PipelineConfig& config, const fs::path& dir) {
    guarded(Stage::ingest, [&] {
        if (config.paths.corpus.empty()) throw DataError("no corpus path configured");
        std::ifstream in(config.paths.corpus, std::ios::binary);
        if (!in) throw DataError("cannot read corpus '" + config.paths.corpus.string() + "'");

        PreprocessConfig pre;
        pre.time_zone = TimeZone::locate(config.time_zone);
        if (!config.emoji_table.empty()) pre.emoji_map = load_emoji_table(config.emoji_table.string());
        if (!config.hashtag_wordlist.empty()) pre.hashtag_wordlist = load_wordlist(config.hashtag_wordlist.string());
        pre.on_malformed = config.on_malformed;

        auto parsed = parse_posts(in, config.paths.format, config.on_malformed);
        std::vector<PreprocessedPost> processed;
        processed.reserve(parsed.posts.size());
        for (const auto& p : parsed.posts) processed.push_back(preprocess(p, pre));

        std::size_t duplicates = 0;
        if (config.dedupe_exact) {
            auto keep = dedupe_exact(parsed.posts, processed);
            duplicates = processed.size() - keep.size();
            std::vector<PreprocessedPost> kept;
            kept.reserve(keep.size());
            for (auto i : keep) kept.push_back(std::move(processed[i]));
            processed = std::move(kept);
        }
        if (processed.empty()) throw DataError("corpus yielded no usable posts");

        std::set<std::string> seen;
        for (const auto& p : processed)
            if (!seen.insert(p.id).second) throw DataError("duplicate post id '" + p.id + "'");

        if (parsed.skipped || duplicates) {
            std::cerr << "ingest: " << processed.size() << " posts, " << parsed.skipped << " malformed skipped, "
                      << duplicates << " exact duplicates dropped\n";
            for (std::size_t i = 0; i < parsed.errors.size() && i < 5; ++i)
                std::cerr << "  line " << parsed.errors[i].line << ": " << parsed.errors[i].message << '\n';
        }
        write_with(dir / kPosts, [&](std::ostream& o) { write_preprocessed(o, processed); });
    });
}

void stage_label(const PipelineConfig& config, const fs::path& dir) {
    guarded(Stage::label, [&] {
        auto posts = load_posts(dir);
        std::vector<std::pair<std::string, LabelVector>> rows;
        rows.reserve(posts.size());
        switch (config.labeler) {
            case LabelerMode::precomputed: {
                auto ids = ids_of(posts);
                std::ifstream in(config.paths.labels, std::ios::binary);
                if (!in) throw DataError("cannot read labels '" + config.paths.labels.string() + "'");
                auto table = load_labels(in, &ids);
                if (table.unknown_ids || table.missing_posts)
                    std::cerr << "label: " << table.unknown_ids << " label rows without a post, " << table.missing_posts
                              << " posts without labels (treated as unlabeled)\n";
                for (const auto& p : posts) rows.emplace_back(p.id, table.labels.at(p.id));
                break;
            }
            case LabelerMode::lexicon: {
                auto lex = Lexicon::load_file(config.paths.lexicon.string());
                for (const auto& p : posts) rows.emplace_back(p.id, label_with_lexicon(p.tokens, lex));
                break;
            }
            case LabelerMode::ddr: {
                auto lex = Lexicon::load_file(config.paths.lexicon.string());
                auto table = WordVectorTable::load_file(config.paths.vectors.string());
                DDRLabeler labeler(lex, table, config.ddr);
                for (const auto& p : posts) rows.emplace_back(p.id, labeler.label(p.tokens));
                break;
            }
        }
        write_with(dir / kLabels, [&](std::ostream& o) { write_labels(o, rows); });
    });
}

void stage_series(const PipelineConfig&, const fs::path& dir) {
    guarded(Stage::series, [&] {
        auto posts = load_posts(dir);
        auto labels = load_stage_labels(dir, ids_of(posts));
        std::vector<std::pair<Date, LabelVector>> points;
        points.reserve(posts.size());
        for (const auto& p : posts) points.emplace_back(p.day, labels.labels.at(p.id));
        auto series = build_daily_fractions(points);
        write_with(dir / kSeries, [&](std::ostream& o) { write_series_csv(o, series); });
    });
}

void stage_detect(const PipelineConfig& config, const fs::path& dir) {
    guarded(Stage::detect, [&] {
        auto series = load_series(dir);
        auto det = seeded_detector(config);
        std::vector<std::vector<ChangePoint>> found(series.size());
        detail::parallel_for(series.size(), config.threads,
                             [&](std::size_t i) { found[i] = detect_changepoints(series[i], det); });
        std::vector<ChangePoint> all;
        for (auto& f : found) all.insert(all.end(), f.begin(), f.end());
        std::sort(all.begin(), all.end(), [](const ChangePoint& a, const ChangePoint& b) {
            if (a.date != b.date) return a.date < b.date;
            return a.category < b.category;
        });
        write_with(dir / kChangepoints, [&](std::ostream& o) { write_changepoints_json(o, all); });
    });
}

void stage_measure(const PipelineConfig& config, const fs::path& dir) {
    guarded(Stage::measure, [&] {
        auto series = load_series(dir);
        auto cps = load_changepoints(dir);
        std::map<AffectCategory, const DailyAffectSeries*> by_cat;
        for (const auto& s : series) by_cat[s.category] = &s;

        std::vector<ReactionRecord> records(cps.size());
        detail::parallel_for(cps.size(), config.threads, [&](std::size_t i) {
            auto& rec = records[i];
            rec.change_point = cps[i];
            auto it = by_cat.find(cps[i].category);
            if (it == by_cat.end()) throw DataError("no series for category " + std::string(category_name(cps[i].category)));
            try {
                rec.short_term = short_term_change(*it->second, cps[i].date);
            } catch (const DataError& e) {
                rec.short_term_error = e.what();
            }
            try {
                rec.long_term = long_term_change(*it->second, cps[i].date, config.ttest);
            } catch (const DataError& e) {
                rec.long_term_error = e.what();
            }
        });
        write_with(dir / kReactions, [&](std::ostream& o) { write_reactions_json(o, records); });
    });
}

namespace {

ojson topics_json(const std::vector<Topic>& topics) {
    ojson arr = ojson::array();
    for (const auto& t : topics) {
        ojson j;
        j["id"] = t.id;
        j["size"] = t.size;
        j["keywords"] = t.keywords;
        ojson scores = ojson::array();
        for (double s : t.scores) scores.push_back(real(s));
        j["scores"] = std::move(scores);
        arr.push_back(std::move(j));
    }
    return arr;
}

std::optional<WordVectorTable> load_doc_vectors(const PipelineConfig& config) {
    if (config.paths.doc_vectors.empty()) return std::nullopt;
    return WordVectorTable::load_file(config.paths.doc_vectors.string());
}

}  // namespace

void stage_explain(const PipelineConfig& config, const fs::path& dir) {
    guarded(Stage::explain, [&] {
        auto posts = load_posts(dir);
        auto labels = load_stage_labels(dir, ids_of(posts));
        auto cps = load_changepoints(dir);
        auto doc_vectors = load_doc_vectors(config);
        TopicConfig base = config.topics;
        base.stopwords = stopword_set(config);

        const long window = static_cast<long>(base.window_days);
        const long merge = static_cast<long>(config.detector.merge_window_days);

        std::vector<ojson> reports(cps.size());
        detail::parallel_for(cps.size(), config.threads, [&](std::size_t i) {
            const auto& cp = cps[i];
            std::vector<AffectCategory> cats;
            if (cp.direction == Direction::increase) {
                cats.push_back(cp.category);
            } else {
                for (const auto& other : cps)
                    if (other.direction == Direction::increase && other.category != cp.category &&
                        std::labs((other.date - cp.date).count()) <= merge &&
                        std::find(cats.begin(), cats.end(), other.category) == cats.end())
                        cats.push_back(other.category);
                std::sort(cats.begin(), cats.end());
            }

            ojson j;
            j["category"] = category_name(cp.category);
            j["date"] = format_date(cp.date);
            j["direction"] = direction_name(cp.direction);
            ojson via = ojson::array();
            for (auto c : cats) via.push_back(category_name(c));
            j["explained_by"] = std::move(via);

            if (cats.empty()) {
                j["unexplained"] = true;
                j["reason"] = "decrease without a concurrent increase in another category";
                j["before_docs"] = 0;
                j["after_docs"] = 0;
                j["topics_before"] = ojson::array();
                j["topics_after"] = ojson::array();
                j["emerging"] = ojson::array();
                reports[i] = std::move(j);
                return;
            }

            std::vector<TokenList> before, after;
            std::vector<std::vector<double>> before_vec, after_vec;
            for (const auto& p : posts) {
                const auto& lv = labels.labels.at(p.id);
                if (std::none_of(cats.begin(), cats.end(), [&](AffectCategory c) { return lv.test(c); })) continue;
                long off = (p.day - cp.date).count();
                bool is_before = off >= -window && off < 0;
                bool is_after = off >= 0 && off < window;
                if (!is_before && !is_after) continue;
                (is_before ? before : after).push_back(p.tokens);
                if (doc_vectors) {
                    auto* v = doc_vectors->find(p.id);
                    if (!v) throw DataError("no document vector for post '" + p.id + "'");
                    (is_before ? before_vec : after_vec).push_back(*v);
                }
            }

            TopicConfig tc = base;
            tc.rng_seed = mix_seed(category_seed(config.seed, cp.category),
                                   static_cast<std::uint64_t>(cp.date.time_since_epoch().count()));
            auto rep = emerging_topics(before, after, tc, doc_vectors ? &before_vec : nullptr,
                                       doc_vectors ? &after_vec : nullptr);

            j["unexplained"] = rep.unexplained;
            if (rep.unexplained) j["reason"] = rep.reason;
            j["before_docs"] = rep.before_docs;
            j["after_docs"] = rep.after_docs;
            j["topics_before"] = topics_json(rep.before);
            j["topics_after"] = topics_json(rep.after);
            j["emerging"] = rep.emerging;
            ojson jac = ojson::array();
            for (const auto& row : rep.jaccard) {
                ojson r = ojson::array();
                for (double v : row) r.push_back(real(v));
                jac.push_back(std::move(r));
            }
            j["jaccard"] = std::move(jac);
            if (!rep.after.empty()) {
                j["npmi_after"] = real(npmi_coherence(rep.after, after));
                bool any = std::any_of(rep.after.begin(), rep.after.end(), [](const Topic& t) { return !t.keywords.empty(); });
                j["diversity_after"] = any ? real(topic_diversity(rep.after)) : ojson(nullptr);
            }
            reports[i] = std::move(j);
        });
        ojson arr = ojson::array();
        for (auto& r : reports) arr.push_back(std::move(r));
        write_text(dir / kTopics, arr.dump(2) + "\n");
    });
}

void stage_evaluate(const PipelineConfig& config, const fs::path& dir) {
    guarded(Stage::evaluate, [&] {
        auto cps = load_changepoints(dir);
        auto clusters = group_events(cps, config.grouping_window_days);
        std::vector<EventVerdict> verdicts;
        bool have_verdicts = !config.paths.verdicts.empty();
        if (have_verdicts) {
            std::ifstream in(config.paths.verdicts, std::ios::binary);
            if (!in) throw DataError("cannot read verdicts '" + config.paths.verdicts.string() + "'");
            verdicts = load_verdicts(in);
            assign_verdicts(clusters, verdicts);
        }
        auto conf = confidence_summary(cps);
        std::optional<double> prec, der;
        if (have_verdicts) {
            prec = precision(clusters);
            der = derate(clusters);
        }

        std::set<AffectCategory> cats;
        for (const auto& c : cps) cats.insert(c.category);

        ojson j;
        j["n_changepoints"] = cps.size();
        j["n_events"] = clusters.size();
        j["n_categories_with_changepoints"] = cats.size();
        j["precision"] = real(prec);
        j["derate"] = real(der);
        j["confidence_mean"] = conf ? real(conf->mean) : ojson(nullptr);
        j["confidence_std"] = conf ? real(conf->std_dev) : ojson(nullptr);

        ojson display;
        display["precision"] = prec ? fixed2(*prec) : "n/a";
        display["derate"] = der ? fixed2(*der) : "n/a";
        display["confidence"] = conf ? fixed2(conf->mean) + " ± " + fixed2(conf->std_dev) : "n/a";
        j["display"] = std::move(display);

        ojson events = ojson::array();
        for (const auto& c : clusters) {
            ojson e;
            e["first"] = format_date(c.first);
            e["last"] = format_date(c.last);
            std::set<AffectCategory> members;
            for (const auto& m : c.members) members.insert(m.category);
            ojson names = ojson::array();
            for (auto m : members) names.push_back(category_name(m));
            e["categories"] = std::move(names);
            e["event_id"] = c.verdict ? ojson(verdicts[*c.verdict].event_id) : ojson(nullptr);
            e["verified"] = c.verdict ? ojson(c.verified) : ojson(nullptr);
            events.push_back(std::move(e));
        }
        j["events"] = std::move(events);

        if (!config.paths.gold_labels.empty()) {
            auto posts = load_posts(dir);
            auto ids = ids_of(posts);
            auto predicted = load_stage_labels(dir, ids);
            std::ifstream in(config.paths.gold_labels, std::ios::binary);
            if (!in) throw DataError("cannot read gold labels '" + config.paths.gold_labels.string() + "'");
            auto gold = load_labels(in, nullptr);
            auto scores = f1_scores(predicted.labels, gold.labels);
            ojson f1;
            double macro = 0.0;
            for (auto c : all_categories()) {
                const auto& s = scores[index_of(c)];
                ojson cj;
                cj["precision"] = real(s.precision);
                cj["recall"] = real(s.recall);
                cj["f1"] = real(s.f1);
                cj["support"] = s.support;
                f1[std::string(category_name(c))] = std::move(cj);
                macro += s.f1;
            }
            j["labeler_f1"] = std::move(f1);
            j["labeler_macro_f1"] = real(macro / static_cast<double>(kCategoryCount));
        }
        write_text(dir / kEval, j.dump(2) + "\n");
    });
}

void export_plot_data(const SeriesSet& series, std::span<const ChangePoint> changepoints, const fs::path& dir) {
    fs::create_directories(dir / "plots");
    for (const auto& s : series) {
        std::string body = "date,fraction\n";
        for (std::size_t i = 0; i < s.size(); ++i)
            body += format_date(s.date_at(i)) + "," + (s.missing[i] ? std::string{} : detail::format_real(s.values[i])) + "\n";
        write_text(dir / "plots" / (std::string(category_name(s.category)) + ".csv"), body);
    }
    std::string marks = "date,category,method,confidence,direction\n";
    for (const auto& c : changepoints)
        marks += format_date(c.date) + "," + std::string(category_name(c.category)) + "," +
                 std::string(method_name(c.method)) + "," + detail::format_real(detail::round6(c.confidence)) + "," +
                 std::string(direction_name(c.direction)) + "\n";
    write_text(dir / "plots" / "changepoints.csv", marks);
}

void stage_report(const PipelineConfig&, const fs::path& dir) {
    guarded(Stage::report, [&] {
        auto series = load_series(dir);
        auto cps = load_changepoints(dir);
        export_plot_data(series, cps, dir);

        std::ostringstream md;
        md << "# Affect change report\n\n";
        if (fs::exists(dir / kEval)) {
            auto in = open_in(dir / kEval);
            auto ev = nlohmann::json::parse(in);
            md << "Change points: " << ev.at("n_changepoints").get<std::size_t>()
               << ", events: " << ev.at("n_events").get<std::size_t>()
               << ", precision: " << ev.at("display").at("precision").get<std::string>()
               << ", DERate: " << ev.at("display").at("derate").get<std::string>()
               << ", confidence: " << ev.at("display").at("confidence").get<std::string>() << "\n\n";
        }
        md << "| date | category | method | confidence | short-term | long-term | emerging keywords |\n";
        md << "|---|---|---|---|---|---|---|\n";

        nlohmann::json reactions = nlohmann::json::array(), topics = nlohmann::json::array();
        if (fs::exists(dir / kReactions)) {
            auto in = open_in(dir / kReactions);
            reactions = nlohmann::json::parse(in);
        }
        if (fs::exists(dir / kTopics)) {
            auto in = open_in(dir / kTopics);
            topics = nlohmann::json::parse(in);
        }
        auto find = [](const nlohmann::json& arr, const ChangePoint& c) -> const nlohmann::json* {
            for (const auto& r : arr)
                if (r.at("category") == category_name(c.category) && r.at("date") == format_date(c.date)) return &r;
            return nullptr;
        };
        for (const auto& c : cps) {
            std::string st = "n/a", lt = "n/a", kw;
            if (auto* r = find(reactions, c)) {
                if (!r->at("short_term").is_null()) st = r->at("short_term").at("display").get<std::string>();
                if (!r->at("long_term").is_null()) lt = r->at("long_term").at("display").get<std::string>();
            }
            if (auto* t = find(topics, c)) {
                if (t->at("unexplained").get<bool>()) {
                    kw = "(unexplained)";
                } else {
                    for (auto idx : t->at("emerging")) {
                        const auto& words = t->at("topics_after").at(idx.get<std::size_t>()).at("keywords");
                        std::string joined;
                        for (std::size_t k = 0; k < words.size() && k < 5; ++k)
                            joined += (k ? " " : "") + words[k].get<std::string>();
                        kw += (kw.empty() ? "" : "; ") + joined;
                    }
                }
            }
            md << "| " << format_date(c.date) << " | " << category_name(c.category) << " | " << method_name(c.method)
               << " | " << fixed2(c.confidence) << " | " << st << " | " << lt << " | " << kw << " |\n";
        }
        write_text(dir / "report.md", md.str());
    });
}

std::string manifest_json(const PipelineConfig& config) {
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config.hash()));
    ojson j;
    j["name"] = "moodpulse";
    j["version"] = library_version();
#if defined(__clang__)
    j["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
    j["compiler"] = std::string("gcc ") + __VERSION__;
#else
    j["compiler"] = "unknown";
#endif
    j["config_hash"] = hash;
    j["seed"] = config.seed;
    j["labeler"] = labeler_name(config.labeler);
    j["stages"] = {"ingest", "label", "series", "detect", "measure", "explain", "evaluate", "report"};
    return j.dump(2) + "\n";
}

void run_pipeline(const PipelineConfig& config) {
    const fs::path out = config.paths.output;
    const fs::path staging = out / ".staging";
    try {
        fs::create_directories(out);
        fs::remove_all(staging);
        fs::create_directories(staging);
    } catch (const fs::filesystem_error& e) {
        throw StageError(Stage::ingest, std::string("cannot prepare output directory: ") + e.what());
    }

    try {
        stage_ingest(config, staging);
        stage_label(config, staging);
        stage_series(config, staging);
        stage_detect(config, staging);
        stage_measure(config, staging);
        stage_explain(config, staging);
        stage_evaluate(config, staging);
        stage_report(config, staging);
        guarded(Stage::report, [&] { write_text(staging / "manifest.json", manifest_json(config)); });
    } catch (const StageError&) {
        std::error_code ec;
        fs::remove_all(out / "quarantine", ec);
        if (fs::is_empty(staging, ec)) {
            fs::remove_all(staging, ec);
        } else {
            fs::rename(staging, out / "quarantine", ec);
        }
        throw;
    }

    guarded(Stage::report, [&] {
        std::vector<fs::path> entries;
        for (const auto& e : fs::directory_iterator(staging)) entries.push_back(e.path());
        for (const auto& p : entries) {
            auto target = out / p.filename();
            fs::remove_all(target);
            fs::rename(p, target);
        }
        fs::remove_all(staging);
        fs::remove_all(out / "quarantine");
    });
}

void sweep_topics(const PipelineConfig& config, const fs::path& dir) {
    guarded(Stage::explain, [&] {
        auto posts = load_posts(dir);
        std::vector<TokenList> sample;
        for (const auto& p : posts)
            if (mix_seed(config.seed, fnv1a64(p.id)) % 10 == 0) sample.push_back(p.tokens);

        TopicConfig tc = config.topics;
        tc.stopwords = stopword_set(config);
        tc.min_docs = 1;
        tc.rng_seed = config.seed;

        ojson j;
        j["sample_docs"] = sample.size();
        ojson rows = ojson::array();
        for (std::size_t k = 10; k <= 50; k += 10) {
            tc.n_topics = k;
            auto topics = extract_topics(sample, tc);
            ojson r;
            r["n_topics"] = k;
            r["effective_topics"] = topics ? topics->size() : 0;
            r["npmi"] = topics ? real(npmi_coherence(*topics, sample)) : ojson(nullptr);
            bool any = topics && std::any_of(topics->begin(), topics->end(),
                                             [](const Topic& t) { return !t.keywords.empty(); });
            r["diversity"] = any ? real(topic_diversity(*topics)) : ojson(nullptr);
            rows.push_back(std::move(r));
        }
        j["sweep"] = std::move(rows);
        write_text(dir / "topic_sweep.json", j.dump(2) + "\n");
    });
}

}  // namespace moodpulse
