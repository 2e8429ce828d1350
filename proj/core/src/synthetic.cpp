#include "moodpulse/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "moodpulse/calendar.hpp"
#include "moodpulse/error.hpp"

namespace fs = std::filesystem;

namespace moodpulse {

namespace {

using Words = std::vector<std::string>;

const std::vector<Words> kThemes = {
    {"pizza", "pasta", "burger", "salad", "coffee", "bakery", "noodles", "taco", "sushi", "brunch", "soup", "dessert"},
    {"football", "match", "goal", "league", "coach", "season", "striker", "stadium", "referee", "derby", "fans", "score"},
    {"rain", "sunny", "forecast", "cloudy", "breeze", "umbrella", "humid", "drizzle", "fog", "heatwave", "chilly", "sky"},
    {"meeting", "deadline", "office", "project", "email", "manager", "report", "shift", "overtime", "payroll", "desk", "client"},
    {"concert", "album", "guitar", "playlist", "band", "lyrics", "drummer", "festival", "tour", "vinyl", "chorus", "singer"},
    {"train", "airport", "flight", "hotel", "beach", "luggage", "passport", "roadtrip", "ferry", "museum", "hostel", "map"},
};

const Words kQuake = {"quake", "tremor", "magnitude", "aftershock", "epicenter",
                      "seismic", "rubble", "shaking", "evacuation", "richter"};

const Words kGeneric = {"today", "people", "city", "time", "really", "still", "again", "week",
                        "everyone", "thing", "right", "night", "morning", "new", "back", "going"};

const Words kStopwords = {"the", "a", "and", "is", "to", "of", "in", "it", "for", "on",
                          "this", "that", "with", "so", "just", "my", "i", "we", "you", "are"};

struct AffectWords {
    const char* category;
    Words words;
    double rate;
};

const std::vector<AffectWords> kAffect = {
    {"anger", {"angry", "furious", "outrage", "rage", "livid", "fuming", "infuriating", "mad"}, 0.0},
    {"joy", {"happy", "delighted", "glad", "cheerful", "wonderful", "thrilled"}, 0.20},
    {"sadness", {"sad", "gloomy", "heartbroken", "miserable", "tearful"}, 0.12},
    {"fear", {"scared", "afraid", "terrified", "anxious", "nervous"}, 0.10},
    {"trust", {"reliable", "trustworthy", "honest", "dependable"}, 0.08},
    {"care", {"protect", "support", "kindness", "compassion"}, 0.08},
};

std::size_t zipf(std::mt19937_64& rng, std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / static_cast<double>(i + 1);
    std::discrete_distribution<std::size_t> d(w.begin(), w.end());
    return d(rng);
}

double anger_level(const SyntheticOptions& o, std::size_t day) {
    if (day < o.event_day) return o.baseline_anger;
    std::size_t k = day - o.event_day;
    if (k < 4) return o.baseline_anger + 0.15 + 0.05 * static_cast<double>(k);
    // Slow decay from the peak towards a raised plateau.
    double span = static_cast<double>(std::max<std::size_t>(o.n_days - o.event_day - 4, 1));
    double frac = static_cast<double>(k - 4) / span;
    return o.baseline_anger + 0.30 - 0.15 * frac;
}

double quake_share(const SyntheticOptions& o, std::size_t day) {
    if (day < o.event_day) return 0.0;
    std::size_t k = day - o.event_day;
    return k < 6 ? 0.35 : 0.15;
}

// Stratified flags: exactly round(rate * n) of the n posts, positions shuffled.
std::vector<bool> stratified(std::mt19937_64& rng, std::size_t n, double rate) {
    auto k = static_cast<std::size_t>(std::lround(std::clamp(rate, 0.0, 1.0) * static_cast<double>(n)));
    std::vector<bool> flags(n, false);
    std::fill(flags.begin(), flags.begin() + static_cast<std::ptrdiff_t>(std::min(k, n)), true);
    std::shuffle(flags.begin(), flags.end(), rng);
    return flags;
}

void write_file(const fs::path& p, const std::string& body) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << body;
    if (!out) throw DataError("cannot write '" + p.string() + "'");
}

}  // namespace

void write_synthetic_fixture(const fs::path& dir, const SyntheticOptions& o) {
    if (o.n_days == 0 || o.n_posts < o.n_days) throw ConfigError("synthetic fixture needs at least one post per day");
    if (o.event_day >= o.n_days) throw ConfigError("event day lies outside the synthetic range");
    fs::create_directories(dir);

    std::mt19937_64 rng(o.seed);
    std::normal_distribution<double> jitter(0.0, 0.015);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> second(0, 86399);

    const Date start = *parse_date("2024-03-01");
    std::string corpus;
    std::size_t next_id = 1;

    for (std::size_t day = 0; day < o.n_days; ++day) {
        std::size_t n = o.n_posts / o.n_days + (day < o.n_posts % o.n_days ? 1 : 0);
        std::vector<std::vector<bool>> flags;
        for (const auto& a : kAffect) {
            if (std::string_view(a.category) == "anger") {
                flags.push_back(stratified(rng, n, anger_level(o, day) + jitter(rng)));
            } else {
                std::vector<bool> f(n);
                for (std::size_t i = 0; i < n; ++i) f[i] = unit(rng) < a.rate;
                flags.push_back(std::move(f));
            }
        }
        std::vector<int> secs(n);
        for (auto& s : secs) s = second(rng);
        std::sort(secs.begin(), secs.end());

        for (std::size_t i = 0; i < n; ++i) {
            const bool angry = flags[0][i];
            const double q = quake_share(o, day);
            const bool quake = q > 0.0 && unit(rng) < (angry ? std::min(1.0, 2.0 * q + 0.05) : 0.5 * q);
            const Words& theme = quake ? kQuake : kThemes[static_cast<std::size_t>(unit(rng) * kThemes.size()) % kThemes.size()];

            std::vector<std::string> words;
            std::size_t len = 6 + static_cast<std::size_t>(unit(rng) * 5);
            for (std::size_t w = 0; w < len; ++w) {
                double u = unit(rng);
                if (u < 0.55) {
                    words.push_back(theme[zipf(rng, theme.size())]);
                } else if (u < 0.70) {
                    words.push_back(kGeneric[zipf(rng, kGeneric.size())]);
                } else {
                    words.push_back(kStopwords[zipf(rng, kStopwords.size())]);
                }
            }
            for (std::size_t a = 0; a < kAffect.size(); ++a) {
                if (!flags[a][i]) continue;
                auto pos = static_cast<std::size_t>(unit(rng) * static_cast<double>(words.size() + 1));
                words.insert(words.begin() + static_cast<std::ptrdiff_t>(std::min(pos, words.size())),
                             kAffect[a].words[zipf(rng, kAffect[a].words.size())]);
            }

            std::string text;
            for (const auto& w : words) text += (text.empty() ? "" : " ") + w;
            double extra = unit(rng);
            if (extra < 0.08) {
                text += " https://example.org/p/" + std::to_string(next_id);
            } else if (extra < 0.16) {
                text = "@user" + std::to_string(next_id % 97) + " " + text;
            } else if (extra < 0.22 && quake) {
                text += " #QuakeAlert";
            }

            char stamp[64];
            int s = secs[i];
            std::snprintf(stamp, sizeof stamp, "T%02d:%02d:%02d+00:00", s / 3600, (s / 60) % 60, s % 60);
            char id[32];
            std::snprintf(id, sizeof id, "p%06zu", next_id++);

            nlohmann::ordered_json j;
            j["id"] = id;
            j["timestamp"] = format_date(start + std::chrono::days(static_cast<int>(day))) + stamp;
            j["text"] = text;
            corpus += j.dump() + "\n";
        }
    }
    write_file(dir / "corpus.jsonl", corpus);

    std::string lexicon;
    for (const auto& a : kAffect)
        for (const auto& w : a.words) lexicon += w + "\t" + a.category + "\t1\n";
    lexicon += "happy\tpositive\t1\nangry\tnegative\t1\n";
    write_file(dir / "lexicon.tsv", lexicon);

    std::string stop;
    for (const auto& w : kStopwords) stop += w + "\n";
    for (const auto& w : kGeneric) stop += w + "\n";
    write_file(dir / "stopwords.txt", stop);

    const Date event = start + std::chrono::days(static_cast<int>(o.event_day));
    const Date last = start + std::chrono::days(static_cast<int>(o.n_days - 1));
    write_file(dir / "verdicts.csv", "event_id,start_date,end_date,verified,description\n"
                                     "quake," + format_date(event - std::chrono::days(2)) + "," +
                                         format_date(event + std::chrono::days(5)) + ",1,Synthetic earthquake\n" +
                                         "background," + format_date(start) + "," + format_date(last) +
                                         ",0,No real-world event\n");

    write_file(dir / "config.ini",
               "[paths]\n"
               "corpus = corpus.jsonl\n"
               "format = jsonl\n"
               "lexicon = lexicon.tsv\n"
               "verdicts = verdicts.csv\n"
               "output = out\n"
               "\n"
               "[preprocess]\n"
               "time_zone = UTC\n"
               "stopwords = stopwords.txt\n"
               "\n"
               "[labeler]\n"
               "mode = lexicon\n"
               "\n"
               "[run]\n"
               "seed = " + std::to_string(o.seed) + "\n");
}

}  // namespace moodpulse
