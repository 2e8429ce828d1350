#include "moodpulse/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include <json.hpp>

#include "csv.hpp"
#include "moodpulse/error.hpp"

namespace moodpulse {

namespace {

using json = nlohmann::json;

bool is_word_byte(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}
bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
bool is_alpha(char c) { return is_upper(c) || is_lower(c); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Decodes one UTF-8 sequence at s[pos]; returns (codepoint, byte length). Invalid bytes decode as
// themselves with length 1.
std::pair<char32_t, std::size_t> decode_utf8(std::string_view s, std::size_t pos) {
    auto b0 = static_cast<unsigned char>(s[pos]);
    if (b0 < 0x80) return {b0, 1};
    std::size_t len = b0 >= 0xF0 ? 4 : b0 >= 0xE0 ? 3 : b0 >= 0xC0 ? 2 : 1;
    if (len == 1 || pos + len > s.size()) return {b0, 1};
    char32_t cp = b0 & (0x7F >> len);
    for (std::size_t i = 1; i < len; ++i) {
        auto b = static_cast<unsigned char>(s[pos + i]);
        if ((b & 0xC0) != 0x80) return {b0, 1};
        cp = (cp << 6) | (b & 0x3F);
    }
    return {cp, len};
}

bool is_emoji(char32_t cp) {
    return (cp >= 0x1F000 && cp <= 0x1FAFF) || (cp >= 0x2600 && cp <= 0x27BF) || (cp >= 0x2B00 && cp <= 0x2BFF) ||
           (cp >= 0x2190 && cp <= 0x21FF) || (cp >= 0x2300 && cp <= 0x23FF) || (cp >= 0x2700 && cp <= 0x27BF) ||
           cp == 0x00A9 || cp == 0x00AE || cp == 0x203C || cp == 0x2049 || cp == 0x2122 || cp == 0x2139;
}

// Joiners and presentation selectors carry no meaning once emoji are mapped.
bool is_emoji_modifier(char32_t cp) {
    return cp == 0xFE0F || cp == 0xFE0E || cp == 0x200D || (cp >= 0x1F3FB && cp <= 0x1F3FF);
}

bool starts_with_ci(std::string_view s, std::size_t pos, std::string_view prefix) {
    if (pos + prefix.size() > s.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        char c = s[pos + i];
        if (is_upper(c)) c = static_cast<char>(c - 'A' + 'a');
        if (c != prefix[i]) return false;
    }
    return true;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

// URLs run to the next whitespace; mentions are '@' + word characters.
std::string strip_urls_and_mentions(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        bool boundary = i == 0 || !is_word_byte(text[i - 1]);
        if (boundary && (starts_with_ci(text, i, "http://") || starts_with_ci(text, i, "https://") ||
                         starts_with_ci(text, i, "www."))) {
            while (i < text.size() && !is_space(text[i])) ++i;
            out.push_back(' ');
            continue;
        }
        if (text[i] == '@' && i + 1 < text.size() && is_word_byte(text[i + 1])) {
            ++i;
            while (i < text.size() && is_word_byte(text[i])) ++i;
            out.push_back(' ');
            continue;
        }
        out.push_back(text[i]);
        ++i;
    }
    return out;
}

std::string expand_hashtags(std::string_view text, const std::unordered_set<std::string>& wordlist) {
    std::string out;
    out.reserve(text.size() + 16);
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] == '#' && i + 1 < text.size() && is_word_byte(text[i + 1])) {
            std::size_t j = i + 1;
            while (j < text.size() && is_word_byte(text[j])) ++j;
            out.push_back(' ');
            for (const auto& w : split_hashtag(text.substr(i, j - i), wordlist)) {
                out += w;
                out.push_back(' ');
            }
            i = j;
            continue;
        }
        out.push_back(text[i]);
        ++i;
    }
    return out;
}

std::string expand_emoji(std::string_view text, const std::unordered_map<std::string, std::string>& emoji_map) {
    // Longest ZWJ sequences in current emoji tables are well under this many bytes.
    constexpr std::size_t max_key = 64;
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (static_cast<unsigned char>(text[i]) < 0x80) {
            out.push_back(text[i++]);
            continue;
        }
        bool matched = false;
        for (std::size_t len = std::min(max_key, text.size() - i); len > 0 && !emoji_map.empty(); --len) {
            auto it = emoji_map.find(std::string(text.substr(i, len)));
            if (it != emoji_map.end()) {
                out.push_back(' ');
                out += it->second;
                out.push_back(' ');
                i += len;
                matched = true;
                break;
            }
        }
        if (matched) continue;
        auto [cp, len] = decode_utf8(text, i);
        if (is_emoji_modifier(cp)) {
            out.push_back(' ');
        } else if (is_emoji(cp)) {
            out.push_back(' ');
            out.append(text.substr(i, len));
            out.push_back(' ');
        } else {
            out.append(text.substr(i, len));
        }
        i += len;
    }
    return out;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) tokens.push_back(std::move(cur));
        cur.clear();
    };
    std::size_t i = 0;
    while (i < text.size()) {
        auto c = static_cast<unsigned char>(text[i]);
        if (c < 0x80) {
            if (std::isalnum(c)) {
                cur.push_back(static_cast<char>(std::tolower(c)));
            } else {
                flush();
            }
            ++i;
            continue;
        }
        auto [cp, len] = decode_utf8(text, i);
        if (is_emoji(cp)) {
            flush();
            tokens.emplace_back(text.substr(i, len));
        } else if (is_emoji_modifier(cp) || cp == 0x00A0 || (cp >= 0x2000 && cp <= 0x206F) || cp == 0x3000) {
            flush();  // non-breaking / typographic spaces and punctuation
        } else {
            cur.append(text.substr(i, len));
        }
        i += len;
    }
    flush();
    return tokens;
}

std::optional<std::vector<std::string>> greedy_segment(std::string_view run,
                                                       const std::unordered_set<std::string>& wordlist) {
    if (wordlist.empty()) return std::nullopt;
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (pos < run.size()) {
        std::size_t take = 0;
        for (std::size_t len = run.size() - pos; len > 0; --len) {
            if (wordlist.count(std::string(run.substr(pos, len)))) {
                take = len;
                break;
            }
        }
        if (take == 0) return std::nullopt;
        parts.emplace_back(run.substr(pos, take));
        pos += take;
    }
    return parts;
}

RawPost post_from_json(const json& j, std::size_t line) {
    if (!j.is_object()) throw ParseError(line, "record is not a JSON object");
    auto field = [&](const char* name) -> const json& {
        auto it = j.find(name);
        if (it == j.end()) throw ParseError(line, std::string("missing field '") + name + "'");
        if (!it->is_string()) throw ParseError(line, std::string("field '") + name + "' is not a string");
        return *it;
    };
    RawPost p;
    p.id = field("id").get<std::string>();
    if (p.id.empty()) throw ParseError(line, "empty id");
    auto ts = field("timestamp").get<std::string>();
    auto t = parse_timestamp(ts);
    if (!t) throw ParseError(line, "invalid timestamp '" + ts + "'");
    p.timestamp = *t;
    p.text = field("text").get<std::string>();
    if (auto it = j.find("lang"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) throw ParseError(line, "field 'lang' is not a string");
        p.lang = it->get<std::string>();
    }
    return p;
}

}  // namespace

std::optional<InputFormat> parse_input_format(std::string_view s) noexcept {
    if (s == "jsonl") return InputFormat::jsonl;
    if (s == "csv") return InputFormat::csv;
    return std::nullopt;
}

std::optional<MalformedPolicy> parse_malformed_policy(std::string_view s) noexcept {
    if (s == "skip") return MalformedPolicy::skip;
    if (s == "fail") return MalformedPolicy::fail;
    return std::nullopt;
}

ParseResult parse_posts(std::istream& in, InputFormat format, MalformedPolicy policy) {
    ParseResult result;
    std::string line;
    std::size_t lineno = 0;
    std::optional<detail::CsvHeader> header;
    std::optional<std::size_t> col_id, col_ts, col_text, col_lang;

    auto reject = [&](const ParseError& e) {
        if (policy == MalformedPolicy::fail) throw e;
        ++result.skipped;
        result.errors.push_back({e.line(), e.what()});
    };

    while (std::getline(in, line)) {
        ++lineno;
        detail::normalize_line(line, lineno == 1);
        if (format == InputFormat::csv && !header) {
            header = detail::parse_csv_header(line);
            col_id = header->find("id");
            col_ts = header->find("timestamp");
            col_text = header->find("text");
            col_lang = header->find("lang");
            if (!col_id || !col_ts || !col_text)
                throw ParseError(lineno, "CSV header must contain id, timestamp and text columns");
            continue;
        }
        try {
            if (detail::trim(line).empty()) throw ParseError(lineno, "blank line");
            if (format == InputFormat::jsonl) {
                json j;
                try {
                    j = json::parse(line);
                } catch (const json::parse_error& e) {
                    throw ParseError(lineno, std::string("invalid JSON: ") + e.what());
                }
                result.posts.push_back(post_from_json(j, lineno));
            } else {
                auto fields = detail::split_csv_line(line);
                if (!fields) throw ParseError(lineno, "unterminated quoted field");
                if (fields->size() != header->names.size())
                    throw ParseError(lineno, "expected " + std::to_string(header->names.size()) + " fields, got " +
                                                 std::to_string(fields->size()));
                RawPost p;
                p.id = std::string(detail::trim((*fields)[*col_id]));
                if (p.id.empty()) throw ParseError(lineno, "empty id");
                auto t = parse_timestamp((*fields)[*col_ts]);
                if (!t) throw ParseError(lineno, "invalid timestamp '" + (*fields)[*col_ts] + "'");
                p.timestamp = *t;
                p.text = (*fields)[*col_text];
                if (col_lang && !(*fields)[*col_lang].empty()) p.lang = (*fields)[*col_lang];
                result.posts.push_back(std::move(p));
            }
        } catch (const ParseError& e) {
            reject(e);
        }
    }
    return result;
}

std::vector<std::string> split_hashtag(std::string_view tag, const std::unordered_set<std::string>& wordlist) {
    if (!tag.empty() && tag.front() == '#') tag.remove_prefix(1);

    // Runs broken at case, letter/digit and underscore boundaries.
    std::vector<std::string_view> runs;
    std::size_t start = 0;
    auto cut = [&](std::size_t at) {
        if (at > start) runs.push_back(tag.substr(start, at - start));
        start = at;
    };
    for (std::size_t i = 0; i < tag.size(); ++i) {
        char c = tag[i];
        if (c == '_') {
            cut(i);
            start = i + 1;
            continue;
        }
        if (i == start) continue;
        char prev = tag[i - 1];
        bool boundary = (is_lower(prev) && is_upper(c)) || (is_alpha(prev) && is_digit(c)) ||
                        (is_digit(prev) && is_alpha(c)) ||
                        // "HTTPServer": the last capital of an upper run starts the next word
                        (is_upper(prev) && is_upper(c) && i + 1 < tag.size() && is_lower(tag[i + 1]));
        if (boundary) cut(i);
    }
    cut(tag.size());

    std::vector<std::string> out;
    for (auto run : runs) {
        auto lower = detail::to_lower_ascii(run);
        // Only runs typed entirely in lowercase carry hidden word boundaries.
        if (std::all_of(run.begin(), run.end(), is_lower)) {
            if (auto parts = greedy_segment(lower, wordlist)) {
                for (auto& p : *parts) out.push_back(std::move(p));
                continue;
            }
        }
        out.push_back(std::move(lower));
    }
    if (out.empty()) out.push_back(detail::to_lower_ascii(tag));
    return out;
}

std::vector<std::string> normalize_tokens(std::string_view text, const PreprocessConfig& config) {
    auto stripped = strip_urls_and_mentions(text);
    auto tagged = expand_hashtags(stripped, config.hashtag_wordlist);
    auto expanded = expand_emoji(tagged, config.emoji_map);
    return tokenize(expanded);
}

PreprocessedPost preprocess(const RawPost& post, const PreprocessConfig& config) {
    PreprocessedPost out;
    out.id = post.id;
    out.day = bucket_day(post.timestamp, config.time_zone);
    out.tokens = normalize_tokens(post.text, config);
    for (std::size_t i = 0; i < out.tokens.size(); ++i) {
        if (i) out.clean_text.push_back(' ');
        out.clean_text += out.tokens[i];
    }
    return out;
}

std::vector<std::size_t> dedupe_exact(const std::vector<RawPost>& raw, const std::vector<PreprocessedPost>& processed) {
    std::set<std::pair<Date, std::string_view>> seen;
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < raw.size(); ++i)
        if (seen.emplace(processed[i].day, raw[i].text).second) kept.push_back(i);
    return kept;
}

std::unordered_map<std::string, std::string> load_emoji_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read emoji table '" + path + "'");
    std::unordered_map<std::string, std::string> table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        detail::normalize_line(line, ++lineno == 1);
        if (detail::trim(line).empty() || line.front() == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected emoji<TAB>description");
        table[line.substr(0, tab)] = std::string(detail::trim(std::string_view(line).substr(tab + 1)));
    }
    return table;
}

std::unordered_set<std::string> load_wordlist(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read word list '" + path + "'");
    std::unordered_set<std::string> words;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        detail::normalize_line(line, ++lineno == 1);
        auto w = detail::trim(line);
        if (w.empty() || w.front() == '#') continue;
        words.insert(detail::to_lower_ascii(w));
    }
    return words;
}

void write_preprocessed(std::ostream& out, const std::vector<PreprocessedPost>& posts) {
    for (const auto& p : posts) {
        json j;
        j["id"] = p.id;
        j["day"] = format_date(p.day);
        j["tokens"] = p.tokens;
        j["clean_text"] = p.clean_text;
        out << j.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
    }
}

std::vector<PreprocessedPost> read_preprocessed(std::istream& in) {
    std::vector<PreprocessedPost> posts;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        try {
            auto j = json::parse(line);
            PreprocessedPost p;
            p.id = j.at("id").get<std::string>();
            auto d = parse_date(j.at("day").get<std::string>());
            if (!d) throw ParseError(lineno, "invalid day");
            p.day = *d;
            p.tokens = j.at("tokens").get<std::vector<std::string>>();
            p.clean_text = j.value("clean_text", std::string{});
            posts.push_back(std::move(p));
        } catch (const json::exception& e) {
            throw ParseError(lineno, std::string("bad preprocessed record: ") + e.what());
        }
    }
    return posts;
}

}  // namespace moodpulse
