#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "moodpulse/calendar.hpp"

namespace moodpulse {

struct RawPost {
    std::string id;
    Instant timestamp;
    std::string text;
    std::optional<std::string> lang;
};

struct PreprocessedPost {
    std::string id;
    Date day;
    std::vector<std::string> tokens;
    std::string clean_text;
};

enum class InputFormat { jsonl, csv };
enum class MalformedPolicy { skip, fail };

std::optional<InputFormat> parse_input_format(std::string_view s) noexcept;
std::optional<MalformedPolicy> parse_malformed_policy(std::string_view s) noexcept;

struct PreprocessConfig {
    TimeZone time_zone = TimeZone::utc();
    std::unordered_map<std::string, std::string> emoji_map;  // emoji (UTF-8) -> description
    std::unordered_set<std::string> hashtag_wordlist;
    std::unordered_set<std::string> stopwords;
    MalformedPolicy on_malformed = MalformedPolicy::skip;
};

struct RecordError {
    std::size_t line;
    std::string message;
};

struct ParseResult {
    std::vector<RawPost> posts;
    std::size_t skipped = 0;
    std::vector<RecordError> errors;
};

/// Reads line-delimited posts. Under MalformedPolicy::fail the first bad record throws ParseError;
/// under skip it is recorded in `errors` and counted in `skipped`. Blank lines count as malformed.
ParseResult parse_posts(std::istream& in, InputFormat format, MalformedPolicy policy);

/// Splits a hashtag at camel-case, letter/digit and underscore boundaries, then segments each
/// alphabetic run by greedy longest match against `wordlist`. A run the greedy pass cannot
/// fully cover stays whole.
std::vector<std::string> split_hashtag(std::string_view tag, const std::unordered_set<std::string>& wordlist);

/// Removes URLs and @mentions, expands hashtags and emoji, lowercases, and tokenizes on
/// whitespace and ASCII punctuation. Unmapped emoji become single tokens.
PreprocessedPost preprocess(const RawPost& post, const PreprocessConfig& config);

/// Tokenization pass alone; `preprocess` is this plus day bucketing.
std::vector<std::string> normalize_tokens(std::string_view text, const PreprocessConfig& config);

/// Drops posts whose raw text exactly repeats an earlier post on the same day. Keeps first occurrence.
/// `raw` and `processed` are parallel arrays; returns the kept indices.
std::vector<std::size_t> dedupe_exact(const std::vector<RawPost>& raw, const std::vector<PreprocessedPost>& processed);

// Resource loaders. All throw ConfigError when the file cannot be read.
std::unordered_map<std::string, std::string> load_emoji_table(const std::string& path);
std::unordered_set<std::string> load_wordlist(const std::string& path);

// Stage file: one JSON object per line {id, day, tokens, clean_text}.
void write_preprocessed(std::ostream& out, const std::vector<PreprocessedPost>& posts);
std::vector<PreprocessedPost> read_preprocessed(std::istream& in);

}  // namespace moodpulse
