#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace moodpulse::detail {

/// RFC 4180 field split of a single physical line. nullopt on an unterminated quote.
std::optional<std::vector<std::string>> split_csv_line(std::string_view line);

std::string csv_escape(std::string_view field);

/// Shortest representation that parses back to the same double.
std::string format_real(double v);

/// Rounds to 6 decimals for JSON emission.
double round6(double v);

std::optional<double> parse_real(std::string_view s) noexcept;
std::optional<long long> parse_int(std::string_view s) noexcept;

std::string_view trim(std::string_view s) noexcept;
std::string to_lower_ascii(std::string_view s);

/// Strips a trailing '\r' and a leading UTF-8 BOM (on the first line).
void normalize_line(std::string& line, bool first);

/// Header name -> column index; throws ParseError on duplicates.
struct CsvHeader {
    std::vector<std::string> names;
    std::optional<std::size_t> find(std::string_view name) const;
};
CsvHeader parse_csv_header(std::string_view line);

/// Runs fn(i) for every i in [0, n) on up to `threads` workers; rethrows the first failure.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace moodpulse::detail
