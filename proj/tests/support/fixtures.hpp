#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "moodpulse/series.hpp"

namespace fixtures {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

moodpulse::DailyAffectSeries make_series(std::vector<double> values,
                                         moodpulse::AffectCategory c = moodpulse::AffectCategory::anger);

/// N(mean, sd^2) noise of length n from mt19937_64(seed).
std::vector<double> gaussian(std::size_t n, double mean, double sd, std::uint64_t seed);

std::string read_file(const std::filesystem::path& p);

moodpulse::Date day0();

}  // namespace fixtures
