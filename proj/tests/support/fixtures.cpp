#include "fixtures.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include "moodpulse/seeding.hpp"

namespace fs = std::filesystem;

namespace fixtures {

TempDir::TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    std::random_device rd;
    auto salt = moodpulse::mix_seed(rd(), ++counter);
    path_ = fs::temp_directory_path() / ("moodpulse-" + tag + "-" + std::to_string(salt % 1000000007ULL));
    fs::remove_all(path_);
    fs::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

moodpulse::Date day0() { return *moodpulse::parse_date("2024-01-01"); }

moodpulse::DailyAffectSeries make_series(std::vector<double> values, moodpulse::AffectCategory c) {
    moodpulse::DailyAffectSeries s;
    s.category = c;
    s.start = day0();
    s.counts.assign(values.size(), 100);
    s.missing.assign(values.size(), false);
    s.values = std::move(values);
    return s;
}

std::vector<double> gaussian(std::size_t n, double mean, double sd, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(mean, sd);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace fixtures
