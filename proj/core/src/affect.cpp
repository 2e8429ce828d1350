#include "moodpulse/affect.hpp"

namespace moodpulse {

namespace {

constexpr std::array<std::string_view, kCategoryCount> kNames = {
    "anticipation", "joy",      "love",    "trust",    "optimism", "anger",     "disgust",
    "fear",         "sadness",  "pessimism", "surprise", "care",   "harm",      "fairness",
    "cheating",     "loyalty",  "betrayal", "authority", "subversion", "purity", "degradation",
};

constexpr std::array<AffectCategory, kCategoryCount> make_all() {
    std::array<AffectCategory, kCategoryCount> out{};
    for (std::size_t i = 0; i < kCategoryCount; ++i) out[i] = static_cast<AffectCategory>(i);
    return out;
}

constexpr auto kAll = make_all();

}  // namespace

const std::array<AffectCategory, kCategoryCount>& all_categories() noexcept { return kAll; }

std::string_view category_name(AffectCategory c) noexcept { return kNames[index_of(c)]; }

AffectKind category_kind(AffectCategory c) noexcept {
    return index_of(c) <= index_of(AffectCategory::surprise) ? AffectKind::emotion : AffectKind::moral;
}

std::optional<AffectCategory> parse_category(std::string_view name) noexcept {
    for (std::size_t i = 0; i < kCategoryCount; ++i)
        if (kNames[i] == name) return static_cast<AffectCategory>(i);
    return std::nullopt;
}

}  // namespace moodpulse
