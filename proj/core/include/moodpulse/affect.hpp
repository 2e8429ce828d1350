#pragma once

#include <array>
#include <bitset>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace moodpulse {

enum class AffectKind : std::uint8_t { emotion, moral };

// Order is the canonical column order of every label and series file.
enum class AffectCategory : std::uint8_t {
    anticipation,
    joy,
    love,
    trust,
    optimism,
    anger,
    disgust,
    fear,
    sadness,
    pessimism,
    surprise,
    care,
    harm,
    fairness,
    cheating,
    loyalty,
    betrayal,
    authority,
    subversion,
    purity,
    degradation,
};

inline constexpr std::size_t kCategoryCount = 21;

inline constexpr std::size_t index_of(AffectCategory c) noexcept { return static_cast<std::size_t>(c); }

const std::array<AffectCategory, kCategoryCount>& all_categories() noexcept;

std::string_view category_name(AffectCategory c) noexcept;
AffectKind category_kind(AffectCategory c) noexcept;
std::optional<AffectCategory> parse_category(std::string_view name) noexcept;

/// Multi-label flags, one per affect category.
class LabelVector {
public:
    LabelVector() = default;

    bool test(AffectCategory c) const noexcept { return bits_.test(index_of(c)); }
    LabelVector& set(AffectCategory c, bool on = true) noexcept {
        bits_.set(index_of(c), on);
        return *this;
    }
    std::size_t count() const noexcept { return bits_.count(); }
    bool none() const noexcept { return bits_.none(); }

    friend bool operator==(const LabelVector&, const LabelVector&) = default;

private:
    std::bitset<kCategoryCount> bits_;
};

}  // namespace moodpulse
