#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace divita {

inline constexpr std::size_t kNumGenres = 10;

// Bit positions are fixed; reordering breaks every stored artifact.
inline constexpr std::array<std::string_view, kNumGenres> kGenreNames = {
    "action", "adventure", "comedy",  "crime",           "drama",
    "fantasy", "horror",   "romance", "science-fiction", "thriller",
};

std::optional<std::size_t> genre_index(std::string_view name);

class GenreSet {
 public:
  constexpr GenreSet() = default;
  constexpr explicit GenreSet(std::uint16_t bits) : bits_(bits & kMask) {}

  // Throws validation error on an unknown name.
  static GenreSet from_names(std::span<const std::string> names);

  constexpr bool contains(std::size_t genre) const { return (bits_ >> genre) & 1u; }
  constexpr void insert(std::size_t genre) { bits_ |= static_cast<std::uint16_t>(1u << genre); }
  constexpr std::uint16_t bits() const { return bits_; }
  constexpr bool empty() const { return bits_ == 0; }
  std::size_t size() const;

  std::vector<std::size_t> indices() const;
  std::vector<std::string> names() const;
  // 0/1 indicator vector of width kNumGenres.
  std::array<double, kNumGenres> indicator() const;

  friend constexpr bool operator==(GenreSet, GenreSet) = default;

 private:
  static constexpr std::uint16_t kMask = (1u << kNumGenres) - 1;
  std::uint16_t bits_ = 0;
};

}  // namespace divita
