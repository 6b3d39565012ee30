#include "divita/genres.hpp"

#include <bit>

#include "divita/error.hpp"

namespace divita {

std::optional<std::size_t> genre_index(std::string_view name) {
  for (std::size_t k = 0; k < kNumGenres; ++k) {
    if (kGenreNames[k] == name) return k;
  }
  return std::nullopt;
}

GenreSet GenreSet::from_names(std::span<const std::string> names) {
  GenreSet set;
  for (const auto& name : names) {
    auto idx = genre_index(name);
    if (!idx) fail(ErrorKind::validation, "unknown genre '" + name + "'");
    set.insert(*idx);
  }
  return set;
}

std::size_t GenreSet::size() const { return static_cast<std::size_t>(std::popcount(bits_)); }

std::vector<std::size_t> GenreSet::indices() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < kNumGenres; ++k)
    if (contains(k)) out.push_back(k);
  return out;
}

std::vector<std::string> GenreSet::names() const {
  std::vector<std::string> out;
  for (auto k : indices()) out.emplace_back(kGenreNames[k]);
  return out;
}

std::array<double, kNumGenres> GenreSet::indicator() const {
  std::array<double, kNumGenres> y{};
  for (std::size_t k = 0; k < kNumGenres; ++k) y[k] = contains(k) ? 1.0 : 0.0;
  return y;
}

}  // namespace divita
