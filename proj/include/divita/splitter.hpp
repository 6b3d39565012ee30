#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "divita/genres.hpp"
#include "divita/random.hpp"
#include "divita/records.hpp"

namespace divita::split {

struct Ratios {
  double train = 0.70;
  double val = 0.10;
  double test = 0.20;

  std::array<double, 3> as_array() const { return {train, val, test}; }
};

// Label-pair key (lower genre index first) or a single-genre key.
struct LabelPairKey {
  std::uint8_t first = 0;
  std::uint8_t second = 0;
  bool singleton = false;

  std::size_t id() const { return singleton ? 100 + first : 10 * first + second; }
  friend bool operator==(const LabelPairKey&, const LabelPairKey&) = default;
};

// Every label pair of the example, then one singleton key per genre. The
// singletons keep first-order genre shares balanced; pairs alone let the
// common genres drift in the small subsets.
std::vector<LabelPairKey> keys_of(GenreSet labels);

// Subset sizes summing to n, largest-remainder rounding of ratio * n.
std::array<std::size_t, 3> target_sizes(std::size_t n, const Ratios& ratios);

// Second-order iterative stratification: repeatedly takes the key with the
// fewest unassigned examples and sends each of its examples to the subset
// that still wants the most of that key (ties: most remaining room, then
// rng). Subsets never exceed their target size.
SplitAssignment sois_split(const std::vector<std::string>& ids, const std::vector<GenreSet>& labels,
                           Rng& rng, const Ratios& ratios = {});

// Folds 1..n_folds, fold k seeded with derive_seed(seed, "fold-k").
std::vector<SplitAssignment> make_folds(const std::vector<std::string>& ids,
                                        const std::vector<GenreSet>& labels, std::uint64_t seed,
                                        std::size_t n_folds = 3, const Ratios& ratios = {});

double label_cardinality(const std::vector<GenreSet>& labels);
double label_density(const std::vector<GenreSet>& labels);

struct GenreStats {
  std::size_t examples = 0;
  std::array<std::size_t, kNumGenres> counts{};
  std::array<double, kNumGenres> proportions{};
  // cooccurrence[a][b]: examples carrying both; the diagonal holds counts.
  std::array<std::array<std::size_t, kNumGenres>, kNumGenres> cooccurrence{};
  std::vector<std::size_t> label_count_histogram;  // index = labels per example
  double cardinality = 0.0;
  double density = 0.0;
};

GenreStats genre_stats(const std::vector<GenreSet>& labels);
std::string stats_to_json(const GenreStats& stats);
std::string cooccurrence_csv(const GenreStats& stats);

}  // namespace divita::split
