#include "divita/splitter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "divita/error.hpp"

namespace divita::split {

std::vector<LabelPairKey> keys_of(GenreSet labels) {
  auto idx = labels.indices();
  std::vector<LabelPairKey> keys;
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = a + 1; b < idx.size(); ++b)
      keys.push_back({static_cast<std::uint8_t>(idx[a]), static_cast<std::uint8_t>(idx[b]), false});
  for (auto g : idx) keys.push_back({static_cast<std::uint8_t>(g), 0, true});
  return keys;
}

std::array<std::size_t, 3> target_sizes(std::size_t n, const Ratios& ratios) {
  auto r = ratios.as_array();
  const double total = r[0] + r[1] + r[2];
  if (std::any_of(r.begin(), r.end(), [](double v) { return v < 0.0; }) || std::abs(total - 1.0) > 1e-9)
    fail(ErrorKind::argument, "split ratios must be non-negative and sum to 1");
  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> rem{};
  std::size_t assigned = 0;
  for (std::size_t s = 0; s < 3; ++s) {
    const double exact = r[s] * static_cast<double>(n);
    // Round away representation noise before flooring (0.7 * 10 = 6.999...).
    const double fl = std::floor(exact + 1e-9);
    sizes[s] = static_cast<std::size_t>(fl);
    rem[s] = exact - fl;
    assigned += sizes[s];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++sizes[order[k % 3]];
  return sizes;
}

SplitAssignment sois_split(const std::vector<std::string>& ids, const std::vector<GenreSet>& labels, Rng& rng,
                           const Ratios& ratios) {
  const std::size_t n = ids.size();
  if (n == 0) fail(ErrorKind::argument, "cannot split an empty dataset");
  if (labels.size() != n) fail(ErrorKind::argument, "ids and label sets differ in length");
  const auto r = ratios.as_array();
  auto capacity = target_sizes(n, ratios);

  constexpr std::size_t kKeys = 110;
  std::vector<std::vector<std::size_t>> example_keys(n);
  std::array<std::size_t, kKeys> remaining{};
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i].empty()) fail(ErrorKind::argument, "example '" + ids[i] + "' has no labels");
    for (const auto& k : keys_of(labels[i])) {
      example_keys[i].push_back(k.id());
      ++remaining[k.id()];
    }
  }
  std::array<std::array<double, 3>, kKeys> desired{};
  for (std::size_t k = 0; k < kKeys; ++k)
    for (std::size_t s = 0; s < 3; ++s) desired[k][s] = r[s] * static_cast<double>(remaining[k]);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  shuffle(std::span<std::size_t>(order), rng);

  SplitAssignment out;
  out.ids = ids;
  out.subsets.assign(n, Subset::train);
  std::vector<bool> assigned(n, false);
  std::size_t left = n;
  while (left > 0) {
    std::size_t key = kKeys;
    for (std::size_t k = 0; k < kKeys; ++k)
      if (remaining[k] > 0 && (key == kKeys || remaining[k] < remaining[key])) key = k;
    for (auto i : order) {
      if (assigned[i] ||
          std::find(example_keys[i].begin(), example_keys[i].end(), key) == example_keys[i].end())
        continue;
      std::array<std::size_t, 3> tied{};
      std::size_t n_tied = 0;
      for (std::size_t s = 0; s < 3; ++s) {
        if (capacity[s] == 0) continue;
        if (n_tied == 0) {
          tied[n_tied++] = s;
          continue;
        }
        const auto best = tied[0];
        const bool better = desired[key][s] > desired[key][best] ||
                            (desired[key][s] == desired[key][best] && capacity[s] > capacity[best]);
        const bool equal = desired[key][s] == desired[key][best] && capacity[s] == capacity[best];
        if (better) {
          n_tied = 0;
          tied[n_tied++] = s;
        } else if (equal) {
          tied[n_tied++] = s;
        }
      }
      const auto s = tied[n_tied == 1 ? 0 : uniform_index(rng, n_tied)];
      out.subsets[i] = static_cast<Subset>(s);
      assigned[i] = true;
      --left;
      --capacity[s];
      for (auto k : example_keys[i]) {
        desired[k][s] -= 1.0;
        --remaining[k];
      }
    }
  }
  return out;
}

std::vector<SplitAssignment> make_folds(const std::vector<std::string>& ids, const std::vector<GenreSet>& labels,
                                        std::uint64_t seed, std::size_t n_folds, const Ratios& ratios) {
  std::vector<SplitAssignment> folds;
  for (std::size_t k = 1; k <= n_folds; ++k) {
    Rng rng(derive_seed(seed, "fold-" + std::to_string(k)));
    auto a = sois_split(ids, labels, rng, ratios);
    a.fold = static_cast<int>(k);
    folds.push_back(std::move(a));
  }
  return folds;
}

double label_cardinality(const std::vector<GenreSet>& labels) {
  if (labels.empty()) fail(ErrorKind::argument, "no label sets");
  double total = 0.0;
  for (auto l : labels) total += static_cast<double>(l.size());
  return total / static_cast<double>(labels.size());
}

double label_density(const std::vector<GenreSet>& labels) {
  return label_cardinality(labels) / static_cast<double>(kNumGenres);
}

GenreStats genre_stats(const std::vector<GenreSet>& labels) {
  GenreStats s;
  s.examples = labels.size();
  s.label_count_histogram.assign(kNumGenres + 1, 0);
  for (auto l : labels) {
    ++s.label_count_histogram[l.size()];
    auto idx = l.indices();
    for (auto a : idx) {
      ++s.counts[a];
      for (auto b : idx) ++s.cooccurrence[a][b];
    }
  }
  if (!labels.empty()) {
    for (std::size_t k = 0; k < kNumGenres; ++k)
      s.proportions[k] = static_cast<double>(s.counts[k]) / static_cast<double>(labels.size());
    s.cardinality = label_cardinality(labels);
    s.density = s.cardinality / static_cast<double>(kNumGenres);
  }
  return s;
}

std::string stats_to_json(const GenreStats& s) {
  nlohmann::ordered_json j;
  j["examples"] = s.examples;
  j["label_cardinality"] = s.cardinality;
  j["label_density"] = s.density;
  j["label_count_histogram"] = s.label_count_histogram;
  nlohmann::ordered_json genres;
  for (std::size_t k = 0; k < kNumGenres; ++k) {
    nlohmann::ordered_json g;
    g["count"] = s.counts[k];
    g["proportion"] = s.proportions[k];
    genres[std::string(kGenreNames[k])] = g;
  }
  j["genres"] = genres;
  return j.dump(2) + "\n";
}

std::string cooccurrence_csv(const GenreStats& s) {
  std::string out = "genre";
  for (auto name : kGenreNames) out += "," + std::string(name);
  out += "\n";
  for (std::size_t a = 0; a < kNumGenres; ++a) {
    out += std::string(kGenreNames[a]);
    for (std::size_t b = 0; b < kNumGenres; ++b) out += "," + std::to_string(s.cooccurrence[a][b]);
    out += "\n";
  }
  return out;
}

}  // namespace divita::split
