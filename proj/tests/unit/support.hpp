#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "divita/error.hpp"
#include "divita/genres.hpp"
#include "divita/random.hpp"
#include "divita/records.hpp"
#include "divita/tensor.hpp"

namespace testing {

namespace ts = divita::tensor;

inline ts::Tensor random_matrix(std::size_t r, std::size_t c, divita::Rng& rng, double scale = 1.0) {
  ts::Tensor t = ts::Tensor::matrix(r, c);
  for (auto& v : t.values()) v = scale * (2.0 * divita::uniform01(rng) - 1.0);
  return t;
}

// |a - n| / max(|a|, |n|, floor). The floor keeps gradients that are zero
// up to rounding from dominating the ratio.
inline double relative_error(double a, double n, double floor = 1e-6) {
  return std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
}

// Largest relative error between backward() and central differences over
// every scalar in `store`. `loss` must build a 1 x 1 value from the store.
inline double gradient_check(ts::ParamStore& store, const std::function<ts::Var(ts::Graph&)>& loss,
                             double h = 1e-5, double floor = 1e-6) {
  store.zero_grad();
  {
    ts::Graph g;
    g.backward(loss(g));
  }
  double worst = 0.0;
  for (std::size_t p = 0; p < store.size(); ++p) {
    auto& param = store.at(p);
    for (std::size_t k = 0; k < param.value.size(); ++k) {
      const double keep = param.value[k];
      auto eval = [&] {
        ts::Graph g(false);
        return loss(g).value()[0];
      };
      param.value[k] = keep + h;
      const double up = eval();
      param.value[k] = keep - h;
      const double down = eval();
      param.value[k] = keep;
      worst = std::max(worst, relative_error(param.grad[k], (up - down) / (2 * h), floor));
    }
  }
  return worst;
}

// Kind of the divita::Error thrown by f, or nullopt if it returns normally.
template <typename F>
std::optional<divita::ErrorKind> thrown_kind(F&& f) {
  try {
    f();
  } catch (const divita::Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

// Fresh directory under the build tree's temp area.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("divita-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Per-subset genre statistics against the whole set, maximized over subsets
// and genres. With shares=true a subset's genre distribution is its label
// counts normalized to sum to one; otherwise it is the fraction of the
// subset's examples carrying each genre.
inline double max_genre_deviation(const divita::SplitAssignment& split, const std::vector<divita::GenreSet>& labels,
                                  bool shares = true) {
  double global[divita::kNumGenres] = {};
  double local[3][divita::kNumGenres] = {};
  double global_norm = 0.0, local_norm[3] = {};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto s = static_cast<std::size_t>(split.subsets[i]);
    if (!shares) {
      global_norm += 1;
      local_norm[s] += 1;
    }
    for (std::size_t k = 0; k < divita::kNumGenres; ++k)
      if (labels[i].contains(k)) {
        global[k] += 1;
        local[s][k] += 1;
        if (shares) {
          global_norm += 1;
          local_norm[s] += 1;
        }
      }
  }
  double worst = 0.0;
  for (std::size_t s = 0; s < 3; ++s)
    for (std::size_t k = 0; k < divita::kNumGenres; ++k)
      if (local_norm[s] > 0) worst = std::max(worst, std::abs(local[s][k] / local_norm[s] - global[k] / global_norm));
  return worst;
}

// Uniform random split with the given subset sizes.
inline divita::SplitAssignment random_split(const std::vector<std::string>& ids, const std::array<std::size_t, 3>& sizes,
                                            divita::Rng& rng) {
  std::vector<std::size_t> order(ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  divita::shuffle(std::span<std::size_t>(order), rng);
  divita::SplitAssignment split;
  split.ids = ids;
  split.subsets.assign(ids.size(), divita::Subset::test);
  for (std::size_t r = 0; r < order.size(); ++r)
    split.subsets[order[r]] = r < sizes[0] ? divita::Subset::train
                              : r < sizes[0] + sizes[1] ? divita::Subset::val
                                                        : divita::Subset::test;
  return split;
}

}  // namespace testing
