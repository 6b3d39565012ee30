#pragma once

#include <cstddef>
#include <vector>

#include "divita/random.hpp"

namespace divita::snip {

struct Snippet {
  std::size_t start = 0;
  std::vector<std::size_t> clip_indices;

  std::size_t size() const { return clip_indices.size(); }
  friend bool operator==(const Snippet&, const Snippet&) = default;
};

struct SnippetPlan {
  std::vector<Snippet> snippets;
};

// Training mode: one window of c adjacent clips with a uniform start in
// [0, n_clips - c]. Clip sequences shorter than c repeat cyclically from 0.
Snippet sample_training_snippet(std::size_t n_clips, std::size_t c, Rng& rng);

// Inference mode: non-overlapping windows at 0, c, 2c, ...; a short final
// window cycles over its own clips.
SnippetPlan enumerate_inference_snippets(std::size_t n_clips, std::size_t c);

}  // namespace divita::snip
