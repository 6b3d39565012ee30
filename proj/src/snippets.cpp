#include "divita/snippets.hpp"

#include "divita/error.hpp"

namespace divita::snip {

namespace {
Snippet cyclic_window(std::size_t start, std::size_t available, std::size_t c) {
  Snippet s;
  s.start = start;
  s.clip_indices.reserve(c);
  for (std::size_t k = 0; k < c; ++k) s.clip_indices.push_back(start + k % available);
  return s;
}
}  // namespace

Snippet sample_training_snippet(std::size_t n_clips, std::size_t c, Rng& rng) {
  if (c == 0) fail(ErrorKind::argument, "snippet length c must be >= 1");
  if (n_clips == 0) fail(ErrorKind::argument, "empty clip sequence");
  if (n_clips < c) return cyclic_window(0, n_clips, c);
  const auto start = static_cast<std::size_t>(uniform_index(rng, n_clips - c + 1));
  return cyclic_window(start, c, c);
}

SnippetPlan enumerate_inference_snippets(std::size_t n_clips, std::size_t c) {
  if (c == 0) fail(ErrorKind::argument, "snippet length c must be >= 1");
  if (n_clips == 0) fail(ErrorKind::argument, "empty clip sequence");
  SnippetPlan plan;
  for (std::size_t start = 0; start < n_clips; start += c)
    plan.snippets.push_back(cyclic_window(start, std::min(c, n_clips - start), c));
  return plan;
}

}  // namespace divita::snip
