#pragma once

#include "simsel/error.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace simsel::detail {

struct IndexedError
{
  std::size_t index;
  ErrorKind kind;
  std::string message;
};

// Runs fn(i) for i in [0, n) across OpenMP threads. Exceptions cannot leave a
// parallel region, so they are captured per index and the caller receives the
// lowest-index failures, independent of scheduling.
template <typename Fn>
std::vector<IndexedError> parallel_for_collect(std::size_t n, Fn&& fn)
{
  std::vector<std::optional<IndexedError>> slots(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      fn(idx);
    } catch (const Error& e) {
      slots[idx] = IndexedError{idx, e.kind(), e.what()};
    } catch (const std::exception& e) {
      slots[idx] = IndexedError{idx, ErrorKind::Data, e.what()};
    }
  }
  std::vector<IndexedError> errors;
  for (auto& s : slots) {
    if (s)
      errors.push_back(std::move(*s));
  }
  return errors;
}

template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn)
{
  const auto errors = parallel_for_collect(n, std::forward<Fn>(fn));
  if (!errors.empty())
    throw Error(errors.front().kind, errors.front().message);
}

} // namespace simsel::detail
