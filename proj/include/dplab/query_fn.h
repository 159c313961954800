#ifndef DPLAB_QUERY_FN_H_
#define DPLAB_QUERY_FN_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace dplab {

// A histogram query: integer-valued function of an integer vector, with the
// structural facts the threshold mechanisms rely on. Monotone means
// non-decreasing in every coordinate. Sensitivity is relative to changing one
// input vector of the stream by at most 1 per coordinate.
struct QueryFn {
  std::string id;
  bool monotone = false;
  std::function<int64_t(const std::vector<int64_t>&)> eval;
};

// Registered queries: "sum" (coordinate sum; 1-sensitive only at d=1) and
// "max" (coordinate max; 1-sensitive for every d). Unknown id throws.
QueryFn LookupQueryFn(const std::string& id);

bool HasQueryFn(const std::string& id);

// Whether the registered query is 1-sensitive at dimension d.
bool IsOneSensitive(const QueryFn& q, int d);

}  // namespace dplab

#endif  // DPLAB_QUERY_FN_H_
