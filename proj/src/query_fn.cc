#include "dplab/query_fn.h"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace dplab {

QueryFn LookupQueryFn(const std::string& id) {
  if (id == "sum") {
    return {"sum", true, [](const std::vector<int64_t>& h) {
              return std::accumulate(h.begin(), h.end(), int64_t{0});
            }};
  }
  if (id == "max") {
    return {"max", true, [](const std::vector<int64_t>& h) {
              return h.empty() ? 0 : *std::max_element(h.begin(), h.end());
            }};
  }
  throw std::invalid_argument("LookupQueryFn: unknown query '" + id + "'");
}

bool HasQueryFn(const std::string& id) { return id == "sum" || id == "max"; }

bool IsOneSensitive(const QueryFn& q, int d) {
  if (q.id == "sum") return d == 1;
  if (q.id == "max") return true;
  return false;
}

}  // namespace dplab
