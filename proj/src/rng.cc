#include "dplab/rng.h"

#include <stdexcept>

namespace dplab {

size_t Rng::SampleIndex(const std::vector<Rational>& probs) {
  if (probs.empty()) throw std::invalid_argument("SampleIndex: empty");
  const Rational u = NextUnitRational();
  Rational cum(0);
  for (size_t i = 0; i < probs.size(); ++i) {
    cum += probs[i];
    if (u < cum) return i;
  }
  return probs.size() - 1;
}

}  // namespace dplab
