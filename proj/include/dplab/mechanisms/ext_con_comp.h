#ifndef DPLAB_MECHANISMS_EXT_CON_COMP_H_
#define DPLAB_MECHANISMS_EXT_CON_COMP_H_

#include <functional>

#include "dplab/mechanism.h"

namespace dplab {

using ChildFactory = std::function<MechanismHandle(const CreationQuery&)>;

// Composition router. A creation-query message instantiates a child through
// the factory and is acknowledged with Top; Query([q, i]) forwards q to the
// i-th child (1-based, creation order) and relays its answer. An index with
// no child yet, or any other message shape, halts. Enumerable while every
// child created so far is.
MechanismHandle MakeExtConComp(ChildFactory factory);

}  // namespace dplab

#endif  // DPLAB_MECHANISMS_EXT_CON_COMP_H_
