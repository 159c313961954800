#ifndef DPLAB_REGISTRY_H_
#define DPLAB_REGISTRY_H_

#include <functional>
#include <map>
#include <string>

#include "dplab/mechanism.h"
#include "dplab/mechanisms/ext_con_comp.h"
#include "dplab/noise.h"
#include "dplab/verification.h"

namespace dplab {

// Certification and construction authority for creation queries. Each
// mechanism id carries three total rules: whether a claimed
// (params, init_state, vf_id) triple is certified privacy-wise, whether a
// value is in the instance's query space, and how to build the instance.
// Uncertified triples are rejected, never guessed.
class Registry {
 public:
  struct Entry {
    std::function<bool(const CreationQuery&)> certifies;
    std::function<bool(const CreationQuery&, const Value&)> query_in_space;
    std::function<MechanismHandle(const CreationQuery&, const Registry&)>
        instantiate;
  };

  void RegisterMechanism(const std::string& mech_id, Entry entry);
  void RegisterChildVf(ChildVf vf);

  bool Knows(const std::string& mech_id) const;
  bool Certifies(const CreationQuery& cq) const;
  bool QueryInSpace(const CreationQuery& creator, const Value& q) const;
  const ChildVf* FindChildVf(const std::string& id) const;
  // Throws std::invalid_argument on unknown ids or malformed init state.
  MechanismHandle Instantiate(const CreationQuery& cq) const;

  NoiseSource::Mode noise_mode() const { return noise_mode_; }
  void set_noise_mode(NoiseSource::Mode mode) { noise_mode_ = mode; }
  NoiseSource MakeNoise() const;

 private:
  std::map<std::string, Entry> mechs_;
  std::map<std::string, ChildVf> child_vfs_;
  NoiseSource::Mode noise_mode_ = NoiseSource::Mode::kSeeded;
};

// The registry with every shipped mechanism and per-mechanism condition:
// ids "rr", "irr", "laplace_int", "svt", "binary_counter", "d_counter",
// "ext_con_comp", "m_delta", "hss".
Registry MakeStandardRegistry(
    NoiseSource::Mode noise_mode = NoiseSource::Mode::kSeeded);

// Child factory closing over a snapshot of `registry`.
ChildFactory MakeRegistryFactory(const Registry& registry);

// Router whose children are built by `registry`.
MechanismHandle MakeExtConComp(const Registry& registry);

}  // namespace dplab

#endif  // DPLAB_REGISTRY_H_
