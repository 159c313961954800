#include "dplab/registry.h"

#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dplab/mechanisms/counters.h"
#include "dplab/mechanisms/laplace.h"
#include "dplab/mechanisms/monotone_histogram.h"
#include "dplab/mechanisms/randomized_response.h"
#include "dplab/mechanisms/sparse_vector.h"
#include "dplab/mechanisms/trip_reveal.h"
#include "dplab/query_fn.h"

namespace dplab {

namespace {

bool ParseIntVector(const Value& v, std::vector<int64_t>* out) {
  if (!v.IsList()) return false;
  for (const Value& x : v.AsList()) {
    if (!x.IsInt()) return false;
    out->push_back(x.AsInt());
  }
  return true;
}

bool IsBitVector(const Value& v, size_t d) {
  if (!v.IsList() || v.AsList().size() != d) return false;
  for (const Value& x : v.AsList()) {
    if (!x.IsBit()) return false;
  }
  return true;
}

// svt init state: [query id, h0, internal epsilon]. The claimed epsilon must
// be exactly twice the internal one (an instance at internal budget e is
// 2e-DP); doubling is exact on doubles.
struct SvtInit {
  std::string q_id;
  std::vector<int64_t> h0;
  Rational eps_internal;
};

bool ParseSvtInit(const Value& v, SvtInit* out) {
  if (!v.IsList() || v.AsList().size() != 3) return false;
  const ValueList& list = v.AsList();
  if (!list[0].IsString() || !list[2].IsRational()) return false;
  if (!ParseIntVector(list[1], &out->h0) || out->h0.empty()) return false;
  out->q_id = list[0].AsString();
  out->eps_internal = list[2].AsRational();
  return out->eps_internal > 0;
}

// hss init state: [query id, beta, gamma id, xi id, d, T].
struct HssInit {
  std::string q_id;
  Rational beta;
  std::string gamma_id;
  std::string xi_id;
  int64_t d = 0;
  int64_t T = 0;
};

bool ParseHssInit(const Value& v, HssInit* out) {
  if (!v.IsList() || v.AsList().size() != 6) return false;
  const ValueList& list = v.AsList();
  if (!list[0].IsString() || !list[1].IsRational() || !list[2].IsString() ||
      !list[3].IsString() || !list[4].IsInt() || !list[5].IsInt()) {
    return false;
  }
  out->q_id = list[0].AsString();
  out->beta = list[1].AsRational();
  out->gamma_id = list[2].AsString();
  out->xi_id = list[3].AsString();
  out->d = list[4].AsInt();
  out->T = list[5].AsInt();
  return out->beta > 0 && out->beta < 1 && out->d >= 1 && out->T >= 1;
}

bool ValidScheduleIds(const std::string& gamma_id, const std::string& xi_id) {
  return (gamma_id == "one" || gamma_id == "two" || gamma_id == "default") &&
         (xi_id == "zero" || xi_id == "half");
}

Registry::Entry RrEntry() {
  return {
      [](const CreationQuery& cq) {
        return cq.vf_id == "rr_single" && cq.init_state.IsUnit();
      },
      [](const CreationQuery&, const Value& q) { return q.IsBit(); },
      [](const CreationQuery& cq, const Registry&) {
        return MakeRr(cq.params);
      }};
}

Registry::Entry IrrEntry() {
  return {
      [](const CreationQuery& cq) {
        return cq.vf_id == "irr_queries" && cq.init_state.IsBit();
      },
      [](const CreationQuery&, const Value& q) { return q == Value(0); },
      [](const CreationQuery& cq, const Registry&) {
        return MakeIrr(cq.params, static_cast<int>(cq.init_state.AsInt()));
      }};
}

Registry::Entry LaplaceEntry() {
  return {
      [](const CreationQuery& cq) {
        return cq.vf_id == "laplace_single" && cq.init_state.IsUnit() &&
               cq.params.delta_exact == 0 && cq.params.epsilon > 0;
      },
      [](const CreationQuery&, const Value& q) { return q.IsInt(); },
      [](const CreationQuery& cq, const Registry& reg) {
        return MakeLaplaceInt(cq.params.epsilon, reg.MakeNoise());
      }};
}

Registry::Entry SvtEntry() {
  return {
      [](const CreationQuery& cq) {
        SvtInit init;
        return cq.vf_id == "neighbor:event01" && cq.params.delta_exact == 0 &&
               ParseSvtInit(cq.init_state, &init) && HasQueryFn(init.q_id) &&
               IsOneSensitive(LookupQueryFn(init.q_id),
                              static_cast<int>(init.h0.size())) &&
               cq.params.epsilon == 2 * ToDouble(init.eps_internal);
      },
      [](const CreationQuery& cq, const Value& q) {
        SvtInit init;
        if (!ParseSvtInit(cq.init_state, &init)) return false;
        if (!q.IsList() || q.AsList().size() != 2) return false;
        const ValueList& list = q.AsList();
        std::vector<int64_t> x;
        return ParseIntVector(list[0], &x) && x.size() == init.h0.size() &&
               (list[1].IsInt() || list[1].IsRational());
      },
      [](const CreationQuery& cq, const Registry& reg) {
        SvtInit init;
        if (!ParseSvtInit(cq.init_state, &init)) {
          throw std::invalid_argument("svt: malformed init state");
        }
        return MakeSvt(ToDouble(init.eps_internal), LookupQueryFn(init.q_id),
                       init.h0, reg.MakeNoise());
      }};
}

Registry::Entry BinaryCounterEntry() {
  return {
      [](const CreationQuery& cq) {
        return cq.vf_id == "neighbor:event" && cq.params.delta_exact == 0 &&
               cq.params.epsilon > 0 && cq.init_state.IsInt() &&
               cq.init_state.AsInt() >= 1;
      },
      [](const CreationQuery&, const Value& q) { return q.IsInt(); },
      [](const CreationQuery& cq, const Registry& reg) {
        return MakeBinaryCounter(cq.params.epsilon, cq.init_state.AsInt(),
                                 reg.MakeNoise());
      }};
}

Registry::Entry DCounterEntry() {
  auto parse = [](const CreationQuery& cq, int64_t* d, int64_t* T) {
    if (!cq.init_state.IsList() || cq.init_state.AsList().size() != 2) {
      return false;
    }
    const ValueList& list = cq.init_state.AsList();
    if (!list[0].IsInt() || !list[1].IsInt()) return false;
    *d = list[0].AsInt();
    *T = list[1].AsInt();
    return *d >= 1 && *T >= 1;
  };
  return {
      [parse](const CreationQuery& cq) {
        int64_t d = 0;
        int64_t T = 0;
        return cq.vf_id == "neighbor:linf1" && cq.params.epsilon > 0 &&
               parse(cq, &d, &T);
      },
      [parse](const CreationQuery& cq, const Value& q) {
        int64_t d = 0;
        int64_t T = 0;
        std::vector<int64_t> x;
        return parse(cq, &d, &T) && ParseIntVector(q, &x) &&
               x.size() == static_cast<size_t>(d);
      },
      [parse](const CreationQuery& cq, const Registry& reg) {
        int64_t d = 0;
        int64_t T = 0;
        if (!parse(cq, &d, &T)) {
          throw std::invalid_argument("d_counter: malformed init state");
        }
        return MakeDCounter(cq.params.epsilon, static_cast<int>(d), T,
                            reg.MakeNoise());
      }};
}

Registry::Entry MDeltaEntry() {
  return {
      [](const CreationQuery& cq) {
        return cq.vf_id == "m_delta_g" && cq.init_state.IsUnit() &&
               cq.params.rho == 1 && cq.params.delta_exact > 0 &&
               cq.params.delta_exact <= 1;
      },
      [](const CreationQuery&, const Value& q) { return q.IsBit(); },
      [](const CreationQuery& cq, const Registry&) {
        return MakeTripReveal(cq.params.delta_exact);
      }};
}

Registry::Entry HssEntry() {
  return {
      [](const CreationQuery& cq) {
        HssInit init;
        return cq.vf_id == "neighbor:event01" && cq.params.epsilon > 0 &&
               ParseHssInit(cq.init_state, &init) && HasQueryFn(init.q_id) &&
               ValidScheduleIds(init.gamma_id, init.xi_id) &&
               LookupQueryFn(init.q_id).monotone &&
               IsOneSensitive(LookupQueryFn(init.q_id),
                              static_cast<int>(init.d));
      },
      [](const CreationQuery& cq, const Value& q) {
        HssInit init;
        return ParseHssInit(cq.init_state, &init) &&
               IsBitVector(q, static_cast<size_t>(init.d));
      },
      [](const CreationQuery& cq, const Registry& reg) {
        HssInit init;
        if (!ParseHssInit(cq.init_state, &init)) {
          throw std::invalid_argument("hss: malformed init state");
        }
        HistogramConfig config;
        config.epsilon = cq.params.epsilon;
        config.q = LookupQueryFn(init.q_id);
        config.beta = ToDouble(init.beta);
        config.schedule =
            MakeSchedule(init.gamma_id, init.xi_id, static_cast<int>(init.d),
                         config.beta, config.epsilon);
        config.d = static_cast<int>(init.d);
        config.T = init.T;
        config.delta = cq.params.delta;
        return MakeMonotoneHistogram(std::move(config), reg.noise_mode());
      }};
}

Registry::Entry EccEntry() {
  return {[](const CreationQuery&) { return false; },
          [](const CreationQuery&, const Value& q) {
            return q.IsList() && q.AsList().size() == 2 &&
                   q.AsList()[1].IsInt();
          },
          [](const CreationQuery&, const Registry& reg) {
            return MakeExtConComp(reg);
          }};
}

}  // namespace

void Registry::RegisterMechanism(const std::string& mech_id, Entry entry) {
  mechs_[mech_id] = std::move(entry);
}

void Registry::RegisterChildVf(ChildVf vf) {
  child_vfs_[vf.id] = std::move(vf);
}

bool Registry::Knows(const std::string& mech_id) const {
  return mechs_.count(mech_id) > 0;
}

bool Registry::Certifies(const CreationQuery& cq) const {
  auto it = mechs_.find(cq.mech_id);
  return it != mechs_.end() && FindChildVf(cq.vf_id) != nullptr &&
         it->second.certifies(cq);
}

bool Registry::QueryInSpace(const CreationQuery& creator,
                            const Value& q) const {
  auto it = mechs_.find(creator.mech_id);
  return it != mechs_.end() && it->second.query_in_space(creator, q);
}

const ChildVf* Registry::FindChildVf(const std::string& id) const {
  auto it = child_vfs_.find(id);
  return it == child_vfs_.end() ? nullptr : &it->second;
}

MechanismHandle Registry::Instantiate(const CreationQuery& cq) const {
  auto it = mechs_.find(cq.mech_id);
  if (it == mechs_.end()) {
    throw std::invalid_argument("Registry: unknown mechanism '" + cq.mech_id +
                                "'");
  }
  return it->second.instantiate(cq, *this);
}

NoiseSource Registry::MakeNoise() const {
  switch (noise_mode_) {
    case NoiseSource::Mode::kZero:
      return NoiseSource::Zero();
    case NoiseSource::Mode::kSeeded:
      return NoiseSource::Seeded();
    case NoiseSource::Mode::kScripted:
      break;
  }
  throw std::logic_error("Registry: scripted noise is per-instance");
}

Registry MakeStandardRegistry(NoiseSource::Mode noise_mode) {
  Registry reg;
  reg.set_noise_mode(noise_mode);
  reg.RegisterMechanism("rr", RrEntry());
  reg.RegisterMechanism("irr", IrrEntry());
  reg.RegisterMechanism("laplace_int", LaplaceEntry());
  reg.RegisterMechanism("svt", SvtEntry());
  reg.RegisterMechanism("binary_counter", BinaryCounterEntry());
  reg.RegisterMechanism("d_counter", DCounterEntry());
  reg.RegisterMechanism("m_delta", MDeltaEntry());
  reg.RegisterMechanism("hss", HssEntry());
  reg.RegisterMechanism("ext_con_comp", EccEntry());
  reg.RegisterChildVf(TrueChildVf());
  reg.RegisterChildVf(RrSingleChildVf());
  reg.RegisterChildVf(MDeltaGChildVf());
  reg.RegisterChildVf(IrrQueriesChildVf());
  reg.RegisterChildVf(LaplaceSingleChildVf());
  reg.RegisterChildVf(NeighborEventChildVf());
  reg.RegisterChildVf(NeighborEvent01ChildVf());
  reg.RegisterChildVf(NeighborLinf1ChildVf());
  return reg;
}

ChildFactory MakeRegistryFactory(const Registry& registry) {
  auto snapshot = std::make_shared<const Registry>(registry);
  return [snapshot](const CreationQuery& cq) {
    return snapshot->Instantiate(cq);
  };
}

MechanismHandle MakeExtConComp(const Registry& registry) {
  return MakeExtConComp(MakeRegistryFactory(registry));
}

}  // namespace dplab
