#ifndef DPLAB_MECHANISMS_MONOTONE_HISTOGRAM_H_
#define DPLAB_MECHANISMS_MONOTONE_HISTOGRAM_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dplab/mechanism.h"
#include "dplab/noise.h"
#include "dplab/query_fn.h"

namespace dplab {

// Deterministic threshold schedule, exact at every evaluation point. The
// interesting gamma ("default") is computed in doubles and converted exactly,
// so the threshold arithmetic downstream stays rational.
struct HistogramSchedule {
  std::string gamma_id;
  std::string xi_id;
  std::function<Rational(int64_t t, int64_t j)> gamma;
  std::function<Rational(int64_t t, int64_t j)> xi;
};

// gamma ids: "one", "two" (constants), "default" =
//   6 (d log^2((j+1) d / beta) + log(t+1)) / epsilon.
// xi ids: "zero", "half" (= gamma/2).
HistogramSchedule MakeSchedule(const std::string& gamma_id,
                               const std::string& xi_id, int d, double beta,
                               double epsilon);

struct HistogramConfig {
  double epsilon = 1.0;
  QueryFn q;
  double beta = 0.1;
  HistogramSchedule schedule;
  int d = 1;
  int64_t T = 1;
  double delta = 0.0;  // claimed for the child counter; construction is pure
  // Violator switch: report q(c + h) from the raw accumulator instead of the
  // flush-frozen answer. Breaks the response property on purpose.
  bool expose_raw = false;
};

// Instrumentation: every child creation and every child exchange, in
// program order, plus the per-step outputs.
struct TraceEvent {
  enum class Kind { kCreate, kCall };
  Kind kind;
  // kCreate: the claimed creation; kCall: target child (index into the
  // creations, creation order) with its input and answer.
  CreationQuery creation;
  size_t child = 0;
  Message input;
  Message answer;
};

struct InstrumentedTrace {
  std::vector<TraceEvent> events;
  std::vector<Value> outputs;

  std::vector<CreationQuery> Creations() const;
  // Stripped input payloads of the calls that targeted `child`.
  std::vector<Value> InputsFor(size_t child) const;
};

// The interval-flush update loop with real children. One Update per stream
// element: accumulate, test the SVT child against the current threshold,
// flush through the counter child on Top, re-arm a fresh SVT, run the
// Laplace threshold check, and apply the schedule updates.
class HistogramCore {
 public:
  HistogramCore(HistogramConfig config, NoiseSource::Mode noise_mode);
  // Replaying core: child answers come from `decisions` in call order
  // instead of real children. The caller keeps `decisions` alive.
  HistogramCore(HistogramConfig config, const InstrumentedTrace* decisions);

  // x must have length d. rng is consulted only in seeded mode.
  int64_t Update(const std::vector<int64_t>& x, Rng& rng);

  const InstrumentedTrace& trace() const { return trace_; }
  const HistogramConfig& config() const { return config_; }
  int64_t t() const { return t_; }
  int64_t j() const { return j_; }
  const Rational& thresh() const { return thresh_; }

 private:
  size_t CreateChild(CreationQuery cq);
  Message CallChild(size_t child, Message input, Rng& rng);
  CreationQuery SvtCreation() const;

  HistogramConfig config_;
  NoiseSource::Mode noise_mode_ = NoiseSource::Mode::kZero;
  const InstrumentedTrace* replay_ = nullptr;
  size_t replay_cursor_ = 0;

  std::vector<MechanismHandle> children_;
  size_t counter_child_ = 0;
  size_t svt_child_ = 0;
  std::vector<int64_t> h_;
  std::vector<int64_t> c_;
  int64_t out_ = 0;
  int64_t j_ = 1;
  int64_t t_ = 0;
  Rational thresh_;
  InstrumentedTrace trace_;
};

// Convenience drivers used by the structural checks and the CLI.
InstrumentedTrace RunHistogram(const HistogramConfig& config,
                               const std::vector<std::vector<int64_t>>& stream,
                               NoiseSource::Mode noise_mode, uint64_t seed);
InstrumentedTrace RunHistogramReplay(
    const HistogramConfig& config,
    const std::vector<std::vector<int64_t>>& stream,
    const InstrumentedTrace& decisions);

// The mechanism wrapper: accepts Query over {0,1}^d vectors for up to T
// steps and answers the current released query value. Anything else halts.
MechanismHandle MakeMonotoneHistogram(HistogramConfig config,
                                      NoiseSource::Mode noise_mode);

}  // namespace dplab

#endif  // DPLAB_MECHANISMS_MONOTONE_HISTOGRAM_H_
