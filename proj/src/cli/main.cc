// dplab: experiment driver for the continual-mechanism laboratory.
//
// Every subcommand resolves an effective configuration (flags over --config
// file over DPLAB_SEED over built-in defaults), runs one experiment, and
// emits a single JSON report. Reports are deterministic: identical
// configuration and seed produce byte-identical output. Exit status is 0
// exactly when every check in the report passed.

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dplab/analysis.h"
#include "dplab/compose.h"
#include "dplab/mechanisms/monotone_histogram.h"
#include "dplab/mechanisms/randomized_response.h"
#include "dplab/mechanisms/trip_reveal.h"
#include "dplab/pmf.h"
#include "dplab/query_fn.h"
#include "dplab/rational.h"
#include "dplab/reduction.h"
#include "dplab/registry.h"
#include "dplab/rng.h"
#include "dplab/transcript.h"
#include "dplab/verification.h"

using namespace dplab;

using Json = nlohmann::ordered_json;

namespace {

// Bad arguments or a bad config file; exits with a distinct status.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string FmtDouble(double x) {
  std::array<char, 32> buf;
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  (void)ec;
  return std::string(buf.data(), ptr);
}

std::string CsvCell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += "\"\"";
    else out += ch;
  }
  out += '"';
  return out;
}

void CsvRow(std::string& csv, const std::vector<std::string>& cells) {
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) csv += ',';
    csv += CsvCell(cells[i]);
  }
  csv += '\n';
}

// ---------------------------------------------------------------------------
// Configuration

struct ExperimentConfig {
  std::string command;
  std::string mechanism;  // empty: per-command default
  std::string query;      // empty: per-command default
  double epsilon = 1.0;
  double delta = 0.1;
  std::optional<double> epsilon2;  // second child; mirrors epsilon when unset
  std::optional<double> delta2;
  double beta = 0.1;
  int64_t horizon = 0;  // 0: per-command default
  int64_t d = 1;
  int64_t ell = 3;
  int64_t trials = 0;  // 0: per-command default
  uint64_t seed = 20260815;
  bool zero_noise = false;
};

uint64_t DefaultSeed() {
  const char* env = std::getenv("DPLAB_SEED");
  if (env == nullptr || *env == '\0') return 20260815ULL;
  uint64_t out = 0;
  const char* end = env + std::string(env).size();
  auto [ptr, ec] = std::from_chars(env, end, out);
  if (ec != std::errc() || ptr != end) {
    throw UsageError("DPLAB_SEED is not an unsigned integer");
  }
  return out;
}

ExperimentConfig DefaultsFor(const std::string& command) {
  ExperimentConfig c;
  c.command = command;
  c.seed = DefaultSeed();
  if (command == "counterexample") {
    c.delta = 0.5;
    c.epsilon = 0.0;
  } else if (command == "composition") {
    c.epsilon = 0.5;
    c.delta = 0.1;
  } else if (command == "structural") {
    c.d = 2;
  }
  return c;
}

void OverlayJson(ExperimentConfig& c, const Json& j,
                 const std::string& command) {
  if (!j.is_object()) throw UsageError("config: top level must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const Json& v = it.value();
    try {
      if (k == "command") {
        if (v.get<std::string>() != command) {
          throw UsageError("config: file is for command '" +
                           v.get<std::string>() + "', not '" + command + "'");
        }
      } else if (k == "mechanism") {
        c.mechanism = v.get<std::string>();
      } else if (k == "query") {
        c.query = v.get<std::string>();
      } else if (k == "epsilon") {
        c.epsilon = v.get<double>();
      } else if (k == "delta") {
        c.delta = v.get<double>();
      } else if (k == "epsilon2") {
        c.epsilon2 = v.get<double>();
      } else if (k == "delta2") {
        c.delta2 = v.get<double>();
      } else if (k == "beta") {
        c.beta = v.get<double>();
      } else if (k == "horizon") {
        c.horizon = v.get<int64_t>();
      } else if (k == "d") {
        c.d = v.get<int64_t>();
      } else if (k == "ell") {
        c.ell = v.get<int64_t>();
      } else if (k == "trials") {
        c.trials = v.get<int64_t>();
      } else if (k == "seed") {
        c.seed = v.get<uint64_t>();
      } else if (k == "zero_noise") {
        c.zero_noise = v.get<bool>();
      } else {
        throw UsageError("config: unknown key '" + k + "'");
      }
    } catch (const Json::exception& e) {
      throw UsageError("config: bad value for '" + k + "': " + e.what());
    }
  }
}

Json ConfigJson(const ExperimentConfig& c) {
  Json j;
  j["mechanism"] = c.mechanism;
  j["query"] = c.query;
  j["epsilon"] = c.epsilon;
  j["delta"] = c.delta;
  j["epsilon2"] = c.epsilon2.value_or(c.epsilon);
  j["delta2"] = c.delta2.value_or(c.delta);
  j["beta"] = c.beta;
  j["horizon"] = c.horizon;
  j["d"] = c.d;
  j["ell"] = c.ell;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["zero_noise"] = c.zero_noise;
  return j;
}

// ---------------------------------------------------------------------------
// Report

struct CheckRecord {
  std::string name;
  double epsilon = 0.0;
  double delta_measured = 0.0;
  double bound = 0.0;
  int64_t trials = 0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  bool pass = false;
};

Json CheckJson(const CheckRecord& c) {
  Json j;
  j["name"] = c.name;
  j["epsilon"] = c.epsilon;
  j["delta_measured"] = c.delta_measured;
  j["bound"] = c.bound;
  j["margin"] = c.bound - c.delta_measured;
  j["trials"] = c.trials;
  j["ci"] = Json::array({c.ci_lo, c.ci_hi});
  j["pass"] = c.pass;
  return j;
}

struct Report {
  std::string command;
  ExperimentConfig config;
  std::vector<CheckRecord> checks;
  std::vector<std::string> notes;
  std::string csv;

  bool Pass() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const CheckRecord& c) { return c.pass; });
  }

  Json ToJson() const {
    Json j;
    j["command"] = command;
    j["config"] = ConfigJson(config);
    Json arr = Json::array();
    for (const CheckRecord& c : checks) arr.push_back(CheckJson(c));
    j["checks"] = std::move(arr);
    j["notes"] = notes;
    j["csv"] = csv;
    j["pass"] = Pass();
    return j;
  }
};

// An exactly-computed check: the interval degenerates to the measured point.
CheckRecord ExactCheck(std::string name, double epsilon, double measured,
                       double bound, int64_t trials, bool pass) {
  CheckRecord c;
  c.name = std::move(name);
  c.epsilon = epsilon;
  c.delta_measured = measured;
  c.bound = bound;
  c.trials = trials;
  c.ci_lo = measured;
  c.ci_hi = measured;
  c.pass = pass;
  return c;
}

// Collapse a transcript to its answer payloads; padded Halt rounds keep the
// shapes of early-halting runs aligned.
Value AnswerKey(const Transcript& t) {
  ValueList xs;
  for (const auto& [dir, m] : t.messages) {
    if (dir == Direction::kToAdversary) xs.push_back(m.payload);
  }
  return Value(std::move(xs));
}

// ---------------------------------------------------------------------------
// counterexample: the exposure hunt against a 1-sparse composition claim.

Report RunCounterexample(ExperimentConfig eff) {
  if (eff.delta < 0.0 || eff.delta > 1.0) {
    throw UsageError("counterexample: delta must be in [0, 1]");
  }
  if (eff.ell < 1) throw UsageError("counterexample: ell must be >= 1");
  if (eff.trials == 0) eff.trials = 10000;
  if (eff.trials < 1) throw UsageError("counterexample: trials must be >= 1");

  const Rational delta_ex = RationalFromDouble(eff.delta);
  auto reg = std::make_shared<Registry>(MakeStandardRegistry());
  const std::vector<PrivacyParams> slots = {
      PrivacyParams::FromDouble(0.0, eff.delta)};
  auto stack = [reg, slots](int b) {
    return ComposePost(
        Chain(MakeVerifier(ParallelSparseVf(slots, *reg)), MakeIdentifier(b)),
        MakeExtConComp(*reg));
  };

  const MechanismHandle adversary =
      MakeTripProbeAdversary(eff.delta, static_cast<int>(eff.ell));
  const GameResult game =
      RunDistinguishingGame(adversary, stack, eff.trials, eff.seed);

  // Exposure of the hunt: one trip among at most ell fresh children.
  const Rational exposure =
      Rational(1) - Pow(Rational(1) - delta_ex, static_cast<unsigned>(eff.ell));
  const Rational success = (Rational(1) + exposure) / 2;

  Report rep;
  rep.command = eff.command;
  rep.config = eff;

  {
    CheckRecord c;
    c.name = "exposure-matches-analytic";
    c.epsilon = 0.0;
    c.delta_measured = 2.0 * game.success_rate - 1.0;
    c.bound = ToDouble(exposure);
    c.trials = game.trials;
    c.ci_lo = 2.0 * game.ci.low - 1.0;
    c.ci_hi = 2.0 * game.ci.high - 1.0;
    const double succ = ToDouble(success);
    c.pass = game.ci.low <= succ && succ <= game.ci.high;
    rep.checks.push_back(c);
  }
  if (eff.ell >= 2) {
    // Were the claim honest, guessing advantage would stop at delta.
    const Rational claim = (Rational(1) + delta_ex) / 2;
    CheckRecord c;
    c.name = "sparse-claim-violated";
    c.epsilon = 0.0;
    c.delta_measured = game.success_rate;
    c.bound = ToDouble(claim);
    c.trials = game.trials;
    c.ci_lo = game.ci.low;
    c.ci_hi = game.ci.high;
    c.pass = RationalFromDouble(game.ci.low) > claim;
    rep.checks.push_back(c);
  }

  CsvRow(rep.csv, {"ell", "exposure", "success"});
  for (int64_t l = 0; l <= eff.ell; ++l) {
    const Rational p =
        Rational(1) - Pow(Rational(1) - delta_ex, static_cast<unsigned>(l));
    CsvRow(rep.csv, {std::to_string(l), FmtDouble(ToDouble(p)),
                     FmtDouble(ToDouble((Rational(1) + p) / 2))});
  }
  rep.notes.push_back("observed success rate " + FmtDouble(game.success_rate) +
                      " over " + std::to_string(game.trials) + " trials");
  return rep;
}

// ---------------------------------------------------------------------------
// composition: exact worst case over all two-child strategies.

Report RunComposition(ExperimentConfig eff) {
  const double e1 = eff.epsilon;
  const double d1 = eff.delta;
  const double e2 = eff.epsilon2.value_or(eff.epsilon);
  const double d2 = eff.delta2.value_or(eff.delta);
  eff.epsilon2 = e2;
  eff.delta2 = d2;
  if (d1 < 0 || d1 > 1 || d2 < 0 || d2 > 1) {
    throw UsageError("composition: deltas must be in [0, 1]");
  }
  if (e1 < 0 || e2 < 0) {
    throw UsageError("composition: epsilons must be >= 0");
  }
  if (eff.horizon == 0) eff.horizon = 5;
  if (eff.horizon < 5) {
    throw UsageError("composition: horizon must be >= 5 (two creations, two "
                     "queries, one halt round)");
  }

  const PrivacyParams p1 = PrivacyParams::FromDouble(e1, d1);
  const PrivacyParams p2 = PrivacyParams::FromDouble(e2, d2);
  const Registry reg = MakeStandardRegistry();
  const CreationQuery a1{"rr", Value::Unit(), p1, "rr_single"};
  const CreationQuery a2{"rr", Value::Unit(), p2, "rr_single"};
  auto stack = [&](int b) {
    return ComposePost(Chain(MakeVerifier(FixedMechsVf({a1, a2}, reg)),
                             MakeIdentifier(b)),
                       MakeExtConComp(reg));
  };

  const Rational e_eps = p1.rho * p2.rho;
  const Rational bound =
      Rational(1) - (Rational(1) - p1.delta_exact) * (Rational(1) - p2.delta_exact);

  Report rep;
  rep.command = eff.command;
  rep.config = eff;
  CsvRow(rep.csv, {"template", "first", "x0", "x1", "y00", "y01", "y10", "y11",
                   "delta", "delta_exact"});

  const std::vector<TwoChildTemplate> templates = EnumerateTwoChildTemplates();
  Rational worst = 0;
  size_t worst_idx = 0;
  for (size_t i = 0; i < templates.size(); ++i) {
    const TwoChildTemplate& t = templates[i];
    const MechanismHandle adv = MakeTemplateAdversary(t, a1, a2);
    const DiscretePmf v0 = EnumerateViews(adv, stack(0), eff.horizon);
    const DiscretePmf v1 = EnumerateViews(adv, stack(1), eff.horizon);
    const Rational hs = HockeyStickDelta(v0, v1, e_eps);
    if (hs > worst) {
      worst = hs;
      worst_idx = i;
    }
    CsvRow(rep.csv,
           {std::to_string(i), std::to_string(t.first), std::to_string(t.x[0]),
            std::to_string(t.x[1]), std::to_string(t.y[0][0]),
            std::to_string(t.y[0][1]), std::to_string(t.y[1][0]),
            std::to_string(t.y[1][1]), FmtDouble(ToDouble(hs)), ToString(hs)});
  }

  const double eps_total = e1 + e2;
  rep.checks.push_back(ExactCheck("within-product-bound", eps_total,
                                  ToDouble(worst), ToDouble(bound),
                                  static_cast<int64_t>(templates.size()),
                                  worst <= bound));
  rep.checks.push_back(ExactCheck(
      "bound-attained", eps_total, ToDouble(worst), ToDouble(bound),
      static_cast<int64_t>(templates.size()),
      worst <= bound && bound - worst <= RationalFromDouble(1e-12)));
  rep.notes.push_back("worst template: " + std::to_string(worst_idx) +
                      " with divergence " + ToString(worst) + " at e_eps " +
                      ToString(e_eps));
  rep.notes.push_back("product bound: " + ToString(bound));
  return rep;
}

// ---------------------------------------------------------------------------
// histogram: drive the interval-flush release and record its error series.

Report RunHistogramCmd(ExperimentConfig eff) {
  if (eff.horizon == 0) eff.horizon = 50;
  if (eff.query.empty()) eff.query = eff.d == 1 ? "sum" : "max";
  if (eff.horizon < 1) throw UsageError("histogram: horizon must be >= 1");
  if (eff.d < 1) throw UsageError("histogram: d must be >= 1");
  if (eff.epsilon <= 0) throw UsageError("histogram: epsilon must be > 0");
  if (eff.beta <= 0 || eff.beta >= 1) {
    throw UsageError("histogram: beta must be in (0, 1)");
  }
  if (!HasQueryFn(eff.query)) {
    throw UsageError("histogram: unknown query '" + eff.query + "'");
  }
  const QueryFn q = LookupQueryFn(eff.query);
  if (!IsOneSensitive(q, static_cast<int>(eff.d))) {
    throw UsageError("histogram: query '" + eff.query +
                     "' is not 1-sensitive at d = " + std::to_string(eff.d));
  }

  HistogramConfig hc;
  hc.epsilon = eff.epsilon;
  hc.q = q;
  hc.beta = eff.beta;
  hc.schedule = MakeSchedule("default", "half", static_cast<int>(eff.d),
                             eff.beta, eff.epsilon);
  hc.d = static_cast<int>(eff.d);
  hc.T = eff.horizon;
  const NoiseSource::Mode mode =
      eff.zero_noise ? NoiseSource::Mode::kZero : NoiseSource::Mode::kSeeded;

  HistogramCore core(hc, mode);
  Rng noise(eff.seed);
  const Rng stream = Rng(eff.seed).Split(1);

  Report rep;
  rep.command = eff.command;
  rep.config = eff;
  CsvRow(rep.csv, {"t", "x", "out", "true", "gap", "thresh"});

  std::vector<int64_t> cum(hc.d, 0);
  int64_t prev = 0;
  int64_t monotone_violations = 0;
  bool have_prev = false;
  Rational worst_excess = -1;  // max of gap - thresh and -gap over all steps
  for (int64_t t = 0; t < eff.horizon; ++t) {
    std::vector<int64_t> x(hc.d);
    std::string xs;
    for (int k = 0; k < hc.d; ++k) {
      x[k] = static_cast<int64_t>(
          stream.Split2(static_cast<uint64_t>(t), static_cast<uint64_t>(k))
              .Next() &
          1);
      if (k > 0) xs += ' ';
      xs += std::to_string(x[k]);
      cum[k] += x[k];
    }
    const int64_t out = core.Update(x, noise);
    const int64_t truth = q.eval(cum);
    const int64_t gap = truth - out;
    const Rational thresh = core.thresh();
    if (have_prev && out < prev) ++monotone_violations;
    prev = out;
    have_prev = true;
    const Rational excess =
        std::max(Rational(gap) - thresh, Rational(-gap));
    if (excess > worst_excess) worst_excess = excess;
    CsvRow(rep.csv, {std::to_string(t), xs, std::to_string(out),
                     std::to_string(truth), std::to_string(gap),
                     FmtDouble(ToDouble(thresh))});
  }

  rep.checks.push_back(ExactCheck("released-sequence-monotone", eff.epsilon,
                                  static_cast<double>(monotone_violations), 0.0,
                                  eff.horizon, monotone_violations == 0));
  if (eff.zero_noise) {
    // Noise-free invariant: the release lags the truth by less than the
    // armed threshold and never overshoots it.
    rep.checks.push_back(ExactCheck("lag-within-current-threshold",
                                    eff.epsilon, ToDouble(worst_excess), 0.0,
                                    eff.horizon, worst_excess <= 0));
  } else {
    CheckRecord c = ExactCheck("lag-vs-threshold-informational", eff.epsilon,
                               ToDouble(worst_excess), 0.0, eff.horizon, true);
    rep.checks.push_back(c);
    rep.notes.push_back(
        "seeded run: threshold excess is reported but not asserted");
  }
  return rep;
}

// ---------------------------------------------------------------------------
// structural: coupled-replay checks of the histogram update loop.

Report RunStructural(ExperimentConfig eff) {
  if (eff.horizon == 0) eff.horizon = 16;
  if (eff.trials == 0) eff.trials = 200;
  if (eff.query.empty()) eff.query = eff.d == 1 ? "sum" : "max";
  if (eff.horizon < 1) throw UsageError("structural: horizon must be >= 1");
  if (eff.trials < 1) throw UsageError("structural: trials must be >= 1");
  if (eff.d < 1) throw UsageError("structural: d must be >= 1");
  if (eff.epsilon <= 0) throw UsageError("structural: epsilon must be > 0");
  if (!HasQueryFn(eff.query)) {
    throw UsageError("structural: unknown query '" + eff.query + "'");
  }
  const QueryFn q = LookupQueryFn(eff.query);
  if (!IsOneSensitive(q, static_cast<int>(eff.d))) {
    throw UsageError("structural: query '" + eff.query +
                     "' is not 1-sensitive at d = " + std::to_string(eff.d));
  }

  HistogramConfig hc;
  hc.epsilon = eff.epsilon;
  hc.q = q;
  hc.beta = eff.beta;
  hc.schedule = MakeSchedule("default", "half", static_cast<int>(eff.d),
                             eff.beta, eff.epsilon);
  hc.d = static_cast<int>(eff.d);
  hc.T = eff.horizon;
  const NoiseSource::Mode mode =
      eff.zero_noise ? NoiseSource::Mode::kZero : NoiseSource::Mode::kSeeded;

  const Registry reg = MakeStandardRegistry();
  const Rng base(eff.seed);
  const int64_t T = eff.horizon;
  const int64_t D = eff.d;

  auto make_streams = [&](int64_t i, std::vector<std::vector<int64_t>>* a,
                          std::vector<std::vector<int64_t>>* b,
                          int64_t* flip_step) {
    a->assign(T, std::vector<int64_t>(D, 0));
    const Rng sa = base.Split2(static_cast<uint64_t>(i), 0);
    for (int64_t t = 0; t < T; ++t) {
      for (int64_t k = 0; k < D; ++k) {
        (*a)[t][k] = static_cast<int64_t>(
            sa.Split2(static_cast<uint64_t>(t), static_cast<uint64_t>(k))
                .Next() &
            1);
      }
    }
    *b = *a;
    Rng pick = base.Split2(static_cast<uint64_t>(i), 1);
    *flip_step = static_cast<int64_t>(pick.Next() % static_cast<uint64_t>(T));
    const Rng sb = base.Split2(static_cast<uint64_t>(i), 2);
    for (int64_t k = 0; k < D; ++k) {
      (*b)[*flip_step][k] = static_cast<int64_t>(
          sb.Split(static_cast<uint64_t>(k)).Next() & 1);
    }
  };

  Report rep;
  rep.command = eff.command;
  rep.config = eff;
  CsvRow(rep.csv, {"trial", "flip_step", "all_ok", "destination_ok",
                   "response_ok", "mapping_ok", "svt_diff", "laplace_diff",
                   "counter_diff"});

  int64_t property_failures = 0;
  int64_t confinement_failures = 0;
  std::optional<std::string> first_witness;
  for (int64_t i = 0; i < eff.trials; ++i) {
    std::vector<std::vector<int64_t>> a, b;
    int64_t flip_step = 0;
    make_streams(i, &a, &b, &flip_step);
    const uint64_t run_seed = base.Split2(static_cast<uint64_t>(i), 3).Next();
    const InstrumentedTrace ta = RunHistogram(hc, a, mode, run_seed);
    const InstrumentedTrace tb = RunHistogramReplay(hc, b, ta);
    const StructuralReport sr = CheckStructuralProperties(ta, tb, reg);
    if (!sr.AllOk()) {
      ++property_failures;
      if (!first_witness) {
        std::string w = "trial " + std::to_string(i) + ":";
        if (sr.destination_witness) w += " " + sr.destination_witness->detail;
        if (sr.response_witness) w += " " + sr.response_witness->detail;
        if (sr.mapping_witness) w += " " + sr.mapping_witness->detail;
        first_witness = w;
      }
    }
    auto diff = [&](const char* id) -> size_t {
      auto it = sr.differing_children.find(id);
      return it == sr.differing_children.end() ? 0 : it->second;
    };
    const size_t svt = diff("svt");
    const size_t lap = diff("laplace_int");
    const size_t ctr = diff("d_counter") + diff("binary_counter");
    bool confined = svt <= 1 && lap <= 1;
    for (const auto& [id, n] : sr.differing_children) {
      if (id != "svt" && id != "laplace_int" && id != "d_counter" &&
          id != "binary_counter" && n > 0) {
        confined = false;
      }
    }
    if (!confined) ++confinement_failures;
    CsvRow(rep.csv,
           {std::to_string(i), std::to_string(flip_step),
            sr.AllOk() ? "1" : "0", sr.destination_ok ? "1" : "0",
            sr.response_ok ? "1" : "0", sr.mapping_ok ? "1" : "0",
            std::to_string(svt), std::to_string(lap), std::to_string(ctr)});
  }

  // The raw-exposure switch must be caught by the same checks.
  HistogramConfig violator = hc;
  violator.expose_raw = true;
  bool caught = false;
  int64_t caught_trial = -1;
  for (int64_t i = 0; i < eff.trials && !caught; ++i) {
    std::vector<std::vector<int64_t>> a, b;
    int64_t flip_step = 0;
    make_streams(i, &a, &b, &flip_step);
    const uint64_t run_seed = base.Split2(static_cast<uint64_t>(i), 3).Next();
    const InstrumentedTrace ta = RunHistogram(violator, a, mode, run_seed);
    const InstrumentedTrace tb = RunHistogramReplay(violator, b, ta);
    if (!CheckStructuralProperties(ta, tb, reg).AllOk()) {
      caught = true;
      caught_trial = i;
    }
  }

  rep.checks.push_back(ExactCheck("coupled-replay-properties", eff.epsilon,
                                  static_cast<double>(property_failures), 0.0,
                                  eff.trials, property_failures == 0));
  rep.checks.push_back(ExactCheck("divergence-confinement", eff.epsilon,
                                  static_cast<double>(confinement_failures),
                                  0.0, eff.trials, confinement_failures == 0));
  rep.checks.push_back(ExactCheck("raw-exposure-detected", eff.epsilon,
                                  caught ? 1.0 : 0.0, 1.0, eff.trials, caught));
  if (first_witness) rep.notes.push_back(*first_witness);
  if (caught) {
    rep.notes.push_back("raw-exposure violator detected at trial " +
                        std::to_string(caught_trial));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// reduction: answer tables, allocation tables, and the two-call relay.

struct ReductionInstance {
  AnswerTable at;
  Rational e_eps;
  Rational delta;
};

ReductionInstance BuildReductionInstance(const ExperimentConfig& eff) {
  const PrivacyParams params =
      PrivacyParams::FromDouble(eff.epsilon, eff.delta);
  ReductionInstance inst;
  inst.e_eps = params.rho;
  inst.delta = params.delta_exact;
  if (eff.mechanism == "rr") {
    const std::vector<Message> queries = {Message::Query(Value(0))};
    inst.at = ComputeMu(MakeRrSource(params, 0), MakeRrSource(params, 1),
                        queries, eff.horizon);
  } else if (eff.mechanism == "m_delta") {
    std::vector<Message> queries;
    for (int x0 = 0; x0 < 2; ++x0) {
      for (int x1 = 0; x1 < 2; ++x1) {
        queries.push_back(Message::QueryPair(Value(x0), Value(x1)));
      }
    }
    auto stack = [&](int b) {
      return ComposePost(Chain(MakeVerifier(LiftChildVf(MDeltaGChildVf())),
                               MakeIdentifier(b)),
                         MakeTripReveal(params.delta_exact));
    };
    inst.at = ComputeMu(stack(0), stack(1), queries, eff.horizon);
  } else if (eff.mechanism == "coin") {
    // Input-independent fair coin, then halt: the degenerate pure-DP case.
    const std::vector<Message> queries = {Message::Query(Value::Unit())};
    const std::vector<Message> answers = {Message::Answer(Value(0)),
                                          Message::Answer(Value(1)),
                                          Message::Halt()};
    auto law = [](int, int64_t t, int64_t, size_t) {
      std::map<size_t, Rational> out;
      if (t == 1) {
        out[0] = Rational(1, 2);
        out[1] = Rational(1, 2);
      } else {
        out[2] = Rational(1);
      }
      return out;
    };
    inst.at = ComputeMuFromLaw(queries, answers, eff.horizon, law);
    inst.delta = 0;
  } else {
    throw UsageError("reduction: unknown mechanism '" + eff.mechanism +
                     "' (expected rr, m_delta, or coin)");
  }
  return inst;
}

std::string NodeKey(const AnswerTable& at, int64_t t, int64_t node) {
  const int64_t nq = static_cast<int64_t>(at.queries.size());
  const int64_t na = static_cast<int64_t>(at.answers.size());
  std::vector<std::pair<int64_t, int64_t>> path;
  int64_t n = node;
  for (int64_t i = 0; i < t; ++i) {
    const int64_t a = n % na;
    n /= na;
    const int64_t q = n % nq;
    n /= nq;
    path.emplace_back(q, a);
  }
  std::reverse(path.begin(), path.end());
  std::string out;
  for (size_t i = 0; i < path.size(); ++i) {
    if (i > 0) out += '|';
    out += at.queries[static_cast<size_t>(path[i].first)].payload.ToString();
    out += '>';
    out += at.answers[static_cast<size_t>(path[i].second)].payload.ToString();
  }
  return out;
}

std::string TableCell(const PairedTables& tab, int b, int64_t t, int64_t n) {
  if (t < 0 || t >= static_cast<int64_t>(tab[static_cast<size_t>(b)].size())) {
    return "";
  }
  const auto& level = tab[static_cast<size_t>(b)][static_cast<size_t>(t)];
  if (n < 0 || n >= static_cast<int64_t>(level.size())) return "";
  return ToString(level[static_cast<size_t>(n)]);
}

// Exact gap between the relay-over-two-call-core view and the answer table,
// over every query sequence and both inputs.
Rational MaxFactorizationGap(const AnswerTable& at,
                             const ReductionBundle& bundle) {
  const auto mu_ptr = std::make_shared<const AnswerTable>(at);
  const auto tab_ptr = std::make_shared<const ReductionBundle>(bundle);
  const int64_t T = bundle.control.cutoff;
  const size_t nq = at.queries.size();
  const size_t na = at.answers.size();
  const PrivacyParams irr_params =
      PrivacyParams::FromExact(bundle.e_eps, bundle.delta);
  Rational worst = 0;
  std::vector<size_t> seq(static_cast<size_t>(T), 0);
  for (;;) {
    std::vector<Message> script;
    for (size_t qi : seq) script.push_back(at.queries[qi]);
    for (int b = 0; b < 2; ++b) {
      const MechanismHandle composed =
          ComposePost(BuildIrrPostprocessor(mu_ptr, tab_ptr),
                      MakeIrr(irr_params, b));
      std::map<Value, Rational> got;
      for (const auto& [tr, p] :
           EnumerateTranscripts(MakeScriptedAdversary(script), composed, T)) {
        got[AnswerKey(tr)] += p;
      }
      std::map<Value, Rational> want;
      std::vector<size_t> ans(static_cast<size_t>(T), 0);
      for (;;) {
        int64_t node = 0;
        ValueList xs;
        for (int64_t t = 0; t < T; ++t) {
          node = at.Child(node, seq[static_cast<size_t>(t)],
                          ans[static_cast<size_t>(t)]);
          xs.push_back(at.answers[ans[static_cast<size_t>(t)]].payload);
        }
        const Rational& m =
            at.mu[static_cast<size_t>(b)][static_cast<size_t>(T)]
                 [static_cast<size_t>(node)];
        if (m != 0) want[Value(xs)] += m;
        int64_t i = T - 1;
        while (i >= 0 && ++ans[static_cast<size_t>(i)] == na) {
          ans[static_cast<size_t>(i)] = 0;
          --i;
        }
        if (i < 0) break;
      }
      for (const auto& [k, v] : want) {
        const auto it = got.find(k);
        const Rational g = it == got.end() ? Rational(0) : it->second;
        const Rational gap = Abs(v - g);
        if (gap > worst) worst = gap;
      }
      for (const auto& [k, v] : got) {
        if (want.find(k) == want.end() && Abs(v) > worst) worst = Abs(v);
      }
    }
    int64_t i = T - 1;
    while (i >= 0 && ++seq[static_cast<size_t>(i)] == nq) {
      seq[static_cast<size_t>(i)] = 0;
      --i;
    }
    if (i < 0) break;
  }
  return worst;
}

Report RunReduction(ExperimentConfig eff) {
  if (eff.mechanism.empty()) eff.mechanism = "rr";
  if (eff.horizon == 0) {
    eff.horizon = eff.mechanism == "m_delta" ? 3 : 2;
  }
  if (eff.horizon < 1) throw UsageError("reduction: horizon must be >= 1");
  if (eff.epsilon <= 0) throw UsageError("reduction: epsilon must be > 0");
  if (eff.delta < 0 || eff.delta > 1) {
    throw UsageError("reduction: delta must be in [0, 1]");
  }
  {
    // Table growth is (|Q| * |A|)^horizon; refuse configs that cannot fit.
    const double branch = eff.mechanism == "m_delta" ? 20.0 : 5.0;
    if (std::pow(branch, static_cast<double>(eff.horizon)) > 2e6) {
      throw UsageError("reduction: horizon too deep for this mechanism");
    }
  }

  const ReductionInstance inst = BuildReductionInstance(eff);
  const ReductionBundle bundle =
      ComputeReduction(inst.at, inst.e_eps, inst.delta);
  const ReductionReport vr = VerifyReduction(inst.at, bundle);
  const Rational tol = RationalFromDouble(1e-9);

  int64_t cells = 0;
  for (int64_t t = 0; t <= inst.at.horizon; ++t) {
    cells += 2 * inst.at.LevelSize(t);
  }

  Report rep;
  rep.command = eff.command;
  rep.config = eff;
  rep.checks.push_back(ExactCheck("table-identities", eff.epsilon,
                                  ToDouble(vr.Max()), 1e-9, cells,
                                  vr.Max() <= tol));
  rep.checks.push_back(ExactCheck("mixture-identity", eff.epsilon,
                                  ToDouble(vr.mixture_residual), 1e-9, cells,
                                  vr.mixture_residual <= tol));

  const Rational factor_gap = MaxFactorizationGap(inst.at, bundle);
  int64_t seq_count = 1;
  for (int64_t t = 0; t < bundle.control.cutoff; ++t) {
    seq_count *= static_cast<int64_t>(inst.at.queries.size());
  }
  rep.checks.push_back(ExactCheck("two-call-factorization", eff.epsilon,
                                  ToDouble(factor_gap), 1e-9, 2 * seq_count,
                                  factor_gap <= tol));

  bool any_exposed = false;
  bool any_private = false;
  if (seq_count <= 65536) {
    std::vector<size_t> seq(static_cast<size_t>(bundle.control.cutoff), 0);
    for (;;) {
      const InteractionProfile prof = AnalyzeInteractions(inst.at, bundle, seq);
      any_exposed = any_exposed || prof.exposed_second;
      any_private = any_private || prof.private_second;
      int64_t i = bundle.control.cutoff - 1;
      while (i >= 0 &&
             ++seq[static_cast<size_t>(i)] == inst.at.queries.size()) {
        seq[static_cast<size_t>(i)] = 0;
        --i;
      }
      if (i < 0) break;
    }
    rep.checks.push_back(
        ExactCheck("interaction-count", eff.epsilon,
                   static_cast<double>((any_exposed ? 1 : 0) +
                                       (any_private ? 1 : 0)),
                   2.0, seq_count, true));
    rep.notes.push_back(std::string("second call forced: exposed branch ") +
                        (any_exposed ? "yes" : "no") + ", private branch " +
                        (any_private ? "yes" : "no"));
  } else {
    rep.notes.push_back("interaction profile skipped: too many query "
                        "sequences");
  }
  rep.notes.push_back("derived budget floor: " +
                      ToString(bundle.control.l[0][0][0]) + " / " +
                      ToString(bundle.control.l[1][0][0]) +
                      ", working delta " + ToString(bundle.delta));

  CsvRow(rep.csv, {"t", "b", "transcript", "mu", "l", "xi", "phi", "psi"});
  for (int64_t t = 0; t <= inst.at.horizon; ++t) {
    const int64_t level = inst.at.LevelSize(t);
    for (int64_t n = 0; n < level; ++n) {
      const bool live =
          inst.at.mu[0][static_cast<size_t>(t)][static_cast<size_t>(n)] != 0 ||
          inst.at.mu[1][static_cast<size_t>(t)][static_cast<size_t>(n)] != 0;
      if (!live) continue;
      const std::string key = NodeKey(inst.at, t, n);
      for (int b = 0; b < 2; ++b) {
        CsvRow(rep.csv,
               {std::to_string(t), std::to_string(b), key,
                TableCell(inst.at.mu, b, t, n),
                TableCell(bundle.control.l, b, t, n),
                TableCell(bundle.constraints.xi, b, t, n),
                TableCell(bundle.constraints.phi, b, t, n),
                TableCell(bundle.psi, b, t, n)});
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// enumerate: exhaustive views with exact divergences.

Report RunEnumerate(ExperimentConfig eff) {
  if (eff.mechanism.empty()) eff.mechanism = "rr";
  if (eff.delta < 0 || eff.delta > 1) {
    throw UsageError("enumerate: delta must be in [0, 1]");
  }
  if (eff.epsilon < 0) throw UsageError("enumerate: epsilon must be >= 0");
  if (eff.horizon == 0) eff.horizon = eff.mechanism == "m_delta" ? 3 : 2;
  if (eff.horizon < 2) throw UsageError("enumerate: horizon must be >= 2");

  const PrivacyParams params =
      PrivacyParams::FromDouble(eff.epsilon, eff.delta);
  Report rep;
  rep.command = eff.command;
  rep.config = eff;

  if (eff.mechanism == "rr") {
    const MechanismHandle adv =
        MakeScriptedAdversary({Message::Query(Value(0))});
    const DiscretePmf v0 =
        EnumerateViews(adv, MakeRrSource(params, 0), eff.horizon);
    const DiscretePmf v1 =
        EnumerateViews(adv, MakeRrSource(params, 1), eff.horizon);
    const Rational hs = HockeyStickDelta(v0, v1, params.rho);
    rep.checks.push_back(ExactCheck(
        "hockey-stick-at-rho", eff.epsilon, ToDouble(hs), eff.delta,
        static_cast<int64_t>(v0.SupportSize() + v1.SupportSize()),
        hs == params.delta_exact));
    CsvRow(rep.csv, {"outcome", "p0", "p1"});
    std::map<Value, std::pair<Rational, Rational>> rows;
    for (const auto& [k, p] : v0.Entries()) rows[k].first = p;
    for (const auto& [k, p] : v1.Entries()) rows[k].second = p;
    for (const auto& [k, pq] : rows) {
      CsvRow(rep.csv,
             {k.ToString(), ToString(pq.first), ToString(pq.second)});
    }
  } else if (eff.mechanism == "m_delta") {
    // Neighboring inputs differ in the second revealed bit.
    auto views = [&](int second_bit) {
      DiscretePmf pmf;
      const MechanismHandle adv = MakeScriptedAdversary(
          {Message::Query(Value(0)), Message::Query(Value(second_bit))});
      for (const auto& [tr, p] : EnumerateTranscripts(
               adv, MakeTripReveal(params.delta_exact), eff.horizon)) {
        pmf.Add(AnswerKey(tr), p);
      }
      return pmf;
    };
    const DiscretePmf v0 = views(0);
    const DiscretePmf v1 = views(1);
    const Rational tv = HockeyStickDelta(v0, v1, Rational(1));
    rep.checks.push_back(ExactCheck(
        "tv-at-one", eff.epsilon, ToDouble(tv), eff.delta,
        static_cast<int64_t>(v0.SupportSize() + v1.SupportSize()),
        tv == params.delta_exact));
    CsvRow(rep.csv, {"outcome", "p0", "p1"});
    std::map<Value, std::pair<Rational, Rational>> rows;
    for (const auto& [k, p] : v0.Entries()) rows[k].first = p;
    for (const auto& [k, p] : v1.Entries()) rows[k].second = p;
    for (const auto& [k, pq] : rows) {
      CsvRow(rep.csv,
             {k.ToString(), ToString(pq.first), ToString(pq.second)});
    }
  } else {
    throw UsageError("enumerate: unknown mechanism '" + eff.mechanism +
                     "' (expected rr or m_delta)");
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Option plumbing

struct RawOptions {
  std::string config_path;
  std::string out_path;
  std::string csv_path;
  std::string mechanism;
  std::string query;
  double epsilon = 0;
  double delta = 0;
  double epsilon2 = 0;
  double delta2 = 0;
  double beta = 0;
  int64_t horizon = 0;
  int64_t trials = 0;
  int64_t d = 0;
  int64_t ell = 0;
  uint64_t seed = 0;
  bool zero_noise = false;
};

void AddOptions(CLI::App* cmd, RawOptions& raw) {
  cmd->add_option("--config", raw.config_path,
                  "JSON config file; explicit flags override its values");
  cmd->add_option("--out", raw.out_path,
                  "write the JSON report here instead of stdout");
  cmd->add_option("--csv", raw.csv_path,
                  "also write the embedded CSV series to this file");
  cmd->add_option("--mechanism", raw.mechanism,
                  "instance selector (reduction: rr/m_delta/coin, "
                  "enumerate: rr/m_delta)");
  cmd->add_option("--query", raw.query, "histogram query id: sum or max");
  cmd->add_option("--epsilon", raw.epsilon,
                  "epsilon of the instance (first child for composition)");
  cmd->add_option("--delta", raw.delta,
                  "delta of the instance (first child for composition)");
  cmd->add_option("--epsilon2", raw.epsilon2,
                  "second-child epsilon (composition; defaults to --epsilon)");
  cmd->add_option("--delta2", raw.delta2,
                  "second-child delta (composition; defaults to --delta)");
  cmd->add_option("--beta", raw.beta, "histogram failure budget");
  cmd->add_option("--horizon", raw.horizon,
                  "rounds / stream length / table depth");
  cmd->add_option("--trials", raw.trials,
                  "sampled trials or coupled run pairs");
  cmd->add_option("--d", raw.d, "histogram dimension");
  cmd->add_option("--ell", raw.ell,
                  "maximum created children in the exposure hunt");
  cmd->add_option("--seed", raw.seed,
                  "root seed (default: DPLAB_SEED or 20260815)");
  cmd->add_flag("--zero-noise", raw.zero_noise, "run noise-free");
}

ExperimentConfig Effective(const CLI::App& cmd, const RawOptions& raw,
                           const std::string& name) {
  ExperimentConfig c = DefaultsFor(name);
  if (cmd.count("--config") > 0) {
    std::ifstream in(raw.config_path);
    if (!in) throw UsageError("cannot read config file: " + raw.config_path);
    Json j;
    try {
      j = Json::parse(in);
    } catch (const Json::exception& e) {
      throw UsageError("config: " + std::string(e.what()));
    }
    OverlayJson(c, j, name);
  }
  const auto set = [&cmd](const char* flag) { return cmd.count(flag) > 0; };
  if (set("--mechanism")) c.mechanism = raw.mechanism;
  if (set("--query")) c.query = raw.query;
  if (set("--epsilon")) c.epsilon = raw.epsilon;
  if (set("--delta")) c.delta = raw.delta;
  if (set("--epsilon2")) c.epsilon2 = raw.epsilon2;
  if (set("--delta2")) c.delta2 = raw.delta2;
  if (set("--beta")) c.beta = raw.beta;
  if (set("--horizon")) c.horizon = raw.horizon;
  if (set("--trials")) c.trials = raw.trials;
  if (set("--d")) c.d = raw.d;
  if (set("--ell")) c.ell = raw.ell;
  if (set("--seed")) c.seed = raw.seed;
  if (set("--zero-noise")) c.zero_noise = true;
  return c;
}

void Emit(const Report& rep, const RawOptions& raw) {
  const std::string text = rep.ToJson().dump(2) + "\n";
  if (!raw.out_path.empty()) {
    std::ofstream out(raw.out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write: " + raw.out_path);
    out << text;
  } else {
    std::cout << text;
  }
  if (!raw.csv_path.empty()) {
    std::ofstream out(raw.csv_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write: " + raw.csv_path);
    out << rep.csv;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"laboratory for continual mechanisms and their composition"};
  app.require_subcommand(1);

  const std::array<std::pair<const char*, const char*>, 6> meta = {{
      {"counterexample",
       "exposure hunt defeating a 1-sparse parallel composition claim"},
      {"composition",
       "exact two-child worst-case divergence against the product bound"},
      {"histogram", "interval-flush monotone release with its error series"},
      {"reduction",
       "answer tables, allocation tables, and the two-call factorization"},
      {"structural", "coupled-replay structural checks of the histogram"},
      {"enumerate", "exhaustive view distributions with exact divergences"},
  }};
  std::array<RawOptions, 6> raws;
  std::array<CLI::App*, 6> cmds{};
  for (size_t i = 0; i < meta.size(); ++i) {
    cmds[i] = app.add_subcommand(meta[i].first, meta[i].second);
    AddOptions(cmds[i], raws[i]);
  }

  CLI11_PARSE(app, argc, argv);

  size_t idx = 0;
  for (size_t i = 0; i < cmds.size(); ++i) {
    if (cmds[i]->parsed()) idx = i;
  }

  try {
    const ExperimentConfig eff = Effective(*cmds[idx], raws[idx],
                                           meta[idx].first);
    Report rep;
    switch (idx) {
      case 0: rep = RunCounterexample(eff); break;
      case 1: rep = RunComposition(eff); break;
      case 2: rep = RunHistogramCmd(eff); break;
      case 3: rep = RunReduction(eff); break;
      case 4: rep = RunStructural(eff); break;
      default: rep = RunEnumerate(eff); break;
    }
    Emit(rep, raws[idx]);
    return rep.Pass() ? 0 : 1;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
