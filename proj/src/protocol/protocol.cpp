#include "gtt/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "gtt/errors.hpp"
#include "gtt/image_io.hpp"
#include "gtt/rng.hpp"

namespace gtt {

const char* to_string(StimulusKind kind) {
  return kind == StimulusKind::real ? "real" : "synthetic";
}

StimulusKind parse_kind(const std::string& text) {
  if (text == "real") return StimulusKind::real;
  if (text == "synthetic") return StimulusKind::synthetic;
  throw InvalidArgument("expected 'real' or 'synthetic', got '" + text + "'");
}

void validate(const Stimulus& stimulus) {
  if (stimulus.id.empty()) throw InvalidArgument("stimulus id is empty");
  if (!std::filesystem::is_regular_file(stimulus.image_path)) {
    throw InvalidArgument("stimulus '" + stimulus.id + "': missing image " + stimulus.image_path.string());
  }
  read_image(stimulus.image_path);
}

const Stimulus& find_stimulus(std::span<const Stimulus> pool, const std::string& id) {
  for (const auto& s : pool) {
    if (s.id == id) return s;
  }
  throw InvalidArgument("unknown stimulus '" + id + "'");
}

namespace {

std::uint64_t pool_fingerprint(std::span<const Stimulus> pool) {
  std::uint64_t h = 0x243F6A8885A308D3ULL;
  for (const auto& s : pool) {
    for (unsigned char c : s.id) h = CounterRng::mix64(h ^ c);
    h = CounterRng::mix64(h ^ (s.kind == StimulusKind::real ? 0x52 : 0x53));
  }
  return h;
}

template <typename T>
void shuffle(std::vector<T>& items, CounterRng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[std::size_t(rng.below(i))]);
  }
}

}  // namespace

TrialPlan plan_trials(std::span<const Stimulus> pool, std::size_t n, std::uint64_t seed,
                      KindBalance balance) {
  if (n < 1) throw InvalidArgument("trial count must be >= 1");
  std::vector<const Stimulus*> reals, synthetics;
  std::set<std::string> ids;
  for (const auto& s : pool) {
    if (!ids.insert(s.id).second) throw InvalidArgument("duplicate stimulus id '" + s.id + "'");
    (s.kind == StimulusKind::real ? reals : synthetics).push_back(&s);
  }
  if (reals.empty() || synthetics.empty()) {
    throw InvalidArgument("stimulus pool needs at least one real and one synthetic stimulus");
  }

  const std::uint64_t fingerprint = pool_fingerprint(pool);
  CounterRng rng(CounterRng::stream_key(seed, n, fingerprint, std::uint64_t(balance)));

  std::vector<StimulusKind> kinds;
  kinds.reserve(n);
  if (balance == KindBalance::balanced) {
    std::size_t n_real = n / 2;
    if (n % 2 == 1) n_real += std::size_t(rng.below(2));
    kinds.assign(n_real, StimulusKind::real);
    kinds.resize(n, StimulusKind::synthetic);
    shuffle(kinds, rng);
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      kinds.push_back(rng.below(2) == 0 ? StimulusKind::real : StimulusKind::synthetic);
    }
  }

  TrialPlan plan;
  plan.seed = seed;
  plan.n = n;
  char id[32];
  std::snprintf(id, sizeof id, "gtt-%016llx",
                static_cast<unsigned long long>(CounterRng::stream_key(seed, n, fingerprint, 0x5E55)));
  plan.session_id = id;
  plan.trials.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& group = kinds[i] == StimulusKind::real ? reals : synthetics;
    plan.trials.push_back({i, group[std::size_t(rng.below(group.size()))]->id});
  }
  return plan;
}

bool SessionRecord::answered(std::size_t trial_index) const {
  return std::any_of(responses.begin(), responses.end(),
                     [&](const Response& r) { return r.trial_index == trial_index; });
}

SessionRecord open_session(TrialPlan plan) {
  if (plan.n < 1 || plan.trials.size() != plan.n) throw InvalidArgument("plan must hold n >= 1 trials");
  SessionRecord s;
  s.plan = std::move(plan);
  return s;
}

SessionRecord record_response(SessionRecord session, std::size_t trial_index, Choice choice,
                              std::int64_t timestamp_ms) {
  if (session.status != SessionStatus::open) throw StateError("session " + session.plan.session_id + " is closed");
  if (trial_index >= session.plan.n) {
    throw InvalidArgument("trial index " + std::to_string(trial_index) + " out of range");
  }
  if (session.answered(trial_index)) {
    throw ConflictError("trial " + std::to_string(trial_index) + " already answered");
  }
  session.responses.push_back({trial_index, choice, timestamp_ms});
  if (session.responses.size() == session.plan.n) session.status = SessionStatus::complete;
  return session;
}

namespace {

// C(n, j) when it is an integer below 2^53, so that small cases stay exact.
std::optional<double> exact_choose(std::uint64_t n, std::uint64_t j) {
  j = std::min(j, n - j);
  unsigned __int128 c = 1;
  for (std::uint64_t i = 0; i < j; ++i) {
    c = c * (n - i) / (i + 1);
    if (c >= (unsigned __int128)1 << 53) return std::nullopt;
  }
  return double(std::uint64_t(c));
}

// P(K = j), evaluated directly. Used only for the first term of a tail sum.
double binomial_pmf(std::uint64_t n, std::uint64_t j, double p) {
  if (j == n) return std::pow(p, double(n));
  if (j == 0) return std::pow(1.0 - p, double(n));
  if (const auto c = exact_choose(n, j)) return *c * std::pow(p, double(j)) * std::pow(1.0 - p, double(n - j));
  const double log_pmf = std::lgamma(double(n) + 1.0) - std::lgamma(double(j) + 1.0) -
                         std::lgamma(double(n - j) + 1.0) + double(j) * std::log(p) +
                         double(n - j) * std::log1p(-p);
  return std::exp(log_pmf);
}

}  // namespace

double binomial_p_value(std::uint64_t n, std::uint64_t k, double chance) {
  if (n < 1) throw InvalidArgument("binomial test needs n >= 1");
  if (k > n) throw InvalidArgument("k must not exceed n");
  if (!(chance > 0.0 && chance < 1.0)) throw InvalidArgument("chance must lie in (0, 1)");
  if (k == 0) return 1.0;

  const double p = chance;
  const double q = 1.0 - chance;
  const auto mode = std::uint64_t(std::floor(double(n + 1) * p));

  // Sum away from the mode so terms shrink monotonically and underflow only
  // drops negligible mass.
  if (k > mode) {
    double term = binomial_pmf(n, k, p);
    double sum = term;
    for (std::uint64_t j = k; j < n && term > 0.0; ++j) {
      term = term * double(n - j) / double(j + 1);
      if (p != q) term *= p / q;
      sum += term;
    }
    return std::clamp(sum, 0.0, 1.0);
  }
  double term = binomial_pmf(n, k - 1, p);
  double lower = term;
  for (std::uint64_t j = k - 1; j > 0 && term > 0.0; --j) {
    term = term * double(j) / double(n - j + 1);
    if (p != q) term *= q / p;
    lower += term;
  }
  return std::clamp(1.0 - lower, 0.0, 1.0);
}

std::uint64_t critical_k(std::uint64_t n, double alpha, double chance) {
  std::uint64_t lo = 0, hi = n + 1;  // answer in [lo, hi]
  while (lo < hi) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (binomial_p_value(n, mid, chance) <= alpha) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

const char* to_string(Verdict v) { return v == Verdict::passed ? "PASSED" : "FAILED"; }

TestResult evaluate(const SessionRecord& session, std::span<const StimulusKind> truth_by_trial, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  if (session.status != SessionStatus::complete) {
    throw StateError("session " + session.plan.session_id + " is not complete");
  }
  if (truth_by_trial.size() != session.plan.n) throw InvalidArgument("ground truth does not match the plan");
  TestResult r;
  r.n = session.plan.n;
  r.alpha = alpha;
  for (const auto& resp : session.responses) {
    if (resp.choice == truth_by_trial[resp.trial_index]) ++r.k_correct;
  }
  r.p_value = binomial_p_value(r.n, r.k_correct);
  r.verdict = r.p_value > alpha ? Verdict::passed : Verdict::failed;
  return r;
}

TestResult evaluate(const SessionRecord& session, std::span<const Stimulus> pool, double alpha) {
  std::vector<StimulusKind> truth;
  truth.reserve(session.plan.trials.size());
  for (const auto& t : session.plan.trials) truth.push_back(find_stimulus(pool, t.stimulus_id).kind);
  return evaluate(session, truth, alpha);
}

SessionRecord simulate_subject(const SimulatedObserver& observer, const TrialPlan& plan,
                               std::span<const Stimulus> pool, std::int64_t start_ms) {
  SessionRecord session = open_session(plan);
  if (const auto* acc = std::get_if<AccuracyObserver>(&observer.mode)) {
    const double q = acc->per_trial_accuracy;
    if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("observer accuracy must lie in [0, 1]");
    for (const auto& trial : plan.trials) {
      const StimulusKind truth = find_stimulus(pool, trial.stimulus_id).kind;
      CounterRng rng(CounterRng::stream_key(observer.seed, trial.trial_index, 0x0B5E7FE5ULL));
      const bool correct = rng.uniform() < q;
      const Choice choice = correct ? truth : (truth == StimulusKind::real ? StimulusKind::synthetic : StimulusKind::real);
      session = record_response(std::move(session), trial.trial_index, choice,
                                start_ms + std::int64_t(trial.trial_index));
    }
    return session;
  }

  const double tau = std::get<ThresholdObserver>(observer.mode).difference_threshold;
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw InvalidArgument("difference threshold must be >= 0");
  std::map<std::string, Choice> judged;
  for (const auto& trial : plan.trials) {
    auto it = judged.find(trial.stimulus_id);
    if (it == judged.end()) {
      const Stimulus& s = find_stimulus(pool, trial.stimulus_id);
      if (!s.paired_reference) {
        throw InvalidArgument("stimulus '" + s.id + "' has no paired reference image for the threshold observer");
      }
      const double diff = mean_abs_difference(read_image(s.image_path), read_image(*s.paired_reference));
      it = judged.emplace(s.id, diff > tau ? StimulusKind::synthetic : StimulusKind::real).first;
    }
    session = record_response(std::move(session), trial.trial_index, it->second,
                              start_ms + std::int64_t(trial.trial_index));
  }
  return session;
}

}  // namespace gtt
