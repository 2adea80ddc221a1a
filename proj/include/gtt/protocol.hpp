#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace gtt {

enum class StimulusKind { real, synthetic };

/// A subject's answer uses the same two labels as the stimuli.
using Choice = StimulusKind;

const char* to_string(StimulusKind kind);
StimulusKind parse_kind(const std::string& text);

struct Stimulus {
  std::string id;
  StimulusKind kind = StimulusKind::real;
  std::filesystem::path image_path;
  std::string provenance;
  /// Comparison image for threshold-mode simulated observers.
  std::optional<std::filesystem::path> paired_reference;
};

/// Checks that the image file exists and decodes.
void validate(const Stimulus& stimulus);

const Stimulus& find_stimulus(std::span<const Stimulus> pool, const std::string& id);

struct PlannedTrial {
  std::size_t trial_index = 0;
  std::string stimulus_id;

  friend bool operator==(const PlannedTrial&, const PlannedTrial&) = default;
};

struct TrialPlan {
  std::string session_id;
  std::vector<PlannedTrial> trials;
  std::uint64_t seed = 0;
  std::size_t n = 0;

  friend bool operator==(const TrialPlan&, const TrialPlan&) = default;
};

/// `balanced` draws real/synthetic counts within one of each other;
/// `bernoulli` draws each trial's kind independently with probability 1/2.
enum class KindBalance { balanced, bernoulli };

/// Seeded plan. Same (pool, n, seed, balance) always yields the same plan,
/// session id included.
TrialPlan plan_trials(std::span<const Stimulus> pool, std::size_t n, std::uint64_t seed,
                      KindBalance balance = KindBalance::balanced);

enum class SessionStatus { open, complete };

struct Response {
  std::size_t trial_index = 0;
  Choice choice = Choice::real;
  std::int64_t timestamp_ms = 0;  // Unix epoch milliseconds

  friend bool operator==(const Response&, const Response&) = default;
};

struct SessionRecord {
  TrialPlan plan;
  std::vector<Response> responses;  // in answering order
  SessionStatus status = SessionStatus::open;

  bool answered(std::size_t trial_index) const;
  friend bool operator==(const SessionRecord&, const SessionRecord&) = default;
};

SessionRecord open_session(TrialPlan plan);

/// Appends a response. Throws StateError on a complete session,
/// InvalidArgument on an out-of-range index and ConflictError on a repeat.
SessionRecord record_response(SessionRecord session, std::size_t trial_index, Choice choice,
                              std::int64_t timestamp_ms);

/// One-sided exact tail P(K >= k) for K ~ Binomial(n, chance).
double binomial_p_value(std::uint64_t n, std::uint64_t k, double chance = 0.5);

/// Smallest k with binomial_p_value(n, k) <= alpha, or n + 1 when none.
std::uint64_t critical_k(std::uint64_t n, double alpha, double chance = 0.5);

enum class Verdict { passed, failed };

const char* to_string(Verdict v);

/// Printed next to every PASSED verdict.
inline constexpr const char* kPassCaveat =
    "PASSED reports absence of evidence of discrimination at alpha, not proof that the "
    "images are indistinguishable.";

inline constexpr double kDefaultAlpha = 0.05;
inline constexpr std::size_t kDefaultTrialCount = 64;

struct TestResult {
  std::uint64_t n = 0;
  std::uint64_t k_correct = 0;
  double p_value = 1.0;
  double alpha = kDefaultAlpha;
  Verdict verdict = Verdict::passed;

  friend bool operator==(const TestResult&, const TestResult&) = default;
};

/// Verdict is PASSED iff p > alpha: the subject did not beat chance.
TestResult evaluate(const SessionRecord& session, std::span<const Stimulus> pool,
                    double alpha = kDefaultAlpha);

/// Same, from the per-trial ground truth directly.
TestResult evaluate(const SessionRecord& session, std::span<const StimulusKind> truth_by_trial,
                    double alpha);

struct AccuracyObserver {
  double per_trial_accuracy = 0.5;
};

/// Answers "synthetic" when the mean absolute 8-bit difference (scaled to
/// [0,1]) between a stimulus and its paired reference exceeds the threshold.
struct ThresholdObserver {
  double difference_threshold = 0.15;
};

struct SimulatedObserver {
  std::variant<AccuracyObserver, ThresholdObserver> mode;
  std::uint64_t seed = 0;
};

/// Answers every trial of `plan`. Timestamps are start_ms + trial_index so
/// runs are reproducible.
SessionRecord simulate_subject(const SimulatedObserver& observer, const TrialPlan& plan,
                               std::span<const Stimulus> pool, std::int64_t start_ms = 0);

}  // namespace gtt
