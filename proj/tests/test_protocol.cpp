#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "gtt/errors.hpp"
#include "gtt/image_io.hpp"
#include "gtt/protocol.hpp"
#include "oracles.hpp"

using namespace gtt;

namespace {

std::vector<Stimulus> make_pool(int real, int synthetic) {
  const auto dir = std::filesystem::temp_directory_path() / "gtt_protocol_pool";
  std::filesystem::create_directories(dir);
  Image img(2, 2);
  std::vector<Stimulus> pool;
  for (int i = 0; i < real + synthetic; ++i) {
    const bool is_real = i < real;
    const std::string id = (is_real ? "r" : "s") + std::to_string(i);
    img.pixels.setConstant(is_real ? 0.5 : 0.2);
    write_ppm(dir / (id + ".ppm"), img);
    pool.push_back({id, is_real ? StimulusKind::real : StimulusKind::synthetic, dir / (id + ".ppm"), "test", {}});
  }
  return pool;
}

StimulusKind kind_of(const std::vector<Stimulus>& pool, const PlannedTrial& t) {
  return find_stimulus(pool, t.stimulus_id).kind;
}

SessionRecord answer_all(const TrialPlan& plan, const std::vector<Stimulus>& pool, std::size_t correct) {
  SessionRecord s = open_session(plan);
  for (std::size_t i = 0; i < plan.n; ++i) {
    const StimulusKind truth = kind_of(pool, plan.trials[i]);
    const StimulusKind wrong = truth == StimulusKind::real ? StimulusKind::synthetic : StimulusKind::real;
    s = record_response(std::move(s), i, i < correct ? truth : wrong, std::int64_t(i));
  }
  return s;
}

}  // namespace

TEST_SUITE("binomial") {
  TEST_CASE("documented values") {
    CHECK(binomial_p_value(10, 10) == 0.0009765625);
    CHECK(binomial_p_value(10, 0) == 1.0);
    CHECK(binomial_p_value(8, 4) == 163.0 / 256.0);
    CHECK(binomial_p_value(8, 8) == 1.0 / 256.0);
    CHECK(binomial_p_value(100, 60) == doctest::Approx(0.028443966820490392).epsilon(1e-10));
  }

  TEST_CASE("matches brute-force enumeration for every n up to 20") {
    for (unsigned n = 1; n <= 20; ++n) {
      for (unsigned k = 0; k <= n; ++k) {
        CHECK(std::abs(binomial_p_value(n, k) - oracle::enumerated_tail(n, k)) <= 1e-12);
      }
    }
  }

  TEST_CASE("matches exact arithmetic for large n") {
    for (unsigned n : {64u, 100u, 200u, 500u, 1000u}) {
      const auto tails = oracle::exact_fair_tails(n);
      for (unsigned k = 0; k <= n; ++k) {
        const double p = binomial_p_value(n, k);
        CHECK(std::abs(p - tails[k]) <= 1e-12 + 1e-9 * tails[k]);
      }
    }
    CHECK(binomial_p_value(30, 25, 0.7) == doctest::Approx(oracle::exact_tail(30, 25, 7, 10)).epsilon(1e-10));
    CHECK(binomial_p_value(30, 3, 0.2) == doctest::Approx(oracle::exact_tail(30, 3, 1, 5)).epsilon(1e-10));
  }

  TEST_CASE("p-value never increases with k") {
    for (unsigned n : {1u, 2u, 7u, 64u, 333u, 2000u}) {
      double prev = 1.0;
      for (unsigned k = 0; k <= n; ++k) {
        const double p = binomial_p_value(n, k);
        CHECK(p <= prev);
        CHECK(p >= 0.0);
        prev = p;
      }
    }
  }

  TEST_CASE("verdict boundary agrees with exact arithmetic up to n = 200") {
    for (unsigned n = 1; n <= 200; ++n) {
      const auto tails = oracle::exact_fair_tails(n);
      for (double alpha : {0.05, 0.01}) {
        unsigned exact_k = n + 1;
        for (unsigned k = 0; k <= n; ++k) {
          if (tails[k] <= alpha) {
            exact_k = k;
            break;
          }
        }
        CHECK(critical_k(n, alpha) == exact_k);
      }
    }
  }

  TEST_CASE("invalid arguments") {
    CHECK_THROWS_AS(binomial_p_value(0, 0), InvalidArgument);
    CHECK_THROWS_AS(binomial_p_value(5, 6), InvalidArgument);
    CHECK_THROWS_AS(binomial_p_value(5, 2, 0.0), InvalidArgument);
    CHECK_THROWS_AS(binomial_p_value(5, 2, 1.0), InvalidArgument);
  }

  TEST_CASE("default trial count has power above 0.9 against 70% accuracy") {
    const auto k = critical_k(kDefaultTrialCount, kDefaultAlpha);
    const double power = oracle::exact_tail(unsigned(kDefaultTrialCount), unsigned(k), 7, 10);
    CHECK(power > 0.9);
  }
}

TEST_SUITE("plan") {
  TEST_CASE("same seed, same plan; different seed, different order") {
    const auto pool = make_pool(5, 5);
    const auto a = plan_trials(pool, 64, 7);
    const auto b = plan_trials(pool, 64, 7);
    const auto c = plan_trials(pool, 64, 8);
    CHECK(a == b);
    CHECK(a.session_id != c.session_id);
    CHECK(a.trials != c.trials);
    CHECK(a.n == 64);
    for (std::size_t i = 0; i < a.trials.size(); ++i) CHECK(a.trials[i].trial_index == i);
  }

  TEST_CASE("balanced plans split kinds within one") {
    const auto pool = make_pool(3, 7);
    for (std::size_t n : {1u, 2u, 9u, 64u, 101u}) {
      for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto plan = plan_trials(pool, n, seed);
        const auto real = std::count_if(plan.trials.begin(), plan.trials.end(),
                                        [&](const PlannedTrial& t) { return kind_of(pool, t) == StimulusKind::real; });
        CHECK(std::abs(2 * real - std::ptrdiff_t(n)) <= 1);
      }
    }
  }

  TEST_CASE("bernoulli plans use both kinds over many trials") {
    const auto pool = make_pool(2, 2);
    const auto plan = plan_trials(pool, 400, 3, KindBalance::bernoulli);
    const auto real = std::count_if(plan.trials.begin(), plan.trials.end(),
                                    [&](const PlannedTrial& t) { return kind_of(pool, t) == StimulusKind::real; });
    CHECK(real > 140);
    CHECK(real < 260);
  }

  TEST_CASE("pool and size errors") {
    CHECK_THROWS_AS(plan_trials(make_pool(2, 2), 0, 1), InvalidArgument);
    CHECK_THROWS_AS(plan_trials(make_pool(3, 0), 4, 1), InvalidArgument);
    auto dup = make_pool(1, 1);
    dup.push_back(dup[0]);
    CHECK_THROWS_AS(plan_trials(dup, 4, 1), InvalidArgument);
    auto missing = make_pool(1, 1);
    missing[0].image_path = "/nonexistent/x.ppm";
    CHECK_THROWS_AS(validate(missing[0]), InvalidArgument);
    CHECK_THROWS_AS(parse_kind("fake"), InvalidArgument);
    CHECK(parse_kind("synthetic") == StimulusKind::synthetic);
  }
}

TEST_SUITE("session") {
  TEST_CASE("responses are recorded once, and the session closes when full") {
    const auto pool = make_pool(2, 2);
    auto s = open_session(plan_trials(pool, 3, 1));
    s = record_response(std::move(s), 1, Choice::real, 10);
    CHECK(s.answered(1));
    CHECK_FALSE(s.answered(0));
    CHECK_THROWS_AS(record_response(s, 1, Choice::synthetic, 11), ConflictError);
    CHECK_THROWS_AS(record_response(s, 3, Choice::real, 11), InvalidArgument);
    CHECK_THROWS_AS(evaluate(s, pool), StateError);
    s = record_response(std::move(s), 0, Choice::real, 12);
    s = record_response(std::move(s), 2, Choice::real, 13);
    CHECK(s.status == SessionStatus::complete);
    CHECK_THROWS_AS(record_response(s, 0, Choice::real, 14), StateError);
  }

  TEST_CASE("all correct on ten trials") {
    const auto pool = make_pool(4, 4);
    const auto r = evaluate(answer_all(plan_trials(pool, 10, 5), pool, 10), pool);
    CHECK(r.k_correct == 10);
    CHECK(r.p_value == 0.0009765625);
    CHECK(r.verdict == Verdict::failed);
  }

  TEST_CASE("half correct on eight trials passes") {
    const auto pool = make_pool(4, 4);
    const auto r = evaluate(answer_all(plan_trials(pool, 8, 5), pool, 4), pool);
    CHECK(r.k_correct == 4);
    CHECK(r.p_value == 0.63671875);
    CHECK(r.verdict == Verdict::passed);
    CHECK(std::string(to_string(r.verdict)) == "PASSED");
    CHECK(std::string(kPassCaveat).find("absence of evidence") != std::string::npos);
  }

  TEST_CASE("verdict follows p > alpha exactly") {
    const auto pool = make_pool(3, 3);
    const auto plan = plan_trials(pool, 20, 11);
    for (std::size_t k = 0; k <= 20; ++k) {
      const auto r = evaluate(answer_all(plan, pool, k), pool, 0.05);
      CHECK(r.k_correct == k);
      CHECK((r.verdict == Verdict::passed) == (r.p_value > 0.05));
      CHECK((r.verdict == Verdict::failed) == (k >= critical_k(20, 0.05)));
    }
    CHECK_THROWS_AS(evaluate(answer_all(plan, pool, 3), pool, 0.0), InvalidArgument);
  }
}

TEST_SUITE("observers") {
  TEST_CASE("simulated subjects are reproducible") {
    const auto pool = make_pool(3, 3);
    const auto plan = plan_trials(pool, 64, 9);
    const SimulatedObserver obs{AccuracyObserver{0.7}, 42};
    const auto a = simulate_subject(obs, plan, pool, 1000);
    CHECK(a == simulate_subject(obs, plan, pool, 1000));
    CHECK(a.status == SessionStatus::complete);
    CHECK(a.responses.front().timestamp_ms == 1000);
    CHECK(a.responses.back().timestamp_ms == 1063);
  }

  TEST_CASE("perfect and perfectly wrong observers") {
    const auto pool = make_pool(3, 3);
    const auto plan = plan_trials(pool, 30, 2);
    CHECK(evaluate(simulate_subject({AccuracyObserver{1.0}, 1}, plan, pool), pool).k_correct == 30);
    CHECK(evaluate(simulate_subject({AccuracyObserver{0.0}, 1}, plan, pool), pool).k_correct == 0);
    CHECK_THROWS_AS(simulate_subject({AccuracyObserver{1.5}, 1}, plan, pool), InvalidArgument);
  }

  TEST_CASE("chance observer is rejected at about the nominal rate") {
    const auto pool = make_pool(3, 3);
    int failed = 0;
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
      const auto plan = plan_trials(pool, 64, seed);
      if (evaluate(simulate_subject({AccuracyObserver{0.5}, seed}, plan, pool), pool).verdict == Verdict::failed) {
        ++failed;
      }
    }
    // Exact size of the one-sided test at n = 64 is about 0.03.
    CHECK(failed <= 30);
  }

  TEST_CASE("threshold observer needs paired references") {
    auto pool = make_pool(2, 2);
    const auto plan = plan_trials(pool, 4, 1);
    CHECK_THROWS_AS(simulate_subject({ThresholdObserver{0.1}, 0}, plan, pool), InvalidArgument);
    for (auto& s : pool) s.paired_reference = pool[0].image_path;
    const auto r = evaluate(simulate_subject({ThresholdObserver{0.1}, 0}, plan, pool), pool);
    CHECK(r.k_correct == 4);
  }
}
