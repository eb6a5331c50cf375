#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "dosecomb/trial.hpp"

using namespace dosecomb;

TEST_CASE("outcome generation") {
  SUBCASE("point mass") {
    RngStream rng(1);
    const auto c = generate_arm_outcomes({0.0, 1.0, 0.0}, 50, rng);
    CHECK(c == std::array<int, 3>{0, 50, 0});
  }
  SUBCASE("empty") {
    RngStream rng(1);
    const auto c = generate_arm_outcomes({0.1, 0.8, 0.1}, 0, rng);
    CHECK(c == std::array<int, 3>{0, 0, 0});
  }
  SUBCASE("large sample moments") {
    RngStream rng(42);
    const ArmTruth t{0.007, 0.93, 0.063};
    const int n = 100000;
    const auto c = generate_arm_outcomes(t, n, rng);
    CHECK(c[0] + c[1] + c[2] == n);
    const double ps[3] = {t.p_under, t.p_adequate, t.p_over};
    for (int k = 0; k < 3; ++k) {
      const double sd = std::sqrt(n * ps[k] * (1.0 - ps[k]));
      CHECK(std::abs(c[k] - n * ps[k]) < 4.0 * sd);
    }
  }
  SUBCASE("comparator binomial") {
    RngStream rng(9);
    CHECK(generate_comparator_outcomes(1.0, 30, rng) == 30);
    CHECK(generate_comparator_outcomes(0.0, 30, rng) == 0);
    const int s = generate_comparator_outcomes(0.97, 100000, rng);
    CHECK(std::abs(s - 97000) < 4.0 * std::sqrt(100000 * 0.97 * 0.03));
  }
}

TEST_CASE("optimal arm selection") {
  PosteriorDraws draws;
  draws.n_arms = 3;
  auto add_draw = [&](double a, double b, double c) {
    draws.arm_probs.push_back({0.0, a, 0.0});
    draws.arm_probs.push_back({0.0, b, 0.0});
    draws.arm_probs.push_back({0.0, c, 0.0});
    draws.meta.n_draws += 1;
  };
  SUBCASE("argmax of posterior means") {
    add_draw(0.91, 0.88, 0.84);
    CHECK(select_optimal(draws) == 0);
  }
  SUBCASE("ties take the lowest index") {
    add_draw(0.9, 0.9, 0.8);
    CHECK(select_optimal(draws) == 0);
  }
  SUBCASE("means are averaged over draws") {
    add_draw(0.5, 0.9, 0.1);
    add_draw(0.5, 0.9, 0.1);
    CHECK(select_optimal(draws) == 1);
  }
}

TEST_CASE("three outcome decision") {
  CHECK(decide(0.02, 0.037, 0.608) == Decision::NonInferior);
  CHECK(decide(0.7, 0.037, 0.608) == Decision::ComparatorSuperior);
  CHECK(decide(0.3, 0.037, 0.608) == Decision::Inconclusive);
  SUBCASE("boundaries are inclusive") {
    CHECK(decide(0.037, 0.037, 0.608) == Decision::NonInferior);
    CHECK(decide(0.608, 0.037, 0.608) == Decision::ComparatorSuperior);
  }
  SUBCASE("labels") {
    CHECK(std::string(to_string(Decision::NonInferior)) == "non_inferior");
    CHECK(std::string(to_string(Decision::Inconclusive)) == "inconclusive");
    CHECK(std::string(to_string(Decision::ComparatorSuperior)) == "comparator_superior");
  }
}

TEST_CASE("interim probabilities") {
  const PriorSet priors = default_priors();
  SUBCASE("no data gives the uniform start") {
    OutcomeTable counts;
    counts.arm_counts = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    const auto r = interim_probs(counts, priors, 0.05);
    for (double v : r) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  }
  SUBCASE("dominant arm takes everything after drops") {
    OutcomeTable counts;
    counts.arm_counts = {{20, 5, 15}, {0, 120, 0}, {18, 6, 16}};
    std::vector<double> raw;
    const auto r = interim_probs(counts, priors, 0.05, &raw);
    CHECK(r[1] == doctest::Approx(1.0));
    CHECK(r[0] == 0.0);
    CHECK(r[2] == 0.0);
    CHECK(raw[1] > 0.9);
    CHECK(std::accumulate(raw.begin(), raw.end(), 0.0) == doctest::Approx(1.0));
  }
}

TEST_CASE("simulated enrolment accounting") {
  const TrialDesign design = default_design();
  const Scenario scenario = oc_scenario(1);
  RngStream rng(2024);
  const auto e = simulate_enrolment(design, scenario, rng);
  REQUIRE(static_cast<int>(e.allocations.size()) == design.schedule.n_periods());
  int total = 0;
  for (const auto& a : e.allocations) {
    total += a.period_n;
    CHECK(a.comparator_n + std::accumulate(a.arm_ns.begin(), a.arm_ns.end(), 0) ==
          a.period_n);
  }
  CHECK(total == design.schedule.total_n);
  int outcomes = e.counts.comparator_successes + e.counts.comparator_failures;
  for (int arm = 0; arm < 3; ++arm) outcomes += e.counts.arm_total(arm);
  CHECK(outcomes == design.schedule.total_n);
  REQUIRE(e.rand_history.size() == e.allocations.size());
  for (const auto& state : e.rand_history) {
    CHECK(std::accumulate(state.active_probs.begin(), state.active_probs.end(), 0.0) ==
          doctest::Approx(1.0));
  }
}

TEST_CASE("full trial simulation") {
  TrialDesign design = default_design();
  design.sampler.n_draws = 800;
  design.sampler.n_burnin = 800;

  SUBCASE("determinism across identical seeds") {
    RngStream a(77), b(77);
    const auto ra = simulate_trial(design, oc_scenario(2), a);
    const auto rb = simulate_trial(design, oc_scenario(2), b);
    CHECK(ra.decision == rb.decision);
    CHECK(ra.selected_arm == rb.selected_arm);
    CHECK(ra.y_stat == rb.y_stat);
    CHECK(ra.arm_totals() == rb.arm_totals());
    CHECK(ra.posterior_summary.difference_hpd.low ==
          rb.posterior_summary.difference_hpd.low);
  }
  SUBCASE("equal arms at the comparator level conclude non-inferiority") {
    Scenario flat;
    flat.p_comparator = 0.97;
    flat.arm_truths = {arm_truth_from_adequate(0.97, 0.2),
                       arm_truth_from_adequate(0.97, 0.1),
                       arm_truth_from_adequate(0.97, 0.01)};
    int noninferior = 0;
    for (int rep = 0; rep < 10; ++rep) {
      RngStream rng(500 + rep);
      noninferior += (simulate_trial(design, flat, rng).decision == Decision::NonInferior);
    }
    CHECK(noninferior >= 9);
  }
}
