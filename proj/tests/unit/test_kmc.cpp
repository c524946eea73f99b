#include "helpers.hpp"

#include "kcm/boxes.hpp"
#include "kcm/constraint.hpp"
#include "kcm/errors.hpp"
#include "kcm/kmc.hpp"

#include <doctest.h>

#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <sstream>

using namespace kcm;
using kcm::testing::configuration_from_bits;

namespace {

std::uint64_t to_bits(const Configuration& cfg) {
  std::uint64_t bits = 0;
  for (long x = 0; x < cfg.size(); ++x) bits |= static_cast<std::uint64_t>(cfg(x)) << x;
  return bits;
}

// States reachable from `start` by legal exchanges, by breadth-first search
// with the constraint evaluated directly.
std::set<std::uint64_t> reachable_states(const Configuration& start, int m) {
  std::set<std::uint64_t> seen{to_bits(start)};
  std::deque<Configuration> queue{start};
  while (!queue.empty()) {
    const Configuration cfg = queue.front();
    queue.pop_front();
    for (long x = 0; x < cfg.size(); ++x) {
      if (cfg(x) == cfg(x + 1) || constraint(cfg, x, m) == 0) continue;
      const Configuration next = exchange(cfg, x, x + 1);
      if (seen.insert(to_bits(next)).second) queue.push_back(next);
    }
  }
  return seen;
}

}  // namespace

TEST_SUITE("kmc-engine") {
  TEST_CASE("blocked configurations signal immediately") {
    const ModelParams params(2, Rational(1, 2), 0.0, 1.0, 4, 16);
    Configuration spaced(16);
    for (long x : {0L, 4L, 8L, 12L}) spaced.set(x, 1);
    KmcEngine engine(params, spaced, RandomStream(1, 0));
    CHECK(engine.total_rate() == 0.0);
    CHECK(engine.step(1.0) == StepStatus::blocked);
    CHECK(engine.clock() == 0.0);

    const Trajectory traj = run_from(params, spaced, 2.0, 0.5, RandomStream(1, 0));
    CHECK(traj.truncated);
    CHECK(traj.blocking_time == 0.0);
    CHECK(traj.events.empty());
    CHECK(traj.snapshots().size() == 5);
  }

  TEST_CASE("zero horizon keeps only the initial configuration") {
    const ModelParams params(2, Rational(2, 3), 1.0, 1.0, 8);
    const Trajectory traj = run(params, 0.0, 0.1, 3);
    CHECK(traj.events.empty());
    CHECK(traj.sampling_times == std::vector<double>{0.0});
    CHECK(traj.final_configuration() == traj.initial);
  }

  TEST_CASE("trajectories conserve particles, replay legally and are deterministic") {
    for (int m : {2, 3}) {
      const ModelParams params(m, Rational(2, 3), 1.0, 1.0, 8);
      const Trajectory a = run(params, 0.5, 0.1, 42, 3);
      const Trajectory b = run(params, 0.5, 0.1, 42, 3);
      const Trajectory c = run(params, 0.5, 0.1, 42, 4);
      REQUIRE(!a.events.empty());
      CHECK(a.events == b.events);
      CHECK(a.initial == b.initial);
      CHECK_FALSE(a.events == c.events);
      for (std::size_t i = 1; i < a.events.size(); ++i) REQUIRE(a.events[i].time > a.events[i - 1].time);
      CHECK(a.events.back().time <= 0.5);
      Configuration cfg = a.initial;
      CHECK_NOTHROW(replay(cfg, a.events, m));
      CHECK(cfg == a.final_configuration());
      for (const auto& snap : a.snapshots()) CHECK(snap.count() == a.initial.count());
      CHECK(a.sampling_times.size() == 6);
    }
  }

  TEST_CASE("replay rejects illegal moves") {
    Configuration cfg = Configuration::from_string("0100000000001000");
    const std::vector<Event> illegal = {Event{0.1, 1, 1}};
    CHECK_THROWS_AS(replay(cfg, illegal, 2), InvalidInput);
    Configuration pair = Configuration::from_string("0110000000000000");
    const std::vector<Event> wrong_direction = {Event{0.1, 2, -1}};
    CHECK_THROWS_AS(replay(pair, wrong_direction, 2), InvalidInput);
  }

  TEST_CASE("incremental rates agree with a from-scratch rebuild after 1e5 steps") {
    for (int m : {2, 3, 4}) {
      const ModelParams params(m, Rational(3, 5), 2.0, 1.0, 8);
      RandomStream rng(9, static_cast<std::uint64_t>(m));
      KmcEngine engine(params, sample_bernoulli(params.ring_size(), 0.6, rng), rng);
      for (int i = 0; i < 100000; ++i) {
        if (engine.step(1e300) != StepStatus::event) break;
        if (i % 20000 == 0) REQUIRE(engine.check_consistency());
      }
      CHECK(engine.check_consistency());
      CHECK(engine.event_count() > 0);
      double expected = 0.0;
      for (const auto& t : outgoing_transitions(engine.configuration(), params)) expected += t.rate;
      CHECK(engine.total_rate() == doctest::Approx(expected * params.time_scale()).epsilon(1e-12));
    }
  }

  TEST_CASE("a step only changes bonds within distance m+1") {
    const int m = 2;
    const ModelParams params(m, Rational(1, 2), 0.5, 1.0, 8);
    RandomStream rng(17, 0);
    KmcEngine engine(params, sample_bernoulli(params.ring_size(), 0.5, rng), rng);
    const long size = params.ring_size();
    for (int i = 0; i < 3000; ++i) {
      std::vector<int> before(static_cast<std::size_t>(size));
      for (long x = 0; x < size; ++x) before[static_cast<std::size_t>(x)] = engine.stored_constraint(x) * (engine.is_active(x) ? 1 : 0);
      Event e;
      REQUIRE(engine.step(1e300, &e) == StepStatus::event);
      for (long x = 0; x < size; ++x) {
        long d = std::labs(x - static_cast<long>(e.bond));
        d = std::min(d, size - d);
        if (d > m + 1) REQUIRE(before[static_cast<std::size_t>(x)] == engine.stored_constraint(x) * (engine.is_active(x) ? 1 : 0));
      }
    }
  }

  TEST_CASE("symmetric kernel: left and right jumps are equally likely") {
    const ModelParams params(2, Rational(2, 3), 0.0, 1.0, 16);
    RandomStream rng(23, 0);
    KmcEngine engine(params, sample_bernoulli(params.ring_size(), 2.0 / 3.0, rng), rng);
    long right = 0;
    long total = 0;
    Event e;
    while (total < 200000 && engine.step(1e300, &e) == StepStatus::event) {
      right += e.direction == 1 ? 1 : 0;
      ++total;
    }
    // R - L is a martingale with unit increments, so Var(R - L) = N.
    const double chi_square = std::pow(static_cast<double>(2 * right - total), 2) / static_cast<double>(total);
    CHECK(chi_square < 16.0);
  }

  TEST_CASE("b = 0 generator is reversible, b != 0 generator leaves nu_rho invariant (exact, L = 12)") {
    for (double b : {0.0, 0.25}) {
      const ModelParams params(2, Rational(1, 2), b, 1.0, 1, 12);
      std::map<std::pair<std::uint64_t, std::uint64_t>, double> rate;
      std::map<std::uint64_t, double> out_rate;
      std::map<std::uint64_t, double> in_rate;
      for (std::uint64_t bits = 0; bits < (1ULL << 12); ++bits) {
        const Configuration cfg = configuration_from_bits(bits, 12);
        for (const auto& t : outgoing_transitions(cfg, params)) {
          const std::uint64_t to = to_bits(exchange(cfg, t.bond, t.bond + 1));
          rate[{bits, to}] += t.rate;
          out_rate[bits] += t.rate;
          in_rate[to] += t.rate;
        }
      }
      // nu_rho is constant on each particle-number sector, so the checks reduce to rate identities.
      if (b == 0.0) {
        for (const auto& [key, r] : rate) {
          const auto back = rate.find({key.second, key.first});
          REQUIRE(back != rate.end());
          REQUIRE(back->second == r);
        }
      }
      for (const auto& [state, r] : out_rate) REQUIRE(in_rate[state] == doctest::Approx(r).epsilon(1e-14));
      for (const auto& [state, r] : in_rate) REQUIRE(out_rate.count(state) == 1);
    }
  }

  TEST_CASE("a single mobile pair explores exactly its reachable class") {
    const ModelParams params(2, Rational(1, 2), 0.0, 1.0, 1, 12);
    const Configuration start = Configuration::from_string("011000000000");
    const std::set<std::uint64_t> oracle = reachable_states(start, 2);
    // Translates of "11" and of "101".
    CHECK(oracle.size() == 24);
    KmcEngine engine(params, start, RandomStream(5, 0));
    std::set<std::uint64_t> visited{to_bits(start)};
    for (int i = 0; i < 20000; ++i) {
      REQUIRE(engine.step(1e300) == StepStatus::event);
      const std::uint64_t bits = to_bits(engine.configuration());
      REQUIRE(oracle.count(bits) == 1);
      visited.insert(bits);
    }
    CHECK(visited == oracle);
  }

  TEST_CASE("time-averaged occupation of a site converges to rho") {
    const ModelParams params(2, Rational(2, 3), 0.0, 1.0, 8, 64);
    RandomStream rng(77, 0);
    KmcEngine engine(params, sample_bernoulli(64, 2.0 / 3.0, rng), rng);
    const int batches = 20;
    const double batch_length = 10.0;
    std::vector<double> means;
    double t = 0.0;
    for (int k = 0; k < batches; ++k) {
      double occupied_time = 0.0;
      const double end = t + batch_length;
      while (true) {
        const int here = engine.configuration()(0);
        const double before = engine.clock();
        const StepStatus status = engine.step(end);
        occupied_time += here * (engine.clock() - before);
        if (status != StepStatus::event) break;
      }
      means.push_back(occupied_time / batch_length);
      t = end;
    }
    const EstimatorReport report = summarize(means);
    CHECK(std::abs(report.estimate - 2.0 / 3.0) < 4.0 * report.std_error);
  }

  TEST_CASE("binary event log and CSV snapshots") {
    const ModelParams params(2, Rational(1, 2), 1.0, 1.0, 4);
    const Trajectory traj = run(params, 0.3, 0.1, 8);
    REQUIRE(!traj.events.empty());
    std::stringstream buffer;
    write_event_log(buffer, traj.events);
    CHECK(buffer.str().size() == 13 * traj.events.size());
    CHECK(read_event_log(buffer) == traj.events);

    const std::vector<Event> one = {Event{1.0, 0x01020304U, -1}};
    std::stringstream raw;
    write_event_log(raw, one);
    const std::string bytes = raw.str();
    CHECK(static_cast<unsigned char>(bytes[6]) == 0xF0);  // 1.0 = 0x3FF0000000000000
    CHECK(static_cast<unsigned char>(bytes[7]) == 0x3F);
    CHECK(static_cast<unsigned char>(bytes[8]) == 0x04);
    CHECK(static_cast<unsigned char>(bytes[11]) == 0x01);
    CHECK(static_cast<unsigned char>(bytes[12]) == 0xFF);
    std::stringstream truncated(bytes.substr(0, 7));
    CHECK_THROWS_AS(read_event_log(truncated), InvalidInput);

    std::stringstream csv;
    write_snapshot_csv(csv, traj);
    std::string line;
    std::getline(csv, line);
    CHECK(line == "time,configuration");
    int rows = 0;
    while (std::getline(csv, line)) ++rows;
    CHECK(rows == static_cast<int>(traj.sampling_times.size()));
  }

  TEST_CASE("stationarity smoke test: z-scores within 4 at n = 64, 1000 runs") {
    const ModelParams params(2, Rational(2, 3), 1.0, 1.0, 64);
    const auto results = stationarity_smoke_test(params, 0.01, 1000, 2718);
    REQUIRE(results.size() == 4);
    for (const auto& obs : results) {
      CHECK_MESSAGE(std::abs(obs.z_score) < 4.0, obs.name << " z = " << obs.z_score);
      CHECK(obs.report.n_samples == 1000);
    }
    CHECK(results[0].exact_mean == doctest::Approx(2.0 / 3.0));
    CHECK(results[2].exact_mean == doctest::Approx(4.0 / 3.0));
  }
}
