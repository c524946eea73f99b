#include "kcm/verify.hpp"

#include <doctest.h>

#include <algorithm>

using namespace kcm;

namespace {

const CheckResult* find(const std::vector<CheckResult>& results, const std::string& prefix) {
  const auto it = std::find_if(results.begin(), results.end(),
                               [&](const CheckResult& r) { return r.name.rfind(prefix, 0) == 0; });
  return it == results.end() ? nullptr : &*it;
}

}  // namespace

TEST_SUITE("verify") {
  TEST_CASE("exact identities pass for m = 2, 3, 4") {
    const auto results = run_exact_identities(VerifyOptions{});
    double seconds = 0.0;
    for (const auto& r : results) {
      INFO(r.name << ": " << r.detail);
      CHECK(r.status == CheckStatus::pass);
      seconds += r.seconds;
    }
    MESSAGE("exact identities took " << seconds << " s");
    CHECK(results.size() > 10);
    CHECK(all_passed(results));
  }

  TEST_CASE("orders beyond the enumeration caps are skipped, not failed") {
    VerifyOptions options;
    options.m_list = {5};
    const auto results = run_exact_identities(options);
    const CheckResult* gradient = find(results, "gradient condition m=5");
    REQUIRE(gradient != nullptr);
    CHECK(gradient->status == CheckStatus::skipped);
    CHECK(all_passed(results));
  }

  TEST_CASE("corrupted rates fail the stationarity check") {
    VerifyOptions options;
    options.m_list = {2};
    options.corrupt_rates = true;
    const auto results = run_exact_identities(options);
    const CheckResult* stationarity = find(results, "stationarity");
    REQUIRE(stationarity != nullptr);
    CHECK(stationarity->status == CheckStatus::fail);
    CHECK_FALSE(all_passed(results));
  }

  TEST_CASE("bad-box bound") {
    const auto results = run_bad_box_checks();
    CHECK(results.size() == 2);
    CHECK(all_passed(results));
  }

  TEST_CASE("path trials") {
    for (int m : {2, 3}) {
      const PathStatistics stats = run_path_trials(m, 2000, 7);
      INFO(stats.first_violation);
      CHECK(stats.trials == 2000);
      CHECK(stats.violations == 0);
      CHECK(stats.bfs_windows > 0);
      CHECK(stats.bfs_failures == 0);
      CHECK(stats.fitted_constant <= 3.0 * (m + 1));
      MESSAGE("m=" << m << " fitted C " << stats.fitted_constant << ", BFS windows " << stats.bfs_windows);
    }
  }
}
