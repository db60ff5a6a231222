#include <doctest.h>

#include "atd/sta.hpp"
#include "helpers.hpp"

using namespace atd;

TEST_CASE("chain and diamond") {
  const auto chain = parse_netlist("module c\ninput a\noutput y\ngate g0 INV out=n in=a\ngate g1 INV out=y in=n\nend\n");
  CHECK(max_arrival(chain, testing::nominal(chain)) == 16.0);
  CHECK(critical_path(chain, testing::nominal(chain)).delay == 16.0);

  const auto d = parse_netlist(
      "module d\ninput a\noutput y\ngate s BUF out=p in=a\ngate l BUF out=q in=a\ngate m AND2 out=y in=p,q\nend\n");
  DelayAnnotation a = testing::uniform_delays(d, 0.0);
  a.delay[*d.find_cell("s")] = 20.0;
  a.delay[*d.find_cell("l")] = 30.0;
  const auto r = k_longest_paths(d, a, 2);
  REQUIRE(r.paths.size() == 2);
  CHECK(r.paths[0].delay == 30.0);
  CHECK(r.paths[1].delay == 20.0);
  CHECK_FALSE(r.shortfall);
  const auto more = k_longest_paths(d, a, 5);
  CHECK(more.paths.size() == 2);
  CHECK(more.shortfall);
}

TEST_CASE("flop launch includes clk-to-q") {
  const auto n = parse_netlist("module t\noutput q\ndff ff q=q d=d init=0\ngate g INV out=d in=q\nend\n");
  CHECK(max_arrival(n, testing::nominal(n)) == 20.0 + 3.0 + 8.0);
}

TEST_CASE("k longest paths equal brute force on random DAGs") {
  for (std::uint64_t s = 100; s < 120; ++s) {
    const auto n = testing::random_dag(s, 6, 30, 4);
    const auto a = testing::nominal(n);
    const auto all = testing::brute_force_paths(n, a);
    REQUIRE(all.size() <= 10000);
    const auto r = k_longest_paths(n, a, 50);
    REQUIRE(r.paths.size() == std::min<std::size_t>(50, all.size()));
    for (std::size_t i = 0; i < r.paths.size(); ++i) CHECK(testing::same_path(n, r.paths[i], all[i]));
    CHECK(max_arrival(n, a) == all.front().delay);
    CHECK(testing::same_path(n, critical_path(n, a), all.front()));
  }
}
