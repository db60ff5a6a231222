#include <doctest.h>

#include <cmath>

#include "atd/aging.hpp"
#include "atd/netlist.hpp"
#include "helpers.hpp"

using namespace atd;

TEST_CASE("aging factor hand values") {
  const AgingParams p;
  CHECK(aging_factor(p, 0) == 1.0);
  const double d100 = (1.0 / 0.95) * (0.7 / 0.65) * (0.7 / 0.65);
  const double d50 = (1.0 / 0.975) * (0.7 / 0.675) * (0.7 / 0.675);
  CHECK(std::abs(aging_factor(p, 100) / d100 - 1.0) < 1e-12);
  CHECK(std::abs(aging_factor(p, 50) / d50 - 1.0) < 1e-12);
  CHECK(aging_factor(p, 100) == doctest::Approx(1.2209).epsilon(1e-4));
  CHECK(aging_factor(p, 50) == doctest::Approx(1.1030).epsilon(1e-4));
  for (std::size_t i = 1; i < kDutyGrid.size(); ++i) CHECK(aging_factor(p, kDutyGrid[i]) > aging_factor(p, kDutyGrid[i - 1]));
  CHECK_THROWS_AS(aging_factor(p, 55), std::invalid_argument);
  AgingParams bad;
  bad.dvth_max = 0.8;
  CHECK_THROWS_AS(aging_factor(bad, 100), std::invalid_argument);
}

TEST_CASE("power-law threshold shift reduces to linear at exponent 1") {
  AgingParams lin, pw;
  pw.model = DvthModel::Power;
  pw.power_exponent = 1.0;
  for (int d : kDutyGrid) CHECK(aging_factor(pw, d) == aging_factor(lin, d));
  pw.power_exponent = 0.5;
  CHECK(aging_factor(pw, 10) > aging_factor(lin, 10));
  CHECK(aging_factor(pw, 100) == aging_factor(lin, 100));
}

TEST_CASE("annotate follows the delay formula") {
  const auto n = parse_netlist(
      "module f\ninput a\noutput y z w v\ngate g0 INV out=x in=a\ngate g1 BUF out=y in=x\ngate g2 BUF out=z in=x\n"
      "gate g3 INV out=w in=a\ngate g4 BUF out=v in=x\nend\n");
  const auto lib = BaseDelayLib::defaults();
  const AgingParams p;
  const auto a0 = annotate(n, lib, p, 0, std::nullopt);
  CHECK(a0.delay[*n.find_cell("g0")] == 8.0 + 3.0 * 2);  // fanout 3
  CHECK(a0.delay[*n.find_cell("g3")] == 8.0);
  const auto a100 = annotate(n, lib, p, 100, std::nullopt);
  CHECK(a100.delay[*n.find_cell("g3")] == doctest::Approx(8.0 * 1.2209).epsilon(1e-4));
  CHECK(a100.delay[*n.find_cell("g3")] == doctest::Approx(9.767).epsilon(1e-4));
}

TEST_CASE("variation stays within the truncation band and is seeded") {
  const auto n = generate(BenchSpec{BenchKind::MultShiftAdd, 8});
  const auto lib = BaseDelayLib::defaults();
  const auto base = annotate(n, lib, AgingParams{}, 0, std::nullopt);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto v = VariationSpec::for_instance(seed);
    const auto a = annotate(n, lib, AgingParams{}, 0, v);
    const auto b = annotate(n, lib, AgingParams{}, 0, v);
    CHECK(a.delay == b.delay);
    CHECK(a.variation_seed == seed);
    for (std::size_t i = 0; i < a.delay.size(); ++i) {
      CHECK(a.delay[i] >= base.delay[i] * 0.95 * 0.88 - 1e-9);
      CHECK(a.delay[i] <= base.delay[i] * 1.05 * 1.12 + 1e-9);
    }
  }
  CHECK(annotate(n, lib, AgingParams{}, 0, VariationSpec::for_instance(1)).delay !=
        annotate(n, lib, AgingParams{}, 0, VariationSpec::for_instance(2)).delay);
}
