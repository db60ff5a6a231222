#include <doctest.h>

#include <algorithm>

#include "atd/bench.hpp"
#include "atd/builder.hpp"
#include "atd/netlist.hpp"
#include "helpers.hpp"

using namespace atd;

namespace {

bool has_violation(const std::vector<Violation>& v, ViolationKind k) {
  return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.kind == k; });
}

}  // namespace

TEST_CASE("minimal inverter module parses") {
  const auto n = parse_netlist("module m\ninput a\noutput y\ngate g0 INV out=y in=a\nend\n");
  CHECK(n.cells().size() == 1);
  CHECK(n.inputs().size() == 1);
  CHECK(n.outputs().size() == 1);
  CHECK(n.name() == "m");
  CHECK(validate(n).empty());
}

TEST_CASE("parse errors name the offending identifiers") {
  SUBCASE("duplicate driver") {
    try {
      parse_netlist("module m\ninput a\noutput y\ngate g0 INV out=y in=a\ngate g1 BUF out=y in=a\nend\n");
      FAIL("expected an error");
    } catch (const NetlistError& e) {
      REQUIRE(has_violation(e.violations(), ViolationKind::DuplicateDriver));
      CHECK(std::string(e.what()).find("y") != std::string::npos);
    }
  }
  SUBCASE("self loop") {
    try {
      parse_netlist("module m\ninput a\noutput y\ngate g0 INV out=y in=y\nend\n");
      FAIL("expected an error");
    } catch (const NetlistError& e) {
      CHECK(has_violation(e.violations(), ViolationKind::CombinationalCycle));
    }
  }
  SUBCASE("unknown kind with position") {
    try {
      parse_netlist("module m\ninput a\noutput y\ngate g0 NAND3 out=y in=a,a\nend\n");
      FAIL("expected an error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 4);
      CHECK(std::string(e.what()).find("NAND3") != std::string::npos);
    }
  }
  SUBCASE("undriven net") {
    CHECK_THROWS_AS(parse_netlist("module m\ninput a\noutput y\ngate g0 AND2 out=y in=a,b\nend\n"), NetlistError);
  }
}

TEST_CASE("validate reports structural violations") {
  SUBCASE("xor loop without a flop") {
    Netlist n("loop");
    const NetId a = n.net("a"), x = n.net("x"), q = n.net("q");
    n.add_input(a);
    n.add_cell({"g0", CellKind::Xor2, {a, x}, x, false});
    n.add_cell({"ff", CellKind::Dff, {x}, q, false});
    n.add_output(q);
    CHECK(has_violation(validate(n), ViolationKind::CombinationalCycle));
  }
  SUBCASE("loop through a flop is fine") {
    Netlist n("toggle");
    const NetId q = n.net("q"), d = n.net("d");
    n.add_cell({"inv", CellKind::Inv, {q}, d, false});
    n.add_cell({"ff", CellKind::Dff, {d}, q, false});
    n.add_output(q);
    CHECK(validate(n).empty());
  }
  SUBCASE("undriven output") {
    Netlist n("u");
    const NetId a = n.net("a"), y = n.net("y"), z = n.net("z");
    n.add_input(a);
    n.add_cell({"g0", CellKind::Inv, {a}, y, false});
    n.add_output(y);
    n.add_output(z);
    CHECK(has_violation(validate(n), ViolationKind::UndrivenOutput));
  }
}

TEST_CASE("topo_order respects every edge") {
  SUBCASE("chain") {
    const auto n = parse_netlist(
        "module c\ninput a\noutput y\ngate g0 INV out=n0 in=a\ngate g1 INV out=n1 in=n0\ngate g2 INV out=y in=n1\nend\n");
    const auto t = topo_order(n);
    REQUIRE(t.size() == 3);
    CHECK(n.cells()[t[0]].id == "g0");
    CHECK(n.cells()[t[1]].id == "g1");
    CHECK(n.cells()[t[2]].id == "g2");
  }
  SUBCASE("diamond") {
    const auto n = parse_netlist(
        "module d\ninput a\noutput y\ngate g1 INV out=p in=a\ngate g2 BUF out=r in=a\ngate g3 AND2 out=y in=p,r\nend\n");
    const auto t = topo_order(n);
    REQUIRE(t.size() == 3);
    CHECK(n.cells()[t.back()].id == "g3");
  }
  SUBCASE("random DAGs") {
    for (std::uint64_t s = 1; s <= 20; ++s) {
      const auto n = testing::random_dag(s, 5, 60, 4);
      const auto t = topo_order(n);
      std::vector<std::size_t> pos(n.cells().size(), SIZE_MAX);
      for (std::size_t i = 0; i < t.size(); ++i) pos[t[i]] = i;
      const auto drv = n.driver_map();
      std::size_t comb = 0;
      for (std::size_t c = 0; c < n.cells().size(); ++c) {
        if (is_sequential(n.cells()[c].kind)) continue;
        ++comb;
        for (NetId in : n.cells()[c].inputs) {
          const auto d = drv[in];
          if (d >= 0 && !is_sequential(n.cells()[static_cast<std::size_t>(d)].kind)) {
            CHECK(pos[static_cast<std::size_t>(d)] < pos[c]);
          }
        }
      }
      CHECK(t.size() == comb);
    }
  }
}

TEST_CASE("fanout_map counts pins and output listings") {
  const auto n = parse_netlist(
      "module f\ninput a\noutput y z w\ngate g0 AND2 out=y in=a,a\ngate g1 INV out=z in=a\ngate g2 BUF out=w in=z\nend\n");
  const auto f = fanout_map(n);
  CHECK(f[*n.find_net("a")] == 3);
  CHECK(f[*n.find_net("y")] == 1);
  CHECK(f[*n.find_net("z")] == 2);
  std::size_t total = 0, pins = 0;
  for (auto v : f) total += v;
  for (const auto& c : n.cells()) pins += c.inputs.size();
  CHECK(total == pins + n.outputs().size());
}

TEST_CASE("serialize and parse is a fixed point for generated benchmarks") {
  std::vector<BenchSpec> specs;
  for (int w : {4, 8, 16}) specs.push_back(BenchSpec{BenchKind::MultShiftAdd, w});
  BenchSpec spn{BenchKind::SpnCipher, 16};
  spn.key = BitVec::from_hex("beef", 16);
  specs.push_back(spn);
  specs.push_back(BenchSpec{BenchKind::SpnCipher, 32, 3});
  for (const auto& s : specs) {
    const auto n = generate(s);
    const auto text = serialize_netlist(n);
    const auto back = parse_netlist(text);
    CHECK(serialize_netlist(back) == text);
    CHECK(back.read_cycle() == n.read_cycle());
    CHECK(validate(back).empty());
  }
}

TEST_CASE("builder reuses an existing constant") {
  auto n = parse_netlist("module k\ninput a\noutput y\nconst1 one\ngate g0 AND2 out=y in=a,one\nend\n");
  const auto before = n.cells().size();
  CircuitBuilder b(n, "t_");
  const NetId c = b.const1();
  CHECK(n.net_name(c) == "one");
  CHECK(n.cells().size() == before);
  b.const0();
  CHECK(n.cells().size() == before + 1);
}
