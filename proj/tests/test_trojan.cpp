#include <doctest.h>

#include <map>

#include "atd/bench.hpp"
#include "atd/simulator.hpp"
#include "atd/sta.hpp"
#include "atd/trojan.hpp"
#include "helpers.hpp"

using namespace atd;

namespace {

TrojanSpec spec(Archetype a, const char* trig, const char* key, int rank, int taps, int len = 8) {
  TrojanSpec s;
  s.archetype = a;
  if (*trig) s.trigger_const = BitVec::from_bits(trig);
  s.key_bits = BitVec::from_bits(key);
  s.path_rank = rank;
  s.tap_count = taps;
  s.lfsr_len = len;
  return s;
}

std::map<std::string, std::uint32_t> fanout_by_name(const Netlist& n) {
  std::map<std::string, std::uint32_t> m;
  const auto f = fanout_map(n);
  for (NetId i = 0; i < n.net_count(); ++i) m[n.net_name(i)] = f[i];
  return m;
}

}  // namespace

TEST_CASE("TRIG_LEAK on the 4-bit multiplier is dormant and leaks on trigger") {
  const auto clean = generate(BenchSpec{BenchKind::MultShiftAdd, 4});
  const auto s = spec(Archetype::TrigLeak, "1011", "0110", 1, 2);
  const auto ins = insert_trojan(clean, s, testing::nominal(clean));
  REQUIRE(ins.leak_outputs.size() == 4);
  const Simulator sc(clean), st(ins.netlist);
  std::size_t fired = 0;
  for (std::uint64_t a = 0; a < 16; ++a) {
    for (std::uint64_t b = 0; b < 16; ++b) {
      const auto x = testing::mult_input(4, a, b);
      const auto yc = sc.evaluate(x, 5), yt = st.evaluate(x, 5);
      CHECK(triggers(s, x) == (a == 0b1011));
      if (a != 0b1011) {
        CHECK(yc == yt);
      } else {
        ++fired;
        for (std::size_t i = 0; i < 4; ++i) CHECK(yt.get(ins.leak_outputs[i]) == s.key_bits.get(i));
      }
    }
  }
  CHECK(fired == 16);
  // Timed golden agrees with the zero-delay one on the Trojan netlist as well.
  const auto x = testing::mult_input(4, 7, 9);
  CHECK(golden_output_timed(ins.netlist, BaseDelayLib::defaults(), AgingParams{}, x, 5) == st.evaluate(x, 5));
}

TEST_CASE("ALWAYS_LFSR keeps the function and loads each tap once") {
  const auto clean = generate(BenchSpec{BenchKind::MultShiftAdd, 4});
  const auto a = testing::nominal(clean);
  const auto s = spec(Archetype::AlwaysLfsr, "", "1010", 3, 4, 5);
  const auto ins = insert_trojan(clean, s, a);
  REQUIRE(ins.taps.size() == 4);
  CHECK_FALSE(ins.tap_shortfall);
  const auto fc = fanout_by_name(clean), ft = fanout_by_name(ins.netlist);
  for (NetId t : ins.taps) CHECK(ft.at(clean.net_name(t)) == fc.at(clean.net_name(t)) + 1);
  const Simulator sc(clean), st(ins.netlist);
  for (std::uint64_t x = 0; x < 256; ++x) {
    const auto in = BitVec::from_u64(8, x);
    CHECK(sc.evaluate(in, 5) == st.evaluate(in, 5));
  }
  CHECK(stats(ins.netlist).gate_count > stats(clean).gate_count);
  CHECK(validate(ins.netlist).empty());
  CHECK(serialize_netlist(parse_netlist(serialize_netlist(ins.netlist))) == serialize_netlist(ins.netlist));
}

TEST_CASE("dormancy holds for every archetype on the SPN") {
  BenchSpec b{BenchKind::SpnCipher, 16, 4};
  const auto clean = generate(b);
  const auto a = testing::nominal(clean);
  const Simulator sc(clean);
  const auto ps = gen_patterns(16, 10000, 5);
  for (auto arch : {Archetype::TrigLeak, Archetype::AlwaysLfsr, Archetype::TrigLfsr}) {
    const auto s = spec(arch, arch == Archetype::AlwaysLfsr ? "" : "1100101011110000", "101", 10, 3, 4);
    const auto ins = insert_trojan(clean, s, a);
    const Simulator st(ins.netlist);
    std::size_t mismatches = 0;
    for (const auto& x : ps.inputs) {
      if (triggers(s, x)) continue;
      mismatches += sc.evaluate(x, 5) != st.evaluate(x, 5);
    }
    CHECK(mismatches == 0);
    CHECK(max_arrival(ins.netlist, testing::nominal(ins.netlist)) >= max_arrival(clean, a));
  }
}

TEST_CASE("tap selection") {
  const auto n = generate(BenchSpec{BenchKind::MultShiftAdd, 8});
  const auto a = testing::nominal(n);
  const auto cp = critical_path(n, a);
  const auto t1 = pick_tap_nets(n, a, 1, 3);
  REQUIRE(t1.nets.size() == 3);
  for (NetId t : t1.nets) {
    bool on_path = false;
    for (auto g : cp.gates) on_path |= n.cells()[g].output == t;
    CHECK(on_path);
    CHECK(t != n.cells()[cp.gates.back()].output);  // internal, not the endpoint
  }
  // Nearest the midpoint first.
  const auto mid = n.cells()[cp.gates[(cp.gates.size() - 2) / 2]].output;
  const auto mid2 = n.cells()[cp.gates[(cp.gates.size() - 1) / 2]].output;
  CHECK((t1.nets.front() == mid || t1.nets.front() == mid2));
  CHECK(pick_tap_nets(n, a, 1, 3).nets == t1.nets);
  const auto all = pick_tap_nets(n, a, 1, 1000);
  CHECK(all.shortfall);
  CHECK(all.nets.size() == cp.gates.size() - 1);
  const auto small = generate(BenchSpec{BenchKind::MultShiftAdd, 4});
  CHECK_THROWS_AS(pick_tap_nets(small, testing::nominal(small), 100000000, 1), TrojanError);
}

TEST_CASE("area fraction") {
  auto build = [](int cells) {
    Netlist n("a");
    NetId prev = n.net("i");
    n.add_input(prev);
    for (int i = 0; i < cells; ++i) {
      const NetId o = n.net("n" + std::to_string(i));
      n.add_cell({"c" + std::to_string(i), CellKind::Buf, {prev}, o, false});
      prev = o;
    }
    return n;
  };
  CHECK(area_fraction(build(1000), build(1008)) == doctest::Approx(8.0 / 1008.0));
  CHECK(area_fraction(build(50), build(50)) == 0.0);
  CHECK_THROWS(area_fraction(build(10), build(9)));
}

TEST_CASE("shipped-size SPN LFSR leaker lands in the target area band") {
  for (int w : {16, 32}) {
    const auto clean = generate(BenchSpec{BenchKind::SpnCipher, w, 4});
    const auto ins = insert_trojan(clean, spec(Archetype::AlwaysLfsr, "", "1", 25, 1, 3), testing::nominal(clean));
    const double f = area_fraction(clean, ins.netlist);
    CHECK(f >= 0.002);
    CHECK(f <= 0.05);
  }
}

TEST_CASE("spec validation") {
  const auto n = generate(BenchSpec{BenchKind::MultShiftAdd, 4});
  const auto a = testing::nominal(n);
  CHECK_THROWS_AS(insert_trojan(n, spec(Archetype::TrigLeak, "101010101", "1", 1, 1), a), TrojanError);
  CHECK_THROWS_AS(insert_trojan(n, spec(Archetype::TrigLeak, "", "1", 1, 1), a), TrojanError);
  CHECK_THROWS_AS(insert_trojan(n, spec(Archetype::AlwaysLfsr, "", "1", 1, 1, 40), a), TrojanError);
  auto aged = annotate(n, BaseDelayLib::defaults(), AgingParams{}, 50, std::nullopt);
  CHECK_THROWS_AS(insert_trojan(n, spec(Archetype::AlwaysLfsr, "", "1", 1, 1), aged), TrojanError);
  CHECK_THROWS_AS(archetype_from_string("NOPE"), TrojanError);
  const auto s = spec(Archetype::TrigLfsr, "0011", "1100", 4, 2, 6);
  const auto back = nlohmann::json(s).get<TrojanSpec>();
  CHECK(back.trigger_const == s.trigger_const);
  CHECK(back.key_bits == s.key_bits);
  CHECK(back.lfsr_len == 6);
  CHECK(back.archetype == Archetype::TrigLfsr);
}
