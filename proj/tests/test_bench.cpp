#include <doctest.h>

#include <set>

#include "atd/bench.hpp"
#include "atd/simulator.hpp"
#include "helpers.hpp"

using namespace atd;

TEST_CASE("multiplier W=4 matches integer multiplication exhaustively") {
  const auto n = generate(BenchSpec{BenchKind::MultShiftAdd, 4});
  REQUIRE(n.read_cycle() == 5);
  const Simulator sim(n);
  for (std::uint64_t a = 0; a < 16; ++a) {
    for (std::uint64_t b = 0; b < 16; ++b) {
      CHECK(sim.evaluate(testing::mult_input(4, a, b), 5).to_u64() == a * b);
    }
  }
  CHECK(simulate(n, testing::nominal(n), testing::mult_input(4, 3, 5), SimConfig{1000.0, 5}).to_u64() == 15);
}

TEST_CASE("multiplier W=8 matches the oracle on random operands") {
  const auto n = generate(BenchSpec{BenchKind::MultShiftAdd, 8});
  const Simulator sim(n);
  Rng rng(3);
  for (int t = 0; t < 1000; ++t) {
    const auto a = rng.below(256), b = rng.below(256);
    CHECK(sim.evaluate(testing::mult_input(8, a, b), 9).to_u64() == a * b);
  }
}

TEST_CASE("multiplier W=8 size audit") {
  const auto n = generate(BenchSpec{BenchKind::MultShiftAdd, 8});
  const auto st = stats(n);
  CHECK(st.dff_count >= 24);
  CHECK(st.gate_count >= 150);
  CHECK(st.gate_count <= 600);
  CHECK(validate(n).empty());
  CHECK_THROWS(generate(BenchSpec{BenchKind::MultShiftAdd, 3}));
  CHECK_THROWS(generate(BenchSpec{BenchKind::MultShiftAdd, 65}));
}

TEST_CASE("one SPN round with zero key and identity permutation is the S-box layer") {
  BenchSpec s{BenchKind::SpnCipher, 16, 1};
  s.key = BitVec(16);
  s.identity_permutation = true;
  const auto n = generate(s);
  const Simulator sim(n);
  for (std::uint64_t x = 0; x < 65536; x += 97) {
    std::uint64_t want = 0;
    for (int nib = 0; nib < 4; ++nib) want |= std::uint64_t{kSbox[(x >> (4 * nib)) & 0xF]} << (4 * nib);
    CHECK(sim.evaluate(BitVec::from_u64(16, x), *n.read_cycle()).to_u64() == want);
  }
}

TEST_CASE("SPN netlist equals its software model") {
  for (int w : {16, 32}) {
    BenchSpec s{BenchKind::SpnCipher, w, 4};
    s.key = BitVec::from_hex("1234abcd", 32);
    const auto n = generate(s);
    const Simulator sim(n);
    const auto ps = gen_patterns(w, 500, 9);
    for (const auto& x : ps.inputs) CHECK(sim.evaluate(x, *n.read_cycle()) == spn_reference(s, x));
  }
}

TEST_CASE("SPN avalanche after three rounds") {
  BenchSpec s{BenchKind::SpnCipher, 16, 3};
  Rng rng(17);
  for (int t = 0; t < 100; ++t) {
    const auto x = BitVec::from_u64(16, rng.below(65536));
    auto y = x;
    const auto bit = rng.below(16);
    y.set(bit, !y.get(bit));
    CHECK((spn_reference(s, x) ^ spn_reference(s, y)).popcount() >= 2);
  }
  const auto x = BitVec::from_u64(16, 0x1234);
  CHECK(spn_reference(s, x) == spn_reference(s, x));
}

TEST_CASE("pattern sets") {
  const auto p4 = gen_patterns(4, 0, 1);
  std::set<std::uint64_t> got;
  for (const auto& v : p4.inputs) got.insert(v.to_u64());
  CHECK(got == std::set<std::uint64_t>{0x0, 0xF, 0x1, 0x2, 0x4, 0x8, 0xE, 0xD, 0xB, 0x7, 0x5, 0xA});
  CHECK(p4.inputs.size() == 12);

  const auto a = gen_patterns(32, 4096, 42), b = gen_patterns(32, 4096, 42);
  CHECK(a.inputs == b.inputs);
  CHECK(a.inputs.size() <= 4096 + 68);
  CHECK(a.inputs.size() >= 4090);
  std::set<BitVec> uniq(a.inputs.begin(), a.inputs.end());
  CHECK(uniq.size() == a.inputs.size());
  std::size_t structured = 0;
  for (auto o : a.origin) structured += o == PatternOrigin::Structured;
  CHECK(structured == 68);
}
