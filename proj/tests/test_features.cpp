#include <doctest.h>

#include <cmath>

#include "atd/features.hpp"
#include "atd/rng.hpp"

using namespace atd;

namespace {

BitVec random_word(Rng& rng, std::size_t m) {
  BitVec v(m);
  for (std::size_t i = 0; i < m; ++i) v.set(i, rng.below(2));
  return v;
}

FeatureVector loop_oracle(const BitVec& y, const BitVec& y0) {
  FeatureVector f{};
  for (std::size_t r = 0; r < y.width(); ++r) {
    if (!y0.get(r) && y.get(r)) {
      f.f1 += 1;
      f.f3 += std::ldexp(1.0, static_cast<int>(r));
    }
    if (y0.get(r) && !y.get(r)) {
      f.f2 += 1;
      f.f4 += std::ldexp(1.0, static_cast<int>(r));
    }
  }
  return f;
}

}  // namespace

TEST_CASE("bit sets") {
  const auto s = bit_sets(BitVec::from_u64(3, 0b101), 3);
  CHECK(s.ones == std::vector<std::size_t>{0, 2});
  CHECK(s.zeros == std::vector<std::size_t>{1});
  const auto z = bit_sets(BitVec(4), 4);
  CHECK(z.ones.empty());
  CHECK(z.zeros == std::vector<std::size_t>{0, 1, 2, 3});
  Rng rng(1);
  for (int t = 0; t < 1000; ++t) {
    const auto a = random_word(rng, 37);
    const auto p = bit_sets(a, 37);
    CHECK(p.ones.size() + p.zeros.size() == 37);
    std::vector<int> seen(37, 0);
    for (auto i : p.ones) seen[i] += 1;
    for (auto i : p.zeros) seen[i] += 1;
    for (int v : seen) CHECK(v == 1);
  }
}

TEST_CASE("feature vector examples") {
  auto fv = [](std::uint64_t y, std::uint64_t y0) { return feature_vector(BitVec::from_u64(4, y), BitVec::from_u64(4, y0), 4); };
  const auto same = fv(0b1010, 0b1010);
  CHECK(same.f1 == 0);
  CHECK(same.f2 == 0);
  CHECK(same.f3 == 0);
  CHECK(same.f4 == 0);
  const auto a = fv(0b0110, 0b1010);
  CHECK(a.f1 == 1);
  CHECK(a.f2 == 1);
  CHECK(a.f3 == 4);
  CHECK(a.f4 == 8);
  const auto b = fv(0b0000, 0b1111);
  CHECK(b.f1 == 0);
  CHECK(b.f2 == 4);
  CHECK(b.f3 == 0);
  CHECK(b.f4 == 15);
  CHECK_THROWS(feature_vector(BitVec(4), BitVec(5), 4));
}

TEST_CASE("feature vector symmetry and loop oracle") {
  Rng rng(2);
  for (std::size_t m : {4u, 16u, 32u}) {
    for (int t = 0; t < 2000; ++t) {
      const auto y = random_word(rng, m), y0 = random_word(rng, m);
      const auto f = feature_vector(y, y0, m), g = feature_vector(y0, y, m), o = loop_oracle(y, y0);
      CHECK(f.f1 == g.f2);
      CHECK(f.f3 == g.f4);
      CHECK(f.f1 == o.f1);
      CHECK(f.f2 == o.f2);
      CHECK(f.f3 == o.f3);
      CHECK(f.f4 == o.f4);
      CHECK((f.f1 == 0) == (f.f3 == 0));
    }
  }
}

TEST_CASE("feature tensor") {
  OutputGrid g;
  g.clocks = {100, 200, 300};
  g.duties = {0, 50};
  g.width = 16;
  Rng rng(3);
  GridRow row;
  row.input = BitVec(8);
  row.golden = random_word(rng, 16);
  row.observed.assign(6, row.golden);
  row.failed.assign(6, 0);
  g.rows.push_back(row);
  SUBCASE("zero when everything matches") {
    const auto t = feature_tensor(g, 0);
    for (double v : t.values) CHECK(v == 0.0);
  }
  SUBCASE("one flipped bit is local") {
    auto& r = g.rows[0];
    r.golden.set(0, false);
    for (auto& o : r.observed) o.set(0, false);
    r.observed[1 * 2 + 1].set(0, true);
    const auto t = feature_tensor(g, 0);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 2; ++j) {
        const bool hit = i == 1 && j == 1;
        CHECK(t.at(i, j, 0) == (hit ? 1.0 : 0.0));
        CHECK(t.at(i, j, 1) == 0.0);
        CHECK(t.at(i, j, 2) == (hit ? 1.0 : 0.0));
        CHECK(t.at(i, j, 3) == 0.0);
      }
    }
  }
  SUBCASE("random row against the bit loop") {
    for (auto& o : g.rows[0].observed) o = random_word(rng, 16);
    const auto t = feature_tensor(g, 0);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 2; ++j) {
        const auto o = loop_oracle(g.at(0, i, j), g.rows[0].golden);
        CHECK(t.at(i, j, 0) == o.f1);
        CHECK(t.at(i, j, 1) == o.f2);
        CHECK(t.at(i, j, 2) == o.f3);
        CHECK(t.at(i, j, 3) == o.f4);
      }
    }
  }
  SUBCASE("a failed cell is an error") {
    g.rows[0].failed[3] = 1;
    CHECK_THROWS(feature_tensor(g, 0));
  }
}

TEST_CASE("bins") {
  auto tensor = [](double v) {
    FeatureTensor t;
    t.n_clocks = 2;
    t.n_duties = 1;
    t.values.assign(t.size(), v);
    return t;
  };
  const std::vector<FeatureTensor> one{tensor(1.5), tensor(2.0)};
  const auto k1 = bin_tensors(one, 1);
  REQUIRE(k1.size() == 2);
  CHECK(k1[0].values == one[0].values);
  const auto k2 = bin_tensors({tensor(1.5), tensor(1.5)}, 2);
  REQUIRE(k2.size() == 1);
  for (double v : k2[0].values) CHECK(v == 3.0);
  std::vector<FeatureTensor> many;
  for (int i = 0; i < 23; ++i) many.push_back(tensor(i));
  std::size_t dropped = 0;
  CHECK(bin_tensors(many, 5, &dropped).size() == 4);
  CHECK(dropped == 3);
  CHECK_THROWS(bin_tensors({}, 1));
  // Bin content does not depend on member order.
  const auto fwd = bin_tensors({tensor(1), tensor(2), tensor(7)}, 3), rev = bin_tensors({tensor(7), tensor(2), tensor(1)}, 3);
  CHECK(fwd[0].values == rev[0].values);
}

TEST_CASE("tensor JSON line round trip") {
  FeatureTensor t;
  t.n_clocks = 2;
  t.n_duties = 3;
  t.input = BitVec::from_hex("beef", 16);
  Rng rng(4);
  for (std::size_t i = 0; i < t.size(); ++i) t.values.push_back(std::ldexp(static_cast<double>(rng.below(1 << 20)), 30));
  const auto back = tensor_from_jsonl(tensor_to_jsonl(t));
  CHECK(back.input == t.input);
  CHECK(back.values == t.values);
  CHECK(back.n_clocks == 2);
  CHECK(back.n_duties == 3);
}
