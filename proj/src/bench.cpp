#include "atd/bench.hpp"

#include <map>
#include <set>
#include <stdexcept>
#include <string>

#include "atd/builder.hpp"
#include "atd/rng.hpp"

namespace atd {

namespace {

void check_range(const BenchSpec& spec) {
  if (spec.width < 4 || spec.width > 64) {
    throw std::invalid_argument("bench width " + std::to_string(spec.width) + " outside [4, 64]");
  }
  if (spec.kind == BenchKind::SpnCipher) {
    if (spec.rounds < 1 || spec.rounds > 10) {
      throw std::invalid_argument("SPN rounds " + std::to_string(spec.rounds) + " outside [1, 10]");
    }
    if (spec.width != 16 && spec.width != 32) {
      throw std::invalid_argument("SPN width must be 16 or 32");
    }
  }
}

std::vector<NetId> port(Netlist& n, const std::string& stem, int width) {
  std::vector<NetId> nets;
  for (int i = 0; i < width; ++i) nets.push_back(n.net(stem + std::to_string(i)));
  return nets;
}

/// Two-level-minimal Shannon synthesis of a 4-input function from its
/// truth table; identical subfunctions share one net.
class SboxSynth {
 public:
  SboxSynth(CircuitBuilder& b, const std::vector<NetId>& vars) : b_(b), vars_(vars) {}

  NetId build(std::uint32_t tt, int nvars) {
    const std::uint32_t size = 1U << nvars;
    const std::uint32_t mask = size == 32 ? ~0U : (1U << size) - 1;
    tt &= mask;
    if (tt == 0) return b_.const0();
    if (tt == mask) return b_.const1();
    auto key = std::make_pair(nvars, tt);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    const int half = static_cast<int>(size / 2);
    const std::uint32_t lo = tt & ((1U << half) - 1);
    const std::uint32_t hi = tt >> half;
    NetId out;
    if (lo == hi) {
      out = build(lo, nvars - 1);
    } else {
      const NetId x = vars_[static_cast<std::size_t>(nvars - 1)];
      const std::uint32_t sub_mask = (1U << half) - 1;
      const bool lo0 = lo == 0, lo1 = lo == sub_mask, hi0 = hi == 0, hi1 = hi == sub_mask;
      if (lo0 && hi1) {
        out = x;
      } else if (lo1 && hi0) {
        out = inverted(nvars - 1);
      } else if (lo0) {
        out = b_.and2(x, build(hi, nvars - 1));
      } else if (hi0) {
        out = b_.and2(inverted(nvars - 1), build(lo, nvars - 1));
      } else if (hi1) {
        out = b_.or2(x, build(lo, nvars - 1));
      } else if (lo1) {
        out = b_.or2(inverted(nvars - 1), build(hi, nvars - 1));
      } else if ((lo ^ hi) == sub_mask) {
        out = b_.xor2(x, build(lo, nvars - 1));
      } else {
        out = b_.mux2(build(lo, nvars - 1), build(hi, nvars - 1), x);
      }
    }
    memo_.emplace(key, out);
    return out;
  }

 private:
  NetId inverted(int var) {
    if (auto it = inv_.find(var); it != inv_.end()) return it->second;
    const NetId n = b_.inv(vars_[static_cast<std::size_t>(var)]);
    inv_.emplace(var, n);
    return n;
  }

  CircuitBuilder& b_;
  std::vector<NetId> vars_;
  std::map<std::pair<int, std::uint32_t>, NetId> memo_;
  std::map<int, NetId> inv_;
};

}  // namespace

Netlist gen_multiplier(const BenchSpec& spec) {
  check_range(spec);
  if (spec.kind != BenchKind::MultShiftAdd) throw std::invalid_argument("gen_multiplier: wrong kind");
  const int w = spec.width;
  Netlist n("mult_w" + std::to_string(w));
  CircuitBuilder b(n, "");

  const auto a = port(n, "a", w);
  const auto bb = port(n, "b", w);
  for (NetId x : a) n.add_input(x);
  for (NetId x : bb) n.add_input(x);
  const auto tok = port(n, "tok", w);   // one-hot step token
  const auto p = port(n, "p", 2 * w);   // product accumulator

  // Selected multiplier bit gates the shifted multiplicand a << step.
  std::vector<NetId> tb(static_cast<std::size_t>(w));
  for (int i = 0; i < w; ++i) tb[i] = b.and2(tok[i], bb[i]);

  std::vector<std::optional<NetId>> addend(static_cast<std::size_t>(2 * w));
  for (int j = 0; j < 2 * w; ++j) {
    std::vector<NetId> terms;
    for (int i = 0; i < w; ++i) {
      const int k = j - i;
      if (k >= 0 && k < w) terms.push_back(b.and2(tb[i], a[k]));
    }
    if (!terms.empty()) addend[j] = b.reduce(CellKind::Or2, terms);
  }

  // Ripple-carry accumulate: p + addend.
  std::vector<NetId> sum(static_cast<std::size_t>(2 * w));
  std::optional<NetId> carry;
  for (int j = 0; j < 2 * w; ++j) {
    const bool last = j == 2 * w - 1;
    const NetId x = p[j];
    if (!carry) {
      if (!addend[j]) {
        sum[j] = x;
        continue;
      }
      sum[j] = b.xor2(x, *addend[j]);
      if (!last) carry = b.and2(x, *addend[j]);
    } else if (!addend[j]) {
      sum[j] = b.xor2(x, *carry);
      if (!last) carry = b.and2(x, *carry);
    } else {
      const NetId prop = b.xor2(x, *addend[j]);
      sum[j] = b.xor2(prop, *carry);
      if (!last) carry = b.or2(b.and2(x, *addend[j]), b.and2(prop, *carry));
    }
  }

  for (int i = 0; i < w; ++i) b.dff(tok[i], tok[(i + w - 1) % w], i == 0);
  for (int j = 0; j < 2 * w; ++j) b.dff(p[j], sum[j], false);
  for (NetId x : p) n.add_output(x);
  n.set_meta("n_read", std::to_string(w + 1));
  return n;
}

int spn_permute(int i, int width, bool identity) {
  if (identity || i == width - 1) return i;
  return static_cast<int>((static_cast<long>(i) * (width / 4)) % (width - 1));
}

Netlist gen_spn(const BenchSpec& spec) {
  check_range(spec);
  if (spec.kind != BenchKind::SpnCipher) throw std::invalid_argument("gen_spn: wrong kind");
  const int w = spec.width;
  Netlist n("spn_w" + std::to_string(w) + "_r" + std::to_string(spec.rounds));
  CircuitBuilder b(n, "");

  const auto pt = port(n, "pt", w);
  for (NetId x : pt) n.add_input(x);
  const auto s = port(n, "s", w);   // state register
  const auto k = port(n, "k", w);   // rotating key register
  const NetId first = n.net("first");

  std::vector<NetId> u(static_cast<std::size_t>(w));
  for (int i = 0; i < w; ++i) u[i] = b.xor2(b.mux2(s[i], pt[i], first), k[i]);

  std::vector<NetId> v(static_cast<std::size_t>(w));
  for (int nib = 0; nib < w / 4; ++nib) {
    std::vector<NetId> vars(u.begin() + nib * 4, u.begin() + nib * 4 + 4);
    SboxSynth synth(b, vars);
    for (int bit = 0; bit < 4; ++bit) {
      std::uint32_t tt = 0;
      for (std::uint32_t x = 0; x < 16; ++x) tt |= ((kSbox[x] >> bit) & 1U) << x;
      v[nib * 4 + bit] = synth.build(tt, 4);
    }
  }
  std::vector<NetId> next(static_cast<std::size_t>(w));
  for (int i = 0; i < w; ++i) next[spn_permute(i, w, spec.identity_permutation)] = v[i];

  b.dff(first, b.const0(), true);
  for (int i = 0; i < w; ++i) {
    const bool kb = static_cast<std::size_t>(i) < spec.key.width() && spec.key.get(i);
    b.dff(k[i], k[(i + 1) % w], kb);
  }
  for (int i = 0; i < w; ++i) b.dff(s[i], next[i], false);
  for (NetId x : s) n.add_output(x);
  n.set_meta("n_read", std::to_string(spec.rounds + 1));
  return n;
}

Netlist generate(const BenchSpec& spec) {
  return spec.kind == BenchKind::MultShiftAdd ? gen_multiplier(spec) : gen_spn(spec);
}

BitVec spn_reference(const BenchSpec& spec, const BitVec& plaintext) {
  const int w = spec.width;
  BitVec state = plaintext;
  BitVec key(static_cast<std::size_t>(w));
  for (int i = 0; i < w; ++i) {
    key.set(i, static_cast<std::size_t>(i) < spec.key.width() && spec.key.get(i));
  }
  for (int r = 0; r < spec.rounds; ++r) {
    const BitVec u = state ^ key;
    BitVec v(static_cast<std::size_t>(w));
    for (int nib = 0; nib < w / 4; ++nib) {
      unsigned x = 0;
      for (int bit = 0; bit < 4; ++bit) x |= static_cast<unsigned>(u.get(nib * 4 + bit)) << bit;
      for (int bit = 0; bit < 4; ++bit) v.set(nib * 4 + bit, (kSbox[x] >> bit) & 1U);
    }
    BitVec next(static_cast<std::size_t>(w));
    for (int i = 0; i < w; ++i) next.set(spn_permute(i, w, spec.identity_permutation), v.get(i));
    state = next;
    BitVec rotated(static_cast<std::size_t>(w));
    for (int i = 0; i < w; ++i) rotated.set(i, key.get((i + 1) % w));
    key = rotated;
  }
  return state;
}

PatternSet gen_patterns(int width, int n_random, std::uint64_t seed) {
  if (width < 1) throw std::invalid_argument("gen_patterns: width must be positive");
  const auto w = static_cast<std::size_t>(width);
  PatternSet ps;
  std::set<BitVec> seen;
  auto push = [&](BitVec v, PatternOrigin o) {
    if (seen.insert(v).second) {
      ps.inputs.push_back(std::move(v));
      ps.origin.push_back(o);
    }
  };
  BitVec zero(w);
  push(zero, PatternOrigin::Structured);
  push(~zero, PatternOrigin::Structured);
  for (std::size_t i = 0; i < w; ++i) {
    BitVec v(w);
    v.set(i, true);
    push(v, PatternOrigin::Structured);
  }
  for (std::size_t i = 0; i < w; ++i) {
    BitVec v = ~zero;
    v.set(i, false);
    push(v, PatternOrigin::Structured);
  }
  BitVec alt(w);
  for (std::size_t i = 0; i < w; i += 2) alt.set(i, true);
  push(alt, PatternOrigin::Structured);
  push(~alt, PatternOrigin::Structured);

  Rng rng(stream_seed(seed, "patterns"));
  for (int r = 0; r < n_random; ++r) {
    BitVec v(w);
    for (std::size_t i = 0; i < w; i += 64) {
      const std::uint64_t word = rng.next();
      for (std::size_t k = 0; k < 64 && i + k < w; ++k) v.set(i + k, (word >> k) & 1U);
    }
    push(std::move(v), PatternOrigin::Random);
  }
  return ps;
}

}  // namespace atd
