#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "atd/aging.hpp"
#include "atd/bench.hpp"
#include "atd/netlist.hpp"
#include "atd/rng.hpp"
#include "atd/sta.hpp"

namespace atd::testing {

inline DelayAnnotation nominal(const Netlist& n) {
  return annotate(n, BaseDelayLib::defaults(), AgingParams{}, 0, std::nullopt);
}

inline DelayAnnotation uniform_delays(const Netlist& n, double d) {
  DelayAnnotation a;
  a.delay.assign(n.cells().size(), d);
  return a;
}

/// Multiplier operands packed as a in the low W bits, b above.
inline BitVec mult_input(int w, std::uint64_t a, std::uint64_t b) {
  BitVec x(2 * static_cast<std::size_t>(w));
  for (int i = 0; i < w; ++i) {
    x.set(static_cast<std::size_t>(i), (a >> i) & 1U);
    x.set(static_cast<std::size_t>(w + i), (b >> i) & 1U);
  }
  return x;
}

/// Random layered combinational DAG with a few flops. Every net is read by
/// a cell, a flop or a primary output, so the result validates.
inline Netlist random_dag(std::uint64_t seed, int n_inputs, int n_gates, int n_dffs) {
  Rng rng(seed);
  Netlist n("dag" + std::to_string(seed));
  std::vector<NetId> pool;
  for (int i = 0; i < n_inputs; ++i) {
    const NetId x = n.net("i" + std::to_string(i));
    n.add_input(x);
    pool.push_back(x);
  }
  std::vector<NetId> q;
  for (int i = 0; i < n_dffs; ++i) {
    q.push_back(n.net("q" + std::to_string(i)));
    pool.push_back(q.back());
  }
  static const CellKind kinds[] = {CellKind::Inv,  CellKind::Buf,  CellKind::And2, CellKind::Nand2, CellKind::Or2,
                                   CellKind::Nor2, CellKind::Xor2, CellKind::Xnor2, CellKind::Mux2};
  for (int g = 0; g < n_gates; ++g) {
    const CellKind k = kinds[rng.below(std::size(kinds))];
    Cell c;
    c.id = "g" + std::to_string(g);
    c.kind = k;
    // Bias toward recent nets to get depth without path explosion.
    for (std::size_t p = 0; p < arity(k); ++p) {
      const std::size_t span = std::min<std::size_t>(pool.size(), 6);
      c.inputs.push_back(pool[pool.size() - 1 - rng.below(span)]);
    }
    c.output = n.net("w" + std::to_string(g));
    n.add_cell(c);
    pool.push_back(c.output);
  }
  for (int i = 0; i < n_dffs; ++i) {
    Cell d;
    d.id = "ff" + std::to_string(i);
    d.kind = CellKind::Dff;
    d.inputs = {pool[static_cast<std::size_t>(n_inputs + n_dffs) + rng.below(static_cast<std::uint64_t>(n_gates))]};
    d.output = q[static_cast<std::size_t>(i)];
    n.add_cell(d);
  }
  // Any net nobody reads becomes a primary output.
  std::vector<int> used(n.net_count(), 0);
  for (const auto& c : n.cells()) {
    for (NetId in : c.inputs) used[in] = 1;
  }
  for (NetId x = 0; x < n.net_count(); ++x) {
    if (!used[x]) n.add_output(x);
  }
  if (n.outputs().empty()) n.add_output(pool.back());
  return n;
}

/// Exhaustive path enumeration with the same conventions as the STA: sources
/// are primary inputs and flop outputs (launch includes the flop delay),
/// sinks are flop D pins and primary output positions, and a cell reading a
/// net on two pins contributes one path.
inline std::vector<TimingPath> brute_force_paths(const Netlist& n, const DelayAnnotation& a,
                                                 std::size_t limit = 200000) {
  std::vector<std::vector<std::size_t>> readers(n.net_count()), dffs(n.net_count()), pos(n.net_count());
  for (std::size_t i = 0; i < n.cells().size(); ++i) {
    const auto& c = n.cells()[i];
    if (is_sequential(c.kind)) {
      dffs[c.inputs[0]].push_back(i);
      continue;
    }
    for (NetId in : c.inputs) {
      auto& r = readers[in];
      if (std::find(r.begin(), r.end(), i) == r.end()) r.push_back(i);
    }
  }
  for (std::size_t k = 0; k < n.outputs().size(); ++k) pos[n.outputs()[k]].push_back(k);

  std::vector<TimingPath> out;
  TimingPath cur;
  std::function<void(NetId, double)> walk = [&](NetId net, double t) {
    if (out.size() > limit) return;
    for (auto d : dffs[net]) {
      TimingPath p = cur;
      p.delay = t;
      p.sink_dff = d;
      out.push_back(p);
    }
    for (auto k : pos[net]) {
      TimingPath p = cur;
      p.delay = t;
      p.sink_output = k;
      out.push_back(p);
    }
    for (auto ci : readers[net]) {
      cur.gates.push_back(ci);
      walk(n.cells()[ci].output, t + a.delay[ci]);
      cur.gates.pop_back();
    }
  };
  for (NetId in : n.inputs()) {
    cur = TimingPath{};
    cur.start_net = in;
    walk(in, 0.0);
  }
  for (std::size_t i = 0; i < n.cells().size(); ++i) {
    if (!is_sequential(n.cells()[i].kind)) continue;
    cur = TimingPath{};
    cur.start_net = n.cells()[i].output;
    cur.source_dff = i;
    walk(cur.start_net, a.delay[i]);
  }
  std::sort(out.begin(), out.end(), [&](const TimingPath& x, const TimingPath& y) { return path_rank_less(n, x, y); });
  return out;
}

inline bool same_path(const Netlist& n, const TimingPath& x, const TimingPath& y) {
  return x.delay == y.delay && x.key(n) == y.key(n);
}

}  // namespace atd::testing
