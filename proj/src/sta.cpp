#include "atd/sta.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>

namespace atd {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Net-level timing graph shared by the STA routines.
struct TimingGraph {
  std::vector<std::vector<std::size_t>> comb_readers;  // distinct comb cells per net
  std::vector<std::vector<std::size_t>> dff_readers;   // DFFs whose D is this net
  std::vector<std::vector<std::size_t>> po_positions;  // output list positions
  std::vector<std::size_t> topo;

  explicit TimingGraph(const Netlist& n)
      : comb_readers(n.net_count()),
        dff_readers(n.net_count()),
        po_positions(n.net_count()),
        topo(topo_order(n)) {
    const auto& cells = n.cells();
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto& c = cells[i];
      if (is_sequential(c.kind)) {
        dff_readers[c.inputs[0]].push_back(i);
        continue;
      }
      for (NetId in : c.inputs) {
        auto& r = comb_readers[in];
        if (r.empty() || r.back() != i) r.push_back(i);
      }
    }
    for (std::size_t k = 0; k < n.outputs().size(); ++k) po_positions[n.outputs()[k]].push_back(k);
  }

  bool is_sink(NetId net) const { return !dff_readers[net].empty() || !po_positions[net].empty(); }

  std::vector<double> suffix(const Netlist& n, const DelayAnnotation& a) const {
    std::vector<double> s(n.net_count(), kNegInf);
    for (NetId net = 0; net < n.net_count(); ++net) {
      if (is_sink(net)) s[net] = 0.0;
    }
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
      const auto& c = n.cells()[*it];
      const double tail = s[c.output];
      if (tail == kNegInf) continue;
      const double via = a.delay[*it] + tail;
      for (NetId in : c.inputs) s[in] = std::max(s[in], via);
    }
    return s;
  }
};

void check_cover(const Netlist& n, const DelayAnnotation& a) {
  if (a.delay.size() != n.cells().size()) {
    throw std::invalid_argument("delay annotation covers " + std::to_string(a.delay.size()) +
                                " cells, netlist has " + std::to_string(n.cells().size()));
  }
}

}  // namespace

std::vector<std::string> TimingPath::key(const Netlist& n) const {
  std::vector<std::string> k;
  k.reserve(gates.size() + 2);
  k.push_back(source_dff ? n.cells()[*source_dff].id : n.net_name(start_net));
  for (auto g : gates) k.push_back(n.cells()[g].id);
  k.push_back(sink_dff ? n.cells()[*sink_dff].id : n.net_name(n.outputs()[sink_output]));
  return k;
}

std::vector<NetId> TimingPath::nets(const Netlist& n) const {
  std::vector<NetId> out{start_net};
  for (auto g : gates) out.push_back(n.cells()[g].output);
  return out;
}

bool path_rank_less(const Netlist& n, const TimingPath& x, const TimingPath& y) {
  if (x.delay != y.delay) return x.delay > y.delay;
  return x.key(n) < y.key(n);
}

double max_arrival(const Netlist& n, const DelayAnnotation& a) {
  check_cover(n, a);
  const TimingGraph g(n);
  std::vector<double> arr(n.net_count(), kNegInf);
  for (NetId in : n.inputs()) arr[in] = 0.0;
  for (std::size_t i = 0; i < n.cells().size(); ++i) {
    if (is_sequential(n.cells()[i].kind)) arr[n.cells()[i].output] = a.delay[i];
  }
  for (auto ci : g.topo) {
    const auto& c = n.cells()[ci];
    double m = kNegInf;
    for (NetId in : c.inputs) m = std::max(m, arr[in]);
    if (m != kNegInf) arr[c.output] = m + a.delay[ci];
  }
  double best = kNegInf;
  for (NetId net = 0; net < n.net_count(); ++net) {
    if (g.is_sink(net)) best = std::max(best, arr[net]);
  }
  return best == kNegInf ? 0.0 : best;
}

TimingPath critical_path(const Netlist& n, const DelayAnnotation& a) {
  auto r = k_longest_paths(n, a, 1);
  if (r.paths.empty()) throw std::invalid_argument("netlist has no timing paths");
  return r.paths.front();
}

RankedPaths k_longest_paths(const Netlist& n, const DelayAnnotation& a, std::size_t k) {
  if (k == 0) throw std::invalid_argument("k_longest_paths: K must be at least 1");
  check_cover(n, a);
  const TimingGraph g(n);
  const auto suffix = g.suffix(n, a);
  const auto& cells = n.cells();

  struct Node {
    std::int64_t parent;
    std::size_t cell;  // gate appended at this node; npos for roots
    NetId net;
    double prefix;
    std::optional<std::size_t> source_dff;
  };
  enum class Kind : std::uint8_t { Partial, DffSink, OutputSink };
  struct Entry {
    double prio;
    std::uint64_t seq;
    std::size_t node;
    Kind kind;
    std::size_t sink;
  };
  auto worse = [](const Entry& x, const Entry& y) {
    if (x.prio != y.prio) return x.prio < y.prio;
    return x.seq > y.seq;
  };
  constexpr auto npos = static_cast<std::size_t>(-1);

  std::vector<Node> nodes;
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> heap(worse);
  std::uint64_t seq = 0;

  auto expand = [&](std::size_t idx) {
    const Node node = nodes[idx];
    for (auto d : g.dff_readers[node.net]) heap.push({node.prefix, seq++, idx, Kind::DffSink, d});
    for (auto p : g.po_positions[node.net]) heap.push({node.prefix, seq++, idx, Kind::OutputSink, p});
    for (auto ci : g.comb_readers[node.net]) {
      const NetId out = cells[ci].output;
      if (suffix[out] == kNegInf) continue;
      const double prefix = node.prefix + a.delay[ci];
      nodes.push_back({static_cast<std::int64_t>(idx), ci, out, prefix, node.source_dff});
      heap.push({prefix + suffix[out], seq++, nodes.size() - 1, Kind::Partial, 0});
    }
  };

  for (NetId in : n.inputs()) {
    if (suffix[in] == kNegInf) continue;
    nodes.push_back({-1, npos, in, 0.0, std::nullopt});
    heap.push({suffix[in], seq++, nodes.size() - 1, Kind::Partial, 0});
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!is_sequential(cells[i].kind)) continue;
    const NetId q = cells[i].output;
    if (suffix[q] == kNegInf) continue;
    nodes.push_back({-1, npos, q, a.delay[i], i});
    heap.push({a.delay[i] + suffix[q], seq++, nodes.size() - 1, Kind::Partial, 0});
  }

  std::vector<TimingPath> done;
  std::priority_queue<double, std::vector<double>, std::greater<>> best_k;  // min-heap
  while (!heap.empty()) {
    if (best_k.size() == k) {
      const double kth = best_k.top();
      const double tol = 1e-9 * std::max(1.0, std::abs(kth));
      if (heap.top().prio < kth - tol) break;
    }
    const Entry e = heap.top();
    heap.pop();
    if (e.kind == Kind::Partial) {
      expand(e.node);
      continue;
    }
    TimingPath p;
    p.delay = nodes[e.node].prefix;
    for (std::int64_t cur = static_cast<std::int64_t>(e.node); cur >= 0; cur = nodes[cur].parent) {
      const auto& nd = nodes[static_cast<std::size_t>(cur)];
      if (nd.cell != npos) p.gates.push_back(nd.cell);
      if (nd.parent < 0) {
        p.start_net = nd.net;
        p.source_dff = nd.source_dff;
      }
    }
    std::reverse(p.gates.begin(), p.gates.end());
    if (e.kind == Kind::DffSink) {
      p.sink_dff = e.sink;
    } else {
      p.sink_output = e.sink;
    }
    done.push_back(std::move(p));
    best_k.push(done.back().delay);
    if (best_k.size() > k) best_k.pop();
  }

  // Sort with cached keys; ties in delay fall back to lexicographic keys.
  std::vector<std::vector<std::string>> keys;
  keys.reserve(done.size());
  for (const auto& p : done) keys.push_back(p.key(n));
  std::vector<std::size_t> order(done.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (done[x].delay != done[y].delay) return done[x].delay > done[y].delay;
    return keys[x] < keys[y];
  });
  RankedPaths r;
  for (std::size_t i = 0; i < std::min(k, order.size()); ++i) r.paths.push_back(done[order[i]]);
  r.shortfall = r.paths.size() < k;
  return r;
}

}  // namespace atd
