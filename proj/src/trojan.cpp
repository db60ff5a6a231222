#include "atd/trojan.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "atd/builder.hpp"
#include "atd/sta.hpp"

namespace atd {

namespace {

// Fibonacci LFSR feedback taps (1-based stage numbers) for maximal-length
// sequences.
const std::map<int, std::vector<int>>& lfsr_taps() {
  static const std::map<int, std::vector<int>> taps = {
      {3, {3, 2}},         {4, {4, 3}},         {5, {5, 3}},         {6, {6, 5}},
      {7, {7, 6}},         {8, {8, 6, 5, 4}},   {9, {9, 5}},         {10, {10, 7}},
      {11, {11, 9}},       {12, {12, 6, 4, 1}}, {13, {13, 4, 3, 1}}, {14, {14, 5, 3, 1}},
      {15, {15, 14}},      {16, {16, 15, 13, 4}},
  };
  return taps;
}

BitVec bits_from_json(const nlohmann::json& j, const char* field) {
  if (!j.contains(field)) return BitVec(0);
  const auto s = j.at(field).get<std::string>();
  try {
    return BitVec::from_bits(s);
  } catch (const std::invalid_argument& e) {
    throw TrojanError(std::string(field) + ": " + e.what());
  }
}

// Output position whose net is the path's sink, or the Q of its sink flop.
std::optional<std::size_t> sink_output_position(const Netlist& n, const TimingPath& p) {
  if (!p.sink_dff) return p.sink_output;
  const NetId q = n.cells()[*p.sink_dff].output;
  for (std::size_t i = 0; i < n.outputs().size(); ++i) {
    if (n.outputs()[i] == q) return i;
  }
  return std::nullopt;
}

}  // namespace

std::string to_string(Archetype a) {
  switch (a) {
    case Archetype::TrigLeak: return "TRIG_LEAK";
    case Archetype::AlwaysLfsr: return "ALWAYS_LFSR";
    case Archetype::TrigLfsr: return "TRIG_LFSR";
  }
  return "?";
}

Archetype archetype_from_string(const std::string& s) {
  if (s == "TRIG_LEAK") return Archetype::TrigLeak;
  if (s == "ALWAYS_LFSR") return Archetype::AlwaysLfsr;
  if (s == "TRIG_LFSR") return Archetype::TrigLfsr;
  throw TrojanError("unknown Trojan archetype '" + s + "'");
}

void to_json(nlohmann::json& j, const TrojanSpec& s) {
  j = nlohmann::json{{"archetype", to_string(s.archetype)},
                     {"trigger_const", s.trigger_const.to_bits()},
                     {"key_bits", s.key_bits.to_bits()},
                     {"path_rank", s.path_rank},
                     {"tap_count", s.tap_count},
                     {"lfsr_len", s.lfsr_len}};
}

void from_json(const nlohmann::json& j, TrojanSpec& s) {
  s.archetype = archetype_from_string(j.at("archetype").get<std::string>());
  s.trigger_const = bits_from_json(j, "trigger_const");
  s.key_bits = bits_from_json(j, "key_bits");
  s.path_rank = j.value("path_rank", 1);
  s.tap_count = j.value("tap_count", 8);
  s.lfsr_len = j.value("lfsr_len", 8);
}

bool triggers(const TrojanSpec& spec, const BitVec& x) {
  if (spec.archetype == Archetype::AlwaysLfsr) return false;
  if (spec.trigger_const.width() > x.width()) return false;
  for (std::size_t i = 0; i < spec.trigger_const.width(); ++i) {
    if (x.get(i) != spec.trigger_const.get(i)) return false;
  }
  return true;
}

TapSelection pick_tap_nets(const Netlist& n, const DelayAnnotation& a, int rank, int count) {
  if (rank < 1) throw TrojanError("path rank must be at least 1");
  if (count < 1) throw TrojanError("tap count must be at least 1");
  const auto ranked = k_longest_paths(n, a, static_cast<std::size_t>(rank));
  if (ranked.paths.size() < static_cast<std::size_t>(rank)) {
    throw TrojanError("path rank " + std::to_string(rank) + " exceeds the " +
                      std::to_string(ranked.paths.size()) + " enumerable paths");
  }
  const auto& path = ranked.paths[static_cast<std::size_t>(rank) - 1];
  std::vector<NetId> internal;
  for (std::size_t i = 0; i + 1 < path.gates.size(); ++i) internal.push_back(n.cells()[path.gates[i]].output);
  if (internal.empty()) throw TrojanError("path of rank " + std::to_string(rank) + " has no internal nets");

  const double mid = (static_cast<double>(internal.size()) - 1.0) / 2.0;
  std::vector<std::size_t> order(internal.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const double dx = std::abs(static_cast<double>(x) - mid);
    const double dy = std::abs(static_cast<double>(y) - mid);
    if (dx != dy) return dx < dy;
    return n.net_name(internal[x]) < n.net_name(internal[y]);
  });
  TapSelection sel;
  const auto want = static_cast<std::size_t>(count);
  for (std::size_t i = 0; i < std::min(want, order.size()); ++i) sel.nets.push_back(internal[order[i]]);
  sel.shortfall = order.size() < want;
  return sel;
}

TrojanInsertion insert_trojan(const Netlist& n, const TrojanSpec& spec, const DelayAnnotation& a) {
  if (a.delay.size() != n.cells().size()) throw TrojanError("annotation does not cover the netlist");
  if (a.duty != 0 || a.variation_seed) {
    throw TrojanError("Trojan placement needs the duty-0 annotation without variation");
  }
  const bool triggered = spec.archetype != Archetype::AlwaysLfsr;
  if (triggered && spec.trigger_const.width() == 0) throw TrojanError("triggered archetype needs trigger_const");
  if (spec.trigger_const.width() > n.inputs().size()) {
    throw TrojanError("trigger_const is wider than the input bus");
  }
  if (spec.key_bits.width() == 0) throw TrojanError("key_bits is empty");
  if (spec.archetype == Archetype::TrigLeak && spec.key_bits.width() > n.outputs().size()) {
    throw TrojanError("more key bits than primary outputs");
  }
  if (spec.archetype != Archetype::TrigLeak && !lfsr_taps().contains(spec.lfsr_len)) {
    throw TrojanError("unsupported LFSR length " + std::to_string(spec.lfsr_len) + " (3..16)");
  }

  const auto taps = pick_tap_nets(n, a, spec.path_rank, spec.tap_count);

  TrojanInsertion out{n, taps.nets, taps.shortfall, {}, kNoNet, {}};
  Netlist& t = out.netlist;
  CircuitBuilder b(t, "tj_");
  const std::size_t clean_cells = n.cells().size();

  if (triggered) {
    std::vector<NetId> match;
    for (std::size_t i = 0; i < spec.trigger_const.width(); ++i) {
      match.push_back(b.xnor2(t.inputs()[i], b.constant(spec.trigger_const.get(i))));
    }
    out.trigger = b.reduce(CellKind::And2, match);
  }

  std::vector<NetId> cluster;
  if (spec.archetype == Archetype::TrigLeak) {
    const std::size_t nk = spec.key_bits.width();
    const std::size_t m = t.outputs().size();
    const auto path = k_longest_paths(n, a, static_cast<std::size_t>(spec.path_rank))
                          .paths[static_cast<std::size_t>(spec.path_rank) - 1];
    std::size_t first = m - nk;
    if (const auto pos = sink_output_position(n, path)) {
      first = *pos + 1 >= nk ? *pos + 1 - nk : 0;
      first = std::min(first, m - nk);
    }
    const auto drivers = t.driver_map();
    for (std::size_t i = 0; i < nk; ++i) {
      const std::size_t o = first + i;
      out.leak_outputs.push_back(o);
      const NetId y = t.outputs()[o];
      const NetId key = b.constant(spec.key_bits.get(i));
      const auto drv = drivers[y];
      if (drv >= 0 && is_sequential(t.cells()[static_cast<std::size_t>(drv)].kind)) {
        // Registered output: splice at D so the flop captures the key.
        const auto ff = static_cast<std::size_t>(drv);
        const NetId d = t.cells()[ff].inputs[0];
        t.rewire_input(ff, 0, b.mux2(d, key, out.trigger));
      } else {
        t.rewire_output(o, b.mux2(y, key, out.trigger));
      }
    }
  } else {
    const int len = spec.lfsr_len;
    std::vector<NetId> q(static_cast<std::size_t>(len));
    for (auto& net : q) net = b.fresh_net("lfsr");
    std::vector<NetId> fb;
    for (int tap : lfsr_taps().at(len)) fb.push_back(q[static_cast<std::size_t>(tap - 1)]);
    b.dff(q[0], b.reduce(CellKind::Xor2, fb), true);
    for (std::size_t i = 1; i < q.size(); ++i) b.dff(q[i], q[i - 1], false);
    for (std::size_t i = 0; i < spec.key_bits.width(); ++i) {
      NetId leak = b.xor2(q[i % q.size()], b.constant(spec.key_bits.get(i)));
      if (triggered) leak = b.and2(leak, out.trigger);
      cluster.push_back(leak);
    }
  }

  cluster.insert(cluster.end(), taps.nets.begin(), taps.nets.end());
  const NetId sink =
      cluster.size() == 1 ? b.gate(CellKind::Buf, {cluster[0]}) : b.reduce(CellKind::Xor2, cluster);
  t.add_dead_end(sink);
  t.set_meta("trojan", to_string(spec.archetype));

  for (std::size_t i = clean_cells; i < t.cells().size(); ++i) out.added_cells.push_back(t.cells()[i].id);
  if (auto v = validate(t); !v.empty()) {
    throw NetlistError("Trojan insertion produced an invalid netlist: " + v.front().message, v);
  }
  return out;
}

double area_fraction(const Netlist& clean, const Netlist& trojaned) {
  const auto c = clean.cells().size();
  const auto t = trojaned.cells().size();
  if (t < c) throw std::invalid_argument("trojaned netlist has fewer cells than the clean one");
  if (t == 0) return 0.0;
  return static_cast<double>(t - c) / static_cast<double>(t);
}

}  // namespace atd
