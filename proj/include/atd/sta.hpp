#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "atd/aging.hpp"
#include "atd/netlist.hpp"

namespace atd {

/// One source-to-sink timing path. Sources are primary inputs and DFF Q
/// pins (launch includes clk->q); sinks are DFF D pins and primary outputs.
struct TimingPath {
  double delay = 0.0;
  NetId start_net = kNoNet;
  std::optional<std::size_t> source_dff;  // launching flop, if any
  std::vector<std::size_t> gates;         // combinational cells in order
  std::optional<std::size_t> sink_dff;    // capturing flop, or
  std::size_t sink_output = 0;            // primary output position

  /// Source name, gate ids, sink name. Used for tie-breaking.
  std::vector<std::string> key(const Netlist& n) const;
  /// Start net followed by each gate's output net.
  std::vector<NetId> nets(const Netlist& n) const;
};

/// Exact maximum arrival over all sinks (t_CP) by forward propagation.
double max_arrival(const Netlist& n, const DelayAnnotation& a);

/// Longest path; identical to k_longest_paths(n, a, 1).front().
TimingPath critical_path(const Netlist& n, const DelayAnnotation& a);

struct RankedPaths {
  std::vector<TimingPath> paths;  // rank 1 first
  bool shortfall = false;         // fewer than K paths exist
};

/// The K longest distinct paths, ordered by delay (descending) then by
/// lexicographic key. Best-first search over prefixes using the exact
/// longest-suffix bound.
RankedPaths k_longest_paths(const Netlist& n, const DelayAnnotation& a, std::size_t k);

/// Strict ordering used for ranking: longer first, then smaller key.
bool path_rank_less(const Netlist& n, const TimingPath& x, const TimingPath& y);

}  // namespace atd
