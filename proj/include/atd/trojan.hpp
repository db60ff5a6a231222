#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "atd/aging.hpp"
#include "atd/bitvec.hpp"
#include "atd/netlist.hpp"

namespace atd {

enum class Archetype { TrigLeak, AlwaysLfsr, TrigLfsr };

std::string to_string(Archetype a);
Archetype archetype_from_string(const std::string& s);

struct TrojanSpec {
  Archetype archetype = Archetype::TrigLeak;
  BitVec trigger_const;  // compared against inputs 0..width-1
  BitVec key_bits;
  int path_rank = 1;
  int tap_count = 8;
  int lfsr_len = 8;
};

void to_json(nlohmann::json& j, const TrojanSpec& s);
void from_json(const nlohmann::json& j, TrojanSpec& s);

class TrojanError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct TapSelection {
  std::vector<NetId> nets;
  bool shortfall = false;  // the path had fewer internal nets than requested
};

/// Internal nets (gate outputs other than the sink net) of the rank-th longest
/// path, nearest the path midpoint first; ties by net name.
TapSelection pick_tap_nets(const Netlist& n, const DelayAnnotation& a, int rank, int count);

struct TrojanInsertion {
  Netlist netlist;
  std::vector<NetId> taps;
  bool tap_shortfall = false;
  std::vector<std::size_t> leak_outputs;  // output positions, key bit i -> leak_outputs[i]
  NetId trigger = kNoNet;                 // high when the trigger matches
  std::vector<std::string> added_cells;
};

/// Inserts a Trojan into a copy of `n`. `a` must be the duty-0 annotation of
/// `n` without variation; it selects the tap path and the leak outputs.
TrojanInsertion insert_trojan(const Netlist& n, const TrojanSpec& spec, const DelayAnnotation& a);

/// (cells(trojaned) - cells(clean)) / cells(trojaned).
double area_fraction(const Netlist& clean, const Netlist& trojaned);

/// True when `x` fires the trigger (always false for ALWAYS_LFSR).
bool triggers(const TrojanSpec& spec, const BitVec& x);

}  // namespace atd
