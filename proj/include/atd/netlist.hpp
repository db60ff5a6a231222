#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace atd {

using NetId = std::uint32_t;
inline constexpr NetId kNoNet = ~NetId{0};

enum class CellKind : std::uint8_t {
  Inv,
  Buf,
  And2,
  Nand2,
  Or2,
  Nor2,
  Xor2,
  Xnor2,
  Mux2,  // inputs (a, b, sel); out = sel ? b : a
  Dff,   // input D; output Q
  Const0,
  Const1,
};

std::string_view to_string(CellKind k) noexcept;
std::optional<CellKind> cell_kind_from_string(std::string_view s) noexcept;
std::size_t arity(CellKind k) noexcept;
inline bool is_sequential(CellKind k) noexcept { return k == CellKind::Dff; }
inline bool is_constant(CellKind k) noexcept {
  return k == CellKind::Const0 || k == CellKind::Const1;
}

/// Combinational evaluation of a non-DFF, non-constant kind.
inline bool eval_gate(CellKind k, bool a, bool b, bool s) noexcept {
  switch (k) {
    case CellKind::Inv: return !a;
    case CellKind::Buf: return a;
    case CellKind::And2: return a && b;
    case CellKind::Nand2: return !(a && b);
    case CellKind::Or2: return a || b;
    case CellKind::Nor2: return !(a || b);
    case CellKind::Xor2: return a != b;
    case CellKind::Xnor2: return a == b;
    case CellKind::Mux2: return s ? b : a;
    case CellKind::Const1: return true;
    default: return false;
  }
}

struct Cell {
  std::string id;
  CellKind kind = CellKind::Buf;
  std::vector<NetId> inputs;
  NetId output = kNoNet;
  bool init = false;  // DFF reset value
};

enum class ViolationKind {
  DuplicateDriver,
  UndrivenNet,
  UndrivenOutput,
  CombinationalCycle,
  DuplicateCellId,
  BadArity,
  DanglingNet,
};

std::string_view to_string(ViolationKind k) noexcept;

struct Violation {
  ViolationKind kind;
  std::string message;
  std::vector<std::string> names;  // offending nets or cells
};

class NetlistError : public std::runtime_error {
 public:
  NetlistError(std::string what, std::vector<Violation> violations = {})
      : std::runtime_error(std::move(what)), violations_(std::move(violations)) {}
  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  std::vector<Violation> violations_;
};

/// Syntax-level failure while reading netlist text.
class ParseError : public NetlistError {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& msg);
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Structural gate-level circuit. Nets are interned by name; cells keep
/// insertion order. A Netlist can hold violations until validate() is run;
/// parse_netlist() only ever returns valid ones.
class Netlist {
 public:
  explicit Netlist(std::string name = "top") : name_(std::move(name)) {}

  const std::string& name() const noexcept { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }

  /// Returns the id of `name`, creating the net if needed.
  NetId net(std::string_view name);
  std::optional<NetId> find_net(std::string_view name) const;
  const std::string& net_name(NetId id) const { return net_names_.at(id); }
  std::size_t net_count() const noexcept { return net_names_.size(); }

  void add_input(NetId n) { inputs_.push_back(n); }
  void add_output(NetId n) { outputs_.push_back(n); }
  std::size_t add_cell(Cell c);

  const std::vector<NetId>& inputs() const noexcept { return inputs_; }
  const std::vector<NetId>& outputs() const noexcept { return outputs_; }
  const std::vector<Cell>& cells() const noexcept { return cells_; }
  const Cell& cell(std::size_t i) const { return cells_.at(i); }
  std::optional<std::size_t> find_cell(std::string_view id) const;

  /// Replaces input pin `pin` of cell `cell_index` with `net`.
  void rewire_input(std::size_t cell_index, std::size_t pin, NetId net);
  /// Replaces position `index` in the primary output list.
  void rewire_output(std::size_t index, NetId net) { outputs_.at(index) = net; }

  /// Free-form key/value metadata, persisted as `# meta key=value` lines.
  const std::map<std::string, std::string>& meta() const noexcept { return meta_; }
  void set_meta(const std::string& key, std::string value) { meta_[key] = std::move(value); }
  std::optional<std::string> meta_value(const std::string& key) const;

  /// Result-ready cycle recorded by the generators (`n_read`), if any.
  std::optional<int> read_cycle() const;

  /// Nets that are allowed to have no readers.
  const std::vector<NetId>& dead_ends() const noexcept { return dead_ends_; }
  void add_dead_end(NetId n) { dead_ends_.push_back(n); }

  /// Driving cell index per net, or -1 for primary inputs and undriven nets.
  /// Only meaningful for validated netlists.
  std::vector<std::int64_t> driver_map() const;

 private:
  std::string name_;
  std::vector<std::string> net_names_;
  std::unordered_map<std::string, NetId> net_index_;
  std::vector<NetId> inputs_;
  std::vector<NetId> outputs_;
  std::vector<Cell> cells_;
  std::unordered_map<std::string, std::size_t> cell_index_;
  std::map<std::string, std::string> meta_;
  std::vector<NetId> dead_ends_;
};

struct NetlistStats {
  std::size_t gate_count = 0;  // combinational cells, constants excluded
  std::size_t dff_count = 0;
  std::size_t const_count = 0;
  std::size_t net_count = 0;
  std::size_t width_in = 0;
  std::size_t width_out = 0;
};

NetlistStats stats(const Netlist& n);

Netlist parse_netlist(std::string_view text);
std::string serialize_netlist(const Netlist& n);

/// Empty iff all structural invariants hold.
std::vector<Violation> validate(const Netlist& n);

/// Non-DFF cell indices (constants included) such that every cell comes
/// after the drivers of its inputs. Throws NetlistError on a cycle.
std::vector<std::size_t> topo_order(const Netlist& n);

/// Number of loads per net: one per cell input pin plus one per primary
/// output listing.
std::vector<std::uint32_t> fanout_map(const Netlist& n);

}  // namespace atd
