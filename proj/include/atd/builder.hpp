#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include "atd/netlist.hpp"

namespace atd {

/// Appends cells to a Netlist with generated, collision-free names.
class CircuitBuilder {
 public:
  CircuitBuilder(Netlist& n, std::string prefix) : n_(n), prefix_(std::move(prefix)) {}

  NetId fresh_net(const std::string& hint = "n");
  std::string fresh_cell_id(const std::string& hint = "g");

  NetId gate(CellKind k, std::initializer_list<NetId> ins);
  NetId inv(NetId a) { return gate(CellKind::Inv, {a}); }
  NetId and2(NetId a, NetId b) { return gate(CellKind::And2, {a, b}); }
  NetId or2(NetId a, NetId b) { return gate(CellKind::Or2, {a, b}); }
  NetId xor2(NetId a, NetId b) { return gate(CellKind::Xor2, {a, b}); }
  NetId xnor2(NetId a, NetId b) { return gate(CellKind::Xnor2, {a, b}); }
  NetId mux2(NetId a, NetId b, NetId sel) { return gate(CellKind::Mux2, {a, b, sel}); }

  /// Adds a DFF driving `q` from `d`.
  std::size_t dff(NetId q, NetId d, bool init);

  /// Constant nets; an existing constant cell in the netlist is reused.
  NetId const0();
  NetId const1();
  NetId constant(bool v) { return v ? const1() : const0(); }

  /// Balanced binary reduction; a single net is returned unchanged.
  NetId reduce(CellKind k, std::vector<NetId> nets);

  std::vector<std::size_t> added_cells() const { return added_; }

 private:
  std::optional<NetId> existing_constant(CellKind k) const;

  Netlist& n_;
  std::string prefix_;
  std::size_t net_counter_ = 0;
  std::size_t cell_counter_ = 0;
  std::optional<NetId> c0_, c1_;
  std::vector<std::size_t> added_;
};

}  // namespace atd
