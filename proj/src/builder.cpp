#include "atd/builder.hpp"

#include <stdexcept>

namespace atd {

NetId CircuitBuilder::fresh_net(const std::string& hint) {
  while (true) {
    std::string name = prefix_ + hint + std::to_string(net_counter_++);
    if (!n_.find_net(name)) return n_.net(name);
  }
}

std::string CircuitBuilder::fresh_cell_id(const std::string& hint) {
  while (true) {
    std::string id = prefix_ + hint + std::to_string(cell_counter_++);
    if (!n_.find_cell(id) && !n_.find_cell("$const_" + id)) return id;
  }
}

NetId CircuitBuilder::gate(CellKind k, std::initializer_list<NetId> ins) {
  if (ins.size() != arity(k) || is_sequential(k) || is_constant(k)) {
    throw std::invalid_argument("CircuitBuilder::gate: bad kind/arity");
  }
  Cell c;
  c.id = fresh_cell_id();
  c.kind = k;
  c.inputs.assign(ins.begin(), ins.end());
  c.output = fresh_net();
  const NetId out = c.output;
  added_.push_back(n_.add_cell(std::move(c)));
  return out;
}

std::size_t CircuitBuilder::dff(NetId q, NetId d, bool init) {
  Cell c;
  c.id = fresh_cell_id("ff");
  c.kind = CellKind::Dff;
  c.inputs = {d};
  c.output = q;
  c.init = init;
  const auto idx = n_.add_cell(std::move(c));
  added_.push_back(idx);
  return idx;
}

std::optional<NetId> CircuitBuilder::existing_constant(CellKind k) const {
  for (const auto& c : n_.cells()) {
    if (c.kind == k) return c.output;
  }
  return std::nullopt;
}

NetId CircuitBuilder::const0() {
  if (!c0_) c0_ = existing_constant(CellKind::Const0);
  if (!c0_) {
    const NetId net = fresh_net("zero");
    Cell c;
    c.id = "$const_" + n_.net_name(net);
    c.kind = CellKind::Const0;
    c.output = net;
    added_.push_back(n_.add_cell(std::move(c)));
    c0_ = net;
  }
  return *c0_;
}

NetId CircuitBuilder::const1() {
  if (!c1_) c1_ = existing_constant(CellKind::Const1);
  if (!c1_) {
    const NetId net = fresh_net("one");
    Cell c;
    c.id = "$const_" + n_.net_name(net);
    c.kind = CellKind::Const1;
    c.output = net;
    added_.push_back(n_.add_cell(std::move(c)));
    c1_ = net;
  }
  return *c1_;
}

NetId CircuitBuilder::reduce(CellKind k, std::vector<NetId> nets) {
  if (nets.empty()) throw std::invalid_argument("CircuitBuilder::reduce: empty operand list");
  while (nets.size() > 1) {
    std::vector<NetId> next;
    for (std::size_t i = 0; i + 1 < nets.size(); i += 2) next.push_back(gate(k, {nets[i], nets[i + 1]}));
    if (nets.size() % 2) next.push_back(nets.back());
    nets = std::move(next);
  }
  return nets.front();
}

}  // namespace atd
