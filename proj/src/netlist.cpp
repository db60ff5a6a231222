#include "atd/netlist.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <sstream>

namespace atd {

namespace {

constexpr std::array<std::string_view, 12> kKindNames = {
    "INV", "BUF", "AND2", "NAND2", "OR2", "NOR2", "XOR2", "XNOR2", "MUX2", "DFF", "CONST0", "CONST1"};

std::string const_cell_id(std::string_view net) { return "$const_" + std::string(net); }

}  // namespace

std::string_view to_string(CellKind k) noexcept { return kKindNames[static_cast<std::size_t>(k)]; }

std::optional<CellKind> cell_kind_from_string(std::string_view s) noexcept {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == s) return static_cast<CellKind>(i);
  }
  return std::nullopt;
}

std::size_t arity(CellKind k) noexcept {
  switch (k) {
    case CellKind::Inv:
    case CellKind::Buf:
    case CellKind::Dff: return 1;
    case CellKind::Mux2: return 3;
    case CellKind::Const0:
    case CellKind::Const1: return 0;
    default: return 2;
  }
}

std::string_view to_string(ViolationKind k) noexcept {
  switch (k) {
    case ViolationKind::DuplicateDriver: return "duplicate-driver";
    case ViolationKind::UndrivenNet: return "undriven-net";
    case ViolationKind::UndrivenOutput: return "undriven-output";
    case ViolationKind::CombinationalCycle: return "combinational-cycle";
    case ViolationKind::DuplicateCellId: return "duplicate-cell-id";
    case ViolationKind::BadArity: return "bad-arity";
    case ViolationKind::DanglingNet: return "dangling-net";
  }
  return "unknown";
}

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& msg)
    : NetlistError("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
                   msg),
      line_(line),
      column_(column) {}

NetId Netlist::net(std::string_view name) {
  std::string key(name);
  if (auto it = net_index_.find(key); it != net_index_.end()) return it->second;
  const auto id = static_cast<NetId>(net_names_.size());
  net_names_.push_back(key);
  net_index_.emplace(std::move(key), id);
  return id;
}

std::optional<NetId> Netlist::find_net(std::string_view name) const {
  if (auto it = net_index_.find(std::string(name)); it != net_index_.end()) return it->second;
  return std::nullopt;
}

std::size_t Netlist::add_cell(Cell c) {
  const std::size_t idx = cells_.size();
  cell_index_.emplace(c.id, idx);  // first one wins; duplicates are reported by validate()
  cells_.push_back(std::move(c));
  return idx;
}

std::optional<std::size_t> Netlist::find_cell(std::string_view id) const {
  if (auto it = cell_index_.find(std::string(id)); it != cell_index_.end()) return it->second;
  return std::nullopt;
}

void Netlist::rewire_input(std::size_t cell_index, std::size_t pin, NetId net) {
  cells_.at(cell_index).inputs.at(pin) = net;
}

std::optional<std::string> Netlist::meta_value(const std::string& key) const {
  if (auto it = meta_.find(key); it != meta_.end()) return it->second;
  return std::nullopt;
}

std::optional<int> Netlist::read_cycle() const {
  auto v = meta_value("n_read");
  if (!v) return std::nullopt;
  int k = 0;
  auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), k);
  if (ec != std::errc{} || p != v->data() + v->size()) return std::nullopt;
  return k;
}

std::vector<std::int64_t> Netlist::driver_map() const {
  std::vector<std::int64_t> drv(net_names_.size(), -1);
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    if (cells_[i].output != kNoNet && drv[cells_[i].output] < 0) {
      drv[cells_[i].output] = static_cast<std::int64_t>(i);
    }
  }
  return drv;
}

NetlistStats stats(const Netlist& n) {
  NetlistStats s;
  for (const auto& c : n.cells()) {
    if (is_sequential(c.kind)) {
      ++s.dff_count;
    } else if (is_constant(c.kind)) {
      ++s.const_count;
    } else {
      ++s.gate_count;
    }
  }
  s.net_count = n.net_count();
  s.width_in = n.inputs().size();
  s.width_out = n.outputs().size();
  return s;
}

// ---------------------------------------------------------------------------
// Text format

namespace {

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size() || line[i] == '#') break;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r' &&
           line[i] != '#') {
      ++i;
    }
    out.push_back({line.substr(start, i - start), start + 1});
  }
  return out;
}

bool valid_identifier(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return c != ',' && c != '=' && c != '#' && static_cast<unsigned char>(c) > ' ';
  });
}

std::string_view attr(const Token& t, std::string_view key, std::size_t line) {
  if (t.text.size() <= key.size() || t.text.substr(0, key.size()) != key ||
      t.text[key.size()] != '=') {
    throw ParseError(line, t.column, "expected '" + std::string(key) + "=...', found '" +
                                         std::string(t.text) + "'");
  }
  return t.text.substr(key.size() + 1);
}

std::vector<std::string_view> split_commas(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(',', start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos
                                                                  : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

void parse_meta(Netlist& n, std::string_view line) {
  // "# meta key=value"
  auto pos = line.find('#');
  auto rest = line.substr(pos + 1);
  while (!rest.empty() && (rest.front() == ' ' || rest.front() == '\t')) rest.remove_prefix(1);
  if (rest.substr(0, 5) != "meta ") return;
  rest.remove_prefix(5);
  while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
  while (!rest.empty() && (rest.back() == ' ' || rest.back() == '\r')) rest.remove_suffix(1);
  const auto eq = rest.find('=');
  if (eq == std::string_view::npos) return;
  const std::string key(rest.substr(0, eq));
  const std::string value(rest.substr(eq + 1));
  if (key == "dead_end") {
    for (auto name : split_commas(value)) {
      if (!name.empty()) n.add_dead_end(n.net(name));
    }
  } else {
    n.set_meta(key, value);
  }
}

}  // namespace

Netlist parse_netlist(std::string_view text) {
  Netlist n;
  bool seen_module = false;
  bool seen_end = false;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    const auto line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos
                                                                       : nl - start);
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      auto before = line.substr(0, hash);
      if (before.find_first_not_of(" \t\r") == std::string_view::npos) parse_meta(n, line);
    }
    const auto toks = tokenize(line);
    if (toks.empty()) continue;
    const auto& kw = toks[0];
    if (seen_end) throw ParseError(line_no, kw.column, "statement after 'end'");

    if (kw.text == "module") {
      if (seen_module) throw ParseError(line_no, kw.column, "duplicate 'module' statement");
      if (toks.size() != 2 || !valid_identifier(toks[1].text)) {
        throw ParseError(line_no, kw.column, "expected 'module <name>'");
      }
      n.set_name(std::string(toks[1].text));
      seen_module = true;
      continue;
    }
    if (!seen_module) throw ParseError(line_no, kw.column, "expected 'module' first");

    if (kw.text == "end") {
      if (toks.size() != 1) throw ParseError(line_no, toks[1].column, "unexpected token after 'end'");
      seen_end = true;
    } else if (kw.text == "input" || kw.text == "output") {
      if (toks.size() < 2) throw ParseError(line_no, kw.column, "expected at least one net");
      for (std::size_t i = 1; i < toks.size(); ++i) {
        if (!valid_identifier(toks[i].text)) {
          throw ParseError(line_no, toks[i].column, "bad net name '" + std::string(toks[i].text) + "'");
        }
        const NetId id = n.net(toks[i].text);
        if (kw.text == "input") {
          n.add_input(id);
        } else {
          n.add_output(id);
        }
      }
    } else if (kw.text == "const0" || kw.text == "const1") {
      if (toks.size() != 2 || !valid_identifier(toks[1].text)) {
        throw ParseError(line_no, kw.column, "expected '" + std::string(kw.text) + " <net>'");
      }
      Cell c;
      c.id = const_cell_id(toks[1].text);
      c.kind = kw.text == "const0" ? CellKind::Const0 : CellKind::Const1;
      c.output = n.net(toks[1].text);
      n.add_cell(std::move(c));
    } else if (kw.text == "gate") {
      if (toks.size() != 5) {
        throw ParseError(line_no, kw.column, "expected 'gate <id> <KIND> out=<net> in=<nets>'");
      }
      auto kind = cell_kind_from_string(toks[2].text);
      if (!kind || *kind == CellKind::Dff || is_constant(*kind)) {
        throw ParseError(line_no, toks[2].column, "unknown cell kind '" + std::string(toks[2].text) + "'");
      }
      if (!valid_identifier(toks[1].text)) throw ParseError(line_no, toks[1].column, "bad cell id");
      Cell c;
      c.id = std::string(toks[1].text);
      c.kind = *kind;
      const auto out = attr(toks[3], "out", line_no);
      if (!valid_identifier(out)) throw ParseError(line_no, toks[3].column, "bad output net");
      c.output = n.net(out);
      const auto ins = split_commas(attr(toks[4], "in", line_no));
      if (ins.size() != arity(*kind)) {
        throw ParseError(line_no, toks[4].column,
                         std::string(to_string(*kind)) + " expects " +
                             std::to_string(arity(*kind)) + " inputs, got " +
                             std::to_string(ins.size()));
      }
      for (auto in : ins) {
        if (!valid_identifier(in)) throw ParseError(line_no, toks[4].column, "bad input net");
        c.inputs.push_back(n.net(in));
      }
      n.add_cell(std::move(c));
    } else if (kw.text == "dff") {
      if (toks.size() != 5) {
        throw ParseError(line_no, kw.column, "expected 'dff <id> q=<net> d=<net> init=<0|1>'");
      }
      if (!valid_identifier(toks[1].text)) throw ParseError(line_no, toks[1].column, "bad cell id");
      Cell c;
      c.id = std::string(toks[1].text);
      c.kind = CellKind::Dff;
      const auto q = attr(toks[2], "q", line_no);
      const auto d = attr(toks[3], "d", line_no);
      const auto init = attr(toks[4], "init", line_no);
      if (!valid_identifier(q)) throw ParseError(line_no, toks[2].column, "bad q net");
      if (!valid_identifier(d)) throw ParseError(line_no, toks[3].column, "bad d net");
      if (init != "0" && init != "1") throw ParseError(line_no, toks[4].column, "init must be 0 or 1");
      c.output = n.net(q);
      c.inputs.push_back(n.net(d));
      c.init = init == "1";
      n.add_cell(std::move(c));
    } else {
      throw ParseError(line_no, kw.column, "unknown statement '" + std::string(kw.text) + "'");
    }
  }
  if (!seen_module) throw ParseError(line_no, 1, "missing 'module' statement");
  if (!seen_end) throw ParseError(line_no, 1, "missing 'end' statement");

  auto violations = validate(n);
  if (!violations.empty()) {
    std::string msg = "invalid netlist '" + n.name() + "':";
    for (const auto& v : violations) msg += "\n  " + std::string(to_string(v.kind)) + ": " + v.message;
    throw NetlistError(msg, std::move(violations));
  }
  return n;
}

std::string serialize_netlist(const Netlist& n) {
  std::ostringstream os;
  os << "module " << n.name() << "\n";
  for (const auto& [k, v] : n.meta()) os << "# meta " << k << "=" << v << "\n";
  if (!n.dead_ends().empty()) {
    os << "# meta dead_end=";
    for (std::size_t i = 0; i < n.dead_ends().size(); ++i) {
      os << (i ? "," : "") << n.net_name(n.dead_ends()[i]);
    }
    os << "\n";
  }
  auto port_lines = [&](std::string_view kw, const std::vector<NetId>& nets) {
    constexpr std::size_t kPerLine = 16;
    for (std::size_t i = 0; i < nets.size(); i += kPerLine) {
      os << kw;
      for (std::size_t j = i; j < std::min(nets.size(), i + kPerLine); ++j) {
        os << ' ' << n.net_name(nets[j]);
      }
      os << "\n";
    }
  };
  port_lines("input", n.inputs());
  port_lines("output", n.outputs());
  for (const auto& c : n.cells()) {
    switch (c.kind) {
      case CellKind::Const0: os << "const0 " << n.net_name(c.output) << "\n"; break;
      case CellKind::Const1: os << "const1 " << n.net_name(c.output) << "\n"; break;
      case CellKind::Dff:
        os << "dff " << c.id << " q=" << n.net_name(c.output) << " d=" << n.net_name(c.inputs[0])
           << " init=" << (c.init ? 1 : 0) << "\n";
        break;
      default:
        os << "gate " << c.id << ' ' << to_string(c.kind) << " out=" << n.net_name(c.output)
           << " in=";
        for (std::size_t i = 0; i < c.inputs.size(); ++i) {
          os << (i ? "," : "") << n.net_name(c.inputs[i]);
        }
        os << "\n";
    }
  }
  os << "end\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Structural checks

namespace {

/// Kahn's algorithm over non-DFF cells. Returns the order and the set of
/// cells left over (nonzero only when a combinational cycle exists).
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> kahn(const Netlist& n) {
  const auto& cells = n.cells();
  const auto drv = n.driver_map();
  std::vector<std::vector<std::size_t>> readers(n.net_count());
  std::vector<std::size_t> pending(cells.size(), 0);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (is_sequential(cells[i].kind)) continue;
    for (NetId in : cells[i].inputs) {
      if (in >= n.net_count()) continue;
      readers[in].push_back(i);
      const auto d = drv[in];
      if (d >= 0 && !is_sequential(cells[static_cast<std::size_t>(d)].kind)) ++pending[i];
    }
  }
  std::vector<std::size_t> order;
  std::vector<std::size_t> queue;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!is_sequential(cells[i].kind) && pending[i] == 0) queue.push_back(i);
  }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const std::size_t c = queue[head];
    order.push_back(c);
    const NetId out = cells[c].output;
    if (out >= n.net_count() || drv[out] != static_cast<std::int64_t>(c)) continue;
    for (std::size_t r : readers[out]) {
      if (--pending[r] == 0) queue.push_back(r);
    }
  }
  std::vector<std::size_t> stuck;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!is_sequential(cells[i].kind) && pending[i] != 0) stuck.push_back(i);
  }
  return {std::move(order), std::move(stuck)};
}

/// Extracts one concrete cycle from the stuck cells for reporting.
std::vector<std::string> find_cycle(const Netlist& n, const std::vector<std::size_t>& stuck) {
  const auto& cells = n.cells();
  const auto drv = n.driver_map();
  std::vector<char> in_stuck(cells.size(), 0);
  for (auto s : stuck) in_stuck[s] = 1;
  // Walk backwards through stuck drivers until a cell repeats.
  std::vector<std::int64_t> pos(cells.size(), -1);
  std::vector<std::size_t> walk;
  std::size_t cur = stuck.front();
  while (pos[cur] < 0) {
    pos[cur] = static_cast<std::int64_t>(walk.size());
    walk.push_back(cur);
    bool found = false;
    for (NetId in : cells[cur].inputs) {
      if (in >= n.net_count()) continue;
      const auto d = drv[in];
      if (d >= 0 && in_stuck[static_cast<std::size_t>(d)]) {
        cur = static_cast<std::size_t>(d);
        found = true;
        break;
      }
    }
    if (!found) return {cells[walk.front()].id};
  }
  std::vector<std::string> names;
  for (std::size_t i = static_cast<std::size_t>(pos[cur]); i < walk.size(); ++i) {
    names.push_back(cells[walk[i]].id);
  }
  std::reverse(names.begin(), names.end());
  return names;
}

}  // namespace

std::vector<Violation> validate(const Netlist& n) {
  std::vector<Violation> out;
  const auto& cells = n.cells();
  const std::size_t nets = n.net_count();

  std::vector<std::uint32_t> drivers(nets, 0);
  for (NetId in : n.inputs()) ++drivers[in];
  std::map<std::string, std::size_t> ids;
  for (const auto& c : cells) {
    if (c.output != kNoNet && c.output < nets) ++drivers[c.output];
    if (++ids[c.id] == 2) {
      out.push_back({ViolationKind::DuplicateCellId, "cell id '" + c.id + "' used more than once",
                     {c.id}});
    }
    if (c.inputs.size() != arity(c.kind)) {
      out.push_back({ViolationKind::BadArity,
                     "cell '" + c.id + "' of kind " + std::string(to_string(c.kind)) + " has " +
                         std::to_string(c.inputs.size()) + " inputs",
                     {c.id}});
    }
  }
  for (NetId i = 0; i < nets; ++i) {
    if (drivers[i] > 1) {
      out.push_back({ViolationKind::DuplicateDriver,
                     "net '" + n.net_name(i) + "' has " + std::to_string(drivers[i]) + " drivers",
                     {n.net_name(i)}});
    }
  }

  std::vector<std::uint32_t> readers(nets, 0);
  std::vector<char> reported(nets, 0);
  for (const auto& c : cells) {
    for (NetId in : c.inputs) {
      ++readers[in];
      if (drivers[in] == 0 && !reported[in]) {
        reported[in] = 1;
        out.push_back({ViolationKind::UndrivenNet,
                       "net '" + n.net_name(in) + "' read by cell '" + c.id + "' has no driver",
                       {n.net_name(in), c.id}});
      }
    }
  }
  for (NetId o : n.outputs()) {
    ++readers[o];
    if (drivers[o] == 0) {
      out.push_back({ViolationKind::UndrivenOutput,
                     "primary output '" + n.net_name(o) + "' has no driver", {n.net_name(o)}});
    }
  }

  std::vector<char> dead(nets, 0);
  for (NetId d : n.dead_ends()) dead[d] = 1;
  std::vector<char> is_input(nets, 0);
  for (NetId i : n.inputs()) is_input[i] = 1;
  for (const auto& c : cells) {
    if (c.output == kNoNet || c.output >= nets) continue;
    if (readers[c.output] == 0 && !dead[c.output] && !is_input[c.output]) {
      out.push_back({ViolationKind::DanglingNet,
                     "net '" + n.net_name(c.output) + "' driven by '" + c.id + "' is never read",
                     {n.net_name(c.output), c.id}});
    }
  }

  // Cycle detection only makes sense once every pin index is in range.
  const bool pins_ok = std::all_of(cells.begin(), cells.end(), [&](const Cell& c) {
    return c.output < nets && std::all_of(c.inputs.begin(), c.inputs.end(),
                                          [&](NetId x) { return x < nets; });
  });
  if (pins_ok) {
    auto [order, stuck] = kahn(n);
    if (!stuck.empty()) {
      auto cyc = find_cycle(n, stuck);
      std::string msg = "combinational cycle through";
      for (const auto& s : cyc) msg += " " + s;
      out.push_back({ViolationKind::CombinationalCycle, msg, std::move(cyc)});
    }
  }
  return out;
}

std::vector<std::size_t> topo_order(const Netlist& n) {
  auto [order, stuck] = kahn(n);
  if (!stuck.empty()) {
    auto cyc = find_cycle(n, stuck);
    std::string msg = "combinational cycle through";
    for (const auto& s : cyc) msg += " " + s;
    throw NetlistError(msg, {{ViolationKind::CombinationalCycle, msg, cyc}});
  }
  return order;
}

std::vector<std::uint32_t> fanout_map(const Netlist& n) {
  std::vector<std::uint32_t> f(n.net_count(), 0);
  for (const auto& c : n.cells()) {
    for (NetId in : c.inputs) ++f[in];
  }
  for (NetId o : n.outputs()) ++f[o];
  return f;
}

}  // namespace atd
