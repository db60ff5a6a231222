#include "atd/simulator.hpp"

#include <algorithm>
#include <string>

#include "atd/sta.hpp"

namespace atd {

namespace {

// Arrivals within this window of an edge count as on time.
constexpr double kEdgeEpsilon = 1e-6;

struct Later {
  bool operator()(const SimScratch::Event& x, const SimScratch::Event& y) const noexcept {
    if (x.time != y.time) return x.time > y.time;
    return x.net > y.net;
  }
};

}  // namespace

Simulator::Simulator(const Netlist& n)
    : net_count_(n.net_count()), topo_(topo_order(n)), inputs_(n.inputs()), outputs_(n.outputs()) {
  const auto& cells = n.cells();
  const std::size_t nc = cells.size();
  kind_.resize(nc);
  in0_.assign(nc, 0);
  in1_.assign(nc, 0);
  in2_.assign(nc, 0);
  out_.resize(nc);
  std::vector<std::vector<std::uint32_t>> readers(net_count_);
  for (std::size_t i = 0; i < nc; ++i) {
    const auto& c = cells[i];
    kind_[i] = c.kind;
    out_[i] = c.output;
    if (!c.inputs.empty()) in0_[i] = c.inputs[0];
    if (c.inputs.size() > 1) in1_[i] = c.inputs[1];
    if (c.inputs.size() > 2) in2_[i] = c.inputs[2];
    if (is_sequential(c.kind)) {
      dffs_.push_back(i);
      continue;
    }
    for (NetId in : c.inputs) {
      auto& r = readers[in];
      if (r.empty() || r.back() != i) r.push_back(static_cast<std::uint32_t>(i));
    }
  }
  reader_offset_.resize(net_count_ + 1, 0);
  for (std::size_t k = 0; k < net_count_; ++k) {
    reader_offset_[k + 1] = reader_offset_[k] + readers[k].size();
    readers_.insert(readers_.end(), readers[k].begin(), readers[k].end());
  }
  rest_state_.assign(net_count_, 0);
  for (auto d : dffs_) rest_state_[out_[d]] = cells[d].init ? 1 : 0;
  settle(rest_state_);
}

bool Simulator::eval_cell(std::size_t c, const std::vector<std::uint8_t>& v) const {
  return eval_gate(kind_[c], v[in0_[c]] != 0, v[in1_[c]] != 0, v[in2_[c]] != 0);
}

void Simulator::settle(std::vector<std::uint8_t>& value) const {
  for (auto c : topo_) value[out_[c]] = eval_cell(c, value) ? 1 : 0;
}

BitVec Simulator::evaluate(const BitVec& input, int read_cycle) const {
  if (input.width() != inputs_.size()) throw std::invalid_argument("input width mismatch");
  std::vector<std::uint8_t> v = rest_state_;
  for (std::size_t i = 0; i < inputs_.size(); ++i) v[inputs_[i]] = input.get(i) ? 1 : 0;
  std::vector<std::uint8_t> next(dffs_.size());
  for (int edge = 1; edge < read_cycle; ++edge) {
    settle(v);
    for (std::size_t k = 0; k < dffs_.size(); ++k) next[k] = v[in0_[dffs_[k]]];
    for (std::size_t k = 0; k < dffs_.size(); ++k) v[out_[dffs_[k]]] = next[k];
  }
  settle(v);
  BitVec out(outputs_.size());
  for (std::size_t i = 0; i < outputs_.size(); ++i) out.set(i, v[outputs_[i]] != 0);
  return out;
}

BitVec Simulator::run(std::span<const double> delays, const BitVec& input, const SimConfig& cfg,
                      SimScratch& s) const {
  if (input.width() != inputs_.size()) throw std::invalid_argument("input width mismatch");
  if (delays.size() != kind_.size()) throw std::invalid_argument("delay annotation does not cover netlist");
  if (!(cfg.clock_period > 0.0)) throw std::invalid_argument("clock period must be positive");
  if (cfg.read_cycle < 1) throw std::invalid_argument("read cycle must be at least 1");

  s.value = rest_state_;
  s.pending_value.assign(net_count_, 0);
  s.has_pending.assign(net_count_, 0);
  s.gen.assign(net_count_, 0);
  s.heap.clear();
  s.sampled.resize(dffs_.size());
  std::uint64_t scheduled = 0;

  auto schedule = [&](NetId net, double t, std::uint8_t v) {
    if (s.has_pending[net]) {
      ++s.gen[net];
      if (v == s.value[net]) {
        s.has_pending[net] = 0;  // the replacement is a no-op
        return;
      }
    } else if (v == s.value[net]) {
      return;
    } else {
      ++s.gen[net];
    }
    if (++scheduled > kEventBudget) {
      throw SimError("event budget of " + std::to_string(kEventBudget) + " exceeded");
    }
    s.has_pending[net] = 1;
    s.pending_value[net] = v;
    s.heap.push_back({t, net, s.gen[net]});
    std::push_heap(s.heap.begin(), s.heap.end(), Later{});
  };

  auto run_until = [&](double limit) {
    while (!s.heap.empty() && s.heap.front().time <= limit) {
      std::pop_heap(s.heap.begin(), s.heap.end(), Later{});
      const auto e = s.heap.back();
      s.heap.pop_back();
      if (e.gen != s.gen[e.net] || !s.has_pending[e.net]) continue;
      s.has_pending[e.net] = 0;
      const std::uint8_t v = s.pending_value[e.net];
      if (v == s.value[e.net]) continue;
      s.value[e.net] = v;
      for (std::size_t r = reader_offset_[e.net]; r < reader_offset_[e.net + 1]; ++r) {
        const auto c = readers_[r];
        schedule(out_[c], e.time + delays[c], eval_cell(c, s.value) ? 1 : 0);
      }
    }
  };

  for (std::size_t i = 0; i < inputs_.size(); ++i) schedule(inputs_[i], 0.0, input.get(i) ? 1 : 0);

  for (int edge = 1; edge < cfg.read_cycle; ++edge) {
    const double t = edge * cfg.clock_period;
    run_until(t + kEdgeEpsilon);
    for (std::size_t k = 0; k < dffs_.size(); ++k) s.sampled[k] = s.value[in0_[dffs_[k]]];
    for (std::size_t k = 0; k < dffs_.size(); ++k) {
      const auto d = dffs_[k];
      schedule(out_[d], t + delays[d], s.sampled[k]);
    }
  }
  run_until(cfg.read_cycle * cfg.clock_period + kEdgeEpsilon);

  BitVec out(outputs_.size());
  for (std::size_t i = 0; i < outputs_.size(); ++i) out.set(i, s.value[outputs_[i]] != 0);
  return out;
}

BitVec simulate(const Netlist& n, const DelayAnnotation& a, const BitVec& input, const SimConfig& cfg) {
  Simulator sim(n);
  SimScratch scratch;
  return sim.run(a.delay, input, cfg, scratch);
}

BitVec golden_output(const Netlist& n, const BitVec& input, const SimConfig& cfg) {
  return Simulator(n).evaluate(input, cfg.read_cycle);
}

BitVec golden_output_timed(const Netlist& n, const BaseDelayLib& lib, const AgingParams& p,
                           const BitVec& input, int read_cycle) {
  const auto a = annotate(n, lib, p, 0, std::nullopt);
  const double tcp = max_arrival(n, a);
  SimConfig cfg{2.0 * std::max(tcp, 1.0), read_cycle};
  return simulate(n, a, input, cfg);
}

namespace {

OutputGrid make_grid(const Netlist& n, const std::vector<DelayAnnotation>& annotations,
                     const std::vector<double>& clocks, const std::vector<BitVec>& inputs) {
  if (clocks.empty()) throw std::invalid_argument("sweep: clock list is empty");
  if (!std::is_sorted(clocks.begin(), clocks.end())) {
    throw std::invalid_argument("sweep: clock list must be ascending");
  }
  if (annotations.empty()) throw std::invalid_argument("sweep: no annotations");
  OutputGrid g;
  g.clocks = clocks;
  for (const auto& a : annotations) {
    if (a.delay.size() != n.cells().size()) throw std::invalid_argument("sweep: annotation does not cover netlist");
    g.duties.push_back(a.duty);
  }
  g.width = n.outputs().size();
  g.rows.resize(inputs.size());
  return g;
}

void fill_row(const Simulator& sim, const std::vector<DelayAnnotation>& annotations,
              const std::vector<double>& clocks, const BitVec& input, int read_cycle, GridRow& row,
              SimScratch& scratch) {
  row.input = input;
  row.golden = sim.evaluate(input, read_cycle);
  const std::size_t na = annotations.size();
  row.observed.assign(clocks.size() * na, BitVec(sim.output_width()));
  row.failed.assign(clocks.size() * na, 0);
  for (std::size_t i = 0; i < clocks.size(); ++i) {
    for (std::size_t j = 0; j < na; ++j) {
      try {
        row.observed[i * na + j] =
            sim.run(annotations[j].delay, input, SimConfig{clocks[i], read_cycle}, scratch);
      } catch (const SimError&) {
        row.failed[i * na + j] = 1;
      }
    }
  }
}

}  // namespace

OutputGrid sweep_serial(const Netlist& n, const std::vector<DelayAnnotation>& annotations,
                        const std::vector<double>& clocks, const std::vector<BitVec>& inputs,
                        int read_cycle) {
  OutputGrid g = make_grid(n, annotations, clocks, inputs);
  const Simulator sim(n);
  SimScratch scratch;
  for (std::size_t r = 0; r < inputs.size(); ++r) {
    fill_row(sim, annotations, clocks, inputs[r], read_cycle, g.rows[r], scratch);
  }
  return g;
}

OutputGrid sweep(const Netlist& n, const std::vector<DelayAnnotation>& annotations,
                 const std::vector<double>& clocks, const std::vector<BitVec>& inputs,
                 int read_cycle) {
  OutputGrid g = make_grid(n, annotations, clocks, inputs);
  const Simulator sim(n);
  const auto count = static_cast<std::int64_t>(inputs.size());
#pragma omp parallel
  {
    SimScratch scratch;
#pragma omp for schedule(dynamic, 4)
    for (std::int64_t r = 0; r < count; ++r) {
      fill_row(sim, annotations, clocks, inputs[static_cast<std::size_t>(r)], read_cycle,
               g.rows[static_cast<std::size_t>(r)], scratch);
    }
  }
  return g;
}

}  // namespace atd
