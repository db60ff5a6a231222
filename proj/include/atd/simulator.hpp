#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "atd/aging.hpp"
#include "atd/bitvec.hpp"
#include "atd/netlist.hpp"

namespace atd {

struct SimConfig {
  double clock_period = 1000.0;  // ps
  int read_cycle = 1;            // outputs sampled just before edge read_cycle
};

/// Raised when a run exceeds the event budget (an oscillating or otherwise
/// unstable configuration).
class SimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scheduled events per run, superseded ones included.
inline constexpr std::uint64_t kEventBudget = 10'000'000;

/// Reusable per-thread buffers for Simulator::run.
struct SimScratch {
  struct Event {
    double time;
    NetId net;
    std::uint32_t gen;
  };
  std::vector<std::uint8_t> value;
  std::vector<std::uint8_t> pending_value;
  std::vector<std::uint8_t> has_pending;
  std::vector<std::uint32_t> gen;
  std::vector<Event> heap;
  std::vector<std::uint8_t> sampled;
};

/// Netlist compiled into flat arrays for event-driven simulation. Holds no
/// delays, so one instance serves every annotation of the same netlist.
class Simulator {
 public:
  explicit Simulator(const Netlist& n);

  /// Event-driven timing simulation. Before t = 0 the network rests in the
  /// settled state for all-zero inputs and reset flops; at t = 0 the inputs
  /// switch to `input`. Each gate re-evaluates on an input change and
  /// schedules its output at t + delay, replacing any pending event on that
  /// net. At every edge k * T (k >= 1) flops sample D, counting arrivals at
  /// exactly the edge, and drive Q after their own delay. Outputs are read at
  /// read_cycle * T under the same arrival rule.
  BitVec run(std::span<const double> delays, const BitVec& input, const SimConfig& cfg,
             SimScratch& scratch) const;

  /// Zero-delay cycle-accurate evaluation (read_cycle - 1 clock edges).
  BitVec evaluate(const BitVec& input, int read_cycle) const;

  std::size_t input_width() const noexcept { return inputs_.size(); }
  std::size_t output_width() const noexcept { return outputs_.size(); }
  std::size_t cell_count() const noexcept { return kind_.size(); }

 private:
  void settle(std::vector<std::uint8_t>& value) const;
  bool eval_cell(std::size_t c, const std::vector<std::uint8_t>& value) const;

  std::size_t net_count_;
  std::vector<CellKind> kind_;
  std::vector<NetId> in0_, in1_, in2_, out_;
  std::vector<std::size_t> topo_;              // combinational cells
  std::vector<std::size_t> reader_offset_;     // CSR: net -> comb readers
  std::vector<std::uint32_t> readers_;
  std::vector<std::size_t> dffs_;
  std::vector<NetId> inputs_, outputs_;
  std::vector<std::uint8_t> rest_state_;       // settled, inputs all zero
};

BitVec simulate(const Netlist& n, const DelayAnnotation& a, const BitVec& input, const SimConfig& cfg);

/// Expected output f(x): zero-delay cycle-accurate evaluation.
BitVec golden_output(const Netlist& n, const BitVec& input, const SimConfig& cfg);

/// The same value obtained by timing simulation at twice the unaged,
/// variation-free critical path delay.
BitVec golden_output_timed(const Netlist& n, const BaseDelayLib& lib, const AgingParams& p,
                           const BitVec& input, int read_cycle);

/// Observed words for one input over every (clock, aging state) pair.
struct GridRow {
  BitVec input;
  BitVec golden;
  std::vector<BitVec> observed;   // index clock * n_duties + duty
  std::vector<std::uint8_t> failed;  // nonzero where the run hit the event budget
};

struct OutputGrid {
  std::vector<double> clocks;  // ps, ascending
  std::vector<int> duties;
  std::size_t width = 0;       // output width m
  std::vector<GridRow> rows;

  std::size_t n_clocks() const noexcept { return clocks.size(); }
  std::size_t n_duties() const noexcept { return duties.size(); }
  const BitVec& at(std::size_t row, std::size_t clock, std::size_t duty) const {
    return rows[row].observed[clock * duties.size() + duty];
  }
};

/// Parallel sweep (OpenMP across inputs). Results are independent of the
/// thread count.
OutputGrid sweep(const Netlist& n, const std::vector<DelayAnnotation>& annotations,
                 const std::vector<double>& clocks, const std::vector<BitVec>& inputs,
                 int read_cycle);

/// Single-threaded reference for sweep().
OutputGrid sweep_serial(const Netlist& n, const std::vector<DelayAnnotation>& annotations,
                        const std::vector<double>& clocks, const std::vector<BitVec>& inputs,
                        int read_cycle);

}  // namespace atd
