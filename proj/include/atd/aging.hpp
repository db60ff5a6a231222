#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "atd/netlist.hpp"

namespace atd {

enum class DvthModel { Linear, Power };

/// Long-term aging parameters feeding the on-current delay law
/// t_d ∝ 1 / (μ (Vdd - Vth)^2).
struct AgingParams {
  double vdd = 1.1;
  double vth0 = 0.40;
  double dvth_max = 0.050;     // threshold shift at 100% duty
  double dmu_max_frac = 0.05;  // relative mobility loss at 100% duty
  DvthModel model = DvthModel::Linear;
  double power_exponent = 1.0;  // used when model == Power
};

/// The 11 duty-cycle stress levels 0, 10, ..., 100.
inline constexpr std::array<int, 11> kDutyGrid = {0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100};

/// Aged-to-fresh delay ratio at `duty` percent. Throws std::invalid_argument
/// for a duty off the grid or parameters that leave no overdrive.
double aging_factor(const AgingParams& p, int duty);

struct BaseDelayLib {
  std::array<double, 12> intrinsic{};  // ps, indexed by CellKind
  std::array<double, 12> load_coeff{};  // ps per extra load

  static BaseDelayLib defaults();
  double intrinsic_of(CellKind k) const { return intrinsic[static_cast<std::size_t>(k)]; }
  double load_of(CellKind k) const { return load_coeff[static_cast<std::size_t>(k)]; }
};

/// Manufacturing variation for one simulated IC instance.
struct VariationSpec {
  double global_frac = 0.05;  // signed, applied to every cell
  double local_sigma = 0.04;  // per-cell Gaussian, truncated
  double truncate_sigma = 3.0;
  std::uint64_t seed = 0;

  /// Instance with |global| = magnitude and a sign drawn from `seed`.
  static VariationSpec for_instance(std::uint64_t seed, double magnitude = 0.05,
                                    double local_sigma = 0.04);
};

/// Per-cell propagation delays (ps) aligned with Netlist::cells().
struct DelayAnnotation {
  int duty = 0;
  std::optional<std::uint64_t> variation_seed;
  std::vector<double> delay;
};

/// Unperturbed, unaged delay of each cell including its load term.
std::vector<double> base_delays(const Netlist& n, const BaseDelayLib& lib);

DelayAnnotation annotate(const Netlist& n, const BaseDelayLib& lib, const AgingParams& p,
                         int duty, const std::optional<VariationSpec>& v);

/// Per-cell multiplicative variation factor (1 + global)(1 + local).
double variation_multiplier(const VariationSpec& v, const std::string& cell_id);

}  // namespace atd
