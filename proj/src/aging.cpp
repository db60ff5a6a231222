#include "atd/aging.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "atd/rng.hpp"

namespace atd {

double aging_factor(const AgingParams& p, int duty) {
  if (std::find(kDutyGrid.begin(), kDutyGrid.end(), duty) == kDutyGrid.end()) {
    throw std::invalid_argument("duty " + std::to_string(duty) + "% is not on the 0..100 step 10 grid");
  }
  const double s = duty / 100.0;
  const double stress = p.model == DvthModel::Linear ? s : std::pow(s, p.power_exponent);
  const double dvth = p.dvth_max * stress;
  const double overdrive_fresh = p.vdd - p.vth0;
  const double overdrive_aged = overdrive_fresh - dvth;
  const double mobility_ratio = 1.0 - p.dmu_max_frac * s;  // mu(duty) / mu0
  if (overdrive_fresh <= 0.0 || overdrive_aged <= 0.0 || mobility_ratio <= 0.0) {
    throw std::invalid_argument("aging parameters leave no transistor overdrive");
  }
  const double r = overdrive_fresh / overdrive_aged;
  return (1.0 / mobility_ratio) * r * r;
}

BaseDelayLib BaseDelayLib::defaults() {
  BaseDelayLib lib;
  auto set = [&](CellKind k, double d, double load) {
    lib.intrinsic[static_cast<std::size_t>(k)] = d;
    lib.load_coeff[static_cast<std::size_t>(k)] = load;
  };
  set(CellKind::Inv, 8, 3);
  set(CellKind::Buf, 10, 3);
  set(CellKind::Nand2, 12, 3);
  set(CellKind::Nor2, 14, 3);
  set(CellKind::And2, 16, 3);
  set(CellKind::Or2, 16, 3);
  set(CellKind::Xor2, 24, 3);
  set(CellKind::Xnor2, 24, 3);
  set(CellKind::Mux2, 22, 3);
  set(CellKind::Dff, 20, 3);
  set(CellKind::Const0, 0, 0);
  set(CellKind::Const1, 0, 0);
  return lib;
}

VariationSpec VariationSpec::for_instance(std::uint64_t seed, double magnitude, double local_sigma) {
  VariationSpec v;
  v.seed = seed;
  v.local_sigma = local_sigma;
  v.global_frac = (stream_seed(seed, "global-sign") & 1U) ? magnitude : -magnitude;
  return v;
}

double variation_multiplier(const VariationSpec& v, const std::string& cell_id) {
  double local = 0.0;
  if (v.local_sigma > 0.0) {
    Rng rng(stream_seed(v.seed, cell_id));
    double z;
    do {
      z = rng.normal();
    } while (std::abs(z) > v.truncate_sigma);
    local = v.local_sigma * z;
  }
  return (1.0 + v.global_frac) * (1.0 + local);
}

std::vector<double> base_delays(const Netlist& n, const BaseDelayLib& lib) {
  const auto fanout = fanout_map(n);
  std::vector<double> d(n.cells().size(), 0.0);
  for (std::size_t i = 0; i < n.cells().size(); ++i) {
    const auto& c = n.cells()[i];
    const double extra = fanout[c.output] > 1 ? static_cast<double>(fanout[c.output] - 1) : 0.0;
    d[i] = lib.intrinsic_of(c.kind) + lib.load_of(c.kind) * extra;
  }
  return d;
}

DelayAnnotation annotate(const Netlist& n, const BaseDelayLib& lib, const AgingParams& p, int duty,
                         const std::optional<VariationSpec>& v) {
  if (v && std::abs(v->global_frac) > 0.2) {
    throw std::invalid_argument("global variation beyond +/-20%");
  }
  if (v && v->local_sigma < 0.0) throw std::invalid_argument("negative local sigma");
  const double factor = aging_factor(p, duty);
  DelayAnnotation a;
  a.duty = duty;
  if (v) a.variation_seed = v->seed;
  a.delay = base_delays(n, lib);
  for (std::size_t i = 0; i < a.delay.size(); ++i) {
    a.delay[i] *= factor;
    if (v && a.delay[i] > 0.0) a.delay[i] *= variation_multiplier(*v, n.cells()[i].id);
  }
  return a;
}

}  // namespace atd
