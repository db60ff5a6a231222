#include "atd/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "atd/features.hpp"
#include "atd/io.hpp"
#include "atd/rng.hpp"
#include "atd/simulator.hpp"
#include "atd/sta.hpp"

namespace atd {

// ------------------------------------------------------------------ config

std::vector<double> SweepSpec::fractions() const {
  if (!explicit_fractions.empty()) return explicit_fractions;
  std::vector<double> f;
  if (points == 1) return {lo};
  for (int i = 0; i < points; ++i) f.push_back(lo + (hi - lo) * i / (points - 1));
  return f;
}

void ExperimentConfig::check() const {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (bench.width < 4 || bench.width > 64) fail("bench.width must be in [4, 64]");
  if (bench.rounds < 1 || bench.rounds > 10) fail("bench.rounds must be in [1, 10]");
  if (sweep.explicit_fractions.empty() && sweep.points < 1) fail("sweep.points must be at least 1");
  const auto f = sweep.fractions();
  if (f.empty()) fail("sweep is empty");
  for (double x : f) {
    if (!(x > 0.0 && x <= 1.0)) fail("sweep fractions must lie in (0, 1]");
  }
  if (!std::is_sorted(f.begin(), f.end())) fail("sweep fractions must be ascending");
  if (duties.empty()) fail("duty list is empty");
  for (int d : duties) {
    if (std::find(kDutyGrid.begin(), kDutyGrid.end(), d) == kDutyGrid.end()) fail("duty off the 0..100 step 10 grid");
  }
  if (n_random < 0) fail("n_random must be non-negative");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) fail("train_fraction must lie in (0, 1)");
  if (bin == 0) fail("bin size must be at least 1");
  if (batches.empty()) fail("batch list is empty");
  for (auto b : batches) {
    if (b == 0) fail("batch sizes must be at least 1");
  }
  if (variation.enabled && variation.test_seeds.empty()) fail("variation enabled without test instances");
  if (std::abs(variation.global_frac) > 0.2) fail("|variation.global| must be at most 0.2");
  if (variation.local_sigma < 0.0) fail("variation.local_sigma must be non-negative");
  for (const auto& t : trojans) {
    if (t.path_rank < 1) fail("trojan path_rank must be at least 1");
    if (t.tap_count < 1) fail("trojan tap_count must be at least 1");
  }
}

void to_json(nlohmann::json& j, const BenchSpec& s) {
  j = nlohmann::json{{"kind", s.kind == BenchKind::MultShiftAdd ? "MULT_SHIFT_ADD" : "SPN_CIPHER"},
                     {"width", s.width},
                     {"rounds", s.rounds},
                     {"key", s.key.width() ? s.key.to_hex() : ""},
                     {"identity_permutation", s.identity_permutation}};
}

void from_json(const nlohmann::json& j, BenchSpec& s) {
  const auto kind = j.value("kind", std::string("MULT_SHIFT_ADD"));
  if (kind == "MULT_SHIFT_ADD") {
    s.kind = BenchKind::MultShiftAdd;
  } else if (kind == "SPN_CIPHER") {
    s.kind = BenchKind::SpnCipher;
  } else {
    throw ConfigError("unknown bench kind '" + kind + "'");
  }
  s.width = j.value("width", 8);
  s.rounds = j.value("rounds", 4);
  const auto key = j.value("key", std::string());
  s.key = key.empty() ? BitVec(static_cast<std::size_t>(std::max(s.width, 1))) : BitVec::from_hex(key, static_cast<std::size_t>(s.width));
  s.identity_permutation = j.value("identity_permutation", false);
}

void to_json(nlohmann::json& j, const AgingParams& p) {
  j = nlohmann::json{{"vdd", p.vdd},
                     {"vth0", p.vth0},
                     {"dvth_max", p.dvth_max},
                     {"dmu_max_frac", p.dmu_max_frac},
                     {"model", p.model == DvthModel::Linear ? "LINEAR" : "POWER"},
                     {"power_exponent", p.power_exponent}};
}

void from_json(const nlohmann::json& j, AgingParams& p) {
  const AgingParams d;
  p.vdd = j.value("vdd", d.vdd);
  p.vth0 = j.value("vth0", d.vth0);
  p.dvth_max = j.value("dvth_max", d.dvth_max);
  p.dmu_max_frac = j.value("dmu_max_frac", d.dmu_max_frac);
  const auto model = j.value("model", std::string("LINEAR"));
  if (model == "LINEAR") {
    p.model = DvthModel::Linear;
  } else if (model == "POWER") {
    p.model = DvthModel::Power;
  } else {
    throw ConfigError("unknown aging model '" + model + "'");
  }
  p.power_exponent = j.value("power_exponent", d.power_exponent);
}

namespace {

nlohmann::json lib_to_json(const BaseDelayLib& lib) {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t k = 0; k < lib.intrinsic.size(); ++k) {
    j[std::string(to_string(static_cast<CellKind>(k)))] = {lib.intrinsic[k], lib.load_coeff[k]};
  }
  return j;
}

BaseDelayLib lib_from_json(const nlohmann::json& j) {
  BaseDelayLib lib = BaseDelayLib::defaults();
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto kind = cell_kind_from_string(it.key());
    if (!kind) throw ConfigError("delay_lib: unknown cell kind '" + it.key() + "'");
    const auto v = it.value().get<std::vector<double>>();
    if (v.size() != 2 || v[0] < 0.0 || v[1] < 0.0) throw ConfigError("delay_lib entries are [intrinsic_ps, load_ps]");
    lib.intrinsic[static_cast<std::size_t>(*kind)] = v[0];
    lib.load_coeff[static_cast<std::size_t>(*kind)] = v[1];
  }
  return lib;
}

}  // namespace

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  nlohmann::json sweep{{"lo", c.sweep.lo}, {"hi", c.sweep.hi}, {"points", c.sweep.points}};
  if (!c.sweep.explicit_fractions.empty()) sweep["fractions"] = c.sweep.explicit_fractions;
  j = nlohmann::json{{"name", c.name},
                     {"seed", c.seed},
                     {"bench", c.bench},
                     {"trojans", c.trojans},
                     {"aging", c.aging},
                     {"delay_lib", lib_to_json(c.lib)},
                     {"duties", c.duties},
                     {"sweep", sweep},
                     {"patterns", {{"n_random", c.n_random}, {"seed", c.pattern_seed}}},
                     {"train_fraction", c.train_fraction},
                     {"bin", c.bin},
                     {"batches", c.batches},
                     {"variation",
                      {{"enabled", c.variation.enabled},
                       {"global", c.variation.global_frac},
                       {"local_sigma", c.variation.local_sigma},
                       {"test_seeds", c.variation.test_seeds},
                       {"train_seeds", c.variation.train_seeds}}},
                     {"detector", c.detector},
                     {"persist_grids", c.persist_grids}};
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  const ExperimentConfig d;
  c.name = j.value("name", d.name);
  c.seed = j.value("seed", d.seed);
  if (j.contains("bench")) c.bench = j.at("bench").get<BenchSpec>();
  if (j.contains("trojans")) c.trojans = j.at("trojans").get<std::vector<TrojanSpec>>();
  if (j.contains("aging")) c.aging = j.at("aging").get<AgingParams>();
  if (j.contains("delay_lib")) c.lib = lib_from_json(j.at("delay_lib"));
  c.duties = j.value("duties", d.duties);
  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    c.sweep.lo = s.value("lo", d.sweep.lo);
    c.sweep.hi = s.value("hi", d.sweep.hi);
    c.sweep.points = s.value("points", d.sweep.points);
    c.sweep.explicit_fractions = s.value("fractions", std::vector<double>{});
  }
  if (j.contains("patterns")) {
    c.n_random = j.at("patterns").value("n_random", d.n_random);
    c.pattern_seed = j.at("patterns").value("seed", d.pattern_seed);
  }
  c.train_fraction = j.value("train_fraction", d.train_fraction);
  c.bin = j.value("bin", d.bin);
  c.batches = j.value("batches", d.batches);
  if (j.contains("variation")) {
    const auto& v = j.at("variation");
    c.variation.enabled = v.value("enabled", false);
    c.variation.global_frac = v.value("global", d.variation.global_frac);
    c.variation.local_sigma = v.value("local_sigma", d.variation.local_sigma);
    c.variation.test_seeds = v.value("test_seeds", std::vector<std::uint64_t>{});
    c.variation.train_seeds = v.value("train_seeds", std::vector<std::uint64_t>{});
  }
  if (j.contains("detector")) c.detector = j.at("detector").get<DetectorConfig>();
  c.persist_grids = j.value("persist_grids", d.persist_grids);
}

ExperimentConfig load_config(const std::filesystem::path& p) {
  const auto text = read_file(p);
  try {
    auto cfg = nlohmann::json::parse(text).get<ExperimentConfig>();
    cfg.check();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(p.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(p.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------- pipeline

std::vector<double> sweep_clocks(const Netlist& n, const ExperimentConfig& cfg, double* t_cp) {
  const auto a0 = annotate(n, cfg.lib, cfg.aging, 0, std::nullopt);
  const double tcp = max_arrival(n, a0);
  if (t_cp) *t_cp = tcp;
  std::vector<double> clocks;
  for (double f : cfg.sweep.fractions()) clocks.push_back(f * tcp);
  return clocks;
}

std::vector<DelayAnnotation> annotations_for(const Netlist& n, const ExperimentConfig& cfg,
                                             const std::optional<VariationSpec>& v) {
  std::vector<DelayAnnotation> out;
  for (int d : cfg.duties) out.push_back(annotate(n, cfg.lib, cfg.aging, d, v));
  return out;
}

std::vector<BitVec> dormant_patterns(std::size_t width, const ExperimentConfig& cfg) {
  auto ps = gen_patterns(static_cast<int>(width), cfg.n_random, cfg.pattern_seed);
  std::vector<BitVec> out;
  for (auto& x : ps.inputs) {
    const bool fires = std::any_of(cfg.trojans.begin(), cfg.trojans.end(), [&](const auto& t) { return triggers(t, x); });
    if (!fires) out.push_back(std::move(x));
  }
  return out;
}

PatternSplit split_patterns(std::size_t width, const ExperimentConfig& cfg) {
  auto pool = dormant_patterns(width, cfg);
  Rng rng(stream_seed(cfg.seed, "split"));
  rng.shuffle(pool.begin(), pool.end());
  const auto n_train = static_cast<std::ptrdiff_t>(cfg.train_fraction * static_cast<double>(pool.size()));
  return {{pool.begin(), pool.begin() + n_train}, {pool.begin() + n_train, pool.end()}};
}

const ComparisonResult& ExperimentResult::primary(std::size_t batch) const {
  const std::string want = area_fractions.empty() ? "none" : "trojan0";
  for (const auto& c : comparisons) {
    if (c.trojan == want && c.instance == "pooled" && c.batch == batch) return c;
  }
  throw std::out_of_range("no pooled result for batch size " + std::to_string(batch));
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

template <class F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

struct IcUnderTest {
  std::string label;
  std::optional<VariationSpec> variation;
};

struct Scored {
  std::vector<double> clean;
  std::vector<std::vector<double>> trojan;  // per Trojan
};

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::optional<std::filesystem::path>& out) {
  cfg.check();
  ExperimentResult res;
  auto persist = [&](const std::string& rel, const std::string& text) {
    if (out) write_file(*out / rel, text);
  };
  if (out) persist("config.json", nlohmann::json(cfg).dump(2) + "\n");

  const Netlist clean = stage("gen-bench", [&] { return generate(cfg.bench); });
  const int n_read = clean.read_cycle().value_or(1);
  persist("clean.net", serialize_netlist(clean));

  const auto a0 = stage("annotate", [&] {
    auto a = annotate(clean, cfg.lib, cfg.aging, 0, std::nullopt);
    res.t_cp = max_arrival(clean, a);
    for (double f : cfg.sweep.fractions()) res.clocks.push_back(f * res.t_cp);
    if (out) {
      for (const auto& ann : annotations_for(clean, cfg, std::nullopt)) {
        persist("annotations/clean_d" + std::to_string(ann.duty) + ".json",
                annotation_to_json(clean, ann).dump() + "\n");
      }
    }
    return a;
  });

  std::vector<Netlist> trojaned;
  nlohmann::json trojan_info = nlohmann::json::array();
  stage("insert-trojan", [&] {
    for (std::size_t i = 0; i < cfg.trojans.size(); ++i) {
      auto ins = insert_trojan(clean, cfg.trojans[i], a0);
      res.area_fractions.push_back(area_fraction(clean, ins.netlist));
      std::vector<std::string> taps;
      for (auto t : ins.taps) taps.push_back(clean.net_name(t));
      trojan_info.push_back({{"spec", cfg.trojans[i]},
                             {"area_fraction", res.area_fractions.back()},
                             {"taps", taps},
                             {"tap_shortfall", ins.tap_shortfall},
                             {"leak_outputs", ins.leak_outputs},
                             {"cells_added", ins.added_cells.size()}});
      persist("trojan" + std::to_string(i) + ".net", serialize_netlist(ins.netlist));
      trojaned.push_back(std::move(ins.netlist));
    }
    return 0;
  });

  std::vector<BitVec> train_in, test_in;
  stage("patterns", [&] {
    auto split = split_patterns(clean.inputs().size(), cfg);
    train_in = std::move(split.train);
    test_in = std::move(split.test);
    res.train_inputs = train_in.size();
    res.test_inputs = test_in.size();
    persist("patterns_train.txt", patterns_to_text(train_in, clean.inputs().size()));
    persist("patterns_test.txt", patterns_to_text(test_in, clean.inputs().size()));
    return 0;
  });

  auto variation_of = [&](std::uint64_t seed) {
    return VariationSpec::for_instance(seed, cfg.variation.global_frac, cfg.variation.local_sigma);
  };
  auto bit_errors = [](const std::vector<FeatureTensor>& ts, std::vector<double>& dst) {
    for (const auto& t : ts) {
      double s = 0.0;
      for (std::size_t e = 0; e < t.values.size(); e += kFeatures) s += t.values[e] + t.values[e + 1];
      dst.push_back(s);
    }
  };
  auto run_sweep = [&](const Netlist& n, const std::optional<VariationSpec>& v, const std::vector<BitVec>& inputs,
                       const std::string& tag) {
    const auto grid = sweep(n, annotations_for(n, cfg, v), res.clocks, inputs, n_read);
    if (out && cfg.persist_grids) persist("grids/" + tag + ".jsonl", grid_to_jsonl(grid));
    auto ts = feature_tensors(grid);
    if (out && cfg.persist_grids) persist("features/" + tag + ".jsonl", tensors_to_jsonl(ts));
    return ts;
  };

  // Training set: the nominal golden model plus any extra golden instances.
  std::vector<Bin> train_bins;
  stage("sweep", [&] {
    std::vector<IcUnderTest> golden{{"nominal", std::nullopt}};
    for (auto s : cfg.variation.train_seeds) golden.push_back({"ic" + std::to_string(s), variation_of(s)});
    for (const auto& ic : golden) {
      const auto ts = run_sweep(clean, ic.variation, train_in, "train_clean_" + ic.label);
      if (!ic.variation) bit_errors(ts, res.clean_bit_errors);
      auto bins = bin_tensors(ts, cfg.bin);
      train_bins.insert(train_bins.end(), std::make_move_iterator(bins.begin()), std::make_move_iterator(bins.end()));
    }
    return 0;
  });

  const DetectorModel model = stage("train", [&] { return train(train_bins, cfg.detector, cfg.seed, cfg.batches.front(), &res.training); });
  persist("model.json", nlohmann::json(model).dump() + "\n");

  std::vector<IcUnderTest> ics;
  if (cfg.variation.enabled) {
    for (auto s : cfg.variation.test_seeds) ics.push_back({"ic" + std::to_string(s), variation_of(s)});
  } else {
    ics.push_back({"nominal", std::nullopt});
  }

  std::vector<Scored> scored;
  std::vector<FeatureTensor> heat_clean;
  std::vector<std::vector<FeatureTensor>> heat_trojan(trojaned.size());
  stage("test", [&] {
    for (const auto& ic : ics) {
      Scored s;
      const auto ts = run_sweep(clean, ic.variation, test_in, "test_clean_" + ic.label);
      if (!ic.variation) bit_errors(ts, res.clean_bit_errors);
      s.clean = score_all(model, bin_tensors(ts, cfg.bin));
      if (ic.label == ics.front().label) heat_clean = ts;
      for (std::size_t t = 0; t < trojaned.size(); ++t) {
        const auto tt = run_sweep(trojaned[t], ic.variation, test_in, "test_trojan" + std::to_string(t) + "_" + ic.label);
        s.trojan.push_back(score_all(model, bin_tensors(tt, cfg.bin)));
        if (ic.label == ics.front().label) heat_trojan[t] = tt;
      }
      scored.push_back(std::move(s));
    }
    return 0;
  });

  stage("report", [&] {
    const std::size_t n_trojans = trojaned.size();
    const std::size_t cases = std::max<std::size_t>(n_trojans, 1);
    std::string batches_csv = "trojan,instance,batch_size,batch_index,truth,mean_score,verdict\n";
    std::string scores_csv = "netlist,instance,bin_index,score\n";
    for (std::size_t i = 0; i < ics.size(); ++i) {
      for (std::size_t b = 0; b < scored[i].clean.size(); ++b) {
        scores_csv += "clean," + ics[i].label + "," + std::to_string(b) + "," + fmt(scored[i].clean[b]) + "\n";
      }
      for (std::size_t t = 0; t < n_trojans; ++t) {
        for (std::size_t b = 0; b < scored[i].trojan[t].size(); ++b) {
          scores_csv += "trojan" + std::to_string(t) + "," + ics[i].label + "," + std::to_string(b) + "," +
                        fmt(scored[i].trojan[t][b]) + "\n";
        }
      }
    }
    for (std::size_t t = 0; t < cases; ++t) {
      const std::string label = n_trojans ? "trojan" + std::to_string(t) : "none";
      for (auto batch : cfg.batches) {
        std::vector<LabeledBatch> pooled_clean, pooled_trojan;
        for (std::size_t i = 0; i < ics.size(); ++i) {
          std::vector<LabeledBatch> cl, tr;
          for (auto& g : batch_scores(scored[i].clean, batch)) cl.push_back({std::move(g), false});
          if (n_trojans) {
            for (auto& g : batch_scores(scored[i].trojan[t], batch)) tr.push_back({std::move(g), true});
          }
          auto emit = [&](const std::vector<LabeledBatch>& v) {
            for (std::size_t k = 0; k < v.size(); ++k) {
              const auto& lb = v[k];
              const double mean = std::accumulate(lb.scores.begin(), lb.scores.end(), 0.0) / static_cast<double>(lb.scores.size());
              batches_csv += label + "," + ics[i].label + "," + std::to_string(batch) + "," + std::to_string(k) + "," +
                             (lb.trojaned ? "TROJANED" : "CLEAN") + "," + fmt(mean) + "," + to_string(vote(lb.scores)) + "\n";
            }
          };
          emit(cl);
          emit(tr);
          std::vector<LabeledBatch> all = cl;
          all.insert(all.end(), tr.begin(), tr.end());
          res.comparisons.push_back({label, ics[i].label, batch, evaluate(all), evaluate(cl), tr.empty() ? EvalReport{} : evaluate(tr)});
          pooled_clean.insert(pooled_clean.end(), cl.begin(), cl.end());
          pooled_trojan.insert(pooled_trojan.end(), tr.begin(), tr.end());
        }
        std::vector<LabeledBatch> all = pooled_clean;
        all.insert(all.end(), pooled_trojan.begin(), pooled_trojan.end());
        res.comparisons.push_back({label, "pooled", batch, evaluate(all), evaluate(pooled_clean),
                                   pooled_trojan.empty() ? EvalReport{} : evaluate(pooled_trojan)});
      }
    }

    std::string roc_csv = "trojan,batch_size,fpr,tpr,threshold\n";
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& c : res.comparisons) {
      auto strip = [](EvalReport r) {
        r.roc.clear();
        return r;
      };
      comps.push_back({{"trojan", c.trojan},
                       {"instance", c.instance},
                       {"batch_size", c.batch},
                       {"all", strip(c.report)},
                       {"clean_only", strip(c.clean_only)},
                       {"trojan_only", strip(c.trojan_only)}});
      if (c.instance == "pooled") {
        for (const auto& p : c.report.roc) {
          roc_csv += c.trojan + "," + std::to_string(c.batch) + "," + fmt(p.fpr) + "," + fmt(p.tpr) + "," + fmt(p.threshold) + "\n";
        }
      }
    }

    std::string heat = "netlist,clock_fraction,clock_ps,duty,f1,f2,f3,f4\n";
    auto heat_rows = [&](const std::string& label, const std::vector<FeatureTensor>& ts) {
      if (ts.empty()) return;
      const auto fr = cfg.sweep.fractions();
      for (std::size_t i = 0; i < ts.front().n_clocks; ++i) {
        for (std::size_t j = 0; j < ts.front().n_duties; ++j) {
          double m[kFeatures] = {0, 0, 0, 0};
          for (const auto& t : ts) {
            for (std::size_t k = 0; k < kFeatures; ++k) m[k] += t.at(i, j, k);
          }
          heat += label + "," + fmt(fr[i]) + "," + fmt(res.clocks[i]) + "," + std::to_string(cfg.duties[j]);
          for (double v : m) heat += "," + fmt(v / static_cast<double>(ts.size()));
          heat += "\n";
        }
      }
    };
    heat_rows("clean", heat_clean);
    for (std::size_t t = 0; t < n_trojans; ++t) heat_rows("trojan" + std::to_string(t), heat_trojan[t]);

    const auto zero_err = std::count(res.clean_bit_errors.begin(), res.clean_bit_errors.end(), 0.0);
    nlohmann::json report{
        {"name", cfg.name},
        {"seed", cfg.seed},
        {"t_cp_ps", res.t_cp},
        {"n_read", n_read},
        {"clocks_ps", res.clocks},
        {"duties", cfg.duties},
        {"cells", {{"clean", clean.cells().size()}}},
        {"trojans", trojan_info},
        {"train_inputs", res.train_inputs},
        {"test_inputs", res.test_inputs},
        {"training",
         {{"bins", train_bins.size()},
          {"initial_mse", res.training.initial_mse},
          {"final_mse", res.training.final_mse},
          {"train_outlier_fraction", res.training.train_outlier_fraction},
          {"svm_kkt_residual", res.training.svm.kkt_residual},
          {"svm_alpha_sum", res.training.svm.alpha_sum},
          {"svm_iterations", res.training.svm.iterations},
          {"svm_support_vectors", model.svm.sv.size()}}},
        {"clean_zero_error_fraction",
         res.clean_bit_errors.empty() ? 0.0 : static_cast<double>(zero_err) / static_cast<double>(res.clean_bit_errors.size())},
        {"comparisons", comps}};
    persist("report.json", report.dump(2) + "\n");
    persist("batches.csv", batches_csv);
    persist("scores.csv", scores_csv);
    persist("roc.csv", roc_csv);
    persist("heatmap.csv", heat);
    return 0;
  });
  return res;
}

}  // namespace atd
