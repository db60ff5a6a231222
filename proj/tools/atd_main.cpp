#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <omp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "atd/experiment.hpp"
#include "atd/io.hpp"
#include "atd/sta.hpp"

namespace fs = std::filesystem;
using namespace atd;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kStage = 3 };

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  int workers = 0;
};

ExperimentConfig effective_config(const Globals& g) {
  ExperimentConfig cfg = g.config.empty() ? ExperimentConfig{} : load_config(g.config);
  if (g.seed) cfg.seed = *g.seed;
  cfg.check();
  return cfg;
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

std::vector<FeatureTensor> load_features(const std::string& path) { return tensors_from_jsonl(read_file(path)); }

std::optional<VariationSpec> variation_opt(const ExperimentConfig& cfg, const std::optional<std::uint64_t>& seed) {
  if (!seed) return std::nullopt;
  return VariationSpec::for_instance(*seed, cfg.variation.global_frac, cfg.variation.local_sigma);
}

std::string annotation_name(const std::string& stem, int duty, const std::optional<std::uint64_t>& seed) {
  return stem + (seed ? "_ic" + std::to_string(*seed) : std::string()) + "_d" + std::to_string(duty) + ".json";
}

void print_report(const std::string& label, const EvalReport& r) {
  std::printf("%-24s acc %.4f  prec %.4f  recall %.4f  f1 %.4f  auc %.4f  (TP %zu FP %zu TN %zu FN %zu)\n",
              label.c_str(), r.accuracy, r.precision, r.recall, r.f1, r.auc, r.tp, r.fp, r.tn, r.fn);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Aging-aware over-clocking Trojan detection workbench"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "experiment config (JSON)");
  app.add_option("--seed", g.seed, "override the config seed");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--workers", g.workers, "OpenMP threads for the sweep (0 = runtime default)")->check(CLI::NonNegativeNumber);

  std::string split = "all";
  std::string netlist, reference, patterns, annotations, grid, model_path, clean_feat, run_dir;
  std::vector<std::string> feature_files, trojan_feats;
  std::optional<std::uint64_t> ic_seed;

  auto* gen = app.add_subcommand("gen-bench", "generate the clean benchmark netlist");

  auto* ins = app.add_subcommand("insert-trojan", "insert the configured Trojans into a clean netlist");
  ins->add_option("--netlist", netlist, "clean netlist")->required()->check(CLI::ExistingFile);

  auto* ann = app.add_subcommand("annotate", "write per-duty delay annotations");
  ann->add_option("--netlist", netlist, "netlist to annotate")->required()->check(CLI::ExistingFile);
  ann->add_option("--ic-seed", ic_seed, "simulated IC instance (process variation)");

  auto* swp = app.add_subcommand("sweep", "simulate the clock x aging grid");
  swp->add_option("--netlist", netlist, "netlist under test")->required()->check(CLI::ExistingFile);
  swp->add_option("--reference", reference, "clean netlist defining t_CP (default: --netlist)")->check(CLI::ExistingFile);
  swp->add_option("--patterns", patterns, "pattern file (default: the config's dormant pattern set)")->check(CLI::ExistingFile);
  swp->add_option("--annotations", annotations, "directory written by annotate (default: computed)")
      ->check(CLI::ExistingDirectory);
  swp->add_option("--ic-seed", ic_seed, "simulated IC instance (process variation)");
  swp->add_option("--split", split, "part of the config's pattern set: all, train or test (ignored with --patterns)")
      ->check(CLI::IsMember({"all", "train", "test"}));

  auto* fea = app.add_subcommand("features", "extract feature tensors from an output grid");
  fea->add_option("--grid", grid, "grid JSONL from sweep")->required()->check(CLI::ExistingFile);
  fea->add_option("--netlist", netlist, "netlist the grid was simulated on")->required()->check(CLI::ExistingFile);

  auto* trn = app.add_subcommand("train", "train the detector on clean feature tensors");
  trn->add_option("--features", feature_files, "clean feature JSONL file(s)")->required()->check(CLI::ExistingFile);

  auto* tst = app.add_subcommand("test", "score clean and Trojan feature tensors");
  tst->add_option("--model", model_path, "model.json from train")->required()->check(CLI::ExistingFile);
  tst->add_option("--clean", clean_feat, "clean-IC feature JSONL")->required()->check(CLI::ExistingFile);
  tst->add_option("--trojan", trojan_feats, "Trojan-IC feature JSONL (repeatable)")->check(CLI::ExistingFile);

  auto* rep = app.add_subcommand("report", "summarise a finished run directory");
  rep->add_option("--run", run_dir, "run directory (default: --out)")->check(CLI::ExistingDirectory);

  auto* run = app.add_subcommand("run", "full pipeline");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  if (g.workers > 0) omp_set_num_threads(g.workers);

  try {
    const ExperimentConfig cfg = effective_config(g);
    const fs::path out(g.out);

    if (*gen) {
      const auto n = generate(cfg.bench);
      save_netlist(out / "clean.net", n);
      const auto st = stats(n);
      std::printf("clean.net: %zu gates, %zu flops, %zu inputs, %zu outputs, n_read %d\n", st.gate_count, st.dff_count,
                  n.inputs().size(), n.outputs().size(), n.read_cycle().value_or(1));
    } else if (*ins) {
      const auto n = load_netlist(netlist);
      const auto a0 = annotate(n, cfg.lib, cfg.aging, 0, std::nullopt);
      nlohmann::json info = nlohmann::json::array();
      for (std::size_t i = 0; i < cfg.trojans.size(); ++i) {
        const auto r = insert_trojan(n, cfg.trojans[i], a0);
        const auto name = "trojan" + std::to_string(i) + ".net";
        save_netlist(out / name, r.netlist);
        const double af = area_fraction(n, r.netlist);
        info.push_back({{"file", name}, {"spec", cfg.trojans[i]}, {"area_fraction", af},
                        {"tap_shortfall", r.tap_shortfall}, {"leak_outputs", r.leak_outputs}});
        std::printf("%s: %zu cells added, area fraction %.4f%s\n", name.c_str(), r.added_cells.size(), af,
                    r.tap_shortfall ? " (tap shortfall)" : "");
      }
      write_file(out / "trojans.json", info.dump(2) + "\n");
    } else if (*ann) {
      const auto n = load_netlist(netlist);
      const auto v = variation_opt(cfg, ic_seed);
      for (const auto& a : annotations_for(n, cfg, v)) {
        write_file(out / "annotations" / annotation_name(stem_of(netlist), a.duty, ic_seed),
                   annotation_to_json(n, a).dump() + "\n");
        std::printf("duty %3d: max arrival %.3f ps\n", a.duty, max_arrival(n, a));
      }
    } else if (*swp) {
      const auto n = load_netlist(netlist);
      const auto ref = reference.empty() ? n : load_netlist(reference);
      double t_cp = 0.0;
      const auto clocks = sweep_clocks(ref, cfg, &t_cp);
      std::vector<BitVec> inputs;
      if (patterns.empty() && split == "all") {
        inputs = dormant_patterns(n.inputs().size(), cfg);
      } else if (patterns.empty()) {
        auto parts = split_patterns(n.inputs().size(), cfg);
        inputs = split == "train" ? std::move(parts.train) : std::move(parts.test);
      } else {
        inputs = patterns_from_text(read_file(patterns));
      }
      std::vector<DelayAnnotation> anns;
      if (annotations.empty()) {
        anns = annotations_for(n, cfg, variation_opt(cfg, ic_seed));
      } else {
        for (int d : cfg.duties) {
          const auto p = fs::path(annotations) / annotation_name(stem_of(netlist), d, ic_seed);
          try {
            anns.push_back(annotation_from_json(n, nlohmann::json::parse(read_file(p))));
          } catch (const nlohmann::json::exception& e) {
            throw DataError(p.string() + ": " + e.what());
          }
        }
      }
      const auto og = sweep(n, anns, clocks, inputs, n.read_cycle().value_or(1));
      const auto name = stem_of(netlist) + (ic_seed ? "_ic" + std::to_string(*ic_seed) : std::string()) +
                        (patterns.empty() && split != "all" ? "_" + split : std::string()) + ".grid.jsonl";
      write_file(out / name, grid_to_jsonl(og));
      std::size_t failed = 0;
      for (const auto& r : og.rows) failed += static_cast<std::size_t>(std::count(r.failed.begin(), r.failed.end(), 1));
      std::printf("%s: %zu inputs x %zu clocks x %zu duties (t_CP %.3f ps), %zu failed cells\n", name.c_str(),
                  og.rows.size(), og.n_clocks(), og.n_duties(), t_cp, failed);
    } else if (*fea) {
      const auto n = load_netlist(netlist);
      const auto og = grid_from_jsonl(read_file(grid), n.inputs().size(), n.outputs().size());
      const auto name = stem_of(stem_of(grid)) + ".features.jsonl";
      write_file(out / name, tensors_to_jsonl(feature_tensors(og)));
      std::printf("%s: %zu tensors\n", name.c_str(), og.rows.size());
    } else if (*trn) {
      std::vector<FeatureTensor> ts;
      for (const auto& f : feature_files) {
        auto part = load_features(f);
        ts.insert(ts.end(), part.begin(), part.end());
      }
      TrainingLog log;
      const auto m = train(bin_tensors(ts, cfg.bin), cfg.detector, cfg.seed, cfg.batches.front(), &log);
      write_file(out / "model.json", nlohmann::json(m).dump() + "\n");
      std::printf("model.json: MSE %.6g -> %.6g, training outliers %.4f, %zu support vectors\n", log.initial_mse,
                  log.final_mse, log.train_outlier_fraction, m.svm.sv.size());
    } else if (*tst) {
      DetectorModel m;
      try {
        m = nlohmann::json::parse(read_file(model_path)).get<DetectorModel>();
      } catch (const nlohmann::json::exception& e) {
        throw DataError(model_path + ": " + e.what());
      }
      const auto clean_scores = score_all(m, bin_tensors(load_features(clean_feat), m.k));
      std::vector<std::vector<double>> trojan_scores;
      for (const auto& f : trojan_feats) trojan_scores.push_back(score_all(m, bin_tensors(load_features(f), m.k)));
      nlohmann::json results = nlohmann::json::array();
      for (auto batch : cfg.batches) {
        std::vector<LabeledBatch> cl;
        for (auto& s : batch_scores(clean_scores, batch)) cl.push_back({std::move(s), false});
        if (trojan_feats.empty()) {
          const auto r = evaluate(cl);
          results.push_back({{"trojan", "none"}, {"batch_size", batch}, {"report", r}});
          print_report("clean B=" + std::to_string(batch), r);
        }
        for (std::size_t t = 0; t < trojan_feats.size(); ++t) {
          auto all = cl;
          for (auto& s : batch_scores(trojan_scores[t], batch)) all.push_back({std::move(s), true});
          const auto r = evaluate(all);
          results.push_back({{"trojan", stem_of(trojan_feats[t])}, {"batch_size", batch}, {"report", r}});
          print_report(stem_of(trojan_feats[t]) + " B=" + std::to_string(batch), r);
        }
      }
      write_file(out / "test_report.json", results.dump(2) + "\n");
    } else if (*rep) {
      const fs::path dir = run_dir.empty() ? out : fs::path(run_dir);
      nlohmann::json r;
      try {
        r = nlohmann::json::parse(read_file(dir / "report.json"));
        std::printf("%s: t_CP %.3f ps, %zu train / %zu test inputs, clean zero-error fraction %.4f\n",
                    r.at("name").get<std::string>().c_str(), r.at("t_cp_ps").get<double>(),
                    r.at("train_inputs").get<std::size_t>(), r.at("test_inputs").get<std::size_t>(),
                    r.at("clean_zero_error_fraction").get<double>());
        for (const auto& t : r.at("trojans")) {
          std::printf("  Trojan %s: area fraction %.4f\n", t.at("spec").at("archetype").get<std::string>().c_str(),
                      t.at("area_fraction").get<double>());
        }
        for (const auto& c : r.at("comparisons")) {
          const auto& a = c.at("all");
          std::printf("  %-8s %-8s B=%-3zu acc %.4f  recall %.4f  clean acc %.4f  auc %.4f\n",
                      c.at("trojan").get<std::string>().c_str(), c.at("instance").get<std::string>().c_str(),
                      c.at("batch_size").get<std::size_t>(), a.at("accuracy").get<double>(),
                      c.at("trojan_only").at("recall").get<double>(), c.at("clean_only").at("accuracy").get<double>(),
                      a.at("auc").get<double>());
        }
      } catch (const nlohmann::json::exception& e) {
        throw DataError((dir / "report.json").string() + ": " + e.what());
      }
    } else if (*run) {
      const auto res = run_experiment(cfg, out);
      std::printf("%s: t_CP %.3f ps, %zu train / %zu test inputs\n", cfg.name.c_str(), res.t_cp, res.train_inputs,
                  res.test_inputs);
      for (const auto& c : res.comparisons) {
        if (c.instance == "pooled") print_report(c.trojan + " B=" + std::to_string(c.batch), c.report);
      }
      std::printf("artifacts in %s\n", out.string().c_str());
    }
  } catch (const StageError& e) {
    std::cerr << "stage failed: " << e.what() << "\n";
    return kStage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kData;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const NetlistError& e) {
    std::cerr << "netlist error: " << e.what() << "\n";
    return kData;
  } catch (const TrojanError& e) {
    std::cerr << "Trojan error: " << e.what() << "\n";
    return kData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << "\n";
    return kStage;
  }
  return kOk;
}
