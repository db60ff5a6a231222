#include "atd/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "atd/rng.hpp"

namespace atd {

// ---------------------------------------------------------------- scaler

ScalerStats ScalerStats::fit(const Eigen::MatrixXd& samples, double std_floor) {
  ScalerStats s;
  const auto d = static_cast<std::size_t>(samples.rows());
  const double n = static_cast<double>(samples.cols());
  s.mean.resize(d);
  s.stdev.resize(d);
  for (std::size_t r = 0; r < d; ++r) {
    const auto row = samples.row(static_cast<Eigen::Index>(r));
    const double mu = row.sum() / n;
    const double var = (row.array() - mu).square().sum() / n;
    s.mean[r] = mu;
    s.stdev[r] = std::max(std::sqrt(var), std_floor);
  }
  return s;
}

Eigen::VectorXd ScalerStats::transform(const std::vector<double>& x) const {
  if (x.size() != mean.size()) throw std::invalid_argument("scaler: dimension mismatch");
  Eigen::VectorXd z(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) z[static_cast<Eigen::Index>(i)] = (x[i] - mean[i]) / stdev[i];
  return z;
}

Eigen::MatrixXd ScalerStats::transform(const Eigen::MatrixXd& samples) const {
  if (static_cast<std::size_t>(samples.rows()) != mean.size()) throw std::invalid_argument("scaler: dimension mismatch");
  Eigen::MatrixXd z = samples;
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    z.row(r).array() = (z.row(r).array() - mean[static_cast<std::size_t>(r)]) / stdev[static_cast<std::size_t>(r)];
  }
  return z;
}

// ----------------------------------------------------------- autoencoder

Autoencoder::Autoencoder(std::size_t d, std::size_t h1, std::size_t h2, std::uint64_t seed) {
  const std::size_t widths[] = {d, h1, h2, h1, d};
  for (std::size_t l = 0; l < 4; ++l) {
    const auto in = static_cast<Eigen::Index>(widths[l]);
    const auto out = static_cast<Eigen::Index>(widths[l + 1]);
    const double lim = std::sqrt(6.0 / static_cast<double>(in + out));
    Rng rng(stream_seed(seed, "ae-layer-" + std::to_string(l)));
    DenseLayer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd::Zero(out), l < 3};
    for (Eigen::Index c = 0; c < in; ++c) {
      for (Eigen::Index r = 0; r < out; ++r) layer.w(r, c) = rng.uniform(-lim, lim);
    }
    layers_.push_back(std::move(layer));
  }
}

namespace {

Eigen::MatrixXd apply(const DenseLayer& l, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd z = l.w * x;
  z.colwise() += l.b;
  if (l.relu) z = z.cwiseMax(0.0);
  return z;
}

}  // namespace

Eigen::MatrixXd Autoencoder::reconstruct(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd a = x;
  for (const auto& l : layers_) a = apply(l, a);
  return a;
}

Eigen::MatrixXd Autoencoder::encode(const Eigen::MatrixXd& x) const {
  return apply(layers_[1], apply(layers_[0], x));
}

double Autoencoder::loss(const Eigen::MatrixXd& x, double scale) const {
  const double denom = static_cast<double>(x.rows()) * static_cast<double>(x.cols());
  return scale * (reconstruct(x) - x).squaredNorm() / denom;
}

double Autoencoder::gradients(const Eigen::MatrixXd& x, std::vector<Eigen::MatrixXd>& dw,
                              std::vector<Eigen::VectorXd>& db, double scale) const {
  const std::size_t nl = layers_.size();
  std::vector<Eigen::MatrixXd> act(nl + 1);  // post-activation outputs
  act[0] = x;
  for (std::size_t l = 0; l < nl; ++l) act[l + 1] = apply(layers_[l], act[l]);
  const double denom = static_cast<double>(x.rows()) * static_cast<double>(x.cols());
  const Eigen::MatrixXd diff = act[nl] - x;
  const double loss = scale * diff.squaredNorm() / denom;

  dw.resize(nl);
  db.resize(nl);
  Eigen::MatrixXd delta = (2.0 * scale / denom) * diff;
  for (std::size_t l = nl; l-- > 0;) {
    // ReLU gate: post-activation output is positive exactly where z > 0.
    if (layers_[l].relu) delta = delta.cwiseProduct((act[l + 1].array() > 0.0).cast<double>().matrix());
    dw[l] = delta * act[l].transpose();
    db[l] = delta.rowwise().sum();
    if (l > 0) delta = layers_[l].w.transpose() * delta;
  }
  return loss;
}

double gradient_check(const Autoencoder& m, const Eigen::VectorXd& sample, double h) {
  const Eigen::MatrixXd x = sample;
  std::vector<Eigen::MatrixXd> dw;
  std::vector<Eigen::VectorXd> db;
  m.gradients(x, dw, db);
  Autoencoder probe = m;
  // Gate pattern of every hidden unit; z == 0 counts as closed, like apply().
  auto gates = [&]() {
    std::vector<bool> g;
    Eigen::MatrixXd act = x;
    for (const auto& l : probe.layers()) {
      Eigen::MatrixXd z = l.w * act;
      z.colwise() += l.b;
      if (l.relu) {
        for (Eigen::Index i = 0; i < z.size(); ++i) g.push_back(z(i) > 0.0);
        z = z.cwiseMax(0.0);
      }
      act = std::move(z);
    }
    return g;
  };
  const auto base = gates();
  double worst = 0.0;
  auto compare = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + h;
    const double up = probe.loss(x);
    const bool kink_up = gates() != base;
    param = saved - h;
    const double down = probe.loss(x);
    const bool kink_down = gates() != base;
    param = saved;
    // The loss is not differentiable across a gate flip; skip those.
    if (kink_up || kink_down) return;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic - numeric) / denom);
  };
  for (std::size_t l = 0; l < probe.layers().size(); ++l) {
    auto& layer = probe.layers()[l];
    for (Eigen::Index c = 0; c < layer.w.cols(); ++c) {
      for (Eigen::Index r = 0; r < layer.w.rows(); ++r) compare(layer.w(r, c), dw[l](r, c));
    }
    for (Eigen::Index r = 0; r < layer.b.size(); ++r) compare(layer.b[r], db[l][r]);
  }
  return worst;
}

// ------------------------------------------------------- one-class SVM

double OcSvmModel::decision(const Eigen::VectorXd& z) const {
  double s = 0.0;
  for (std::size_t i = 0; i < sv.size(); ++i) s += alpha[i] * std::exp(-gamma * (sv[i] - z).squaredNorm());
  return s - rho;
}

OcSvmModel train_ocsvm(const Eigen::MatrixXd& latents, double nu, double gamma, double tol, OcSvmReport* report) {
  const auto n = static_cast<std::size_t>(latents.cols());
  if (n == 0) throw std::invalid_argument("train_ocsvm: no samples");
  if (!(nu > 0.0 && nu <= 1.0)) throw std::invalid_argument("train_ocsvm: nu must be in (0, 1]");
  const double c = 1.0 / (nu * static_cast<double>(n));
  constexpr double kTau = 1e-12;

  Eigen::VectorXd sq = latents.colwise().squaredNorm().transpose();
  Eigen::MatrixXd q = latents.transpose() * latents;
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
      q(i, j) = std::exp(-gamma * std::max(0.0, sq[i] + sq[j] - 2.0 * q(i, j)));
    }
  }

  std::vector<double> alpha(n, 0.0);
  const auto full = static_cast<std::size_t>(std::floor(nu * static_cast<double>(n)));
  for (std::size_t i = 0; i < std::min(full, n); ++i) alpha[i] = c;
  if (full < n) alpha[full] = 1.0 - static_cast<double>(full) * c;
  std::vector<double> g(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (alpha[i] == 0.0) continue;
    for (std::size_t t = 0; t < n; ++t) g[t] += alpha[i] * q(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i));
  }

  auto gap_and_pair = [&](std::size_t& bi, std::size_t& bj) {
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (alpha[t] < c && -g[t] >= gmax) {
        gmax = -g[t];
        i = t;
      }
    }
    double gmax2 = -std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    std::size_t j = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (alpha[t] <= 0.0) continue;
      gmax2 = std::max(gmax2, g[t]);
      if (i == n) continue;
      const double b = gmax + g[t];
      if (b > 0.0) {
        const auto ii = static_cast<Eigen::Index>(i), tt = static_cast<Eigen::Index>(t);
        double a = q(ii, ii) + q(tt, tt) - 2.0 * q(ii, tt);
        if (a <= 0.0) a = kTau;
        const double obj = -(b * b) / a;
        if (obj <= best) {
          best = obj;
          j = t;
        }
      }
    }
    bi = i;
    bj = j;
    return gmax + gmax2;
  };

  const std::size_t max_iter = std::max<std::size_t>(10'000'000, 100 * n);
  std::size_t iter = 0;
  double gap = 0.0;
  for (; iter < max_iter; ++iter) {
    std::size_t i = n, j = n;
    gap = gap_and_pair(i, j);
    if (gap < tol || i == n || j == n) break;
    const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
    double quad = q(ii, ii) + q(jj, jj) - 2.0 * q(ii, jj);
    if (quad <= 0.0) quad = kTau;
    const double old_i = alpha[i], old_j = alpha[j];
    const double delta = (g[i] - g[j]) / quad;
    const double sum = old_i + old_j;
    double ai = old_i - delta, aj = old_j + delta;
    if (sum > c) {
      if (ai > c) {
        ai = c;
        aj = sum - c;
      }
    } else if (aj < 0.0) {
      aj = 0.0;
      ai = sum;
    }
    if (sum > c) {
      if (aj > c) {
        aj = c;
        ai = sum - c;
      }
    } else if (ai < 0.0) {
      ai = 0.0;
      aj = sum;
    }
    alpha[i] = ai;
    alpha[j] = aj;
    const double di = ai - old_i, dj = aj - old_j;
    for (std::size_t t = 0; t < n; ++t) {
      const auto tt = static_cast<Eigen::Index>(t);
      g[t] += q(tt, ii) * di + q(tt, jj) * dj;
    }
  }
  {
    std::size_t i = n, j = n;
    gap = gap_and_pair(i, j);
  }

  // Offset from free multipliers, else the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] >= c) {
      lb = std::max(lb, g[t]);
    } else if (alpha[t] <= 0.0) {
      ub = std::min(ub, g[t]);
    } else {
      ++n_free;
      sum_free += g[t];
    }
  }
  OcSvmModel m;
  m.gamma = gamma;
  m.nu = nu;
  m.rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0.0) {
      m.sv.push_back(latents.col(static_cast<Eigen::Index>(t)));
      m.alpha.push_back(alpha[t]);
    }
  }
  if (report) {
    report->kkt_residual = std::max(gap, 0.0);
    report->alpha_sum = std::accumulate(alpha.begin(), alpha.end(), 0.0);
    report->alpha_max = *std::max_element(alpha.begin(), alpha.end());
    report->iterations = iter;
    report->alpha = alpha;
  }
  return m;
}

// -------------------------------------------------------------- training

void to_json(nlohmann::json& j, const DetectorConfig& c) {
  j = nlohmann::json{{"h1", c.h1},           {"h2", c.h2},        {"epochs", c.epochs},
                     {"lr", c.lr},           {"momentum", c.momentum}, {"minibatch", c.minibatch},
                     {"nu", c.nu},           {"svm_tol", c.svm_tol}, {"std_floor", c.std_floor},
                     {"min_bins", c.min_bins}};
}

void from_json(const nlohmann::json& j, DetectorConfig& c) {
  const DetectorConfig d;
  c.h1 = j.value("h1", d.h1);
  c.h2 = j.value("h2", d.h2);
  c.epochs = j.value("epochs", d.epochs);
  c.lr = j.value("lr", d.lr);
  c.momentum = j.value("momentum", d.momentum);
  c.minibatch = j.value("minibatch", d.minibatch);
  c.nu = j.value("nu", d.nu);
  c.svm_tol = j.value("svm_tol", d.svm_tol);
  c.std_floor = j.value("std_floor", d.std_floor);
  c.min_bins = j.value("min_bins", d.min_bins);
}

Eigen::MatrixXd bins_to_matrix(const std::vector<Bin>& bins) {
  if (bins.empty()) return {};
  const auto d = static_cast<Eigen::Index>(bins.front().values.size());
  Eigen::MatrixXd x(d, static_cast<Eigen::Index>(bins.size()));
  for (std::size_t b = 0; b < bins.size(); ++b) {
    if (static_cast<Eigen::Index>(bins[b].values.size()) != d) throw std::invalid_argument("bins differ in dimension");
    x.col(static_cast<Eigen::Index>(b)) = Eigen::Map<const Eigen::VectorXd>(bins[b].values.data(), d);
  }
  return x;
}

DetectorModel train(const std::vector<Bin>& clean_bins, const DetectorConfig& cfg, std::uint64_t seed,
                    std::size_t batch, TrainingLog* log) {
  if (clean_bins.size() < cfg.min_bins) {
    throw TrainingError("training needs at least " + std::to_string(cfg.min_bins) + " bins, got " +
                        std::to_string(clean_bins.size()));
  }
  if (cfg.minibatch == 0 || cfg.epochs < 0) throw TrainingError("bad training configuration");
  DetectorModel m;
  m.n_clocks = clean_bins.front().n_clocks;
  m.n_duties = clean_bins.front().n_duties;
  m.k = clean_bins.front().k;
  m.batch = batch;
  m.seed = seed;

  const Eigen::MatrixXd raw = bins_to_matrix(clean_bins);
  m.scaler = ScalerStats::fit(raw, cfg.std_floor);
  const Eigen::MatrixXd x = m.scaler.transform(raw);
  const auto n = static_cast<std::size_t>(x.cols());
  m.ae = Autoencoder(static_cast<std::size_t>(x.rows()), cfg.h1, cfg.h2, seed);

  TrainingLog local;
  TrainingLog& lg = log ? *log : local;
  lg.initial_mse = m.ae.loss(x);

  auto& layers = m.ae.layers();
  std::vector<Eigen::MatrixXd> vw(layers.size()), dw;
  std::vector<Eigen::VectorXd> vb(layers.size()), db;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    vw[l] = Eigen::MatrixXd::Zero(layers[l].w.rows(), layers[l].w.cols());
    vb[l] = Eigen::VectorXd::Zero(layers[l].b.size());
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng shuffler(stream_seed(seed, "ae-shuffle"));
  Eigen::MatrixXd mb;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffler.shuffle(order.begin(), order.end());
    double total = 0.0;
    std::size_t steps = 0;
    for (std::size_t start = 0; start < n; start += cfg.minibatch) {
      const std::size_t len = std::min(cfg.minibatch, n - start);
      mb.resize(x.rows(), static_cast<Eigen::Index>(len));
      for (std::size_t c = 0; c < len; ++c) mb.col(static_cast<Eigen::Index>(c)) = x.col(static_cast<Eigen::Index>(order[start + c]));
      const double loss = m.ae.gradients(mb, dw, db);
      if (!std::isfinite(loss)) {
        throw TrainingError("autoencoder loss diverged at epoch " + std::to_string(epoch) + ", step " +
                            std::to_string(steps) + " (loss " + std::to_string(loss) + ")");
      }
      for (std::size_t l = 0; l < layers.size(); ++l) {
        vw[l] = cfg.momentum * vw[l] - cfg.lr * dw[l];
        vb[l] = cfg.momentum * vb[l] - cfg.lr * db[l];
        layers[l].w += vw[l];
        layers[l].b += vb[l];
      }
      total += loss;
      ++steps;
    }
    lg.epoch_loss.push_back(steps ? total / static_cast<double>(steps) : 0.0);
  }
  lg.final_mse = m.ae.loss(x);
  if (!std::isfinite(lg.final_mse)) throw TrainingError("autoencoder loss is not finite after training");

  const Eigen::MatrixXd z = m.ae.encode(x);
  const auto h2 = static_cast<double>(z.rows());
  double mean_var = 0.0;
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    const double mu = z.row(r).mean();
    mean_var += (z.row(r).array() - mu).square().mean();
  }
  mean_var /= h2;
  const double gamma = mean_var > 0.0 ? 1.0 / (h2 * mean_var) : 1.0;
  m.svm = train_ocsvm(z, cfg.nu, gamma, cfg.svm_tol, &lg.svm);

  // Free support vectors sit on the boundary up to the solver tolerance.
  std::size_t outliers = 0;
  for (Eigen::Index c = 0; c < z.cols(); ++c) {
    if (m.svm.decision(z.col(c)) < -cfg.svm_tol) ++outliers;
  }
  lg.train_outlier_fraction = static_cast<double>(outliers) / static_cast<double>(n);
  return m;
}

double score(const DetectorModel& m, const Bin& bin) {
  if (bin.values.size() != m.dims()) throw std::invalid_argument("score: bin dimension does not match model");
  const Eigen::MatrixXd x = m.scaler.transform(bin.values);
  return m.svm.decision(m.ae.encode(x).col(0));
}

std::vector<double> score_all(const DetectorModel& m, const std::vector<Bin>& bins) {
  std::vector<double> s(bins.size());
  for (std::size_t i = 0; i < bins.size(); ++i) s[i] = score(m, bins[i]);
  return s;
}

std::string to_string(Verdict v) { return v == Verdict::Clean ? "CLEAN" : "TROJANED"; }

Verdict vote(const std::vector<double>& scores) {
  if (scores.empty()) throw std::invalid_argument("vote: empty batch");
  std::size_t clean = 0;
  for (double s : scores) clean += s >= 0.0 ? 1 : 0;
  return 2 * clean > scores.size() ? Verdict::Clean : Verdict::Trojaned;
}

Verdict classify(const DetectorModel& m, const std::vector<Bin>& bins) { return vote(score_all(m, bins)); }

std::vector<std::vector<double>> batch_scores(const std::vector<double>& scores, std::size_t batch) {
  if (batch == 0) throw std::invalid_argument("batch size must be at least 1");
  std::vector<std::vector<double>> out;
  for (std::size_t s = 0; s + batch <= scores.size(); s += batch) {
    out.emplace_back(scores.begin() + static_cast<std::ptrdiff_t>(s),
                     scores.begin() + static_cast<std::ptrdiff_t>(s + batch));
  }
  return out;
}

// --------------------------------------------------------------- metrics

EvalReport metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
  EvalReport r;
  r.tp = tp;
  r.fp = fp;
  r.tn = tn;
  r.fn = fn;
  const auto d = [](std::size_t v) { return static_cast<double>(v); };
  const std::size_t total = tp + fp + tn + fn;
  r.accuracy = total ? d(tp + tn) / d(total) : 0.0;
  r.precision = tp + fp ? d(tp) / d(tp + fp) : 0.0;
  r.recall = tp + fn ? d(tp) / d(tp + fn) : 0.0;
  r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

EvalReport evaluate(const std::vector<LabeledBatch>& batches) {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::vector<std::pair<double, bool>> means;
  for (const auto& b : batches) {
    const bool flagged = vote(b.scores) == Verdict::Trojaned;
    if (b.trojaned) {
      (flagged ? tp : fn)++;
    } else {
      (flagged ? fp : tn)++;
    }
    means.emplace_back(std::accumulate(b.scores.begin(), b.scores.end(), 0.0) / static_cast<double>(b.scores.size()),
                       b.trojaned);
  }
  EvalReport r = metrics_from_counts(tp, fp, tn, fn);

  std::sort(means.begin(), means.end());
  const double pos = static_cast<double>(tp + fn), neg = static_cast<double>(fp + tn);
  std::size_t flagged_pos = 0, flagged_neg = 0;
  auto point = [&](double threshold) {
    r.roc.push_back({neg > 0 ? static_cast<double>(flagged_neg) / neg : 0.0,
                     pos > 0 ? static_cast<double>(flagged_pos) / pos : 0.0, threshold});
  };
  // Threshold at each distinct mean flags everything strictly below it.
  for (std::size_t i = 0; i < means.size();) {
    point(means[i].first);
    const double v = means[i].first;
    for (; i < means.size() && means[i].first == v; ++i) (means[i].second ? flagged_pos : flagged_neg)++;
  }
  point(means.empty() ? 0.0 : means.back().first + 1.0);
  for (std::size_t i = 1; i < r.roc.size(); ++i) {
    r.auc += (r.roc[i].fpr - r.roc[i - 1].fpr) * (r.roc[i].tpr + r.roc[i - 1].tpr) / 2.0;
  }
  return r;
}

// ------------------------------------------------------------ persistence

void to_json(nlohmann::json& j, const DetectorModel& m) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : m.ae.layers()) {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(l.w.size()));
    for (Eigen::Index r = 0; r < l.w.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.w.cols(); ++c) w.push_back(l.w(r, c));
    }
    layers.push_back({{"rows", l.w.rows()},
                      {"cols", l.w.cols()},
                      {"relu", l.relu},
                      {"weights", w},
                      {"bias", std::vector<double>(l.b.data(), l.b.data() + l.b.size())}});
  }
  nlohmann::json sv = nlohmann::json::array();
  for (const auto& v : m.svm.sv) sv.push_back(std::vector<double>(v.data(), v.data() + v.size()));
  j = nlohmann::json{{"dims", {m.n_clocks, m.n_duties, kFeatures}},
                     {"scaler", {{"mean", m.scaler.mean}, {"std", m.scaler.stdev}}},
                     {"ae_layers", layers},
                     {"svm", {{"sv", sv}, {"alpha", m.svm.alpha}, {"gamma", m.svm.gamma}, {"rho", m.svm.rho}, {"nu", m.svm.nu}}},
                     {"k", m.k},
                     {"B", m.batch},
                     {"seed", m.seed}};
}

void from_json(const nlohmann::json& j, DetectorModel& m) {
  const auto dims = j.at("dims").get<std::vector<std::size_t>>();
  if (dims.size() != 3 || dims[2] != kFeatures) throw std::runtime_error("model: bad dims");
  m.n_clocks = dims[0];
  m.n_duties = dims[1];
  m.scaler.mean = j.at("scaler").at("mean").get<std::vector<double>>();
  m.scaler.stdev = j.at("scaler").at("std").get<std::vector<double>>();
  if (m.scaler.mean.size() != m.dims() || m.scaler.stdev.size() != m.dims()) {
    throw std::runtime_error("model: scaler does not match dims");
  }
  auto& layers = m.ae.layers();
  layers.clear();
  for (const auto& lj : j.at("ae_layers")) {
    const auto rows = lj.at("rows").get<Eigen::Index>(), cols = lj.at("cols").get<Eigen::Index>();
    const auto w = lj.at("weights").get<std::vector<double>>();
    const auto b = lj.at("bias").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(w.size()) != rows * cols || static_cast<Eigen::Index>(b.size()) != rows) {
      throw std::runtime_error("model: layer shape mismatch");
    }
    DenseLayer l{Eigen::MatrixXd(rows, cols), Eigen::Map<const Eigen::VectorXd>(b.data(), rows), lj.value("relu", true)};
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) l.w(r, c) = w[static_cast<std::size_t>(r * cols + c)];
    }
    layers.push_back(std::move(l));
  }
  if (layers.size() != 4 || static_cast<std::size_t>(layers.front().w.cols()) != m.dims()) {
    throw std::runtime_error("model: autoencoder does not match dims");
  }
  for (std::size_t l = 1; l < layers.size(); ++l) {
    if (layers[l].w.cols() != layers[l - 1].w.rows()) throw std::runtime_error("model: layer widths do not chain");
  }
  const auto& s = j.at("svm");
  m.svm.sv.clear();
  for (const auto& v : s.at("sv")) {
    const auto x = v.get<std::vector<double>>();
    m.svm.sv.push_back(Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())));
  }
  m.svm.alpha = s.at("alpha").get<std::vector<double>>();
  m.svm.gamma = s.at("gamma").get<double>();
  m.svm.rho = s.at("rho").get<double>();
  m.svm.nu = s.at("nu").get<double>();
  if (m.svm.alpha.size() != m.svm.sv.size()) throw std::runtime_error("model: svm alpha/sv count mismatch");
  m.k = j.at("k").get<std::size_t>();
  m.batch = j.at("B").get<std::size_t>();
  m.seed = j.at("seed").get<std::uint64_t>();
}

void to_json(nlohmann::json& j, const EvalReport& r) {
  nlohmann::json roc = nlohmann::json::array();
  for (const auto& p : r.roc) roc.push_back({{"fpr", p.fpr}, {"tpr", p.tpr}, {"threshold", p.threshold}});
  j = nlohmann::json{{"tp", r.tp},           {"fp", r.fp},         {"tn", r.tn},
                     {"fn", r.fn},           {"accuracy", r.accuracy}, {"precision", r.precision},
                     {"recall", r.recall},   {"f1", r.f1},         {"auc", r.auc},
                     {"roc", roc}};
}

}  // namespace atd
