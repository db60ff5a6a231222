#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "atd/features.hpp"

namespace atd {

struct ScalerStats {
  std::vector<double> mean;
  std::vector<double> stdev;

  static ScalerStats fit(const Eigen::MatrixXd& samples, double std_floor = 1e-9);  // samples as columns
  Eigen::VectorXd transform(const std::vector<double>& x) const;
  Eigen::MatrixXd transform(const Eigen::MatrixXd& samples) const;
};

struct DenseLayer {
  Eigen::MatrixXd w;  // out x in
  Eigen::VectorXd b;
  bool relu = true;
};

/// D -> H1 -> H2 -> H1 -> D, rectifier on hidden layers, identity output.
class Autoencoder {
 public:
  Autoencoder() = default;
  Autoencoder(std::size_t d, std::size_t h1, std::size_t h2, std::uint64_t seed);

  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::size_t input_dim() const { return layers_.front().w.cols(); }
  std::size_t latent_dim() const { return layers_[1].w.rows(); }

  Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& x) const;
  /// Post-rectifier bottleneck activations.
  Eigen::MatrixXd encode(const Eigen::MatrixXd& x) const;

  /// Mean over samples and dimensions of the squared reconstruction error,
  /// times `scale`.
  double loss(const Eigen::MatrixXd& x, double scale = 1.0) const;
  /// Returns the loss; fills per-layer gradients of it.
  double gradients(const Eigen::MatrixXd& x, std::vector<Eigen::MatrixXd>& dw, std::vector<Eigen::VectorXd>& db,
                   double scale = 1.0) const;

 private:
  std::vector<DenseLayer> layers_;
};

/// Largest relative difference between analytic gradients and central finite
/// differences (step h) over every parameter, for the loss on `sample`.
/// Parameters whose perturbation flips a ReLU gate are skipped.
double gradient_check(const Autoencoder& m, const Eigen::VectorXd& sample, double h = 1e-5);

struct OcSvmModel {
  std::vector<Eigen::VectorXd> sv;
  std::vector<double> alpha;
  double gamma = 1.0;
  double rho = 0.0;
  double nu = 0.05;

  double decision(const Eigen::VectorXd& z) const;
};

struct OcSvmReport {
  double kkt_residual = 0.0;  // max violating-pair gap at exit
  double alpha_sum = 0.0;
  double alpha_max = 0.0;
  std::size_t iterations = 0;
  std::vector<double> alpha;  // full dual vector, training order
};

/// nu-one-class SVM dual with RBF kernel by sequential pairwise
/// optimisation (second-order working set selection).
OcSvmModel train_ocsvm(const Eigen::MatrixXd& latents, double nu, double gamma, double tol = 1e-6,
                       OcSvmReport* report = nullptr);

struct DetectorConfig {
  std::size_t h1 = 64;
  std::size_t h2 = 16;
  int epochs = 200;
  double lr = 1e-3;
  double momentum = 0.9;
  std::size_t minibatch = 32;
  double nu = 0.05;
  double svm_tol = 1e-6;
  double std_floor = 1e-9;
  std::size_t min_bins = 200;
};

void to_json(nlohmann::json& j, const DetectorConfig& c);
void from_json(const nlohmann::json& j, DetectorConfig& c);

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DetectorModel {
  std::size_t n_clocks = 0, n_duties = 0;
  ScalerStats scaler;
  Autoencoder ae;
  OcSvmModel svm;
  std::size_t k = 1;
  std::size_t batch = 1;
  std::uint64_t seed = 0;

  std::size_t dims() const { return n_clocks * n_duties * kFeatures; }
};

struct TrainingLog {
  double initial_mse = 0.0;
  double final_mse = 0.0;
  std::vector<double> epoch_loss;
  OcSvmReport svm;
  double train_outlier_fraction = 0.0;  // margin errors: decision < -svm_tol
};

DetectorModel train(const std::vector<Bin>& clean_bins, const DetectorConfig& cfg, std::uint64_t seed,
                    std::size_t batch = 1, TrainingLog* log = nullptr);

/// Positive = inlier (clean), negative = outlier.
double score(const DetectorModel& m, const Bin& bin);
std::vector<double> score_all(const DetectorModel& m, const std::vector<Bin>& bins);

enum class Verdict { Clean, Trojaned };
std::string to_string(Verdict v);

/// Majority vote of per-bin signs; a tie counts as TROJANED.
Verdict vote(const std::vector<double>& scores);
Verdict classify(const DetectorModel& m, const std::vector<Bin>& bins);

/// Consecutive groups of `batch` scores (stride = batch); the remainder is
/// dropped.
std::vector<std::vector<double>> batch_scores(const std::vector<double>& scores, std::size_t batch);

struct RocPoint {
  double fpr, tpr, threshold;
};

struct EvalReport {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double accuracy = 0, precision = 0, recall = 0, f1 = 0;
  std::vector<RocPoint> roc;
  double auc = 0;
};

EvalReport metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn);

struct LabeledBatch {
  std::vector<double> scores;
  bool trojaned = false;
};

/// Positive class is TROJANED. The ROC sweeps a threshold on the mean batch
/// score: a batch is flagged when its mean score is below the threshold.
EvalReport evaluate(const std::vector<LabeledBatch>& batches);

void to_json(nlohmann::json& j, const DetectorModel& m);
void from_json(const nlohmann::json& j, DetectorModel& m);
void to_json(nlohmann::json& j, const EvalReport& r);

Eigen::MatrixXd bins_to_matrix(const std::vector<Bin>& bins);

}  // namespace atd
