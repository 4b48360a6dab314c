#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ppn/sweep.hpp"

// Small dense tanh regressors that learn the optimal-gain surfaces from the
// sweep datasets, trained from scratch with full-batch Adam.
//
// Two models share the machinery:
//   gain model     (alpha_p0, alpha_pf_des, N_f) -> N_ori_opt
//   pair model     (alpha_p0, alpha_pf_des)      -> (N_f_opt, N_ori_opt)
// Angles at this boundary are degrees, matching the dataset files.
//
// Rows are samples throughout; hidden activations are tanh, the output layer
// is linear. Inputs and targets are z-scored with statistics fit on the
// training split only.

namespace ppn {

struct MlpSpec {
  std::vector<Eigen::Index> layer_sizes;  // input, hidden..., output

  static MlpSpec gain_model();  // {3, 32, 16, 1}
  static MlpSpec pair_model();  // {2, 32, 64, 16, 2}

  Eigen::Index inputs() const { return layer_sizes.front(); }
  Eigen::Index outputs() const { return layer_sizes.back(); }
  Eigen::Index parameter_count() const;
  void validate() const;
};

// Per-feature z-score transform. Standard deviations are population
// (divide by n) and floored at 1e-8 so constant features stay finite.
struct Normalizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;

  static Normalizer fit(const Eigen::MatrixXd& rows);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& rows) const;
  Eigen::MatrixXd invert(const Eigen::MatrixXd& rows) const;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  std::int64_t epochs = 0;         // required
  double split_fraction = 0.8;     // train share of the shuffled rows
  std::uint32_t seed = 1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainMeta {
  std::uint32_t seed = 0;
  std::int64_t epochs = 0;
  double split_fraction = 0.0;
  Eigen::Index n_train = 0;
  Eigen::Index n_test = 0;
  double final_loss = 0.0;  // MSE on the normalized training split
};

struct MlpModel {
  MlpSpec spec;
  std::vector<Eigen::MatrixXd> weights;  // weights[l]: (n_{l+1} x n_l)
  std::vector<Eigen::VectorXd> biases;   // biases[l]:  (n_{l+1})
  Normalizer in_norm;
  Normalizer out_norm;
  TrainMeta meta;
};

// Glorot-uniform weights (limit sqrt(6/(fan_in+fan_out))), zero biases,
// deterministic in the seed. Normalizers start as identity.
MlpModel init_model(const MlpSpec& spec, std::uint32_t seed);

// Forward pass in normalized space; X rows are samples.
Eigen::MatrixXd forward(const MlpModel& model, const Eigen::MatrixXd& X);

// End-to-end prediction in raw units (normalize, forward, denormalize).
Eigen::MatrixXd predict(const MlpModel& model, const Eigen::MatrixXd& X_raw);

// Mean squared error averaged over samples, summed over output columns.
double mse_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target);

struct Gradients {
  std::vector<Eigen::MatrixXd> d_weights;
  std::vector<Eigen::VectorXd> d_biases;
  double loss = 0.0;
};

// Backprop gradients of mse_loss over the batch (normalized space).
Gradients loss_gradients(const MlpModel& model, const Eigen::MatrixXd& X,
                         const Eigen::MatrixXd& Y);

struct TrainResult {
  MlpModel model;
  std::vector<double> loss_history;  // one entry per epoch, pre-update loss
  Eigen::MatrixXd train_inputs;      // raw units
  Eigen::MatrixXd train_targets;
  Eigen::MatrixXd test_inputs;
  Eigen::MatrixXd test_targets;
};

// Deterministic training pipeline: seeded Fisher-Yates shuffle, 80/20 split
// (floor on the train side), normalizers fit on the training split,
// full-batch Adam. Throws if the loss goes non-finite.
TrainResult train(const Eigen::MatrixXd& inputs_raw,
                  const Eigen::MatrixXd& targets_raw, const MlpSpec& spec,
                  const TrainConfig& cfg);

// Coefficient of determination per output column. Requires at least two
// samples and non-constant targets in every column.
Eigen::VectorXd r_squared(const Eigen::MatrixXd& pred,
                          const Eigen::MatrixXd& target);

// Dataset rows -> (inputs, targets) matrices for the two problems.
void dataset_matrices(const std::vector<DatasetRecord>& records,
                      Problem problem, Eigen::MatrixXd& inputs,
                      Eigen::MatrixXd& targets);

// One serving-boundary prediction (degrees in). Raw network outputs are
// reported alongside copies clamped to the physical ranges: N_f into [2, 5]
// and N_ori into the admissible orientation-gain interval. Queries outside
// the training envelope are answered anyway, with a warning attached.
struct GainPrediction {
  double n_ori_raw = 0.0;
  double n_ori_clamped = 0.0;
  std::optional<double> n_f_raw;      // pair model only
  std::optional<double> n_f_clamped;  // pair model only
  bool in_domain = true;
  std::string domain_warning;
};

GainPrediction predict_gains(const MlpModel& model, double alpha_p0_deg,
                             double alpha_pf_des_deg,
                             std::optional<double> n_f = std::nullopt);

// Versioned JSON round-trip; doubles survive bit-exactly. load_model
// validates shape, finiteness and version and throws on any mismatch.
void save_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);

}  // namespace ppn
