#include "ppn/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "ppn/angles.hpp"
#include "ppn/guidance.hpp"

namespace ppn {

MlpSpec MlpSpec::gain_model() { return MlpSpec{{3, 32, 16, 1}}; }
MlpSpec MlpSpec::pair_model() { return MlpSpec{{2, 32, 64, 16, 2}}; }

Eigen::Index MlpSpec::parameter_count() const {
  Eigen::Index count = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    count += layer_sizes[l] * layer_sizes[l + 1] + layer_sizes[l + 1];
  }
  return count;
}

void MlpSpec::validate() const {
  if (layer_sizes.size() < 2) {
    throw std::invalid_argument("MlpSpec: need at least input and output layers");
  }
  for (Eigen::Index n : layer_sizes) {
    if (n < 1) {
      throw std::invalid_argument("MlpSpec: layer sizes must be positive");
    }
  }
}

Normalizer Normalizer::fit(const Eigen::MatrixXd& rows) {
  if (rows.rows() < 1) {
    throw std::invalid_argument("Normalizer::fit: need at least one row");
  }
  Normalizer n;
  n.mean = rows.colwise().mean();
  const Eigen::MatrixXd centered = rows.rowwise() - n.mean.transpose();
  // Population standard deviation, floored so constant columns stay usable.
  n.std = (centered.array().square().colwise().mean()).sqrt().transpose();
  n.std = n.std.cwiseMax(1e-8);
  return n;
}

Eigen::MatrixXd Normalizer::apply(const Eigen::MatrixXd& rows) const {
  return (rows.rowwise() - mean.transpose()).array().rowwise() /
         std.transpose().array();
}

Eigen::MatrixXd Normalizer::invert(const Eigen::MatrixXd& rows) const {
  return (rows.array().rowwise() * std.transpose().array()).matrix().rowwise() +
         mean.transpose();
}

MlpModel init_model(const MlpSpec& spec, std::uint32_t seed) {
  spec.validate();
  MlpModel m;
  m.spec = spec;

  std::mt19937_64 gen(seed);
  auto uniform_symmetric = [&gen](double limit) {
    // 53-bit mantissa draw in [0, 1), stretched to (-limit, limit).
    const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    return (2.0 * u - 1.0) * limit;
  };

  const auto& sizes = spec.layer_sizes;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const Eigen::Index fan_in = sizes[l];
    const Eigen::Index fan_out = sizes[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Eigen::MatrixXd w(fan_out, fan_in);
    for (Eigen::Index i = 0; i < fan_out; ++i) {
      for (Eigen::Index j = 0; j < fan_in; ++j) {
        w(i, j) = uniform_symmetric(limit);
      }
    }
    m.weights.push_back(std::move(w));
    m.biases.push_back(Eigen::VectorXd::Zero(fan_out));
  }

  m.in_norm.mean = Eigen::VectorXd::Zero(spec.inputs());
  m.in_norm.std = Eigen::VectorXd::Ones(spec.inputs());
  m.out_norm.mean = Eigen::VectorXd::Zero(spec.outputs());
  m.out_norm.std = Eigen::VectorXd::Ones(spec.outputs());
  return m;
}

Eigen::MatrixXd forward(const MlpModel& model, const Eigen::MatrixXd& X) {
  if (X.cols() != model.spec.inputs()) {
    throw std::invalid_argument("forward: input width does not match the model");
  }
  Eigen::MatrixXd a = X;
  const std::size_t n_layers = model.weights.size();
  for (std::size_t l = 0; l < n_layers; ++l) {
    Eigen::MatrixXd z =
        (a * model.weights[l].transpose()).rowwise() + model.biases[l].transpose();
    a = l + 1 < n_layers ? z.array().tanh().matrix() : std::move(z);
  }
  return a;
}

Eigen::MatrixXd predict(const MlpModel& model, const Eigen::MatrixXd& X_raw) {
  return model.out_norm.invert(forward(model, model.in_norm.apply(X_raw)));
}

double mse_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw std::invalid_argument("mse_loss: shape mismatch");
  }
  if (pred.rows() < 1) {
    throw std::invalid_argument("mse_loss: empty batch");
  }
  return (pred - target).squaredNorm() / static_cast<double>(pred.rows());
}

Gradients loss_gradients(const MlpModel& model, const Eigen::MatrixXd& X,
                         const Eigen::MatrixXd& Y) {
  const std::size_t n_layers = model.weights.size();
  const double n = static_cast<double>(X.rows());

  // Forward pass, keeping each layer's activation for the backward sweep.
  std::vector<Eigen::MatrixXd> acts;
  acts.reserve(n_layers + 1);
  acts.push_back(X);
  for (std::size_t l = 0; l < n_layers; ++l) {
    Eigen::MatrixXd z = (acts.back() * model.weights[l].transpose()).rowwise() +
                        model.biases[l].transpose();
    acts.push_back(l + 1 < n_layers ? z.array().tanh().matrix() : std::move(z));
  }

  Gradients g;
  g.d_weights.resize(n_layers);
  g.d_biases.resize(n_layers);
  g.loss = (acts.back() - Y).squaredNorm() / n;

  // d(loss)/d(z) at the linear output layer.
  Eigen::MatrixXd dz = 2.0 / n * (acts.back() - Y);
  for (std::size_t l = n_layers; l-- > 0;) {
    g.d_weights[l] = dz.transpose() * acts[l];
    g.d_biases[l] = dz.colwise().sum().transpose();
    if (l > 0) {
      const Eigen::MatrixXd da = dz * model.weights[l];
      dz = da.array() * (1.0 - acts[l].array().square());
    }
  }
  return g;
}

TrainResult train(const Eigen::MatrixXd& inputs_raw,
                  const Eigen::MatrixXd& targets_raw, const MlpSpec& spec,
                  const TrainConfig& cfg) {
  spec.validate();
  const Eigen::Index n = inputs_raw.rows();
  if (targets_raw.rows() != n) {
    throw std::invalid_argument("train: inputs and targets disagree on row count");
  }
  if (n < 10) {
    throw std::invalid_argument("train: need at least 10 samples");
  }
  if (inputs_raw.cols() != spec.inputs() || targets_raw.cols() != spec.outputs()) {
    throw std::invalid_argument("train: matrix widths do not match the layer spec");
  }
  if (cfg.epochs < 1) {
    throw std::invalid_argument("train: epochs must be positive");
  }
  if (!(cfg.split_fraction > 0.0 && cfg.split_fraction < 1.0)) {
    throw std::invalid_argument("train: split fraction must lie in (0, 1)");
  }

  // Seeded Fisher-Yates shuffle; pinned here rather than std::shuffle so the
  // permutation does not depend on the standard library build.
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::mt19937_64 gen(cfg.seed);
  for (std::size_t i = idx.size() - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(gen() % (i + 1));
    std::swap(idx[i], idx[j]);
  }

  const Eigen::Index n_train =
      static_cast<Eigen::Index>(std::floor(cfg.split_fraction * static_cast<double>(n)));
  const Eigen::Index n_test = n - n_train;
  if (n_train < 1 || n_test < 1) {
    throw std::invalid_argument("train: split leaves an empty side");
  }

  TrainResult res;
  res.train_inputs.resize(n_train, inputs_raw.cols());
  res.train_targets.resize(n_train, targets_raw.cols());
  res.test_inputs.resize(n_test, inputs_raw.cols());
  res.test_targets.resize(n_test, targets_raw.cols());
  for (Eigen::Index i = 0; i < n_train; ++i) {
    res.train_inputs.row(i) = inputs_raw.row(idx[static_cast<std::size_t>(i)]);
    res.train_targets.row(i) = targets_raw.row(idx[static_cast<std::size_t>(i)]);
  }
  for (Eigen::Index i = 0; i < n_test; ++i) {
    res.test_inputs.row(i) =
        inputs_raw.row(idx[static_cast<std::size_t>(n_train + i)]);
    res.test_targets.row(i) =
        targets_raw.row(idx[static_cast<std::size_t>(n_train + i)]);
  }

  MlpModel model = init_model(spec, cfg.seed);
  model.in_norm = Normalizer::fit(res.train_inputs);
  model.out_norm = Normalizer::fit(res.train_targets);

  const Eigen::MatrixXd x_train = model.in_norm.apply(res.train_inputs);
  const Eigen::MatrixXd y_train = model.out_norm.apply(res.train_targets);

  // Full-batch Adam.
  const std::size_t n_layers = model.weights.size();
  std::vector<Eigen::MatrixXd> m_w(n_layers), v_w(n_layers);
  std::vector<Eigen::VectorXd> m_b(n_layers), v_b(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    m_w[l] = Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols());
    v_w[l] = m_w[l];
    m_b[l] = Eigen::VectorXd::Zero(model.biases[l].size());
    v_b[l] = m_b[l];
  }

  res.loss_history.reserve(static_cast<std::size_t>(cfg.epochs));
  double beta1_pow = 1.0;
  double beta2_pow = 1.0;
  for (std::int64_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const Gradients g = loss_gradients(model, x_train, y_train);
    if (!std::isfinite(g.loss)) {
      throw std::runtime_error("train: loss became non-finite at epoch " +
                               std::to_string(epoch));
    }
    res.loss_history.push_back(g.loss);

    beta1_pow *= cfg.beta1;
    beta2_pow *= cfg.beta2;
    const double m_scale = 1.0 / (1.0 - beta1_pow);
    const double v_scale = 1.0 / (1.0 - beta2_pow);
    for (std::size_t l = 0; l < n_layers; ++l) {
      m_w[l] = cfg.beta1 * m_w[l] + (1.0 - cfg.beta1) * g.d_weights[l];
      v_w[l] = cfg.beta2 * v_w[l].array() +
               (1.0 - cfg.beta2) * g.d_weights[l].array().square();
      model.weights[l].array() -=
          cfg.learning_rate * (m_w[l].array() * m_scale) /
          ((v_w[l].array() * v_scale).sqrt() + cfg.epsilon);

      m_b[l] = cfg.beta1 * m_b[l] + (1.0 - cfg.beta1) * g.d_biases[l];
      v_b[l] = cfg.beta2 * v_b[l].array() +
               (1.0 - cfg.beta2) * g.d_biases[l].array().square();
      model.biases[l].array() -=
          cfg.learning_rate * (m_b[l].array() * m_scale) /
          ((v_b[l].array() * v_scale).sqrt() + cfg.epsilon);
    }
  }

  model.meta.seed = cfg.seed;
  model.meta.epochs = cfg.epochs;
  model.meta.split_fraction = cfg.split_fraction;
  model.meta.n_train = n_train;
  model.meta.n_test = n_test;
  model.meta.final_loss = mse_loss(forward(model, x_train), y_train);

  res.model = std::move(model);
  return res;
}

Eigen::VectorXd r_squared(const Eigen::MatrixXd& pred,
                          const Eigen::MatrixXd& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw std::invalid_argument("r_squared: shape mismatch");
  }
  if (pred.rows() < 2) {
    throw std::invalid_argument("r_squared: need at least two samples");
  }
  Eigen::VectorXd r2(pred.cols());
  for (Eigen::Index c = 0; c < pred.cols(); ++c) {
    const double mean = target.col(c).mean();
    const double ss_tot = (target.col(c).array() - mean).square().sum();
    if (ss_tot == 0.0) {
      throw std::domain_error("r_squared: constant target column");
    }
    const double ss_res = (pred.col(c) - target.col(c)).squaredNorm();
    r2(c) = 1.0 - ss_res / ss_tot;
  }
  return r2;
}

void dataset_matrices(const std::vector<DatasetRecord>& records,
                      Problem problem, Eigen::MatrixXd& inputs,
                      Eigen::MatrixXd& targets) {
  const Eigen::Index n = static_cast<Eigen::Index>(records.size());
  if (problem == Problem::kA) {
    inputs.resize(n, 3);
    targets.resize(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& r = records[static_cast<std::size_t>(i)];
      inputs.row(i) << r.alpha_p0_deg, r.alpha_pf_des_deg, r.n_f;
      targets(i, 0) = r.n_ori_opt;
    }
  } else {
    inputs.resize(n, 2);
    targets.resize(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& r = records[static_cast<std::size_t>(i)];
      inputs.row(i) << r.alpha_p0_deg, r.alpha_pf_des_deg;
      targets.row(i) << r.n_f, r.n_ori_opt;
    }
  }
}

GainPrediction predict_gains(const MlpModel& model, double alpha_p0_deg,
                             double alpha_pf_des_deg, std::optional<double> n_f) {
  const Eigen::Index in_width = model.spec.inputs();
  const Eigen::Index out_width = model.spec.outputs();
  const bool is_gain_model = in_width == 3 && out_width == 1;
  const bool is_pair_model = in_width == 2 && out_width == 2;
  if (!is_gain_model && !is_pair_model) {
    throw std::invalid_argument("predict_gains: model is neither a gain nor a pair regressor");
  }
  if (is_gain_model && !n_f) {
    throw std::invalid_argument("predict_gains: gain model needs a terminal gain input");
  }
  if (is_pair_model && n_f) {
    throw std::invalid_argument("predict_gains: pair model takes no terminal gain input");
  }

  GainPrediction out;
  auto warn = [&out](const std::string& msg) {
    out.in_domain = false;
    if (!out.domain_warning.empty()) {
      out.domain_warning += "; ";
    }
    out.domain_warning += msg;
  };

  if (alpha_p0_deg < 10.0 || alpha_p0_deg > 170.0) {
    warn("alpha_p0 outside the trained range [10, 170] deg");
  }
  if (alpha_pf_des_deg < -170.0 || alpha_pf_des_deg > -10.0) {
    warn("alpha_pf_des outside the trained range [-170, -10] deg");
  }
  const bool two_phase =
      alpha_p0_deg > 0.0 &&
      requires_two_phase(0.0, deg_to_rad(alpha_p0_deg), deg_to_rad(alpha_pf_des_deg));
  if (!two_phase) {
    warn("engagement does not need a two-phase schedule");
  }
  if (is_gain_model && (*n_f < 2.0 || *n_f > 5.0)) {
    warn("terminal gain outside the trained range [2, 5]");
  }

  Eigen::MatrixXd x(1, in_width);
  if (is_gain_model) {
    x << alpha_p0_deg, alpha_pf_des_deg, *n_f;
  } else {
    x << alpha_p0_deg, alpha_pf_des_deg;
  }
  const Eigen::MatrixXd y = predict(model, x);

  double n_f_used = 0.0;
  if (is_gain_model) {
    out.n_ori_raw = y(0, 0);
    n_f_used = std::clamp(*n_f, 2.0, 5.0);
  } else {
    out.n_f_raw = y(0, 0);
    out.n_f_clamped = std::clamp(y(0, 0), 2.0, 5.0);
    out.n_ori_raw = y(0, 1);
    n_f_used = *out.n_f_clamped;
  }

  out.n_ori_clamped = out.n_ori_raw;
  if (two_phase) {
    const GainBounds b = gain_bounds(0.0, deg_to_rad(alpha_p0_deg),
                                     deg_to_rad(alpha_pf_des_deg), n_f_used);
    out.n_ori_clamped = std::clamp(out.n_ori_raw, b.n_min, b.n_max);
  } else {
    warn("orientation gain left unclamped; no admissible interval here");
  }
  return out;
}

namespace {

using nlohmann::json;

constexpr int kModelFormatVersion = 1;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back(m(i, j));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    arr.push_back(v(i));
  }
  return arr;
}

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index rows,
                                 Eigen::Index cols, const std::string& what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw std::runtime_error("load_model: bad row count for " + what);
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw std::runtime_error("load_model: bad column count for " + what);
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const json& cell = row[static_cast<std::size_t>(c)];
      if (!cell.is_number()) {
        throw std::runtime_error("load_model: non-numeric entry in " + what);
      }
      m(i, c) = cell.get<double>();
      if (!std::isfinite(m(i, c))) {
        throw std::runtime_error("load_model: non-finite entry in " + what);
      }
    }
  }
  return m;
}

Eigen::VectorXd vector_from_json(const json& j, Eigen::Index size,
                                 const std::string& what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != size) {
    throw std::runtime_error("load_model: bad length for " + what);
  }
  Eigen::VectorXd v(size);
  for (Eigen::Index i = 0; i < size; ++i) {
    const json& cell = j[static_cast<std::size_t>(i)];
    if (!cell.is_number()) {
      throw std::runtime_error("load_model: non-numeric entry in " + what);
    }
    v(i) = cell.get<double>();
    if (!std::isfinite(v(i))) {
      throw std::runtime_error("load_model: non-finite entry in " + what);
    }
  }
  return v;
}

}  // namespace

void save_model(const MlpModel& model, const std::filesystem::path& path) {
  model.spec.validate();
  json j;
  j["format_version"] = kModelFormatVersion;
  j["layer_sizes"] = model.spec.layer_sizes;
  json weights = json::array();
  json biases = json::array();
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    weights.push_back(matrix_to_json(model.weights[l]));
    biases.push_back(vector_to_json(model.biases[l]));
  }
  j["weights"] = std::move(weights);
  j["biases"] = std::move(biases);
  j["in_norm"] = {{"mean", vector_to_json(model.in_norm.mean)},
                  {"std", vector_to_json(model.in_norm.std)}};
  j["out_norm"] = {{"mean", vector_to_json(model.out_norm.mean)},
                   {"std", vector_to_json(model.out_norm.std)}};
  j["meta"] = {{"seed", model.meta.seed},
               {"epochs", model.meta.epochs},
               {"split_fraction", model.meta.split_fraction},
               {"n_train", model.meta.n_train},
               {"n_test", model.meta.n_test},
               {"final_loss", model.meta.final_loss}};

  std::ofstream f(path);
  if (!f) {
    throw std::runtime_error("save_model: cannot open " + path.string());
  }
  f << j.dump(1) << '\n';
  if (!f) {
    throw std::runtime_error("save_model: write failed for " + path.string());
  }
}

MlpModel load_model(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) {
    throw std::runtime_error("load_model: cannot open " + path.string());
  }
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("load_model: invalid JSON in " + path.string() +
                             ": " + e.what());
  }

  if (!j.contains("format_version") || !j["format_version"].is_number_integer()) {
    throw std::runtime_error("load_model: missing format_version in " + path.string());
  }
  if (j["format_version"].get<int>() != kModelFormatVersion) {
    throw std::runtime_error("load_model: unsupported format_version in " +
                             path.string());
  }
  if (!j.contains("layer_sizes") || !j["layer_sizes"].is_array()) {
    throw std::runtime_error("load_model: missing layer_sizes in " + path.string());
  }

  MlpModel m;
  for (const auto& v : j["layer_sizes"]) {
    if (!v.is_number_integer()) {
      throw std::runtime_error("load_model: non-integer layer size in " +
                               path.string());
    }
    m.spec.layer_sizes.push_back(v.get<Eigen::Index>());
  }
  m.spec.validate();

  const std::size_t n_layers = m.spec.layer_sizes.size() - 1;
  if (!j.contains("weights") || !j["weights"].is_array() ||
      j["weights"].size() != n_layers || !j.contains("biases") ||
      !j["biases"].is_array() || j["biases"].size() != n_layers) {
    throw std::runtime_error("load_model: weight/bias layer count mismatch in " +
                             path.string());
  }
  for (std::size_t l = 0; l < n_layers; ++l) {
    const Eigen::Index rows = m.spec.layer_sizes[l + 1];
    const Eigen::Index cols = m.spec.layer_sizes[l];
    m.weights.push_back(matrix_from_json(j["weights"][l], rows, cols,
                                         "weights[" + std::to_string(l) + "]"));
    m.biases.push_back(vector_from_json(j["biases"][l], rows,
                                        "biases[" + std::to_string(l) + "]"));
  }

  for (const char* key : {"in_norm", "out_norm"}) {
    if (!j.contains(key) || !j[key].contains("mean") || !j[key].contains("std")) {
      throw std::runtime_error("load_model: missing normalizer in " + path.string());
    }
  }
  m.in_norm.mean = vector_from_json(j["in_norm"]["mean"], m.spec.inputs(), "in_norm.mean");
  m.in_norm.std = vector_from_json(j["in_norm"]["std"], m.spec.inputs(), "in_norm.std");
  m.out_norm.mean =
      vector_from_json(j["out_norm"]["mean"], m.spec.outputs(), "out_norm.mean");
  m.out_norm.std =
      vector_from_json(j["out_norm"]["std"], m.spec.outputs(), "out_norm.std");
  if ((m.in_norm.std.array() <= 0.0).any() || (m.out_norm.std.array() <= 0.0).any()) {
    throw std::runtime_error("load_model: non-positive normalizer std in " +
                             path.string());
  }

  if (j.contains("meta")) {
    const json& meta = j["meta"];
    m.meta.seed = meta.value("seed", 0u);
    m.meta.epochs = meta.value("epochs", std::int64_t{0});
    m.meta.split_fraction = meta.value("split_fraction", 0.0);
    m.meta.n_train = meta.value("n_train", Eigen::Index{0});
    m.meta.n_test = meta.value("n_test", Eigen::Index{0});
    m.meta.final_loss = meta.value("final_loss", 0.0);
  }
  return m;
}

}  // namespace ppn
