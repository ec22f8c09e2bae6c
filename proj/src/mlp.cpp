#include "olrl/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "olrl/errors.hpp"
#include "olrl/noise.hpp"

namespace olrl {

namespace {

constexpr char kMagic[16] = {'O', 'L', 'R', 'L', '-', 'M', 'L', 'P',
                             '-', 'v', '1', 0,   0,   0,   0,   0};

Vector safe_std(const Matrix& data, const Vector& mean) {
  Vector sd = ((data.rowwise() - mean.transpose()).array().square().colwise().sum() /
               std::max<Eigen::Index>(1, data.rows()))
                  .sqrt()
                  .transpose();
  for (Eigen::Index i = 0; i < sd.size(); ++i) {
    if (!(sd[i] > 1e-12)) sd[i] = 1.0;
  }
  return sd;
}

}  // namespace

void MlpConfig::validate() const {
  if (hidden.empty()) throw std::invalid_argument("MlpConfig: no hidden layers");
  for (int h : hidden) {
    if (h < 1) throw std::invalid_argument("MlpConfig: widths must be positive");
  }
  if (epochs < 1 || batch_size < 1 || rollouts < 1 || !(step_size > 0.0) ||
      !(weight_decay > 0.0) || !(noise_scale > 0.0)) {
    throw std::invalid_argument("MlpConfig: all settings must be positive");
  }
}

MlpModel::MlpModel(int state_dim, int action_dim,
                   const std::vector<int>& hidden, Rng& rng)
    : D_(state_dim),
      K_(action_dim),
      in_mean_(Vector::Zero(state_dim + action_dim)),
      in_std_(Vector::Ones(state_dim + action_dim)),
      out_mean_(Vector::Zero(state_dim)),
      out_std_(Vector::Ones(state_dim)) {
  std::vector<int> widths = {D_ + K_};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(D_);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const int in = widths[l], out = widths[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> uni(-bound, bound);
    Layer layer{Matrix(out, in), Vector(out)};
    for (Eigen::Index i = 0; i < layer.W.size(); ++i) layer.W.data()[i] = uni(rng);
    for (Eigen::Index i = 0; i < layer.b.size(); ++i) layer.b[i] = uni(rng);
    layers_.push_back(std::move(layer));
  }
  layers_.back().W.setZero();
  layers_.back().b.setZero();
}

MlpModel::MlpModel(int state_dim, int action_dim, std::vector<Layer> layers,
                   Vector in_mean, Vector in_std, Vector out_mean,
                   Vector out_std)
    : D_(state_dim), K_(action_dim), layers_(std::move(layers)) {
  if (layers_.empty() || layers_.front().W.cols() != D_ + K_ ||
      layers_.back().W.rows() != D_) {
    throw DimensionMismatch("MlpModel: layer shapes do not match D, K");
  }
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (layers_[l].b.size() != layers_[l].W.rows() ||
        (l > 0 && layers_[l].W.cols() != layers_[l - 1].W.rows())) {
      throw DimensionMismatch("MlpModel: inconsistent layer shapes");
    }
  }
  set_normalization(std::move(in_mean), std::move(in_std), std::move(out_mean),
                    std::move(out_std));
}

void MlpModel::set_normalization(Vector in_mean, Vector in_std,
                                 Vector out_mean, Vector out_std) {
  if (in_mean.size() != D_ + K_ || in_std.size() != D_ + K_ ||
      out_mean.size() != D_ || out_std.size() != D_) {
    throw DimensionMismatch("MlpModel: normalization sizes");
  }
  in_mean_ = std::move(in_mean);
  in_std_ = std::move(in_std);
  out_mean_ = std::move(out_mean);
  out_std_ = std::move(out_std);
}

void MlpModel::predict(const ConstVectorRef& x, const ConstVectorRef& u,
                       VectorRef next) const {
  Vector h(D_ + K_);
  h << x, u;
  h = ((h - in_mean_).array() / in_std_.array()).matrix();
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
    h = (layers_[l].W * h + layers_[l].b).array().tanh().matrix();
  }
  const Vector o = layers_.back().W * h + layers_.back().b;
  next = x + out_mean_ + out_std_.cwiseProduct(o);
}

JacobianEstimate MlpModel::jacobians(const ConstVectorRef& x,
                                     const ConstVectorRef& u) const {
  Vector h(D_ + K_);
  h << x, u;
  h = ((h - in_mean_).array() / in_std_.array()).matrix();
  // J accumulates d(activation)/dz, starting from the input scaling.
  Matrix J = in_std_.cwiseInverse().asDiagonal();
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
    h = (layers_[l].W * h + layers_[l].b).array().tanh().matrix();
    const Vector slope = (1.0 - h.array().square()).matrix();
    J = slope.asDiagonal() * (layers_[l].W * J);
  }
  Matrix dnext = out_std_.asDiagonal() * (layers_.back().W * J);  // D x (D+K)
  dnext.leftCols(D_) += Matrix::Identity(D_, D_);
  JacobianEstimate jac;
  jac.A = dnext.leftCols(D_).transpose();
  jac.B = dnext.rightCols(K_).transpose();
  return jac;
}

void MlpModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out.write(kMagic, sizeof(kMagic));
  auto put_i32 = [&](std::int32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
  };
  auto put_doubles = [&](const double* p, Eigen::Index n) {
    out.write(reinterpret_cast<const char*>(p),
              static_cast<std::streamsize>(n * sizeof(double)));
  };
  put_i32(D_);
  put_i32(K_);
  put_i32(static_cast<std::int32_t>(layers_.size()));
  for (const Layer& layer : layers_) put_i32(static_cast<std::int32_t>(layer.W.rows()));
  put_doubles(in_mean_.data(), in_mean_.size());
  put_doubles(in_std_.data(), in_std_.size());
  put_doubles(out_mean_.data(), out_mean_.size());
  put_doubles(out_std_.data(), out_std_.size());
  for (const Layer& layer : layers_) {
    const RowMatrix W = layer.W;
    put_doubles(W.data(), W.size());
    put_doubles(layer.b.data(), layer.b.size());
  }
  if (!out) throw IoError(path.string(), "write failed");
}

MlpModel MlpModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  char magic[16];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw IoError(path.string(), "not an MLP model file");
  }
  auto get_i32 = [&]() {
    std::int32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw IoError(path.string(), "truncated model file");
    return v;
  };
  auto get_doubles = [&](double* p, Eigen::Index n) {
    in.read(reinterpret_cast<char*>(p),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw IoError(path.string(), "truncated model file");
  };
  const int D = get_i32(), K = get_i32(), count = get_i32();
  if (D < 1 || K < 1 || count < 1 || count > 64) {
    throw IoError(path.string(), "corrupt model header");
  }
  std::vector<int> widths = {D + K};
  for (int l = 0; l < count; ++l) {
    const int w = get_i32();
    if (w < 1 || w > (1 << 20)) throw IoError(path.string(), "corrupt layer width");
    widths.push_back(w);
  }
  Vector in_mean(D + K), in_std(D + K), out_mean(D), out_std(D);
  get_doubles(in_mean.data(), in_mean.size());
  get_doubles(in_std.data(), in_std.size());
  get_doubles(out_mean.data(), out_mean.size());
  get_doubles(out_std.data(), out_std.size());
  std::vector<Layer> layers;
  for (int l = 0; l < count; ++l) {
    RowMatrix W(widths[l + 1], widths[l]);
    Vector b(widths[l + 1]);
    get_doubles(W.data(), W.size());
    get_doubles(b.data(), b.size());
    layers.push_back({Matrix(W), std::move(b)});
  }
  return MlpModel(D, K, std::move(layers), std::move(in_mean),
                  std::move(in_std), std::move(out_mean), std::move(out_std));
}

TransitionData collect_pink_noise_transitions(const Environment& env,
                                              int rollouts, double noise_scale,
                                              Rng& rng,
                                              RolloutCounter& counter) {
  const int T = env.horizon(), D = env.state_dim(), K = env.action_dim();
  TransitionData data;
  data.inputs.resize(static_cast<Eigen::Index>(rollouts) * T, D + K);
  data.targets.resize(static_cast<Eigen::Index>(rollouts) * T, D);
  Eigen::Index row = 0;
  for (int i = 0; i < rollouts; ++i) {
    const ActionSequence actions = pink_noise_sequence(T, K, noise_scale, rng);
    const Trajectory traj = rollout(env, actions, counter);
    for (int t = 0; t < T; ++t, ++row) {
      data.inputs.row(row) << traj.states.row(t), traj.actions.row(t);
      data.targets.row(row) = traj.states.row(t + 1) - traj.states.row(t);
    }
  }
  return data;
}

double fit_mlp(MlpModel& model, const TransitionData& data,
               const MlpConfig& cfg, Rng& rng) {
  cfg.validate();
  const Eigen::Index N = data.inputs.rows();
  if (N == 0 || data.targets.rows() != N) {
    throw std::invalid_argument("fit_mlp: empty or inconsistent data");
  }
  const Vector in_mean = data.inputs.colwise().mean().transpose();
  const Vector out_mean = data.targets.colwise().mean().transpose();
  const Vector in_std = safe_std(data.inputs, in_mean);
  const Vector out_std = safe_std(data.targets, out_mean);
  model.set_normalization(in_mean, in_std, out_mean, out_std);

  // Standardized data, one sample per column.
  const Matrix X = ((data.inputs.rowwise() - in_mean.transpose()).array().rowwise() /
                    in_std.transpose().array())
                       .matrix()
                       .transpose();
  const Matrix Y = ((data.targets.rowwise() - out_mean.transpose()).array().rowwise() /
                    out_std.transpose().array())
                       .matrix()
                       .transpose();

  auto& layers = model.mutable_layers();
  const std::size_t L = layers.size();
  struct Moments {
    Matrix mW, vW;
    Vector mb, vb;
  };
  std::vector<Moments> moments;
  for (const auto& layer : layers) {
    moments.push_back({Matrix::Zero(layer.W.rows(), layer.W.cols()),
                       Matrix::Zero(layer.W.rows(), layer.W.cols()),
                       Vector::Zero(layer.b.size()), Vector::Zero(layer.b.size())});
  }
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::int64_t step = 0;

  std::vector<Eigen::Index> order(N);
  std::iota(order.begin(), order.end(), 0);
  std::vector<Matrix> acts(L + 1);
  std::vector<Matrix> gradW(L);
  std::vector<Vector> gradb(L);
  double epoch_loss = 0.0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    Eigen::Index batches = 0;
    for (Eigen::Index start = 0; start < N; start += cfg.batch_size) {
      const Eigen::Index n = std::min<Eigen::Index>(cfg.batch_size, N - start);
      Matrix xb(X.rows(), n), yb(Y.rows(), n);
      for (Eigen::Index j = 0; j < n; ++j) {
        xb.col(j) = X.col(order[start + j]);
        yb.col(j) = Y.col(order[start + j]);
      }
      acts[0] = xb;
      for (std::size_t l = 0; l < L; ++l) {
        Matrix pre = layers[l].W * acts[l];
        pre.colwise() += layers[l].b;
        acts[l + 1] = (l + 1 < L) ? Matrix(pre.array().tanh()) : pre;
      }
      const Matrix err = acts[L] - yb;
      const double loss = err.squaredNorm() / static_cast<double>(err.size());
      if (!std::isfinite(loss)) {
        throw TrainingFailure("fit_mlp: non-finite training loss");
      }
      loss_sum += loss;
      ++batches;
      // Backward pass of the mean squared error.
      Matrix delta = (2.0 / static_cast<double>(err.size())) * err;
      for (std::size_t l = L; l-- > 0;) {
        gradW[l] = delta * acts[l].transpose();
        gradb[l] = delta.rowwise().sum();
        if (l > 0) {
          delta = (layers[l].W.transpose() * delta).cwiseProduct(
              (1.0 - acts[l].array().square()).matrix());
        }
      }
      ++step;
      const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      for (std::size_t l = 0; l < L; ++l) {
        Moments& m = moments[l];
        m.mW = beta1 * m.mW + (1.0 - beta1) * gradW[l];
        m.vW = beta2 * m.vW + (1.0 - beta2) * gradW[l].cwiseProduct(gradW[l]);
        m.mb = beta1 * m.mb + (1.0 - beta1) * gradb[l];
        m.vb = beta2 * m.vb + (1.0 - beta2) * gradb[l].cwiseProduct(gradb[l]);
        // Decoupled weight decay (AdamW).
        layers[l].W *= 1.0 - cfg.step_size * cfg.weight_decay;
        layers[l].b *= 1.0 - cfg.step_size * cfg.weight_decay;
        layers[l].W.array() -= cfg.step_size * (m.mW.array() / c1) /
                               ((m.vW.array() / c2).sqrt() + eps);
        layers[l].b.array() -= cfg.step_size * (m.mb.array() / c1) /
                               ((m.vb.array() / c2).sqrt() + eps);
      }
    }
    epoch_loss = loss_sum / static_cast<double>(batches);
  }
  return epoch_loss;
}

std::shared_ptr<const MlpModel> train_mlp_model(const Environment& env,
                                                const MlpConfig& cfg, Rng& rng,
                                                RolloutCounter& counter) {
  cfg.validate();
  const TransitionData data = collect_pink_noise_transitions(
      env, cfg.rollouts, cfg.noise_scale, rng, counter);
  auto model = std::make_shared<MlpModel>(env.state_dim(), env.action_dim(),
                                          cfg.hidden, rng);
  fit_mlp(*model, data, cfg, rng);
  return model;
}

}  // namespace olrl
