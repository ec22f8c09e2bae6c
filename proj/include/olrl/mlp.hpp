#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "olrl/environment.hpp"
#include "olrl/models.hpp"

namespace olrl {

struct MlpConfig {
  std::vector<int> hidden = {16, 16};
  int epochs = 10;
  int batch_size = 100;
  double step_size = 0.002;
  double weight_decay = 0.001;
  int rollouts = 1000;
  double noise_scale = 0.5;  // std of the pink-noise training actions

  void validate() const;
};

/// Dense tanh network predicting the standardized state increment:
///   predict(x, u) = x + out_mean + out_std * net((z - in_mean) / in_std),
/// z = (x, u). Jacobians use the exact layer-wise chain rule.
class MlpModel final : public DifferentiableModel {
 public:
  struct Layer {
    Matrix W;  // out x in
    Vector b;
  };

  /// Untrained network: identity normalization, last layer zero, so the
  /// model is the identity map until trained.
  MlpModel(int state_dim, int action_dim, const std::vector<int>& hidden,
           Rng& rng);
  MlpModel(int state_dim, int action_dim, std::vector<Layer> layers,
           Vector in_mean, Vector in_std, Vector out_mean, Vector out_std);

  int state_dim() const override { return D_; }
  int action_dim() const override { return K_; }
  using DifferentiableModel::predict;
  void predict(const ConstVectorRef& x, const ConstVectorRef& u,
               VectorRef next) const override;
  JacobianEstimate jacobians(const ConstVectorRef& x,
                             const ConstVectorRef& u) const override;

  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& mutable_layers() { return layers_; }
  const Vector& in_mean() const { return in_mean_; }
  const Vector& in_std() const { return in_std_; }
  const Vector& out_mean() const { return out_mean_; }
  const Vector& out_std() const { return out_std_; }
  void set_normalization(Vector in_mean, Vector in_std, Vector out_mean,
                         Vector out_std);

  /// Flat binary: 16-byte magic "OLRL-MLP-v1", int32 layer widths, then
  /// doubles (normalization, then W row-major and b for each layer).
  void save(const std::filesystem::path& path) const;
  static MlpModel load(const std::filesystem::path& path);

 private:
  int D_, K_;
  std::vector<Layer> layers_;
  Vector in_mean_, in_std_, out_mean_, out_std_;
};

struct TransitionData {
  Matrix inputs;   // N x (D+K), rows z = (x, u)
  Matrix targets;  // N x D, rows x' - x
};

/// Collects `rollouts` pink-noise rollouts (counted on `counter`).
TransitionData collect_pink_noise_transitions(const Environment& env,
                                              int rollouts, double noise_scale,
                                              Rng& rng,
                                              RolloutCounter& counter);

/// Fits the network to the data with Adam and decoupled weight decay.
/// Returns the final epoch's mean training loss (standardized units).
double fit_mlp(MlpModel& model, const TransitionData& data,
               const MlpConfig& cfg, Rng& rng);

/// Collect pink-noise rollouts, then train. Throws TrainingFailure if the
/// loss becomes non-finite.
std::shared_ptr<const MlpModel> train_mlp_model(const Environment& env,
                                                const MlpConfig& cfg, Rng& rng,
                                                RolloutCounter& counter);

}  // namespace olrl
