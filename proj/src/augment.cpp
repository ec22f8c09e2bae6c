#include "olrl/augment.hpp"

#include <stdexcept>

namespace olrl {

namespace {

EnvSpec augmented_spec(const EnvSpec& base) {
  EnvSpec spec = base;
  spec.state_dim = base.state_dim + 1;
  spec.x0 = Vector::Zero(spec.state_dim);
  spec.x0.head(base.state_dim) = base.x0;
  return spec;
}

class AugmentedEnv final : public Environment {
 public:
  explicit AugmentedEnv(EnvPtr base)
      : Environment(augmented_spec(base->spec())), base_(std::move(base)) {}

  using Environment::step;
  void step(const ConstVectorRef& x, const ConstVectorRef& u,
            VectorRef next) const override {
    const int D = base_->state_dim();
    base_->step(x.head(D), u, next.head(D));
    next[D] = x[D] + base_->running_reward(x.head(D), u);
  }

  double running_reward(const ConstVectorRef&,
                        const ConstVectorRef&) const override {
    return 0.0;
  }

  double terminal_reward(const ConstVectorRef& x) const override {
    const int D = base_->state_dim();
    return base_->terminal_reward(x.head(D)) + x[D];
  }

  void running_reward_gradient(const ConstVectorRef&, const ConstVectorRef&,
                               VectorRef dx, VectorRef du) const override {
    dx.setZero();
    du.setZero();
  }

  void terminal_reward_gradient(const ConstVectorRef& x,
                                VectorRef dx) const override {
    const int D = base_->state_dim();
    base_->terminal_reward_gradient(x.head(D), dx.head(D));
    dx[D] = 1.0;
  }

 private:
  EnvPtr base_;
};

}  // namespace

EnvPtr augment_terminal_reward(EnvPtr env) {
  if (!env) throw std::invalid_argument("augment_terminal_reward: null env");
  return std::make_shared<const AugmentedEnv>(std::move(env));
}

}  // namespace olrl
