#include "olrl/optim.hpp"

#include <cmath>
#include <string>

#include "olrl/errors.hpp"

namespace olrl {

OptimizerKind parse_optimizer_kind(std::string_view name) {
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "plain") return OptimizerKind::kPlain;
  throw std::invalid_argument("unknown optimizer '" + std::string(name) + "'");
}

std::string_view to_string(OptimizerKind kind) {
  return kind == OptimizerKind::kAdam ? "adam" : "plain";
}

OptimizerState::OptimizerState(OptimizerKind kind, double step_size, int T,
                               int K)
    : kind(kind),
      step_size(step_size),
      first_moment(RowMatrix::Zero(T, K)),
      second_moment(RowMatrix::Zero(T, K)) {
  if (!(step_size > 0.0)) {
    throw std::invalid_argument("OptimizerState: step size must be > 0");
  }
}

void apply_update(OptimizerState& state, ActionSequence& actions,
                  const GradientSequence& g) {
  if (g.rows() != actions.rows() || g.cols() != actions.cols()) {
    throw DimensionMismatch("apply_update: gradient and actions differ");
  }
  for (Eigen::Index t = 0; t < g.rows(); ++t) {
    if (!g.row(t).allFinite()) {
      throw NumericOverflow(static_cast<int>(t), "non-finite gradient");
    }
  }
  ++state.steps;
  ActionSequence next;
  if (state.kind == OptimizerKind::kPlain) {
    next = actions + state.step_size * g;
  } else {
    if (state.first_moment.rows() != g.rows() ||
        state.first_moment.cols() != g.cols()) {
      state.first_moment = RowMatrix::Zero(g.rows(), g.cols());
      state.second_moment = RowMatrix::Zero(g.rows(), g.cols());
    }
    state.first_moment =
        state.beta1 * state.first_moment + (1.0 - state.beta1) * g;
    state.second_moment = state.beta2 * state.second_moment +
                          (1.0 - state.beta2) * g.cwiseProduct(g);
    const double n = static_cast<double>(state.steps);
    const double c1 = 1.0 - std::pow(state.beta1, n);
    const double c2 = 1.0 - std::pow(state.beta2, n);
    next = actions.array() +
           state.step_size * (state.first_moment.array() / c1) /
               ((state.second_moment.array() / c2).sqrt() + state.epsilon);
  }
  for (Eigen::Index t = 0; t < next.rows(); ++t) {
    if (!next.row(t).allFinite()) {
      throw NumericOverflow(static_cast<int>(t), "update overflowed");
    }
  }
  actions = std::move(next);
}

}  // namespace olrl
