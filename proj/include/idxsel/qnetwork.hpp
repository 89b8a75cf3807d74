#pragma once

#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "idxsel/errors.hpp"
#include "idxsel/rng.hpp"

namespace idxsel {

template <typename Scalar>
struct DenseLayer {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix weight;  // out x in
  Vector bias;

  DenseLayer() = default;
  DenseLayer(Eigen::Index in, Eigen::Index out) : weight(Matrix::Zero(out, in)), bias(Vector::Zero(out)) {}

  Eigen::Index in() const { return weight.cols(); }
  Eigen::Index out() const { return weight.rows(); }
};

// Weights of a dueling network, also used as the gradient accumulator.
template <typename Scalar>
struct QNetworkParams {
  std::vector<DenseLayer<Scalar>> trunk;
  DenseLayer<Scalar> value;      // last hidden -> 1
  DenseLayer<Scalar> advantage;  // last hidden -> |actions|

  // f(Scalar* data, Eigen::Index size) over every tensor in a fixed order:
  // trunk weights and biases layer by layer, then value, then advantage.
  template <typename F>
  void for_each_tensor(F&& f) {
    for (auto& l : trunk) visit(l, f);
    visit(value, f);
    visit(advantage, f);
  }
  template <typename F>
  void for_each_tensor(F&& f) const {
    const_cast<QNetworkParams*>(this)->for_each_tensor(
        [&](Scalar* p, Eigen::Index n) { f(static_cast<const Scalar*>(p), n); });
  }

  Eigen::Index parameter_count() const {
    Eigen::Index n = 0;
    for_each_tensor([&](const Scalar*, Eigen::Index size) { n += size; });
    return n;
  }

  void set_zero() {
    for_each_tensor([](Scalar* p, Eigen::Index n) { std::fill(p, p + n, Scalar(0)); });
  }

  bool all_finite() const {
    bool ok = true;
    for_each_tensor([&](const Scalar* p, Eigen::Index n) {
      for (Eigen::Index i = 0; i < n; ++i) ok = ok && std::isfinite(static_cast<double>(p[i]));
    });
    return ok;
  }

  bool same_shape(const QNetworkParams& o) const {
    if (trunk.size() != o.trunk.size()) return false;
    const auto eq = [](const DenseLayer<Scalar>& a, const DenseLayer<Scalar>& b) {
      return a.in() == b.in() && a.out() == b.out();
    };
    for (std::size_t i = 0; i < trunk.size(); ++i) {
      if (!eq(trunk[i], o.trunk[i])) return false;
    }
    return eq(value, o.value) && eq(advantage, o.advantage);
  }

 private:
  template <typename F>
  static void visit(DenseLayer<Scalar>& l, F& f) {
    f(l.weight.data(), l.weight.size());
    f(l.bias.data(), l.bias.size());
  }
};

// Dueling deep-Q network: a ReLU trunk feeding a scalar state-value head and
// a per-action advantage head, recombined as
//   Q(s, a) = V(s) + A(s, a) - mean_a' A(s, a').
template <typename Scalar>
class DuelingQNetwork {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Params = QNetworkParams<Scalar>;

  struct Activations {
    Vector input;
    std::vector<Vector> pre;   // trunk pre-activations
    std::vector<Vector> post;  // trunk outputs after ReLU
    Scalar value = 0;
    Vector advantage;
    Vector q;
  };

  DuelingQNetwork() = default;
  DuelingQNetwork(Eigen::Index input_dim, std::vector<Eigen::Index> hidden, Eigen::Index actions) {
    if (input_dim < 1 || actions < 1 || hidden.empty()) {
      throw DimensionError("dueling network needs input, at least one hidden layer and actions");
    }
    Eigen::Index in = input_dim;
    for (auto width : hidden) {
      if (width < 1) throw DimensionError("hidden layer width must be positive");
      params_.trunk.emplace_back(in, width);
      in = width;
    }
    params_.value = DenseLayer<Scalar>(in, 1);
    params_.advantage = DenseLayer<Scalar>(in, actions);
  }

  // He-uniform trunk, Glorot-uniform heads, zero biases.
  void initialize(Rng& rng) {
    const auto fill = [&](DenseLayer<Scalar>& l, double limit) {
      for (Eigen::Index i = 0; i < l.weight.size(); ++i) {
        l.weight.data()[i] = static_cast<Scalar>((2.0 * rng.uniform() - 1.0) * limit);
      }
      l.bias.setZero();
    };
    for (auto& l : params_.trunk) fill(l, std::sqrt(6.0 / static_cast<double>(l.in())));
    for (auto* head : {&params_.value, &params_.advantage}) {
      fill(*head, std::sqrt(6.0 / static_cast<double>(head->in() + head->out())));
    }
  }

  Eigen::Index input_dim() const { return params_.trunk.front().in(); }
  Eigen::Index action_count() const { return params_.advantage.out(); }
  std::vector<Eigen::Index> hidden() const {
    std::vector<Eigen::Index> h;
    for (const auto& l : params_.trunk) h.push_back(l.out());
    return h;
  }

  Params& params() { return params_; }
  const Params& params() const { return params_; }

  Vector forward(const Eigen::Ref<const Vector>& state) const {
    Activations act;
    return forward(state, act);
  }

  Vector forward(const Eigen::Ref<const Vector>& state, Activations& act) const {
    if (state.size() != input_dim()) {
      throw DimensionError("state has dimension " + std::to_string(state.size()) +
                           ", network expects " + std::to_string(input_dim()));
    }
    act.input = state;
    act.pre.resize(params_.trunk.size());
    act.post.resize(params_.trunk.size());
    const Vector* h = &act.input;
    for (std::size_t i = 0; i < params_.trunk.size(); ++i) {
      const auto& l = params_.trunk[i];
      act.pre[i].noalias() = l.weight * *h;
      act.pre[i] += l.bias;
      act.post[i] = act.pre[i].cwiseMax(Scalar(0));
      h = &act.post[i];
    }
    act.value = (params_.value.weight * *h)(0) + params_.value.bias(0);
    act.advantage.noalias() = params_.advantage.weight * *h;
    act.advantage += params_.advantage.bias;
    act.q = act.advantage.array() - act.advantage.mean() + act.value;
    return act.q;
  }

  // Adds d(loss)/d(params) to grad given dq = d(loss)/dQ for one forward pass.
  void backward(const Activations& act, const Eigen::Ref<const Vector>& dq, Params& grad) const {
    const Eigen::Index n = action_count();
    const Vector& last = act.post.back();

    // dQ_a/dV = 1; dQ_a/dA_j = [a == j] - 1/n.
    const Scalar dvalue = dq.sum();
    const Vector dadv = dq.array() - dq.sum() / static_cast<Scalar>(n);

    grad.value.weight.noalias() += dvalue * last.transpose();
    grad.value.bias(0) += dvalue;
    grad.advantage.weight.noalias() += dadv * last.transpose();
    grad.advantage.bias += dadv;

    Vector dh = params_.value.weight.transpose() * dvalue;
    dh.noalias() += params_.advantage.weight.transpose() * dadv;

    for (std::size_t i = params_.trunk.size(); i-- > 0;) {
      const Vector dz = (act.pre[i].array() > Scalar(0)).select(dh, Vector::Zero(dh.size()));
      const Vector& below = i == 0 ? act.input : act.post[i - 1];
      grad.trunk[i].weight.noalias() += dz * below.transpose();
      grad.trunk[i].bias += dz;
      if (i > 0) dh.noalias() = params_.trunk[i].weight.transpose() * dz;
    }
  }

  Params zero_like() const {
    Params g = params_;
    g.set_zero();
    return g;
  }

 private:
  Params params_;
};

using QNetwork = DuelingQNetwork<double>;

// target <- source, bitwise. Shapes must match.
template <typename Scalar>
void target_sync(const DuelingQNetwork<Scalar>& source, DuelingQNetwork<Scalar>& target) {
  if (!source.params().same_shape(target.params())) {
    throw DimensionError("target_sync: network shapes differ");
  }
  target = source;
}

}  // namespace idxsel
