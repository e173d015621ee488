#include "ccr/learners/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ccr/error.hpp"
#include "ccr/learners/logistic.hpp"

namespace ccr {

namespace {

void require_two_classes(const Eigen::VectorXd& y) {
  bool pos = false, neg = false;
  for (Eigen::Index i = 0; i < y.size(); ++i) (y(i) > 0.5 ? pos : neg) = true;
  if (!pos || !neg) throw Error("single-class-labels", "training labels are all one class");
}

std::vector<Eigen::Index> layer_widths(const MlpConfig& config, Eigen::Index n_features) {
  std::vector<Eigen::Index> widths;
  widths.push_back(n_features);
  for (int w : config.hidden) widths.push_back(w);
  widths.push_back(1);
  return widths;
}

bool dropout_applies(const MlpConfig& config, std::size_t hidden_layer) {
  if (config.dropout <= 0.0) return false;
  return std::find(config.dropout_layers.begin(), config.dropout_layers.end(),
                   static_cast<int>(hidden_layer)) != config.dropout_layers.end();
}

struct Forward {
  std::vector<Eigen::MatrixXd> activations;  // activations[0] = input batch
  std::vector<Eigen::MatrixXd> pre;          // pre-activation per layer
  Eigen::VectorXd probs;
};

// masks[l] is empty when no dropout is applied to hidden layer l.
Forward forward_pass(const MlpModel& model, const Eigen::MatrixXd& X,
                     const std::vector<Eigen::MatrixXd>& masks) {
  const std::size_t layers = model.weights.size();
  Forward f;
  f.activations.resize(layers + 1);
  f.pre.resize(layers);
  f.activations[0] = X;
  for (std::size_t l = 0; l < layers; ++l) {
    f.pre[l] = (f.activations[l] * model.weights[l]).rowwise() + model.biases[l].transpose();
    if (l + 1 < layers) {
      Eigen::MatrixXd a = f.pre[l].cwiseMax(0.0);
      if (l < masks.size() && masks[l].size() > 0) a = a.cwiseProduct(masks[l]);
      f.activations[l + 1] = std::move(a);
    } else {
      f.activations[l + 1] = f.pre[l];
    }
  }
  f.probs = sigmoid(Eigen::VectorXd(f.activations[layers].col(0)));
  return f;
}

double mean_bce(const Eigen::VectorXd& probs, const Eigen::VectorXd& y) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    const double p = std::clamp(probs(i), 1e-15, 1.0 - 1e-15);
    total += -(y(i) * std::log(p) + (1.0 - y(i)) * std::log(1.0 - p));
  }
  return total / static_cast<double>(probs.size());
}

void backward_pass(const MlpModel& model, const Forward& f, const Eigen::VectorXd& y,
                   const std::vector<Eigen::MatrixXd>& masks,
                   std::vector<Eigen::MatrixXd>& grad_w, std::vector<Eigen::VectorXd>& grad_b) {
  const std::size_t layers = model.weights.size();
  const double inv_b = 1.0 / static_cast<double>(y.size());

  grad_w.resize(layers);
  grad_b.resize(layers);

  // Sigmoid + BCE fuse to (p - y) / B at the output pre-activation.
  Eigen::MatrixXd delta = (f.probs - y) * inv_b;
  for (std::size_t l = layers; l-- > 0;) {
    grad_w[l] = f.activations[l].transpose() * delta;
    grad_b[l] = delta.colwise().sum().transpose();
    if (l == 0) break;
    Eigen::MatrixXd upstream = delta * model.weights[l].transpose();
    if (l - 1 < masks.size() && masks[l - 1].size() > 0)
      upstream = upstream.cwiseProduct(masks[l - 1]);
    delta = upstream.cwiseProduct(
        (f.pre[l - 1].array() > 0.0).cast<double>().matrix());
  }
}

}  // namespace

MlpModel mlp_init(const MlpConfig& config, Eigen::Index n_features) {
  const auto widths = layer_widths(config, n_features);
  Rng rng(config.seed);
  MlpModel model;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const Eigen::Index fan_in = widths[l];
    const Eigen::Index fan_out = widths[l + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    Eigen::MatrixXd w(fan_in, fan_out);
    for (Eigen::Index r = 0; r < fan_in; ++r)
      for (Eigen::Index c = 0; c < fan_out; ++c) w(r, c) = rng.uniform(-bound, bound);
    model.weights.push_back(std::move(w));
    model.biases.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  return model;
}

std::size_t mlp_param_count(const MlpConfig& config, Eigen::Index n_features) {
  std::size_t count = 0;
  Eigen::Index fan_in = n_features;
  for (int w : config.hidden) {
    count += static_cast<std::size_t>(fan_in) * static_cast<std::size_t>(w) +
             static_cast<std::size_t>(w);
    fan_in = w;
  }
  count += static_cast<std::size_t>(fan_in) + 1;
  if (config.dropout > 0.0) {
    // Dropout-wrapped hidden layers register one per-unit mask slot each.
    for (int l : config.dropout_layers)
      if (l >= 0 && l < static_cast<int>(config.hidden.size()))
        count += static_cast<std::size_t>(config.hidden[static_cast<std::size_t>(l)]);
  }
  return count;
}

Eigen::VectorXd mlp_forward(const MlpModel& model, const Eigen::MatrixXd& X) {
  const std::vector<Eigen::MatrixXd> no_masks;
  return forward_pass(model, X, no_masks).probs;
}

double mlp_loss_grad(const MlpModel& model, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     std::vector<Eigen::MatrixXd>& grad_w, std::vector<Eigen::VectorXd>& grad_b) {
  const std::vector<Eigen::MatrixXd> no_masks;
  const Forward f = forward_pass(model, X, no_masks);
  backward_pass(model, f, y, no_masks, grad_w, grad_b);
  return mean_bce(f.probs, y);
}

ModelArtifact train_mlp(const Dataset& train, const MlpConfig& config) {
  LearnerConfig cfg{Family::MLP, config};
  cfg.validate();
  require_two_classes(train.y);

  MlpModel model = mlp_init(config, train.cols());
  const std::size_t layers = model.weights.size();

  struct AdamState {
    Eigen::MatrixXd mw, vw;
    Eigen::VectorXd mb, vb;
  };
  std::vector<AdamState> adam(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    adam[l].mw = Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols());
    adam[l].vw = adam[l].mw;
    adam[l].mb = Eigen::VectorXd::Zero(model.biases[l].size());
    adam[l].vb = adam[l].mb;
  }

  Rng order_rng(sub_seed(config.seed, "mlp-batch"));
  Rng mask_rng(sub_seed(config.seed, "mlp-dropout"));
  std::vector<std::size_t> order(static_cast<std::size_t>(train.rows()));
  std::iota(order.begin(), order.end(), std::size_t{0});

  const double keep = 1.0 - config.dropout;
  std::vector<Eigen::MatrixXd> grad_w;
  std::vector<Eigen::VectorXd> grad_b;
  long step = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    order_rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch)) {
      const std::size_t size = std::min(static_cast<std::size_t>(config.batch), order.size() - start);
      Eigen::MatrixXd Xb(static_cast<Eigen::Index>(size), train.cols());
      Eigen::VectorXd yb(static_cast<Eigen::Index>(size));
      for (std::size_t i = 0; i < size; ++i) {
        Xb.row(static_cast<Eigen::Index>(i)) = train.X.row(static_cast<Eigen::Index>(order[start + i]));
        yb(static_cast<Eigen::Index>(i)) = train.y(static_cast<Eigen::Index>(order[start + i]));
      }

      // Inverted dropout: scaled masks at train time, identity at inference.
      std::vector<Eigen::MatrixXd> masks(config.hidden.size());
      for (std::size_t l = 0; l < config.hidden.size(); ++l) {
        if (!dropout_applies(config, l)) continue;
        Eigen::MatrixXd mask(static_cast<Eigen::Index>(size), config.hidden[l]);
        for (Eigen::Index r = 0; r < mask.rows(); ++r)
          for (Eigen::Index c = 0; c < mask.cols(); ++c)
            mask(r, c) = mask_rng.bernoulli(keep) ? 1.0 / keep : 0.0;
        masks[l] = std::move(mask);
      }

      const Forward f = forward_pass(model, Xb, masks);
      const double loss = mean_bce(f.probs, yb);
      if (!std::isfinite(loss))
        throw Error("divergence", "loss became non-finite in epoch " + std::to_string(epoch));
      backward_pass(model, f, yb, masks, grad_w, grad_b);

      ++step;
      const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      for (std::size_t l = 0; l < layers; ++l) {
        auto& st = adam[l];
        st.mw = config.beta1 * st.mw + (1.0 - config.beta1) * grad_w[l];
        st.vw = config.beta2 * st.vw + (1.0 - config.beta2) * grad_w[l].cwiseProduct(grad_w[l]);
        st.mb = config.beta1 * st.mb + (1.0 - config.beta1) * grad_b[l];
        st.vb = config.beta2 * st.vb + (1.0 - config.beta2) * grad_b[l].cwiseProduct(grad_b[l]);
        model.weights[l].array() -=
            config.adam_step * (st.mw / bc1).array() /
            ((st.vw / bc2).array().sqrt() + config.epsilon);
        model.biases[l].array() -=
            config.adam_step * (st.mb / bc1).array() /
            ((st.vb / bc2).array().sqrt() + config.epsilon);
      }
    }
  }

  ModelArtifact artifact;
  artifact.family = Family::MLP;
  artifact.config = cfg;
  artifact.model = std::move(model);
  artifact.provenance.rows = train.rows();
  artifact.provenance.bad_rate = train.bad_rate();
  artifact.provenance.feature_names = train.feature_names;
  return artifact;
}

}  // namespace ccr
