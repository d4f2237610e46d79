#include "uavsched/dqn.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "uavsched/errors.hpp"

namespace uavsched {

namespace {

constexpr int kCheckpointVersion = 1;

void check_sizes(const std::vector<int>& sizes) {
  if (sizes.size() < 2) throw ConfigError("layer_sizes: need at least input and output");
  for (int s : sizes) {
    if (s <= 0) throw ConfigError("layer_sizes: every layer must be positive");
  }
}

// Pre-activations and activations of every layer for a batch.
struct Trace {
  std::vector<Eigen::MatrixXd> pre;   // z_l, one per layer
  std::vector<Eigen::MatrixXd> post;  // a_0 = input, a_l = relu(z_l) (identity on the last)
};

Trace forward_trace(const MlpParams& params, const Eigen::MatrixXd& inputs) {
  Trace trace;
  trace.post.push_back(inputs);
  for (int l = 0; l < params.num_layers(); ++l) {
    Eigen::MatrixXd z = params.weights[l] * trace.post.back();
    z.colwise() += params.biases[l];
    Eigen::MatrixXd a = l + 1 < params.num_layers() ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z;
    trace.pre.push_back(std::move(z));
    trace.post.push_back(std::move(a));
  }
  return trace;
}

void check_batch(const MlpParams& params, const Eigen::MatrixXd& inputs, std::span<const int> actions,
                 std::span<const double> targets) {
  if (inputs.rows() != params.input_dim()) throw RuntimeFailure("input dimension mismatch");
  if (static_cast<Eigen::Index>(actions.size()) != inputs.cols() ||
      static_cast<Eigen::Index>(targets.size()) != inputs.cols()) {
    throw RuntimeFailure("batch size mismatch");
  }
  for (int a : actions) {
    if (a < 0 || a >= params.output_dim()) throw RuntimeFailure("action index out of range");
  }
}

}  // namespace

MlpParams::MlpParams(std::vector<int> sizes) : layer_sizes(std::move(sizes)) {
  if (layer_sizes.empty()) return;
  check_sizes(layer_sizes);
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    weights.push_back(Eigen::MatrixXd::Zero(layer_sizes[l + 1], layer_sizes[l]));
    biases.push_back(Eigen::VectorXd::Zero(layer_sizes[l + 1]));
  }
}

MlpParams MlpParams::initialized(std::vector<int> sizes, Rng& rng) {
  MlpParams p(std::move(sizes));
  for (int l = 0; l < p.num_layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(p.layer_sizes[l]));
    auto& w = p.weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = bound * (2.0 * rng.uniform() - 1.0);
    }
  }
  return p;
}

std::size_t MlpParams::num_parameters() const {
  std::size_t n = 0;
  for (int l = 0; l < num_layers(); ++l) n += weights[l].size() + biases[l].size();
  return n;
}

bool MlpParams::all_finite() const {
  for (int l = 0; l < num_layers(); ++l) {
    if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
  }
  return true;
}

std::vector<double> MlpParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(num_parameters());
  for (int l = 0; l < num_layers(); ++l) {
    for (Eigen::Index r = 0; r < weights[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < weights[l].cols(); ++c) flat.push_back(weights[l](r, c));
    }
    for (Eigen::Index r = 0; r < biases[l].size(); ++r) flat.push_back(biases[l][r]);
  }
  return flat;
}

void MlpParams::assign(std::span<const double> flat) {
  if (flat.size() != num_parameters()) throw RuntimeFailure("parameter count mismatch");
  std::size_t k = 0;
  for (int l = 0; l < num_layers(); ++l) {
    for (Eigen::Index r = 0; r < weights[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < weights[l].cols(); ++c) weights[l](r, c) = flat[k++];
    }
    for (Eigen::Index r = 0; r < biases[l].size(); ++r) biases[l][r] = flat[k++];
  }
}

bool MlpParams::operator==(const MlpParams& other) const {
  if (layer_sizes != other.layer_sizes) return false;
  for (int l = 0; l < num_layers(); ++l) {
    if (weights[l] != other.weights[l] || biases[l] != other.biases[l]) return false;
  }
  return true;
}

Eigen::VectorXd forward(const MlpParams& params, std::span<const double> input) {
  if (static_cast<int>(input.size()) != params.input_dim()) throw RuntimeFailure("input dimension mismatch");
  Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(input.data(), static_cast<Eigen::Index>(input.size()));
  for (int l = 0; l < params.num_layers(); ++l) {
    Eigen::VectorXd z = params.weights[l] * a + params.biases[l];
    a = l + 1 < params.num_layers() ? Eigen::VectorXd(z.cwiseMax(0.0)) : z;
  }
  return a;
}

Eigen::MatrixXd forward_batch(const MlpParams& params, const Eigen::MatrixXd& inputs) {
  if (inputs.rows() != params.input_dim()) throw RuntimeFailure("input dimension mismatch");
  Eigen::MatrixXd a = inputs;
  for (int l = 0; l < params.num_layers(); ++l) {
    Eigen::MatrixXd z = params.weights[l] * a;
    z.colwise() += params.biases[l];
    a = l + 1 < params.num_layers() ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z;
  }
  return a;
}

Gradients::Gradients(const MlpParams& shape) {
  for (int l = 0; l < shape.num_layers(); ++l) {
    weights.push_back(Eigen::MatrixXd::Zero(shape.weights[l].rows(), shape.weights[l].cols()));
    biases.push_back(Eigen::VectorXd::Zero(shape.biases[l].size()));
  }
}

bool Gradients::matches(const MlpParams& shape) const {
  if (weights.size() != static_cast<std::size_t>(shape.num_layers())) return false;
  for (int l = 0; l < shape.num_layers(); ++l) {
    if (weights[l].rows() != shape.weights[l].rows() || weights[l].cols() != shape.weights[l].cols()) return false;
  }
  return true;
}

double Gradients::norm() const {
  double sq = 0.0;
  for (std::size_t l = 0; l < weights.size(); ++l) sq += weights[l].squaredNorm() + biases[l].squaredNorm();
  return std::sqrt(sq);
}

void Gradients::scale(double factor) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l] *= factor;
    biases[l] *= factor;
  }
}

std::vector<double> Gradients::flatten() const {
  std::vector<double> flat;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    for (Eigen::Index r = 0; r < weights[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < weights[l].cols(); ++c) flat.push_back(weights[l](r, c));
    }
    for (Eigen::Index r = 0; r < biases[l].size(); ++r) flat.push_back(biases[l][r]);
  }
  return flat;
}

double batch_loss(const MlpParams& params, const Eigen::MatrixXd& inputs, std::span<const int> actions,
                  std::span<const double> targets) {
  check_batch(params, inputs, actions, targets);
  const Eigen::MatrixXd q = forward_batch(params, inputs);
  double loss = 0.0;
  for (Eigen::Index n = 0; n < q.cols(); ++n) {
    const double r = targets[n] - q(actions[n], n);
    loss += r * r;
  }
  return loss / static_cast<double>(q.cols());
}

double loss_and_gradient(const MlpParams& params, const Eigen::MatrixXd& inputs, std::span<const int> actions,
                         std::span<const double> targets, Gradients& grads) {
  check_batch(params, inputs, actions, targets);
  const Trace trace = forward_trace(params, inputs);
  const Eigen::Index batch = inputs.cols();
  const Eigen::MatrixXd& q = trace.post.back();

  Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(q.rows(), batch);
  double loss = 0.0;
  for (Eigen::Index n = 0; n < batch; ++n) {
    const double r = q(actions[n], n) - targets[n];
    loss += r * r;
    delta(actions[n], n) = 2.0 * r / static_cast<double>(batch);
  }
  for (int l = params.num_layers() - 1; l >= 0; --l) {
    grads.weights[l].noalias() = delta * trace.post[l].transpose();
    grads.biases[l] = delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd back = params.weights[l].transpose() * delta;
      delta = back.cwiseProduct((trace.pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  return loss / static_cast<double>(batch);
}

AdamState::AdamState(const MlpParams& shape, double lr) : learning_rate(lr), first(shape), second(shape) {}

void AdamState::apply(MlpParams& params, const Gradients& grads) {
  ++step;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
  auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
    m = beta1 * m + (1.0 - beta1) * g;
    v = beta2 * v + (1.0 - beta2) * g.cwiseProduct(g);
    param.array() -= learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + epsilon);
  };
  for (int l = 0; l < params.num_layers(); ++l) {
    update(params.weights[l], grads.weights[l], first.weights[l], second.weights[l]);
    update(params.biases[l], grads.biases[l], first.biases[l], second.biases[l]);
  }
}

ReplayMemory::ReplayMemory(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("replay_capacity: must be positive");
  records_.reserve(capacity);
}

void ReplayMemory::push(Experience experience) {
  if (records_.size() < capacity_) {
    records_.push_back(std::move(experience));
  } else {
    records_[cursor_] = std::move(experience);
  }
  cursor_ = (cursor_ + 1) % capacity_;
}

const Experience& ReplayMemory::at(std::size_t i) const {
  if (i >= records_.size()) throw RuntimeFailure("replay index out of range");
  return records_.size() < capacity_ ? records_[i] : records_[(cursor_ + i) % capacity_];
}

std::vector<std::size_t> ReplayMemory::sample_indices(std::size_t batch_size, Rng& rng) const {
  if (batch_size == 0 || records_.size() < batch_size) {
    throw RuntimeFailure("replay memory holds " + std::to_string(records_.size()) + " records, fewer than batch " +
                         std::to_string(batch_size));
  }
  std::vector<std::size_t> idx(batch_size);
  for (auto& i : idx) i = rng.uniform_index(records_.size());
  return idx;
}

std::vector<const Experience*> ReplayMemory::sample(std::size_t batch_size, Rng& rng) const {
  std::vector<const Experience*> batch;
  for (std::size_t i : sample_indices(batch_size, rng)) batch.push_back(&records_[i]);
  return batch;
}

int argmin_action(const Eigen::VectorXd& q) {
  int best = 0;
  for (Eigen::Index a = 1; a < q.size(); ++a) {
    if (q[a] < q[best]) best = static_cast<int>(a);
  }
  return best;
}

std::vector<double> td_targets(std::span<const Experience* const> batch, const MlpParams& /*online*/,
                               const MlpParams& target, double discount) {
  if (batch.empty()) throw RuntimeFailure("td_targets: empty batch");
  std::vector<double> y(batch.size());
  std::vector<std::size_t> open;
  for (std::size_t n = 0; n < batch.size(); ++n) {
    y[n] = batch[n]->cost;
    if (!batch[n]->terminal && discount != 0.0) open.push_back(n);
  }
  if (open.empty()) return y;
  Eigen::MatrixXd next(target.input_dim(), static_cast<Eigen::Index>(open.size()));
  for (std::size_t k = 0; k < open.size(); ++k) {
    const auto& s = batch[open[k]]->next_state;
    if (static_cast<int>(s.size()) != target.input_dim()) throw RuntimeFailure("input dimension mismatch");
    next.col(static_cast<Eigen::Index>(k)) = Eigen::Map<const Eigen::VectorXd>(s.data(), target.input_dim());
  }
  const Eigen::MatrixXd q = forward_batch(target, next);
  for (std::size_t k = 0; k < open.size(); ++k) y[open[k]] += discount * q.col(static_cast<Eigen::Index>(k)).minCoeff();
  return y;
}

double train_step(MlpParams& online, const MlpParams& target, const ReplayMemory& memory, AdamState& adam,
                  const TrainStepSettings& settings, Rng& rng) {
  const auto batch = memory.sample(static_cast<std::size_t>(settings.batch_size), rng);
  std::vector<double> y = td_targets(batch, online, target, settings.discount);
  if (settings.cost_scale != 1.0) {
    // Targets are rebuilt in scaled units: the cost part is divided, the bootstrap part already is.
    const double inv = 1.0 / settings.cost_scale;
    for (std::size_t n = 0; n < batch.size(); ++n) y[n] += batch[n]->cost * (inv - 1.0);
  }
  Eigen::MatrixXd inputs(online.input_dim(), settings.batch_size);
  std::vector<int> actions(batch.size());
  for (std::size_t n = 0; n < batch.size(); ++n) {
    inputs.col(static_cast<Eigen::Index>(n)) =
        Eigen::Map<const Eigen::VectorXd>(batch[n]->state.data(), online.input_dim());
    actions[n] = batch[n]->action;
  }
  // Reused across calls; layer buffers are large enough that fresh allocations dominate small batches.
  thread_local Gradients grads;
  if (!grads.matches(online)) grads = Gradients(online);
  const double loss = loss_and_gradient(online, inputs, actions, y, grads);
  if (settings.grad_clip > 0.0) {
    const double norm = grads.norm();
    if (norm > settings.grad_clip) grads.scale(settings.grad_clip / norm);
  }
  adam.apply(online, grads);
  return loss;
}

bool sync_target(const MlpParams& online, MlpParams& target, std::int64_t& update_counter, int period) {
  if (period < 1) throw ConfigError("target_period: must be at least 1");
  if (++update_counter % period != 0) return false;
  target = online;
  return true;
}

std::string checkpoint_json(const MlpParams& params, std::int64_t adam_step) {
  nlohmann::json j;
  j["format"] = "uavsched-mlp";
  j["version"] = kCheckpointVersion;
  j["layer_sizes"] = params.layer_sizes;
  j["adam_step"] = adam_step;
  j["layers"] = nlohmann::json::array();
  for (int l = 0; l < params.num_layers(); ++l) {
    std::vector<double> w;
    for (Eigen::Index r = 0; r < params.weights[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < params.weights[l].cols(); ++c) w.push_back(params.weights[l](r, c));
    }
    std::vector<double> b(params.biases[l].data(), params.biases[l].data() + params.biases[l].size());
    j["layers"].push_back({{"weights", w}, {"biases", b}});
  }
  return j.dump();
}

MlpParams parse_checkpoint(const std::string& text, std::int64_t* adam_step) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw RuntimeFailure(std::string("checkpoint: ") + e.what());
  }
  if (j.value("format", "") != "uavsched-mlp") throw RuntimeFailure("checkpoint: unrecognized format");
  if (j.value("version", 0) != kCheckpointVersion) throw RuntimeFailure("checkpoint: unsupported version");
  MlpParams p(j.at("layer_sizes").get<std::vector<int>>());
  const auto& layers = j.at("layers");
  if (static_cast<int>(layers.size()) != p.num_layers()) throw RuntimeFailure("checkpoint: layer count mismatch");
  for (int l = 0; l < p.num_layers(); ++l) {
    const auto w = layers[l].at("weights").get<std::vector<double>>();
    const auto b = layers[l].at("biases").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(w.size()) != p.weights[l].size() ||
        static_cast<Eigen::Index>(b.size()) != p.biases[l].size()) {
      throw RuntimeFailure("checkpoint: layer shape mismatch");
    }
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < p.weights[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < p.weights[l].cols(); ++c) p.weights[l](r, c) = w[k++];
    }
    for (Eigen::Index r = 0; r < p.biases[l].size(); ++r) p.biases[l][r] = b[r];
  }
  if (adam_step) *adam_step = j.at("adam_step").get<std::int64_t>();
  return p;
}

void save_checkpoint(const std::filesystem::path& path, const MlpParams& params, std::int64_t adam_step) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  out << checkpoint_json(params, adam_step) << '\n';
}

MlpParams load_checkpoint(const std::filesystem::path& path, std::int64_t* adam_step) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RuntimeFailure("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_checkpoint(buf.str(), adam_step);
}

}  // namespace uavsched
