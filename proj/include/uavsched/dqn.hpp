#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "uavsched/rng.hpp"

// Fully connected Q-network trained on squared Bellman error with experience
// replay and a periodically synchronized target copy. Outputs are expected
// discounted costs, so policies take the argmin.
namespace uavsched {

struct MlpParams {
  std::vector<int> layer_sizes;         // input, hidden..., output
  std::vector<Eigen::MatrixXd> weights; // layer l: out x in
  std::vector<Eigen::VectorXd> biases;

  // Zero parameters with the given shape.
  explicit MlpParams(std::vector<int> sizes = {});
  // Fan-in scaled uniform weights U(-1/sqrt(in), 1/sqrt(in)), zero biases.
  static MlpParams initialized(std::vector<int> sizes, Rng& rng);

  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
  int num_layers() const { return static_cast<int>(weights.size()); }
  std::size_t num_parameters() const;
  bool all_finite() const;

  // Flat view in layer order, weights row-major then biases.
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);

  bool operator==(const MlpParams& other) const;
};

// Rectifier on hidden layers, identity on the output.
Eigen::VectorXd forward(const MlpParams& params, std::span<const double> input);
// Column-per-sample batch: inputs are input_dim x N, result is output_dim x N.
Eigen::MatrixXd forward_batch(const MlpParams& params, const Eigen::MatrixXd& inputs);

struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  Gradients() = default;
  explicit Gradients(const MlpParams& shape);
  bool matches(const MlpParams& shape) const;
  double norm() const;
  void scale(double factor);
  std::vector<double> flatten() const;
};

// Mean over columns of (target - Q(x, action))^2; only the taken action's
// output enters. Fills grads with d loss / d params.
double loss_and_gradient(const MlpParams& params, const Eigen::MatrixXd& inputs, std::span<const int> actions,
                         std::span<const double> targets, Gradients& grads);
double batch_loss(const MlpParams& params, const Eigen::MatrixXd& inputs, std::span<const int> actions,
                  std::span<const double> targets);

struct AdamState {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  Gradients first;
  Gradients second;

  explicit AdamState(const MlpParams& shape, double lr = 1e-4);
  void apply(MlpParams& params, const Gradients& grads);
};

struct Experience {
  std::vector<double> state;
  int action = 0;
  double cost = 0.0;
  std::vector<double> next_state;
  bool terminal = false;
};

// Fixed-capacity ring; the oldest record is overwritten when full.
class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity = 5000);

  void push(Experience experience);
  std::size_t size() const { return records_.size(); }
  std::size_t capacity() const { return capacity_; }
  // i-th record in insertion order among those retained (0 = oldest).
  const Experience& at(std::size_t i) const;
  // Uniform indices with replacement into the retained records (storage order).
  std::vector<std::size_t> sample_indices(std::size_t batch_size, Rng& rng) const;
  std::vector<const Experience*> sample(std::size_t batch_size, Rng& rng) const;
  const Experience& slot(std::size_t storage_index) const { return records_[storage_index]; }

 private:
  std::size_t capacity_;
  std::size_t cursor_ = 0;
  std::vector<Experience> records_;
};

// y = cost for terminal records, else cost + discount * min_a' Q_target(s', a').
std::vector<double> td_targets(std::span<const Experience* const> batch, const MlpParams& online,
                               const MlpParams& target, double discount);

struct TrainStepSettings {
  int batch_size = 32;
  double discount = 0.99;
  double grad_clip = 10.0;   // global norm; <= 0 disables
  double cost_scale = 1.0;   // stored costs are divided by this
};

// One minibatch Adam update of the online network. Returns the loss before the update.
double train_step(MlpParams& online, const MlpParams& target, const ReplayMemory& memory, AdamState& adam,
                  const TrainStepSettings& settings, Rng& rng);

// Counts one learning update; on every period-th call copies online into target.
// Returns true when a copy happened.
bool sync_target(const MlpParams& online, MlpParams& target, std::int64_t& update_counter, int period);

// Argmin over outputs, ties to the smallest index.
int argmin_action(const Eigen::VectorXd& q);

// Versioned JSON checkpoint of the layer sizes, row-major weights and biases
// (exact decimal round trip) and the Adam step counter.
std::string checkpoint_json(const MlpParams& params, std::int64_t adam_step);
MlpParams parse_checkpoint(const std::string& text, std::int64_t* adam_step = nullptr);
void save_checkpoint(const std::filesystem::path& path, const MlpParams& params, std::int64_t adam_step);
MlpParams load_checkpoint(const std::filesystem::path& path, std::int64_t* adam_step = nullptr);

}  // namespace uavsched
