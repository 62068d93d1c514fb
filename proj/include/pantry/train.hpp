#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pantry/graph.hpp"
#include "pantry/tensor.hpp"

namespace pantry::train {

/// Adam optimizer state: per-parameter first/second moment estimates plus
/// the shared step counter. Moments start at zero; t increments by exactly
/// one per step().
class AdamState {
 public:
  explicit AdamState(float learning_rate = 0.001f, float beta1 = 0.9f, float beta2 = 0.999f,
                     float epsilon = 1e-8f);

  /// One update over every trainable parameter:
  ///   m <- b1*m + (1-b1)*g,  v <- b2*v + (1-b2)*g^2
  ///   p <- p - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
  /// Non-trainable parameters are untouched; a trainable parameter without a
  /// gradient is a StateError.
  void step(std::map<std::string, Tensor>& params);

  std::int64_t step_count() const { return t_; }
  float learning_rate() const { return lr_; }
  void set_learning_rate(float lr) { lr_ = lr; }

 private:
  float lr_, beta1_, beta2_, epsilon_;
  std::int64_t t_ = 0;
  std::map<std::string, std::vector<float>> m_, v_;
};

enum class LrSchedule { none, reduce_on_plateau };

struct TrainConfig {
  int epochs = 20;
  int batch_size = 32;
  std::uint64_t seed = 0;
  /// Freeze retained base parameters before training (graph must carry
  /// replace_head surgery metadata). When false, trainable flags are left
  /// exactly as they are.
  bool freeze_base = true;
  float learning_rate = 0.001f;
  LrSchedule lr_schedule = LrSchedule::none;
  float plateau_factor = 0.1f;
  int plateau_patience = 2;
};

/// Supplier of (inputs, one-hot targets) batches. start_epoch(e) re-shuffles
/// deterministically; next() returns false at the end of the epoch.
class BatchSource {
 public:
  virtual ~BatchSource() = default;
  virtual void start_epoch(int epoch) = 0;
  virtual bool next(Tensor& inputs, Tensor& targets) = 0;
  virtual std::size_t size() const = 0;
};

/// Pre-materialized dataset, mainly for tests and synthetic data. Splits
/// [M,...] inputs and [M,K] targets into batches, shuffling per epoch when a
/// seed is given.
class InMemoryBatches : public BatchSource {
 public:
  InMemoryBatches(Tensor inputs, Tensor targets, int batch_size, std::uint64_t seed,
                  bool shuffle);

  void start_epoch(int epoch) override;
  bool next(Tensor& inputs, Tensor& targets) override;
  std::size_t size() const override { return order_.size(); }

 private:
  Tensor inputs_, targets_;
  int batch_size_;
  std::uint64_t seed_;
  bool shuffle_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

struct EpochStats {
  int epoch = 0;  // 1-based
  double train_loss = 0, train_acc = 0;
  double val_loss = 0, val_acc = 0;
};

/// Trains the graph with Adam + categorical cross-entropy. Deterministic for
/// a fixed seed, config, data, and kernel backend. Training accuracy is
/// measured on the pre-update forward pass of each batch.
std::vector<EpochStats> fit(graph::LayerGraph& graph, BatchSource& train_data,
                            BatchSource& val_data, const TrainConfig& config);

/// `epoch,train_loss,train_acc,val_loss,val_acc` rows.
std::string history_csv(const std::vector<EpochStats>& history);

struct EvalReport {
  double accuracy = 0;
  int num_classes = 0;
  std::vector<std::int64_t> confusion;  // K*K row-major, rows = true class
  std::vector<double> precision, recall;
  std::int64_t total = 0;

  std::int64_t at(int true_class, int predicted) const {
    return confusion[static_cast<std::size_t>(true_class) * num_classes + predicted];
  }
};

/// Argmax evaluation (ties go to the lowest class index).
EvalReport evaluate(const graph::LayerGraph& graph, BatchSource& data);

std::string report_json(const EvalReport& report, const std::vector<std::string>& class_names);

enum class ParamSelector { base, head, all };

/// Flips trainable flags. base/head require replace_head surgery metadata.
void set_trainable(graph::LayerGraph& graph, ParamSelector selector, bool trainable);

}  // namespace pantry::train
