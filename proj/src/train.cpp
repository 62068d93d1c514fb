#include "pantry/train.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "pantry/kernels.hpp"
#include "pantry/ops.hpp"
#include "pantry/rng.hpp"

namespace pantry::train {

AdamState::AdamState(float learning_rate, float beta1, float beta2, float epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {}

void AdamState::step(std::map<std::string, Tensor>& params) {
  ++t_;
  const float bc1 = 1.0f - std::pow(beta1_, static_cast<float>(t_));
  const float bc2 = 1.0f - std::pow(beta2_, static_cast<float>(t_));
  for (auto& [name, p] : params) {
    if (!p.requires_grad()) continue;
    if (!p.has_grad()) {
      throw StateError("adam_step: trainable parameter " + name + " has no gradient");
    }
    auto& m = m_[name];
    auto& v = v_[name];
    if (m.empty()) m.assign(p.numel(), 0.0f);
    if (v.empty()) v.assign(p.numel(), 0.0f);
    if (m.size() != p.numel()) {
      throw StateError("adam_step: state size mismatch for parameter " + name);
    }
    kernels::adam_update(p.numel(), p.data(), p.grad(), m.data(), v.data(), beta1_, beta2_, lr_,
                         epsilon_, bc1, bc2);
  }
}

InMemoryBatches::InMemoryBatches(Tensor inputs, Tensor targets, int batch_size,
                                 std::uint64_t seed, bool shuffle)
    : inputs_(std::move(inputs)),
      targets_(std::move(targets)),
      batch_size_(batch_size),
      seed_(seed),
      shuffle_(shuffle) {
  if (batch_size_ <= 0) throw ArgumentError("batch_size must be positive");
  if (inputs_.dim(0) != targets_.dim(0)) {
    throw ArgumentError("inputs and targets disagree on sample count");
  }
  order_.resize(static_cast<std::size_t>(inputs_.dim(0)));
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
}

void InMemoryBatches::start_epoch(int epoch) {
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
  if (shuffle_) {
    Rng rng = Rng::keyed(seed_, static_cast<std::uint64_t>(epoch));
    rng.shuffle(order_);
  }
  cursor_ = 0;
}

bool InMemoryBatches::next(Tensor& inputs, Tensor& targets) {
  if (cursor_ >= order_.size()) return false;
  const std::size_t count = std::min(static_cast<std::size_t>(batch_size_),
                                     order_.size() - cursor_);
  Shape in_shape = inputs_.shape();
  in_shape[0] = static_cast<int>(count);
  Shape tg_shape = targets_.shape();
  tg_shape[0] = static_cast<int>(count);
  inputs = Tensor::zeros(in_shape);
  targets = Tensor::zeros(tg_shape);
  const std::size_t in_stride = inputs_.numel() / static_cast<std::size_t>(inputs_.dim(0));
  const std::size_t tg_stride = targets_.numel() / static_cast<std::size_t>(targets_.dim(0));
  for (std::size_t b = 0; b < count; ++b) {
    const std::size_t src = order_[cursor_ + b];
    std::copy_n(inputs_.data() + src * in_stride, in_stride, inputs.data() + b * in_stride);
    std::copy_n(targets_.data() + src * tg_stride, tg_stride, targets.data() + b * tg_stride);
  }
  cursor_ += count;
  return true;
}

namespace {

int argmax_row(const float* row, int k) {
  int best = 0;
  for (int i = 1; i < k; ++i) {
    if (row[i] > row[best]) best = i;
  }
  return best;
}

int head_width(const graph::LayerGraph& g) {
  for (auto it = g.layers.rbegin(); it != g.layers.rend(); ++it) {
    if (it->kind == graph::LayerKind::dense) return it->filters;
  }
  throw StructureError("graph has no dense layer");
}

struct PassStats {
  double loss_sum = 0;
  std::int64_t correct = 0;
  std::int64_t total = 0;
};

void tally(PassStats& stats, const Tensor& probs, const Tensor& targets, double loss) {
  const int n = probs.dim(0);
  const int k = probs.dim(1);
  stats.loss_sum += loss * n;
  stats.total += n;
  for (int i = 0; i < n; ++i) {
    const float* prow = probs.data() + static_cast<std::size_t>(i) * k;
    const float* trow = targets.data() + static_cast<std::size_t>(i) * k;
    if (argmax_row(prow, k) == argmax_row(trow, k)) ++stats.correct;
  }
}

}  // namespace

std::vector<EpochStats> fit(graph::LayerGraph& graph, BatchSource& train_data,
                            BatchSource& val_data, const TrainConfig& config) {
  if (config.epochs <= 0) throw ArgumentError("fit: epochs must be positive");
  if (config.batch_size <= 0) throw ArgumentError("fit: batch_size must be positive");
  const int width = head_width(graph);

  if (config.freeze_base) set_trainable(graph, ParamSelector::base, false);

  AdamState adam(config.learning_rate);
  std::vector<EpochStats> history;
  double best_val_loss = 0;
  bool have_best = false;
  int epochs_since_improve = 0;

  Tape tape;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    PassStats train_stats;
    train_data.start_epoch(epoch);
    Tensor inputs, targets;
    int batch_index = 0;
    while (train_data.next(inputs, targets)) {
      if (targets.ndim() != 2 || targets.dim(1) != width) {
        throw ArgumentError("fit: label width " +
                            std::to_string(targets.ndim() == 2 ? targets.dim(1) : -1) +
                            " does not match head width " + std::to_string(width));
      }
      Tensor probs, loss;
      try {
        Tape::Scope scope(tape);
        probs = graph::forward(graph, inputs);
        loss = ops::cross_entropy(probs, targets);
        const double loss_value = loss.item();
        if (!std::isfinite(loss_value)) {
          throw NumericError("non-finite loss");
        }
        tally(train_stats, probs, targets, loss_value);
        for (auto& [name, p] : graph.params) {
          if (p.requires_grad()) p.zero_grad();
        }
        ops::backward(loss);
      } catch (const NumericError& e) {
        tape.clear();
        throw NumericError("fit: " + std::string(e.what()) + " at epoch " +
                           std::to_string(epoch + 1) + ", batch " +
                           std::to_string(batch_index + 1));
      }
      adam.step(graph.params);
      ++batch_index;
    }

    PassStats val_stats;
    val_data.start_epoch(epoch);
    while (val_data.next(inputs, targets)) {
      Tensor probs = graph::forward(graph, inputs);
      Tensor loss = ops::cross_entropy(probs, targets);
      tally(val_stats, probs, targets, loss.item());
    }

    EpochStats row;
    row.epoch = epoch + 1;
    row.train_loss = train_stats.total ? train_stats.loss_sum / train_stats.total : 0;
    row.train_acc = train_stats.total ? static_cast<double>(train_stats.correct) / train_stats.total : 0;
    row.val_loss = val_stats.total ? val_stats.loss_sum / val_stats.total : 0;
    row.val_acc = val_stats.total ? static_cast<double>(val_stats.correct) / val_stats.total : 0;
    history.push_back(row);

    if (config.lr_schedule == LrSchedule::reduce_on_plateau && val_stats.total) {
      if (!have_best || row.val_loss < best_val_loss) {
        best_val_loss = row.val_loss;
        have_best = true;
        epochs_since_improve = 0;
      } else if (++epochs_since_improve >= config.plateau_patience) {
        adam.set_learning_rate(adam.learning_rate() * config.plateau_factor);
        epochs_since_improve = 0;
      }
    }
  }
  return history;
}

std::string history_csv(const std::vector<EpochStats>& history) {
  std::ostringstream os;
  os << "epoch,train_loss,train_acc,val_loss,val_acc\n";
  os.precision(9);
  for (const auto& row : history) {
    os << row.epoch << "," << row.train_loss << "," << row.train_acc << "," << row.val_loss
       << "," << row.val_acc << "\n";
  }
  return os.str();
}

EvalReport evaluate(const graph::LayerGraph& graph, BatchSource& data) {
  const int k = head_width(graph);
  EvalReport report;
  report.num_classes = k;
  report.confusion.assign(static_cast<std::size_t>(k) * k, 0);

  data.start_epoch(0);
  Tensor inputs, targets;
  while (data.next(inputs, targets)) {
    Tensor probs = graph::forward(graph, inputs);
    const int n = probs.dim(0);
    for (int i = 0; i < n; ++i) {
      const int pred = argmax_row(probs.data() + static_cast<std::size_t>(i) * k, k);
      const int truth = argmax_row(targets.data() + static_cast<std::size_t>(i) * k, k);
      ++report.confusion[static_cast<std::size_t>(truth) * k + pred];
      ++report.total;
    }
  }
  if (report.total == 0) throw ArgumentError("evaluate: no samples");

  std::int64_t diagonal = 0;
  report.precision.assign(k, 0.0);
  report.recall.assign(k, 0.0);
  for (int c = 0; c < k; ++c) {
    diagonal += report.at(c, c);
    std::int64_t row_sum = 0, col_sum = 0;
    for (int j = 0; j < k; ++j) {
      row_sum += report.at(c, j);
      col_sum += report.at(j, c);
    }
    report.recall[c] = row_sum ? static_cast<double>(report.at(c, c)) / row_sum : 0.0;
    report.precision[c] = col_sum ? static_cast<double>(report.at(c, c)) / col_sum : 0.0;
  }
  report.accuracy = static_cast<double>(diagonal) / static_cast<double>(report.total);
  return report;
}

std::string report_json(const EvalReport& report, const std::vector<std::string>& class_names) {
  nlohmann::json j;
  j["accuracy"] = report.accuracy;
  j["total"] = report.total;
  j["classes"] = class_names;
  j["confusion_matrix"] = report.confusion;  // row-major, rows = true class
  j["precision"] = report.precision;
  j["recall"] = report.recall;
  return j.dump(2);
}

void set_trainable(graph::LayerGraph& graph, ParamSelector selector, bool trainable) {
  if (selector != ParamSelector::all && !graph.has_surgery()) {
    throw StructureError("set_trainable: graph has no base/head surgery metadata");
  }
  for (auto& [name, p] : graph.params) {
    const bool head = graph.is_head_param(name);
    if (selector == ParamSelector::all || (selector == ParamSelector::head && head) ||
        (selector == ParamSelector::base && !head)) {
      p.set_requires_grad(trainable);
    }
  }
}

}  // namespace pantry::train
