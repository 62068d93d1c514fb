#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pantry/rng.hpp"
#include "pantry/tensor.hpp"

namespace pantry::graph {

enum class LayerKind { conv, maxpool, avgpool, flatten, dense, softmax, residual_add };

std::string kind_name(LayerKind kind);

/// One layer of the linear chain. `counted` marks layers that contribute to
/// the 50-layer tally: convolutions and dense layers only, never pooling or
/// activations. For avgpool, kernel == 0 means "global": the window spans the
/// full spatial extent at that point.
struct LayerSpec {
  LayerKind kind = LayerKind::conv;
  std::string name;
  int filters = 0;  // conv output channels / dense units
  int kernel = 0;   // conv kernel or pool window (square)
  int stride = 1;
  int padding = 0;
  bool relu_after = false;
  bool counted = false;
  int stage = 0;  // 0 = stem, 1..S = bottleneck stages, S+1 = head
};

/// Skip connection feeding a residual_add layer. `source` is the index of
/// the layer whose output joins the chain (-1 for the graph input). When the
/// shapes differ a 1x1 projection convolution bridges them; its parameters
/// live under `name` and stay out of the layer tally.
struct Shortcut {
  int source = -1;
  int add_index = -1;
  bool has_projection = false;
  std::string name;
  int filters = 0;
  int stride = 1;
};

/// Ordered network description plus its parameter tensors. Parameters are
/// keyed "<layer>.weight" / "<layer>.bias"; copying the graph copies tensor
/// handles, so two copies share the same underlying buffers.
struct LayerGraph {
  std::vector<LayerSpec> layers;
  std::vector<Shortcut> shortcuts;
  std::map<std::string, Tensor> params;
  Shape input_shape;   // declared [C,H,W], no batch dimension
  int num_stages = 0;
  /// Set by replace_head: index of the first head layer appended by the
  /// surgery. Parameters created by the surgery are the "head" selector's
  /// targets; everything older is "base".
  std::optional<int> head_start;
  std::vector<std::string> head_param_names;

  const Shortcut* shortcut_for(int add_index) const;
  bool has_surgery() const { return head_start.has_value(); }
  bool is_head_param(const std::string& param_name) const;
};

inline constexpr std::uint64_t kDefaultInitSeed = 0x9A11B0A7u;

/// The 50-layer network: 7x7/64 stride-2 stem, 3x3 stride-2 max pool, four
/// bottleneck stages with channel triples (64,64,256)x3, (128,128,512)x4,
/// (256,256,1024)x6, (512,512,2048)x3, global average pool, dense head,
/// softmax.
LayerGraph build_resnet50(int num_classes = 1000, std::uint64_t seed = kDefaultInitSeed);

/// Desk-scale variant with the same block pattern: 3x3/8 stem, stages
/// (8,8,32)x2 and (16,16,64)x2, global average pool, dense head, softmax.
/// input_size must be >= 16.
LayerGraph build_micro_resnet(int input_size, int num_classes,
                              std::uint64_t seed = kDefaultInitSeed);

/// Transfer-learning surgery: strips the trailing dense+softmax (and the
/// flatten a previous surgery added), appends flatten + fresh dense +
/// softmax. Retained parameter tensors are the same objects as the input's
/// and are marked non-trainable; the new head is trainable.
LayerGraph replace_head(const LayerGraph& graph, int new_num_classes,
                        std::uint64_t seed = kDefaultInitSeed);

struct ShapeRow {
  int index = 0;
  std::string kind;
  std::string detail;
  Shape output;
  bool counted = false;
};

/// Walks the graph symbolically from `input` ([N,C,H,W]) and returns one row
/// per layer. Throws StructureError naming the first inconsistent layer.
std::vector<ShapeRow> infer_shapes(const LayerGraph& graph, const Shape& input);

struct LayerCount {
  int stem = 0;
  std::vector<int> stages;
  int head = 0;
  int total = 0;
  /// e.g. "1+9+12+18+9+1=50"
  std::string formula() const;
};

LayerCount count_layers(const LayerGraph& graph);

/// Batched forward pass; records on the active tape if one is in scope.
Tensor forward(const LayerGraph& graph, const Tensor& input);

/// Scaled uniform fan-in fill: uniform in [-sqrt(6/fan_in), +sqrt(6/fan_in)].
void init_uniform_fanin(Tensor& t, int fan_in, Rng& rng);

}  // namespace pantry::graph
