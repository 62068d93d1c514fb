#include "pantry/graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "pantry/ops.hpp"

namespace pantry::graph {

std::string kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv: return "conv";
    case LayerKind::maxpool: return "maxpool";
    case LayerKind::avgpool: return "avgpool";
    case LayerKind::flatten: return "flatten";
    case LayerKind::dense: return "dense";
    case LayerKind::softmax: return "softmax";
    case LayerKind::residual_add: return "residual_add";
  }
  return "?";
}

const Shortcut* LayerGraph::shortcut_for(int add_index) const {
  for (const auto& s : shortcuts) {
    if (s.add_index == add_index) return &s;
  }
  return nullptr;
}

bool LayerGraph::is_head_param(const std::string& param_name) const {
  return std::find(head_param_names.begin(), head_param_names.end(), param_name) !=
         head_param_names.end();
}

void init_uniform_fanin(Tensor& t, int fan_in, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
  for (auto& v : t.values()) v = static_cast<float>(rng.uniform(-limit, limit));
}

namespace {

// Incremental builder: tracks layer indices, channel counts, and parameter
// creation so the two architectures share one code path.
class Builder {
 public:
  Builder(LayerGraph& g, std::uint64_t seed) : g_(g), rng_(seed) {}

  int conv(const std::string& name, int in_ch, int filters, int kernel, int stride, int padding,
           int stage, bool counted = true, bool relu_after = true) {
    LayerSpec spec;
    spec.kind = LayerKind::conv;
    spec.name = name;
    spec.filters = filters;
    spec.kernel = kernel;
    spec.stride = stride;
    spec.padding = padding;
    spec.relu_after = relu_after;
    spec.counted = counted;
    spec.stage = stage;
    g_.layers.push_back(spec);
    make_conv_params(name, in_ch, filters, kernel);
    return static_cast<int>(g_.layers.size()) - 1;
  }

  int pool(LayerKind kind, const std::string& name, int window, int stride, int padding,
           int stage) {
    LayerSpec spec;
    spec.kind = kind;
    spec.name = name;
    spec.kernel = window;
    spec.stride = stride;
    spec.padding = padding;
    spec.stage = stage;
    g_.layers.push_back(spec);
    return static_cast<int>(g_.layers.size()) - 1;
  }

  int flatten(const std::string& name, int stage) {
    LayerSpec spec;
    spec.kind = LayerKind::flatten;
    spec.name = name;
    spec.stage = stage;
    g_.layers.push_back(spec);
    return static_cast<int>(g_.layers.size()) - 1;
  }

  int dense(const std::string& name, int in_features, int units, int stage) {
    LayerSpec spec;
    spec.kind = LayerKind::dense;
    spec.name = name;
    spec.filters = units;
    spec.counted = true;
    spec.stage = stage;
    g_.layers.push_back(spec);
    auto w = Tensor::zeros({units, in_features}, true);
    init_uniform_fanin(w, in_features, rng_);
    g_.params[name + ".weight"] = w;
    g_.params[name + ".bias"] = Tensor::zeros({units}, true);
    return static_cast<int>(g_.layers.size()) - 1;
  }

  int softmax(const std::string& name, int stage) {
    LayerSpec spec;
    spec.kind = LayerKind::softmax;
    spec.name = name;
    spec.stage = stage;
    g_.layers.push_back(spec);
    return static_cast<int>(g_.layers.size()) - 1;
  }

  /// One bottleneck block: 1x1 reduce, 3x3, 1x1 expand, residual join.
  /// Returns the output channel count.
  void bottleneck(const std::string& prefix, int stage, int in_ch, int mid_ch, int out_ch,
                  int stride3x3, bool project) {
    const int entry = static_cast<int>(g_.layers.size()) - 1;  // block input layer
    conv(prefix + ".conv1", in_ch, mid_ch, 1, 1, 0, stage);
    conv(prefix + ".conv2", mid_ch, mid_ch, 3, stride3x3, 1, stage);
    conv(prefix + ".conv3", mid_ch, out_ch, 1, 1, 0, stage);

    LayerSpec addspec;
    addspec.kind = LayerKind::residual_add;
    addspec.name = prefix + ".add";
    addspec.relu_after = true;
    addspec.stage = stage;
    g_.layers.push_back(addspec);
    const int add_index = static_cast<int>(g_.layers.size()) - 1;

    Shortcut sc;
    sc.source = entry;
    sc.add_index = add_index;
    if (project) {
      sc.has_projection = true;
      sc.name = prefix + ".proj";
      sc.filters = out_ch;
      sc.stride = stride3x3;
      make_conv_params(sc.name, in_ch, out_ch, 1);
    }
    g_.shortcuts.push_back(sc);
  }

  void stage(int stage_index, int blocks, int in_ch, int mid_ch, int out_ch, bool downsample) {
    for (int b = 1; b <= blocks; ++b) {
      std::ostringstream prefix;
      prefix << "stage" << stage_index << ".block" << b;
      const bool first = b == 1;
      bottleneck(prefix.str(), stage_index, first ? in_ch : out_ch, mid_ch, out_ch,
                 first && downsample ? 2 : 1, first);
    }
  }

 private:
  void make_conv_params(const std::string& name, int in_ch, int filters, int kernel) {
    auto w = Tensor::zeros({filters, in_ch, kernel, kernel}, true);
    init_uniform_fanin(w, in_ch * kernel * kernel, rng_);
    g_.params[name + ".weight"] = w;
    g_.params[name + ".bias"] = Tensor::zeros({filters}, true);
  }

  LayerGraph& g_;
  Rng rng_;
};

}  // namespace

LayerGraph build_resnet50(int num_classes, std::uint64_t seed) {
  if (num_classes <= 0) throw ArgumentError("build_resnet50: num_classes must be positive");
  LayerGraph g;
  g.input_shape = {3, 224, 224};
  g.num_stages = 4;
  Builder b(g, seed);

  b.conv("stem.conv", 3, 64, 7, 2, 3, 0);
  b.pool(LayerKind::maxpool, "stem.pool", 3, 2, 1, 0);

  b.stage(1, 3, 64, 64, 256, false);
  b.stage(2, 4, 256, 128, 512, true);
  b.stage(3, 6, 512, 256, 1024, true);
  b.stage(4, 3, 1024, 512, 2048, true);

  const int head_stage = 5;
  b.pool(LayerKind::avgpool, "head.avgpool", 0, 1, 0, head_stage);  // global window
  b.flatten("head.flatten", head_stage);
  b.dense("head.fc", 2048, num_classes, head_stage);
  b.softmax("head.softmax", head_stage);
  return g;
}

LayerGraph build_micro_resnet(int input_size, int num_classes, std::uint64_t seed) {
  if (input_size < 16) throw ArgumentError("build_micro_resnet: input_size must be >= 16");
  if (num_classes <= 0) throw ArgumentError("build_micro_resnet: num_classes must be positive");
  LayerGraph g;
  g.input_shape = {3, input_size, input_size};
  g.num_stages = 2;
  Builder b(g, seed);

  b.conv("stem.conv", 3, 8, 3, 1, 1, 0);
  b.stage(1, 2, 8, 8, 32, false);
  b.stage(2, 2, 32, 16, 64, true);

  const int head_stage = 3;
  b.pool(LayerKind::avgpool, "head.avgpool", 0, 1, 0, head_stage);
  b.flatten("head.flatten", head_stage);
  b.dense("head.fc", 64, num_classes, head_stage);
  b.softmax("head.softmax", head_stage);
  return g;
}

LayerGraph replace_head(const LayerGraph& graph, int new_num_classes, std::uint64_t seed) {
  if (new_num_classes <= 0) throw ArgumentError("replace_head: num_classes must be positive");
  const auto& layers = graph.layers;
  if (layers.size() < 2 || layers.back().kind != LayerKind::softmax ||
      layers[layers.size() - 2].kind != LayerKind::dense) {
    throw StructureError("replace_head: graph must end in dense + softmax");
  }

  // Strip softmax, dense, and the flatten a previous surgery left behind so
  // applying the surgery twice yields the same structure as once.
  std::size_t cut = layers.size() - 2;
  if (cut > 0 && layers[cut - 1].kind == LayerKind::flatten) --cut;
  const std::string dense_name = layers[layers.size() - 2].name;
  const int head_stage = layers.back().stage;

  LayerGraph out;
  out.layers.assign(layers.begin(), layers.begin() + static_cast<std::ptrdiff_t>(cut));
  out.shortcuts = graph.shortcuts;
  out.params = graph.params;
  out.input_shape = graph.input_shape;
  out.num_stages = graph.num_stages;
  out.params.erase(dense_name + ".weight");
  out.params.erase(dense_name + ".bias");

  // Retained parameters keep their buffers and become non-trainable.
  for (auto& [name, tensor] : out.params) tensor.set_requires_grad(false);

  // Feature width feeding the new head, from a symbolic trace of the
  // retained prefix.
  Shape probe = {1, out.input_shape[0], out.input_shape[1], out.input_shape[2]};
  auto rows = infer_shapes(out, probe);
  Shape tail = rows.empty() ? probe : rows.back().output;
  int features = 1;
  for (std::size_t i = 1; i < tail.size(); ++i) features *= tail[i];

  out.head_start = static_cast<int>(out.layers.size());
  Builder b(out, seed);
  b.flatten("head.flatten", head_stage);
  b.dense("head.fc", features, new_num_classes, head_stage);
  b.softmax("head.softmax", head_stage);
  out.head_param_names = {"head.fc.weight", "head.fc.bias"};
  return out;
}

namespace {

std::string conv_detail(const LayerSpec& s) {
  std::ostringstream os;
  os << s.kernel << "x" << s.kernel << ", " << s.filters << ", /" << s.stride << ", p"
     << s.padding;
  return os.str();
}

std::string detail_of(const LayerSpec& s) {
  std::ostringstream os;
  switch (s.kind) {
    case LayerKind::conv:
      os << conv_detail(s) << (s.relu_after ? ", relu" : "");
      break;
    case LayerKind::maxpool:
      os << s.kernel << "x" << s.kernel << ", /" << s.stride << ", p" << s.padding;
      break;
    case LayerKind::avgpool:
      if (s.kernel == 0) {
        os << "global";
      } else {
        os << s.kernel << "x" << s.kernel << ", /" << s.stride << ", p" << s.padding;
      }
      break;
    case LayerKind::dense:
      os << s.filters << " units";
      break;
    case LayerKind::residual_add:
      os << (s.relu_after ? "join, relu" : "join");
      break;
    default:
      break;
  }
  return os.str();
}

[[noreturn]] void structure_fail(const LayerSpec& s, int index, const std::string& why) {
  throw StructureError("layer " + std::to_string(index) + " (" + s.name + ", " +
                       kind_name(s.kind) + "): " + why);
}

}  // namespace

std::vector<ShapeRow> infer_shapes(const LayerGraph& graph, const Shape& input) {
  if (input.size() != 4) {
    throw ArgumentError("infer_shapes: input must be [N,C,H,W], got " + shape_str(input));
  }
  for (int d : input) {
    if (d <= 0) throw ArgumentError("infer_shapes: input has non-positive dimension");
  }

  std::vector<ShapeRow> rows;
  std::map<int, Shape> saved;  // shortcut source outputs
  std::set<int> wanted;
  for (const auto& sc : graph.shortcuts) wanted.insert(sc.source);

  Shape cur = input;
  for (int i = 0; i < static_cast<int>(graph.layers.size()); ++i) {
    const auto& s = graph.layers[i];
    switch (s.kind) {
      case LayerKind::conv: {
        if (cur.size() != 4) structure_fail(s, i, "expects 4-D input, got " + shape_str(cur));
        const int h = ops::out_dim(cur[2], s.kernel, s.stride, s.padding);
        const int w = ops::out_dim(cur[3], s.kernel, s.stride, s.padding);
        if (s.kernel > cur[2] + 2 * s.padding || s.kernel > cur[3] + 2 * s.padding) {
          structure_fail(s, i, "kernel exceeds padded input " + shape_str(cur));
        }
        if (h <= 0 || w <= 0) {
          structure_fail(s, i, "output collapses to " + std::to_string(h) + "x" +
                                   std::to_string(w));
        }
        cur = {cur[0], s.filters, h, w};
        break;
      }
      case LayerKind::maxpool:
      case LayerKind::avgpool: {
        if (cur.size() != 4) structure_fail(s, i, "expects 4-D input, got " + shape_str(cur));
        const int window = s.kernel == 0 ? cur[2] : s.kernel;
        if (s.kernel == 0 && cur[2] != cur[3]) {
          structure_fail(s, i, "global pool needs square input, got " + shape_str(cur));
        }
        if (window > cur[2] + 2 * s.padding || window > cur[3] + 2 * s.padding) {
          structure_fail(s, i, "window exceeds padded input " + shape_str(cur));
        }
        const int h = ops::out_dim(cur[2], window, s.stride, s.padding);
        const int w = ops::out_dim(cur[3], window, s.stride, s.padding);
        if (h <= 0 || w <= 0) {
          structure_fail(s, i, "output collapses to " + std::to_string(h) + "x" +
                                   std::to_string(w));
        }
        cur = {cur[0], cur[1], h, w};
        break;
      }
      case LayerKind::flatten: {
        int features = 1;
        for (std::size_t d = 1; d < cur.size(); ++d) features *= cur[d];
        cur = {cur[0], features};
        break;
      }
      case LayerKind::dense: {
        if (cur.size() != 2) structure_fail(s, i, "expects 2-D input, got " + shape_str(cur));
        cur = {cur[0], s.filters};
        break;
      }
      case LayerKind::softmax:
        break;
      case LayerKind::residual_add: {
        const auto* sc = graph.shortcut_for(i);
        if (!sc) structure_fail(s, i, "no shortcut edge registered");
        Shape other = sc->source < 0 ? input : saved.at(sc->source);
        if (sc->has_projection) {
          if (other.size() != 4) structure_fail(s, i, "projection expects 4-D source");
          const int h = ops::out_dim(other[2], 1, sc->stride, 0);
          const int w = ops::out_dim(other[3], 1, sc->stride, 0);
          other = {other[0], sc->filters, h, w};
        }
        if (other != cur) {
          structure_fail(s, i, "residual join of unequal shapes " + shape_str(cur) + " vs " +
                                   shape_str(other));
        }
        break;
      }
    }
    if (wanted.count(i)) saved[i] = cur;
    rows.push_back(ShapeRow{i, kind_name(s.kind), detail_of(s), cur, s.counted});
  }
  return rows;
}

LayerCount count_layers(const LayerGraph& graph) {
  LayerCount c;
  c.stages.assign(static_cast<std::size_t>(graph.num_stages), 0);
  for (const auto& s : graph.layers) {
    if (!s.counted) continue;
    ++c.total;
    if (s.stage == 0) {
      ++c.stem;
    } else if (s.stage <= graph.num_stages) {
      ++c.stages[static_cast<std::size_t>(s.stage - 1)];
    } else {
      ++c.head;
    }
  }
  return c;
}

std::string LayerCount::formula() const {
  std::ostringstream os;
  os << stem;
  for (int s : stages) os << "+" << s;
  os << "+" << head << "=" << total;
  return os.str();
}

Tensor forward(const LayerGraph& graph, const Tensor& input) {
  if (input.ndim() != 4) {
    throw ArgumentError("forward: input must be [N,C,H,W], got " + shape_str(input.shape()));
  }
  std::set<int> wanted;
  for (const auto& sc : graph.shortcuts) wanted.insert(sc.source);
  std::map<int, Tensor> saved;

  auto param = [&graph](const std::string& name) -> const Tensor& {
    auto it = graph.params.find(name);
    if (it == graph.params.end()) {
      throw StructureError("forward: missing parameter tensor " + name);
    }
    return it->second;
  };

  Tensor cur = input;
  for (int i = 0; i < static_cast<int>(graph.layers.size()); ++i) {
    const auto& s = graph.layers[i];
    switch (s.kind) {
      case LayerKind::conv:
        cur = ops::conv2d(cur, param(s.name + ".weight"), param(s.name + ".bias"), s.stride,
                          s.padding);
        break;
      case LayerKind::maxpool:
        cur = ops::pool2d(cur, ops::PoolKind::max, s.kernel, s.stride, s.padding);
        break;
      case LayerKind::avgpool: {
        const int window = s.kernel == 0 ? cur.dim(2) : s.kernel;
        cur = ops::pool2d(cur, ops::PoolKind::average, window, s.stride, s.padding);
        break;
      }
      case LayerKind::flatten:
        cur = ops::flatten(cur);
        break;
      case LayerKind::dense:
        cur = ops::dense(cur, param(s.name + ".weight"), param(s.name + ".bias"));
        break;
      case LayerKind::softmax:
        cur = ops::softmax(cur);
        break;
      case LayerKind::residual_add: {
        const auto* sc = graph.shortcut_for(i);
        if (!sc) throw StructureError("forward: residual_add " + s.name + " has no shortcut");
        Tensor other = sc->source < 0 ? input : saved.at(sc->source);
        if (sc->has_projection) {
          other = ops::conv2d(other, param(sc->name + ".weight"), param(sc->name + ".bias"),
                              sc->stride, 0);
        }
        cur = ops::add(cur, other);
        break;
      }
    }
    if (s.relu_after) cur = ops::relu(cur);
    if (wanted.count(i)) saved[i] = cur;
  }
  return cur;
}

}  // namespace pantry::graph
