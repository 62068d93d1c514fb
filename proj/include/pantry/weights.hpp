#pragma once

#include <map>
#include <string>

#include "pantry/graph.hpp"
#include "pantry/tensor.hpp"

namespace pantry {

// Weights container: a textual header listing one tensor per line
//
//   PANTRY-WEIGHTS v1
//   tensor <name> f32 <ndim> <dim0> ... <byte_offset>
//   end
//
// followed by the concatenated raw little-endian float32 payloads. Offsets
// are relative to the first byte after the header's "end" line.

void save_weights(const std::string& path, const std::map<std::string, Tensor>& params);

std::map<std::string, Tensor> load_weights(const std::string& path);

/// Loads a container and copies values into the graph's parameters,
/// validating that every graph tensor is present with a matching shape.
void load_weights_into(const std::string& path, graph::LayerGraph& graph);

}  // namespace pantry
