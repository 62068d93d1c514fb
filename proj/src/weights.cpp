#include "pantry/weights.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace pantry {

namespace {

constexpr char kMagic[] = "PANTRY-WEIGHTS v1";

void to_little_endian(std::vector<std::uint32_t>& words) {
  if constexpr (std::endian::native == std::endian::big) {
    for (auto& w : words) {
      w = ((w & 0xFF000000u) >> 24) | ((w & 0x00FF0000u) >> 8) | ((w & 0x0000FF00u) << 8) |
          ((w & 0x000000FFu) << 24);
    }
  }
}

}  // namespace

void save_weights(const std::string& path, const std::map<std::string, Tensor>& params) {
  std::ostringstream header;
  header << kMagic << "\n";
  std::size_t offset = 0;
  for (const auto& [name, tensor] : params) {
    header << "tensor " << name << " f32 " << tensor.ndim();
    for (int d : tensor.shape()) header << " " << d;
    header << " " << offset << "\n";
    offset += tensor.numel() * sizeof(float);
  }
  header << "end\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open weights file for writing: " + path);
  const std::string h = header.str();
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  for (const auto& [name, tensor] : params) {
    std::vector<std::uint32_t> words(tensor.numel());
    std::memcpy(words.data(), tensor.data(), tensor.numel() * sizeof(float));
    to_little_endian(words);
    out.write(reinterpret_cast<const char*>(words.data()),
              static_cast<std::streamsize>(words.size() * sizeof(std::uint32_t)));
  }
  if (!out) throw IoError("short write to weights file: " + path);
}

std::map<std::string, Tensor> load_weights(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open weights file: " + path);

  std::string line;
  if (!std::getline(in, line) || line != kMagic) {
    throw IoError("not a weights container (bad magic): " + path);
  }

  struct Entry {
    std::string name;
    Shape shape;
    std::size_t offset;
  };
  std::vector<Entry> entries;
  while (std::getline(in, line)) {
    if (line == "end") break;
    std::istringstream ls(line);
    std::string tag, name, dtype;
    int ndim = 0;
    if (!(ls >> tag >> name >> dtype >> ndim) || tag != "tensor") {
      throw IoError("malformed weights header line in " + path + ": " + line);
    }
    if (dtype != "f32") {
      throw IoError("unsupported element type '" + dtype + "' in " + path);
    }
    Entry e;
    e.name = name;
    for (int i = 0; i < ndim; ++i) {
      int d = 0;
      if (!(ls >> d) || d <= 0) throw IoError("bad shape in weights header: " + line);
      e.shape.push_back(d);
    }
    if (!(ls >> e.offset)) throw IoError("missing offset in weights header: " + line);
    entries.push_back(std::move(e));
  }
  if (line != "end") throw IoError("weights header missing 'end': " + path);

  const std::streampos payload_start = in.tellg();
  std::map<std::string, Tensor> out;
  for (const auto& e : entries) {
    const std::size_t n = shape_numel(e.shape);
    std::vector<std::uint32_t> words(n);
    in.seekg(payload_start + static_cast<std::streamoff>(e.offset));
    in.read(reinterpret_cast<char*>(words.data()),
            static_cast<std::streamsize>(n * sizeof(std::uint32_t)));
    if (!in) throw IoError("truncated weights payload for tensor " + e.name + " in " + path);
    to_little_endian(words);  // symmetric swap
    std::vector<float> values(n);
    std::memcpy(values.data(), words.data(), n * sizeof(float));
    out[e.name] = Tensor::from_data(e.shape, std::move(values));
  }
  return out;
}

void load_weights_into(const std::string& path, graph::LayerGraph& graph) {
  auto loaded = load_weights(path);
  for (auto& [name, tensor] : graph.params) {
    auto it = loaded.find(name);
    if (it == loaded.end()) {
      throw ValidationError("weights file " + path + " is missing tensor " + name);
    }
    if (it->second.shape() != tensor.shape()) {
      throw ValidationError("weights tensor " + name + " has shape " +
                            shape_str(it->second.shape()) + ", graph expects " +
                            shape_str(tensor.shape()));
    }
    tensor.values() = it->second.values();
  }
}

}  // namespace pantry
