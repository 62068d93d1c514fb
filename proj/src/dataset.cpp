#include "pantry/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pantry/image.hpp"
#include "pantry/rng.hpp"

namespace pantry::data {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string fold_case(const std::string& s) {
  std::string out = trim(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

const std::vector<std::string> kCanonicalNames = {
    "Beef Meat",      "Bell pepper",   "Burger Bun",    "Burger Patty",  "Chickpea",
    "Cheese",         "Chicken",       "Chocolate",     "Chocolate Syrup", "Donut Bun",
    "Egg",            "Ground Beef",   "Hotdog Bun",    "Ice Cream",     "Lasagna Noodles",
    "Letus",          "Mayonnaise",    "Milk",          "Mushrooms",     "Nachos Chips",
    "Noodles",        "Onion",         "Pasta",         "Pizza Dough",   "Potato",
    "Rice",           "Roll Bread",    "Sandwich Bread", "Sausage",      "Shawarma Bread",
    "Subway Bun",     "Tomato"};

}  // namespace

ClassLabels::ClassLabels(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty()) throw ArgumentError("class labels: empty name list");
  for (std::size_t i = 0; i < names_.size(); ++i) {
    names_[i] = trim(names_[i]);
    if (names_[i].empty()) {
      throw ArgumentError("class labels: empty name at index " + std::to_string(i));
    }
    auto [it, inserted] = lookup_.emplace(fold_case(names_[i]), static_cast<int>(i));
    if (!inserted) throw ArgumentError("class labels: duplicate name '" + names_[i] + "'");
  }
}

const ClassLabels& ClassLabels::canonical() {
  static const ClassLabels labels{kCanonicalNames};
  return labels;
}

ClassLabels ClassLabels::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open labels file: " + path);
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (!line.empty()) names.push_back(line);
  }
  if (names.empty()) throw ArgumentError("labels file has no names: " + path);
  return ClassLabels(names);
}

int ClassLabels::index_of(const std::string& name) const {
  auto it = lookup_.find(fold_case(name));
  return it == lookup_.end() ? -1 : it->second;
}

int ClassLabels::require(const std::string& name) const {
  const int idx = index_of(name);
  if (idx < 0) throw ArgumentError("unknown label '" + name + "'");
  return idx;
}

DatasetManifest DatasetManifest::filtered(const std::string& split) const {
  DatasetManifest out;
  for (const auto& r : records) {
    if (r.split == split) out.records.push_back(r);
  }
  return out;
}

namespace {

// Labels never contain commas, paths may; fields split at the last commas.
std::vector<std::string> rsplit(const std::string& line, int fields) {
  std::vector<std::string> out(static_cast<std::size_t>(fields));
  std::string rest = line;
  for (int f = fields - 1; f > 0; --f) {
    const auto pos = rest.rfind(',');
    if (pos == std::string::npos) return {};
    out[static_cast<std::size_t>(f)] = rest.substr(pos + 1);
    rest = rest.substr(0, pos);
  }
  out[0] = rest;
  return out;
}

DatasetManifest load_manifest_csv(const std::string& path, const ClassLabels& labels,
                                  bool with_split) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path);

  std::string line;
  if (!std::getline(in, line)) throw ArgumentError("manifest is empty: " + path);
  const std::string expected = with_split ? "path,label,split" : "path,label";
  if (trim(line) != expected) {
    throw ValidationError("manifest " + path + " must start with header '" + expected + "'");
  }

  DatasetManifest manifest;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    auto fields = rsplit(line, with_split ? 3 : 2);
    if (fields.empty()) {
      throw ValidationError(path + ": row " + std::to_string(row) + " is not valid CSV");
    }
    ManifestRecord rec;
    rec.path = trim(fields[0]);
    rec.label = trim(fields[1]);
    if (with_split) {
      rec.split = trim(fields[2]);
      if (rec.split != "train" && rec.split != "test" && rec.split != "val") {
        throw ValidationError(path + ": row " + std::to_string(row) + " has unknown split '" +
                              rec.split + "'");
      }
    }
    if (rec.path.empty()) {
      throw ValidationError(path + ": row " + std::to_string(row) + " has an empty path");
    }
    if (labels.index_of(rec.label) < 0) {
      throw ValidationError(path + ": row " + std::to_string(row) + " has unknown label '" +
                            rec.label + "'");
    }
    manifest.records.push_back(std::move(rec));
  }
  if (manifest.records.empty()) throw ArgumentError("manifest has no records: " + path);
  return manifest;
}

}  // namespace

DatasetManifest load_manifest(const std::string& path, const ClassLabels& labels) {
  return load_manifest_csv(path, labels, false);
}

DatasetManifest load_split_csv(const std::string& path, const ClassLabels& labels) {
  return load_manifest_csv(path, labels, true);
}

std::string split_csv(const DatasetManifest& manifest) {
  std::ostringstream os;
  os << "path,label,split\n";
  for (const auto& r : manifest.records) os << r.path << "," << r.label << "," << r.split << "\n";
  return os.str();
}

DatasetManifest split_dataset(const DatasetManifest& manifest, const ClassLabels& labels,
                              SplitRatios ratios, std::uint64_t seed,
                              std::vector<std::string>* warnings) {
  if (manifest.records.empty()) throw ArgumentError("split_dataset: manifest is empty");
  const double sum = ratios.train + ratios.test + ratios.val;
  if (std::abs(sum - 1.0) > 1e-9 || ratios.train < 0 || ratios.test < 0 || ratios.val < 0) {
    throw ArgumentError("split_dataset: ratios must be non-negative and sum to 1");
  }

  std::vector<std::vector<std::size_t>> per_class(static_cast<std::size_t>(labels.size()));
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    per_class[static_cast<std::size_t>(labels.require(manifest.records[i].label))].push_back(i);
  }

  DatasetManifest out = manifest;
  for (std::size_t c = 0; c < per_class.size(); ++c) {
    auto& members = per_class[c];
    if (members.empty()) continue;
    const double n = static_cast<double>(members.size());
    if (members.size() < 3 && warnings) {
      warnings->push_back("class '" + labels.name(static_cast<int>(c)) + "' has only " +
                          std::to_string(members.size()) +
                          " samples; some splits will be empty");
    }
    Rng rng = Rng::keyed(seed, c);
    rng.shuffle(members);
    const auto b1 = static_cast<std::size_t>(std::floor(n * ratios.train));
    const auto b2 = static_cast<std::size_t>(std::floor(n * (ratios.train + ratios.test)));
    for (std::size_t i = 0; i < members.size(); ++i) {
      out.records[members[i]].split = i < b1 ? "train" : (i < b2 ? "test" : "val");
    }
  }
  return out;
}

std::vector<float> one_hot(int index, int num_classes) {
  if (index < 0 || index >= num_classes) {
    throw ArgumentError("one_hot: index " + std::to_string(index) + " out of range [0, " +
                        std::to_string(num_classes) + ")");
  }
  std::vector<float> row(static_cast<std::size_t>(num_classes), 0.0f);
  row[static_cast<std::size_t>(index)] = 1.0f;
  return row;
}

std::vector<float> one_hot(const std::string& label, const ClassLabels& labels) {
  return one_hot(labels.require(label), labels.size());
}

ImageBatches::ImageBatches(const DatasetManifest& manifest, const std::string& split,
                           const ClassLabels& labels, const BatchOptions& options)
    : labels_(labels), options_(options) {
  if (options.batch_size <= 0) throw ArgumentError("batches: batch_size must be positive");
  if (options.input_size <= 0) throw ArgumentError("batches: input_size must be positive");
  if (options.augment && split != "train") {
    throw ValidationError("batches: augmentation is restricted to the train split, got '" +
                          split + "'");
  }
  for (const auto& r : manifest.records) {
    if (r.split == split) {
      records_.push_back(r);
      class_indices_.push_back(labels.require(r.label));
    }
  }
  cache_.resize(records_.size());
  order_.resize(records_.size());
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
}

const img::Image& ImageBatches::cached(std::size_t index) {
  if (cache_[index].pixels.empty()) {
    auto image = img::load_image(records_[index].path);
    cache_[index] = img::resize_bilinear(image, options_.input_size, options_.input_size);
  }
  return cache_[index];
}

void ImageBatches::start_epoch(int epoch) {
  epoch_ = epoch;
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
  if (options_.shuffle) {
    Rng rng = Rng::keyed(options_.seed, static_cast<std::uint64_t>(epoch));
    rng.shuffle(order_);
  }
  cursor_ = 0;
}

bool ImageBatches::next(Tensor& inputs, Tensor& targets) {
  if (cursor_ >= order_.size()) return false;
  const std::size_t count =
      std::min(static_cast<std::size_t>(options_.batch_size), order_.size() - cursor_);
  const int s = options_.input_size;
  const std::size_t sample = static_cast<std::size_t>(3) * s * s;
  inputs = Tensor::zeros({static_cast<int>(count), 3, s, s});
  targets = Tensor::zeros({static_cast<int>(count), labels_.size()});

  for (std::size_t b = 0; b < count; ++b) {
    const std::size_t rec = order_[cursor_ + b];
    Tensor tensor;
    if (options_.augment) {
      const auto params = img::sample_params(
          options_.augment_seed, static_cast<std::uint64_t>(epoch_) * records_.size() + rec);
      tensor = img::to_input_tensor(img::augment(cached(rec), params));
    } else {
      tensor = img::to_input_tensor(cached(rec));
    }
    std::copy_n(tensor.data(), sample, inputs.data() + b * sample);
    targets.data()[b * static_cast<std::size_t>(labels_.size()) +
                   static_cast<std::size_t>(class_indices_[rec])] = 1.0f;
  }
  cursor_ += count;
  return true;
}

}  // namespace pantry::data
