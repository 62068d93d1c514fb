#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pantry/image.hpp"
#include "pantry/tensor.hpp"
#include "pantry/train.hpp"

namespace pantry::data {

/// Ordered label vocabulary. Lookup is case-insensitive after trimming.
/// canonical() is the 32-ingredient list whose order fixes every class
/// index; the shipped labels.txt carries the same names.
class ClassLabels {
 public:
  explicit ClassLabels(std::vector<std::string> names);

  static const ClassLabels& canonical();
  static ClassLabels load(const std::string& path);

  int size() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(int index) const { return names_.at(static_cast<std::size_t>(index)); }

  /// -1 when the name is unknown.
  int index_of(const std::string& name) const;
  /// Throws ArgumentError when the name is unknown.
  int require(const std::string& name) const;

 private:
  std::vector<std::string> names_;
  std::map<std::string, int> lookup_;
};

struct ManifestRecord {
  std::string path;
  std::string label;
  std::string split;  // "", "train", "test", or "val"
};

struct DatasetManifest {
  std::vector<ManifestRecord> records;

  std::size_t size() const { return records.size(); }
  DatasetManifest filtered(const std::string& split) const;
};

/// CSV with header `path,label`; every label must resolve in `labels`.
DatasetManifest load_manifest(const std::string& path, const ClassLabels& labels);

/// CSV with header `path,label,split`.
DatasetManifest load_split_csv(const std::string& path, const ClassLabels& labels);
std::string split_csv(const DatasetManifest& manifest);

struct SplitRatios {
  double train = 0.70;
  double test = 0.20;
  double val = 0.10;
};

/// Stratified split: within each class, records are shuffled by a
/// class-keyed stream of `seed`, then cut at floor(n*train) and
/// floor(n*(train+test)). Each class deviates from the exact shares by
/// less than one record. Classes with fewer than 3 samples produce a
/// warning, not an error.
DatasetManifest split_dataset(const DatasetManifest& manifest, const ClassLabels& labels,
                              SplitRatios ratios, std::uint64_t seed,
                              std::vector<std::string>* warnings = nullptr);

/// One 1 at the canonical index, zeros elsewhere, length labels.size().
std::vector<float> one_hot(const std::string& label, const ClassLabels& labels);
std::vector<float> one_hot(int index, int num_classes);

struct BatchOptions {
  int batch_size = 32;
  int input_size = 224;
  std::uint64_t seed = 0;
  bool augment = false;
  std::uint64_t augment_seed = 0;
  bool shuffle = true;
};

/// Streams (image tensor batch, one-hot batch) pairs for one split of a
/// manifest. Images are decoded once, resized, and cached; augmentation (on
/// the resized image) is re-drawn per epoch, keyed by (augment_seed,
/// epoch * n + record index). Requesting augmentation for any split other
/// than "train" is a configuration error.
class ImageBatches : public train::BatchSource {
 public:
  ImageBatches(const DatasetManifest& manifest, const std::string& split,
               const ClassLabels& labels, const BatchOptions& options);

  void start_epoch(int epoch) override;
  bool next(Tensor& inputs, Tensor& targets) override;
  std::size_t size() const override { return records_.size(); }

 private:
  const img::Image& cached(std::size_t index);

  std::vector<ManifestRecord> records_;
  std::vector<int> class_indices_;
  const ClassLabels& labels_;
  BatchOptions options_;
  std::vector<img::Image> cache_;  // resized, un-augmented
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  int epoch_ = 0;
};

}  // namespace pantry::data
