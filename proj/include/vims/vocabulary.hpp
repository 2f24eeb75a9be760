#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vims/descriptor.hpp"
#include "vims/rng.hpp"

namespace vims {

// Sparse TF-IDF vector, sorted by word id, L1-normalized.
using BowVector = std::vector<std::pair<std::uint32_t, double>>;

// Hierarchical k-majority vocabulary over 256-bit descriptors. Clustering
// uses the Hamming metric with bitwise-majority centroids (ties toward 0);
// the build is deterministic under its seed.
class VocabularyTree {
 public:
  struct Node {
    DescriptorBits centroid{};
    std::uint32_t first_child = 0;  // index into nodes_, 0 = none
    std::uint16_t child_count = 0;
    std::int32_t word_id = -1;  // >= 0 for leaves
    double weight = 0.0;        // IDF, leaves only
  };

  VocabularyTree() = default;

  static VocabularyTree build(const std::vector<DescriptorBits>& training, int k, int L,
                              std::uint64_t seed);

  std::uint32_t word_count() const { return word_count_; }
  int branching() const { return k_; }
  int depth() const { return depth_; }
  bool empty() const { return nodes_.empty(); }

  // Leaf word for one descriptor.
  std::uint32_t transform(const DescriptorBits& d) const;
  // TF-IDF bag for a descriptor set.
  BowVector bow(const std::vector<DescriptorBits>& descriptors) const;

  // Versioned binary fixture format plus a JSON export for inspection.
  void save(const std::string& path) const;
  static VocabularyTree load(const std::string& path);
  std::string to_json() const;

  const std::vector<Node>& nodes() const { return nodes_; }

 private:
  int k_ = 0;
  int depth_ = 0;
  std::uint32_t word_count_ = 0;
  std::vector<Node> nodes_;
  std::vector<double> word_weights_;
};

// L1 similarity between two normalized bags: 1 - 0.5 * |v - w|_1.
double bow_similarity(const BowVector& a, const BowVector& b);

// Training-set sampler mirroring the scenario generator's landmark
// descriptor distribution (motif prototypes plus per-bit deviations).
std::vector<DescriptorBits> sample_training_descriptors(std::size_t count, int motif_count,
                                                        double flip_prob, std::uint64_t seed);

// The default vocabulary used when no fixture file is supplied.
VocabularyTree build_default_vocabulary();

}  // namespace vims
