#include "vims/vocabulary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <map>
#include <stdexcept>

#include <json.hpp>

namespace vims {

namespace {

DescriptorBits majority_centroid(const std::vector<DescriptorBits>& data,
                                 const std::vector<std::uint32_t>& members) {
  std::array<int, 256> ones{};
  for (std::uint32_t m : members) {
    const DescriptorBits& d = data[m];
    for (int w = 0; w < 4; ++w) {
      for (int b = 0; b < 64; ++b) {
        if (d[w] >> b & 1ull) ++ones[w * 64 + b];
      }
    }
  }
  DescriptorBits c{};
  const int half = static_cast<int>(members.size());
  for (int i = 0; i < 256; ++i) {
    // strict majority; ties resolve to 0
    if (2 * ones[i] > half) c[i / 64] |= (1ull << (i % 64));
  }
  return c;
}

// K-majority clustering. Returns per-cluster member lists and centroids;
// empty clusters are dropped.
void k_majority(const std::vector<DescriptorBits>& data,
                const std::vector<std::uint32_t>& members, int k, Rng& rng,
                std::vector<DescriptorBits>& centroids,
                std::vector<std::vector<std::uint32_t>>& clusters) {
  // unique patterns in first-appearance order
  std::vector<std::uint32_t> unique;
  for (std::uint32_t m : members) {
    bool seen = false;
    for (std::uint32_t u : unique) {
      if (data[u] == data[m]) {
        seen = true;
        break;
      }
    }
    if (!seen) unique.push_back(m);
    if (unique.size() > static_cast<std::size_t>(4 * k)) break;  // enough seeds
  }

  centroids.clear();
  if (unique.size() <= static_cast<std::size_t>(k)) {
    for (std::uint32_t u : unique) centroids.push_back(data[u]);
  } else {
    std::vector<std::uint32_t> order(unique);
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.uniform_index(i)]);
    }
    for (int i = 0; i < k; ++i) centroids.push_back(data[order[static_cast<std::size_t>(i)]]);
  }

  for (int iter = 0; iter < 8; ++iter) {
    clusters.assign(centroids.size(), {});
    for (std::uint32_t m : members) {
      int best = 0, best_d = 257;
      for (std::size_t c = 0; c < centroids.size(); ++c) {
        const int d = hamming(data[m], centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      clusters[static_cast<std::size_t>(best)].push_back(m);
    }
    bool changed = false;
    for (std::size_t c = 0; c < centroids.size(); ++c) {
      if (clusters[c].empty()) continue;
      const DescriptorBits nc = majority_centroid(data, clusters[c]);
      if (nc != centroids[c]) {
        centroids[c] = nc;
        changed = true;
      }
    }
    if (!changed) break;
  }

  // final assignment + drop empties
  clusters.assign(centroids.size(), {});
  for (std::uint32_t m : members) {
    int best = 0, best_d = 257;
    for (std::size_t c = 0; c < centroids.size(); ++c) {
      const int d = hamming(data[m], centroids[c]);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    clusters[static_cast<std::size_t>(best)].push_back(m);
  }
  std::vector<DescriptorBits> kept_c;
  std::vector<std::vector<std::uint32_t>> kept_m;
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    if (!clusters[c].empty()) {
      kept_c.push_back(centroids[c]);
      kept_m.push_back(std::move(clusters[c]));
    }
  }
  centroids = std::move(kept_c);
  clusters = std::move(kept_m);
}

}  // namespace

VocabularyTree VocabularyTree::build(const std::vector<DescriptorBits>& training, int k,
                                     int L, std::uint64_t seed) {
  if (training.empty()) throw std::invalid_argument("vocabulary: empty training set");
  if (k < 2 || L < 1) throw std::invalid_argument("vocabulary: need k >= 2, L >= 1");

  const double want = std::pow(static_cast<double>(k), L);
  if (static_cast<double>(training.size()) < want) {
    std::fprintf(stderr,
                 "vocabulary: %zu training descriptors for k^L = %.0f words; the tree "
                 "will be shallower\n",
                 training.size(), want);
  }

  VocabularyTree tree;
  tree.k_ = k;
  tree.depth_ = L;
  Rng rng(seed);

  std::vector<std::uint32_t> all(training.size());
  for (std::uint32_t i = 0; i < training.size(); ++i) all[i] = i;

  tree.nodes_.push_back(Node{majority_centroid(training, all), 0, 0, -1, 0.0});

  struct Item {
    std::uint32_t node;
    std::vector<std::uint32_t> members;
    int depth;
  };
  std::deque<Item> queue;
  queue.push_back(Item{0, std::move(all), 0});

  while (!queue.empty()) {
    Item item = std::move(queue.front());
    queue.pop_front();
    Node& node = tree.nodes_[item.node];

    bool make_leaf = item.depth >= L || item.members.size() < 2;
    if (!make_leaf) {
      // all-identical member sets cannot split
      bool identical = true;
      for (std::uint32_t m : item.members) {
        if (training[m] != training[item.members[0]]) {
          identical = false;
          break;
        }
      }
      make_leaf = identical;
    }
    if (make_leaf) {
      node.word_id = static_cast<std::int32_t>(tree.word_count_++);
      continue;
    }

    std::vector<DescriptorBits> centroids;
    std::vector<std::vector<std::uint32_t>> clusters;
    k_majority(training, item.members, k, rng, centroids, clusters);
    if (centroids.size() < 2) {
      node.word_id = static_cast<std::int32_t>(tree.word_count_++);
      continue;
    }

    const auto first = static_cast<std::uint32_t>(tree.nodes_.size());
    tree.nodes_[item.node].first_child = first;
    tree.nodes_[item.node].child_count = static_cast<std::uint16_t>(centroids.size());
    for (std::size_t c = 0; c < centroids.size(); ++c) {
      tree.nodes_.push_back(Node{centroids[c], 0, 0, -1, 0.0});
    }
    for (std::size_t c = 0; c < centroids.size(); ++c) {
      queue.push_back(Item{first + static_cast<std::uint32_t>(c), std::move(clusters[c]),
                           item.depth + 1});
    }
  }

  // IDF weights from the training corpus.
  std::vector<std::uint32_t> counts(tree.word_count_, 0);
  for (const DescriptorBits& d : training) ++counts[tree.transform(d)];
  tree.word_weights_.assign(tree.word_count_, 0.0);
  const double N = static_cast<double>(training.size());
  for (std::uint32_t w = 0; w < tree.word_count_; ++w) {
    tree.word_weights_[w] =
        counts[w] > 0 ? std::log(N / static_cast<double>(counts[w])) : std::log(N);
  }
  for (Node& n : tree.nodes_) {
    if (n.word_id >= 0) n.weight = tree.word_weights_[static_cast<std::uint32_t>(n.word_id)];
  }
  return tree;
}

std::uint32_t VocabularyTree::transform(const DescriptorBits& d) const {
  if (nodes_.empty()) throw std::runtime_error("vocabulary: not built");
  std::uint32_t idx = 0;
  while (nodes_[idx].child_count > 0) {
    const Node& n = nodes_[idx];
    std::uint32_t best = n.first_child;
    int best_d = 257;
    for (std::uint32_t c = n.first_child; c < n.first_child + n.child_count; ++c) {
      const int dist = hamming(d, nodes_[c].centroid);
      if (dist < best_d) {
        best_d = dist;
        best = c;
      }
    }
    idx = best;
  }
  return static_cast<std::uint32_t>(nodes_[idx].word_id);
}

BowVector VocabularyTree::bow(const std::vector<DescriptorBits>& descriptors) const {
  std::map<std::uint32_t, double> acc;
  for (const DescriptorBits& d : descriptors) {
    const std::uint32_t w = transform(d);
    acc[w] += word_weights_[w];
  }
  double l1 = 0.0;
  for (const auto& [w, v] : acc) l1 += v;
  BowVector out;
  if (l1 <= 0.0) return out;
  out.reserve(acc.size());
  for (const auto& [w, v] : acc) out.emplace_back(w, v / l1);
  return out;
}

double bow_similarity(const BowVector& a, const BowVector& b) {
  if (a.empty() || b.empty()) return 0.0;
  double l1 = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j >= b.size() || (i < a.size() && a[i].first < b[j].first)) {
      l1 += std::abs(a[i].second);
      ++i;
    } else if (i >= a.size() || b[j].first < a[i].first) {
      l1 += std::abs(b[j].second);
      ++j;
    } else {
      l1 += std::abs(a[i].second - b[j].second);
      ++i;
      ++j;
    }
  }
  return std::max(0.0, 1.0 - 0.5 * l1);
}

namespace {
constexpr char kMagic[8] = {'V', 'I', 'M', 'S', 'V', 'O', 'C', '\x01'};
}

void VocabularyTree::save(const std::string& path) const {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("vocabulary: cannot write " + path);
  std::fwrite(kMagic, 1, 8, f);
  const std::uint32_t k32 = static_cast<std::uint32_t>(k_);
  const std::uint32_t L32 = static_cast<std::uint32_t>(depth_);
  const std::uint64_t n = nodes_.size();
  std::fwrite(&k32, sizeof(k32), 1, f);
  std::fwrite(&L32, sizeof(L32), 1, f);
  std::fwrite(&word_count_, sizeof(word_count_), 1, f);
  std::fwrite(&n, sizeof(n), 1, f);
  for (const Node& node : nodes_) {
    std::fwrite(node.centroid.data(), sizeof(std::uint64_t), 4, f);
    std::fwrite(&node.first_child, sizeof(node.first_child), 1, f);
    const std::uint32_t cc = node.child_count;
    std::fwrite(&cc, sizeof(cc), 1, f);
    std::fwrite(&node.word_id, sizeof(node.word_id), 1, f);
    std::fwrite(&node.weight, sizeof(node.weight), 1, f);
  }
  std::fclose(f);
}

VocabularyTree VocabularyTree::load(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw std::runtime_error("vocabulary: cannot open " + path);
  char magic[8];
  if (std::fread(magic, 1, 8, f) != 8 || std::memcmp(magic, kMagic, 8) != 0) {
    std::fclose(f);
    throw std::runtime_error("vocabulary: bad magic in " + path);
  }
  VocabularyTree tree;
  std::uint32_t k32 = 0, L32 = 0;
  std::uint64_t n = 0;
  if (std::fread(&k32, sizeof(k32), 1, f) != 1 || std::fread(&L32, sizeof(L32), 1, f) != 1 ||
      std::fread(&tree.word_count_, sizeof(tree.word_count_), 1, f) != 1 ||
      std::fread(&n, sizeof(n), 1, f) != 1) {
    std::fclose(f);
    throw std::runtime_error("vocabulary: truncated header in " + path);
  }
  tree.k_ = static_cast<int>(k32);
  tree.depth_ = static_cast<int>(L32);
  tree.nodes_.resize(n);
  for (Node& node : tree.nodes_) {
    std::uint32_t cc = 0;
    if (std::fread(node.centroid.data(), sizeof(std::uint64_t), 4, f) != 4 ||
        std::fread(&node.first_child, sizeof(node.first_child), 1, f) != 1 ||
        std::fread(&cc, sizeof(cc), 1, f) != 1 ||
        std::fread(&node.word_id, sizeof(node.word_id), 1, f) != 1 ||
        std::fread(&node.weight, sizeof(node.weight), 1, f) != 1) {
      std::fclose(f);
      throw std::runtime_error("vocabulary: truncated node table in " + path);
    }
    node.child_count = static_cast<std::uint16_t>(cc);
  }
  std::fclose(f);
  tree.word_weights_.assign(tree.word_count_, 0.0);
  for (const Node& node : tree.nodes_) {
    if (node.word_id >= 0) {
      tree.word_weights_[static_cast<std::uint32_t>(node.word_id)] = node.weight;
    }
  }
  return tree;
}

std::string VocabularyTree::to_json() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (const Node& n : nodes_) {
    nlohmann::json jn{{"first_child", n.first_child},
                      {"child_count", n.child_count},
                      {"word_id", n.word_id},
                      {"weight", n.weight}};
    char hex[65];
    std::snprintf(hex, sizeof(hex), "%016llx%016llx%016llx%016llx",
                  static_cast<unsigned long long>(n.centroid[0]),
                  static_cast<unsigned long long>(n.centroid[1]),
                  static_cast<unsigned long long>(n.centroid[2]),
                  static_cast<unsigned long long>(n.centroid[3]));
    jn["centroid"] = hex;
    nodes.push_back(jn);
  }
  return nlohmann::json{{"k", k_}, {"L", depth_}, {"words", word_count_}, {"nodes", nodes}}
      .dump();
}

std::vector<DescriptorBits> sample_training_descriptors(std::size_t count, int motif_count,
                                                        double flip_prob,
                                                        std::uint64_t seed) {
  Rng rng(seed);
  std::vector<DescriptorBits> motifs(static_cast<std::size_t>(motif_count));
  for (auto& m : motifs) {
    for (auto& w : m) w = rng.next_u64();
  }
  std::vector<DescriptorBits> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    DescriptorBits d = motifs[rng.uniform_index(motifs.size())];
    for (int w = 0; w < 4; ++w) {
      for (int b = 0; b < 64; ++b) {
        if (rng.bernoulli(flip_prob)) d[w] ^= (1ull << b);
      }
    }
    out.push_back(d);
  }
  return out;
}

VocabularyTree build_default_vocabulary() {
  static const VocabularyTree tree = [] {
    const auto training =
        sample_training_descriptors(100000, 512, 24.0 / 256.0, 0x564f4342ull);
    return VocabularyTree::build(training, 10, 4, 0x564f4342ull);
  }();
  return tree;
}

}  // namespace vims
