#include <doctest.h>

#include <algorithm>

#include "vims/descriptor.hpp"
#include "vims/matching.hpp"
#include "vims/vocabulary.hpp"

using namespace vims;

namespace {

DescriptorBits random_bits(Rng& rng) {
  return DescriptorBits{rng.next_u64(), rng.next_u64(), rng.next_u64(), rng.next_u64()};
}

// Two-sample Kolmogorov-Smirnov test at alpha = 0.01.
bool ks_same_distribution(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) {
      ++i;
    } else {
      ++j;
    }
    const double fa = static_cast<double>(i) / a.size();
    const double fb = static_cast<double>(j) / b.size();
    d = std::max(d, std::abs(fa - fb));
  }
  const double n = static_cast<double>(a.size());
  const double m = static_cast<double>(b.size());
  const double crit = 1.628 * std::sqrt((n + m) / (n * m));
  return d < crit;
}

}  // namespace

TEST_CASE("describe is exact for a noiseless rotation-aware model") {
  Rng rng(1);
  const DescriptorBits truth = random_bits(rng);
  DescriptorModelSpec spec;
  spec.rotation_aware = true;
  spec.base_flip_prob = 0.0;
  for (double rot : {0.0, 1.0, -2.5, 3.1}) {
    Rng draw(7);
    const BinaryDescriptor d = describe(truth, Viewpoint{rot, 1.0}, spec, draw);
    CHECK(hamming(d.bits, truth) == 0);
  }
}

TEST_CASE("rotation-sensitive corruption matches the binomial oracle") {
  Rng rng(2);
  const DescriptorBits truth = random_bits(rng);
  DescriptorModelSpec spec;
  spec.rotation_aware = false;
  spec.base_flip_prob = 0.02;
  spec.rotation_flip_gain = 0.08;

  double mean = 0.0;
  const int trials = 1000;
  for (int i = 0; i < trials; ++i) {
    const BinaryDescriptor d = describe(truth, Viewpoint{M_PI, 1.0}, spec, rng);
    mean += hamming(d.bits, truth);
  }
  mean /= trials;
  const double expected = 256.0 * std::clamp(0.02 + 0.25, 0.0, 0.5);
  CHECK(std::abs(mean - expected) / expected < 0.10);
}

TEST_CASE("near-identical viewpoints differ by the independent-flip oracle") {
  Rng rng(3);
  const DescriptorBits truth = random_bits(rng);
  DescriptorModelSpec spec;
  spec.base_flip_prob = 0.05;

  double mean = 0.0;
  const int trials = 2000;
  for (int i = 0; i < trials; ++i) {
    const BinaryDescriptor a = describe(truth, Viewpoint{0.001, 1.0}, spec, rng);
    const BinaryDescriptor b = describe(truth, Viewpoint{-0.001, 1.0}, spec, rng);
    mean += hamming(a.bits, b.bits);
  }
  mean /= trials;
  const double p = 0.05;
  const double expected = 2.0 * 256.0 * p * (1.0 - p);
  CHECK(std::abs(mean - expected) / expected < 0.15);
}

TEST_CASE("rotation-aware distances are rotation independent (KS test)") {
  Rng rng(4);
  const DescriptorBits truth = random_bits(rng);
  DescriptorModelSpec spec;
  spec.rotation_aware = true;
  spec.base_flip_prob = 0.04;

  std::vector<double> at_zero, at_large;
  for (int i = 0; i < 1000; ++i) {
    at_zero.push_back(
        hamming(describe(truth, Viewpoint{0.0, 1.0}, spec, rng).bits, truth));
    at_large.push_back(
        hamming(describe(truth, Viewpoint{2.7, 1.0}, spec, rng).bits, truth));
  }
  CHECK(ks_same_distribution(at_zero, at_large));

  // sanity: the rotation-sensitive model fails the same test
  DescriptorModelSpec brief = spec;
  brief.rotation_aware = false;
  brief.rotation_flip_gain = 0.08;
  std::vector<double> brief_large;
  for (int i = 0; i < 1000; ++i) {
    brief_large.push_back(
        hamming(describe(truth, Viewpoint{2.7, 1.0}, brief, rng).bits, truth));
  }
  CHECK(!ks_same_distribution(at_zero, brief_large));
}

TEST_CASE("hamming distance is a metric on samples") {
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const DescriptorBits a = random_bits(rng), b = random_bits(rng), c = random_bits(rng);
    CHECK(hamming(a, b) == hamming(b, a));
    CHECK(hamming(a, c) <= hamming(a, b) + hamming(b, c));
    CHECK(hamming(a, a) == 0);
  }
}

TEST_CASE("scale replication") {
  Rng rng(6);
  DescriptorModelSpec spec;
  spec.base_flip_prob = 0.0;
  spec.scale_flip_gain = 0.0;

  SUBCASE("one point, three levels") {
    std::vector<ReplicationInput> pts(1);
    pts[0].truth = random_bits(rng);
    pts[0].response = 0.9;
    pts[0].distance = 3.0;
    const auto out = replicate_across_scales(pts, 3, 0.2, 2.0, spec, rng);
    REQUIRE(out.size() == 3);
    for (int l = 0; l < 3; ++l) {
      CHECK(out[static_cast<std::size_t>(l)].descriptor.scale_level == l);
      CHECK(out[static_cast<std::size_t>(l)].point_index == 0);
    }
  }

  SUBCASE("response below the floor is discarded") {
    std::vector<ReplicationInput> pts(1);
    pts[0].truth = random_bits(rng);
    pts[0].response = 0.1;
    const auto out = replicate_across_scales(pts, 3, 0.2, 2.0, spec, rng);
    CHECK(out.empty());
  }

  SUBCASE("floor at the median keeps half the points") {
    std::vector<ReplicationInput> pts(50);
    for (int i = 0; i < 50; ++i) {
      pts[static_cast<std::size_t>(i)].truth = random_bits(rng);
      pts[static_cast<std::size_t>(i)].response = (i + 1) / 50.0;  // 0.02 .. 1.0
      pts[static_cast<std::size_t>(i)].distance = 3.0;
    }
    const double median = 0.5 * (pts[24].response + pts[25].response);
    const auto out = replicate_across_scales(pts, 4, median, 2.0, spec, rng);
    CHECK(out.size() == 25 * 4);
  }
}

TEST_CASE("pyramid level selection") {
  CHECK(best_pyramid_level(2.0, 2.0) == 0);
  CHECK(best_pyramid_level(2.0 * std::pow(kScaleStep, 3), 2.0) == 3);
  CHECK(best_pyramid_level(100.0, 2.0) == kPyramidLevels - 1);
  const double ratio = level_scale_ratio(2.0 * std::pow(kScaleStep, 2), 2.0, 2);
  CHECK(ratio == doctest::Approx(1.0));
}

TEST_CASE("vocabulary on separable training data") {
  Rng rng(7);

  SUBCASE("k far-apart descriptors with depth 1") {
    std::vector<DescriptorBits> training;
    for (int i = 0; i < 5; ++i) training.push_back(random_bits(rng));
    const VocabularyTree tree = VocabularyTree::build(training, 5, 1, 1);
    CHECK(tree.word_count() == 5);
    for (const auto& d : training) {
      bool found = false;
      for (const auto& n : tree.nodes()) {
        if (n.word_id >= 0 && n.centroid == d) found = true;
      }
      CHECK(found);
    }
  }

  SUBCASE("identical descriptors collapse to one word") {
    std::vector<DescriptorBits> training(100, random_bits(rng));
    const VocabularyTree tree = VocabularyTree::build(training, 10, 3, 1);
    CHECK(tree.word_count() == 1);
  }

  SUBCASE("quantization beats a random leaf") {
    std::vector<DescriptorBits> training;
    for (int i = 0; i < 10000; ++i) training.push_back(random_bits(rng));
    const VocabularyTree tree = VocabularyTree::build(training, 10, 3, 1);
    std::vector<const VocabularyTree::Node*> leaves;
    for (const auto& n : tree.nodes()) {
      if (n.word_id >= 0) leaves.push_back(&n);
    }
    double mean_quant = 0.0, mean_rand = 0.0;
    for (int probe = 0; probe < 100; ++probe) {
      const DescriptorBits d = random_bits(rng);
      const std::uint32_t w = tree.transform(d);
      for (const auto* leaf : leaves) {
        if (leaf->word_id == static_cast<std::int32_t>(w)) {
          mean_quant += hamming(d, leaf->centroid);
        }
      }
      mean_rand += hamming(d, leaves[rng.uniform_index(leaves.size())]->centroid);
    }
    CHECK(mean_quant < mean_rand);
  }
}

TEST_CASE("bow similarity") {
  SUBCASE("identical sets score 1") {
    Rng rng(8);
    std::vector<DescriptorBits> training;
    for (int i = 0; i < 2000; ++i) training.push_back(random_bits(rng));
    const VocabularyTree tree = VocabularyTree::build(training, 5, 2, 1);
    std::vector<DescriptorBits> set;
    for (int i = 0; i < 20; ++i) set.push_back(random_bits(rng));
    const BowVector v = tree.bow(set);
    CHECK(bow_similarity(v, v) == doctest::Approx(1.0));
  }

  SUBCASE("disjoint word sets score 0") {
    const BowVector v{{0, 0.5}, {1, 0.5}};
    const BowVector w{{2, 1.0}};
    CHECK(bow_similarity(v, w) == doctest::Approx(0.0));
  }

  SUBCASE("hand-built three-word example") {
    const BowVector v{{0, 0.5}, {1, 0.5}};
    const BowVector w{{0, 0.25}, {2, 0.75}};
    // L1 = |0.5-0.25| + 0.5 + 0.75 = 1.5 -> score 0.25
    CHECK(bow_similarity(v, w) == doctest::Approx(0.25).epsilon(1e-12));
  }
}

TEST_CASE("vocabulary fixture round trip") {
  Rng rng(9);
  const auto training = sample_training_descriptors(3000, 32, 0.1, 77);
  const VocabularyTree tree = VocabularyTree::build(training, 6, 2, 5);

  const std::string path = "/tmp/vims_vocab_test.bin";
  tree.save(path);
  const VocabularyTree loaded = VocabularyTree::load(path);
  CHECK(loaded.word_count() == tree.word_count());
  for (int i = 0; i < 200; ++i) {
    const DescriptorBits d = random_bits(rng);
    CHECK(loaded.transform(d) == tree.transform(d));
  }
  CHECK(!tree.to_json().empty());
  std::remove(path.c_str());
}

TEST_CASE("2nn matching") {
  Rng rng(10);
  const DescriptorBits probe = random_bits(rng);

  SUBCASE("clear best match is accepted") {
    std::vector<BinaryDescriptor> query(1), target(5);
    query[0].bits = probe;
    target[0].bits = probe;
    for (int i = 1; i < 5; ++i) {
      DescriptorBits far = probe;
      for (int w = 0; w < 3; ++w) far[static_cast<std::size_t>(w)] = ~far[static_cast<std::size_t>(w)];
      target[static_cast<std::size_t>(i)].bits = far;
      target[static_cast<std::size_t>(i)].bits[3] ^= rng.next_u64();
    }
    const auto matches = match_2nn(query, target, 0.7);
    REQUIRE(matches.size() == 1);
    CHECK(matches[0].target_index == 0);
    CHECK(matches[0].distance == 0);
  }

  SUBCASE("tie between two targets is rejected") {
    std::vector<BinaryDescriptor> query(1), target(2);
    query[0].bits = probe;
    DescriptorBits t = probe;
    t[0] ^= 0xff;  // 8 bits away
    target[0].bits = t;
    target[1].bits = t;
    CHECK(match_2nn(query, target, 0.7).empty());
  }

  SUBCASE("single target falls back to the absolute threshold") {
    std::vector<BinaryDescriptor> query(1), target(1);
    query[0].bits = probe;
    DescriptorBits t = probe;
    t[0] ^= 0xffff;  // 16 bits
    target[0].bits = t;
    CHECK(match_2nn(query, target, 0.7, 64).size() == 1);
    t[1] = ~t[1];  // + 64 bits = 80 total
    target[0].bits = t;
    CHECK(match_2nn(query, target, 0.7, 64).empty());
  }

  SUBCASE("one-to-one via mutual best") {
    std::vector<BinaryDescriptor> query(2), target(2);
    query[0].bits = probe;
    DescriptorBits near = probe;
    near[0] ^= 0x3;  // 2 bits
    query[1].bits = near;
    target[0].bits = probe;
    DescriptorBits far{};
    far[0] = ~probe[0];
    far[1] = ~probe[1];
    far[2] = probe[2];
    far[3] = probe[3];
    target[1].bits = far;
    const auto matches = match_2nn(query, target, 0.7);
    // both queries prefer target 0; only the mutual best survives
    REQUIRE(matches.size() == 1);
    CHECK(matches[0].query_index == 0);
    CHECK(matches[0].target_index == 0);
  }
}
