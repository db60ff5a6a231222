#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "atd/bitvec.hpp"
#include "atd/simulator.hpp"

namespace atd {

struct BitSets {
  std::vector<std::size_t> ones;
  std::vector<std::size_t> zeros;
};

BitSets bit_sets(const BitVec& a, std::size_t m);

/// f1: 0->1 flips, f2: 1->0 flips, f3/f4: the same flips weighted by 2^bit.
struct FeatureVector {
  double f1 = 0, f2 = 0, f3 = 0, f4 = 0;
};

/// Flips of observed word y relative to golden word y0.
FeatureVector feature_vector(const BitVec& y, const BitVec& y0, std::size_t m);

inline constexpr std::size_t kFeatures = 4;

/// n_clocks x n_duties x 4 tensor, row-major.
struct FeatureTensor {
  std::size_t n_clocks = 0;
  std::size_t n_duties = 0;
  BitVec input;
  std::vector<double> values;

  std::size_t size() const noexcept { return n_clocks * n_duties * kFeatures; }
  double at(std::size_t i, std::size_t j, std::size_t k) const {
    return values[(i * n_duties + j) * kFeatures + k];
  }
};

/// Throws std::runtime_error when a grid cell failed to simulate.
FeatureTensor feature_tensor(const OutputGrid& grid, std::size_t row);

std::vector<FeatureTensor> feature_tensors(const OutputGrid& grid);

/// Element-wise sum of k consecutive tensors.
struct Bin {
  std::size_t k = 0;
  std::size_t n_clocks = 0;
  std::size_t n_duties = 0;
  std::vector<double> values;
};

/// Consecutive groups of k; a trailing remainder is dropped and counted in
/// `dropped` when given.
std::vector<Bin> bin_tensors(const std::vector<FeatureTensor>& tensors, std::size_t k,
                             std::size_t* dropped = nullptr);

std::string tensor_to_jsonl(const FeatureTensor& t);
FeatureTensor tensor_from_jsonl(const std::string& line);

}  // namespace atd
