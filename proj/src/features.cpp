#include "atd/features.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace atd {

namespace {

// Integer value of the word; correctly rounded for widths up to 64.
double word_value(const BitVec& v) {
  double sum = 0.0;
  const auto w = v.words();
  for (std::size_t i = w.size(); i-- > 0;) {
    if (w[i] != 0) sum += std::ldexp(static_cast<double>(w[i]), static_cast<int>(64 * i));
  }
  return sum;
}

}  // namespace

BitSets bit_sets(const BitVec& a, std::size_t m) {
  if (a.width() != m) throw std::invalid_argument("bit_sets: width mismatch");
  BitSets s;
  for (std::size_t r = 0; r < m; ++r) (a.get(r) ? s.ones : s.zeros).push_back(r);
  return s;
}

FeatureVector feature_vector(const BitVec& y, const BitVec& y0, std::size_t m) {
  if (y.width() != m || y0.width() != m) throw std::invalid_argument("feature_vector: width mismatch");
  const BitVec rise = ~y0 & y;
  const BitVec fall = y0 & ~y;
  return {static_cast<double>(rise.popcount()), static_cast<double>(fall.popcount()), word_value(rise),
          word_value(fall)};
}

FeatureTensor feature_tensor(const OutputGrid& grid, std::size_t row) {
  const auto& r = grid.rows.at(row);
  const std::size_t nc = grid.n_clocks(), na = grid.n_duties();
  if (r.observed.size() != nc * na) throw std::runtime_error("feature_tensor: grid row incomplete");
  FeatureTensor t{nc, na, r.input, std::vector<double>(nc * na * kFeatures)};
  for (std::size_t i = 0; i < nc; ++i) {
    for (std::size_t j = 0; j < na; ++j) {
      const std::size_t cell = i * na + j;
      if (!r.failed.empty() && r.failed[cell]) {
        throw std::runtime_error("feature_tensor: missing grid cell (clock " + std::to_string(i) + ", duty " +
                                 std::to_string(grid.duties[j]) + ")");
      }
      const auto f = feature_vector(r.observed[cell], r.golden, grid.width);
      double* out = &t.values[cell * kFeatures];
      out[0] = f.f1;
      out[1] = f.f2;
      out[2] = f.f3;
      out[3] = f.f4;
    }
  }
  return t;
}

std::vector<FeatureTensor> feature_tensors(const OutputGrid& grid) {
  std::vector<FeatureTensor> out;
  out.reserve(grid.rows.size());
  for (std::size_t r = 0; r < grid.rows.size(); ++r) out.push_back(feature_tensor(grid, r));
  return out;
}

std::vector<Bin> bin_tensors(const std::vector<FeatureTensor>& tensors, std::size_t k, std::size_t* dropped) {
  if (tensors.empty()) throw std::invalid_argument("bin_tensors: no tensors");
  if (k == 0) throw std::invalid_argument("bin_tensors: bin size must be at least 1");
  const auto& first = tensors.front();
  std::vector<Bin> bins;
  const std::size_t full = tensors.size() / k;
  for (std::size_t b = 0; b < full; ++b) {
    Bin bin{k, first.n_clocks, first.n_duties, std::vector<double>(first.size(), 0.0)};
    for (std::size_t i = b * k; i < (b + 1) * k; ++i) {
      const auto& t = tensors[i];
      if (t.n_clocks != first.n_clocks || t.n_duties != first.n_duties || t.values.size() != first.size()) {
        throw std::invalid_argument("bin_tensors: tensor dimensions differ");
      }
      for (std::size_t e = 0; e < t.values.size(); ++e) bin.values[e] += t.values[e];
    }
    bins.push_back(std::move(bin));
  }
  if (dropped) *dropped = tensors.size() - full * k;
  return bins;
}

std::string tensor_to_jsonl(const FeatureTensor& t) {
  nlohmann::json j{{"input", t.input.to_hex()},
                   {"width", t.input.width()},
                   {"dims", {t.n_clocks, t.n_duties, kFeatures}},
                   {"values", t.values}};
  return j.dump();
}

FeatureTensor tensor_from_jsonl(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  FeatureTensor t;
  const auto dims = j.at("dims").get<std::vector<std::size_t>>();
  if (dims.size() != 3 || dims[2] != kFeatures) throw std::runtime_error("feature record: bad dims");
  t.n_clocks = dims[0];
  t.n_duties = dims[1];
  t.input = BitVec::from_hex(j.at("input").get<std::string>(), j.at("width").get<std::size_t>());
  t.values = j.at("values").get<std::vector<double>>();
  if (t.values.size() != t.size()) throw std::runtime_error("feature record: value count does not match dims");
  return t;
}

}  // namespace atd
