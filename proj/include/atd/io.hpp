#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "atd/aging.hpp"
#include "atd/bitvec.hpp"
#include "atd/features.hpp"
#include "atd/netlist.hpp"
#include "atd/simulator.hpp"

namespace atd {

/// Thrown for unreadable or malformed input files (CLI exit code 2).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, const std::string& text);

Netlist load_netlist(const std::filesystem::path& p);
void save_netlist(const std::filesystem::path& p, const Netlist& n);

/// {duty, seed, delays: {cell_id: ps}}; seed is null without variation.
nlohmann::json annotation_to_json(const Netlist& n, const DelayAnnotation& a);
DelayAnnotation annotation_from_json(const Netlist& n, const nlohmann::json& j);

/// One hex vector per line after a `width <w>` header.
std::string patterns_to_text(const std::vector<BitVec>& inputs, std::size_t width);
std::vector<BitVec> patterns_from_text(const std::string& text);

/// One record per (input, clock, duty).
std::string grid_to_jsonl(const OutputGrid& g);
OutputGrid grid_from_jsonl(const std::string& text, std::size_t input_width, std::size_t output_width);

std::string tensors_to_jsonl(const std::vector<FeatureTensor>& ts);
std::vector<FeatureTensor> tensors_from_jsonl(const std::string& text);

}  // namespace atd
