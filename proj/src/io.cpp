#include "atd/io.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace atd {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + p.string());
}

Netlist load_netlist(const std::filesystem::path& p) {
  const auto text = read_file(p);
  try {
    return parse_netlist(text);
  } catch (const NetlistError& e) {
    throw DataError(p.string() + ": " + e.what());
  }
}

void save_netlist(const std::filesystem::path& p, const Netlist& n) { write_file(p, serialize_netlist(n)); }

nlohmann::json annotation_to_json(const Netlist& n, const DelayAnnotation& a) {
  if (a.delay.size() != n.cells().size()) throw std::invalid_argument("annotation does not cover netlist");
  nlohmann::json delays = nlohmann::json::object();
  for (std::size_t i = 0; i < a.delay.size(); ++i) delays[n.cells()[i].id] = a.delay[i];
  nlohmann::json j{{"duty", a.duty}, {"delays", delays}};
  j["seed"] = a.variation_seed ? nlohmann::json(*a.variation_seed) : nlohmann::json(nullptr);
  return j;
}

DelayAnnotation annotation_from_json(const Netlist& n, const nlohmann::json& j) {
  try {
    DelayAnnotation a;
    a.duty = j.at("duty").get<int>();
    if (j.contains("seed") && !j.at("seed").is_null()) a.variation_seed = j.at("seed").get<std::uint64_t>();
    const auto& d = j.at("delays");
    a.delay.assign(n.cells().size(), 0.0);
    std::vector<bool> seen(n.cells().size(), false);
    for (auto it = d.begin(); it != d.end(); ++it) {
      const auto idx = n.find_cell(it.key());
      if (!idx) throw DataError("annotation names unknown cell '" + it.key() + "'");
      a.delay[*idx] = it.value().get<double>();
      seen[*idx] = true;
    }
    for (std::size_t i = 0; i < seen.size(); ++i) {
      if (!seen[i]) throw DataError("annotation misses cell '" + n.cells()[i].id + "'");
    }
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed annotation: ") + e.what());
  }
}

std::string patterns_to_text(const std::vector<BitVec>& inputs, std::size_t width) {
  std::string out = "width " + std::to_string(width) + "\n";
  for (const auto& v : inputs) out += v.to_hex() + "\n";
  return out;
}

std::vector<BitVec> patterns_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string word;
  std::size_t width = 0;
  if (!(in >> word) || word != "width" || !(in >> width) || width == 0) {
    throw DataError("pattern file must start with 'width <w>'");
  }
  std::vector<BitVec> out;
  while (in >> word) {
    try {
      out.push_back(BitVec::from_hex(word, width));
    } catch (const std::invalid_argument& e) {
      throw DataError("pattern '" + word + "': " + e.what());
    }
  }
  return out;
}

std::string grid_to_jsonl(const OutputGrid& g) {
  std::string out;
  for (const auto& row : g.rows) {
    const auto in = row.input.to_hex();
    const auto golden = row.golden.to_hex();
    for (std::size_t i = 0; i < g.n_clocks(); ++i) {
      for (std::size_t j = 0; j < g.n_duties(); ++j) {
        const std::size_t cell = i * g.n_duties() + j;
        nlohmann::json rec{{"input", in}, {"golden", golden}, {"clock_ps", g.clocks[i]}, {"duty", g.duties[j]}};
        if (row.failed[cell]) {
          rec["observed"] = nullptr;
        } else {
          rec["observed"] = row.observed[cell].to_hex();
        }
        out += rec.dump();
        out += '\n';
      }
    }
  }
  return out;
}

OutputGrid grid_from_jsonl(const std::string& text, std::size_t input_width, std::size_t output_width) {
  struct Rec {
    std::string input, golden;
    double clock;
    int duty;
    std::optional<std::string> observed;
  };
  std::vector<Rec> recs;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Rec r{j.at("input").get<std::string>(), j.at("golden").get<std::string>(), j.at("clock_ps").get<double>(),
            j.at("duty").get<int>(), std::nullopt};
      if (!j.at("observed").is_null()) r.observed = j.at("observed").get<std::string>();
      recs.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("grid line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  OutputGrid g;
  g.width = output_width;
  std::map<double, std::size_t> clock_idx;
  std::map<int, std::size_t> duty_idx;
  for (const auto& r : recs) {
    clock_idx.emplace(r.clock, 0);
    duty_idx.emplace(r.duty, 0);
  }
  for (auto& [c, idx] : clock_idx) {
    idx = g.clocks.size();
    g.clocks.push_back(c);
  }
  for (auto& [d, idx] : duty_idx) {
    idx = g.duties.size();
    g.duties.push_back(d);
  }
  const std::size_t cells = g.clocks.size() * g.duties.size();
  if (cells == 0 || recs.size() % cells != 0) throw DataError("grid file is not a complete clock x duty grid");
  std::size_t row_index = 0;
  for (std::size_t start = 0; start < recs.size(); start += cells, ++row_index) {
    GridRow row;
    const auto& first = recs[start];
    row.input = BitVec::from_hex(first.input, input_width);
    row.golden = BitVec::from_hex(first.golden, output_width);
    row.observed.assign(cells, BitVec(output_width));
    row.failed.assign(cells, 1);
    for (std::size_t k = start; k < start + cells; ++k) {
      const auto& r = recs[k];
      if (r.input != first.input) throw DataError("grid records for one input are not contiguous");
      const std::size_t cell = clock_idx[r.clock] * g.duties.size() + duty_idx[r.duty];
      if (r.observed) {
        row.observed[cell] = BitVec::from_hex(*r.observed, output_width);
        row.failed[cell] = 0;
      }
    }
    g.rows.push_back(std::move(row));
  }
  return g;
}

std::string tensors_to_jsonl(const std::vector<FeatureTensor>& ts) {
  std::string out;
  for (const auto& t : ts) {
    out += tensor_to_jsonl(t);
    out += '\n';
  }
  return out;
}

std::vector<FeatureTensor> tensors_from_jsonl(const std::string& text) {
  std::vector<FeatureTensor> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(tensor_from_jsonl(line));
    } catch (const std::exception& e) {
      throw DataError("feature line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace atd
