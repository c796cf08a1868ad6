#include "rof1d/io.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace rof1d {

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

void ensure_directory(const std::string& path) {
  std::filesystem::create_directories(path);
}

void write_signal_csv(const std::string& path, const GridSignal& w) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << "x";
  for (int ch = 1; ch <= w.channels(); ++ch) out << ",u_" << ch;
  out << "\n";
  for (int i = 0; i <= w.grid.cells; ++i) {
    out << format_double(w.grid.node(i));
    for (int ch = 0; ch < w.channels(); ++ch) out << "," << format_double(w.values(ch, i));
    out << "\n";
  }
}

void write_atoms_json(const std::string& path, const GridSignal& w) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& a : w.atoms) {
    nlohmann::json j;
    j["x"] = w.grid.midpoint(a.cell);
    j["cell"] = a.cell;
    j["jump"] = std::vector<double>(a.jump.data(), a.jump.data() + a.jump.size());
    arr.push_back(j);
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << arr.dump(2) << "\n";
}

GridSignal read_signal_csv(const std::string& path, const std::string& atoms_path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open signal csv: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty signal csv: " + path);
  int channels = 0;
  for (char c : line)
    if (c == ',') ++channels;
  std::vector<double> xs;
  std::vector<std::vector<double>> vals(channels);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    xs.push_back(std::stod(cell));
    for (int ch = 0; ch < channels; ++ch) {
      std::getline(ss, cell, ',');
      vals[ch].push_back(std::stod(cell));
    }
  }
  if (xs.size() < 2) throw ConfigError("signal csv needs at least two nodes: " + path);
  GridSignal w;
  w.grid = Grid(xs.front(), xs.back(), static_cast<int>(xs.size()) - 1);
  w.values.resize(channels, xs.size());
  for (int ch = 0; ch < channels; ++ch)
    for (std::size_t i = 0; i < xs.size(); ++i) w.values(ch, i) = vals[ch][i];
  if (!atoms_path.empty()) {
    std::ifstream ain(atoms_path);
    if (!ain) throw ConfigError("cannot open atoms json: " + atoms_path);
    nlohmann::json arr = nlohmann::json::parse(ain);
    for (const auto& j : arr) {
      Atom a;
      a.cell = j.at("cell").get<int>();
      const auto& jm = j.at("jump");
      a.jump.resize(jm.size());
      for (std::size_t k = 0; k < jm.size(); ++k) a.jump[k] = jm[k].get<double>();
      w.atoms.push_back(a);
    }
  }
  return w;
}

void write_report_csv(const std::string& path, const std::string& theorem,
                      const std::vector<ReportRow>& rows) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << "theorem,label,window_lo,window_hi,k,lhs,rhs,ratio,slack,pass\n";
  for (const auto& r : rows) {
    out << theorem << "," << r.label << "," << format_double(r.window_lo) << ","
        << format_double(r.window_hi) << "," << format_double(r.k) << "," << format_double(r.lhs)
        << "," << format_double(r.rhs) << "," << format_double(r.ratio) << ","
        << format_double(r.slack) << "," << (r.pass ? 1 : 0) << "\n";
  }
}

}  // namespace rof1d
