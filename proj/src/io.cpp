#include "kkd/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace kkd::io {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("atomic_write: cannot open " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("atomic_write: write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void save_signal_csv(const ComplexSignal& sig, const std::filesystem::path& path) {
  std::string out = "t,re,im\n";
  for (std::size_t k = 0; k < sig.size(); ++k) {
    out += format_double(sig.grid().time(k));
    out += ',';
    out += format_double(sig[k].real());
    out += ',';
    out += format_double(sig[k].imag());
    out += '\n';
  }
  atomic_write(path, out);
}

ComplexSignal load_signal_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_signal_csv: cannot open " + path.string());
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> t;
  std::vector<cplx> s;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    double vals[3];
    for (int i = 0; i < 3; ++i) {
      if (!std::getline(ls, cell, ',')) throw std::runtime_error("load_signal_csv: short row");
      vals[i] = std::stod(cell);
    }
    t.push_back(vals[0]);
    s.emplace_back(vals[1], vals[2]);
  }
  if (t.size() < 2) throw std::runtime_error("load_signal_csv: need at least two samples");
  const double dt = t[1] - t[0];
  return ComplexSignal(TimeGrid(t[0], dt, t.size()), std::move(s));
}

void save_signal_json(const ComplexSignal& sig, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["grid"] = {{"t_start", sig.grid().t_start}, {"dt", sig.grid().dt}, {"n", sig.grid().n}};
  auto& arr = j["samples"] = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < sig.size(); ++k)
    arr.push_back({sig[k].real(), sig[k].imag()});
  atomic_write(path, j.dump());
}

ComplexSignal load_signal_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_signal_json: cannot open " + path.string());
  nlohmann::json j = nlohmann::json::parse(in);
  TimeGrid g(j.at("grid").at("t_start").get<double>(), j.at("grid").at("dt").get<double>(),
             j.at("grid").at("n").get<std::size_t>());
  std::vector<cplx> s;
  for (const auto& row : j.at("samples"))
    s.emplace_back(row.at(0).get<double>(), row.at(1).get<double>());
  return ComplexSignal(g, std::move(s));
}

}  // namespace kkd::io
