#include "spinn/records.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <limits>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace spinn {
namespace {

const char* kHeader =
    "step,t,loss,l2_error,F_x,F_y,F_z,beta_x,beta_y,beta_z,x_L,N,epochs,wall_ms";

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_cell(const std::string& s) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("records_from_csv: bad number '" + s + "'");
  return v;
}

}  // namespace

std::string records_to_csv(std::span<const StepRecord> records) {
  std::ostringstream out;
  out << kHeader << '\n';
  for (const StepRecord& r : records) {
    out << r.step << ',' << fmt(r.t) << ',' << fmt(r.loss) << ',' << fmt(r.l2_error);
    for (int d = 0; d < 3; ++d) out << ',' << fmt(r.f[d]);
    for (int d = 0; d < 3; ++d) out << ',' << fmt(r.beta[d]);
    out << ',' << fmt(r.x_left) << ',' << r.order << ',' << r.epochs << ','
        << fmt(r.wall_ms) << '\n';
  }
  return out.str();
}

std::string records_to_json(std::span<const StepRecord> records) {
  nlohmann::json arr = nlohmann::json::array();
  auto num = [](double v) {
    return std::isnan(v) ? nlohmann::json() : nlohmann::json(v);
  };
  for (const StepRecord& r : records) {
    nlohmann::json j;
    j["step"] = r.step;
    j["t"] = num(r.t);
    j["loss"] = num(r.loss);
    j["l2_error"] = num(r.l2_error);
    j["F_x"] = num(r.f[0]);
    j["F_y"] = num(r.f[1]);
    j["F_z"] = num(r.f[2]);
    j["beta_x"] = num(r.beta[0]);
    j["beta_y"] = num(r.beta[1]);
    j["beta_z"] = num(r.beta[2]);
    j["x_L"] = num(r.x_left);
    j["N"] = r.order;
    j["epochs"] = r.epochs;
    j["wall_ms"] = num(r.wall_ms);
    arr.push_back(std::move(j));
  }
  return arr.dump(2);
}

std::vector<StepRecord> records_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kHeader)
    throw std::invalid_argument("records_from_csv: missing or unexpected header");
  std::vector<StepRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.push_back("");
    if (cells.size() != 14)
      throw std::invalid_argument("records_from_csv: expected 14 columns");
    StepRecord r;
    r.step = int(std::stol(cells[0]));
    r.t = parse_cell(cells[1]);
    r.loss = parse_cell(cells[2]);
    r.l2_error = parse_cell(cells[3]);
    for (int d = 0; d < 3; ++d) r.f[d] = parse_cell(cells[4 + d]);
    for (int d = 0; d < 3; ++d) r.beta[d] = parse_cell(cells[7 + d]);
    r.x_left = parse_cell(cells[10]);
    r.order = int(std::stol(cells[11]));
    r.epochs = std::stol(cells[12]);
    r.wall_ms = parse_cell(cells[13]);
    out.push_back(r);
  }
  return out;
}

void emit_records(std::span<const StepRecord> records, RecordFormat format,
                  const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_records: cannot open " + path);
  out << (format == RecordFormat::Csv ? records_to_csv(records)
                                      : records_to_json(records));
  if (!out) throw std::runtime_error("emit_records: write failed for " + path);
}

}  // namespace spinn
