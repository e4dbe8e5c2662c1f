#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "acnmp/cnmp.hpp"
#include "acnmp/errors.hpp"
#include "acnmp/trajectory.hpp"

namespace acnmp {

// Doubles are written as hexfloats so snapshots and datasets round-trip
// bit-exactly.
inline std::string format_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

inline double parse_double(const std::string& s) {
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw DataError("malformed number: " + s);
  }
}

// ---------------------------------------------------------------------------
// Trajectory datasets: JSON Lines, one object per line:
//   {"id": "...", "task_params": [...], "points": [[t, v1..vD], ...]}
// ---------------------------------------------------------------------------

inline nlohmann::json trajectory_to_json(const Trajectory& traj) {
  nlohmann::json j;
  j["id"] = traj.id;
  j["task_params"] = traj.task_params;
  nlohmann::json points = nlohmann::json::array();
  for (std::size_t k = 0; k < traj.size(); ++k) {
    nlohmann::json p = nlohmann::json::array();
    p.push_back(traj.times[k]);
    for (double v : traj.values[k]) p.push_back(v);
    points.push_back(std::move(p));
  }
  j["points"] = std::move(points);
  return j;
}

inline Trajectory trajectory_from_json(const nlohmann::json& j) {
  Trajectory traj;
  try {
    traj.id = j.at("id").get<std::string>();
    traj.task_params = j.at("task_params").get<std::vector<double>>();
    for (const auto& p : j.at("points")) {
      if (!p.is_array() || p.size() < 2) throw DataError("point needs [t, v...]");
      traj.times.push_back(p[0].get<double>());
      std::vector<double> sm;
      for (std::size_t d = 1; d < p.size(); ++d) sm.push_back(p[d].get<double>());
      traj.values.push_back(std::move(sm));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed trajectory record: ") + e.what());
  }
  try {
    traj.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
  return traj;
}

inline void save_dataset(const DemonstrationSet& demos, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  for (const Trajectory& traj : demos.trajectories) out << trajectory_to_json(traj).dump() << "\n";
}

inline DemonstrationSet load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset: " + path);
  DemonstrationSet demos;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    try {
      demos.add(trajectory_from_json(j));
    } catch (const std::invalid_argument& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (demos.empty()) throw DataError(path + ": empty dataset");
  return demos;
}

// ---------------------------------------------------------------------------
// Model snapshots: versioned text, header first, then the flat parameter
// values in declared layout order.
// ---------------------------------------------------------------------------

inline constexpr const char* kSnapshotMagic = "acnmp-snapshot";
inline constexpr int kSnapshotVersion = 1;

inline std::string spec_to_string(const MlpSpec& spec) {
  std::ostringstream os;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    if (k) os << ' ';
    os << spec[k].input_width << ':' << spec[k].output_width << ':'
       << activation_name(spec[k].activation);
  }
  return os.str();
}

inline MlpSpec spec_from_string(const std::string& text) {
  MlpSpec spec;
  std::istringstream is(text);
  std::string token;
  while (is >> token) {
    const auto a = token.find(':');
    const auto b = token.find(':', a + 1);
    if (a == std::string::npos || b == std::string::npos)
      throw DataError("malformed layer token: " + token);
    LayerSpec l;
    l.input_width = std::stoi(token.substr(0, a));
    l.output_width = std::stoi(token.substr(a + 1, b - a - 1));
    try {
      l.activation = activation_from_name(token.substr(b + 1));
    } catch (const std::invalid_argument& e) {
      throw DataError(e.what());
    }
    spec.push_back(l);
  }
  if (spec.empty()) throw DataError("empty layer spec");
  return spec;
}

inline void save_snapshot(const CNMPModel& model, const std::string& path) {
  model.validate();
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << kSnapshotMagic << " v" << kSnapshotVersion << "\n";
  out << "sm_width " << model.sm_width << "\n";
  out << "gamma_width " << model.gamma_width << "\n";
  out << "latent_width " << model.latent_width << "\n";
  out << "sigma_floor " << format_double(model.sigma_floor) << "\n";
  out << "gamma_to_encoder " << (model.gamma_to_encoder ? 1 : 0) << "\n";
  out << "gamma_to_decoder " << (model.gamma_to_decoder ? 1 : 0) << "\n";
  out << "encoder_spec " << spec_to_string(model.encoder_spec) << "\n";
  out << "decoder_spec " << spec_to_string(model.decoder_spec) << "\n";
  out << "encoder_params " << model.encoder_params.size() << "\n";
  for (double v : model.encoder_params) out << format_double(v) << "\n";
  out << "decoder_params " << model.decoder_params.size() << "\n";
  for (double v : model.decoder_params) out << format_double(v) << "\n";
}

inline CNMPModel load_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open snapshot: " + path);
  std::string line;
  auto expect_line = [&](const char* what) -> std::string {
    if (!std::getline(in, line)) throw DataError(std::string(path) + ": truncated before " + what);
    return line;
  };
  auto field = [&](const std::string& l, const std::string& key) -> std::string {
    if (l.rfind(key + " ", 0) != 0) throw DataError(path + ": expected '" + key + "', got: " + l);
    return l.substr(key.size() + 1);
  };

  const std::string head = expect_line("header");
  if (head != std::string(kSnapshotMagic) + " v" + std::to_string(kSnapshotVersion))
    throw DataError(path + ": unsupported snapshot header: " + head);

  CNMPModel m;
  m.sm_width = std::stoi(field(expect_line("sm_width"), "sm_width"));
  m.gamma_width = std::stoi(field(expect_line("gamma_width"), "gamma_width"));
  m.latent_width = std::stoi(field(expect_line("latent_width"), "latent_width"));
  m.sigma_floor = parse_double(field(expect_line("sigma_floor"), "sigma_floor"));
  m.gamma_to_encoder = field(expect_line("gamma_to_encoder"), "gamma_to_encoder") == "1";
  m.gamma_to_decoder = field(expect_line("gamma_to_decoder"), "gamma_to_decoder") == "1";
  m.encoder_spec = spec_from_string(field(expect_line("encoder_spec"), "encoder_spec"));
  m.decoder_spec = spec_from_string(field(expect_line("decoder_spec"), "decoder_spec"));

  for (auto* which : {&m.encoder_params, &m.decoder_params}) {
    const char* key = which == &m.encoder_params ? "encoder_params" : "decoder_params";
    const std::size_t n = std::stoul(field(expect_line(key), key));
    which->reserve(n);
    for (std::size_t k = 0; k < n; ++k) which->push_back(parse_double(expect_line("parameter")));
  }
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(path + ": " + e.what());
  }
  return m;
}

// ---------------------------------------------------------------------------
// CSV helpers
// ---------------------------------------------------------------------------

// Decimal formatting with enough digits to be lossless for doubles.
inline std::string csv_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_csv(const std::string& path, const std::string& header,
                      const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << header << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << csv_double(row[i]);
    }
    out << "\n";
  }
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << text;
}

}  // namespace acnmp
