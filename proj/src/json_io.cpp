#include "conecalc/json_io.hpp"

#include "conecalc/version.hpp"

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace conecalc::io {

std::string double_to_string(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) throw Error("failed to format a double");
  return std::string(buf, ptr);
}

Json complex_to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Complex complex_from_json(const Json& j) {
  if (j.is_number()) return Complex(j.get<double>(), 0.0);
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() ||
      !j[1].is_number()) {
    throw InvalidRequestError("complex values must be [re, im] pairs");
  }
  return Complex(j[0].get<double>(), j[1].get<double>());
}

Json cvec_to_json(const CVec& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v(i)));
  return out;
}

CVec cvec_from_json(const Json& j) {
  if (!j.is_array()) throw InvalidRequestError("vector must be an array");
  CVec v(static_cast<Eigen::Index>(j.size()));
  Eigen::Index i = 0;
  for (const auto& e : j) v(i++) = complex_from_json(e);
  return v;
}

Json rvec_to_json(const RVec& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

RVec rvec_from_json(const Json& j) {
  if (!j.is_array()) throw InvalidRequestError("vector must be an array");
  RVec v(static_cast<Eigen::Index>(j.size()));
  Eigen::Index i = 0;
  for (const auto& e : j) {
    if (!e.is_number()) throw InvalidRequestError("vector entries must be numbers");
    v(i++) = e.get<double>();
  }
  return v;
}

Json cmat_to_json(const CMat& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

CMat cmat_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) {
    throw InvalidRequestError("matrix must be a non-empty array of rows");
  }
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
  CMat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw InvalidRequestError("matrix rows must have equal length");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(i, c) = complex_from_json(row[static_cast<std::size_t>(c)]);
    }
  }
  return m;
}

Json contour_to_json(const sectors::Contour& c) {
  Json j;
  j["theta"] = c.theta;
  j["delta"] = c.delta;
  j["tol"] = c.tol;
  j["r_min"] = c.r_min;
  j["r_max"] = c.r_max;
  j["nodes_per_ray"] = c.nodes_per_ray;
  j["orientation"] = c.orientation;
  j["tail_bound"] = c.tail_bound;
  j["error_estimate"] = c.error_estimate;
  Json nodes = Json::array();
  Json weights = Json::array();
  for (std::size_t i = 0; i < c.nodes.size(); ++i) {
    nodes.push_back(complex_to_json(c.nodes[i]));
    weights.push_back(complex_to_json(c.weights[i]));
  }
  j["nodes"] = std::move(nodes);
  j["weights"] = std::move(weights);
  return j;
}

sectors::Contour contour_from_json(const Json& j) {
  validate_keys(j,
                {"theta", "delta", "tol", "r_min", "r_max", "nodes_per_ray",
                 "orientation", "tail_bound", "error_estimate", "nodes",
                 "weights"},
                "contour");
  sectors::Contour c;
  c.theta = require_number(j, "theta", "contour");
  c.delta = require_number(j, "delta", "contour");
  c.tol = require_number(j, "tol", "contour");
  c.r_min = require_number(j, "r_min", "contour");
  c.r_max = require_number(j, "r_max", "contour");
  c.nodes_per_ray = require_int(j, "nodes_per_ray", "contour");
  c.orientation = string_or(j, "orientation", "positive", "contour");
  c.tail_bound = number_or(j, "tail_bound", 0.0, "contour");
  c.error_estimate = number_or(j, "error_estimate", 0.0, "contour");
  if (!j.contains("nodes") || !j.contains("weights")) {
    throw InvalidRequestError("contour needs nodes and weights arrays");
  }
  const CVec nodes = cvec_from_json(j.at("nodes"));
  const CVec weights = cvec_from_json(j.at("weights"));
  if (nodes.size() != weights.size()) {
    throw InvalidRequestError("contour nodes/weights length mismatch");
  }
  c.nodes.assign(nodes.data(), nodes.data() + nodes.size());
  c.weights.assign(weights.data(), weights.data() + weights.size());
  c.coarse_weights.assign(c.weights.size(), Complex(0.0, 0.0));
  return c;
}

void validate_keys(const Json& j, const std::vector<std::string>& allowed,
                   const std::string& where) {
  if (!j.is_object()) {
    throw InvalidRequestError(where + " must be a JSON object");
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const auto& key : allowed) {
      if (it.key() == key) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw InvalidRequestError("unknown key \"" + it.key() + "\" in " + where);
    }
  }
}

namespace {

const Json* find(const Json& j, const std::string& key) {
  if (!j.is_object()) return nullptr;
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

}  // namespace

double require_number(const Json& j, const std::string& key,
                      const std::string& where) {
  const Json* e = find(j, key);
  if (e == nullptr || !e->is_number()) {
    throw InvalidRequestError(where + " needs numeric key \"" + key + "\"");
  }
  return e->get<double>();
}

double number_or(const Json& j, const std::string& key, double fallback,
                 const std::string& where) {
  const Json* e = find(j, key);
  if (e == nullptr) return fallback;
  if (!e->is_number()) {
    throw InvalidRequestError(where + " key \"" + key + "\" must be a number");
  }
  return e->get<double>();
}

int require_int(const Json& j, const std::string& key,
                const std::string& where) {
  const Json* e = find(j, key);
  if (e == nullptr || !e->is_number_integer()) {
    throw InvalidRequestError(where + " needs integer key \"" + key + "\"");
  }
  return e->get<int>();
}

int int_or(const Json& j, const std::string& key, int fallback,
           const std::string& where) {
  const Json* e = find(j, key);
  if (e == nullptr) return fallback;
  if (!e->is_number_integer()) {
    throw InvalidRequestError(where + " key \"" + key + "\" must be an integer");
  }
  return e->get<int>();
}

std::string string_or(const Json& j, const std::string& key,
                      const std::string& fallback, const std::string& where) {
  const Json* e = find(j, key);
  if (e == nullptr) return fallback;
  if (!e->is_string()) {
    throw InvalidRequestError(where + " key \"" + key + "\" must be a string");
  }
  return e->get<std::string>();
}

bool bool_or(const Json& j, const std::string& key, bool fallback,
             const std::string& where) {
  const Json* e = find(j, key);
  if (e == nullptr) return fallback;
  if (!e->is_boolean()) {
    throw InvalidRequestError(where + " key \"" + key + "\" must be a boolean");
  }
  return e->get<bool>();
}

Json report_envelope(const std::string& command, std::uint64_t seed,
                     const Json& parameters) {
  Json j;
  j["tool"] = Json{{"name", kToolName}, {"version", kToolVersion}};
  j["command"] = command;
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm);
  j["timestamp"] = stamp;
  j["seed"] = seed;
  j["parameters"] = parameters;
  j["results"] = Json::object();
  j["verdicts"] = Json::array();
  return j;
}

void write_text_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(p, std::ios::binary);  // binary keeps LF endings
  if (!out) throw Error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw Error("failed writing " + path);
}

std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out << ',';
    out << header[i];
  }
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << row[i];
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace conecalc::io
