#include "chent/io.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "chent/errors.hpp"

namespace chent::io {

using nlohmann::json;

namespace {

const json& field(const json& j, const char* name) {
  if (!j.is_object()) throw InputError("<root>", "expected a JSON object");
  const auto it = j.find(name);
  if (it == j.end()) throw InputError(name, "missing");
  return *it;
}

SystemDims dims_field(const json& j, const char* name) {
  const json& d = field(j, name);
  if (!d.is_array() || d.empty()) throw InputError(name, "expected a nonempty array of integers");
  std::vector<std::size_t> out;
  for (const auto& x : d) {
    if (!x.is_number_unsigned()) throw InputError(name, "expected positive integers");
    out.push_back(x.get<std::size_t>());
  }
  try {
    return SystemDims(std::move(out));
  } catch (const Error& e) {
    throw InputError(name, e.what());
  }
}

Complex complex_entry(const json& x, const std::string& where) {
  if (x.is_number()) return {x.get<double>(), 0.0};
  if (x.is_array() && x.size() == 2 && x[0].is_number() && x[1].is_number()) {
    return {x[0].get<double>(), x[1].get<double>()};
  }
  throw InputError(where, "expected [re, im] or a number");
}

ComplexMatrix matrix_entry(const json& m, std::size_t rows, std::size_t cols, const std::string& where) {
  if (!m.is_array() || m.size() != rows) throw InputError(where, "expected " + std::to_string(rows) + " rows");
  ComplexMatrix out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!m[r].is_array() || m[r].size() != cols) {
      throw InputError(where, "row " + std::to_string(r) + " needs " + std::to_string(cols) + " entries");
    }
    for (std::size_t c = 0; c < cols; ++c) out(r, c) = complex_entry(m[r][c], where);
  }
  return out;
}

json complex_json(Complex z) { return json::array({round12(z.real()), round12(z.imag())}); }

json matrix_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(complex_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(std::span<const Complex> v) {
  json out = json::array();
  for (const auto& z : v) out.push_back(complex_json(z));
  return out;
}

json real_vector_json(const RealVector& v) {
  json out = json::array();
  for (double x : v) out.push_back(round12(x));
  return out;
}

json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError("file", std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("file", "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Channel channel_from_json(const json& j) {
  if (!j.is_object()) throw InputError("<root>", "expected a JSON object");
  if (j.contains("name")) {
    const json& n = j["name"];
    if (!n.is_string()) throw InputError("name", "expected a string");
    std::map<std::string, double> params;
    if (j.contains("params")) {
      const json& p = j["params"];
      if (!p.is_object()) throw InputError("params", "expected an object");
      for (const auto& [key, value] : p.items()) {
        if (!value.is_number()) throw InputError("params." + key, "expected a number");
        params[key] = value.get<double>();
      }
    }
    try {
      return named_channel(n.get<std::string>(), params);
    } catch (const Error& e) {
      throw InputError(e.code() == ErrorCode::UnknownName ? "name" : "params", e.what());
    }
  }
  const SystemDims in = dims_field(j, "in_dims");
  const SystemDims out = dims_field(j, "out_dims");
  const json& ks = field(j, "kraus");
  if (!ks.is_array() || ks.empty()) throw InputError("kraus", "expected a nonempty array of matrices");
  std::vector<ComplexMatrix> kraus;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    kraus.push_back(matrix_entry(ks[i], out.total(), in.total(), "kraus[" + std::to_string(i) + "]"));
  }
  try {
    return Channel(in, out, std::move(kraus));
  } catch (const Error& e) {
    throw InputError("kraus", e.what());
  }
}

json channel_to_json(const Channel& ch) {
  json ks = json::array();
  for (const auto& k : ch.kraus()) ks.push_back(matrix_json(k));
  return {{"in_dims", ch.in_dims().dims()}, {"out_dims", ch.out_dims().dims()}, {"kraus", std::move(ks)}};
}

Channel load_channel(const std::filesystem::path& path) { return channel_from_json(parse_text(read_file(path))); }

QuantumState state_from_json(const json& j) {
  const SystemDims dims = dims_field(j, "dims");
  const std::size_t d = dims.total();
  try {
    if (j.contains("vector")) {
      const json& v = j["vector"];
      if (!v.is_array() || v.size() != d) throw InputError("vector", "expected " + std::to_string(d) + " entries");
      ComplexVector psi;
      for (const auto& x : v) psi.push_back(complex_entry(x, "vector"));
      return QuantumState::from_vector(dims, std::move(psi));
    }
    return QuantumState::from_density(dims, matrix_entry(field(j, "rho"), d, d, "rho"));
  } catch (const Error& e) {
    throw InputError(j.contains("vector") ? "vector" : "rho", e.what());
  }
}

QuantumState load_state(const std::filesystem::path& path) { return state_from_json(parse_text(read_file(path))); }

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  std::ostringstream ss;
  for (unsigned int i = 0; i < len; ++i) ss << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return ss.str();
}

double round12(double x) {
  if (!std::isfinite(x) || x == 0.0) return x;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

json result_to_json(const MeasureResult& r) {
  json w = {{"kind", r.witness.kind}, {"theta", real_vector_json(r.witness.theta)}};
  if (!r.witness.product_state.empty()) {
    json ps = json::array();
    for (const auto& v : r.witness.product_state) ps.push_back(vector_json(v));
    w["product_state"] = std::move(ps);
  }
  if (!r.witness.kraus.empty()) {
    json ks = json::array();
    for (const auto& k : r.witness.kraus) ks.push_back(matrix_json(k));
    w["kraus"] = std::move(ks);
  }
  const auto& t = r.telemetry;
  json out = {{"measure", r.measure},
              {"value", std::abs(r.value) < 1e-12 ? 0.0 : round12(r.value)},
              {"bound", std::string(to_string(r.bound))},
              {"witness", std::move(w)},
              {"telemetry",
               {{"starts", t.starts},
                {"iterations", t.iterations},
                {"evaluations", t.evaluations},
                {"seed", t.seed},
                {"best_start", t.best_start}}},
              {"notes", r.notes}};
  if (std::abs(r.value) < 1e-12) out["value_raw"] = r.value;
  return out;
}

json strength_to_json(const StrengthReport& s) {
  json per_k = json::array();
  for (const auto& r : s.per_k) per_k.push_back(result_to_json(r));
  json state = json::array();
  for (const auto& v : s.witness_state) state.push_back(vector_json(v));
  // a positive k-ME value found at k is certain, missed ones are not
  return {{"measure", "strength"},
          {"value", s.K},
          {"bound", "upper"},
          {"classification", s.classification},
          {"witness", {{"kind", s.witness_state.empty() ? "none" : "product_state"}, {"product_state", state}}},
          {"mixed_outputs_seen", s.mixed_outputs_seen},
          {"notes", s.caveat},
          {"per_k", std::move(per_k)}};
}

json property_to_json(const PropertyOutcome& o) {
  return {{"property", o.name},
          {"passed", o.passed},
          {"worst_margin", round12(o.worst_margin)},
          {"trials", o.trials},
          {"detail", o.detail}};
}

json report_to_json(const RunReport& r) {
  return {{"version", r.version}, {"command", r.command}, {"digest", r.digest},
          {"seed", r.seed},       {"results", r.results}, {"wall_ms", r.wall_ms}};
}

RunReport report_from_json(const json& j) {
  RunReport r;
  try {
    r.version = field(j, "version").get<std::string>();
    r.command = field(j, "command").get<std::string>();
    r.digest = field(j, "digest").get<std::string>();
    r.seed = field(j, "seed").get<std::uint64_t>();
    r.results = field(j, "results").get<std::vector<json>>();
    r.wall_ms = field(j, "wall_ms").get<double>();
  } catch (const json::type_error& e) {
    throw InputError("report", e.what());
  }
  return r;
}

std::string serialize(const RunReport& r) { return report_to_json(r).dump(2) + "\n"; }

RunReport parse_report(std::string_view text) { return report_from_json(parse_text(std::string(text))); }

}  // namespace chent::io
