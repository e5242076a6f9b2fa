#pragma once

// JSON formats for channels, states and run reports.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "chent/channel_measures.hpp"
#include "chent/channels.hpp"
#include "chent/properties.hpp"
#include "chent/states.hpp"

namespace chent::io {

inline constexpr const char* kToolVersion = "0.1.0";

/// Malformed input. `field()` names the offending JSON field (or "file").
class InputError : public std::runtime_error {
 public:
  InputError(std::string field, const std::string& what)
      : std::runtime_error("field '" + field + "': " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

std::string read_file(const std::filesystem::path& path);

/// {"in_dims","out_dims","kraus"} with entries [re, im] (or plain reals), or
/// {"name", "params"} for the built-in channels.
Channel channel_from_json(const nlohmann::json& j);
nlohmann::json channel_to_json(const Channel& ch);
Channel load_channel(const std::filesystem::path& path);

/// {"dims", "vector"} or {"dims", "rho"}.
QuantumState state_from_json(const nlohmann::json& j);
QuantumState load_state(const std::filesystem::path& path);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);

/// x rounded to 12 significant digits.
double round12(double x);

struct RunReport {
  std::string version = kToolVersion;
  std::string command;
  std::string digest;
  std::uint64_t seed = 0;
  std::vector<nlohmann::json> results;
  double wall_ms = 0.0;

  friend bool operator==(const RunReport&, const RunReport&) = default;
};

/// Values are rounded to 12 significant digits; |value| < 1e-12 is written as
/// 0.0 next to a "value_raw" field.
nlohmann::json result_to_json(const MeasureResult& r);
nlohmann::json strength_to_json(const StrengthReport& s);
nlohmann::json property_to_json(const PropertyOutcome& o);

nlohmann::json report_to_json(const RunReport& r);
RunReport report_from_json(const nlohmann::json& j);
std::string serialize(const RunReport& r);
RunReport parse_report(std::string_view text);

}  // namespace chent::io
