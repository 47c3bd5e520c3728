#pragma once

// Run-wide knobs shared by the pipeline steps. Echoed into artifacts so a run
// can be reproduced from its outputs.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "svceco/correction.hpp"
#include "svceco/dataset.hpp"
#include "svceco/date.hpp"
#include "svceco/error.hpp"
#include "svceco/networks.hpp"

namespace svceco {

inline constexpr const char* kFixtureStoreEnv = "SVCECO_FIXTURE_STORE";

enum class ProbeMode { fixture, live };

inline ProbeMode parse_probe_mode(std::string_view s) {
  if (s == "fixture") return ProbeMode::fixture;
  if (s == "live") return ProbeMode::live;
  throw InputError("unknown probe mode '" + std::string(s) + "'");
}

/// "FROM,TO" with both ends inclusive.
inline TrustWindow parse_trust_window(std::string_view s) {
  const auto comma = s.find(',');
  if (comma == std::string_view::npos) throw InputError("trust window must be FROM,TO");
  const auto from = Date::try_parse(s.substr(0, comma));
  const auto to = Date::try_parse(s.substr(comma + 1));
  if (!from || !to) throw InputError("trust window dates must be YYYY-MM-DD");
  if (*to < *from) throw InputError("trust window is empty");
  return {*from, *to};
}

inline Date parse_date_arg(std::string_view what, std::string_view s) {
  auto d = Date::try_parse(s);
  if (!d) throw InputError(std::string(what) + ": invalid date '" + std::string(s) + "'");
  return *d;
}

struct RunConfig {
  std::optional<std::uint64_t> seed;
  Date beta = default_beta();
  TrustWindow trust_window;
  Cadence cadence = Cadence::yearly;
  ProbeMode probe_mode = ProbeMode::fixture;
  std::string fixture_store;
  int repeat = 1;
  int workers = 1;

  /// Sampling steps cannot run without an explicit seed.
  std::uint64_t require_seed() const {
    if (!seed) throw InputError("--seed is required for this step");
    return *seed;
  }

  nlohmann::json to_json() const {
    nlohmann::json j = {{"beta", beta.iso()},
                        {"trust_window", {trust_window.from.iso(), trust_window.to.iso()}},
                        {"cadence", to_string(cadence)}};
    if (seed) j["seed"] = *seed;
    return j;
  }
};

}  // namespace svceco
