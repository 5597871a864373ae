#pragma once

#include <stdexcept>

#include "ssq/config.hpp"

namespace ssq {

// Bad flags, unknown names, unusable config values. Mapped to exit code 1;
// data and schema problems map to 2, numerical failures to 3.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Each command reads its settings from the merged config (file plus flag
// overrides), writes its outputs plus resolved_config.txt into `out`, and
// returns 0. Failures are reported by throwing.
int cmd_simulate(const KeyValueConfig& cfg);
int cmd_fit(const KeyValueConfig& cfg);
int cmd_tune(const KeyValueConfig& cfg);
int cmd_path(const KeyValueConfig& cfg);
int cmd_replicate(const KeyValueConfig& cfg);

}  // namespace ssq
