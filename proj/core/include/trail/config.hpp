#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "trail/runner.hpp"

namespace trail {

// Flat dotted-key config file: one `key = value` per line, `#` comments,
// blank lines ignored. Parse errors carry the 1-based line number.
std::map<std::string, std::string> parse_config_text(const std::string& text);

// Builds a TrainConfig from parsed keys (env.name, env.rooms_x, trail.k,
// train.updates_per_step, ...). Unknown keys throw std::invalid_argument
// naming the key.
TrainConfig train_config_from(const std::map<std::string, std::string>& kv);

// Serializes back to the flat format, floats at 17 significant digits.
std::string train_config_to_text(const TrainConfig& cfg);

} // namespace trail
