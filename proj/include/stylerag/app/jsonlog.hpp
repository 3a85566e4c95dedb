#pragma once

#include <string>

#include "json.hpp"

namespace stylerag::app {

// One JSON object per stderr line: {"ts": ms, "event": ..., ...fields}.
// stdout stays reserved for command results.
void log_event(const std::string& event, nlohmann::json fields);

// Process-unique query ids ("q-000001", ...) tying log lines to requests.
std::string new_query_id();

}  // namespace stylerag::app
