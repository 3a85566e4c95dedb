#include "stylerag/app/jsonlog.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <mutex>

namespace stylerag::app {

namespace {
std::mutex log_mu;
std::atomic<std::uint64_t> query_counter{0};
}  // namespace

void log_event(const std::string& event, nlohmann::json fields) {
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    fields["ts"] = std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
    fields["event"] = event;
    const std::string line = fields.dump();
    std::lock_guard<std::mutex> lock(log_mu);
    std::clog << line << '\n' << std::flush;
}

std::string new_query_id() {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "q-%06llu",
                  static_cast<unsigned long long>(query_counter.fetch_add(1) + 1));
    return buf;
}

}  // namespace stylerag::app
