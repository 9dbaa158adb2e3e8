#pragma once

#include <filesystem>
#include <optional>
#include <string>

namespace sentinel {

/// A crime-alarm record. Timestamps are synthesized as frame index / fps, so
/// runs are reproducible without a wall clock.
struct AlertEvent {
    double ts = 0.0;
    std::size_t frame = 0;
    std::string kind = "crime_alert";
    double probability = 0.0;
    std::string message;
};

struct DispatchPolicy {
    double cooldown_s = 60.0;
    int max_retries = 3;
    double backoff_base_s = 1.0;  // doubles per retry
};

struct DispatchResult {
    bool delivered = false;
    int attempts = 0;
};

/// True iff there is no prior alert or now - last_sent >= cooldown_s
/// (boundary inclusive).
bool should_dispatch(std::optional<double> last_sent, double now, const DispatchPolicy& policy);

/// Deterministic single-line alert text, e.g.
/// "crime_alert frame=12 p=0.910 t=1.2s" (probability to 3 decimals).
std::string format_message(const AlertEvent& event);

/// Delay before retry number retry_index + 1: backoff_base_s * 2^retry_index.
double retry_delay_s(const DispatchPolicy& policy, int retry_index);

/// POST the event as JSON to the endpoint with "Authorization: Bearer <token>"
/// (header omitted when the token is empty). A 2xx response is delivered;
/// anything else is retried with exponential backoff up to max_retries.
/// Failures are absorbed into the result, never thrown into the pipeline.
DispatchResult dispatch(const AlertEvent& event, const std::string& endpoint,
                        const std::string& token, const DispatchPolicy& policy);

/// Append one JSON line {event fields, delivered, attempts}; throws on write
/// failure.
void append_event(const std::filesystem::path& log_path, const AlertEvent& event,
                  const DispatchResult& result);

/// Serialized cooldown decision state: allow() returns whether to dispatch
/// now and records the time when it does.
class CooldownGate {
  public:
    bool allow(double now, const DispatchPolicy& policy);
    std::optional<double> last_sent() const { return last_; }

  private:
    std::optional<double> last_;
};

}  // namespace sentinel
