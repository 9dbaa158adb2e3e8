#include "sentinel/alerting.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string_view>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace sentinel {

namespace {

using nlohmann::json;

std::string fixed3(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

// Seconds with up to three decimals, trailing zeros (and a bare point) trimmed.
std::string trimmed_seconds(double v) {
    std::string s = fixed3(v);
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
}

// Webhook body: the event's kind travels in a field named "type".
json post_body(const AlertEvent& event) {
    return json{{"ts", event.ts},
                {"type", event.kind},
                {"frame", event.frame},
                {"probability", event.probability},
                {"message", event.message}};
}

bool post_once(const AlertEvent& event, const std::string& endpoint, const std::string& token) {
    static constexpr std::string_view kSchemes[] = {"http://", "https://"};
    std::string host_part;
    for (std::string_view scheme : kSchemes) {
        if (endpoint.starts_with(scheme)) {
            host_part = endpoint.substr(scheme.size());
        }
    }
    if (host_part.empty()) {
        return false;  // unsupported or empty endpoint
    }
    const std::size_t slash = host_part.find('/');
    const std::string host = host_part.substr(0, slash);
    const std::string path = slash == std::string::npos ? "/" : host_part.substr(slash);

    httplib::Client client(endpoint.substr(0, endpoint.size() - host_part.size()) + host);
    client.set_connection_timeout(2, 0);
    client.set_read_timeout(2, 0);

    httplib::Headers headers;
    if (!token.empty()) {
        headers.emplace("Authorization", "Bearer " + token);
    }
    auto res = client.Post(path, headers, post_body(event).dump(), "application/json");
    return res && res->status >= 200 && res->status < 300;
}

}  // namespace

bool should_dispatch(std::optional<double> last_sent, double now, const DispatchPolicy& policy) {
    if (!last_sent.has_value()) {
        return true;
    }
    return now - *last_sent >= policy.cooldown_s;
}

std::string format_message(const AlertEvent& event) {
    return event.kind + " frame=" + std::to_string(event.frame) +
           " p=" + fixed3(event.probability) + " t=" + trimmed_seconds(event.ts) + "s";
}

double retry_delay_s(const DispatchPolicy& policy, int retry_index) {
    if (retry_index < 0) {
        throw std::invalid_argument("retry_delay_s: retry_index must be non-negative");
    }
    return std::ldexp(policy.backoff_base_s, retry_index);
}

DispatchResult dispatch(const AlertEvent& event, const std::string& endpoint,
                        const std::string& token, const DispatchPolicy& policy) {
    DispatchResult result;
    const int tries = 1 + std::max(policy.max_retries, 0);
    for (int i = 0; i < tries; ++i) {
        if (i > 0) {
            const auto delay = std::chrono::duration<double>(retry_delay_s(policy, i - 1));
            std::this_thread::sleep_for(delay);
        }
        ++result.attempts;
        try {
            if (post_once(event, endpoint, token)) {
                result.delivered = true;
                return result;
            }
        } catch (...) {
            // carrier failure counts as a failed attempt
        }
    }
    return result;
}

void append_event(const std::filesystem::path& log_path, const AlertEvent& event,
                  const DispatchResult& result) {
    const json doc{{"ts", event.ts},          {"frame", event.frame},
                   {"kind", event.kind},      {"probability", event.probability},
                   {"message", event.message}, {"delivered", result.delivered},
                   {"attempts", result.attempts}};

    std::ofstream out(log_path, std::ios::app | std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open event log: " + log_path.string());
    }
    out << doc.dump() << '\n';
    if (!out) {
        throw std::runtime_error("write failed: " + log_path.string());
    }
}

bool CooldownGate::allow(double now, const DispatchPolicy& policy) {
    if (!should_dispatch(last_, now, policy)) {
        return false;
    }
    last_ = now;
    return true;
}

}  // namespace sentinel
