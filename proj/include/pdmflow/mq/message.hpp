#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace pdmflow::mq {

// Broker delivery unit. delivery_count increments on each delivery attempt;
// payload is immutable after publish.
struct Message {
    std::string msg_id;
    std::string queue;
    std::map<std::string, std::string> headers;
    std::vector<std::uint8_t> payload;
    std::uint32_t delivery_count = 0;

    bool operator==(const Message&) const = default;

    std::string payload_str() const {
        return std::string(payload.begin(), payload.end());
    }
};

inline std::vector<std::uint8_t> to_bytes(const std::string& s) {
    return std::vector<std::uint8_t>(s.begin(), s.end());
}

struct QueueStats {
    std::string queue;
    std::uint64_t depth = 0;          // messages awaiting delivery
    std::uint32_t consumer_count = 0;
    double enqueue_rate = 0.0;        // messages/second over the stats window
    std::int64_t depth_delta = 0;     // depth change over the stats window

    bool operator==(const QueueStats&) const = default;
};

struct Subscription {
    std::string queue;
    std::uint32_t prefetch = 1;
    std::string consumer_id;
};

nlohmann::json message_to_json(const Message& m);
Message message_from_json(const nlohmann::json& j);

nlohmann::json stats_to_json(const QueueStats& s);
QueueStats stats_from_json(const nlohmann::json& j);

bool valid_queue_name(const std::string& name); // [a-z0-9._-]{1,128}

} // namespace pdmflow::mq
