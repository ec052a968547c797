#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "pdmflow/mq/message.hpp"

namespace pdmflow::mq {

// Wire frame: 4-byte big-endian payload length N (N <= 16 MiB) followed by N
// bytes of UTF-8 JSON. Ops: declare|publish|consume|ack|nack|stats|deliver|ok|error.
inline constexpr std::size_t kMaxFrameBytes = 16 * 1024 * 1024;

std::string encode_frame(const nlohmann::json& body);

enum class FrameStatus { ok, need_more, malformed };

struct FrameDecode {
    FrameStatus status = FrameStatus::need_more;
    nlohmann::json body;
    std::size_t consumed = 0;
    std::string reason; // set when malformed
};

FrameDecode try_decode_frame(const std::uint8_t* data, std::size_t n);

// Message codec over the same framing: a full message rides an op:"deliver"
// frame. decode(encode(m)) == m for every valid message.
std::string encode_frame(const Message& m);

// Throws Error("truncated-frame") when more bytes are needed and
// Error("malformed-frame") on garbage; never consumes partial input.
Message decode_frame(const std::uint8_t* data, std::size_t n);
Message decode_frame(const std::string& bytes);

// Accumulates stream bytes and yields complete frames.
class FrameReader {
public:
    void feed(const std::uint8_t* data, std::size_t n);
    // nullopt = need more bytes; throws Error("malformed-frame") on bad input.
    std::optional<nlohmann::json> next();

private:
    std::string buf_;
};

} // namespace pdmflow::mq
