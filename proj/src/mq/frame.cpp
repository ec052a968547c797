#include "pdmflow/mq/frame.hpp"

#include "pdmflow/util/b64.hpp"
#include "pdmflow/util/error.hpp"

namespace pdmflow::mq {

namespace {
const std::string kNameChars = "abcdefghijklmnopqrstuvwxyz0123456789._-";
}

bool valid_queue_name(const std::string& name) {
    if (name.empty() || name.size() > 128) return false;
    for (char c : name)
        if (kNameChars.find(c) == std::string::npos) return false;
    return true;
}

nlohmann::json message_to_json(const Message& m) {
    nlohmann::json j{
        {"msg_id", m.msg_id},
        {"queue", m.queue},
        {"payload_b64", b64_encode(m.payload)},
        {"delivery_count", m.delivery_count},
    };
    nlohmann::json headers = nlohmann::json::object();
    for (const auto& [k, v] : m.headers) headers[k] = v;
    j["headers"] = headers;
    return j;
}

Message message_from_json(const nlohmann::json& j) {
    Message m;
    m.msg_id = j.at("msg_id").get<std::string>();
    m.queue = j.at("queue").get<std::string>();
    m.payload = b64_decode(j.at("payload_b64").get<std::string>());
    m.delivery_count = j.value("delivery_count", 0u);
    if (j.contains("headers"))
        for (const auto& [k, v] : j.at("headers").items())
            m.headers[k] = v.get<std::string>();
    return m;
}

nlohmann::json stats_to_json(const QueueStats& s) {
    return {
        {"queue", s.queue},
        {"depth", s.depth},
        {"consumer_count", s.consumer_count},
        {"enqueue_rate", s.enqueue_rate},
        {"depth_delta", s.depth_delta},
    };
}

QueueStats stats_from_json(const nlohmann::json& j) {
    QueueStats s;
    s.queue = j.at("queue").get<std::string>();
    s.depth = j.at("depth").get<std::uint64_t>();
    s.consumer_count = j.at("consumer_count").get<std::uint32_t>();
    s.enqueue_rate = j.at("enqueue_rate").get<double>();
    s.depth_delta = j.at("depth_delta").get<std::int64_t>();
    return s;
}

std::string encode_frame(const nlohmann::json& body) {
    const std::string text = body.dump();
    if (text.size() > kMaxFrameBytes) fail("malformed-frame", "frame body exceeds 16 MiB");
    std::string out;
    out.reserve(4 + text.size());
    const std::uint32_t n = static_cast<std::uint32_t>(text.size());
    out.push_back(static_cast<char>((n >> 24) & 0xff));
    out.push_back(static_cast<char>((n >> 16) & 0xff));
    out.push_back(static_cast<char>((n >> 8) & 0xff));
    out.push_back(static_cast<char>(n & 0xff));
    out += text;
    return out;
}

FrameDecode try_decode_frame(const std::uint8_t* data, std::size_t n) {
    FrameDecode r;
    if (n < 4) return r; // need_more
    const std::uint32_t len = (std::uint32_t(data[0]) << 24) | (std::uint32_t(data[1]) << 16) |
                              (std::uint32_t(data[2]) << 8) | std::uint32_t(data[3]);
    if (len > kMaxFrameBytes) {
        r.status = FrameStatus::malformed;
        r.reason = "length prefix " + std::to_string(len) + " exceeds max frame size";
        return r;
    }
    if (n < 4 + static_cast<std::size_t>(len)) return r; // need_more
    const auto parsed = nlohmann::json::parse(data + 4, data + 4 + len, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object()) {
        r.status = FrameStatus::malformed;
        r.reason = "frame body is not a JSON object";
        return r;
    }
    r.status = FrameStatus::ok;
    r.body = parsed;
    r.consumed = 4 + len;
    return r;
}

std::string encode_frame(const Message& m) {
    nlohmann::json j = message_to_json(m);
    j["op"] = "deliver";
    return encode_frame(j);
}

Message decode_frame(const std::uint8_t* data, std::size_t n) {
    const FrameDecode r = try_decode_frame(data, n);
    if (r.status == FrameStatus::need_more) fail("truncated-frame", "need more bytes");
    if (r.status == FrameStatus::malformed) fail("malformed-frame", r.reason);
    if (r.body.value("op", "") != "deliver") fail("malformed-frame", "not a message frame");
    try {
        return message_from_json(r.body);
    } catch (const nlohmann::json::exception& e) {
        fail("malformed-frame", e.what());
    }
}

Message decode_frame(const std::string& bytes) {
    return decode_frame(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size());
}

void FrameReader::feed(const std::uint8_t* data, std::size_t n) {
    buf_.append(reinterpret_cast<const char*>(data), n);
}

std::optional<nlohmann::json> FrameReader::next() {
    const FrameDecode r =
        try_decode_frame(reinterpret_cast<const std::uint8_t*>(buf_.data()), buf_.size());
    if (r.status == FrameStatus::need_more) return std::nullopt;
    if (r.status == FrameStatus::malformed) fail("malformed-frame", r.reason);
    buf_.erase(0, r.consumed);
    return r.body;
}

} // namespace pdmflow::mq
