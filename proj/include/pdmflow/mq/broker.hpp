#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "pdmflow/mq/message.hpp"
#include "pdmflow/util/clock.hpp"

namespace pdmflow::mq {

struct BrokerConfig {
    std::size_t max_payload_bytes = 8 * 1024 * 1024;
    std::uint32_t max_delivery_count = 3; // attempts before dead-lettering
    double stats_window_s = 10.0;
    std::string journal_dir;              // empty = in-memory only
    ClockFn clock;                        // defaults to real_clock()
};

// Introspection counters for conservation checks:
//   published == acked + in_flight + depth + dead_lettered  (at quiescence)
struct QueueAccounting {
    std::uint64_t published = 0;
    std::uint64_t acked = 0;
    std::uint64_t dead_lettered = 0;
    std::uint64_t in_flight = 0;
    std::uint64_t depth = 0;
};

// Embedded message broker: named FIFO queues, competing consumers with
// round-robin dispatch in registration order, prefetch-bounded in-flight
// windows, explicit ack/nack, redelivery on consumer loss, and `<queue>.dlq`
// dead-lettering once a message has been attempted max_delivery_count times.
//
// All queue mutation is serialized by one internal lock; handles returned to
// callers are plain ids and safe to move across threads.
class Broker {
public:
    explicit Broker(BrokerConfig cfg = {});
    ~Broker();

    QueueStats declare_queue(const std::string& name);
    bool has_queue(const std::string& name) const;
    std::vector<std::string> queue_names() const;

    std::string publish(const std::string& queue, std::vector<std::uint8_t> payload,
                        std::map<std::string, std::string> headers = {});
    std::string publish(const std::string& queue, const std::string& payload,
                        std::map<std::string, std::string> headers = {});

    Subscription consume(const std::string& queue, std::uint32_t prefetch);

    // Blocks up to timeout_ms for the next delivery to this consumer.
    std::optional<Message> next_delivery(const std::string& consumer_id, int timeout_ms);

    void ack(const std::string& consumer_id, const std::string& msg_id);
    void nack(const std::string& consumer_id, const std::string& msg_id, bool requeue);

    // Consumer disappears; its unacked messages return to the queue head in
    // their original order (the connection-loss path).
    void unsubscribe(const std::string& consumer_id);

    QueueStats queue_stats(const std::string& queue) const;
    QueueAccounting accounting(const std::string& queue) const;

    const BrokerConfig& config() const { return cfg_; }

private:
    struct Pending {
        Message msg;
        std::uint64_t seq = 0;
    };
    struct ConsumerRec {
        std::string id;
        std::string queue;
        std::uint32_t prefetch = 1;
        std::deque<Message> mailbox;            // dispatched, awaiting pickup
        std::map<std::string, Pending> unacked; // msg_id -> original seq + message
    };
    struct QueueRec {
        std::string name;
        std::deque<Pending> pending;
        std::vector<std::string> consumers; // registration order
        std::size_t rr_cursor = 0;
        std::uint64_t next_seq = 0;
        std::uint64_t published = 0, acked = 0, dead_lettered = 0, in_flight = 0;
        // window accounting; pruned lazily from the const stats path
        mutable std::deque<std::int64_t> publish_times;
        mutable std::deque<std::pair<std::int64_t, std::uint64_t>> depth_events; // (t, depth after)
    };

    QueueRec& queue_or_fail(const std::string& name);
    const QueueRec& queue_or_fail(const std::string& name) const;
    QueueRec& ensure_queue(const std::string& name);
    void dispatch(QueueRec& q);
    void dead_letter(QueueRec& source, Message msg);
    void note_depth(QueueRec& q);
    QueueStats stats_locked(const QueueRec& q) const;
    void journal_append(const std::string& queue, const nlohmann::json& record);
    void replay_journals();

    BrokerConfig cfg_;
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::map<std::string, QueueRec> queues_;
    std::map<std::string, ConsumerRec> consumers_;
    std::uint64_t consumer_counter_ = 0;
};

} // namespace pdmflow::mq
