#include "pdmflow/mq/broker.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>

#include "pdmflow/mq/frame.hpp"
#include "pdmflow/util/b64.hpp"
#include "pdmflow/util/error.hpp"
#include "pdmflow/util/ids.hpp"

namespace pdmflow::mq {

namespace fs = std::filesystem;

Broker::Broker(BrokerConfig cfg) : cfg_(std::move(cfg)) {
    if (!cfg_.clock) cfg_.clock = real_clock();
    if (!cfg_.journal_dir.empty()) {
        fs::create_directories(cfg_.journal_dir);
        replay_journals();
    }
}

Broker::~Broker() = default;

QueueStats Broker::declare_queue(const std::string& name) {
    if (!valid_queue_name(name)) fail("invalid-name", "queue name must match [a-z0-9._-]{1,128}: '" + name + "'");
    std::lock_guard lock(mu_);
    QueueRec& q = ensure_queue(name);
    return stats_locked(q);
}

bool Broker::has_queue(const std::string& name) const {
    std::lock_guard lock(mu_);
    return queues_.count(name) > 0;
}

std::vector<std::string> Broker::queue_names() const {
    std::lock_guard lock(mu_);
    std::vector<std::string> names;
    names.reserve(queues_.size());
    for (const auto& [name, q] : queues_) names.push_back(name);
    return names;
}

std::string Broker::publish(const std::string& queue, std::vector<std::uint8_t> payload,
                            std::map<std::string, std::string> headers) {
    if (payload.size() > cfg_.max_payload_bytes)
        fail("payload-too-large", std::to_string(payload.size()) + " bytes > max " +
                                      std::to_string(cfg_.max_payload_bytes));
    std::lock_guard lock(mu_);
    QueueRec& q = queue_or_fail(queue);

    Message m;
    m.msg_id = new_uuid();
    m.queue = queue;
    m.headers = std::move(headers);
    m.payload = std::move(payload);
    m.delivery_count = 0;

    journal_append(queue, nlohmann::json{{"op", "pub"}, {"msg", message_to_json(m)}});
    q.publish_times.push_back(cfg_.clock());
    q.published++;
    q.pending.push_back(Pending{m, q.next_seq++});
    note_depth(q);
    dispatch(q);
    return m.msg_id;
}

std::string Broker::publish(const std::string& queue, const std::string& payload,
                            std::map<std::string, std::string> headers) {
    return publish(queue, to_bytes(payload), std::move(headers));
}

Subscription Broker::consume(const std::string& queue, std::uint32_t prefetch) {
    if (prefetch < 1) fail("invalid-prefetch", "prefetch must be >= 1");
    std::lock_guard lock(mu_);
    QueueRec& q = queue_or_fail(queue);

    ConsumerRec c;
    c.id = "c-" + std::to_string(++consumer_counter_) + "-" + new_uuid().substr(0, 8);
    c.queue = queue;
    c.prefetch = prefetch;
    const std::string id = c.id;
    consumers_.emplace(id, std::move(c));
    q.consumers.push_back(id);
    dispatch(q);
    return Subscription{queue, prefetch, id};
}

std::optional<Message> Broker::next_delivery(const std::string& consumer_id, int timeout_ms) {
    std::unique_lock lock(mu_);
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
    while (true) {
        auto it = consumers_.find(consumer_id);
        if (it == consumers_.end()) return std::nullopt;
        if (!it->second.mailbox.empty()) {
            Message m = std::move(it->second.mailbox.front());
            it->second.mailbox.pop_front();
            return m;
        }
        if (timeout_ms <= 0 || cv_.wait_until(lock, deadline) == std::cv_status::timeout) {
            // final recheck after timeout
            it = consumers_.find(consumer_id);
            if (it != consumers_.end() && !it->second.mailbox.empty()) {
                Message m = std::move(it->second.mailbox.front());
                it->second.mailbox.pop_front();
                return m;
            }
            return std::nullopt;
        }
    }
}

void Broker::ack(const std::string& consumer_id, const std::string& msg_id) {
    std::lock_guard lock(mu_);
    auto cit = consumers_.find(consumer_id);
    if (cit == consumers_.end()) fail("unknown-delivery", "unknown consumer " + consumer_id);
    auto mit = cit->second.unacked.find(msg_id);
    if (mit == cit->second.unacked.end())
        fail("unknown-delivery", "message " + msg_id + " not in flight for " + consumer_id);

    QueueRec& q = queue_or_fail(cit->second.queue);
    cit->second.unacked.erase(mit);
    q.in_flight--;
    q.acked++;
    journal_append(q.name, nlohmann::json{{"op", "ack"}, {"msg_id", msg_id}});
    dispatch(q);
}

void Broker::nack(const std::string& consumer_id, const std::string& msg_id, bool requeue) {
    std::lock_guard lock(mu_);
    auto cit = consumers_.find(consumer_id);
    if (cit == consumers_.end()) fail("unknown-delivery", "unknown consumer " + consumer_id);
    auto mit = cit->second.unacked.find(msg_id);
    if (mit == cit->second.unacked.end())
        fail("unknown-delivery", "message " + msg_id + " not in flight for " + consumer_id);

    QueueRec& q = queue_or_fail(cit->second.queue);
    Pending p = std::move(mit->second);
    cit->second.unacked.erase(mit);
    q.in_flight--;

    if (requeue) {
        q.pending.push_front(std::move(p)); // delivery_count preserved
        note_depth(q);
    } else {
        dead_letter(q, std::move(p.msg));
    }
    dispatch(q);
}

void Broker::unsubscribe(const std::string& consumer_id) {
    std::lock_guard lock(mu_);
    auto cit = consumers_.find(consumer_id);
    if (cit == consumers_.end()) return; // already gone
    QueueRec& q = queue_or_fail(cit->second.queue);

    // Unacked messages return to the head in original publish order.
    std::vector<Pending> returned;
    returned.reserve(cit->second.unacked.size());
    for (auto& [id, p] : cit->second.unacked) returned.push_back(std::move(p));
    std::sort(returned.begin(), returned.end(),
              [](const Pending& a, const Pending& b) { return a.seq < b.seq; });
    for (auto it = returned.rbegin(); it != returned.rend(); ++it)
        q.pending.push_front(std::move(*it));
    q.in_flight -= returned.size();
    if (!returned.empty()) note_depth(q);

    auto pos = std::find(q.consumers.begin(), q.consumers.end(), consumer_id);
    if (pos != q.consumers.end()) {
        const std::size_t idx = static_cast<std::size_t>(pos - q.consumers.begin());
        q.consumers.erase(pos);
        if (q.rr_cursor > idx) q.rr_cursor--;
        if (!q.consumers.empty()) q.rr_cursor %= q.consumers.size();
        else q.rr_cursor = 0;
    }
    consumers_.erase(cit);
    dispatch(q);
    cv_.notify_all();
}

QueueStats Broker::queue_stats(const std::string& queue) const {
    std::lock_guard lock(mu_);
    return stats_locked(queue_or_fail(queue));
}

QueueAccounting Broker::accounting(const std::string& queue) const {
    std::lock_guard lock(mu_);
    const QueueRec& q = queue_or_fail(queue);
    QueueAccounting a;
    a.published = q.published;
    a.acked = q.acked;
    a.dead_lettered = q.dead_lettered;
    a.in_flight = q.in_flight;
    a.depth = q.pending.size();
    return a;
}

Broker::QueueRec& Broker::queue_or_fail(const std::string& name) {
    auto it = queues_.find(name);
    if (it == queues_.end()) fail("unknown-queue", "queue '" + name + "' not declared");
    return it->second;
}

const Broker::QueueRec& Broker::queue_or_fail(const std::string& name) const {
    auto it = queues_.find(name);
    if (it == queues_.end()) fail("unknown-queue", "queue '" + name + "' not declared");
    return it->second;
}

Broker::QueueRec& Broker::ensure_queue(const std::string& name) {
    auto it = queues_.find(name);
    if (it != queues_.end()) return it->second;
    QueueRec q;
    q.name = name;
    auto [ins, ok] = queues_.emplace(name, std::move(q));
    return ins->second;
}

// Assign pending messages to consumers with spare prefetch capacity,
// round-robin from rr_cursor in registration order. Messages that already
// burned max_delivery_count attempts go to the dead-letter queue instead.
void Broker::dispatch(QueueRec& q) {
    bool delivered = false;
    while (!q.pending.empty()) {
        if (q.pending.front().msg.delivery_count >= cfg_.max_delivery_count) {
            Pending p = std::move(q.pending.front());
            q.pending.pop_front();
            note_depth(q);
            dead_letter(q, std::move(p.msg));
            continue;
        }
        if (q.consumers.empty()) break;

        ConsumerRec* target = nullptr;
        for (std::size_t step = 0; step < q.consumers.size(); ++step) {
            const std::size_t idx = (q.rr_cursor + step) % q.consumers.size();
            ConsumerRec& c = consumers_.at(q.consumers[idx]);
            if (c.unacked.size() < c.prefetch) {
                target = &c;
                q.rr_cursor = (idx + 1) % q.consumers.size();
                break;
            }
        }
        if (!target) break; // everyone at prefetch limit

        Pending p = std::move(q.pending.front());
        q.pending.pop_front();
        p.msg.delivery_count++;
        target->unacked.emplace(p.msg.msg_id, Pending{p.msg, p.seq});
        target->mailbox.push_back(std::move(p.msg));
        q.in_flight++;
        note_depth(q);
        delivered = true;
    }
    if (delivered) cv_.notify_all();
}

void Broker::dead_letter(QueueRec& source, Message msg) {
    source.dead_lettered++;
    QueueRec& dlq = ensure_queue(source.name + ".dlq");
    msg.queue = dlq.name;
    journal_append(source.name, nlohmann::json{{"op", "dlq"}, {"msg_id", msg.msg_id}});
    journal_append(dlq.name, nlohmann::json{{"op", "pub"}, {"msg", message_to_json(msg)}});
    dlq.published++;
    dlq.publish_times.push_back(cfg_.clock());
    dlq.pending.push_back(Pending{std::move(msg), dlq.next_seq++});
    note_depth(dlq);
    dispatch(dlq);
}

void Broker::note_depth(QueueRec& q) {
    q.depth_events.emplace_back(cfg_.clock(), q.pending.size());
}

QueueStats Broker::stats_locked(const QueueRec& q) const {
    const std::int64_t now = cfg_.clock();
    const std::int64_t window_us = static_cast<std::int64_t>(cfg_.stats_window_s * 1e6);
    const std::int64_t boundary = now - window_us;

    QueueStats s;
    s.queue = q.name;
    s.depth = q.pending.size();
    s.consumer_count = static_cast<std::uint32_t>(q.consumers.size());

    // enqueue_rate: publishes inside the window / window seconds
    auto& times = const_cast<std::deque<std::int64_t>&>(q.publish_times);
    while (!times.empty() && times.front() < boundary) times.pop_front();
    s.enqueue_rate = cfg_.stats_window_s > 0
                         ? static_cast<double>(times.size()) / cfg_.stats_window_s
                         : 0.0;

    // depth_delta: current depth minus depth at window start; the newest event
    // at or before the boundary is the baseline.
    auto& events = const_cast<std::deque<std::pair<std::int64_t, std::uint64_t>>&>(q.depth_events);
    while (events.size() >= 2 && events[1].first <= boundary) events.pop_front();
    std::uint64_t base = 0;
    if (!events.empty() && events.front().first <= boundary) base = events.front().second;
    s.depth_delta = static_cast<std::int64_t>(s.depth) - static_cast<std::int64_t>(base);
    return s;
}

void Broker::journal_append(const std::string& queue, const nlohmann::json& record) {
    if (cfg_.journal_dir.empty()) return;
    std::ofstream out(fs::path(cfg_.journal_dir) / (queue + ".journal"),
                      std::ios::app | std::ios::binary);
    out << record.dump() << '\n';
}

// Recovery: pending = published − acked − dead-lettered, in publish order.
// Delivery attempts are not journaled; recovered messages restart at count 0.
void Broker::replay_journals() {
    for (const auto& entry : fs::directory_iterator(cfg_.journal_dir)) {
        if (entry.path().extension() != ".journal") continue;
        const std::string qname = entry.path().stem().string();
        if (!valid_queue_name(qname)) continue;
        QueueRec& q = ensure_queue(qname);

        std::vector<Message> order;
        std::map<std::string, std::size_t> index;
        std::map<std::string, bool> removed;
        std::ifstream in(entry.path());
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded()) continue; // torn tail write
            const std::string op = j.value("op", "");
            if (op == "pub") {
                Message m = message_from_json(j.at("msg"));
                index[m.msg_id] = order.size();
                order.push_back(std::move(m));
                q.published++;
            } else if (op == "ack" || op == "dlq") {
                removed[j.value("msg_id", "")] = true;
                if (op == "ack") q.acked++;
                else q.dead_lettered++;
            }
        }
        for (auto& m : order) {
            if (removed.count(m.msg_id)) continue;
            m.delivery_count = 0;
            q.pending.push_back(Pending{std::move(m), q.next_seq++});
        }
        note_depth(q);
    }
}

} // namespace pdmflow::mq
