#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace pdmflow {

// Thin RAII wrappers over blocking POSIX TCP sockets. Frame parsing lives in
// the protocol layers; these only move bytes.
class TcpConn {
public:
    TcpConn() = default;
    explicit TcpConn(int fd) : fd_(fd) {}
    TcpConn(TcpConn&& other) noexcept;
    TcpConn& operator=(TcpConn&& other) noexcept;
    TcpConn(const TcpConn&) = delete;
    TcpConn& operator=(const TcpConn&) = delete;
    ~TcpConn();

    bool valid() const { return fd_ >= 0; }
    int fd() const { return fd_; }

    // Returns bytes read; 0 on orderly peer close. Throws Error("io") on failure.
    std::size_t read_some(std::uint8_t* buf, std::size_t n);
    void write_all(const std::uint8_t* buf, std::size_t n);
    void write_all(const std::string& data);

    // Wakes any blocked reader on this socket; safe from another thread.
    void shutdown_both() noexcept;
    void close() noexcept;

private:
    int fd_ = -1;
};

class TcpListener {
public:
    TcpListener() = default;
    ~TcpListener();
    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;

    // port 0 picks an ephemeral port; port() reports the bound one.
    void bind_and_listen(std::uint16_t port, const std::string& host = "0.0.0.0");
    std::uint16_t port() const { return port_; }

    // Blocks; returns an invalid conn once close() has been called.
    TcpConn accept_conn();
    void close() noexcept;
    bool closed() const { return fd_ < 0; }

private:
    int fd_ = -1;
    std::uint16_t port_ = 0;
};

TcpConn tcp_connect(const std::string& host, std::uint16_t port);

} // namespace pdmflow
