#pragma once

#include "adagrid/session.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace adagrid {

struct ServerOptions {
    std::string host = "127.0.0.1";
    /// 0 picks a free port.
    int port = 8765;
    std::filesystem::path data_dir = "adagrid-data";
    /// Required as "Authorization: Bearer <token>" when set. Mandatory for
    /// non-loopback hosts.
    std::optional<std::string> token;
    /// Served under /ui when set.
    std::optional<std::filesystem::path> static_dir;
};

bool is_loopback_host(const std::string& host);

/// HTTP/JSON front end of a SessionStore.
///
///   GET  /health
///   GET  /sessions
///   POST /sessions                     {"strategy": ..., "transform": ...}
///   GET  /sessions/{id}
///   GET  /sessions/{id}/trace          newline-delimited step records
///   POST /sessions/{id}/suggest
///   POST /sessions/{id}/outcome        {"label": -1 | 1}
///   GET  /sessions/{id}/report?slice_dims=i,j&grid=64&fixed=a,,b
///
/// Errors are {"code", "message", "witnesses"?}.
class SessionServer {
public:
    /// Throws UsageError for a non-loopback host without a token.
    explicit SessionServer(ServerOptions opt);
    ~SessionServer();

    /// Binds the socket and returns the port. Throws IoError if busy.
    int bind();
    /// Serves until stop(). Call bind() first.
    void serve();
    void stop();
    void wait_until_ready() const;

    std::string address() const;
    SessionStore& store() { return store_; }

private:
    struct Impl;
    ServerOptions opt_;
    SessionStore store_;
    std::unique_ptr<Impl> impl_;
    int port_ = 0;
};

}  // namespace adagrid
