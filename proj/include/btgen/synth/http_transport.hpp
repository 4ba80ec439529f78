#pragma once

// HTTP transport for remote expansion. Requires cpp-httplib on the include path.

#include <chrono>
#include <cstdlib>
#include <optional>
#include <string>

#include <httplib.h>

#include "btgen/synth/remote.hpp"

namespace btgen {

inline constexpr const char* kRemoteEndpointEnv = "BTGEN_REMOTE_ENDPOINT";

/// The endpoint from the environment, if set.
inline std::optional<std::string> remote_endpoint_from_env() {
    const char* v = std::getenv(kRemoteEndpointEnv);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
}

/// POSTs the request to `endpoint` ("http://host:port/path") as JSON.
inline Transport http_transport(const std::string& endpoint, std::chrono::milliseconds timeout = std::chrono::seconds(30)) {
    const std::string scheme = "http://";
    if (endpoint.rfind(scheme, 0) != 0)
        throw Error(ErrorCode::InvalidArgs, "remote endpoint must start with http://, got '" + endpoint + "'");
    const std::size_t slash = endpoint.find('/', scheme.size());
    const std::string host = endpoint.substr(0, slash);
    const std::string path = slash == std::string::npos ? "/" : endpoint.substr(slash);
    return [host, path, timeout](const std::string& body) {
        httplib::Client client(host);
        client.set_connection_timeout(timeout);
        client.set_read_timeout(timeout);
        client.set_write_timeout(timeout);
        auto res = client.Post(path, body, "application/json");
        if (!res) throw Error(ErrorCode::RemoteUnavailable, host + path + ": " + httplib::to_string(res.error()));
        if (res->status != 200)
            throw Error(ErrorCode::RemoteUnavailable, host + path + " answered HTTP " + std::to_string(res->status));
        return res->body;
    };
}

}  // namespace btgen
