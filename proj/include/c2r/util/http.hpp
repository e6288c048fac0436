#pragma once

#include <chrono>
#include <map>
#include <string>

namespace c2r {

struct HttpResponse {
    int status = 0;     // 0 when no response arrived
    std::string body;
    std::string error;  // transport error description

    bool ok() const { return status >= 200 && status < 300; }
    /// Worth retrying: transport failure, 408, 429 or 5xx.
    bool transient() const { return status == 0 || status == 408 || status == 429 || status >= 500; }
};

/// POSTs a JSON body to an http:// or https:// URL.
HttpResponse post_json(const std::string& url, const std::string& body,
                       const std::map<std::string, std::string>& headers,
                       std::chrono::milliseconds timeout);

} // namespace c2r
