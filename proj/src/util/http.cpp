#include "c2r/util/http.hpp"

#include <httplib.h>

namespace c2r {

HttpResponse post_json(const std::string& url, const std::string& body,
                       const std::map<std::string, std::string>& headers,
                       std::chrono::milliseconds timeout) {
    HttpResponse out;
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        out.error = "malformed url: " + url;
        return out;
    }
    auto path_begin = url.find('/', scheme_end + 3);
    std::string origin = path_begin == std::string::npos ? url : url.substr(0, path_begin);
    std::string path = path_begin == std::string::npos ? "/" : url.substr(path_begin);

    httplib::Client client(origin);
    if (!client.is_valid()) {
        out.error = "unsupported url: " + url;
        return out;
    }
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    auto res = client.Post(path, h, body, "application/json");
    if (!res) {
        out.error = httplib::to_string(res.error());
        return out;
    }
    out.status = res->status;
    out.body = res->body;
    return out;
}

} // namespace c2r
