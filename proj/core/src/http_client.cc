#include "http_client.h"

#include <httplib.h>

namespace newsbias::http {

nlohmann::json post_json(const std::string &endpoint, const std::string &path,
                         const nlohmann::json &body, std::chrono::milliseconds timeout) {
  httplib::Client client(endpoint);
  if (!client.is_valid()) throw Error("invalid endpoint " + endpoint);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  httplib::Result res = client.Post(path, body.dump(), "application/json");
  if (!res) {
    httplib::Error err = res.error();
    if (err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout) {
      throw TimeoutError(endpoint + path + ": timed out (" + httplib::to_string(err) + ")");
    }
    throw Error(endpoint + path + ": " + httplib::to_string(err));
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error(endpoint + path + ": HTTP status " + std::to_string(res->status));
  }
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::parse_error &e) {
    throw Error(endpoint + path + ": invalid JSON reply: " + e.what());
  }
}

}  // namespace newsbias::http
