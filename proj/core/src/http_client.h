#pragma once

#include <chrono>
#include <string>

#include <nlohmann/json.hpp>

#include "newsbias/error.h"

namespace newsbias::http {

class TimeoutError : public Error {
 public:
  using Error::Error;
};

// POSTs `body` as JSON to endpoint + path and parses the JSON reply. Read and
// connection timeouts raise TimeoutError; transport failures, non-2xx
// statuses and unparsable replies raise Error.
nlohmann::json post_json(const std::string &endpoint, const std::string &path,
                         const nlohmann::json &body, std::chrono::milliseconds timeout);

}  // namespace newsbias::http
