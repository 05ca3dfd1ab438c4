#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"

#include "oeis/integer.hpp"

namespace oeis::protocol {

using json = nlohmann::json;

struct Request {
  std::string cmd;
  json args = json::object();
  std::optional<json> id;
};

// Structured command failure; becomes {"status":"error","error":{...}}.
class CommandFailure : public std::runtime_error {
 public:
  CommandFailure(std::string code, const std::string& message, json extra = json::object())
      : std::runtime_error(message), code(std::move(code)), extra(std::move(extra)) {}
  std::string code;
  json extra;  // merged into the error object
};

// Throws CommandFailure("bad_request") on anything but {"cmd": str, "args": obj?, "id": str|num?}.
Request parse_request(std::string_view line);

// Best-effort id extraction from a line that failed to parse as a request.
std::optional<json> salvage_id(std::string_view line);

json ok_response(const std::optional<json>& id, json result);
json error_response(const std::optional<json>& id, std::string_view code, std::string_view message,
                    const json& extra = json::object());

// One line, no trailing newline; invalid UTF-8 is replaced, never thrown.
std::string serialize(const json& j);

// Integers on the wire: results are decimal strings; inputs accept JSON
// integers or decimal strings.
std::optional<Integer> integer_from_json(const json& j);
json integer_to_json(const Integer& v);

}  // namespace oeis::protocol
