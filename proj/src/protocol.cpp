#include "oeis/protocol.hpp"

namespace oeis::protocol {

Request parse_request(std::string_view line) {
  json j = json::parse(line.begin(), line.end(), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw CommandFailure("bad_request", "request is not valid JSON");
  if (!j.is_object()) throw CommandFailure("bad_request", "request must be a JSON object");
  Request r;
  if (auto it = j.find("id"); it != j.end() && !it->is_null()) {
    if (!it->is_string() && !it->is_number_integer() && !it->is_number_unsigned()) {
      throw CommandFailure("bad_request", "id must be a string or integer");
    }
    r.id = *it;
  }
  auto cmd = j.find("cmd");
  if (cmd == j.end() || !cmd->is_string() || cmd->get_ref<const std::string&>().empty()) {
    throw CommandFailure("bad_request", "missing or empty \"cmd\"");
  }
  r.cmd = cmd->get<std::string>();
  if (auto args = j.find("args"); args != j.end()) {
    if (!args->is_object()) throw CommandFailure("bad_request", "\"args\" must be an object");
    r.args = *args;
  }
  return r;
}

std::optional<json> salvage_id(std::string_view line) {
  json j = json::parse(line.begin(), line.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  auto it = j.find("id");
  if (it == j.end() || !(it->is_string() || it->is_number_integer() || it->is_number_unsigned())) return std::nullopt;
  return *it;
}

namespace {

nlohmann::ordered_json head(const std::optional<json>& id, std::string_view status) {
  nlohmann::ordered_json r;
  if (id) r["id"] = *id;
  r["status"] = status;
  return r;
}

}  // namespace

json ok_response(const std::optional<json>& id, json result) {
  auto r = head(id, "ok");
  r["result"] = std::move(result);
  return json(r);
}

json error_response(const std::optional<json>& id, std::string_view code, std::string_view message, const json& extra) {
  json err = {{"code", code}, {"message", message}};
  for (auto it = extra.begin(); it != extra.end(); ++it) err[it.key()] = it.value();
  auto r = head(id, "error");
  r["error"] = std::move(err);
  return json(r);
}

std::string serialize(const json& j) {
  // Emit id/status first for readability in logs.
  nlohmann::ordered_json out;
  if (auto it = j.find("id"); it != j.end()) out["id"] = *it;
  if (auto it = j.find("status"); it != j.end()) out["status"] = *it;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() != "id" && it.key() != "status") out[it.key()] = it.value();
  }
  return out.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::optional<Integer> integer_from_json(const json& j) {
  if (j.is_number_unsigned()) return Integer::from_string(std::to_string(j.get<std::uint64_t>()));
  if (j.is_number_integer()) return Integer(j.get<std::int64_t>());
  if (j.is_string()) return Integer::from_string(j.get_ref<const std::string&>());
  return std::nullopt;
}

json integer_to_json(const Integer& v) { return v.to_string(); }

}  // namespace oeis::protocol
