#include "onestage/log.hpp"

#include <cstdio>

#include <json.hpp>

namespace onestage {

void log_event(std::string_view stage, std::string_view event,
               const std::map<std::string, std::string>& fields) {
  nlohmann::ordered_json j;
  j["stage"] = std::string(stage);
  j["event"] = std::string(event);
  for (const auto& [key, value] : fields) j[key] = value;
  std::string line = j.dump();
  line += '\n';
  std::fwrite(line.data(), 1, line.size(), stderr);
  std::fflush(stderr);
}

}  // namespace onestage
