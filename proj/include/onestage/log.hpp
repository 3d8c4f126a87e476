#pragma once

#include <map>
#include <string>
#include <string_view>

namespace onestage {

// One JSON object per line on stderr; stdout stays reserved for the
// human-readable summaries the CLI prints itself.
void log_event(std::string_view stage, std::string_view event,
               const std::map<std::string, std::string>& fields = {});

}  // namespace onestage
