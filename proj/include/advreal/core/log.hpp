#pragma once

#include <functional>
#include <string>

namespace advreal {

using WarningSink = std::function<void(const std::string&)>;

/// Routes library warnings. The default sink writes each distinct message
/// to stderr once; an installed sink sees every occurrence.
void set_warning_sink(WarningSink sink);
void warn(const std::string& message);

}  // namespace advreal
