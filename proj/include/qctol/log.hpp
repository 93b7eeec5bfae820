#pragma once

#include <functional>
#include <string>

namespace qctol {

using WarningSink = std::function<void(const std::string&)>;

// Replaces the process-wide warning sink (stderr by default). Pass an empty
// function to silence warnings.
void set_warning_sink(WarningSink sink);
void warn(const std::string& message);

}  // namespace qctol
