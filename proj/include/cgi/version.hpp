#pragma once

namespace cgi {

inline constexpr const char* kToolName = "cgisim";
inline constexpr const char* kToolVersion = "1.0.0";

}  // namespace cgi
