#pragma once

namespace frohlich {

inline constexpr const char* version = "0.1.0";

}  // namespace frohlich
