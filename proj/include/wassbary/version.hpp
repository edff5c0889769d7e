#pragma once

namespace wassbary {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace wassbary
