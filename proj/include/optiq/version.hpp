#pragma once

namespace optiq {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace optiq
