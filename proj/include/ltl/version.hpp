#pragma once

namespace ltl {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ltl
