#pragma once

namespace wvm {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace wvm
