#pragma once

namespace mast {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mast
