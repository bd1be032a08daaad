#pragma once

namespace growthlab {

inline constexpr const char* version = "0.1.0";

}  // namespace growthlab
