#pragma once

namespace otmarl {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace otmarl
