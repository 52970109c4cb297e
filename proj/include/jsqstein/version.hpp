#pragma once

namespace jsqstein {

inline constexpr const char* kToolName = "jsqstein_cli";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace jsqstein
