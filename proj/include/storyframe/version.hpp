#pragma once

namespace storyframe {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace storyframe
