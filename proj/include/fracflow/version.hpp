#pragma once

namespace fracflow {
inline constexpr const char* kVersion = "1.0.0";
}
