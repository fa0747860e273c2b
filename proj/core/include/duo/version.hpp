#pragma once

namespace duo {
inline constexpr const char* version = "0.3.0";
}
