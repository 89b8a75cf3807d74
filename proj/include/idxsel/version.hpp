#pragma once

namespace idxsel {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace idxsel
