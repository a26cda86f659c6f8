#pragma once

namespace gnnbench {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace gnnbench
