#pragma once

namespace bandgraph {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace bandgraph
