#pragma once

namespace cbo {

inline constexpr const char* kVersion = "cbo-lab 0.1.0";

}  // namespace cbo
