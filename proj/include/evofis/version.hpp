#pragma once

namespace evofis {

inline constexpr const char* kVersion = "0.1.0";

} // namespace evofis
