#pragma once

namespace prequant {

// Artifact version stamped into every report row.
inline constexpr const char* kVersion = "0.1.0";

} // namespace prequant
