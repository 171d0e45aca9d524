#pragma once

namespace lpose {

inline constexpr const char* kVersion = "0.1.0";

// JSONL schema tags. Bump on any incompatible field change.
inline constexpr const char* kDatasetSchema = "lattice-pose/v1";
inline constexpr const char* kFitSchema = "lattice-pose-fit/v1";

}  // namespace lpose
