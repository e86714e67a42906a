#pragma once

namespace isolab {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kCorpusFormatVersion = 1;
inline constexpr const char* kCorpusFormatName = "EGC-v1";

}  // namespace isolab
