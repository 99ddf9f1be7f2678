#pragma once

#ifndef DECONVBAND_VERSION
#define DECONVBAND_VERSION "0.0.0"
#endif

namespace deconvband {

inline constexpr const char* kVersion = DECONVBAND_VERSION;

} // namespace deconvband
