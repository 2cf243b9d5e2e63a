#pragma once

#include <cstdint>

namespace mimo::streams {

// Purpose tags mixed into per-trial stream ids so that different estimators never share draws.
constexpr std::uint64_t kUplink = 0x1001;
constexpr std::uint64_t kUatf = 0x1002;
constexpr std::uint64_t kDownlink = 0x1003;
constexpr std::uint64_t kTheta = 0x1004;
constexpr std::uint64_t kPower = 0x1005;
constexpr std::uint64_t kTimeSplit = 0x1006;

}  // namespace mimo::streams
