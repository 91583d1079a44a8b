#pragma once

#include <span>
#include <string_view>
#include <utility>

namespace trafficgame::detail {

/// (name, file text) for every scenario compiled into the library.
std::span<const std::pair<std::string_view, std::string_view>> bundled_scenarios();

}  // namespace trafficgame::detail
