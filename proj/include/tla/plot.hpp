#pragma once

#include "tla/run.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace tla {

/// Time against distance with the active position bound and the reference.
std::string distance_plot_svg(const std::vector<LogRow>& rows, const std::string& title);
/// Time against speed.
std::string speed_plot_svg(const std::vector<LogRow>& rows, const std::string& title);

/// Writes distance_time.svg and speed_time.svg into `dir`. Throws
/// std::invalid_argument on an empty log.
std::vector<std::filesystem::path> emit_plots(const std::vector<LogRow>& rows,
                                              const std::filesystem::path& dir,
                                              const std::string& title);

}  // namespace tla
