#pragma once

#include <memory>

#include <spdlog/spdlog.h>

namespace ghostsweep {

/// Library-wide logger writing to stderr. Level comes from GHOSTSWEEP_LOG
/// (trace, debug, info, warn, error, off); default is warn.
spdlog::logger& log();

}  // namespace ghostsweep
