#include "ghostsweep/log.hpp"

#include <cstdlib>

#include <spdlog/sinks/stdout_color_sinks.h>

namespace ghostsweep {

spdlog::logger& log() {
  static std::shared_ptr<spdlog::logger> instance = [] {
    auto logger = spdlog::stderr_color_mt("ghostsweep");
    logger->set_pattern("[%l] %v");
    logger->set_level(spdlog::level::warn);
    if (const char* env = std::getenv("GHOSTSWEEP_LOG")) {
      logger->set_level(spdlog::level::from_str(env));
    }
    return logger;
  }();
  return *instance;
}

}  // namespace ghostsweep
